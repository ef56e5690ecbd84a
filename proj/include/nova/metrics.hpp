#pragma once

#include <vector>

#include "nova/utility.hpp"

namespace nova {

struct QualitySeries {
  int client = 0;
  std::vector<double> q;
  std::vector<double> l;  // seconds
};

double mean_quality(const QualitySeries& s);
double var_quality(const QualitySeries& s);
// Generalized mean of U^Q(q) (plain mean for identity U^Q).
double mean_utility(const QualitySeries& s, const UqSpec& uq);
// Per-client QoE e = mean - U^V(var).
double qoe(const QualitySeries& s, const UtilitySpec& u);
// Sum over clients of U^E(e_i).
double phi_total(const std::vector<QualitySeries>& all, const std::vector<UtilitySpec>& u);

double qoe1(const QualitySeries& s);
double mean_square_difference(const QualitySeries& s);
double qoe2(const QualitySeries& s);

// total_bits = sum l_s f_s(q_s); alloc_bits = sum of r_k over the K slots.
double rebuffer_estimate(double total_bits, double total_seconds, double alloc_bits, long slots, double tau_slot);

// Stall time over played (video) time.
double realized_rebuffering(double stall_seconds, double played_seconds);

// total_bits / total_seconds is the delivered compression rate.
double cost_per_second(double total_bits, double total_seconds, double p_d);

double fairness_ratio(const std::vector<double>& qoe1_per_client);

}  // namespace nova
