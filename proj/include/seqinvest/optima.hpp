#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seqinvest/equilibrium.hpp"
#include "seqinvest/profile.hpp"
#include "seqinvest/reward_rule.hpp"
#include "seqinvest/success_rate.hpp"

namespace seqinvest {

struct OptimumResult {
  std::string name;
  ConstantTailProfile profile;
  // Named defining equations and the magnitude of their residuals.
  std::vector<std::pair<std::string, double>> residuals;
  RewardRule supporting_rule = RewardRule::EqualSplit();
  Mode mode = Mode::kUnconstrained;
  double objective = 0.0;  // welfare, or the initiator's payoff
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int iterations = 0;

  double x0() const { return profile.at(0); }
  double c() const { return profile.tail(); }
  double max_residual() const;
};

// Constant investment maximizing (1 - c)/(1 - p(c)).
double first_best_investment(const SuccessRate& sr);

// Constant profile c* with g(c*) = p(c*), supported by equal split.
OptimumResult socially_optimal(const SuccessRate& sr);

// Near-constant profile maximizing the initiator's payoff, supported by a
// fixed-fraction rule.
OptimumResult initiator_optimal(const SuccessRate& sr);

// Welfare-maximizing near-constant profile under budget constraints,
// supported by a fixed-fraction rule with a diagonal floor.
OptimumResult self_financed_optimal(const SuccessRate& sr,
                                    int grid_points = 256);

// Root of g(d) = 1: the initiator's marginal return (1 - g)/(1 - p) is
// positive exactly on [0, d).
double initiator_peak_bound(const SuccessRate& sr);

struct RegionRow {
  double c = 0.0;
  std::optional<double> x0_lower;
  std::optional<double> x0_upper;
};

// Largest tail investment with a feasible initiator in the mode.
double region_limit(const SuccessRate& sr, Mode mode);
// Uniform grid of `points` tail values strictly inside (0, region_limit).
std::vector<double> region_grid(const SuccessRate& sr, Mode mode, int points);
std::vector<RegionRow> region_sweep(const SuccessRate& sr,
                                    const std::vector<double>& c_grid,
                                    Mode mode);
// Tail value where the unconstrained lower and upper boundaries meet.
double region_intersection(const SuccessRate& sr);

}  // namespace seqinvest
