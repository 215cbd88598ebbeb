#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "seqinvest/profile.hpp"
#include "seqinvest/reward_rule.hpp"
#include "seqinvest/success_rate.hpp"

namespace seqinvest {

enum class Verdict { kSupported, kNotSupported };
// SelfFinanced caps each agent's investment by the share f(i,i) reserved
// for them.
enum class Mode { kUnconstrained, kSelfFinanced };

inline constexpr double kTolEq = 1e-8;

struct AgentResidual {
  std::size_t agent = 0;
  double investment = 0.0;
  double marginal_return = 0.0;  // R_i - f(i,i)
  double required_ratio = 0.0;   // g(x_i)/p(x_i)
  double residual = 0.0;
  bool corner = false;  // zero investment, or budget-capped in SelfFinanced
};

struct EquilibriumReport {
  Verdict verdict = Verdict::kSupported;
  Mode mode = Mode::kUnconstrained;
  std::vector<AgentResidual> residuals;
  std::vector<double> payoffs;  // U_i, aligned with residuals
  std::size_t checked_agents = 0;
  double max_residual = 0.0;
  std::vector<std::string> failures;

  bool supported() const { return verdict == Verdict::kSupported; }
};

// Smallest x with g(x)/p(x) = t, or 0 when t does not exceed g/p at 0.
// Throws InfeasibleError when t is beyond the ratio at the domain cap.
double invert_g_over_p(const SuccessRate& sr, double t);

// Optimal investment of agent i against x_{>i}. With a budget the result is
// capped at it.
double best_response(const SuccessRate& sr, const RewardRule& rule,
                     const ConstantTailProfile& x, std::size_t i,
                     std::optional<double> budget = std::nullopt);

// Agents whose conditions cover the whole profile: every agent up to where
// both the profile and the rule columns become stationary, plus a probe five
// agents further. Throws ShapeError for rules without stationary columns.
std::vector<std::size_t> check_agents(const RewardRule& rule,
                                      const ConstantTailProfile& x);

EquilibriumReport verify_equilibrium(const SuccessRate& sr,
                                     const RewardRule& rule,
                                     const ConstantTailProfile& x,
                                     Mode mode = Mode::kUnconstrained,
                                     double tol = kTolEq);

// Same checks on an explicit agent list; no stationarity needed.
EquilibriumReport verify_agents(const SuccessRate& sr, const RewardRule& rule,
                                const ConstantTailProfile& x,
                                const std::vector<std::size_t>& agents,
                                Mode mode = Mode::kUnconstrained,
                                double tol = kTolEq);

// Upper bounds B_i on any equilibrium investment when p <= 1 - epsilon:
// g(B_i)/p(B_i) = i + 1 + 1/epsilon.
class BoundSchedule {
 public:
  BoundSchedule(const SuccessRate& sr, double epsilon);
  double epsilon() const { return epsilon_; }
  double at(std::size_t i) const;

 private:
  SuccessRate sr_;
  double epsilon_;
};

BoundSchedule bounds(const SuccessRate& sr, double epsilon);
inline double bound_at(const BoundSchedule& b, std::size_t i) {
  return b.at(i);
}

struct DynamicsOptions {
  int max_sweeps = 1000;
  double damping = 1.0;  // in (0, 1]
  double tol = 1e-10;
  Mode mode = Mode::kUnconstrained;
  bool keep_history = false;
};

struct DynamicsResult {
  ConstantTailProfile profile;
  bool converged = false;
  int sweeps = 0;
  double last_change = 0.0;
  EquilibriumReport report;  // agents 0..horizon-1
  std::vector<std::vector<double>> history;  // x_0..x_{n-1} after each sweep
};

// Backward Gauss-Seidel sweeps over agents n-1, ..., 0 with x_{>=n} held at
// init. Non-convergence is reported in the result, not thrown.
DynamicsResult best_response_dynamics(const SuccessRate& sr,
                                      const RewardRule& rule,
                                      std::size_t horizon,
                                      const ConstantTailProfile& init,
                                      const DynamicsOptions& options = {});

struct ConstantSupport {
  bool supported = false;
  double gap = 0.0;  // g(c) - p(c)
  std::optional<RewardRule> witness;
};

// The constant profile c is an equilibrium of some rule iff g(c) <= p(c).
ConstantSupport constant_support_check(const SuccessRate& sr, double c);

struct NearConstantFeasibility {
  bool feasible = false;
  double value = 0.0;  // g(x0)/p(x0)
  double lower = 0.0;  // g(c)/p(c) + gamma - 2
  double upper = 0.0;  // (1 - g(c) - gamma)/(1 - p(c))
};

// Whether (x0, c, c, ...) is supported by some rule with f(i,i) >= gamma for
// all i >= 1.
NearConstantFeasibility near_constant_feasible(const SuccessRate& sr,
                                               double x0, double c,
                                               double gamma,
                                               double tol = 1e-9);

// A rule supporting (x0, c, c, ...) with diagonal floor gamma: a mixture of
// the rule maximizing and the rule minimizing the initiator's marginal
// return. Throws InfeasibleError when near_constant_feasible fails.
RewardRule synthesize_rule(const SuccessRate& sr, double x0, double c,
                           double gamma);

}  // namespace seqinvest
