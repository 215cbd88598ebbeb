#include "seqinvest/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include "seqinvest/errors.hpp"
#include "seqinvest/scalar_solvers.hpp"

namespace seqinvest {

using std::size_t;

double invert_g_over_p(const SuccessRate& sr, double t) {
  if (std::isnan(t)) throw DomainError("invert_g_over_p: target is NaN");
  if (t <= sr.ratio(0.0)) return 0.0;
  const double cap = sr.domain_cap();
  if (sr.ratio(cap) < t) {
    throw InfeasibleError("invert_g_over_p: target " + std::to_string(t) +
                          " exceeds g/p at the domain cap");
  }
  auto f = [&](double x) { return sr.ratio(x) - t; };
  const double hi = expand_upper(f, 0.0, std::fmin(1.0, cap), cap);
  // Run to floating-point resolution: g/p is steep near zero.
  return bisect(f, 0.0, hi, 0.0, 2000).argument;
}

double best_response(const SuccessRate& sr, const RewardRule& rule,
                     const ConstantTailProfile& x, size_t i,
                     std::optional<double> budget) {
  const double t = continuation_reward(sr, rule, x, i) - rule.eval(i, i);
  double xi = invert_g_over_p(sr, t);
  if (budget) xi = std::min(xi, std::max(*budget, 0.0));
  return xi;
}

std::vector<size_t> check_agents(const RewardRule& rule,
                                 const ConstantTailProfile& x) {
  const auto s = rule.stationary_from();
  if (!s) {
    throw ShapeError(std::string(rule_kind_name(rule.kind())) +
                     ": columns never become stationary; verify a finite "
                     "agent list instead");
  }
  const size_t last = std::max(*s, x.tail_start());
  std::vector<size_t> agents;
  for (size_t i = 0; i <= last; ++i) agents.push_back(i);
  agents.push_back(last + 5);
  return agents;
}

EquilibriumReport verify_agents(const SuccessRate& sr, const RewardRule& rule,
                                const ConstantTailProfile& x,
                                const std::vector<size_t>& agents, Mode mode,
                                double tol) {
  EquilibriumReport rep;
  rep.mode = mode;
  for (size_t i : agents) {
    AgentResidual r;
    r.agent = i;
    r.investment = x.at(i);
    const double fii = rule.eval(i, i);
    r.marginal_return = continuation_reward(sr, rule, x, i) - fii;
    r.required_ratio = sr.ratio(r.investment);
    if (mode == Mode::kSelfFinanced) {
      if (r.investment > fii + tol) {
        rep.failures.push_back("agent " + std::to_string(i) +
                               " invests beyond its budget f(i,i)");
        r.residual = r.investment - fii;
      } else if (r.investment >= fii - tol) {
        // Budget corner: the agent must want at least its whole budget.
        r.corner = true;
        r.residual = r.investment > 0.0
                         ? std::max(0.0, r.required_ratio - r.marginal_return)
                         : 0.0;
      }
      for (size_t j = i + 1; j <= i + 3 || j <= rule.column_tail(i).start;
           ++j) {
        if (rule.eval(i, j) < fii - tol) {
          rep.failures.push_back("f(" + std::to_string(i) + "," +
                                 std::to_string(j) + ") below f(i,i)");
          break;
        }
      }
    }
    if (!r.corner && r.residual == 0.0) {
      if (r.investment == 0.0) {
        r.corner = true;
        r.residual = std::max(0.0, r.marginal_return - r.required_ratio);
      } else {
        r.residual = std::fabs(r.marginal_return - r.required_ratio);
      }
    }
    if (r.residual > tol) {
      rep.failures.push_back("agent " + std::to_string(i) + " residual " +
                             std::to_string(r.residual));
    }
    rep.max_residual = std::max(rep.max_residual, r.residual);
    rep.residuals.push_back(r);
    rep.payoffs.push_back(expected_payoff(sr, rule, x, i));
  }
  rep.checked_agents = agents.size();
  rep.verdict =
      rep.failures.empty() ? Verdict::kSupported : Verdict::kNotSupported;
  return rep;
}

EquilibriumReport verify_equilibrium(const SuccessRate& sr,
                                     const RewardRule& rule,
                                     const ConstantTailProfile& x, Mode mode,
                                     double tol) {
  return verify_agents(sr, rule, x, check_agents(rule, x), mode, tol);
}

BoundSchedule::BoundSchedule(const SuccessRate& sr, double epsilon)
    : sr_(sr), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) {
    throw DomainError("bounds: epsilon must be positive");
  }
}

double BoundSchedule::at(size_t i) const {
  return invert_g_over_p(sr_, static_cast<double>(i) + 1.0 + 1.0 / epsilon_);
}

BoundSchedule bounds(const SuccessRate& sr, double epsilon) {
  return BoundSchedule(sr, epsilon);
}

namespace {

ConstantTailProfile assemble(const std::vector<double>& head,
                             const ConstantTailProfile& init) {
  std::vector<double> pre = head;
  for (size_t j = head.size(); j < init.tail_start(); ++j) {
    pre.push_back(init.at(j));
  }
  return {std::move(pre), init.tail()};
}

}  // namespace

DynamicsResult best_response_dynamics(const SuccessRate& sr,
                                      const RewardRule& rule, size_t horizon,
                                      const ConstantTailProfile& init,
                                      const DynamicsOptions& options) {
  if (horizon < 1) throw DomainError("dynamics: horizon must be >= 1");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw DomainError("dynamics: damping must lie in (0, 1]");
  }
  std::vector<double> head(horizon);
  for (size_t i = 0; i < horizon; ++i) head[i] = init.at(i);

  DynamicsResult out;
  ConstantTailProfile x = assemble(head, init);
  const double lam = options.damping;
  while (out.sweeps < options.max_sweeps) {
    double change = 0.0;
    for (size_t step = 0; step < horizon; ++step) {
      const size_t i = horizon - 1 - step;
      std::optional<double> budget;
      if (options.mode == Mode::kSelfFinanced) budget = rule.eval(i, i);
      const double br = best_response(sr, rule, x, i, budget);
      const double next = (1.0 - lam) * head[i] + lam * br;
      change = std::max(change, std::fabs(next - head[i]));
      head[i] = next;
      x = assemble(head, init);
    }
    ++out.sweeps;
    out.last_change = change;
    if (options.keep_history) out.history.push_back(head);
    if (change <= options.tol) {
      out.converged = true;
      break;
    }
  }
  out.profile = x;
  std::vector<size_t> agents(horizon);
  for (size_t i = 0; i < horizon; ++i) agents[i] = i;
  out.report = verify_agents(sr, rule, x, agents, options.mode);
  return out;
}

ConstantSupport constant_support_check(const SuccessRate& sr, double c) {
  ConstantSupport out;
  out.gap = sr.g(c) - sr.p(c);
  const double r = sr.ratio(c);
  out.supported = r <= 1.0 + 1e-12;
  if (out.supported) {
    out.witness =
        RewardRule::FixedFractionFloor(1.0, std::max(0.0, 1.0 - r));
  }
  return out;
}

NearConstantFeasibility near_constant_feasible(const SuccessRate& sr,
                                               double x0, double c,
                                               double gamma, double tol) {
  if (!(gamma >= 0.0)) throw DomainError("gamma must be >= 0");
  NearConstantFeasibility out;
  const double q = sr.p(c);
  out.value = sr.ratio(x0);
  out.lower = sr.ratio(c) + gamma - 2.0;
  out.upper = (1.0 - sr.g(c) - gamma) / (1.0 - q);
  if (x0 == 0.0) {
    // x0 = 0 only needs some attainable marginal return at or below g/p(0).
    out.feasible = out.lower <= out.value + tol && out.lower <= out.upper + tol;
  } else {
    out.feasible = out.lower - tol <= out.value && out.value <= out.upper + tol;
  }
  return out;
}

RewardRule synthesize_rule(const SuccessRate& sr, double x0, double c,
                           double gamma) {
  const auto feas = near_constant_feasible(sr, x0, c, gamma);
  if (!feas.feasible) {
    throw InfeasibleError(
        "synthesize_rule: g(x0)/p(x0) = " + std::to_string(feas.value) +
        " outside [" + std::to_string(feas.lower) + ", " +
        std::to_string(feas.upper) + "]");
  }
  const double r = sr.ratio(c);
  const double q = sr.p(c);
  RewardRule upper = RewardRule::EqualSplit();
  RewardRule lower = RewardRule::EqualSplit();
  if (r + gamma <= 1.0) {
    upper = RewardRule::F1(r + gamma, gamma);
    lower = RewardRule::F2(r + gamma, gamma);
  } else {
    const double beta = (r + gamma - 1.0) / (1.0 - q);
    upper = RewardRule::F3(beta, gamma);
    lower = RewardRule::F4(beta, gamma);
  }
  const auto tail = ConstantTailProfile::Constant(c);
  const double a_up = continuation_reward(sr, upper, tail, 0) - 1.0;
  const double a_lo = continuation_reward(sr, lower, tail, 0) - 1.0;
  double target = feas.value;
  if (x0 == 0.0) target = std::clamp(target, a_lo, std::max(a_lo, a_up));
  if (a_up - a_lo <= 0.0) return upper;
  const double lam = (target - a_lo) / (a_up - a_lo);
  if (std::fabs(lam - 1.0) <= 1e-9 || lam > 1.0) return upper;
  if (lam <= 1e-9) return lower;
  return RewardRule::Mixture(lam, upper, lower);
}

}  // namespace seqinvest
