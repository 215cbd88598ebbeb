#include "seqinvest/optima.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqinvest/errors.hpp"
#include "seqinvest/scalar_solvers.hpp"

namespace seqinvest {

namespace {

constexpr double kCLo = 1e-12;

// (1 - h(c))/(1 - p(c)) for the three programs.
double constant_welfare(const SuccessRate& sr, double c) {
  return (1.0 - c) / (1.0 - sr.p(c));
}

double initiator_return(const SuccessRate& sr, double c) {
  return (1.0 - sr.g(c)) / (1.0 - sr.p(c));
}

double budget_return(const SuccessRate& sr, double c) {
  return (1.0 - c - sr.g(c)) / (1.0 - sr.p(c));
}

double root_in_unit(const SuccessRate& sr, auto&& f) {
  const double hi = expand_upper(f, kCLo, std::fmin(1.0, sr.domain_cap()),
                                 sr.domain_cap());
  return bisect(f, kCLo, hi, 1e-15, 400).argument;
}

}  // namespace

double OptimumResult::max_residual() const {
  double m = 0.0;
  for (const auto& [name, r] : residuals) m = std::max(m, r);
  return m;
}

double first_best_investment(const SuccessRate& sr) {
  auto f = [&](double c) { return constant_welfare(sr, c) - sr.ratio(c); };
  return bisect(f, kCLo, 1.0, 1e-15, 400).argument;
}

OptimumResult socially_optimal(const SuccessRate& sr) {
  const double c_fb = first_best_investment(sr);
  auto f = [&](double c) { return sr.g(c) - sr.p(c); };
  if (f(c_fb) <= 0.0) {
    throw BracketError("socially_optimal: g <= p up to the first best");
  }
  const ScalarSolve s = bisect(f, kCLo, c_fb, 1e-15, 400);
  const double c = s.argument;
  OptimumResult out;
  out.name = "socially_optimal";
  out.profile = ConstantTailProfile::Constant(c);
  out.residuals = {{"g_minus_p", std::fabs(sr.g(c) - sr.p(c))}};
  out.supporting_rule = RewardRule::EqualSplit();
  out.objective = constant_welfare(sr, c);
  out.bracket_lo = s.lo;
  out.bracket_hi = s.hi;
  out.iterations = s.iterations;
  return out;
}

double initiator_peak_bound(const SuccessRate& sr) {
  return root_in_unit(sr, [&](double c) { return sr.g(c) - 1.0; });
}

OptimumResult initiator_optimal(const SuccessRate& sr) {
  const double d = initiator_peak_bound(sr);
  const ScalarSolve gs = golden_section_max(
      [&](double c) { return initiator_return(sr, c); }, kCLo, d);
  // Golden section only pins a smooth peak to about sqrt(machine epsilon);
  // finish on the first-order condition.
  auto foc = [&](double c) {
    return sr.p_prime(c) * (1.0 - sr.g(c)) - sr.g_prime(c) * (1.0 - sr.p(c));
  };
  double lo = std::max(kCLo, gs.argument - 1e-3 * d);
  double hi = std::min(d, gs.argument + 1e-3 * d);
  if (std::signbit(foc(lo)) == std::signbit(foc(hi))) {
    lo = kCLo;
    hi = d;
  }
  const ScalarSolve s = bisect(foc, lo, hi, 0.0, 400);
  const double c = s.argument;
  const double q = initiator_return(sr, c);
  const double x0 = invert_g_over_p(sr, q);

  OptimumResult out;
  out.name = "initiator_optimal";
  out.profile = ConstantTailProfile({x0}, c);
  out.residuals = {
      {"first_order",
       std::fabs(sr.g_prime(c) * (1.0 - sr.p(c)) -
                 sr.p_prime(c) * (1.0 - sr.g(c)))},
      {"initiator_ratio",
       std::fabs(sr.g(x0) * (1.0 - sr.p(c)) - sr.p(x0) * (1.0 - sr.g(c)))},
  };
  out.supporting_rule = RewardRule::FixedFraction(sr.ratio(c));
  out.objective = 1.0 + sr.g(x0) - x0;
  out.bracket_lo = s.lo;
  out.bracket_hi = s.hi;
  out.iterations = gs.iterations + s.iterations;
  return out;
}

OptimumResult self_financed_optimal(const SuccessRate& sr, int grid_points) {
  const double c_max = region_limit(sr, Mode::kSelfFinanced);
  auto x0_of = [&](double c) { return invert_g_over_p(sr, budget_return(sr, c)); };
  // Infeasible points (initiator beyond its budget f(0,0) = 1) score -inf.
  auto objective = [&](double c) {
    const double x0 = x0_of(c);
    if (x0 > 1.0) return -std::numeric_limits<double>::infinity();
    return 1.0 - x0 + sr.p(x0) * constant_welfare(sr, c);
  };

  const int n = std::max(grid_points, 3);
  const double step = c_max / n;
  int best = -1;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double v = objective(step * (j + 0.5));
    if (v > best_val) {
      best_val = v;
      best = j;
    }
  }
  if (best < 0) {
    throw InfeasibleError("self_financed_optimal: no feasible tail value");
  }
  const double lo = std::max(kCLo, step * (best - 0.5));
  const double hi = std::min(c_max, step * (best + 1.5));
  const ScalarSolve gs = golden_section_max(objective, lo, hi, 1e-12);
  // Polish on the derivative of the objective along the saturated budget,
  // when the peak is interior.
  auto slope = [&](double c) {
    const double x0 = x0_of(c);
    const double pc = sr.p(c);
    const double q = 1.0 - pc;
    const double ppc = sr.p_prime(c);
    const double gc = sr.g(c);
    const double value = (1.0 - c) / q;
    const double d_value = (-q + (1.0 - c) * ppc) / (q * q);
    const double d_budget =
        ((-1.0 - sr.g_prime(c)) * q + (1.0 - c - gc) * ppc) / (q * q);
    const double d_ratio = (sr.g_prime(x0) - 1.0) / sr.p(x0);
    return (sr.p_prime(x0) * value - 1.0) * d_budget / d_ratio +
           sr.p(x0) * d_value;
  };
  double c = gs.argument;
  int iterations = gs.iterations;
  {
    const double width = 1e-3 * c_max;
    const double a = std::max(kCLo, c - width);
    const double b = std::min(c_max, c + width);
    if (x0_of(a) > 0.0 && x0_of(b) <= 1.0 && slope(a) > 0.0 && slope(b) < 0.0) {
      const ScalarSolve s = bisect(slope, a, b, 0.0, 400);
      c = s.argument;
      iterations += s.iterations;
    }
  }
  const double x0 = x0_of(c);

  OptimumResult out;
  out.name = "self_financed_optimal";
  out.mode = Mode::kSelfFinanced;
  out.profile = ConstantTailProfile({x0}, c);
  out.residuals = {
      {"initiator_ratio", std::fabs(sr.ratio(x0) - budget_return(sr, c))}};
  const double alpha = sr.ratio(c) + c;
  if (alpha <= 1.0) {
    out.supporting_rule = RewardRule::FixedFractionFloor(alpha, c);
  } else {
    out.supporting_rule = synthesize_rule(sr, x0, c, c);
  }
  out.objective = objective(c);
  out.bracket_lo = gs.lo;
  out.bracket_hi = gs.hi;
  out.iterations = iterations;
  return out;
}

double region_limit(const SuccessRate& sr, Mode mode) {
  if (mode == Mode::kUnconstrained) return initiator_peak_bound(sr);
  return root_in_unit(sr, [&](double c) { return c + sr.g(c) - 1.0; });
}

std::vector<double> region_grid(const SuccessRate& sr, Mode mode, int points) {
  if (points < 1) throw DomainError("region grid needs at least one point");
  const double c_max = region_limit(sr, mode);
  std::vector<double> grid(points);
  for (int j = 0; j < points; ++j) grid[j] = c_max * (j + 1) / (points + 1);
  return grid;
}

std::vector<RegionRow> region_sweep(const SuccessRate& sr,
                                    const std::vector<double>& c_grid,
                                    Mode mode) {
  std::vector<RegionRow> rows;
  rows.reserve(c_grid.size());
  for (double c : c_grid) {
    RegionRow row;
    row.c = c;
    const double gamma = mode == Mode::kSelfFinanced ? c : 0.0;
    const double upper = (1.0 - sr.g(c) - gamma) / (1.0 - sr.p(c));
    const double lower = sr.ratio(c) + gamma - 2.0;
    if (upper >= 0.0 && lower <= upper) {
      row.x0_upper = invert_g_over_p(sr, upper);
      row.x0_lower = invert_g_over_p(sr, std::max(lower, 0.0));
    }
    rows.push_back(row);
  }
  return rows;
}

double region_intersection(const SuccessRate& sr) {
  const double c_star = socially_optimal(sr).c();
  const double d = initiator_peak_bound(sr);
  auto f = [&](double c) {
    return initiator_return(sr, c) - (sr.ratio(c) - 2.0);
  };
  return bisect(f, c_star, d, 0.0, 400).argument;
}

}  // namespace seqinvest
