#include "seqinvest/success_rate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <utility>

#include "seqinvest/errors.hpp"

namespace seqinvest {

namespace {

double sqrt_ratio_p(double x, double scale) {
  const double s = std::sqrt(x);
  return scale * s / (1.0 + s);
}

double sqrt_ratio_p_prime(double x, double scale) {
  if (x == 0.0) return std::numeric_limits<double>::infinity();
  const double s = std::sqrt(x);
  return scale / (2.0 * s * (1.0 + s) * (1.0 + s));
}

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> grid(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int j = 0; j < n; ++j) {
    grid[j] = std::exp(a + (b - a) * j / (n - 1));
  }
  grid.back() = hi;
  return grid;
}

// Keeps the largest violation seen for one check.
void record(ValidationCheck& check, double x, double violation) {
  if (!(violation > 0.0) && !std::isnan(violation)) return;
  if (std::isnan(violation)) violation = std::numeric_limits<double>::infinity();
  if (check.passed || violation > check.worst_value) {
    check.worst_x = x;
    check.worst_value = violation;
  }
  check.passed = false;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, SuccessRate>& registry() {
  static std::map<std::string, SuccessRate> r;
  return r;
}

}  // namespace

SuccessRate::SuccessRate(RateFamily family, std::string name, double epsilon,
                         double domain_cap, Fn p, Fn p_prime)
    : family_(family),
      name_(std::move(name)),
      epsilon_(epsilon),
      domain_cap_(domain_cap),
      p_(std::move(p)),
      p_prime_(std::move(p_prime)) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw DomainError("success rate: epsilon must lie in [0, 1)");
  }
  if (!(domain_cap > 0.0) || !std::isfinite(domain_cap)) {
    throw DomainError("success rate: domain_cap must be positive and finite");
  }
}

SuccessRate SuccessRate::SqrtRatio(double domain_cap) {
  return SuccessRate(
      RateFamily::kSqrtRatio, "sqrt_ratio", 0.0, domain_cap,
      [](double x) { return sqrt_ratio_p(x, 1.0); },
      [](double x) { return sqrt_ratio_p_prime(x, 1.0); });
}

SuccessRate SuccessRate::ScaledSqrtRatio(double epsilon, double domain_cap) {
  const double scale = 1.0 - epsilon;
  return SuccessRate(
      RateFamily::kScaledSqrtRatio, "scaled_sqrt_ratio", epsilon, domain_cap,
      [scale](double x) { return sqrt_ratio_p(x, scale); },
      [scale](double x) { return sqrt_ratio_p_prime(x, scale); });
}

SuccessRate SuccessRate::Custom(std::string name, Fn p, Fn p_prime,
                                double epsilon, double domain_cap) {
  if (!p || !p_prime) {
    throw DomainError("custom success rate needs both p and p'");
  }
  return SuccessRate(RateFamily::kCustom, std::move(name), epsilon,
                     domain_cap, std::move(p), std::move(p_prime));
}

void SuccessRate::check_arg(double x, const char* what) const {
  if (!std::isfinite(x) || x < 0.0) {
    throw DomainError(std::string(what) + ": argument must be finite and >= 0");
  }
  if (x > domain_cap_) {
    throw DomainError(std::string(what) + ": argument " + std::to_string(x) +
                      " exceeds domain_cap " + std::to_string(domain_cap_));
  }
}

double SuccessRate::p(double x) const {
  check_arg(x, "p");
  return p_(x);
}

double SuccessRate::p_prime(double x) const {
  check_arg(x, "p'");
  return p_prime_(x);
}

double SuccessRate::g(double x) const {
  check_arg(x, "g");
  if (x == 0.0) return 0.0;
  if (family_ != RateFamily::kCustom) {
    return 2.0 * x * (1.0 + std::sqrt(x));
  }
  return p_(x) / p_prime_(x);
}

double SuccessRate::g_prime(double x) const {
  check_arg(x, "g'");
  if (family_ != RateFamily::kCustom) return 2.0 + 3.0 * std::sqrt(x);
  const double h = std::max(1e-6, 1e-6 * x);
  const double hi = std::min(x + h, domain_cap_);
  if (x - h < 0.0) return (g(hi) - g(x)) / (hi - x);
  return (g(hi) - g(x - h)) / (hi - x + h);
}

double SuccessRate::ratio(double x) const {
  check_arg(x, "g/p");
  if (family_ != RateFamily::kCustom) {
    if (x == 0.0) return 0.0;
    const double s = std::sqrt(x);
    return 2.0 * s * (1.0 + s) * (1.0 + s) / (1.0 - epsilon_);
  }
  return 1.0 / p_prime_(x);
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ValidationReport validate(const SuccessRate& sr, int grid_points,
                          double tol_convex, double tol_limit) {
  ValidationReport report;
  ValidationCheck p_zero{"p_zero"};
  ValidationCheck p_cap{"p_capped"};
  ValidationCheck p_shape{"p_increasing_concave"};
  ValidationCheck g_above{"g_exceeds_x"};
  ValidationCheck g_convex{"g_convex"};
  ValidationCheck g_limit{"g_limit_zero"};
  ValidationCheck ratio_inc{"ratio_increasing"};

  const int n = std::max(grid_points, 3);
  const auto grid = log_grid(1e-9, sr.domain_cap(), n);
  std::vector<double> pv(n), gv(n), rv(n);
  try {
    record(p_zero, 0.0, std::fabs(sr.p(0.0)));
    for (int j = 0; j < n; ++j) {
      pv[j] = sr.p(grid[j]);
      gv[j] = sr.g(grid[j]);
      rv[j] = sr.ratio(grid[j]);
    }
  } catch (const std::exception&) {
    record(p_zero, 0.0, std::numeric_limits<double>::infinity());
    report.checks = {p_zero, p_cap, p_shape, g_above, g_convex, g_limit,
                     ratio_inc};
    return report;
  }

  const double cap = 1.0 - sr.epsilon();
  double prev_slope = std::numeric_limits<double>::infinity();
  double prev_gslope = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double x = grid[j];
    record(p_cap, x, pv[j] - cap * (1.0 + 1e-12));
    if (!(gv[j] > x)) record(g_above, x, std::max(x - gv[j], 1e-300));
    if (j == 0) continue;
    const double dx = x - grid[j - 1];
    const double slope = (pv[j] - pv[j - 1]) / dx;
    if (!(slope > 0.0)) record(p_shape, x, std::max(-slope, 1e-300));
    if (slope > prev_slope * (1.0 + 1e-9) + 1e-300) {
      record(p_shape, x, slope - prev_slope);
    }
    prev_slope = slope;
    const double gslope = (gv[j] - gv[j - 1]) / dx;
    const double scale = std::max(1.0, std::fabs(gslope));
    if (gslope < prev_gslope - tol_convex * scale) {
      record(g_convex, x, prev_gslope - gslope);
    }
    prev_gslope = gslope;
    if (!(rv[j] > rv[j - 1])) record(ratio_inc, x, rv[j - 1] - rv[j] + 1e-300);
  }
  record(g_limit, grid[0], std::fabs(gv[0]) - tol_limit);

  report.checks = {p_zero, p_cap, p_shape, g_above, g_convex, g_limit,
                   ratio_inc};
  return report;
}

void register_success_rate(const std::string& name, SuccessRate::Fn p,
                           SuccessRate::Fn p_prime, double epsilon,
                           double domain_cap) {
  auto rate = SuccessRate::Custom(name, std::move(p), std::move(p_prime),
                                  epsilon, domain_cap);
  std::lock_guard<std::mutex> lock(registry_mutex());
  registry().insert_or_assign(name, std::move(rate));
}

std::optional<SuccessRate> find_success_rate(const std::string& name) {
  std::lock_guard<std::mutex> lock(registry_mutex());
  auto it = registry().find(name);
  if (it == registry().end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> registered_success_rates() {
  std::lock_guard<std::mutex> lock(registry_mutex());
  std::vector<std::string> names;
  for (const auto& [name, rate] : registry()) names.push_back(name);
  return names;
}

}  // namespace seqinvest
