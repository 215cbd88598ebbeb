#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace seqinvest {

enum class RateFamily { kSqrtRatio, kScaledSqrtRatio, kCustom };

// The success rate p together with its derived quantities g = p/p' and g'.
// Immutable once built; copies share the custom evaluators.
class SuccessRate {
 public:
  using Fn = std::function<double(double)>;

  static constexpr double kDefaultDomainCap = 1e6;

  // p(x) = sqrt(x) / (1 + sqrt(x)). Unbounded cap, so epsilon is 0.
  static SuccessRate SqrtRatio(double domain_cap = kDefaultDomainCap);
  // p(x) = (1 - epsilon) sqrt(x) / (1 + sqrt(x)), epsilon in [0, 1).
  static SuccessRate ScaledSqrtRatio(double epsilon,
                                     double domain_cap = kDefaultDomainCap);
  // User supplied p and p'. g and g' are derived numerically.
  static SuccessRate Custom(std::string name, Fn p, Fn p_prime,
                            double epsilon = 0.0,
                            double domain_cap = kDefaultDomainCap);

  RateFamily family() const { return family_; }
  double epsilon() const { return epsilon_; }
  double domain_cap() const { return domain_cap_; }
  const std::string& name() const { return name_; }

  double p(double x) const;
  double p_prime(double x) const;
  // g(x) = p(x)/p'(x), with g(0) = 0.
  double g(double x) const;
  double g_prime(double x) const;
  // g(x)/p(x) = 1/p'(x); the marginal return an agent needs to invest x.
  double ratio(double x) const;

 private:
  SuccessRate(RateFamily family, std::string name, double epsilon,
              double domain_cap, Fn p, Fn p_prime);
  void check_arg(double x, const char* what) const;

  RateFamily family_;
  std::string name_;
  double epsilon_;
  double domain_cap_;
  Fn p_;
  Fn p_prime_;
};

struct ValidationCheck {
  std::string name;
  bool passed = true;
  double worst_x = 0.0;      // grid point with the largest violation
  double worst_value = 0.0;  // size of that violation (0 when passed)
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const;
  const ValidationCheck* find(const std::string& name) const;
};

// Grid checks of the standing assumptions on p and g: p(0) = 0, p increasing
// and concave, p capped by 1 - epsilon, g(x) > x, g convex, g(0+) = 0, and
// g/p increasing. Violations are reported, never thrown.
ValidationReport validate(const SuccessRate& sr, int grid_points = 512,
                          double tol_convex = 1e-9, double tol_limit = 1e-6);

// Named custom rates for configuration files and the Python bindings.
void register_success_rate(const std::string& name, SuccessRate::Fn p,
                           SuccessRate::Fn p_prime, double epsilon = 0.0,
                           double domain_cap = SuccessRate::kDefaultDomainCap);
std::optional<SuccessRate> find_success_rate(const std::string& name);
std::vector<std::string> registered_success_rates();

}  // namespace seqinvest
