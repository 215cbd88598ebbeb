#include "seqinvest/profile.hpp"

#include <cmath>
#include <sstream>

#include "seqinvest/errors.hpp"
#include "seqinvest/scalar_solvers.hpp"

namespace seqinvest {

namespace {

void check_entry(double v) {
  if (!std::isfinite(v) || v < 0.0) {
    throw DomainError("profile entries must be finite and >= 0");
  }
}

// sum_j Pi_j w(x_j) with the geometric closure on the tail.
template <class W>
double series(const SuccessRate& sr, const ConstantTailProfile& x, W&& w) {
  double total = 0.0;
  double reach = 1.0;
  for (double xj : x.prefix()) {
    if (reach == 0.0) return total;
    total += reach * w(xj);
    reach *= sr.p(xj);
  }
  if (reach == 0.0) return total;
  const double c = x.tail();
  const double pc = sr.p(c);
  if (!(pc < 1.0)) {
    throw DomainError("profile tail has p(c) >= 1; the series diverges");
  }
  return total + reach * w(c) / (1.0 - pc);
}

}  // namespace

ConstantTailProfile::ConstantTailProfile(std::vector<double> prefix,
                                         double tail)
    : prefix_(std::move(prefix)), tail_(tail) {
  check_entry(tail_);
  for (double v : prefix_) check_entry(v);
  canonicalize();
}

void ConstantTailProfile::canonicalize() {
  while (!prefix_.empty() && prefix_.back() == tail_) prefix_.pop_back();
}

ConstantTailProfile ConstantTailProfile::with(std::size_t i,
                                              double value) const {
  std::vector<double> pre = prefix_;
  if (i >= pre.size()) pre.resize(i + 1, tail_);
  pre[i] = value;
  return {std::move(pre), tail_};
}

ConstantTailProfile ConstantTailProfile::suffix(std::size_t k) const {
  if (k >= prefix_.size()) return Constant(tail_);
  return {std::vector<double>(prefix_.begin() + k, prefix_.end()), tail_};
}

std::string ConstantTailProfile::to_string() const {
  std::ostringstream os;
  os.precision(17);
  for (double v : prefix_) os << v << ',';
  os << tail_;
  return os.str();
}

double partial_product(const SuccessRate& sr, const ConstantTailProfile& x,
                       std::size_t j) {
  double reach = 1.0;
  const std::size_t m = x.tail_start();
  for (std::size_t i = 0; i < j && i < m; ++i) reach *= sr.p(x.prefix()[i]);
  if (j > m) reach *= std::pow(sr.p(x.tail()), static_cast<double>(j - m));
  return reach;
}

double expected_value(const SuccessRate& sr, const ConstantTailProfile& x) {
  return series(sr, x, [](double) { return 1.0; });
}

double expected_investment(const SuccessRate& sr,
                           const ConstantTailProfile& x) {
  return series(sr, x, [](double v) { return v; });
}

double expected_welfare(const SuccessRate& sr, const ConstantTailProfile& x) {
  return expected_value(sr, x) - expected_investment(sr, x);
}

double incentive_cost(const SuccessRate& sr, const ConstantTailProfile& x) {
  return series(sr, x, [&sr](double v) { return sr.g(v); });
}

FunctionalValues functionals(const SuccessRate& sr,
                             const ConstantTailProfile& x) {
  FunctionalValues out;
  out.value_V = expected_value(sr, x);
  out.investment_I = expected_investment(sr, x);
  out.welfare_W = out.value_V - out.investment_I;
  out.cost_G = incentive_cost(sr, x);
  return out;
}

double constant_with_value(const SuccessRate& sr, double v) {
  if (!(v >= 1.0)) throw DomainError("expected value below 1 is impossible");
  const double target = 1.0 - 1.0 / v;
  if (target == 0.0) return 0.0;
  if (!(target < 1.0 - sr.epsilon()) && sr.epsilon() > 0.0) {
    throw InfeasibleError("continuation value beyond 1/epsilon");
  }
  auto f = [&](double c) { return sr.p(c) - target; };
  double hi = expand_upper(f, 0.0, std::fmin(1.0, sr.domain_cap()),
                           sr.domain_cap());
  return bisect(f, 0.0, hi, 1e-12, 200).argument;
}

ConstantTailProfile flatten_tail(const SuccessRate& sr,
                                 const ConstantTailProfile& x,
                                 std::size_t k) {
  if (k >= x.tail_start()) return x;
  const double c = constant_with_value(sr, expected_value(sr, x.suffix(k)));
  std::vector<double> pre(x.prefix().begin(), x.prefix().begin() + k);
  return {std::move(pre), c};
}

}  // namespace seqinvest
