#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seqinvest/success_rate.hpp"

namespace seqinvest {

// Infinite investment profile x_0, x_1, ... stored as a finite prefix
// followed by a constant tail. Kept in canonical form: trailing prefix
// entries equal to the tail are absorbed into it.
class ConstantTailProfile {
 public:
  ConstantTailProfile() = default;
  ConstantTailProfile(std::vector<double> prefix, double tail);

  static ConstantTailProfile Constant(double c) { return {{}, c}; }

  const std::vector<double>& prefix() const { return prefix_; }
  double tail() const { return tail_; }
  // Index from which the profile is constant.
  std::size_t tail_start() const { return prefix_.size(); }
  bool is_constant() const { return prefix_.empty(); }

  double at(std::size_t i) const {
    return i < prefix_.size() ? prefix_[i] : tail_;
  }
  double operator[](std::size_t i) const { return at(i); }

  // Copy with agent i's investment replaced.
  ConstantTailProfile with(std::size_t i, double value) const;
  // The profile x_{>=k}, re-indexed from 0.
  ConstantTailProfile suffix(std::size_t k) const;

  bool operator==(const ConstantTailProfile& other) const = default;

  std::string to_string() const;

 private:
  void canonicalize();

  std::vector<double> prefix_;
  double tail_ = 0.0;
};

struct FunctionalValues {
  double value_V = 1.0;
  double investment_I = 0.0;
  double welfare_W = 1.0;
  double cost_G = 0.0;
};

// Probability that agent j is reached: prod_{i<j} p(x_i).
double partial_product(const SuccessRate& sr, const ConstantTailProfile& x,
                       std::size_t j);

// Expected number of realized agents.
double expected_value(const SuccessRate& sr, const ConstantTailProfile& x);
double expected_investment(const SuccessRate& sr,
                           const ConstantTailProfile& x);
double expected_welfare(const SuccessRate& sr, const ConstantTailProfile& x);
// Same series as the expected value with g(x_j) as the summand.
double incentive_cost(const SuccessRate& sr, const ConstantTailProfile& x);
FunctionalValues functionals(const SuccessRate& sr,
                             const ConstantTailProfile& x);

// Replaces x_{>=k} by the constant c with the same expected value, so that
// the returned profile has the same expected value as x. Returns x when
// x_{>=k} is already constant.
ConstantTailProfile flatten_tail(const SuccessRate& sr,
                                 const ConstantTailProfile& x, std::size_t k);

// Constant c with 1/(1 - p(c)) = v.
double constant_with_value(const SuccessRate& sr, double v);

}  // namespace seqinvest
