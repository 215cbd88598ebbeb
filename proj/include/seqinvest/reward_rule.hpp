#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "seqinvest/profile.hpp"
#include "seqinvest/success_rate.hpp"

namespace seqinvest {

enum class RuleKind {
  kEqualSplit,
  kFixedFraction,
  kFixedFractionFloor,
  kJackpot,
  kF1,
  kF2,
  kF3,
  kF4,
  kMixture,
  kPerturbed,
};

const char* rule_kind_name(RuleKind kind);

// Column i of the rule is affine in k from row `start` on:
// f(i,k) = value + slope * (k - start) for k >= start.
struct ColumnTail {
  std::size_t start = 0;
  double value = 0.0;
  double slope = 0.0;
};

// f(j,j) = value for every j >= start.
struct DiagonalTail {
  std::size_t start = 0;
  double value = 0.0;
};

// f(agent, row) += delta.
struct PointDelta {
  std::size_t agent = 0;
  std::size_t row = 0;
  double delta = 0.0;
};

// f(agent, k) += delta for every k >= from_row.
struct ColumnShift {
  std::size_t agent = 0;
  std::size_t from_row = 0;
  double delta = 0.0;
};

// A balanced reward rule: when agent k is the first to fail, agent i <= k
// receives f(i,k) >= 0 and every row k sums to k + 1.
class RewardRule {
 public:
  static constexpr std::size_t kCheckRows = 64;

  static RewardRule EqualSplit();
  static RewardRule FixedFraction(double alpha);
  static RewardRule FixedFractionFloor(double alpha, double gamma);
  static RewardRule Jackpot();
  static RewardRule F1(double alpha, double gamma);
  static RewardRule F2(double alpha, double gamma);
  static RewardRule F3(double beta, double gamma);
  static RewardRule F4(double beta, double gamma);
  // weight * left + (1 - weight) * right.
  static RewardRule Mixture(double weight, const RewardRule& left,
                            const RewardRule& right);
  static RewardRule Perturbed(const RewardRule& base,
                              std::vector<PointDelta> points,
                              std::vector<ColumnShift> shifts = {});
  // Equal split with beta * q moved from agent 0 to agent 1 on row 2 and
  // beta * (1 - q) moved the other way on every later row. Supports the same
  // constant profile as equal split whenever q = p(c).
  static RewardRule EqualSplitShifted(double beta, double q);

  RuleKind kind() const;
  double alpha() const;
  double beta() const;
  double gamma() const;
  double weight() const;
  const RewardRule& left() const;
  const RewardRule& right() const;
  const RewardRule& base() const;
  const std::vector<PointDelta>& points() const;
  const std::vector<ColumnShift>& shifts() const;

  // Throws std::out_of_range if i > k.
  double eval(std::size_t i, std::size_t k) const;
  double operator()(std::size_t i, std::size_t k) const { return eval(i, k); }

  ColumnTail column_tail(std::size_t i) const;
  DiagonalTail diagonal_tail() const;
  // Smallest s such that f(i, i + d) = f(s, s + d) for all i >= s, d >= 0.
  // Empty when columns never settle into a common shape (jackpot).
  std::optional<std::size_t> stationary_from() const;

  // Row balance and non-negativity on rows 0..rows, plus tail slopes.
  // Throws RuleConstructionError naming the first bad row.
  void validate(std::size_t rows = kCheckRows) const;

 private:
  struct Node;
  explicit RewardRule(std::shared_ptr<const Node> node);
  static RewardRule Family(RuleKind kind, double a, double gamma);
  std::shared_ptr<const Node> node_;
};

// Expected reward of agent i given that i succeeded:
// sum_{k>i} prod_{i<j<k} p(x_j) (1 - p(x_k)) f(i,k), in closed form.
double continuation_reward(const SuccessRate& sr, const RewardRule& rule,
                           const ConstantTailProfile& x, std::size_t i);

// U_i = (1 - p(x_i)) f(i,i) + p(x_i) R_i - x_i.
double expected_payoff(const SuccessRate& sr, const RewardRule& rule,
                       const ConstantTailProfile& x, std::size_t i);

// f(0,0) + sum_{j>=1} Pi_j f(j,j) + G(x). Equals the expected value at any
// equilibrium of the rule.
double aggregate_vhat(const SuccessRate& sr, const RewardRule& rule,
                      const ConstantTailProfile& x);

}  // namespace seqinvest
