#include "seqinvest/reward_rule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seqinvest/errors.hpp"

namespace seqinvest {

struct RewardRule::Node {
  RuleKind kind = RuleKind::kEqualSplit;
  double a = 0.0;  // alpha, or beta for F3/F4
  double gamma = 0.0;
  double weight = 1.0;
  std::vector<RewardRule> children;  // mixture: {left, right}; perturbed: {base}
  std::vector<PointDelta> points;
  std::vector<ColumnShift> shifts;
};

namespace {

using std::size_t;

bool is_floor_family(RuleKind kind) {
  return kind == RuleKind::kEqualSplit || kind == RuleKind::kFixedFraction ||
         kind == RuleKind::kFixedFractionFloor || kind == RuleKind::kF1;
}

void require_finite(std::initializer_list<double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw RuleConstructionError(std::string(what) +
                                  ": parameters must be finite");
    }
  }
}

}  // namespace

const char* rule_kind_name(RuleKind kind) {
  switch (kind) {
    case RuleKind::kEqualSplit: return "equal_split";
    case RuleKind::kFixedFraction: return "fixed_fraction";
    case RuleKind::kFixedFractionFloor: return "fixed_fraction_floor";
    case RuleKind::kJackpot: return "jackpot";
    case RuleKind::kF1: return "f1";
    case RuleKind::kF2: return "f2";
    case RuleKind::kF3: return "f3";
    case RuleKind::kF4: return "f4";
    case RuleKind::kMixture: return "mixture";
    case RuleKind::kPerturbed: return "perturbed";
  }
  return "unknown";
}

RewardRule::RewardRule(std::shared_ptr<const Node> node)
    : node_(std::move(node)) {}

RewardRule RewardRule::Family(RuleKind kind, double a, double gamma) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = a;
  n->gamma = gamma;
  return RewardRule(std::move(n));
}

RewardRule RewardRule::EqualSplit() {
  RewardRule r = Family(RuleKind::kEqualSplit, 1, 0);
  return r;
}

RewardRule RewardRule::FixedFraction(double alpha) {
  require_finite({alpha}, "fixed_fraction");
  RewardRule r = Family(RuleKind::kFixedFraction, alpha, 0.0);
  r.validate();
  return r;
}

RewardRule RewardRule::FixedFractionFloor(double alpha, double gamma) {
  require_finite({alpha, gamma}, "fixed_fraction_floor");
  RewardRule r = Family(RuleKind::kFixedFractionFloor, alpha, gamma);
  r.validate();
  return r;
}

RewardRule RewardRule::Jackpot() {
  return Family(RuleKind::kJackpot, 0.0, 0.0);
}

RewardRule RewardRule::F1(double alpha, double gamma) {
  require_finite({alpha, gamma}, "f1");
  RewardRule r = Family(RuleKind::kF1, alpha, gamma);
  r.validate();
  return r;
}

RewardRule RewardRule::F2(double alpha, double gamma) {
  require_finite({alpha, gamma}, "f2");
  RewardRule r = Family(RuleKind::kF2, alpha, gamma);
  r.validate();
  return r;
}

RewardRule RewardRule::F3(double beta, double gamma) {
  require_finite({beta, gamma}, "f3");
  RewardRule r = Family(RuleKind::kF3, beta, gamma);
  r.validate();
  return r;
}

RewardRule RewardRule::F4(double beta, double gamma) {
  require_finite({beta, gamma}, "f4");
  RewardRule r = Family(RuleKind::kF4, beta, gamma);
  r.validate();
  return r;
}

RewardRule RewardRule::Mixture(double weight, const RewardRule& left,
                               const RewardRule& right) {
  require_finite({weight}, "mixture");
  auto n = std::make_shared<Node>();
  n->kind = RuleKind::kMixture;
  n->weight = weight;
  n->children = {left, right};
  RewardRule r(std::move(n));
  r.validate();
  return r;
}

RewardRule RewardRule::Perturbed(const RewardRule& base,
                                 std::vector<PointDelta> points,
                                 std::vector<ColumnShift> shifts) {
  size_t last_row = 0;
  double shift_sum = 0.0;
  double shift_scale = 0.0;
  for (const auto& pt : points) {
    require_finite({pt.delta}, "perturbed");
    if (pt.agent > pt.row) {
      throw RuleConstructionError("perturbed: entry (" +
                                  std::to_string(pt.agent) + "," +
                                  std::to_string(pt.row) + ") has i > k");
    }
    last_row = std::max(last_row, pt.row);
  }
  for (const auto& sh : shifts) {
    require_finite({sh.delta}, "perturbed");
    if (sh.agent > sh.from_row) {
      throw RuleConstructionError("perturbed: shift on agent " +
                                  std::to_string(sh.agent) +
                                  " starts before its diagonal");
    }
    last_row = std::max(last_row, sh.from_row);
    shift_sum += sh.delta;
    shift_scale += std::fabs(sh.delta);
  }
  if (std::fabs(shift_sum) > 1e-12 * std::max(1.0, shift_scale)) {
    throw RuleConstructionError(
        "perturbed: column shifts unbalance every row from " +
        std::to_string(last_row) + " on (sum " + std::to_string(shift_sum) +
        ")");
  }
  auto n = std::make_shared<Node>();
  n->kind = RuleKind::kPerturbed;
  n->children = {base};
  n->points = std::move(points);
  n->shifts = std::move(shifts);
  RewardRule r(std::move(n));
  r.validate(std::max<size_t>(kCheckRows, last_row + 2));
  return r;
}

RewardRule RewardRule::EqualSplitShifted(double beta, double q) {
  require_finite({beta, q}, "equal_split_shifted");
  if (!(q >= 0.0 && q < 1.0)) {
    throw RuleConstructionError("equal_split_shifted: q must lie in [0, 1)");
  }
  return Perturbed(EqualSplit(), {{0, 2, -beta * q}, {1, 2, beta * q}},
                   {{0, 3, beta * (1.0 - q)}, {1, 3, -beta * (1.0 - q)}});
}

RuleKind RewardRule::kind() const { return node_->kind; }

double RewardRule::alpha() const {
  return node_->kind == RuleKind::kF3 || node_->kind == RuleKind::kF4
             ? 0.0
             : node_->a;
}

double RewardRule::beta() const {
  return node_->kind == RuleKind::kF3 || node_->kind == RuleKind::kF4
             ? node_->a
             : 0.0;
}

double RewardRule::gamma() const { return node_->gamma; }
double RewardRule::weight() const { return node_->weight; }

const RewardRule& RewardRule::left() const {
  if (node_->kind != RuleKind::kMixture) {
    throw std::logic_error("left(): rule is not a mixture");
  }
  return node_->children[0];
}

const RewardRule& RewardRule::right() const {
  if (node_->kind != RuleKind::kMixture) {
    throw std::logic_error("right(): rule is not a mixture");
  }
  return node_->children[1];
}

const RewardRule& RewardRule::base() const {
  if (node_->kind != RuleKind::kPerturbed) {
    throw std::logic_error("base(): rule is not perturbed");
  }
  return node_->children[0];
}

const std::vector<PointDelta>& RewardRule::points() const {
  return node_->points;
}

const std::vector<ColumnShift>& RewardRule::shifts() const {
  return node_->shifts;
}

double RewardRule::eval(size_t i, size_t k) const {
  if (i > k) {
    throw std::out_of_range("reward rule: agent " + std::to_string(i) +
                            " beyond terminal row " + std::to_string(k));
  }
  const Node& n = *node_;
  const double a = n.a;
  const double g = n.gamma;
  if (k == 0 && n.kind != RuleKind::kMixture &&
      n.kind != RuleKind::kPerturbed) {
    return 1.0;
  }
  switch (n.kind) {
    case RuleKind::kEqualSplit:
    case RuleKind::kFixedFraction:
    case RuleKind::kFixedFractionFloor:
    case RuleKind::kF1:
      if (i == 0) {
        return static_cast<double>(k + 1) - static_cast<double>(k - 1) * a - g;
      }
      return i == k ? g : a;
    case RuleKind::kJackpot:
      if (i == 0) return k == 1 ? 2.0 : 1.0;
      return i + 1 == k ? static_cast<double>(k) : 0.0;
    case RuleKind::kF2:
      if (i == 0) return a - g;
      if (i == 1) return k == 1 ? 2.0 - a + g : 2.0;
      return i == k ? 1.0 - a + g : 1.0;
    case RuleKind::kF3:
      if (i == 0) return k == 1 ? 2.0 - g : 2.0 - a - g;
      if (i == k) return g;
      return i + 1 == k ? 1.0 + a : 1.0;
    case RuleKind::kF4:
      if (i == 0) return k == 1 ? a : 0.0;
      if (i == 1) {
        if (k == 1) return 2.0 - a;
        return k == 2 ? 3.0 - g : 3.0 - a - g;
      }
      if (i == k) return g;
      return i + 1 == k ? 1.0 + a : 1.0;
    case RuleKind::kMixture:
      return n.weight * n.children[0].eval(i, k) +
             (1.0 - n.weight) * n.children[1].eval(i, k);
    case RuleKind::kPerturbed: {
      double v = n.children[0].eval(i, k);
      for (const auto& pt : n.points) {
        if (pt.agent == i && pt.row == k) v += pt.delta;
      }
      for (const auto& sh : n.shifts) {
        if (sh.agent == i && k >= sh.from_row) v += sh.delta;
      }
      return v;
    }
  }
  return 0.0;
}

ColumnTail RewardRule::column_tail(size_t i) const {
  const Node& n = *node_;
  const double a = n.a;
  const double g = n.gamma;
  if (is_floor_family(n.kind)) {
    if (i == 0) return {1, 2.0 - g, 1.0 - a};
    return {i + 1, a, 0.0};
  }
  switch (n.kind) {
    case RuleKind::kJackpot:
      return i == 0 ? ColumnTail{2, 1.0, 0.0} : ColumnTail{i + 2, 0.0, 0.0};
    case RuleKind::kF2:
      if (i == 0) return {1, a - g, 0.0};
      if (i == 1) return {2, 2.0, 0.0};
      return {i + 1, 1.0, 0.0};
    case RuleKind::kF3:
      if (i == 0) return {2, 2.0 - a - g, 0.0};
      return {i + 2, 1.0, 0.0};
    case RuleKind::kF4:
      if (i == 0) return {2, 0.0, 0.0};
      if (i == 1) return {3, 3.0 - a - g, 0.0};
      return {i + 2, 1.0, 0.0};
    case RuleKind::kMixture: {
      const ColumnTail l = n.children[0].column_tail(i);
      const ColumnTail r = n.children[1].column_tail(i);
      const size_t start = std::max(l.start, r.start);
      return {start, eval(i, start),
              n.weight * l.slope + (1.0 - n.weight) * r.slope};
    }
    case RuleKind::kPerturbed: {
      const ColumnTail b = n.children[0].column_tail(i);
      size_t start = b.start;
      for (const auto& pt : n.points) {
        if (pt.agent == i) start = std::max(start, pt.row + 1);
      }
      for (const auto& sh : n.shifts) {
        if (sh.agent == i) start = std::max(start, sh.from_row);
      }
      return {start, eval(i, start), b.slope};
    }
    default:
      break;
  }
  return {i + 1, 0.0, 0.0};
}

DiagonalTail RewardRule::diagonal_tail() const {
  const Node& n = *node_;
  if (is_floor_family(n.kind)) return {1, n.gamma};
  switch (n.kind) {
    case RuleKind::kJackpot: return {1, 0.0};
    case RuleKind::kF2: return {2, 1.0 - n.a + n.gamma};
    case RuleKind::kF3: return {1, n.gamma};
    case RuleKind::kF4: return {2, n.gamma};
    case RuleKind::kMixture: {
      const size_t start = std::max(n.children[0].diagonal_tail().start,
                                    n.children[1].diagonal_tail().start);
      return {start, eval(start, start)};
    }
    case RuleKind::kPerturbed: {
      size_t start = n.children[0].diagonal_tail().start;
      for (const auto& pt : n.points) start = std::max(start, pt.agent + 1);
      for (const auto& sh : n.shifts) start = std::max(start, sh.agent + 1);
      return {start, eval(start, start)};
    }
    default:
      break;
  }
  return {1, 0.0};
}

std::optional<size_t> RewardRule::stationary_from() const {
  const Node& n = *node_;
  if (is_floor_family(n.kind) || n.kind == RuleKind::kF3) return 1;
  switch (n.kind) {
    case RuleKind::kJackpot: return std::nullopt;
    case RuleKind::kF2:
    case RuleKind::kF4: return 2;
    case RuleKind::kMixture: {
      auto l = n.children[0].stationary_from();
      auto r = n.children[1].stationary_from();
      if (!l || !r) return std::nullopt;
      return std::max(*l, *r);
    }
    case RuleKind::kPerturbed: {
      auto b = n.children[0].stationary_from();
      if (!b) return std::nullopt;
      size_t s = *b;
      for (const auto& pt : n.points) s = std::max(s, pt.agent + 1);
      for (const auto& sh : n.shifts) s = std::max(s, sh.agent + 1);
      return s;
    }
    default:
      break;
  }
  return std::nullopt;
}

void RewardRule::validate(size_t rows) const {
  for (size_t k = 0; k <= rows; ++k) {
    double sum = 0.0;
    for (size_t i = 0; i <= k; ++i) {
      const double v = eval(i, k);
      if (!(v >= -1e-12)) {
        throw RuleConstructionError(
            std::string(rule_kind_name(kind())) + ": row " +
            std::to_string(k) + " has negative entry f(" + std::to_string(i) +
            "," + std::to_string(k) + ") = " + std::to_string(v));
      }
      sum += v;
    }
    const double target = static_cast<double>(k + 1);
    if (std::fabs(sum - target) > 1e-9 * target) {
      throw RuleConstructionError(
          std::string(rule_kind_name(kind())) + ": row " + std::to_string(k) +
          " sums to " + std::to_string(sum) + " instead of " +
          std::to_string(k + 1));
    }
  }
  // Columns past the checked rows: a negative slope eventually goes negative.
  const size_t cols = std::min(rows, stationary_from().value_or(rows));
  for (size_t i = 0; i <= cols; ++i) {
    const ColumnTail t = column_tail(i);
    if (t.slope < -1e-15 || t.value < -1e-12) {
      throw RuleConstructionError(
          std::string(rule_kind_name(kind())) + ": column " +
          std::to_string(i) + " turns negative beyond row " +
          std::to_string(std::max(t.start, rows)));
    }
  }
}

double continuation_reward(const SuccessRate& sr, const RewardRule& rule,
                           const ConstantTailProfile& x, size_t i) {
  const ColumnTail tail = rule.column_tail(i);
  const size_t k_star = std::max({tail.start, x.tail_start(), i + 1});
  double total = 0.0;
  double reach = 1.0;  // prod_{i<j<k} p(x_j)
  for (size_t k = i + 1; k < k_star; ++k) {
    const double pk = sr.p(x.at(k));
    total += reach * (1.0 - pk) * rule.eval(i, k);
    reach *= pk;
    if (reach == 0.0) return total;
  }
  const double q = sr.p(x.tail());
  if (!(q < 1.0)) {
    throw DomainError("profile tail has p(c) >= 1; the series diverges");
  }
  const double offset = static_cast<double>(k_star - tail.start);
  return total +
         reach * (tail.value + tail.slope * offset + tail.slope * q / (1.0 - q));
}

double expected_payoff(const SuccessRate& sr, const RewardRule& rule,
                       const ConstantTailProfile& x, size_t i) {
  const double xi = x.at(i);
  const double pi = sr.p(xi);
  double u = (1.0 - pi) * rule.eval(i, i) - xi;
  if (pi > 0.0) u += pi * continuation_reward(sr, rule, x, i);
  return u;
}

double aggregate_vhat(const SuccessRate& sr, const RewardRule& rule,
                      const ConstantTailProfile& x) {
  const DiagonalTail diag = rule.diagonal_tail();
  const size_t k_star = std::max({diag.start, x.tail_start(), size_t{1}});
  double total = rule.eval(0, 0);
  double reach = sr.p(x.at(0));  // Pi_1
  for (size_t j = 1; j < k_star && reach > 0.0; ++j) {
    total += reach * rule.eval(j, j);
    reach *= sr.p(x.at(j));
  }
  if (reach > 0.0) total += reach * diag.value / (1.0 - sr.p(x.tail()));
  return total + incentive_cost(sr, x);
}

}  // namespace seqinvest
