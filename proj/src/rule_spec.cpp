#include "seqinvest/rule_spec.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <tuple>

#include "seqinvest/errors.hpp"
#include "seqinvest/optima.hpp"

namespace seqinvest {

SuccessRate make_rate(const std::string& family, double epsilon) {
  if (family == "sqrt_ratio") {
    if (epsilon != 0.0) {
      throw ParseError("sqrt_ratio takes no epsilon; use scaled_sqrt_ratio");
    }
    return SuccessRate::SqrtRatio();
  }
  if (family == "scaled_sqrt_ratio") {
    return SuccessRate::ScaledSqrtRatio(epsilon);
  }
  if (auto custom = find_success_rate(family)) return *custom;
  throw ParseError("unknown rate family '" + family + "'");
}

const std::vector<std::string>& SymbolTable::names() {
  static const std::vector<std::string> kNames = {
      "c_star", "c_fb", "c_init", "x0_init", "c_s",
      "x0_s",   "alpha_init", "alpha_s", "gamma_s"};
  return kNames;
}

void SymbolTable::solve() {
  const auto star = socially_optimal(sr_);
  const auto init = initiator_optimal(sr_);
  const auto self = self_financed_optimal(sr_);
  values_["c_star"] = star.c();
  values_["c_fb"] = first_best_investment(sr_);
  values_["c_init"] = init.c();
  values_["x0_init"] = init.x0();
  values_["alpha_init"] = sr_.ratio(init.c());
  values_["c_s"] = self.c();
  values_["x0_s"] = self.x0();
  values_["alpha_s"] = sr_.ratio(self.c()) + self.c();
  values_["gamma_s"] = self.c();
}

std::optional<double> SymbolTable::lookup(const std::string& name) {
  const auto& known = names();
  if (std::find(known.begin(), known.end(), name) == known.end()) {
    return std::nullopt;
  }
  if (values_.empty()) solve();
  return values_.at(name);
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::optional<double> parse_number(const std::string& s) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

// One argument or the whole rule: a call `name(args)`, a bare name, a
// number, or a quoted string.
struct Term {
  std::string name;  // identifier, or number text
  bool is_call = false;
  bool is_string = false;
  std::vector<std::pair<std::string, Term>> args;  // key empty if positional
};

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Term parse_all() {
    Term t = term();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return t;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("rule spec: " + msg + " at offset " +
                     std::to_string(pos_) + " in '" + s_ + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  Term term() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    Term t;
    const char c = s_[pos_];
    if (c == '"' || c == '\'') {
      const std::size_t close = s_.find(c, pos_ + 1);
      if (close == std::string::npos) fail("unterminated string");
      t.name = s_.substr(pos_ + 1, close - pos_ - 1);
      t.is_string = true;
      pos_ = close + 1;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
              s_[pos_] == '_')) {
        ++pos_;
      }
      t.name = s_.substr(start, pos_ - start);
      if (peek('(')) {
        ++pos_;
        t.is_call = true;
        if (!peek(')')) {
          while (true) {
            t.args.push_back(argument());
            if (peek(',')) {
              ++pos_;
              continue;
            }
            if (peek(')')) break;
            fail("expected ',' or ')'");
          }
        }
        ++pos_;
      }
      return t;
    }
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ')' &&
           !std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
    t.name = s_.substr(start, pos_ - start);
    if (!parse_number(t.name)) fail("bad number '" + t.name + "'");
    return t;
  }

  std::pair<std::string, Term> argument() {
    skip_ws();
    const std::size_t save = pos_;
    if (pos_ < s_.size() &&
        (std::isalpha(static_cast<unsigned char>(s_[pos_])) ||
         s_[pos_] == '_')) {
      std::size_t end = pos_;
      while (end < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[end])) ||
              s_[end] == '_')) {
        ++end;
      }
      const std::string key = s_.substr(pos_, end - pos_);
      pos_ = end;
      if (peek('=')) {
        ++pos_;
        return {key, term()};
      }
      pos_ = save;
    }
    return {"", term()};
  }

  std::string s_;
  std::size_t pos_ = 0;
};

double term_value(const Term& t, SymbolTable& symbols) {
  if (t.is_call || t.is_string) {
    throw ParseError("expected a number, got '" + t.name + "'");
  }
  return parse_value(t.name, symbols);
}

// Binds positional and keyword arguments to the parameter list of a kind.
std::map<std::string, const Term*> bind(const Term& call,
                                        const std::vector<std::string>& params) {
  std::map<std::string, const Term*> out;
  std::size_t next = 0;
  for (const auto& [key, value] : call.args) {
    std::string name = key;
    if (name.empty()) {
      if (next >= params.size()) {
        throw ParseError(call.name + ": too many arguments");
      }
      name = params[next++];
    }
    if (std::find(params.begin(), params.end(), name) == params.end()) {
      throw ParseError(call.name + ": unknown parameter '" + name + "'");
    }
    if (out.count(name)) {
      throw ParseError(call.name + ": parameter '" + name + "' given twice");
    }
    out[name] = &value;
  }
  return out;
}

const Term& need(const std::map<std::string, const Term*>& args,
                 const std::string& kind, const std::string& name) {
  auto it = args.find(name);
  if (it == args.end()) {
    throw ParseError(kind + ": missing parameter '" + name + "'");
  }
  return *it->second;
}

double num_or(const std::map<std::string, const Term*>& args,
              const std::string& name, double fallback,
              SymbolTable& symbols) {
  auto it = args.find(name);
  return it == args.end() ? fallback : term_value(*it->second, symbols);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

// "i:k:delta;..." triples.
std::vector<std::tuple<std::size_t, std::size_t, double>> triples(
    const std::string& text, SymbolTable& symbols) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> out;
  for (const auto& item : split(text, ';')) {
    const auto f = split(item, ':');
    if (f.size() != 3) {
      throw ParseError("perturbation '" + item + "' is not i:k:delta");
    }
    auto index = [&](const std::string& s) {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ParseError("bad index '" + s + "' in '" + item + "'");
      }
      return v;
    };
    out.emplace_back(index(f[0]), index(f[1]), parse_value(f[2], symbols));
  }
  return out;
}

RewardRule build(const Term& t, SymbolTable& symbols);

RewardRule build_call(const Term& t, SymbolTable& symbols) {
  const std::string& k = t.name;
  if (k == "equal_split") {
    bind(t, {});
    return RewardRule::EqualSplit();
  }
  if (k == "jackpot") {
    bind(t, {});
    return RewardRule::Jackpot();
  }
  if (k == "fixed_fraction") {
    auto a = bind(t, {"alpha"});
    return RewardRule::FixedFraction(term_value(need(a, k, "alpha"), symbols));
  }
  if (k == "fixed_fraction_floor" || k == "f1" || k == "f2") {
    auto a = bind(t, {"alpha", "gamma"});
    const double alpha = term_value(need(a, k, "alpha"), symbols);
    const double gamma = num_or(a, "gamma", 0.0, symbols);
    if (k == "f1") return RewardRule::F1(alpha, gamma);
    if (k == "f2") return RewardRule::F2(alpha, gamma);
    return RewardRule::FixedFractionFloor(alpha, gamma);
  }
  if (k == "f3" || k == "f4") {
    auto a = bind(t, {"beta", "gamma"});
    const double beta = term_value(need(a, k, "beta"), symbols);
    const double gamma = num_or(a, "gamma", 0.0, symbols);
    return k == "f3" ? RewardRule::F3(beta, gamma) : RewardRule::F4(beta, gamma);
  }
  if (k == "mixture") {
    auto a = bind(t, {"weight", "left", "right"});
    return RewardRule::Mixture(term_value(need(a, k, "weight"), symbols),
                               build(need(a, k, "left"), symbols),
                               build(need(a, k, "right"), symbols));
  }
  if (k == "perturbed") {
    auto a = bind(t, {"base", "entries", "shifts"});
    std::vector<PointDelta> points;
    std::vector<ColumnShift> shifts;
    if (a.count("entries")) {
      for (auto [i, r, d] : triples(a.at("entries")->name, symbols)) {
        points.push_back({i, r, d});
      }
    }
    if (a.count("shifts")) {
      for (auto [i, r, d] : triples(a.at("shifts")->name, symbols)) {
        shifts.push_back({i, r, d});
      }
    }
    return RewardRule::Perturbed(build(need(a, k, "base"), symbols),
                                 std::move(points), std::move(shifts));
  }
  if (k == "equal_split_shifted") {
    auto a = bind(t, {"beta", "c"});
    const double beta = term_value(need(a, k, "beta"), symbols);
    const double c = term_value(need(a, k, "c"), symbols);
    return RewardRule::EqualSplitShifted(beta, symbols.rate().p(c));
  }
  throw ParseError("unknown rule kind '" + k + "'");
}

RewardRule build(const Term& t, SymbolTable& symbols) {
  if (t.is_string) {
    Parser inner(t.name);
    return build(inner.parse_all(), symbols);
  }
  return build_call(t, symbols);
}

}  // namespace

double parse_value(const std::string& text, SymbolTable& symbols) {
  const std::string s = trim(text);
  if (auto v = parse_number(s)) {
    if (!std::isfinite(*v)) throw ParseError("non-finite value '" + s + "'");
    return *v;
  }
  if (auto v = symbols.lookup(s)) return *v;
  throw ParseError("'" + s + "' is neither a number nor a known symbol");
}

ConstantTailProfile parse_profile(const std::string& text,
                                  SymbolTable& symbols) {
  const auto parts = split(text, ',');
  if (parts.empty()) throw ParseError("empty profile");
  std::vector<double> values;
  for (const auto& p : parts) values.push_back(parse_value(p, symbols));
  const double tail = values.back();
  values.pop_back();
  try {
    return {std::move(values), tail};
  } catch (const DomainError& e) {
    throw ParseError(std::string("profile: ") + e.what());
  }
}

RewardRule parse_rule(const std::string& text, SymbolTable& symbols) {
  Parser parser(text);
  return build(parser.parse_all(), symbols);
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_rule(const RewardRule& rule) {
  const auto n = [](double v) { return format_number(v); };
  switch (rule.kind()) {
    case RuleKind::kEqualSplit: return "equal_split()";
    case RuleKind::kJackpot: return "jackpot()";
    case RuleKind::kFixedFraction:
      return "fixed_fraction(alpha=" + n(rule.alpha()) + ")";
    case RuleKind::kFixedFractionFloor:
    case RuleKind::kF1:
    case RuleKind::kF2:
      return std::string(rule_kind_name(rule.kind())) + "(alpha=" +
             n(rule.alpha()) + ",gamma=" + n(rule.gamma()) + ")";
    case RuleKind::kF3:
    case RuleKind::kF4:
      return std::string(rule_kind_name(rule.kind())) + "(beta=" +
             n(rule.beta()) + ",gamma=" + n(rule.gamma()) + ")";
    case RuleKind::kMixture:
      return "mixture(weight=" + n(rule.weight()) +
             ",left=" + format_rule(rule.left()) +
             ",right=" + format_rule(rule.right()) + ")";
    case RuleKind::kPerturbed: {
      std::string out = "perturbed(base=" + format_rule(rule.base());
      auto join = [&](const auto& items, auto&& fields) {
        std::string s;
        for (const auto& it : items) {
          if (!s.empty()) s += ';';
          s += fields(it);
        }
        return s;
      };
      if (!rule.points().empty()) {
        out += ",entries=\"" +
               join(rule.points(),
                    [&](const PointDelta& p) {
                      return std::to_string(p.agent) + ":" +
                             std::to_string(p.row) + ":" + n(p.delta);
                    }) +
               "\"";
      }
      if (!rule.shifts().empty()) {
        out += ",shifts=\"" +
               join(rule.shifts(),
                    [&](const ColumnShift& s) {
                      return std::to_string(s.agent) + ":" +
                             std::to_string(s.from_row) + ":" + n(s.delta);
                    }) +
               "\"";
      }
      return out + ")";
    }
  }
  return "unknown";
}

}  // namespace seqinvest
