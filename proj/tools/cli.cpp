#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqinvest/seqinvest.hpp"

namespace seqinvest::cli {

namespace {

enum class Format { kText, kCsv, kTsv };

class Emitter {
 public:
  Emitter(Format f, std::ostream& os) : f_(f), os_(os) {}

  std::string num(double v) const {
    if (f_ != Format::kText) return format_number(v);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
  }

  // Labeled row: label value label value ...
  void row(const std::vector<std::string>& fields) {
    if (f_ == Format::kText) {
      for (std::size_t j = 0; j < fields.size(); ++j) {
        std::string cell = fields[j];
        if (j + 1 < fields.size()) {
          const std::size_t width = (j % 2 == 0) ? 14 : 20;
          if (cell.size() < width) cell.resize(width, ' ');
          else cell += ' ';
        }
        os_ << cell;
      }
      os_ << '\n';
      return;
    }
    write_delimited(fields);
  }

  void table(const std::vector<std::string>& header,
             const std::vector<std::vector<std::string>>& rows) {
    if (f_ != Format::kText) {
      write_delimited(header);
      for (const auto& r : rows) write_delimited(r);
      return;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < r.size() && j < width.size(); ++j) {
        width[j] = std::max(width[j], r[j].size());
      }
    }
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t j = 0; j < r.size(); ++j) {
        std::string cell = r[j];
        if (j + 1 < r.size()) cell.resize(width[j] + 2, ' ');
        os_ << cell;
      }
      os_ << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
  }

 private:
  void write_delimited(const std::vector<std::string>& fields) {
    const char sep = f_ == Format::kCsv ? ',' : '\t';
    for (std::size_t j = 0; j < fields.size(); ++j) {
      if (j) os_ << sep;
      const std::string& s = fields[j];
      if (f_ == Format::kCsv &&
          s.find_first_of(",\"\n") != std::string::npos) {
        os_ << '"';
        for (char c : s) {
          if (c == '"') os_ << '"';
          os_ << c;
        }
        os_ << '"';
      } else {
        os_ << s;
      }
    }
    os_ << '\n';
  }

  Format f_;
  std::ostream& os_;
};

// A user input error attributed to one option.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class F>
auto for_option(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw UsageError(key + ": " + e.what());
  } catch (const DomainError& e) {
    throw UsageError(key + ": " + e.what());
  } catch (const RuleConstructionError& e) {
    throw UsageError(key + ": " + e.what());
  }
}

Mode parse_mode(const std::string& s) {
  if (s == "unconstrained") return Mode::kUnconstrained;
  if (s == "self_financed") return Mode::kSelfFinanced;
  throw UsageError("--mode: expected unconstrained or self_financed, got '" +
                   s + "'");
}

const char* mode_name(Mode m) {
  return m == Mode::kSelfFinanced ? "self_financed" : "unconstrained";
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

struct Globals {
  std::string rate = "sqrt_ratio";
  double epsilon = 0.0;
  std::string format = "text";
  double tol_eq = kTolEq;
  bool no_validate = false;
};

struct Context {
  SuccessRate sr;
  SymbolTable symbols;
  Emitter out;
  std::ostream& err;
  double tol_eq;
};

RewardRule rule_arg(Context& ctx, const std::string& text) {
  if (text.empty()) throw UsageError("--rule: required");
  return for_option("--rule", [&] { return parse_rule(text, ctx.symbols); });
}

ConstantTailProfile profile_arg(Context& ctx, const std::string& key,
                                const std::string& text) {
  return for_option(key, [&] { return parse_profile(text, ctx.symbols); });
}

void report_validation(const SuccessRate& sr, std::ostream& err) {
  const ValidationReport rep = validate(sr);
  for (const auto& c : rep.checks) {
    if (!c.passed) {
      err << "# rate check " << c.name << " failed at x = " << c.worst_x
          << " (violation " << c.worst_value << ")\n";
    }
  }
  if (rep.all_passed()) err << "# rate checks passed\n";
}

std::vector<std::string> report_rows(Emitter& out,
                                     const EquilibriumReport& rep) {
  out.row({"verdict", rep.supported() ? "Supported" : "NotSupported", "mode",
           mode_name(rep.mode)});
  out.row({"checked_agents", std::to_string(rep.checked_agents),
           "max_residual", out.num(rep.max_residual)});
  for (std::size_t j = 0; j < rep.residuals.size(); ++j) {
    const auto& r = rep.residuals[j];
    out.row({"agent", std::to_string(r.agent), "x", out.num(r.investment),
             "marginal", out.num(r.marginal_return), "required",
             out.num(r.required_ratio), "residual", out.num(r.residual),
             "payoff", out.num(rep.payoffs[j]), "corner", yes_no(r.corner)});
  }
  for (const auto& f : rep.failures) out.row({"failure", f});
  return rep.failures;
}

// ---------------------------------------------------------------- commands

int cmd_optima(Context& ctx) {
  auto& out = ctx.out;
  const SuccessRate& sr = ctx.sr;
  int status = 0;
  out.row({"rate", sr.name(), "epsilon", out.num(sr.epsilon())});
  const double c_fb = first_best_investment(sr);
  out.row({"c_fb", out.num(c_fb), "W_fb",
           out.num(expected_welfare(sr, ConstantTailProfile::Constant(c_fb)))});

  auto emit = [&](const std::string& what,
                  const std::function<OptimumResult()>& solve,
                  const std::function<std::vector<std::string>(
                      const OptimumResult&)>& head) {
    try {
      const OptimumResult opt = solve();
      const auto rep = verify_equilibrium(sr, opt.supporting_rule,
                                          opt.profile, opt.mode, ctx.tol_eq);
      std::vector<std::string> fields = head(opt);
      fields.insert(fields.end(),
                    {"residual", out.num(opt.max_residual()), "rule",
                     format_rule(opt.supporting_rule), "verified",
                     yes_no(rep.supported())});
      out.row(fields);
      if (!rep.supported()) status = 1;
    } catch (const std::runtime_error& e) {
      out.row({what, "unavailable", "reason", e.what()});
      status = 1;
    }
  };
  emit("c_star", [&] { return socially_optimal(sr); },
       [&](const OptimumResult& o) -> std::vector<std::string> {
         return {"c_star", out.num(o.c()), "W_star", out.num(o.objective)};
       });
  emit("c_init", [&] { return initiator_optimal(sr); },
       [&](const OptimumResult& o) -> std::vector<std::string> {
         return {"c_init", out.num(o.c()), "x0_init", out.num(o.x0()),
                 "U0_init", out.num(o.objective)};
       });
  emit("c_s", [&] { return self_financed_optimal(sr); },
       [&](const OptimumResult& o) -> std::vector<std::string> {
         return {"c_s", out.num(o.c()), "x0_s", out.num(o.x0()), "W_s",
                 out.num(o.objective)};
       });
  return status;
}

struct VerifyArgs {
  std::string rule;
  std::string profile;
  std::string mode = "unconstrained";
  bool self_financed = false;
};

int cmd_verify(Context& ctx, const VerifyArgs& a) {
  const RewardRule rule = rule_arg(ctx, a.rule);
  if (a.profile.empty()) throw UsageError("--profile: required");
  const auto x = profile_arg(ctx, "--profile", a.profile);
  const Mode mode =
      a.self_financed ? Mode::kSelfFinanced : parse_mode(a.mode);
  EquilibriumReport rep;
  try {
    rep = verify_equilibrium(ctx.sr, rule, x, mode, ctx.tol_eq);
  } catch (const ShapeError& e) {
    throw UsageError(std::string("--rule: ") + e.what());
  }
  report_rows(ctx.out, rep);
  const auto fv = functionals(ctx.sr, x);
  ctx.out.row({"V", ctx.out.num(fv.value_V), "Vhat",
               ctx.out.num(aggregate_vhat(ctx.sr, rule, x)), "I",
               ctx.out.num(fv.investment_I), "G", ctx.out.num(fv.cost_G)});
  return rep.supported() ? 0 : 1;
}

struct SynthArgs {
  std::string profile;
  std::string gamma;
  std::string mode = "unconstrained";
};

int cmd_synthesize(Context& ctx, const SynthArgs& a) {
  if (a.profile.empty()) throw UsageError("--profile: required (x0,c)");
  const auto x = profile_arg(ctx, "--profile", a.profile);
  if (x.tail_start() > 1) {
    throw UsageError("--profile: expected a near-constant profile x0,c");
  }
  const Mode mode = parse_mode(a.mode);
  const double x0 = x.at(0);
  const double c = x.tail();
  double gamma = mode == Mode::kSelfFinanced ? c : 0.0;
  if (a.gamma == "c") {
    gamma = c;
  } else if (!a.gamma.empty()) {
    gamma = for_option("--gamma",
                       [&] { return parse_value(a.gamma, ctx.symbols); });
  }
  auto& out = ctx.out;
  const auto feas = for_option(
      "--gamma", [&] { return near_constant_feasible(ctx.sr, x0, c, gamma); });
  out.row({"feasible", yes_no(feas.feasible), "x0", out.num(x0), "c",
           out.num(c), "gamma", out.num(gamma)});
  out.row({"value", out.num(feas.value), "lower", out.num(feas.lower),
           "upper", out.num(feas.upper)});
  if (!feas.feasible) return 1;
  const RewardRule rule = synthesize_rule(ctx.sr, x0, c, gamma);
  out.row({"rule", format_rule(rule)});
  const auto rep = verify_equilibrium(ctx.sr, rule, x, mode, ctx.tol_eq);
  out.row({"verified", yes_no(rep.supported()), "max_residual",
           out.num(rep.max_residual)});
  return rep.supported() ? 0 : 1;
}

struct DynamicsArgs {
  std::string rule;
  std::string init = "0";
  std::size_t horizon = 8;
  int sweeps = 1000;
  double damping = 1.0;
  std::string mode = "unconstrained";
  bool history = false;
};

int cmd_dynamics(Context& ctx, const DynamicsArgs& a) {
  const RewardRule rule = rule_arg(ctx, a.rule);
  const auto init = profile_arg(ctx, "--init", a.init);
  DynamicsOptions opt;
  opt.max_sweeps = a.sweeps;
  opt.damping = a.damping;
  opt.mode = parse_mode(a.mode);
  opt.keep_history = a.history;
  const auto res = for_option("--damping", [&] {
    return best_response_dynamics(ctx.sr, rule, a.horizon, init, opt);
  });
  auto& out = ctx.out;
  out.row({"converged", yes_no(res.converged), "sweeps",
           std::to_string(res.sweeps), "last_change",
           out.num(res.last_change)});
  std::optional<BoundSchedule> bnd;
  if (ctx.sr.epsilon() > 0.0) bnd.emplace(ctx.sr, ctx.sr.epsilon());
  if (a.history) {
    for (std::size_t s = 0; s < res.history.size(); ++s) {
      std::vector<std::string> f = {"sweep", std::to_string(s + 1)};
      for (double v : res.history[s]) f.push_back(out.num(v));
      out.row(f);
    }
  }
  for (std::size_t j = 0; j < res.report.residuals.size(); ++j) {
    const auto& r = res.report.residuals[j];
    std::vector<std::string> f = {"agent", std::to_string(r.agent), "x",
                                  out.num(r.investment), "residual",
                                  out.num(r.residual)};
    if (bnd) {
      f.push_back("bound");
      f.push_back(out.num(bnd->at(r.agent)));
    }
    out.row(f);
  }
  out.row({"verdict", res.report.supported() ? "Supported" : "NotSupported",
           "max_residual", out.num(res.report.max_residual)});
  return res.converged && res.report.supported() ? 0 : 1;
}

struct RegionArgs {
  std::string mode = "both";
  int points = 64;
  std::optional<double> c_max;
};

int cmd_region(Context& ctx, const RegionArgs& a) {
  if (a.points < 1) throw UsageError("--points: must be >= 1");
  std::vector<Mode> modes;
  if (a.mode == "both") {
    modes = {Mode::kUnconstrained, Mode::kSelfFinanced};
  } else {
    modes = {parse_mode(a.mode)};
  }
  std::vector<std::vector<std::string>> rows;
  auto& out = ctx.out;
  for (Mode m : modes) {
    std::vector<double> grid;
    if (a.c_max) {
      if (!(*a.c_max > 0.0)) throw UsageError("--c-max: must be positive");
      for (int j = 0; j < a.points; ++j) {
        grid.push_back(*a.c_max * (j + 1) / a.points);
      }
    } else {
      grid = region_grid(ctx.sr, m, a.points);
    }
    for (const auto& r : region_sweep(ctx.sr, grid, m)) {
      rows.push_back({mode_name(m), out.num(r.c), out.num(r.c),
                      r.x0_lower ? out.num(*r.x0_lower) : "",
                      r.x0_upper ? out.num(*r.x0_upper) : ""});
    }
  }
  out.table({"mode", "c", "diag", "lower", "upper"}, rows);
  return 0;
}

struct SimulateArgs {
  std::string rule;
  std::string profile;
  std::uint64_t episodes = 1000000;
  std::uint64_t seed = 0;
  std::size_t max_chain = 10000;
  unsigned shards = 16;
  unsigned threads = 0;
  std::size_t agents = 3;
  bool histogram = false;
};

int cmd_simulate(Context& ctx, const SimulateArgs& a) {
  const RewardRule rule = rule_arg(ctx, a.rule);
  if (a.profile.empty()) throw UsageError("--profile: required");
  const auto x = profile_arg(ctx, "--profile", a.profile);
  SimulationConfig cfg;
  cfg.episodes = a.episodes;
  cfg.seed = a.seed;
  cfg.max_chain_length = a.max_chain;
  cfg.shards = a.shards;
  cfg.threads = a.threads;
  cfg.report_agents = a.agents;
  const auto s = for_option("--episodes",
                            [&] { return summarize(ctx.sr, x, rule, cfg); });
  auto& out = ctx.out;
  const auto fv = functionals(ctx.sr, x);
  auto est = [&](const std::string& name, const Estimate& e, double exact) {
    out.row({name, out.num(e.mean), "se", out.num(e.std_error), "closed_form",
             out.num(exact), "count", std::to_string(e.count)});
  };
  out.row({"episodes", std::to_string(s.episodes), "discarded",
           std::to_string(s.discarded), "seed", std::to_string(a.seed)});
  est("terminal", s.terminal_index, fv.value_V - 1.0);
  est("V", s.total_value, fv.value_V);
  est("I", s.investment, fv.investment_I);
  est("W", s.welfare, fv.welfare_W);
  for (std::size_t i = 0; i < s.payoffs.size(); ++i) {
    est("U" + std::to_string(i), s.payoffs[i],
        expected_payoff(ctx.sr, rule, x, i));
  }
  if (a.histogram) {
    for (std::size_t k = 0; k < s.histogram.size(); ++k) {
      out.row({"k", std::to_string(k), "count",
               std::to_string(s.histogram[k])});
    }
  }
  return 0;
}

struct RulePrintArgs {
  std::string rule;
  std::size_t rows = 8;
};

int cmd_rule_print(Context& ctx, const RulePrintArgs& a) {
  const RewardRule rule = rule_arg(ctx, a.rule);
  std::vector<std::string> header = {"k"};
  for (std::size_t i = 0; i < a.rows; ++i) {
    header.push_back("f" + std::to_string(i));
  }
  std::vector<std::vector<std::string>> rows;
  for (std::size_t k = 0; k < a.rows; ++k) {
    std::vector<std::string> r = {std::to_string(k)};
    for (std::size_t i = 0; i < a.rows; ++i) {
      r.push_back(i <= k ? ctx.out.num(rule.eval(i, k)) : "");
    }
    rows.push_back(r);
  }
  ctx.out.table(header, rows);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Equilibria, optima and simulation for sequential investment "
               "games with balanced reward rules.",
               "seqinvest"};
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "INI/TOML file; [command] sections hold "
                 "command options, flags override file values");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--rate,--family", g.rate,
                 "sqrt_ratio or scaled_sqrt_ratio")
      ->capture_default_str();
  app.add_option("--epsilon", g.epsilon, "cap parameter of scaled_sqrt_ratio")
      ->capture_default_str();
  app.add_option("--format", g.format, "text, csv or tsv")
      ->check(CLI::IsMember({"text", "csv", "tsv"}))
      ->capture_default_str();
  app.add_option("--tol-eq", g.tol_eq, "equilibrium residual tolerance")
      ->capture_default_str();
  app.add_flag("--no-validate", g.no_validate,
               "skip the rate checks printed to stderr");

  auto* optima = app.add_subcommand("optima", "first-best, socially optimal, "
                                    "initiator-optimal and self-financed optima");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "check that a rule supports a "
                                    "profile");
  verify->add_option("--rule", va.rule, "rule spec, e.g. equal_split()");
  verify->add_option("--profile", va.profile,
                     "x0,x1,...,tail (symbols such as c_star allowed)");
  verify->add_option("--mode", va.mode, "unconstrained or self_financed")
      ->capture_default_str();
  verify->add_flag("--self-financed", va.self_financed,
                   "same as --mode self_financed");

  SynthArgs sa;
  auto* synth = app.add_subcommand("synthesize", "build a rule supporting a "
                                   "near-constant profile x0,c");
  synth->add_option("--profile", sa.profile, "x0,c");
  synth->add_option("--gamma", sa.gamma,
                    "diagonal floor; a number, a symbol or 'c' "
                    "(default 0, or c in self_financed mode)");
  synth->add_option("--mode", sa.mode, "unconstrained or self_financed")
      ->capture_default_str();

  DynamicsArgs da;
  auto* dyn = app.add_subcommand("dynamics", "backward best-response sweeps "
                                 "on a truncated horizon");
  dyn->add_option("--rule", da.rule, "rule spec");
  dyn->add_option("--horizon", da.horizon, "number of free agents")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  dyn->add_option("--init,--profile", da.init,
                  "initial profile; agents past the horizon stay fixed")
      ->capture_default_str();
  dyn->add_option("--sweeps", da.sweeps, "sweep limit")->capture_default_str();
  dyn->add_option("--damping", da.damping, "step size in (0, 1]")
      ->capture_default_str();
  dyn->add_option("--mode", da.mode, "unconstrained or self_financed")
      ->capture_default_str();
  dyn->add_flag("--history", da.history, "print the iterate after each sweep");

  RegionArgs ra;
  auto* region = app.add_subcommand("region", "boundaries of the supportable "
                                    "near-constant profiles");
  region->add_option("--mode", ra.mode,
                     "unconstrained, self_financed or both")
      ->capture_default_str();
  region->add_option("--points", ra.points, "grid size")->capture_default_str();
  region->add_option("--c-max", ra.c_max,
                     "grid end (default: the mode's feasibility limit)");

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates of the "
                                 "process functionals and payoffs");
  sim->add_option("--rule", ma.rule, "rule spec");
  sim->add_option("--profile", ma.profile, "x0,x1,...,tail");
  sim->add_option("--episodes", ma.episodes)->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--seed", ma.seed)->capture_default_str();
  sim->add_option("--max-chain", ma.max_chain, "discard longer chains")
      ->capture_default_str();
  sim->add_option("--shards", ma.shards, "independent random streams")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sim->add_option("--threads", ma.threads, "0 uses every core")
      ->capture_default_str();
  sim->add_option("--agents", ma.agents, "report U_i for i below this")
      ->capture_default_str();
  sim->add_flag("--histogram", ma.histogram, "append terminal-index counts");

  RulePrintArgs pa;
  auto* rule = app.add_subcommand("rule", "inspect reward rules");
  rule->require_subcommand(1);
  auto* print = rule->add_subcommand("print", "print the first rows of a rule");
  print->add_option("--rule", pa.rule, "rule spec");
  print->add_option("--rows", pa.rows, "number of rows")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const Format fmt = g.format == "csv"   ? Format::kCsv
                       : g.format == "tsv" ? Format::kTsv
                                           : Format::kText;
    const SuccessRate sr = for_option(
        "--rate", [&] { return make_rate(g.rate, g.epsilon); });
    if (!g.no_validate) report_validation(sr, err);
    Context ctx{sr, SymbolTable(sr), Emitter(fmt, out), err, g.tol_eq};
    if (optima->parsed()) return cmd_optima(ctx);
    if (verify->parsed()) return cmd_verify(ctx, va);
    if (synth->parsed()) return cmd_synthesize(ctx, sa);
    if (dyn->parsed()) return cmd_dynamics(ctx, da);
    if (region->parsed()) return cmd_region(ctx, ra);
    if (sim->parsed()) return cmd_simulate(ctx, ma);
    if (print->parsed()) return cmd_rule_print(ctx, pa);
    err << "error: no command\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InfeasibleError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const BracketError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace seqinvest::cli
