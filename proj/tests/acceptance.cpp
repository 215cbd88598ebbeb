// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "seqinvest/seqinvest.hpp"

namespace {

using namespace seqinvest;

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

bool near(double v, double target, double tol) {
  return std::fabs(v - target) <= tol;
}

struct Supported {
  SuccessRate sr;
  RewardRule rule;
  ConstantTailProfile x;
  Mode mode;
};

// Supported verdicts collected from criteria 1 to 7 for criterion 9.
std::vector<Supported> g_supported;

void record(Check& chk, const SuccessRate& sr, const RewardRule& rule,
            const ConstantTailProfile& x, Mode mode, const std::string& what) {
  const auto rep = verify_equilibrium(sr, rule, x, mode);
  chk.require(rep.supported() && rep.max_residual <= 1e-8,
              what + " residual " + fmt(rep.max_residual));
  if (rep.supported()) g_supported.push_back({sr, rule, x, mode});
}

// Dynamics on the perturbed-F3 rule, with the truncated run extended by its
// stationary value: the rule's columns repeat from agent 2 on, so agents
// beyond it copy x_2 (the run holds agents past the horizon at 0).
struct PerturbedF3Run {
  DynamicsResult res;
  ConstantTailProfile profile;
};

PerturbedF3Run perturbed_f3_run(const SuccessRate& sr) {
  PerturbedF3Run run{best_response_dynamics(sr, testing::perturbed_f3_rule(), 8,
                                         ConstantTailProfile::Constant(0.0)),
                  {}};
  run.profile = ConstantTailProfile(
      {run.res.profile.at(0), run.res.profile.at(1)}, run.res.profile.at(2));
  return run;
}

Check perturbed_f3() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const auto run = perturbed_f3_run(sr);
  const auto& res = run.res;
  const double x0 = res.profile.at(0);
  const double x1 = res.profile.at(1);
  const double x2 = res.profile.at(2);
  chk.require(res.converged, "dynamics did not converge");
  chk.require(near(x0, 0.0131, 5e-4), "x0 " + fmt(x0));
  chk.require(near(x1, 0.3106, 5e-4), "x1 " + fmt(x1));
  chk.require(near(x2, 0.1777, 5e-4), "x2 " + fmt(x2));
  const double c = flatten_tail(sr, run.profile, 1).tail();
  chk.require(near(c, 0.2588, 5e-4), "flattened c " + fmt(c));
  const auto nc = near_constant_feasible(sr, x0, c, 0.0);
  chk.require(near(nc.value, 0.2842, 5e-4), "value " + fmt(nc.value));
  chk.require(near(nc.lower, 0.3160, 5e-4), "lower " + fmt(nc.lower));
  chk.require(!nc.feasible, "reported feasible");
  if (chk.ok) {
    chk.detail = "x=(" + fmt(x0) + ", " + fmt(x1) + ", " + fmt(x2) +
                 ") c=" + fmt(c) + " gap=(" + fmt(nc.value) + ", " +
                 fmt(nc.lower) + ")";
  }
  return chk;
}

Check optima() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const auto so = socially_optimal(sr);
  const auto io = initiator_optimal(sr);
  const auto sf = self_financed_optimal(sr);
  chk.require(near(so.c(), 0.088, 1e-3), "c_star " + fmt(so.c()));
  chk.require(near(io.c(), 0.026, 1e-3), "c_init " + fmt(io.c()));
  chk.require(near(io.x0(), 0.099, 1e-3), "x0_init " + fmt(io.x0()));
  chk.require(near(sf.c(), 0.0724, 5e-4), "c_s " + fmt(sf.c()));
  chk.require(near(sf.x0(), 0.0815, 5e-4), "x0_s " + fmt(sf.x0()));
  if (chk.ok) {
    chk.detail = "c*=" + fmt(so.c()) + " (c0,x0)=(" + fmt(io.c()) + ", " +
                 fmt(io.x0()) + ") (cs,x0s)=(" + fmt(sf.c()) + ", " +
                 fmt(sf.x0()) + ")";
  }
  return chk;
}

Check supporting_rules() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const double c_star = socially_optimal(sr).c();
  record(chk, sr, RewardRule::EqualSplit(), ConstantTailProfile::Constant(c_star),
         Mode::kUnconstrained, "equal split at c*");
  const auto io = initiator_optimal(sr);
  record(chk, sr, RewardRule::FixedFraction(sr.ratio(io.c())), io.profile,
         Mode::kUnconstrained, "fixed fraction at initiator optimum");
  const auto sf = self_financed_optimal(sr);
  const double cs = sf.c();
  record(chk, sr, RewardRule::FixedFractionFloor(sr.ratio(cs) + cs, cs),
         sf.profile, Mode::kSelfFinanced, "fixed fraction floor at c_s");
  if (chk.ok) chk.detail = "3 rules verified, residuals <= 1e-8";
  return chk;
}

Check negative_controls() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const double c_fb = first_best_investment(sr);
  const auto cs = constant_support_check(sr, c_fb);
  chk.require(!cs.supported, "constant first best reported supportable");
  const auto flat = flatten_tail(sr, perturbed_f3_run(sr).profile, 1);
  const auto nc = near_constant_feasible(sr, flat.at(0), flat.tail(), 0.0);
  chk.require(!nc.feasible, "flattened profile reported feasible");
  if (chk.ok) {
    chk.detail = "g-p at c_fb " + fmt(cs.gap) + "; flattened gap " +
                 fmt(nc.lower - nc.value);
  }
  return chk;
}

Check flattening() {
  Check chk;
  std::mt19937_64 gen(20261015);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_real_distribution<double> entry(0.0, 2.0);
  int profiles = 0;
  double worst = -1.0;
  const std::vector<SuccessRate> rates = {SuccessRate::SqrtRatio(),
                                          SuccessRate::ScaledSqrtRatio(0.1),
                                          SuccessRate::ScaledSqrtRatio(0.5)};
  for (const auto& sr : rates) {
    for (int n = 0; n < 1000; ++n) {
      std::vector<double> pre(len(gen));
      for (auto& v : pre) v = entry(gen);
      const ConstantTailProfile x(pre, entry(gen));
      ++profiles;
      const auto before = functionals(sr, x);
      for (std::size_t k = 0; k <= x.tail_start(); ++k) {
        const auto after = functionals(sr, flatten_tail(sr, x, k));
        const double di = after.investment_I - before.investment_I;
        const double dg = after.cost_G - before.cost_G;
        worst = std::max({worst, di, dg});
        if (di > 1e-9 || dg > 1e-9) {
          chk.require(false, "increase at k=" + std::to_string(k) + " of " +
                                 x.to_string());
        }
      }
    }
  }
  if (chk.ok) {
    chk.detail = std::to_string(profiles) +
                 " profiles, largest change in I or G " + fmt(worst);
  }
  return chk;
}

Check overinvestment() {
  Check chk;
  const double eps = std::sqrt(2.0) / 2.0;
  const auto sr = SuccessRate::ScaledSqrtRatio(eps);
  const double c_fb = first_best_investment(sr);
  const auto b = bounds(sr, eps);
  DynamicsOptions opt;
  opt.keep_history = true;
  const auto res = best_response_dynamics(sr, RewardRule::Jackpot(), 12,
                                          ConstantTailProfile::Constant(0.0),
                                          opt);
  chk.require(res.converged, "dynamics did not converge");
  for (std::size_t i = 1; i <= 10; ++i) {
    chk.require(res.profile.at(i) > c_fb,
                "x" + std::to_string(i) + " " + fmt(res.profile.at(i)));
  }
  chk.require(res.profile.at(0) <= c_fb, "x0 " + fmt(res.profile.at(0)));
  for (const auto& sweep : res.history) {
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (sweep[i] > b.at(i) + 1e-9) {
        chk.require(false, "bound broken at agent " + std::to_string(i));
      }
    }
  }
  if (chk.ok) {
    chk.detail = "c_fb=" + fmt(c_fb) + " x0=" + fmt(res.profile.at(0)) +
                 " x1..x10 above c_fb, " +
                 std::to_string(res.history.size()) + " sweeps within B_i";
  }
  return chk;
}

Check multiplicity() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const double c_star = socially_optimal(sr).c();
  const double q = sr.p(c_star);
  for (double beta : {-1.0, -0.5, 0.5, 1.0}) {
    record(chk, sr, RewardRule::EqualSplitShifted(beta, q),
           ConstantTailProfile::Constant(c_star), Mode::kUnconstrained,
           "beta " + fmt(beta));
  }
  if (chk.ok) chk.detail = "4 perturbed equal-split rules supported at c*";
  return chk;
}

Check monte_carlo() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const double c_star = socially_optimal(sr).c();
  const ConstantTailProfile pf3_x = perturbed_f3_run(sr).profile;
  struct Fixture {
    const char* name;
    RewardRule rule;
    ConstantTailProfile x;
  };
  const std::vector<Fixture> fixtures = {
      {"equal_split", RewardRule::EqualSplit(),
       ConstantTailProfile::Constant(c_star)},
      {"perturbed_f3", testing::perturbed_f3_rule(), pf3_x},
  };
  SimulationConfig cfg;
  cfg.episodes = 1000000;
  cfg.seed = 20261015;
  double worst = 0.0;
  for (const auto& f : fixtures) {
    const auto s = summarize(sr, f.x, f.rule, cfg);
    const auto again = summarize(sr, f.x, f.rule, cfg);
    const bool identical =
        s.total_value.mean == again.total_value.mean &&
        s.investment.mean == again.investment.mean &&
        s.welfare.mean == again.welfare.mean &&
        s.payoffs[0].mean == again.payoffs[0].mean &&
        s.payoffs[1].mean == again.payoffs[1].mean &&
        s.payoffs[2].mean == again.payoffs[2].mean &&
        s.histogram == again.histogram;
    chk.require(identical, std::string(f.name) + " re-run differs");
    const auto fv = functionals(sr, f.x);
    auto cmp = [&](const char* what, const Estimate& e, double truth) {
      const double z = std::fabs(e.mean - truth) / e.std_error;
      worst = std::max(worst, z);
      chk.require(z <= 3.0, std::string(f.name) + " " + what + " off by " +
                                fmt(z) + " SE");
    };
    cmp("V", s.total_value, fv.value_V);
    cmp("I", s.investment, fv.investment_I);
    cmp("W", s.welfare, fv.welfare_W);
    for (std::size_t i = 0; i < 3; ++i) {
      cmp(("U" + std::to_string(i)).c_str(), s.payoffs[i],
          expected_payoff(sr, f.rule, f.x, i));
    }
  }
  if (chk.ok) {
    chk.detail = "2 fixtures x 6 estimates, largest deviation " + fmt(worst) +
                 " SE, re-runs bit-identical";
  }
  return chk;
}

Check aggregates() {
  Check chk;
  chk.require(!g_supported.empty(), "no supported verdicts collected");
  double worst = 0.0;
  for (const auto& s : g_supported) {
    const auto fv = functionals(s.sr, s.x);
    const double vhat = aggregate_vhat(s.sr, s.rule, s.x);
    worst = std::max(worst, std::fabs(fv.value_V - vhat));
    chk.require(std::fabs(fv.value_V - vhat) <= 1e-8,
                "V - Vhat " + fmt(fv.value_V - vhat));
    chk.require(fv.value_V - 1.0 >= fv.cost_G - 1e-8, "V - 1 < G");
    if (s.mode == Mode::kSelfFinanced) {
      chk.require(fv.value_V >= fv.investment_I + fv.cost_G - 1e-8,
                  "V < I + G in self-financed mode");
    }
  }
  if (chk.ok) {
    chk.detail = std::to_string(g_supported.size()) +
                 " supported profiles, max |V - Vhat| " + fmt(worst);
  }
  return chk;
}

Check region() {
  Check chk;
  const auto sr = SuccessRate::SqrtRatio();
  const double c = region_intersection(sr);
  const double gap = std::fabs(sr.ratio(c) - (3.0 - 2.0 * sr.p(c)));
  chk.require(gap <= 1e-6, "intersection gap " + fmt(gap));
  const auto grid = region_grid(sr, Mode::kSelfFinanced, 256);
  const auto un = region_sweep(sr, grid, Mode::kUnconstrained);
  const auto sf = region_sweep(sr, grid, Mode::kSelfFinanced);
  int inside = 0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!sf[j].x0_upper) continue;
    if (!un[j].x0_upper || *sf[j].x0_upper > *un[j].x0_upper ||
        *sf[j].x0_lower < *un[j].x0_lower) {
      chk.require(false, "outside at c=" + fmt(grid[j]));
    } else {
      ++inside;
    }
  }
  if (chk.ok) {
    chk.detail = "curves meet at c=" + fmt(c) + " (gap " + fmt(gap) + "); " +
                 std::to_string(inside) + "/256 self-financed rows inside";
  }
  return chk;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Check()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "perturbed f3 reproduction", 1.0, perturbed_f3},
      {2, "optima reproduction", 1.0, optima},
      {3, "supporting-rule verification", 1.0, supporting_rules},
      {4, "negative controls", 1.0, negative_controls},
      {5, "flattening properties", 10.0, flattening},
      {6, "bounds and overinvestment", 5.0, overinvestment},
      {7, "multiplicity", 1.0, multiplicity},
      {8, "monte carlo consistency", 30.0, monte_carlo},
      {9, "aggregate identities", 1.0, aggregates},
      {10, "region sweep sanity", 2.0, region},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Check chk;
    try {
      chk = c.run();
    } catch (const std::exception& e) {
      chk.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    chk.require(secs <= c.limit_s,
                "took " + fmt(secs) + " s, limit " + fmt(c.limit_s) + " s");
    if (!chk.ok) ++failed;
    std::printf("criterion %2d %s  %-30s %7.3f s  %s\n", c.id,
                chk.ok ? "PASS" : "FAIL", c.name, secs, chk.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
