#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "seqinvest/seqinvest.hpp"

namespace py = pybind11;
using namespace seqinvest;

namespace {

py::dict to_dict(const FunctionalValues& f) {
  py::dict d;
  d["V"] = f.value_V;
  d["I"] = f.investment_I;
  d["W"] = f.welfare_W;
  d["G"] = f.cost_G;
  return d;
}

py::dict to_dict(const Estimate& e) {
  py::dict d;
  d["mean"] = e.mean;
  d["std_error"] = e.std_error;
  d["count"] = e.count;
  return d;
}

Mode to_mode(const std::string& s) {
  if (s == "unconstrained") return Mode::kUnconstrained;
  if (s == "self_financed") return Mode::kSelfFinanced;
  throw py::value_error("mode must be 'unconstrained' or 'self_financed'");
}

std::string mode_name(Mode m) {
  return m == Mode::kSelfFinanced ? "self_financed" : "unconstrained";
}

ConstantTailProfile as_profile(const py::object& o) {
  if (py::isinstance<ConstantTailProfile>(o)) {
    return o.cast<ConstantTailProfile>();
  }
  if (py::isinstance<py::float_>(o) || py::isinstance<py::int_>(o)) {
    return ConstantTailProfile::Constant(o.cast<double>());
  }
  auto v = o.cast<std::vector<double>>();
  if (v.empty()) throw py::value_error("profile needs at least one value");
  const double tail = v.back();
  v.pop_back();
  return {v, tail};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Sequential investment games with balanced reward rules.";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<RuleConstructionError>(m, "RuleConstructionError",
                                                PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InfeasibleError>(m, "InfeasibleError",
                                          PyExc_RuntimeError);
  py::register_exception<BracketError>(m, "BracketError", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_RuntimeError);

  py::class_<SuccessRate>(m, "SuccessRate")
      .def_static("sqrt_ratio", &SuccessRate::SqrtRatio,
                  py::arg("domain_cap") = SuccessRate::kDefaultDomainCap)
      .def_static("scaled_sqrt_ratio", &SuccessRate::ScaledSqrtRatio,
                  py::arg("epsilon"),
                  py::arg("domain_cap") = SuccessRate::kDefaultDomainCap)
      .def_static("custom", &SuccessRate::Custom, py::arg("name"), py::arg("p"),
                  py::arg("p_prime"), py::arg("epsilon") = 0.0,
                  py::arg("domain_cap") = SuccessRate::kDefaultDomainCap)
      .def_static("named", &make_rate, py::arg("family"),
                  py::arg("epsilon") = 0.0)
      .def_property_readonly("name", &SuccessRate::name)
      .def_property_readonly("epsilon", &SuccessRate::epsilon)
      .def_property_readonly("domain_cap", &SuccessRate::domain_cap)
      .def("p", &SuccessRate::p)
      .def("p_prime", &SuccessRate::p_prime)
      .def("g", &SuccessRate::g)
      .def("g_prime", &SuccessRate::g_prime)
      .def("ratio", &SuccessRate::ratio)
      .def("validate",
           [](const SuccessRate& sr, int grid) {
             py::dict out;
             for (const auto& c : validate(sr, grid).checks) {
               py::dict d;
               d["passed"] = c.passed;
               d["worst_x"] = c.worst_x;
               d["worst_value"] = c.worst_value;
               out[py::str(c.name)] = d;
             }
             return out;
           },
           py::arg("grid_points") = 512)
      .def("__repr__", [](const SuccessRate& sr) {
        return "SuccessRate(" + sr.name() + ", epsilon=" +
               format_number(sr.epsilon()) + ")";
      });

  m.def("register_success_rate", &register_success_rate, py::arg("name"),
        py::arg("p"), py::arg("p_prime"), py::arg("epsilon") = 0.0,
        py::arg("domain_cap") = SuccessRate::kDefaultDomainCap);

  py::class_<ConstantTailProfile>(m, "Profile")
      .def(py::init<std::vector<double>, double>(), py::arg("prefix"),
           py::arg("tail"))
      .def_static("constant", &ConstantTailProfile::Constant)
      .def_static("parse",
                  [](const std::string& text, const SuccessRate& sr) {
                    SymbolTable sym(sr);
                    return parse_profile(text, sym);
                  },
                  py::arg("text"), py::arg("rate") = SuccessRate::SqrtRatio())
      .def_property_readonly("prefix", &ConstantTailProfile::prefix)
      .def_property_readonly("tail", &ConstantTailProfile::tail)
      .def("__getitem__", &ConstantTailProfile::at)
      .def("head", [](const ConstantTailProfile& x, std::size_t n) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = x.at(i);
        return out;
      })
      .def(py::self == py::self)
      .def("__repr__", &ConstantTailProfile::to_string);

  m.def("functionals",
        [](const SuccessRate& sr, const py::object& x) {
          return to_dict(functionals(sr, as_profile(x)));
        },
        py::arg("rate"), py::arg("profile"));
  m.def("flatten_tail",
        [](const SuccessRate& sr, const py::object& x, std::size_t k) {
          return flatten_tail(sr, as_profile(x), k);
        },
        py::arg("rate"), py::arg("profile"), py::arg("k"));

  py::class_<RewardRule>(m, "RewardRule")
      .def_static("equal_split", &RewardRule::EqualSplit)
      .def_static("fixed_fraction", &RewardRule::FixedFraction, py::arg("alpha"))
      .def_static("fixed_fraction_floor", &RewardRule::FixedFractionFloor,
                  py::arg("alpha"), py::arg("gamma"))
      .def_static("jackpot", &RewardRule::Jackpot)
      .def_static("f1", &RewardRule::F1, py::arg("alpha"), py::arg("gamma"))
      .def_static("f2", &RewardRule::F2, py::arg("alpha"), py::arg("gamma"))
      .def_static("f3", &RewardRule::F3, py::arg("beta"), py::arg("gamma"))
      .def_static("f4", &RewardRule::F4, py::arg("beta"), py::arg("gamma"))
      .def_static("mixture", &RewardRule::Mixture, py::arg("weight"),
                  py::arg("left"), py::arg("right"))
      .def_static("equal_split_shifted", &RewardRule::EqualSplitShifted,
                  py::arg("beta"), py::arg("q"))
      .def_static("parse",
                  [](const std::string& text, const SuccessRate& sr) {
                    SymbolTable sym(sr);
                    return parse_rule(text, sym);
                  },
                  py::arg("text"), py::arg("rate") = SuccessRate::SqrtRatio())
      .def_property_readonly("kind",
                             [](const RewardRule& r) {
                               return std::string(rule_kind_name(r.kind()));
                             })
      .def("__call__", &RewardRule::eval, py::arg("i"), py::arg("k"))
      .def("rows",
           [](const RewardRule& r, std::size_t n) {
             std::vector<std::vector<double>> rows(n);
             for (std::size_t k = 0; k < n; ++k) {
               for (std::size_t i = 0; i <= k; ++i) rows[k].push_back(r(i, k));
             }
             return rows;
           },
           py::arg("n"))
      .def("__repr__", &format_rule);

  m.def("verify_equilibrium",
        [](const SuccessRate& sr, const RewardRule& rule, const py::object& x,
           const std::string& mode, double tol) {
          const auto rep =
              verify_equilibrium(sr, rule, as_profile(x), to_mode(mode), tol);
          py::dict d;
          d["supported"] = rep.supported();
          d["mode"] = mode_name(rep.mode);
          d["max_residual"] = rep.max_residual;
          d["payoffs"] = rep.payoffs;
          std::vector<std::size_t> agents;
          std::vector<double> residuals;
          for (const auto& r : rep.residuals) {
            agents.push_back(r.agent);
            residuals.push_back(r.residual);
          }
          d["agents"] = agents;
          d["residuals"] = residuals;
          d["failures"] = rep.failures;
          return d;
        },
        py::arg("rate"), py::arg("rule"), py::arg("profile"),
        py::arg("mode") = "unconstrained", py::arg("tol") = kTolEq);

  m.def("best_response_dynamics",
        [](const SuccessRate& sr, const RewardRule& rule, std::size_t horizon,
           const py::object& init, int max_sweeps, double damping,
           const std::string& mode) {
          DynamicsOptions opt;
          opt.max_sweeps = max_sweeps;
          opt.damping = damping;
          opt.mode = to_mode(mode);
          const auto res =
              best_response_dynamics(sr, rule, horizon, as_profile(init), opt);
          py::dict d;
          d["profile"] = res.profile;
          d["converged"] = res.converged;
          d["sweeps"] = res.sweeps;
          d["last_change"] = res.last_change;
          return d;
        },
        py::arg("rate"), py::arg("rule"), py::arg("horizon"),
        py::arg("init") = 0.0, py::arg("max_sweeps") = 1000,
        py::arg("damping") = 1.0, py::arg("mode") = "unconstrained");

  m.def("near_constant_feasible",
        [](const SuccessRate& sr, double x0, double c, double gamma) {
          const auto r = near_constant_feasible(sr, x0, c, gamma);
          py::dict d;
          d["feasible"] = r.feasible;
          d["value"] = r.value;
          d["lower"] = r.lower;
          d["upper"] = r.upper;
          return d;
        },
        py::arg("rate"), py::arg("x0"), py::arg("c"), py::arg("gamma") = 0.0);
  m.def("synthesize_rule", &synthesize_rule, py::arg("rate"), py::arg("x0"),
        py::arg("c"), py::arg("gamma") = 0.0);

  py::class_<OptimumResult>(m, "Optimum")
      .def_readonly("name", &OptimumResult::name)
      .def_readonly("profile", &OptimumResult::profile)
      .def_readonly("supporting_rule", &OptimumResult::supporting_rule)
      .def_readonly("objective", &OptimumResult::objective)
      .def_readonly("residuals", &OptimumResult::residuals)
      .def_property_readonly("mode",
                             [](const OptimumResult& o) { return mode_name(o.mode); })
      .def_property_readonly("x0", &OptimumResult::x0)
      .def_property_readonly("c", &OptimumResult::c)
      .def("__repr__", [](const OptimumResult& o) {
        return "Optimum(" + o.name + ", x0=" + format_number(o.x0()) +
               ", c=" + format_number(o.c()) + ")";
      });

  m.def("first_best_investment", &first_best_investment, py::arg("rate"));
  m.def("socially_optimal", &socially_optimal, py::arg("rate"));
  m.def("initiator_optimal", &initiator_optimal, py::arg("rate"));
  m.def("self_financed_optimal", &self_financed_optimal, py::arg("rate"),
        py::arg("grid_points") = 256);

  m.def("region_sweep",
        [](const SuccessRate& sr, const std::string& mode, int points) {
          const Mode md = to_mode(mode);
          std::vector<py::tuple> rows;
          for (const auto& r :
               region_sweep(sr, region_grid(sr, md, points), md)) {
            rows.push_back(py::make_tuple(
                r.c, r.x0_lower ? py::cast(*r.x0_lower) : py::none(),
                r.x0_upper ? py::cast(*r.x0_upper) : py::none()));
          }
          return rows;
        },
        py::arg("rate"), py::arg("mode") = "unconstrained",
        py::arg("points") = 64);

  m.def("simulate",
        [](const SuccessRate& sr, const py::object& x, const RewardRule& rule,
           std::uint64_t episodes, std::uint64_t seed, unsigned shards,
           unsigned threads, std::size_t agents, std::size_t max_chain) {
          SimulationConfig cfg;
          cfg.episodes = episodes;
          cfg.seed = seed;
          cfg.shards = shards;
          cfg.threads = threads;
          cfg.report_agents = agents;
          cfg.max_chain_length = max_chain;
          const ConstantTailProfile profile = as_profile(x);
          SimulationSummary s;
          {
            py::gil_scoped_release release;
            s = summarize(sr, profile, rule, cfg);
          }
          py::dict d;
          d["episodes"] = s.episodes;
          d["discarded"] = s.discarded;
          d["terminal_index"] = to_dict(s.terminal_index);
          d["V"] = to_dict(s.total_value);
          d["I"] = to_dict(s.investment);
          d["W"] = to_dict(s.welfare);
          py::list payoffs;
          for (const auto& e : s.payoffs) payoffs.append(to_dict(e));
          d["payoffs"] = payoffs;
          d["histogram"] = s.histogram;
          return d;
        },
        py::arg("rate"), py::arg("profile"), py::arg("rule"),
        py::arg("episodes") = 100000, py::arg("seed") = 0,
        py::arg("shards") = 16, py::arg("threads") = 0, py::arg("agents") = 3,
        py::arg("max_chain") = 10000);
}
