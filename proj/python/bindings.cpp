#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "qvkit/attacks.hpp"
#include "qvkit/cli.hpp"
#include "qvkit/error.hpp"
#include "qvkit/metrics.hpp"
#include "qvkit/schemes.hpp"
#include "qvkit/stake.hpp"
#include "qvkit/transform.hpp"
#include "qvkit/utility.hpp"

namespace py = pybind11;
using namespace qvkit;

namespace {

// Stakes arrive either as plain numbers (ids "v0", "v1", ... are assigned in
// input order) or as (voter_id, stake) pairs.
StakeDistribution to_dist(const py::iterable& stakes) {
  std::vector<StakeEntry> raw;
  std::size_t i = 0;
  for (const auto& item : stakes) {
    if (py::isinstance<py::tuple>(item) || py::isinstance<py::list>(item)) {
      auto seq = item.cast<py::sequence>();
      raw.push_back({seq[0].cast<std::string>(), seq[1].cast<double>()});
    } else {
      raw.push_back({"v" + std::to_string(i), item.cast<double>()});
    }
    ++i;
  }
  return canonicalize(std::move(raw));
}

py::list from_dist(const StakeDistribution& d) {
  py::list out;
  for (const auto& e : d.entries()) out.append(py::make_tuple(e.voter_id, e.stake));
  return out;
}

std::vector<BallotProfile> to_ballots(const std::vector<std::pair<std::string, std::vector<double>>>& b) {
  std::vector<BallotProfile> out;
  for (const auto& [id, alloc] : b) out.push_back({id, alloc});
  return out;
}

UtilityScheme utility_scheme(const std::string& s) {
  if (s == "qv1") return UtilityScheme::Qv1;
  if (s == "qv2") return UtilityScheme::Qv2;
  throw Error(ErrorCode::InvalidSpec, "scheme must be qv1 or qv2", s);
}

py::dict solution_dict(const AllocationSolution& s) {
  py::dict d;
  d["allocation"] = s.allocation;
  d["multiplier"] = s.multiplier;
  d["utility"] = s.utility;
  d["kkt_residual"] = s.kkt_residual;
  d["method"] = std::string(to_string(s.method));
  d["degenerate"] = s.degenerate;
  return d;
}

py::dict report_dict(const AttackReport& r) {
  py::dict d;
  d["kind"] = std::string(to_string(r.kind));
  d["baseline"] = r.baseline;
  d["attacked"] = r.attacked;
  d["gain"] = r.gain;
  py::list steps;
  for (const auto& s : r.narrative) {
    steps.append(py::dict(py::arg("step") = s.step, py::arg("values") = s.values,
                          py::arg("note") = s.note));
  }
  d["narrative"] = steps;
  return d;
}

UtilityProblem make_problem(const std::string& scheme, std::vector<double> profits,
                            std::vector<double> aligned, std::vector<double> total, double stake) {
  return UtilityProblem{std::move(profits), std::move(aligned), std::move(total), stake,
                        utility_scheme(scheme)};
}

}  // namespace

PYBIND11_MODULE(_qvkit, m) {
  m.doc() = "Quadratic and gamma-power voting: tallies, decentralization metrics, utility solvers";

  // Kept alive for the life of the process, like the module itself.
  static PyObject* error_type =
      PyErr_NewException("qvkit._qvkit.QvkitError", PyExc_ValueError, nullptr);
  m.add_object("QvkitError", py::handle(error_type));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("subject") = e.subject();
      exc.attr("line") = e.line() ? py::cast(*e.line()) : py::none();
      PyErr_SetObject(error_type, exc.ptr());
    }
  });

  m.def("canonicalize", [](const py::iterable& s) { return from_dist(to_dist(s)); },
        py::arg("stakes"), "Sorted (voter_id, stake) pairs.");
  m.def(
      "generate",
      [](const std::string& kind, std::size_t n, std::uint64_t seed, double value, double lo,
         double hi, double shape, double scale) {
        DistributionSpec spec;
        if (kind == "constant") spec.kind = DistributionKind::Constant;
        else if (kind == "uniform") spec.kind = DistributionKind::UniformRange;
        else if (kind == "pareto") spec.kind = DistributionKind::Pareto;
        else throw Error(ErrorCode::InvalidSpec, "unknown kind '" + kind + "'", kind);
        spec.n = n;
        spec.seed = seed;
        spec.value = value;
        spec.lo = lo;
        spec.hi = hi;
        spec.shape = shape;
        spec.scale = scale;
        return from_dist(generate(spec));
      },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 0, py::arg("value") = 1.0,
      py::arg("lo") = 0.0, py::arg("hi") = 1.0, py::arg("shape") = 1.16, py::arg("scale") = 1.0);

  m.def("voting_credit", [](const std::string& scheme, double stake) {
    return voting_credit(parse_scheme(scheme), stake);
  });
  m.def(
      "tally",
      [](const std::string& scheme, const py::iterable& stakes,
         const std::vector<std::pair<std::string, std::vector<double>>>& ballots, std::size_t m,
         const std::string& polarity, double tol, bool allow_undervote) {
        const Polarity pol =
            polarity == "yes-no-abstain" ? Polarity::YesNoAbstain : Polarity::YesAbstain;
        const auto r = tally(parse_scheme(scheme, pol), to_dist(stakes), to_ballots(ballots), m,
                             {tol, allow_undervote});
        py::dict d;
        d["score"] = r.score;
        d["vscore"] = r.vscore;
        d["credit_used"] = r.credit_used;
        return d;
      },
      py::arg("scheme"), py::arg("stakes"), py::arg("ballots"), py::arg("m"),
      py::arg("polarity") = "yes-abstain", py::arg("tol") = 1e-9,
      py::arg("allow_undervote") = false);

  m.def("rvr_split", [](const py::iterable& s, double g) { return rvr_split(to_dist(s), g); },
        py::arg("stakes"), py::arg("gamma"));
  m.def(
      "rvr_unsplit",
      [](const py::iterable& s, const std::vector<long long>& counts, double g) {
        return rvr_unsplit(to_dist(s), counts, g);
      },
      py::arg("stakes"), py::arg("counts"), py::arg("gamma"));
  m.def("eta", [](const py::iterable& s, double g) { return eta(to_dist(s), g); },
        py::arg("stakes"), py::arg("gamma"));
  m.def("eta_threshold",
        [](const py::iterable& s, double g) { return eta_threshold(to_dist(s), g); },
        py::arg("stakes"), py::arg("gamma") = 0.5);
  m.def("gini", [](const std::vector<double>& c) { return gini(c); }, py::arg("credits"));
  m.def("gini_from_lorenz", [](const std::vector<double>& c) { return gini_from_lorenz(c); },
        py::arg("credits"));
  m.def("nakamoto", [](const std::vector<double>& c, double a) { return nakamoto(c, a); },
        py::arg("credits"), py::arg("a"));
  m.def("gamma_credits",
        [](const py::iterable& s, double g) { return gamma_credits(to_dist(s), g); },
        py::arg("stakes"), py::arg("gamma"));
  m.def(
      "report",
      [](const py::iterable& s, double g, const std::vector<double>& thresholds) {
        const auto r = report(to_dist(s), g, thresholds);
        py::dict d;
        d["gamma"] = r.gamma;
        d["rvr"] = r.rvr;
        d["eta"] = r.eta;
        d["gini"] = r.gini;
        py::dict nak;
        for (const auto& e : r.nakamoto) nak[py::float_(e.threshold)] = py::make_tuple(e.classical, e.normalized);
        d["nakamoto"] = nak;
        py::list lz;
        for (const auto& p : r.lorenz) lz.append(py::make_tuple(p.index, p.cumulative_share));
        d["lorenz"] = lz;
        return d;
      },
      py::arg("stakes"), py::arg("gamma") = 0.5, py::arg("thresholds") = std::vector<double>{0.51});

  m.def("top_share",
        [](const py::iterable& s, std::size_t k, double g) { return top_share(to_dist(s), k, g); },
        py::arg("stakes"), py::arg("k"), py::arg("gamma"));
  m.def("apply_gamma", [](const py::iterable& s, double g) { return from_dist(apply_gamma(to_dist(s), g)); },
        py::arg("stakes"), py::arg("gamma"));
  m.def(
      "gamma_search",
      [](const py::iterable& s, std::size_t k, double alpha, double tol, int max_iter,
         bool strict_input) {
        GammaSearchOptions o;
        o.tol = tol;
        o.max_iter = max_iter;
        o.strict_input = strict_input;
        const auto r = gamma_search(to_dist(s), k, alpha, o);
        py::dict d;
        d["gamma"] = r.gamma;
        d["achieved_share"] = r.achieved_share;
        d["target"] = r.target;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("stakes"), py::arg("k"), py::arg("alpha"), py::arg("tol") = 1e-9,
      py::arg("max_iter") = 200, py::arg("strict_input") = false);

  m.def("success_probability", &success_probability, py::arg("s"), py::arg("a"), py::arg("b"));
  m.def(
      "maximize",
      [](const std::string& scheme, std::vector<double> profits, std::vector<double> aligned,
         std::vector<double> total, double stake) {
        return solution_dict(maximize(make_problem(scheme, profits, aligned, total, stake)));
      },
      py::arg("scheme"), py::arg("profits"), py::arg("aligned"), py::arg("total"),
      py::arg("stake"));
  m.def(
      "brute_force_oracle",
      [](const std::string& scheme, std::vector<double> profits, std::vector<double> aligned,
         std::vector<double> total, double stake, int resolution) {
        return solution_dict(
            brute_force_oracle(make_problem(scheme, profits, aligned, total, stake), resolution));
      },
      py::arg("scheme"), py::arg("profits"), py::arg("aligned"), py::arg("total"),
      py::arg("stake"), py::arg("resolution") = 200);

  m.def("sybil_gain",
        [](const std::string& scheme, double stake, long long k) {
          return sybil_gain(parse_scheme(scheme), stake, k);
        },
        py::arg("scheme"), py::arg("stake"), py::arg("k"));
  m.def(
      "collusion_gain",
      [](const std::vector<double>& stakes, std::size_t m,
         const std::vector<std::pair<std::string, std::vector<double>>>& honest,
         const std::vector<std::pair<std::string, std::vector<double>>>& colluding) {
        return report_dict(collusion_gain(stakes, m, to_ballots(honest), to_ballots(colluding)));
      },
      py::arg("stakes"), py::arg("m"), py::arg("honest"), py::arg("colluding"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run one CLI command in-process; returns (exit_code, stdout, stderr).");
}
