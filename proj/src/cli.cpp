#include "qvkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "qvkit/attacks.hpp"
#include "qvkit/error.hpp"
#include "qvkit/io.hpp"
#include "qvkit/metrics.hpp"
#include "qvkit/schemes.hpp"
#include "qvkit/stake.hpp"
#include "qvkit/transform.hpp"
#include "qvkit/utility.hpp"

namespace qvkit::cli {

namespace {

using io::Json;

// Sends the command's output to --output when given, else to `out`.
class Sink {
 public:
  Sink(std::ostream& fallback, const std::string& path) : fallback_(fallback) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::IoError, "cannot write '" + path + "'", path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : fallback_; }

 private:
  std::ostream& fallback_;
  std::ofstream file_;
};

Polarity parse_polarity(const std::string& text) {
  if (text == "yes-abstain") return Polarity::YesAbstain;
  if (text == "yes-no-abstain") return Polarity::YesNoAbstain;
  throw Error(ErrorCode::InvalidSpec, "unknown polarity '" + text + "'", text);
}

std::optional<StakeMode> parse_mode(const std::string& text) {
  if (text.empty()) return std::nullopt;
  if (text == "split") return StakeMode::Split;
  if (text == "unsplit") return StakeMode::Unsplit;
  throw Error(ErrorCode::InvalidSpec, "unknown stake mode '" + text + "'", text);
}

UtilityScheme parse_utility_scheme(const std::string& text) {
  if (text == "qv1") return UtilityScheme::Qv1;
  if (text == "qv2") return UtilityScheme::Qv2;
  throw Error(ErrorCode::InvalidSpec, "utility scheme must be qv1 or qv2", text);
}

void write_error(std::ostream& err, const Error& e) {
  Json j = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (!e.subject().empty()) j["subject"] = e.subject();
  if (e.line()) j["line"] = *e.line();
  io::write_json(err, j);
}

std::string env_seed_default() {
  const char* v = std::getenv("QVKIT_SEED");
  return v ? std::string(v) : std::string();
}

std::vector<BallotProfile> plan_from(const Json& scenario, const char* key) {
  if (!scenario.contains(key)) {
    throw Error(ErrorCode::ParseError, std::string("scenario is missing '") + key + "'", key);
  }
  return io::ballots_from_json(scenario.at(key));
}

double number_from(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw Error(ErrorCode::ParseError, std::string("missing numeric field '") + key + "'", key);
  }
  return j.at(key).get<double>();
}

std::vector<double> numbers_from(const Json& j, const char* key, bool required = true) {
  std::vector<double> out;
  if (!j.contains(key)) {
    if (required) {
      throw Error(ErrorCode::ParseError, std::string("missing array field '") + key + "'", key);
    }
    return out;
  }
  const auto& arr = j.at(key);
  if (!arr.is_array()) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must be an array", key);
  }
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must hold numbers", key);
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qvkit: quadratic and gamma-power voting analysis", "qvkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string output;
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("-o,--output", output, "Write the result here instead of standard output");
  };

  // tally
  struct {
    std::string stakes, ballots, scheme, polarity = "yes-abstain", mode;
    std::size_t proposals = 0;
    double tol = 1e-9;
    bool allow_undervote = false;
  } tl;
  auto* tally_cmd = app.add_subcommand("tally", "Validate ballots and compute score/vscore per proposal");
  tally_cmd->add_option("--stakes", tl.stakes, "Stake CSV (voter_id,stake)")->required();
  tally_cmd->add_option("--ballots", tl.ballots, "Ballot JSON array")->required();
  tally_cmd->add_option("--scheme", tl.scheme, "linear | qv1 | qv2 | qv3 | gpv:<gamma>")->required();
  tally_cmd->add_option("--polarity", tl.polarity, "yes-abstain | yes-no-abstain")
      ->capture_default_str();
  tally_cmd->add_option("--mode", tl.mode, "split | unsplit (linear only; default from scheme)");
  tally_cmd->add_option("--proposals", tl.proposals,
                        "Number of proposals (default: arity of the first ballot)");
  tally_cmd->add_option("--tol", tl.tol, "Absolute tolerance on credit sums")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  tally_cmd->add_flag("--allow-undervote", tl.allow_undervote,
                      "Accept split ballots spending less than the full credit");
  add_output(tally_cmd);

  // metrics
  struct {
    std::string stakes;
    double gamma = 0.5;
    std::vector<double> thresholds;
  } mt;
  auto* metrics_cmd = app.add_subcommand("metrics", "RVR, eta, Gini, Nakamoto and Lorenz points");
  metrics_cmd->add_option("--stakes", mt.stakes, "Stake CSV (voter_id,stake)")->required();
  metrics_cmd->add_option("--gamma", mt.gamma, "Credit exponent in (0,1]; 1 is linear voting")
      ->capture_default_str();
  metrics_cmd->add_option("--nakamoto", mt.thresholds,
                          "Nakamoto control threshold(s) in (0,1); default 0.51");
  add_output(metrics_cmd);

  // lorenz
  struct {
    std::string stakes;
    double gamma = 1.0;
    std::string format = "csv";
  } lz;
  auto* lorenz_cmd = app.add_subcommand("lorenz", "Lorenz curve points of the gamma credits");
  lorenz_cmd->add_option("--stakes", lz.stakes, "Stake CSV (voter_id,stake)")->required();
  lorenz_cmd->add_option("--gamma", lz.gamma, "Credit exponent in (0,1]")->capture_default_str();
  lorenz_cmd->add_option("--format", lz.format, "csv | json")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  add_output(lorenz_cmd);

  // gamma-search
  struct {
    std::string stakes, transformed, format = "json";
    std::size_t k = 1;
    double alpha = 0.0;
    GammaSearchOptions opts;
    bool verify = false;
  } gs;
  auto* gamma_cmd = app.add_subcommand(
      "gamma-search", "Find gamma capping the top-k transformed stake share at alpha");
  gamma_cmd->add_option("--stakes", gs.stakes, "Stake CSV (voter_id,stake)")->required();
  gamma_cmd->add_option("--k", gs.k, "Number of largest stakeholders, 1 <= k <= n")->required();
  gamma_cmd->add_option("--alpha", gs.alpha, "Target share in (k/n, 1)")->required();
  gamma_cmd->add_option("--tol", gs.opts.tol, "Tolerance on the achieved share")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gamma_cmd->add_option("--max-iter", gs.opts.max_iter, "Bisection iteration cap")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  gamma_cmd->add_flag("--strict-input", gs.opts.strict_input,
                      "Fail when alpha exceeds the current top-k share");
  gamma_cmd->add_option("--transformed", gs.transformed,
                        "Also write the transformed distribution as CSV to this file");
  gamma_cmd->add_option("--format", gs.format,
                        "json (result + transformed stakes) | csv (transformed stakes only)")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  gamma_cmd->add_flag("--verify-properties", gs.verify,
                      "Include the transformation property checks in the JSON output");
  add_output(gamma_cmd);

  // optimize
  struct {
    std::string scheme, problem;
    double tol = 1e-8;
    bool oracle = false;
    int resolution = 400;
  } op;
  auto* optimize_cmd = app.add_subcommand("optimize", "Maximize a voter's expected utility");
  optimize_cmd->add_option("--scheme", op.scheme, "qv1 | qv2")
      ->required()
      ->check(CLI::IsMember({"qv1", "qv2"}));
  optimize_cmd->add_option("--problem", op.problem,
                           "Problem JSON {profits, aligned, total, stake}")
      ->required();
  optimize_cmd->add_option("--tol", op.tol, "KKT tolerance the solution is checked against")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  optimize_cmd->add_flag("--oracle-check", op.oracle, "Compare with the brute-force grid oracle");
  optimize_cmd->add_option("--resolution", op.resolution, "Oracle grid resolution (>= 100)")
      ->capture_default_str();
  add_output(optimize_cmd);

  // attack
  struct {
    std::string scenario, scheme = "qv2";
    double stake = 0.0;
    long long k = 0;
  } at;
  auto* attack_cmd = app.add_subcommand("attack", "Quantify strategic behaviour");
  attack_cmd->require_subcommand(1);
  auto* collusion_cmd = attack_cmd->add_subcommand("collusion", "QV-1 collusion gain");
  collusion_cmd->add_option("--scenario", at.scenario,
                            "JSON {stakes, proposals, honest, colluding}")
      ->required();
  add_output(collusion_cmd);
  auto* sybil_cmd = attack_cmd->add_subcommand("sybil", "Stake-splitting gain");
  sybil_cmd->add_option("--scenario", at.scenario, "JSON {scheme, stake, k}");
  sybil_cmd->add_option("--scheme", at.scheme, "linear | qv1 | qv2 | qv3 | gpv:<gamma>")
      ->capture_default_str();
  sybil_cmd->add_option("--stake", at.stake, "Stake being split");
  sybil_cmd->add_option("--k", at.k, "Number of identities");
  add_output(sybil_cmd);
  auto* last_cmd = attack_cmd->add_subcommand("last-voter", "Advantage of voting last");
  last_cmd->add_option("--scenario", at.scenario,
                       "JSON {scheme, prior_stakes, prior_ballots, last_voter_stake, profits, "
                       "alignment}")
      ->required();
  add_output(last_cmd);

  // generate
  struct {
    std::string kind = "pareto", format = "csv", seed_text = env_seed_default();
    DistributionSpec spec;
  } gen;
  auto* generate_cmd = app.add_subcommand("generate", "Seeded synthetic stake distribution");
  generate_cmd->add_option("--kind", gen.kind, "constant | uniform | pareto")
      ->capture_default_str()
      ->check(CLI::IsMember({"constant", "uniform", "pareto"}));
  generate_cmd->add_option("--n", gen.spec.n, "Number of voters (>= 1)")->required();
  generate_cmd->add_option("--seed", gen.seed_text,
                           "64-bit seed (default: $QVKIT_SEED, else 0)");
  generate_cmd->add_option("--value", gen.spec.value, "constant: stake of every voter")
      ->capture_default_str();
  generate_cmd->add_option("--lo", gen.spec.lo, "uniform: lower bound (>= 0)")->capture_default_str();
  generate_cmd->add_option("--hi", gen.spec.hi, "uniform: upper bound (> lo)")->capture_default_str();
  generate_cmd->add_option("--shape", gen.spec.shape, "pareto: shape (> 0)")->capture_default_str();
  generate_cmd->add_option("--scale", gen.spec.scale, "pareto: scale (> 0)")->capture_default_str();
  generate_cmd->add_option("--format", gen.format, "csv | json")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  add_output(generate_cmd);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (tally_cmd->parsed()) {
      const SchemeSpec scheme =
          parse_scheme(tl.scheme, parse_polarity(tl.polarity), parse_mode(tl.mode));
      const StakeDistribution dist = io::read_stakes_csv(tl.stakes);
      const auto ballots = io::read_ballots_json(tl.ballots);
      std::size_t m = tl.proposals;
      if (m == 0) {
        if (ballots.empty()) {
          err << "error: --proposals is required when the ballot file is empty\n";
          return kExitUsage;
        }
        m = ballots.front().allocations.size();
      }
      const ValidationOptions vopts{tl.tol, tl.allow_undervote};
      const TallyResult result = tally(scheme, dist, ballots, m, vopts);
      Sink sink(out, output);
      io::write_json(sink.stream(), io::to_json(scheme, result));
    } else if (metrics_cmd->parsed()) {
      if (mt.thresholds.empty()) mt.thresholds = {0.51};
      const StakeDistribution dist = io::read_stakes_csv(mt.stakes);
      const DecentralizationReport rep = report(dist, mt.gamma, mt.thresholds);
      Sink sink(out, output);
      io::write_json(sink.stream(), io::to_json(rep));
    } else if (lorenz_cmd->parsed()) {
      const StakeDistribution dist = io::read_stakes_csv(lz.stakes);
      const auto points = lorenz_points(gamma_credits(dist, lz.gamma));
      Sink sink(out, output);
      if (lz.format == "csv") {
        io::write_lorenz_csv(sink.stream(), points);
      } else {
        Json arr = Json::array();
        for (const auto& p : points) {
          arr.push_back({{"i", p.index}, {"cumulative_share", p.cumulative_share}});
        }
        io::write_json(sink.stream(), arr);
      }
    } else if (gamma_cmd->parsed()) {
      const StakeDistribution dist = io::read_stakes_csv(gs.stakes);
      const GammaSearchResult result = gamma_search(dist, gs.k, gs.alpha, gs.opts);
      const StakeDistribution transformed = apply_gamma(dist, result.gamma);
      if (!gs.transformed.empty()) {
        std::ofstream f(gs.transformed);
        if (!f) throw Error(ErrorCode::IoError, "cannot write '" + gs.transformed + "'");
        io::write_stakes_csv(f, transformed);
      }
      Sink sink(out, output);
      if (gs.format == "csv") {
        io::write_stakes_csv(sink.stream(), transformed);
      } else {
        Json j = {{"result", io::to_json(result)}, {"transformed", io::to_json(transformed)}};
        if (gs.verify && result.gamma < 1.0) {
          j["properties"] = io::to_json(verify_transform_properties(dist, result.gamma, gs.alpha));
        }
        io::write_json(sink.stream(), j);
      }
      if (!result.converged) {
        write_error(err, Error(ErrorCode::NoConvergence,
                               "gamma search stopped after " + std::to_string(result.iterations) +
                                   " iterations without meeting the tolerance"));
        return kExitDomain;
      }
    } else if (optimize_cmd->parsed()) {
      const UtilityScheme scheme = parse_utility_scheme(op.scheme);
      const UtilityProblem problem = io::problem_from_json(io::read_json(op.problem), scheme);
      const AllocationSolution sol = maximize(problem);
      Json j = io::to_json(sol, scheme);
      j["kkt_ok"] = sol.degenerate || sol.kkt_residual <= op.tol;
      if (op.oracle) {
        const AllocationSolution oracle = brute_force_oracle(problem, op.resolution);
        j["oracle"] = io::to_json(oracle, scheme);
        j["oracle_agrees"] = sol.utility >= oracle.utility - 1e-6 * (1.0 + std::fabs(oracle.utility));
      }
      Sink sink(out, output);
      io::write_json(sink.stream(), j);
    } else if (collusion_cmd->parsed()) {
      const Json sc = io::read_json(at.scenario);
      const std::vector<double> stakes = numbers_from(sc, "stakes");
      const auto m = static_cast<std::size_t>(number_from(sc, "proposals"));
      const AttackReport rep =
          collusion_gain(stakes, m, plan_from(sc, "honest"), plan_from(sc, "colluding"));
      Sink sink(out, output);
      io::write_json(sink.stream(), io::to_json(rep));
    } else if (sybil_cmd->parsed()) {
      std::string scheme_text = at.scheme;
      double stake = at.stake;
      long long k = at.k;
      if (!at.scenario.empty()) {
        const Json sc = io::read_json(at.scenario);
        if (sc.contains("scheme") && sc.at("scheme").is_string()) {
          scheme_text = sc.at("scheme").get<std::string>();
        }
        stake = number_from(sc, "stake");
        k = static_cast<long long>(number_from(sc, "k"));
      } else if (sybil_cmd->count("--stake") == 0 || sybil_cmd->count("--k") == 0) {
        err << "error: sybil needs --scenario or both --stake and --k\n";
        return kExitUsage;
      }
      const AttackReport rep = sybil_report(parse_scheme(scheme_text), stake, k);
      Sink sink(out, output);
      io::write_json(sink.stream(), io::to_json(rep));
    } else if (last_cmd->parsed()) {
      const Json sc = io::read_json(at.scenario);
      LastVoterScenario scenario;
      scenario.scheme = parse_utility_scheme(sc.value("scheme", std::string("qv2")));
      std::vector<StakeEntry> prior;
      if (sc.contains("prior_stakes")) {
        for (const auto& e : sc.at("prior_stakes")) {
          prior.push_back({e.at("voter_id").get<std::string>(), e.at("stake").get<double>()});
        }
      }
      scenario.prior_stakes = canonicalize(std::move(prior));
      if (sc.contains("prior_ballots")) {
        scenario.prior_ballots = io::ballots_from_json(sc.at("prior_ballots"));
      }
      scenario.last_voter_stake = number_from(sc, "last_voter_stake");
      scenario.profits = numbers_from(sc, "profits");
      scenario.alignment = numbers_from(sc, "alignment", false);
      const AttackReport rep = last_voter_advantage(scenario);
      Sink sink(out, output);
      io::write_json(sink.stream(), io::to_json(rep));
    } else if (generate_cmd->parsed()) {
      DistributionSpec spec = gen.spec;
      spec.kind = gen.kind == "constant" ? DistributionKind::Constant
                  : gen.kind == "uniform" ? DistributionKind::UniformRange
                                          : DistributionKind::Pareto;
      spec.seed = 0;
      if (!gen.seed_text.empty()) {
        try {
          if (gen.seed_text.front() == '-' || gen.seed_text.front() == '+') {
            throw std::invalid_argument("seed");
          }
          std::size_t used = 0;
          spec.seed = std::stoull(gen.seed_text, &used);
          if (used != gen.seed_text.size()) throw std::invalid_argument("seed");
        } catch (const std::exception&) {
          err << "error: seed must be an unsigned 64-bit integer, got '" << gen.seed_text << "'\n";
          return kExitUsage;
        }
      }
      const StakeDistribution dist = generate(spec);
      Sink sink(out, output);
      if (gen.format == "csv") {
        io::write_stakes_csv(sink.stream(), dist);
      } else {
        io::write_json(sink.stream(), io::to_json(dist));
      }
    }
  } catch (const Error& e) {
    write_error(err, e);
    return kExitDomain;
  } catch (const nlohmann::json::exception& e) {
    write_error(err, Error(ErrorCode::ParseError, e.what()));
    return kExitDomain;
  }
  return kExitOk;
}

}  // namespace qvkit::cli
