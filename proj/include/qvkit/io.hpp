#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "qvkit/attacks.hpp"
#include "qvkit/metrics.hpp"
#include "qvkit/schemes.hpp"
#include "qvkit/stake.hpp"
#include "qvkit/transform.hpp"
#include "qvkit/utility.hpp"

namespace qvkit::io {

using Json = nlohmann::ordered_json;

// CSV with header `voter_id,stake`. Errors carry the 1-based line number.
StakeDistribution read_stakes_csv(std::istream& in, const std::string& source = "<stream>");
StakeDistribution read_stakes_csv(const std::filesystem::path& path);
void write_stakes_csv(std::ostream& out, const StakeDistribution& dist);

void write_lorenz_csv(std::ostream& out, const std::vector<LorenzPoint>& points);

Json read_json(const std::filesystem::path& path);
Json parse_json(const std::string& text, const std::string& source = "<string>");

// JSON array of {voter_id, allocations: [...]}.
std::vector<BallotProfile> ballots_from_json(const Json& j);
std::vector<BallotProfile> read_ballots_json(const std::filesystem::path& path);

// {profits, aligned, total, stake}; the scheme is supplied separately.
UtilityProblem problem_from_json(const Json& j, UtilityScheme scheme);

// Deterministic serialization: keys in insertion order, floating point at
// 12 significant digits (printf %.12g), two-space indent.
void write_json(std::ostream& out, const Json& j);
std::string dump(const Json& j);

Json to_json(const StakeDistribution& dist);
Json to_json(const SchemeSpec& scheme, const TallyResult& tally);
Json to_json(const DecentralizationReport& report);
Json to_json(const GammaSearchResult& result);
Json to_json(const TransformPropertyReport& report);
Json to_json(const AllocationSolution& solution, UtilityScheme scheme);
Json to_json(const AttackReport& report);

}  // namespace qvkit::io
