#include "qvkit/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qvkit/error.hpp"

namespace qvkit::io {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Splits one CSV record; fields may be double-quoted with "" as an escape.
std::vector<std::string> split_record(const std::string& line, std::size_t line_no,
                                      const std::string& source) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) +
                                           ": unterminated quoted field",
                {}, line_no);
  }
  fields.push_back(was_quoted ? cur : trim(cur));
  return fields;
}

double parse_real(const std::string& text, std::size_t line_no, const std::string& source) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::ParseError,
                source + ":" + std::to_string(line_no) + ": cannot parse stake '" + text + "'",
                {}, line_no);
  }
  return value;
}

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_string(std::ostream& out, const std::string& s) {
  // Reuse the library's escaping for strings.
  out << nlohmann::json(s).dump();
}

void write_value(std::ostream& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
  const std::string close(static_cast<std::size_t>(depth) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out << "{}";
        return;
      }
      out << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out << ",\n";
        first = false;
        out << pad;
        write_string(out, it.key());
        out << ": ";
        write_value(out, it.value(), depth + 1);
      }
      out << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out << "[]";
        return;
      }
      out << "[\n";
      bool first = true;
      for (const auto& el : j) {
        if (!first) out << ",\n";
        first = false;
        out << pad;
        write_value(out, el, depth + 1);
      }
      out << "\n" << close << "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        out << format_double(v);
      } else {
        out << "null";
      }
      return;
    }
    default:
      out << j.dump();
  }
}

Json doubles(const std::vector<double>& xs) {
  Json arr = Json::array();
  for (double x : xs) arr.push_back(x);
  return arr;
}

std::vector<double> real_array(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw Error(ErrorCode::ParseError, std::string("missing array field '") + key + "'", key);
  }
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) {
      throw Error(ErrorCode::ParseError, std::string("field '") + key + "' must hold numbers",
                  key);
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

StakeDistribution read_stakes_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<StakeEntry> raw;
  std::vector<std::size_t> lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, line_no, source);
    if (!header_seen) {
      if (fields.size() != 2 || fields[0] != "voter_id" || fields[1] != "stake") {
        throw Error(ErrorCode::ParseError,
                    source + ":" + std::to_string(line_no) + ": expected header 'voter_id,stake'",
                    {}, line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2) {
      throw Error(ErrorCode::ParseError,
                  source + ":" + std::to_string(line_no) + ": expected 2 fields, found " +
                      std::to_string(fields.size()),
                  {}, line_no);
    }
    if (fields[0].empty()) {
      throw Error(ErrorCode::ParseError,
                  source + ":" + std::to_string(line_no) + ": empty voter_id", {}, line_no);
    }
    raw.push_back({fields[0], parse_real(fields[1], line_no, source)});
    lines.push_back(line_no);
  }
  if (!header_seen) {
    throw Error(ErrorCode::ParseError, source + ": missing header 'voter_id,stake'", {}, 1);
  }
  try {
    return canonicalize(raw);
  } catch (const Error& e) {
    // Re-anchor the failure on the line of the offending entry. For
    // duplicates the second occurrence is reported.
    std::size_t at = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].voter_id == e.subject()) {
        at = lines[i];
        if (++hits == 2 || e.code() != ErrorCode::DuplicateVoter) break;
      }
    }
    throw Error(e.code(), source + ":" + std::to_string(at) + ": " + e.what(), e.subject(), at);
  }
}

StakeDistribution read_stakes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'", path.string());
  return read_stakes_csv(in, path.string());
}

void write_stakes_csv(std::ostream& out, const StakeDistribution& dist) {
  out << "voter_id,stake\n";
  for (const auto& e : dist.entries()) {
    const bool quote = e.voter_id.find_first_of(",\"") != std::string::npos;
    if (quote) {
      out << '"';
      for (char c : e.voter_id) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    } else {
      out << e.voter_id;
    }
    // 17 significant digits so the file reads back to the same doubles.
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", e.stake);
    out << ',' << buf << '\n';
  }
}

void write_lorenz_csv(std::ostream& out, const std::vector<LorenzPoint>& points) {
  out << "i,cumulative_share\n";
  for (const auto& p : points) out << p.index << ',' << format_double(p.cumulative_share) << '\n';
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, source + ": " + e.what(), {}, std::nullopt);
  }
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'", path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

std::vector<BallotProfile> ballots_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, "ballot file must hold a JSON array");
  std::vector<BallotProfile> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& el = j[i];
    const std::string where = "ballot " + std::to_string(i);
    if (!el.is_object() || !el.contains("voter_id") || !el.at("voter_id").is_string()) {
      throw Error(ErrorCode::ParseError, where + ": missing string field 'voter_id'", where);
    }
    BallotProfile b;
    b.voter_id = el.at("voter_id").get<std::string>();
    try {
      b.allocations = real_array(el, "allocations");
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, where + " (" + b.voter_id + "): " + e.what(), b.voter_id);
    }
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<BallotProfile> read_ballots_json(const std::filesystem::path& path) {
  return ballots_from_json(read_json(path));
}

UtilityProblem problem_from_json(const Json& j, UtilityScheme scheme) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "problem must be a JSON object");
  UtilityProblem p;
  p.scheme = scheme;
  p.profits = real_array(j, "profits");
  p.aligned_external = real_array(j, "aligned");
  p.total_external = real_array(j, "total");
  if (!j.contains("stake") || !j.at("stake").is_number()) {
    throw Error(ErrorCode::ParseError, "missing numeric field 'stake'", "stake");
  }
  p.own_stake = j.at("stake").get<double>();
  validate(p);
  return p;
}

void write_json(std::ostream& out, const Json& j) {
  write_value(out, j, 0);
  out << '\n';
}

std::string dump(const Json& j) {
  std::ostringstream os;
  write_json(os, j);
  return os.str();
}

Json to_json(const StakeDistribution& dist) {
  Json arr = Json::array();
  for (const auto& e : dist.entries()) arr.push_back({{"voter_id", e.voter_id}, {"stake", e.stake}});
  return arr;
}

Json to_json(const SchemeSpec& scheme, const TallyResult& tally) {
  Json proposals = Json::array();
  for (std::size_t l = 0; l < tally.score.size(); ++l) {
    proposals.push_back({{"index", l}, {"score", tally.score[l]}, {"vscore", tally.vscore[l]}});
  }
  Json voters = Json::array();
  for (const auto& [id, used] : tally.credit_used) {
    voters.push_back({{"voter_id", id}, {"credit_used", used}});
  }
  return {{"scheme", scheme.name()}, {"proposals", proposals}, {"voters", voters}};
}

Json to_json(const DecentralizationReport& r) {
  Json nak = Json::array();
  for (const auto& e : r.nakamoto) {
    nak.push_back({{"threshold", e.threshold}, {"classical", e.classical}, {"normalized", e.normalized}});
  }
  Json lorenz = Json::array();
  for (const auto& p : r.lorenz) {
    lorenz.push_back({{"i", p.index}, {"cumulative_share", p.cumulative_share}});
  }
  return {{"gamma", r.gamma}, {"rvr", doubles(r.rvr)}, {"eta", doubles(r.eta)},
          {"gini", r.gini},   {"nakamoto", nak},       {"lorenz", lorenz}};
}

Json to_json(const GammaSearchResult& r) {
  return {{"gamma", r.gamma},
          {"achieved_share", r.achieved_share},
          {"target", r.target},
          {"iterations", r.iterations},
          {"converged", r.converged}};
}

Json to_json(const TransformPropertyReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"id", c.id},
                      {"name", c.name},
                      {"passed", c.passed},
                      {"tie_degenerate", c.tie_degenerate},
                      {"detail", c.detail}});
  }
  return {{"gamma", r.gamma}, {"alpha", r.alpha}, {"all_passed", r.all_passed()}, {"checks", checks}};
}

Json to_json(const AllocationSolution& s, UtilityScheme scheme) {
  return {{"scheme", std::string(to_string(scheme))},
          {"allocation", doubles(s.allocation)},
          {"multiplier", s.multiplier},
          {"utility", s.utility},
          {"kkt_residual", s.kkt_residual},
          {"method", std::string(to_string(s.method))},
          {"degenerate", s.degenerate}};
}

Json to_json(const AttackReport& r) {
  Json narrative = Json::array();
  for (const auto& step : r.narrative) {
    narrative.push_back({{"step", step.step}, {"values", doubles(step.values)}, {"note", step.note}});
  }
  return {{"attack_kind", std::string(to_string(r.kind))},
          {"baseline", doubles(r.baseline)},
          {"attacked", doubles(r.attacked)},
          {"gain", r.gain},
          {"narrative", narrative}};
}

}  // namespace qvkit::io
