#pragma once

// Config ingestion, job orchestration, CSV/JSON output and the claim ledger
// behind the splitlab command-line tool.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "splitlab/jacobi.hpp"
#include "splitlab/metric.hpp"

namespace splitlab {

using ConfigValue = std::variant<double, std::int64_t, std::string, std::vector<double>>;

/// Validated job description. Every schema key with a default is present after
/// loading; optional keys without a default (file paths, lambda1, ...) only when given.
struct JobConfig {
  std::string job;
  std::map<std::string, ConfigValue> values;
  std::filesystem::path base_dir;  // relative file paths resolve against this

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double num(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& str(const std::string& key) const;
  const std::vector<double>& list(const std::string& key) const;
  std::filesystem::path path(const std::string& key) const;

  MetricSpec metric() const;
  SamplingBox box() const;
  ChartPoint start_point() const;
  /// (vx, vy, vt) rescaled to unit speed at start_point().
  Vec3 start_velocity(const MetricSpec& spec) const;
};

/// Subcommand names accepted by run_subcommand.
const std::vector<std::string>& subcommands();

/// Parses "key: value" lines ('#' comments) or a JSON object with the same keys.
/// Throws ValidationError naming the key for unknown keys and out-of-range values.
JobConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
JobConfig load_config(const std::filesystem::path& path);

/// JSON echo of the full validated config; parse_config(config_echo(c)) == c.
std::string config_echo(const JobConfig& cfg);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct ClaimRecord {
  std::string claim_id;
  std::optional<double> paper_value;
  double computed = 0.0;
  double tolerance = 0.0;
  std::string status;  // MATCH, MISMATCH or REPORT_ONLY
};

/// MATCH iff |computed - paper| <= tolerance; REPORT_ONLY when forced or when
/// there is no paper value.
ClaimRecord make_claim(std::string id, std::optional<double> paper, double computed, double tolerance,
                       bool report_only = false);

/// Evaluates every registered claim.
std::vector<ClaimRecord> build_ledger();
Table claims_table(const std::vector<ClaimRecord>& claims);

/// Runs the job described by cfg; pure function of the config.
std::vector<Table> run_job(const JobConfig& cfg);

/// Writes name.csv for every table (header row, LF endings).
void write_tables(const std::vector<Table>& tables, const std::filesystem::path& out_dir);

/// manifest.json: subcommand, config echo, seed, versions, wall time, output files.
void write_manifest(const JobConfig& cfg, const std::vector<Table>& tables, double wall_seconds,
                    const std::filesystem::path& out_dir);

/// Entry point of the command-line tool. Returns 0 on success, 2 on validation
/// errors, 3 on numerical failures.
int run_subcommand(const std::vector<std::string>& args);

}  // namespace splitlab
