#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmv/dynamics.hpp"
#include "cmv/scattering.hpp"

namespace cmv {

enum class JobKind { Density, ScatteringSweep, ReflectionlessReport, DynamicsProbe, OracleCheck };
enum class OutputFormat { Csv, Json };

const char* to_string(JobKind k) noexcept;
JobKind job_from_string(const std::string& s);

struct Tolerances {
  double unitarity = 1e-3;
  double offdiag = 1e-3;
  double window_doubling = 1e-6;
};

struct ProbeConfig {
  WavePacket packet;
  long horizon = 6000;
  long stride = 1;
};

/// A validated job description. Every field has a default except
/// coefficients and job.
struct JobConfig {
  CoefficientSequence coefficients = CoefficientSequence::free();
  nlohmann::json coefficients_json;
  Site decoupling_n = 0;
  Window window{-2048, 2048};
  std::size_t theta_count = 64;
  double theta_offset = 0.5;
  RadialSchedule radial;
  Tolerances tolerances;
  double support_threshold = 1e-3;
  JobKind job = JobKind::ScatteringSweep;
  std::string output_path;  // empty or "-" means stdout
  OutputFormat format = OutputFormat::Csv;
  ProbeConfig probe;
  cplx oracle_z{0.4, 0.2};

  /// Fully resolved configuration, defaults filled in. Embedded in every report.
  nlohmann::json resolved() const;
  ScatteringOptions scattering_options() const;
};

/// Throws Error(ConfigSchema) for unknown keys, wrong types or missing required
/// fields; Error(InvalidArgument) from coefficient validation is passed through.
JobConfig parse_config(const nlohmann::json& j);
JobConfig load_config(const std::string& path);

struct Report {
  JobKind job = JobKind::ScatteringSweep;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
  /// Per-sample failures that were recorded instead of aborting the job.
  std::vector<nlohmann::json> sample_errors;
  nlohmann::json summary = nlohmann::json::object();
  /// False when the job's own pass criterion failed (oracle-check).
  bool ok = true;
};

Report run(const JobConfig& config, unsigned workers);

/// Column documentation for every job, as printed by `cmvscat schema`.
nlohmann::json report_schema();
std::vector<std::string> report_columns(JobKind job);

void write_csv(std::ostream& os, const Report& report, const JobConfig& config);
void write_json(std::ostream& os, const Report& report, const JobConfig& config);

/// Optional debug dump of the truncation as (i, j, re, im) rows.
void write_truncation_csv(std::ostream& os, const BandedUnitary& u);

std::string library_version();

}  // namespace cmv
