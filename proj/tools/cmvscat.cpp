// Batch front end: one subcommand per job kind, plus the column schema.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "cmv/error.hpp"
#include "cmv/job.hpp"
#include "cmv/parallel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void error_record(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
}

struct Invocation {
  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::string> format;
  std::optional<std::string> truncation_path;
};

int execute(cmv::JobKind expected, const Invocation& inv, unsigned workers) {
  cmv::JobConfig config;
  try {
    config = cmv::load_config(inv.config_path);
    if (config.job != expected) {
      cmv::fail(cmv::ErrorKind::ConfigSchema, std::string("config job '") + cmv::to_string(config.job) +
                                                  "' does not match subcommand job '" + cmv::to_string(expected) + "'");
    }
    if (inv.output) config.output_path = *inv.output;
    if (inv.format) config.format = *inv.format == "json" ? cmv::OutputFormat::Json : cmv::OutputFormat::Csv;
  } catch (const cmv::Error& e) {
    error_record(std::string(cmv::to_string(e.kind())), e.detail());
    return kExitConfig;
  }

  try {
    if (inv.truncation_path) {
      std::ofstream dump(*inv.truncation_path);
      if (!dump) cmv::fail(cmv::ErrorKind::InvalidArgument, "cannot write " + *inv.truncation_path);
      cmv::write_truncation_csv(dump, cmv::truncate(config.coefficients, config.window));
    }
    const cmv::Report report = cmv::run(config, workers);

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!config.output_path.empty() && config.output_path != "-") {
      file.open(config.output_path);
      if (!file) cmv::fail(cmv::ErrorKind::InvalidArgument, "cannot write " + config.output_path);
      os = &file;
    }
    if (config.format == cmv::OutputFormat::Json) {
      cmv::write_json(*os, report, config);
    } else {
      cmv::write_csv(*os, report, config);
    }
    return report.ok ? kExitOk : kExitCheckFailed;
  } catch (const cmv::Error& e) {
    error_record(std::string(cmv::to_string(e.kind())), e.detail());
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering and reflectionlessness of full-line CMV operators"};
  app.set_version_flag("--version", cmv::library_version());
  app.require_subcommand(0, 1);

  unsigned workers = cmv::default_workers();
  bool schema_flag = false;
  app.add_option("--workers", workers, "worker threads (default: CMV_WORKERS or hardware concurrency)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--schema", schema_flag, "print the documented report columns and exit");

  Invocation inv;
  const std::pair<const char*, cmv::JobKind> jobs[] = {
      {"density", cmv::JobKind::Density},
      {"scatter", cmv::JobKind::ScatteringSweep},
      {"refl", cmv::JobKind::ReflectionlessReport},
      {"probe", cmv::JobKind::DynamicsProbe},
      {"oracle", cmv::JobKind::OracleCheck},
  };
  std::vector<std::pair<CLI::App*, cmv::JobKind>> subs;
  for (const auto& [name, kind] : jobs) {
    CLI::App* sub = app.add_subcommand(name, std::string("run a ") + cmv::to_string(kind) + " job");
    sub->add_option("config", inv.config_path, "JSON config file")->required();
    sub->add_option("--output", inv.output, "report path, '-' for stdout");
    sub->add_option("--format", inv.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--dump-truncation", inv.truncation_path, "write the window truncation as i,j,re,im CSV");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    subs.emplace_back(sub, kind);
  }
  CLI::App* schema = app.add_subcommand("schema", "print the documented report columns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    error_record("Usage", e.what());
    return kExitConfig;
  }

  if (schema_flag || schema->parsed()) {
    std::cout << cmv::report_schema().dump(2) << "\n";
    return kExitOk;
  }
  for (const auto& [sub, kind] : subs) {
    if (sub->parsed()) return execute(kind, inv, workers);
  }
  std::cout << app.help();
  return kExitConfig;
}
