#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace som::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kBackendFailure = 3,
  kInvariantViolation = 4,
  kRejectedArchive = 5,
};

struct CliInvocation {
  std::string subcommand;  // run | report | export-model | import-model | validate-config
  std::filesystem::path config;
  std::filesystem::path out;
  std::filesystem::path archive;  // import-model input
  std::string agent;              // export-model / import-model target
  std::optional<std::uint64_t> seed;
  std::string backend;
  std::optional<int> parallelism;
  std::optional<bool> freeze_eval;
  std::string ablation;  // empty, a preset name, or "all"
  bool include_graph = true;
  bool include_pools = true;
  std::string log_level = "warn";
};

/// Each command writes only below `out` and returns an ExitCode.
int cmd_run(const CliInvocation& inv);
int cmd_report(const CliInvocation& inv);
int cmd_export_model(const CliInvocation& inv);
int cmd_import_model(const CliInvocation& inv);
int cmd_validate_config(const CliInvocation& inv);

/// Parses arguments (without the program name) and dispatches.
int run_cli(const std::vector<std::string>& args);

}  // namespace som::cli
