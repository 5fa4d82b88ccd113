#pragma once

#include <string>

#include "rim/config.hpp"

namespace rim {

/// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;

/// Each command writes its artifacts under cfg.output_dir (created if
/// missing), embeds the config echo in every file, and returns an exit code.
/// Errors other than the reported gap case propagate as exceptions.
int cmd_noise(const RunConfig& cfg);
int cmd_gap(const RunConfig& cfg);
int cmd_manifold(const RunConfig& cfg);
/// `result_path` may name a manifold.json from cmd_manifold; empty recomputes.
int cmd_verify(const RunConfig& cfg, const std::string& result_path);
int cmd_conjugacy(const RunConfig& cfg);

/// Maps an in-flight exception to an exit code.
int exit_code_for(const std::exception& e);

}  // namespace rim
