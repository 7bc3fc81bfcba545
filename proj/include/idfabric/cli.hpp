/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_CLI_HPP_
#define IDFABRIC_CLI_HPP_

#include <idfabric/authn.hpp>
#include <idfabric/engine.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace idfabric {

inline constexpr int kExitOk        = 0;
inline constexpr int kExitPartial   = 1;
inline constexpr int kExitUsage     = 2;
inline constexpr int kExitViolation = 3;

/// Exit code a failed operation maps to.
int exit_code_for(Errc code) noexcept;

struct CliConfig {
    std::filesystem::path                snapshot_path  = "idfabric-state.json";
    std::filesystem::path                audit_log_path = "idfabric-audit.jsonl";
    std::optional<std::filesystem::path> matrix_path;
    AuthPolicy                           policy;
    EngineConfig                         engine;
    // Key for sensitive fields at rest. Without one, a key file next to the
    // snapshot is used (and created on first run).
    std::optional<std::string> data_key;
    std::uint64_t              seed = 0;

    Status validate() const;
};

/// Applies a flat JSON object on top of `base`. Unknown keys are rejected.
Result<CliConfig> parse_config(std::string_view text, CliConfig base = {});

/// Runs one command. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace idfabric

#endif
