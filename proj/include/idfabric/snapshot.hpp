/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_SNAPSHOT_HPP_
#define IDFABRIC_SNAPSHOT_HPP_

#include <idfabric/system.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace idfabric {

/// Serializes the whole system state as one JSON document with the keys
/// "identities", "resources", "groups", "sessions", "retry_queue" and
/// "revocations". Sensitive PII is written only as ProtectedField. Output is
/// deterministic for equal state.
Result<std::string> save_snapshot(const System& system, std::string_view data_key);

/// Loads the document into a freshly constructed `system`. Fails without
/// modifying anything if the document is malformed or a field does not
/// decrypt under `data_key`.
Status load_snapshot(System& system, std::string_view text, std::string_view data_key);

/// Writes via a temporary file and rename, mode 0600.
Status write_file_atomic(const std::filesystem::path& path, std::string_view content);
Result<std::string> read_file(const std::filesystem::path& path);

} // namespace idfabric

#endif
