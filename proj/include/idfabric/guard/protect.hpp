/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_GUARD_PROTECT_HPP_
#define IDFABRIC_GUARD_PROTECT_HPP_

#include <idfabric/result.hpp>

#include <string>
#include <string_view>

namespace idfabric {

/// A sensitive value encrypted at rest. `ciphertext` is lowercase hex of
/// nonce || AEAD output; the field name is bound as associated data.
struct ProtectedField {
    std::string name;
    std::string ciphertext;
    std::string scheme;

    bool operator==(const ProtectedField&) const = default;
};

inline constexpr std::string_view kProtectScheme = "xchacha20poly1305-siv";

/// Deterministic authenticated encryption: the nonce is a keyed digest of
/// (name, plaintext), so equal inputs give equal ciphertexts and snapshots
/// stay reproducible. `key` is any non-empty secret; it is hashed to the
/// cipher key.
Result<ProtectedField> protect_field(std::string_view name, std::string_view plaintext, std::string_view key);

/// AuthenticationFailure on a wrong key, a renamed field, or tampering.
Result<std::string> unprotect_field(const ProtectedField& field, std::string_view key);

/// Argon2id password hash with a per-person salt, encoded as
/// "argon2id$<ops>$<mem>$<salt hex>$<hash hex>".
struct PasswordHashParams {
    unsigned long long ops_limit = 2;
    std::size_t        mem_limit = 8u << 20;
};

Result<std::string> hash_password(
    std::string_view person, std::string_view password, const PasswordHashParams& params = {});
bool verify_password(std::string_view encoded, std::string_view password);

/// Calls sodium_init once; safe from any thread.
void ensure_crypto_ready();

} // namespace idfabric

#endif
