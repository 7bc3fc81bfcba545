/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_CERTIFICATE_HPP_
#define IDFABRIC_CERTIFICATE_HPP_

#include <idfabric/clock.hpp>

#include <cstdint>
#include <string>

namespace idfabric {

/// Abstract certificate. keyToken stands in for the public key: it is the
/// hex digest of the holder's secret, and presenting that secret is the
/// possession proof.
struct Certificate {
    std::uint64_t serial = 0;
    std::string   subject_uid;
    std::string   subject_email;
    std::string   issuer;
    Date          not_before;
    Date          not_after;
    std::string   key_token;

    bool operator==(const Certificate&) const = default;
};

/// Deterministic byte encoding used for byte-equality comparison.
std::string canonical_bytes(const Certificate& cert);

/// keyToken for a holder secret.
std::string key_token_for(std::string_view secret);

/// True iff `proof` demonstrates possession of the secret behind `key_token`.
bool proof_matches(std::string_view key_token, std::string_view proof);

} // namespace idfabric

#endif
