/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/certificate.hpp>

#include <nlohmann/json.hpp>
#include <sodium.h>

namespace idfabric {

std::string canonical_bytes(const Certificate& cert)
{
    nlohmann::json doc {{"serial", cert.serial}, {"subject_uid", cert.subject_uid},
        {"subject_email", cert.subject_email}, {"issuer", cert.issuer}, {"not_before", format_date(cert.not_before)},
        {"not_after", format_date(cert.not_after)}, {"key_token", cert.key_token}};
    return doc.dump();
}

std::string key_token_for(std::string_view secret)
{
    unsigned char digest[crypto_generichash_BYTES];
    crypto_generichash(digest, sizeof(digest), reinterpret_cast<const unsigned char*>(secret.data()), secret.size(),
        nullptr, 0);
    char hex[sizeof(digest) * 2 + 1];
    sodium_bin2hex(hex, sizeof(hex), digest, sizeof(digest));
    return hex;
}

bool proof_matches(std::string_view key_token, std::string_view proof)
{
    auto expected = key_token_for(proof);
    return expected.size() == key_token.size()
        && sodium_memcmp(expected.data(), key_token.data(), expected.size()) == 0;
}

} // namespace idfabric
