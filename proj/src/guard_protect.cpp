/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/guard/protect.hpp>

#include <sodium.h>

#include <array>
#include <charconv>
#include <cstdlib>
#include <optional>
#include <vector>

namespace idfabric {

namespace {

using CipherKey = std::array<unsigned char, crypto_aead_xchacha20poly1305_ietf_KEYBYTES>;

const unsigned char* bytes(std::string_view s)
{
    return reinterpret_cast<const unsigned char*>(s.data());
}

std::string to_hex(const unsigned char* data, std::size_t len)
{
    std::string out(len * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), data, len);
    out.resize(len * 2);
    return out;
}

std::optional<std::vector<unsigned char>> from_hex(std::string_view hex)
{
    std::vector<unsigned char> out(hex.size() / 2 + 1);
    std::size_t                len = 0;
    const char*                end = nullptr;
    if (hex.size() % 2 != 0
        || sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(), nullptr, &len, &end) != 0
        || end != hex.data() + hex.size()) {
        return std::nullopt;
    }
    out.resize(len);
    return out;
}

// Separate subkeys for encryption and nonce synthesis.
void derive_keys(std::string_view secret, CipherKey& enc, CipherKey& mac)
{
    unsigned char master[crypto_kdf_KEYBYTES];
    crypto_generichash(master, sizeof(master), bytes(secret), secret.size(), nullptr, 0);
    crypto_kdf_derive_from_key(enc.data(), enc.size(), 1, "idfprot1", master);
    crypto_kdf_derive_from_key(mac.data(), mac.size(), 2, "idfprot1", master);
    sodium_memzero(master, sizeof(master));
}

} // namespace

void ensure_crypto_ready()
{
    static const bool ready = [] {
        if (sodium_init() < 0) {
            std::abort();
        }
        return true;
    }();
    (void)ready;
}

Result<ProtectedField> protect_field(std::string_view name, std::string_view plaintext, std::string_view key)
{
    ensure_crypto_ready();
    if (key.empty()) {
        return make_error(Errc::InvalidArgument, "empty data key");
    }

    CipherKey enc, mac;
    derive_keys(key, enc, mac);

    std::array<unsigned char, crypto_aead_xchacha20poly1305_ietf_NPUBBYTES> nonce;
    crypto_generichash_state state;
    crypto_generichash_init(&state, mac.data(), mac.size(), nonce.size());
    std::uint64_t nameLen = name.size();
    crypto_generichash_update(&state, reinterpret_cast<const unsigned char*>(&nameLen), sizeof(nameLen));
    crypto_generichash_update(&state, bytes(name), name.size());
    crypto_generichash_update(&state, bytes(plaintext), plaintext.size());
    crypto_generichash_final(&state, nonce.data(), nonce.size());

    std::vector<unsigned char> sealed(nonce.size() + plaintext.size() + crypto_aead_xchacha20poly1305_ietf_ABYTES);
    std::copy(nonce.begin(), nonce.end(), sealed.begin());
    unsigned long long sealedLen = 0;
    crypto_aead_xchacha20poly1305_ietf_encrypt(sealed.data() + nonce.size(), &sealedLen, bytes(plaintext),
        plaintext.size(), bytes(name), name.size(), nullptr, nonce.data(), enc.data());
    sealed.resize(nonce.size() + sealedLen);

    sodium_memzero(enc.data(), enc.size());
    sodium_memzero(mac.data(), mac.size());

    return ProtectedField {std::string {name}, to_hex(sealed.data(), sealed.size()), std::string {kProtectScheme}};
}

Result<std::string> unprotect_field(const ProtectedField& field, std::string_view key)
{
    ensure_crypto_ready();
    if (key.empty()) {
        return make_error(Errc::InvalidArgument, "empty data key");
    }
    if (field.scheme != kProtectScheme) {
        return make_error(Errc::AuthenticationFailure, "unknown scheme " + field.scheme);
    }

    auto sealed = from_hex(field.ciphertext);
    if (!sealed || sealed->size() < crypto_aead_xchacha20poly1305_ietf_NPUBBYTES
            + crypto_aead_xchacha20poly1305_ietf_ABYTES) {
        return make_error(Errc::AuthenticationFailure, "malformed ciphertext");
    }

    CipherKey enc, mac;
    derive_keys(key, enc, mac);

    const auto   nonceLen = crypto_aead_xchacha20poly1305_ietf_NPUBBYTES;
    std::string  plain(sealed->size() - nonceLen - crypto_aead_xchacha20poly1305_ietf_ABYTES, '\0');
    unsigned long long plainLen = 0;
    int rc = crypto_aead_xchacha20poly1305_ietf_decrypt(reinterpret_cast<unsigned char*>(plain.data()), &plainLen,
        nullptr, sealed->data() + nonceLen, sealed->size() - nonceLen, bytes(field.name), field.name.size(),
        sealed->data(), enc.data());

    sodium_memzero(enc.data(), enc.size());
    sodium_memzero(mac.data(), mac.size());

    if (rc != 0) {
        return make_error(Errc::AuthenticationFailure, "field " + field.name);
    }
    plain.resize(plainLen);
    return plain;
}

Result<std::string> hash_password(std::string_view person, std::string_view password, const PasswordHashParams& params)
{
    ensure_crypto_ready();

    unsigned char salt[crypto_pwhash_SALTBYTES];
    crypto_generichash(salt, sizeof(salt), bytes(person), person.size(), nullptr, 0);

    unsigned char out[32];
    if (crypto_pwhash(out, sizeof(out), password.data(), password.size(), salt, params.ops_limit, params.mem_limit,
            crypto_pwhash_ALG_ARGON2ID13)
        != 0) {
        return make_error(Errc::InvalidArgument, "password hashing failed");
    }
    return "argon2id$" + std::to_string(params.ops_limit) + "$" + std::to_string(params.mem_limit) + "$"
        + to_hex(salt, sizeof(salt)) + "$" + to_hex(out, sizeof(out));
}

bool verify_password(std::string_view encoded, std::string_view password)
{
    ensure_crypto_ready();

    std::array<std::string_view, 5> parts;
    std::size_t                     start = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        auto dollar = encoded.find('$', start);
        if ((dollar == std::string_view::npos) != (i == parts.size() - 1)) {
            return false;
        }
        parts[i] = encoded.substr(start, dollar == std::string_view::npos ? std::string_view::npos : dollar - start);
        start    = dollar + 1;
    }
    if (parts[0] != "argon2id") {
        return false;
    }

    unsigned long long ops = 0;
    std::size_t        mem = 0;
    if (std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), ops).ec != std::errc {}
        || std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), mem).ec != std::errc {}) {
        return false;
    }
    auto salt     = from_hex(parts[3]);
    auto expected = from_hex(parts[4]);
    if (!salt || salt->size() != crypto_pwhash_SALTBYTES || !expected || expected->empty()) {
        return false;
    }

    std::vector<unsigned char> actual(expected->size());
    if (crypto_pwhash(actual.data(), actual.size(), password.data(), password.size(), salt->data(), ops, mem,
            crypto_pwhash_ALG_ARGON2ID13)
        != 0) {
        return false;
    }
    return sodium_memcmp(actual.data(), expected->data(), actual.size()) == 0;
}

} // namespace idfabric
