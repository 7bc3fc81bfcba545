/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_SYSTEM_HPP_
#define IDFABRIC_SYSTEM_HPP_

#include <idfabric/admin.hpp>
#include <idfabric/audit.hpp>
#include <idfabric/authn.hpp>
#include <idfabric/engine.hpp>
#include <idfabric/matrix.hpp>
#include <idfabric/resources.hpp>
#include <idfabric/store.hpp>

#include <filesystem>
#include <optional>

namespace idfabric {

inline constexpr std::string_view kDefaultIssuer = "idfabric-ca";

struct SystemOptions {
    ProvisioningMatrix                   matrix = default_matrix();
    EngineConfig                         engine;
    AuthPolicy                           policy;
    std::uint64_t                        seed = 0;
    std::optional<std::filesystem::path> audit_path;
};

/// Every component of one deployment, wired together.
class System {
public:
    explicit System(const Clock& clock, SystemOptions options = {});

    System(const System&)            = delete;
    System& operator=(const System&) = delete;

    const Clock&     clock;
    SystemOptions    options;
    AuditLog         audit;
    IdentityStore    store;
    ManagedResources resources;
    StatusResponder  responder;
    SessionTable     sessions;
    LockoutTracker   lockouts;
    AdminService     admin;
    Engine           engine;
    Authenticator    authenticator;
};

} // namespace idfabric

#endif
