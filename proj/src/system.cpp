/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include <idfabric/system.hpp>

namespace idfabric {

System::System(const Clock& clock_, SystemOptions options_)
    : clock(clock_)
    , options(std::move(options_))
    , audit(options.audit_path ? AuditLog {clock_, *options.audit_path} : AuditLog {clock_})
    , sessions(options.seed)
    , engine(store, options.matrix, resources, audit, clock_, options.engine)
    , authenticator(responder, resources.registry(), sessions, lockouts, audit, clock_, options.policy)
{
    responder.add_issuer(std::string {kDefaultIssuer});
}

} // namespace idfabric
