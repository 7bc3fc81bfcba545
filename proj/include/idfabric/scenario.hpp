/*
 * Copyright (C) 2026 The idfabric Authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#ifndef IDFABRIC_SCENARIO_HPP_
#define IDFABRIC_SCENARIO_HPP_

#include <idfabric/system.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace idfabric {

struct ScenarioResult {
    std::string                                     name;
    PersonId                                        subject;
    std::vector<std::string>                        trace;
    Identity                                        final_identity;
    std::map<ResourceId, std::optional<AccountState>> accounts;
    DriftReport                                     drift;
    // The scenario's own expectations about the final state.
    bool                                            expectations_met = false;
    std::string                                     expectation;
};

/// Names run_scenario accepts, in display order.
std::vector<std::string> scenario_names();

/// Runs a named trace against `system`, which should be empty. Events are
/// dated from the system clock.
Result<ScenarioResult> run_scenario(System& system, std::string_view name);

} // namespace idfabric

#endif
