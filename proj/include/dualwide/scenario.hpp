// SPDX-License-Identifier: Apache-2.0
//
// Multi-user scenario generation.  A scenario is the ground truth for one
// Monte-Carlo trial: per-user path sets with angles, delays, and independent
// uplink/downlink gains.  Generation is a pure function of (seed, config,
// spec) with a frozen draw order, so any trial can be reproduced from its
// seed alone.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualwide/types.hpp"

namespace dualwide {

struct ScenarioSpec {
    int users = 10;
    int paths_min = 1;
    int paths_max = 6;
    double tau_min_s = 0.0;  // delays drawn uniformly from [tau_min_s, tau_max_s]
    double tau_max_s = 0.0;

    void validate() const;
};

struct Scenario {
    std::uint64_t seed = 0;
    SystemConfig cfg;
    ScenarioSpec spec;
    std::vector<std::vector<PathParam>> users;  // raw path sets, no delay shifts

    int max_paths() const;
    int total_paths() const;
};

/**
 * Draw a scenario.  Per user: path count uniform on [paths_min, paths_max],
 * then per path an angle uniform on (-pi/2, pi/2), a delay uniform on
 * [tau_min_s, tau_max_s], and circular Gaussian gains of variance 1/L_p for
 * each link, in that order from a single generator.
 */
Scenario generate_scenario(std::uint64_t seed, const SystemConfig& cfg, const ScenarioSpec& spec);

/** JSON round-trip used by the command-line tool's artifact files. */
std::string scenario_to_json_string(const Scenario& sc, int indent = 2);
Scenario scenario_from_json_string(const std::string& text);

}  // namespace dualwide
