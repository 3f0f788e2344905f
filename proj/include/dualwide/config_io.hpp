// SPDX-License-Identifier: Apache-2.0
//
// Minimal INI-style config reader for experiment definitions:
//   [section] headers, key = value lines, full-line # or ; comments,
//   comma-separated numeric lists.  Keys before any header belong to
//   [system].  Unknown sections or keys are rejected so typos fail fast.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dualwide/experiment.hpp"
#include "dualwide/types.hpp"

namespace dualwide {

struct ConfigFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const;
    double get_num(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    std::vector<double> get_list(const std::string& section, const std::string& key) const;
};

/** [system] block only. */
SystemConfig system_config_from(const ConfigFile& cf);

/** Full experiment definition from [system]/[scenario]/[estimator]/[experiment]. */
ExperimentSpec experiment_spec_from(const ConfigFile& cf);

/** 64-bit FNV-1a content hash. */
std::uint64_t fnv1a64(const std::string& text);

}  // namespace dualwide
