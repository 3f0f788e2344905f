// SPDX-License-Identifier: Apache-2.0

#include "dualwide/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dualwide {

namespace {

std::string trim(const std::string& s) {
    const std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& section, const std::string& key, const std::string& raw) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (trim(raw.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: [" + section + "] " + key + " is not a number: " + raw);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile cf;
    std::istringstream in(text);
    std::string line;
    std::string section = "system";
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("config: unterminated section header at line " +
                                            std::to_string(lineno));
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty())
                throw std::invalid_argument("config: empty section name at line " +
                                            std::to_string(lineno));
            cf.sections[section];  // allow empty sections
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key at line " + std::to_string(lineno));
        cf.sections[section][key] = value;
    }
    return cf;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse(buf.str());
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string ConfigFile::get_str(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    const auto s = sections.find(section);
    if (s == sections.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double ConfigFile::get_num(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    return parse_number(section, key, get_str(section, key, ""));
}

int ConfigFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    const double v = parse_number(section, key, get_str(section, key, ""));
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw std::invalid_argument("config: [" + section + "] " + key + " must be an integer");
    return i;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key, "");
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw std::invalid_argument("config: [" + section + "] " + key + " must be a boolean");
}

std::uint64_t ConfigFile::get_u64(const std::string& section, const std::string& key,
                                  std::uint64_t fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_str(section, key, "");
    try {
        std::size_t used = 0;
        const unsigned long long u = std::stoull(v, &used);
        if (trim(v.substr(used)).empty()) return static_cast<std::uint64_t>(u);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: [" + section + "] " + key +
                                " is not an unsigned integer: " + v);
}

std::vector<double> ConfigFile::get_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    if (!has(section, key)) return out;
    const std::string raw = get_str(section, key, "");
    std::istringstream in(raw);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (t.empty())
            throw std::invalid_argument("config: [" + section + "] " + key +
                                        " has an empty list entry");
        out.push_back(parse_number(section, key, t));
    }
    return out;
}

// ===========================================================================
// Typed views
// ===========================================================================

namespace {

void reject_unknown(const ConfigFile& cf, const std::string& section,
                    const std::set<std::string>& known) {
    const auto s = cf.sections.find(section);
    if (s == cf.sections.end()) return;
    for (const auto& kv : s->second)
        if (known.count(kv.first) == 0)
            throw std::invalid_argument("config: unknown key [" + section + "] " + kv.first);
}

}  // namespace

SystemConfig system_config_from(const ConfigFile& cf) {
    reject_unknown(cf, "system",
                   {"M", "N", "d_over_lambda", "f_c_hz", "f_cD_hz", "f_s_hz", "omega", "n_cp"});
    SystemConfig cfg;
    cfg.M = cf.get_int("system", "M", cfg.M);
    cfg.N = cf.get_int("system", "N", cfg.N);
    cfg.d_over_lambda = cf.get_num("system", "d_over_lambda", cfg.d_over_lambda);
    cfg.f_c_hz = cf.get_num("system", "f_c_hz", cfg.f_c_hz);
    cfg.f_cd_hz = cf.get_num("system", "f_cD_hz", cfg.f_c_hz);
    cfg.f_s_hz = cf.get_num("system", "f_s_hz", cfg.f_s_hz);
    cfg.omega = cf.get_int("system", "omega", cfg.omega);
    cfg.n_cp = cf.get_int("system", "n_cp", cfg.n_cp);
    cfg.validate();
    return cfg;
}

ExperimentSpec experiment_spec_from(const ConfigFile& cf) {
    for (const auto& s : cf.sections)
        if (s.first != "system" && s.first != "scenario" && s.first != "estimator" &&
            s.first != "experiment")
            throw std::invalid_argument("config: unknown section [" + s.first + "]");
    reject_unknown(cf, "scenario", {"users", "paths_min", "paths_max", "tau_max_ts"});
    reject_unknown(cf, "estimator", {"mode", "kappa", "search_r", "refine_depth", "omega"});
    reject_unknown(cf, "experiment",
                   {"sweep", "values", "snr_db", "trials", "pipeline", "seed", "out", "json_out",
                    "perfect_csi_row"});

    ExperimentSpec spec;
    spec.cfg = system_config_from(cf);

    spec.scenario.users = cf.get_int("scenario", "users", spec.scenario.users);
    spec.scenario.paths_min = cf.get_int("scenario", "paths_min", spec.scenario.paths_min);
    spec.scenario.paths_max = cf.get_int("scenario", "paths_max", spec.scenario.paths_max);
    spec.tau_max_ts = cf.get_num("scenario", "tau_max_ts", spec.tau_max_ts);

    const std::string mode = cf.get_str("estimator", "mode", "threshold");
    if (mode == "threshold") {
        spec.est.mode = DetectMode::threshold;
    } else if (mode == "known_L") {
        spec.est.mode = DetectMode::known_count;
    } else {
        throw std::invalid_argument("config: [estimator] mode must be threshold or known_L");
    }
    spec.est.kappa = cf.get_num("estimator", "kappa", spec.est.kappa);
    spec.est.search.grid_points = cf.get_int("estimator", "search_r", spec.est.search.grid_points);
    spec.est.search.refine_factor =
        cf.get_int("estimator", "refine_depth", spec.est.search.refine_factor);
    spec.cfg.omega = cf.get_int("estimator", "omega", spec.cfg.omega);

    spec.axis = sweep_axis_from_name(cf.get_str("experiment", "sweep", "snr_db"));
    spec.values = cf.get_list("experiment", "values");
    if (spec.values.empty()) spec.values = {spec.snr_db};
    spec.snr_db = cf.get_num("experiment", "snr_db", spec.snr_db);
    spec.trials = cf.get_int("experiment", "trials", spec.trials);
    spec.pipeline = pipeline_from_name(cf.get_str("experiment", "pipeline", "both"));
    spec.seed = cf.get_u64("experiment", "seed", spec.seed);
    spec.csv_path = cf.get_str("experiment", "out", spec.csv_path);
    spec.json_path = cf.get_str("experiment", "json_out", spec.json_path);
    spec.perfect_csi_row =
        cf.get_bool("experiment", "perfect_csi_row", spec.perfect_csi_row);
    spec.validate();
    return spec;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace dualwide
