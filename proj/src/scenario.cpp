// SPDX-License-Identifier: Apache-2.0

#include "dualwide/scenario.hpp"

#include <algorithm>
#include <stdexcept>

#include "dualwide/rng.hpp"
#include "dualwide/sfw_model.hpp"

#include "json.hpp"

namespace dualwide {

void ScenarioSpec::validate() const {
    if (users < 1) throw std::invalid_argument("scenario: need at least one user");
    if (paths_min < 1 || paths_max < paths_min)
        throw std::invalid_argument("scenario: path count range is empty");
    if (tau_max_s < tau_min_s || tau_min_s < 0.0)
        throw std::invalid_argument("scenario: delay range is empty or negative");
}

int Scenario::max_paths() const {
    int best = 0;
    for (const auto& u : users) best = std::max(best, static_cast<int>(u.size()));
    return best;
}

int Scenario::total_paths() const {
    int total = 0;
    for (const auto& u : users) total += static_cast<int>(u.size());
    return total;
}

Scenario generate_scenario(std::uint64_t seed, const SystemConfig& cfg, const ScenarioSpec& spec) {
    cfg.validate();
    spec.validate();

    Scenario sc;
    sc.seed = seed;
    sc.cfg = cfg;
    sc.spec = spec;
    sc.users.resize(static_cast<std::size_t>(spec.users));

    Rng rng(seed);
    for (auto& user : sc.users) {
        const int lp = rng.uniform_int(spec.paths_min, spec.paths_max);
        const double gain_var = 1.0 / static_cast<double>(lp);
        user.reserve(static_cast<std::size_t>(lp));
        for (int l = 0; l < lp; ++l) {
            const double theta = rng.uniform(-kPi / 2.0, kPi / 2.0);
            const double tau = rng.uniform(spec.tau_min_s, spec.tau_max_s);
            const cxd g_ul = rng.cnormal(gain_var);
            const cxd g_dl = rng.cnormal(gain_var);
            user.push_back(make_path(cfg, theta, tau, g_ul, g_dl));
        }
    }
    return sc;
}

// ===========================================================================
// JSON round-trip
// ===========================================================================

namespace {

using nlohmann::json;

json complex_to_json(const cxd& v) { return json::array({v.real(), v.imag()}); }

cxd complex_from_json(const json& j) {
    return cxd(j.at(0).get<double>(), j.at(1).get<double>());
}

}  // namespace

std::string scenario_to_json_string(const Scenario& sc, int indent) {
    json j;
    j["seed"] = sc.seed;
    j["system"] = {
        {"M", sc.cfg.M},
        {"N", sc.cfg.N},
        {"d_over_lambda", sc.cfg.d_over_lambda},
        {"f_c_hz", sc.cfg.f_c_hz},
        {"f_cD_hz", sc.cfg.f_cd_hz},
        {"f_s_hz", sc.cfg.f_s_hz},
        {"n_cp", sc.cfg.n_cp},
        {"omega", sc.cfg.omega},
    };
    j["spec"] = {
        {"users", sc.spec.users},
        {"paths_min", sc.spec.paths_min},
        {"paths_max", sc.spec.paths_max},
        {"tau_min_s", sc.spec.tau_min_s},
        {"tau_max_s", sc.spec.tau_max_s},
    };
    json users = json::array();
    for (const auto& user : sc.users) {
        json paths = json::array();
        for (const PathParam& p : user) {
            paths.push_back({
                {"theta_rad", p.theta_rad},
                {"psi", p.psi},
                {"tau_s", p.tau_s},
                {"gain_ul", complex_to_json(p.gain_ul)},
                {"gain_dl", complex_to_json(p.gain_dl)},
            });
        }
        users.push_back(std::move(paths));
    }
    j["users"] = std::move(users);
    return j.dump(indent);
}

Scenario scenario_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    Scenario sc;
    sc.seed = j.at("seed").get<std::uint64_t>();

    const json& sys = j.at("system");
    sc.cfg.M = sys.at("M").get<int>();
    sc.cfg.N = sys.at("N").get<int>();
    sc.cfg.d_over_lambda = sys.at("d_over_lambda").get<double>();
    sc.cfg.f_c_hz = sys.at("f_c_hz").get<double>();
    sc.cfg.f_cd_hz = sys.at("f_cD_hz").get<double>();
    sc.cfg.f_s_hz = sys.at("f_s_hz").get<double>();
    sc.cfg.n_cp = sys.value("n_cp", 0);
    sc.cfg.omega = sys.value("omega", 10);
    sc.cfg.validate();

    const json& spec = j.at("spec");
    sc.spec.users = spec.at("users").get<int>();
    sc.spec.paths_min = spec.at("paths_min").get<int>();
    sc.spec.paths_max = spec.at("paths_max").get<int>();
    sc.spec.tau_min_s = spec.value("tau_min_s", 0.0);
    sc.spec.tau_max_s = spec.at("tau_max_s").get<double>();
    sc.spec.validate();

    for (const json& user : j.at("users")) {
        std::vector<PathParam> paths;
        paths.reserve(user.size());
        for (const json& p : user) {
            PathParam pp;
            pp.theta_rad = p.at("theta_rad").get<double>();
            pp.psi = p.at("psi").get<double>();
            pp.tau_s = p.at("tau_s").get<double>();
            pp.gain_ul = complex_from_json(p.at("gain_ul"));
            pp.gain_dl = complex_from_json(p.at("gain_dl"));
            paths.push_back(pp);
        }
        sc.users.push_back(std::move(paths));
    }
    if (static_cast<int>(sc.users.size()) != sc.spec.users)
        throw std::invalid_argument("scenario: user count does not match its spec");
    return sc;
}

}  // namespace dualwide
