// SPDX-License-Identifier: Apache-2.0

#include "dualwide/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "dualwide/config_io.hpp"
#include "dualwide/rng.hpp"
#include "dualwide/sfw_model.hpp"

#include "json.hpp"

namespace dualwide {

namespace {

constexpr std::uint64_t kScenarioStream = 1000;
constexpr std::uint64_t kNoiseStream = 2000;

}  // namespace

TrialNoise::TrialNoise(std::uint64_t seed, int users, int m, int n, int paths_max) {
    Rng rng(seed);
    preamble.reserve(static_cast<std::size_t>(users));
    for (int p = 0; p < users; ++p) {
        CxMat w(m, n);
        for (cxd& v : w.data) v = rng.cnormal(1.0);
        preamble.push_back(std::move(w));
    }
    uplink = CxMat(m, n);
    for (cxd& v : uplink.data) v = rng.cnormal(1.0);
    downlink.resize(static_cast<std::size_t>(users));
    for (auto& buf : downlink) {
        buf.resize(static_cast<std::size_t>(paths_max) * static_cast<std::size_t>(n));
        for (cxd& v : buf) v = rng.cnormal(1.0);
    }
}

std::uint64_t trial_scenario_seed(std::uint64_t master, int trial) {
    return Rng::derive(master, kScenarioStream + static_cast<std::uint64_t>(trial));
}

std::uint64_t trial_noise_seed(std::uint64_t master, int trial) {
    return Rng::derive(master, kNoiseStream + static_cast<std::uint64_t>(trial));
}

/** Run the estimation pipeline for one trial and accumulate its errors. */
void run_single_trial(const Scenario& sc, const PointConfig& pt, const EstimatorConfig& est_cfg,
                      ModelMode mode, const TrialNoise& noise, MetricsAccumulator& acc,
                      TrialDetail* detail) {
    const SystemConfig& cfg = sc.cfg;
    const int users = static_cast<int>(sc.users.size());
    const double sigma = std::sqrt(pt.sigma_n2);
    const double root_ep = std::sqrt(pt.e_p);

    try {
        // Ground truth is always the full dual-wideband model; `mode` only
        // changes what the estimator assumes.
        std::vector<SfwChannel> h_raw(static_cast<std::size_t>(users));
        for (int p = 0; p < users; ++p)
            h_raw[static_cast<std::size_t>(p)] =
                assemble_channel(sc.users[static_cast<std::size_t>(p)], cfg, Link::uplink,
                                 ModelMode::dual_wideband);

        // Per-user preamble estimation.
        const std::vector<cxd> pilot(static_cast<std::size_t>(cfg.N), cxd(root_ep, 0.0));
        std::vector<UserEstimate> est(static_cast<std::size_t>(users));
        std::vector<AngularDelaySignature> sigs(static_cast<std::size_t>(users));
        for (int p = 0; p < users; ++p) {
            const CxMat& w = noise.preamble[static_cast<std::size_t>(p)];
            CxMat y(cfg.M, cfg.N);
            const CxMat& h = h_raw[static_cast<std::size_t>(p)].h;
            for (std::size_t i = 0; i < y.data.size(); ++i)
                y.data[i] = root_ep * h.data[i] + sigma * w.data[i];
            const SfwChannel h_hat = preamble_ls(y, pilot);

            EstimatorConfig per_user = est_cfg;
            if (per_user.mode == DetectMode::known_count)
                per_user.known_count =
                    static_cast<int>(sc.users[static_cast<std::size_t>(p)].size());
            est[static_cast<std::size_t>(p)] = extract_signatures(h_hat, cfg, per_user, mode);
            sigs[static_cast<std::size_t>(p)] = est[static_cast<std::size_t>(p)].signature;
        }

        // Delay scheduling on the estimated signatures, then the shared
        // uplink observation against the correspondingly shifted truth.
        const SoftGroupResult grouped = soft_grouping(sigs, cfg, pt.delay_budget_s);
        std::vector<SfwChannel> h_adj(static_cast<std::size_t>(users));
        std::vector<const SfwChannel*> h_adj_ptrs(static_cast<std::size_t>(users));
        for (int p = 0; p < users; ++p) {
            std::vector<PathParam> shifted = sc.users[static_cast<std::size_t>(p)];
            for (PathParam& path : shifted) path.tau_s += grouped.offsets_s[static_cast<std::size_t>(p)];
            h_adj[static_cast<std::size_t>(p)] =
                assemble_channel(shifted, cfg, Link::uplink, ModelMode::dual_wideband);
            h_adj_ptrs[static_cast<std::size_t>(p)] = &h_adj[static_cast<std::size_t>(p)];
        }
        const std::vector<double> powers(static_cast<std::size_t>(users), pt.e_p);
        const CxMat y_u = uplink_observation_with_noise(h_adj_ptrs, powers, noise.uplink, sigma);

        for (int p = 0; p < users; ++p) {
            const AngularDelaySignature& adj_sig = grouped.signatures[static_cast<std::size_t>(p)];
            const std::vector<cxd> gains = uplink_gain_update(y_u, adj_sig, pt.e_p, cfg, mode);
            SfwChannel rec = reconstruct_channel(adj_sig, gains, cfg, Link::uplink, mode);
            acc.add_channel_error(rec.h, h_adj[static_cast<std::size_t>(p)].h, Link::uplink);
            acc.add_parameter_errors(est[static_cast<std::size_t>(p)].signature.pairs, gains,
                                     sc.users[static_cast<std::size_t>(p)], Link::uplink, cfg);
            if (detail != nullptr) {
                UserEstimate ue;
                ue.signature = adj_sig;
                ue.gains = gains;
                ue.reconstructed = std::move(rec);
                detail->uplink.push_back(std::move(ue));
            }
        }
        if (detail != nullptr) detail->offsets_s = grouped.offsets_s;

        // Downlink: carrier-map the signatures, regroup, train, rebuild.
        const SoftGroupResult dl = downlink_signatures(sigs, cfg, pt.delay_budget_s);
        int l_m = 1;
        for (const auto& s : sigs) l_m = std::max(l_m, static_cast<int>(s.pairs.size()));
        const TrainingConfig training = TrainingConfig::make(pt.e_p, pt.sigma_n2, l_m);
        const BeamformerSet bf = downlink_beamformer(dl.signatures, cfg, l_m, mode);
        const SystemConfig dlv = cfg.downlink_view();

        for (int p = 0; p < users; ++p) {
            // True downlink channel under ideal timing advance: the user's
            // physical rays at the downlink carrier, shifted by the offset
            // assigned from the *estimated* signatures.
            std::vector<PathParam> dpaths = sc.users[static_cast<std::size_t>(p)];
            for (PathParam& path : dpaths) {
                path.psi = downlink_map_psi(path.psi, cfg);
                path.tau_s += dl.offsets_s[static_cast<std::size_t>(p)];
            }
            const SfwChannel h_d =
                assemble_channel(dpaths, dlv, Link::downlink, ModelMode::dual_wideband);
            const std::vector<cxd> y = downlink_train_and_receive_with_noise(
                h_d, bf, training, noise.downlink[static_cast<std::size_t>(p)], sigma);
            UserEstimate ue =
                downlink_gain_and_rebuild(y, training, dl.signatures[static_cast<std::size_t>(p)],
                                          cfg, mode);
            acc.add_channel_error(ue.reconstructed.h, h_d.h, Link::downlink);
            if (detail != nullptr) detail->downlink.push_back(std::move(ue));
        }
        if (detail != nullptr) {
            detail->dl_offsets_s = dl.offsets_s;
            detail->l_m = l_m;
        }
        acc.add_trial(false);
    } catch (const std::exception&) {
        acc.add_trial(true);
    }
}

namespace {

std::string pipeline_label(ModelMode mode) {
    return mode == ModelMode::dual_wideband ? "dual_wideband" : "narrowband_baseline";
}

SweepRow make_row(const ExperimentSpec& spec, const PointConfig& pt, double value,
                  const std::string& pipeline, const MetricsReport& metrics) {
    SweepRow row;
    row.sweep_var = sweep_axis_name(spec.axis);
    row.sweep_value = value;
    row.pipeline = pipeline;
    row.snr_db = pt.snr_db;
    row.m = pt.cfg.M;
    row.n = pt.cfg.N;
    row.f_s_hz = pt.cfg.f_s_hz;
    row.f_c_hz = pt.cfg.f_c_hz;
    row.metrics = metrics;
    row.aperture_delay_ts_val = aperture_delay_ts(pt.cfg, kPi / 2.0);
    return row;
}

}  // namespace

// ===========================================================================
// Spec plumbing
// ===========================================================================

const char* sweep_axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::snr_db: return "snr_db";
        case SweepAxis::antennas: return "M";
        case SweepAxis::subcarriers: return "N";
        case SweepAxis::bandwidth: return "f_s";
        case SweepAxis::carrier: return "f_c";
    }
    return "snr_db";
}

SweepAxis sweep_axis_from_name(const std::string& name) {
    if (name == "snr_db") return SweepAxis::snr_db;
    if (name == "M") return SweepAxis::antennas;
    if (name == "N") return SweepAxis::subcarriers;
    if (name == "f_s") return SweepAxis::bandwidth;
    if (name == "f_c") return SweepAxis::carrier;
    throw std::invalid_argument("unknown sweep axis: " + name);
}

PipelineSel pipeline_from_name(const std::string& name) {
    if (name == "dual") return PipelineSel::dual;
    if (name == "narrowband") return PipelineSel::narrowband;
    if (name == "both") return PipelineSel::both;
    throw std::invalid_argument("unknown pipeline selection: " + name);
}

void ExperimentSpec::validate() const {
    cfg.validate();
    scenario.validate();
    if (values.empty()) throw std::invalid_argument("experiment: sweep value list is empty");
    if (trials < 1) throw std::invalid_argument("experiment: need at least one trial");
    if (tau_max_ts < 0.0) throw std::invalid_argument("experiment: negative delay spread");
    for (double v : values) resolve_point(*this, v);  // throws on invalid points
}

PointConfig resolve_point(const ExperimentSpec& spec, double value) {
    PointConfig pt;
    pt.cfg = spec.cfg;
    pt.snr_db = spec.snr_db;
    switch (spec.axis) {
        case SweepAxis::snr_db:
            pt.snr_db = value;
            break;
        case SweepAxis::antennas:
            pt.cfg.M = static_cast<int>(value);
            break;
        case SweepAxis::subcarriers:
            pt.cfg.N = static_cast<int>(value);
            break;
        case SweepAxis::bandwidth:
            pt.cfg.f_s_hz = value;
            break;
        case SweepAxis::carrier: {
            // Scale both carriers so the uplink/downlink ratio (and the
            // physical antenna spacing in wavelengths at each carrier) keeps
            // its meaning; d_over_lambda refers to the uplink carrier and is
            // a fixed design choice of the array.
            const double ratio = value / spec.cfg.f_c_hz;
            pt.cfg.f_c_hz = value;
            pt.cfg.f_cd_hz = spec.cfg.f_cd_hz * ratio;
            break;
        }
    }
    pt.cfg.n_cp = 0;  // recomputed below once the delay budget is known
    pt.cfg.validate();
    const double ts = pt.cfg.symbol_period_s();
    pt.scenario = spec.scenario;
    pt.scenario.tau_max_s = spec.tau_max_ts * ts;
    pt.scenario.tau_min_s = std::min(pt.scenario.tau_min_s, pt.scenario.tau_max_s);
    pt.sigma_n2 = std::pow(10.0, -pt.snr_db / 10.0);
    pt.e_p = 1.0;
    pt.delay_budget_s = static_cast<double>(pt.cfg.N - 1) * ts;
    pt.cfg.n_cp = required_cp_length(pt.cfg, pt.delay_budget_s);
    return pt;
}

// ===========================================================================
// Runner
// ===========================================================================

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult result;

    const bool run_dual =
        spec.pipeline == PipelineSel::dual || spec.pipeline == PipelineSel::both;
    const bool run_nb =
        spec.pipeline == PipelineSel::narrowband || spec.pipeline == PipelineSel::both;

    for (double value : spec.values) {
        const PointConfig pt = resolve_point(spec, value);
        MetricsAccumulator acc_dual;
        MetricsAccumulator acc_nb;

        for (int trial = 0; trial < spec.trials; ++trial) {
            // Scenario and noise streams depend on the trial only, so every
            // sweep point sees the same random worlds.
            const Scenario sc =
                generate_scenario(trial_scenario_seed(spec.seed, trial), pt.cfg, pt.scenario);
            const TrialNoise noise(trial_noise_seed(spec.seed, trial), pt.scenario.users,
                                   pt.cfg.M, pt.cfg.N, pt.scenario.paths_max);

            if (run_dual)
                run_single_trial(sc, pt, spec.est, ModelMode::dual_wideband, noise, acc_dual);
            if (run_nb)
                run_single_trial(sc, pt, spec.est, ModelMode::narrowband, noise, acc_nb);
        }

        if (run_dual)
            result.rows.push_back(
                make_row(spec, pt, value, pipeline_label(ModelMode::dual_wideband),
                         acc_dual.report()));
        if (run_nb)
            result.rows.push_back(make_row(spec, pt, value,
                                           pipeline_label(ModelMode::narrowband), acc_nb.report()));
        if (spec.perfect_csi_row) {
            // Control row: the perfect estimate reproduces the truth, so all
            // error metrics are identically zero.
            MetricsReport perfect;
            perfect.trials = spec.trials;
            result.rows.push_back(make_row(spec, pt, value, "perfect_csi", perfect));
        }
    }
    return result;
}

// ===========================================================================
// Emission
// ===========================================================================

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

std::string to_csv(const ExperimentResult& result) {
    std::string out =
        "sweep_var,sweep_value,pipeline,snr_db,M,N,f_s_hz,f_c_hz,mse_theta,mse_tau,"
        "nmse_alpha,nmse_uplink,nmse_downlink,trials,failures,aperture_delay_ts\n";
    for (const SweepRow& r : result.rows) {
        out += r.sweep_var;
        out += ',' + format_double(r.sweep_value);
        out += ',' + r.pipeline;
        out += ',' + format_double(r.snr_db);
        out += ',' + std::to_string(r.m);
        out += ',' + std::to_string(r.n);
        out += ',' + format_double(r.f_s_hz);
        out += ',' + format_double(r.f_c_hz);
        out += ',' + format_double(r.metrics.mse_theta);
        out += ',' + format_double(r.metrics.mse_tau);
        out += ',' + format_double(r.metrics.nmse_alpha);
        out += ',' + format_double(r.metrics.nmse_uplink);
        out += ',' + format_double(r.metrics.nmse_downlink);
        out += ',' + std::to_string(r.metrics.trials);
        out += ',' + std::to_string(r.metrics.failures);
        out += ',' + format_double(r.aperture_delay_ts_val);
        out += '\n';
    }
    return out;
}

void write_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open CSV output: " + path);
    f << to_csv(result);
}

std::string to_json_summary(const ExperimentSpec& spec, const ExperimentResult& result) {
    using nlohmann::json;
    json cfg = {
        {"M", spec.cfg.M},
        {"N", spec.cfg.N},
        {"d_over_lambda", spec.cfg.d_over_lambda},
        {"f_c_hz", spec.cfg.f_c_hz},
        {"f_cD_hz", spec.cfg.f_cd_hz},
        {"f_s_hz", spec.cfg.f_s_hz},
        {"omega", spec.cfg.omega},
    };
    json scen = {
        {"users", spec.scenario.users},
        {"paths_min", spec.scenario.paths_min},
        {"paths_max", spec.scenario.paths_max},
        {"tau_max_ts", spec.tau_max_ts},
    };
    json est = {
        {"mode", spec.est.mode == DetectMode::threshold ? "threshold" : "known_L"},
        {"kappa", spec.est.kappa},
        {"search_r", spec.est.search.grid_points},
        {"refine_depth", spec.est.search.refine_factor},
        {"omega", spec.cfg.omega},
    };
    json exp = {
        {"sweep", sweep_axis_name(spec.axis)},
        {"values", spec.values},
        {"snr_db", spec.snr_db},
        {"trials", spec.trials},
        {"pipeline", spec.pipeline == PipelineSel::dual      ? "dual"
                     : spec.pipeline == PipelineSel::narrowband ? "narrowband"
                                                                : "both"},
        {"seed", spec.seed},
    };
    json j;
    j["system"] = cfg;
    j["scenario"] = scen;
    j["estimator"] = est;
    j["experiment"] = exp;

    // Content hash of the canonical config echo (FNV-1a, 64-bit).
    const std::uint64_t h = fnv1a64(j.dump());
    char hex[19];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    j["config_hash"] = hex;

    json rows = json::array();
    for (const SweepRow& r : result.rows) {
        rows.push_back({
            {"sweep_var", r.sweep_var},
            {"sweep_value", r.sweep_value},
            {"pipeline", r.pipeline},
            {"snr_db", r.snr_db},
            {"M", r.m},
            {"N", r.n},
            {"f_s_hz", r.f_s_hz},
            {"f_c_hz", r.f_c_hz},
            {"mse_theta", r.metrics.mse_theta},
            {"mse_tau", r.metrics.mse_tau},
            {"nmse_alpha", r.metrics.nmse_alpha},
            {"nmse_uplink", r.metrics.nmse_uplink},
            {"nmse_downlink", r.metrics.nmse_downlink},
            {"trials", r.metrics.trials},
            {"failures", r.metrics.failures},
            {"unmatched", r.metrics.unmatched},
            {"aperture_delay_ts", r.aperture_delay_ts_val},
        });
    }
    j["rows"] = std::move(rows);
    return j.dump(2);
}

void write_json_summary(const ExperimentSpec& spec, const ExperimentResult& result,
                        const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open JSON output: " + path);
    f << to_json_summary(spec, result);
}

}  // namespace dualwide
