// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: scenario generation, single-shot uplink/downlink
// estimation, time-domain model validation, Monte-Carlo experiments, and a
// cyclic-prefix sizing table.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualwide/config_io.hpp"
#include "dualwide/experiment.hpp"
#include "dualwide/metrics.hpp"
#include "dualwide/scenario.hpp"
#include "dualwide/sfw_model.hpp"
#include "dualwide/waveform_oracle.hpp"

namespace {

using namespace dualwide;
using nlohmann::json;

/** Defaults sized so interactive runs finish in seconds. */
SystemConfig default_system() {
    SystemConfig cfg;
    cfg.M = 64;
    cfg.N = 64;
    return cfg;
}

struct ScenarioSource {
    std::string config_path;    // INI with [system]/[scenario]
    std::string scenario_path;  // JSON artifact from `generate`
    std::uint64_t seed = 1;
    double tau_max_ts = 16.0;

    Scenario make() const {
        if (!scenario_path.empty()) {
            std::ifstream f(scenario_path);
            if (!f) throw std::runtime_error("cannot open scenario file: " + scenario_path);
            std::ostringstream buf;
            buf << f.rdbuf();
            return scenario_from_json_string(buf.str());
        }
        SystemConfig cfg = default_system();
        ScenarioSpec spec;
        double tts = tau_max_ts;
        if (!config_path.empty()) {
            const ConfigFile cf = ConfigFile::load(config_path);
            cfg = system_config_from(cf);
            spec.users = cf.get_int("scenario", "users", spec.users);
            spec.paths_min = cf.get_int("scenario", "paths_min", spec.paths_min);
            spec.paths_max = cf.get_int("scenario", "paths_max", spec.paths_max);
            tts = cf.get_num("scenario", "tau_max_ts", tts);
        }
        spec.tau_max_s = tts * cfg.symbol_period_s();
        return generate_scenario(seed, cfg, spec);
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << text << '\n';
}

json metrics_to_json(const MetricsReport& r) {
    return {
        {"mse_theta", r.mse_theta},           {"mse_tau", r.mse_tau},
        {"nmse_alpha", r.nmse_alpha},         {"nmse_uplink", r.nmse_uplink},
        {"nmse_downlink", r.nmse_downlink},   {"trials", r.trials},
        {"failures", r.failures},             {"unmatched", r.unmatched},
    };
}

json estimates_to_json(const std::vector<UserEstimate>& users, const std::vector<double>& offsets) {
    json out = json::array();
    for (std::size_t p = 0; p < users.size(); ++p) {
        json paths = json::array();
        for (std::size_t l = 0; l < users[p].signature.pairs.size(); ++l) {
            const SignaturePoint& sp = users[p].signature.pairs[l];
            json e = {{"psi", sp.psi}, {"tau_s", sp.tau_s}};
            if (l < users[p].gains.size())
                e["gain"] = json::array({users[p].gains[l].real(), users[p].gains[l].imag()});
            paths.push_back(std::move(e));
        }
        json u = {{"paths", std::move(paths)}};
        if (p < offsets.size()) u["offset_s"] = offsets[p];
        out.push_back(std::move(u));
    }
    return out;
}

/** Shared single-trial driver for the estimate-* subcommands. */
json run_estimate(const Scenario& sc, double snr_db, PipelineSel sel, const EstimatorConfig& est) {
    PointConfig pt;
    pt.cfg = sc.cfg;
    pt.scenario = sc.spec;
    pt.snr_db = snr_db;
    pt.sigma_n2 = std::pow(10.0, -snr_db / 10.0);
    pt.e_p = 1.0;
    pt.delay_budget_s = static_cast<double>(sc.cfg.N - 1) * sc.cfg.symbol_period_s();

    const TrialNoise noise(trial_noise_seed(sc.seed, 0), static_cast<int>(sc.users.size()),
                           sc.cfg.M, sc.cfg.N, sc.spec.paths_max);

    json out;
    out["seed"] = sc.seed;
    out["snr_db"] = snr_db;
    const bool dual = sel == PipelineSel::dual || sel == PipelineSel::both;
    const bool nb = sel == PipelineSel::narrowband || sel == PipelineSel::both;
    for (int which = 0; which < 2; ++which) {
        const ModelMode mode = which == 0 ? ModelMode::dual_wideband : ModelMode::narrowband;
        if ((mode == ModelMode::dual_wideband && !dual) ||
            (mode == ModelMode::narrowband && !nb))
            continue;
        MetricsAccumulator acc;
        TrialDetail detail;
        run_single_trial(sc, pt, est, mode, noise, acc, &detail);
        json block;
        block["metrics"] = metrics_to_json(acc.report());
        block["uplink_users"] = estimates_to_json(detail.uplink, detail.offsets_s);
        block["downlink_users"] = estimates_to_json(detail.downlink, detail.dl_offsets_s);
        block["l_m"] = detail.l_m;
        out[mode == ModelMode::dual_wideband ? "dual_wideband" : "narrowband_baseline"] =
            std::move(block);
    }
    return out;
}

int cmd_validate_oracle(int m, int n, int oversample, int scenarios, std::uint64_t seed,
                        int paths_max, double tolerance, bool sweep) {
    SystemConfig cfg = default_system();
    cfg.M = m;
    cfg.N = n;

    ScenarioSpec spec;
    spec.users = 1;
    spec.paths_min = 1;
    spec.paths_max = paths_max;
    // Keep the earliest arrival after t = 0 and leave prefix headroom so the
    // comparison isolates model agreement from framing effects.
    spec.tau_min_s = 1.0 * cfg.symbol_period_s();
    spec.tau_max_s = 9.0 * cfg.symbol_period_s();

    std::vector<int> factors;
    if (sweep)
        factors = {4, 8, 16};
    else
        factors = {oversample};

    bool ok = true;
    std::cout << std::setw(6) << "O" << std::setw(14) << "mean_nmse" << std::setw(14)
              << "max_nmse" << '\n';
    for (int o : factors) {
        WaveformConfig wcfg;
        wcfg.oversample = o;
        wcfg.n_cp = required_cp_length(cfg, spec.tau_max_s) + 8;
        double mean = 0.0;
        double worst = 0.0;
        for (int s = 0; s < scenarios; ++s) {
            const Scenario sc = generate_scenario(Rng::derive(seed, 7000 + s), cfg, spec);
            const SfwChannel model =
                assemble_channel(sc.users[0], cfg, Link::uplink, ModelMode::dual_wideband);
            const SfwChannel meas = oracle_channel(sc.users[0], cfg, wcfg);
            double err = 0.0;
            for (std::size_t i = 0; i < model.h.data.size(); ++i)
                err += std::norm(meas.h.data[i] - model.h.data[i]);
            const double nmse = err / model.h.frobenius_norm_sq();
            mean += nmse;
            worst = std::max(worst, nmse);
        }
        mean /= static_cast<double>(scenarios);
        std::cout << std::setw(6) << o << std::setw(14) << std::scientific
                  << std::setprecision(3) << mean << std::setw(14) << worst
                  << std::defaultfloat << '\n';
        if (o == 16 && worst > tolerance) ok = false;
        if (!sweep && worst > tolerance) ok = false;
    }
    std::cout << (ok ? "oracle agreement OK" : "oracle agreement FAILED") << '\n';
    return ok ? 0 : 1;
}

void cmd_cp_table(double fs, double fc, double d_over_lambda, double tau_max_ts,
                  const std::vector<int>& m_list) {
    SystemConfig cfg;
    cfg.f_s_hz = fs;
    cfg.f_c_hz = fc;
    cfg.f_cd_hz = fc;
    cfg.d_over_lambda = d_over_lambda;
    cfg.N = 1;  // unused by the prefix rule
    std::cout << std::setw(8) << "M" << std::setw(18) << "aperture_ts" << std::setw(14)
              << "tau_max_ts" << std::setw(8) << "n_cp" << '\n';
    for (int m : m_list) {
        cfg.M = m;
        const double tau_max_s = tau_max_ts * cfg.symbol_period_s();
        std::cout << std::setw(8) << m << std::setw(18) << std::fixed << std::setprecision(3)
                  << aperture_delay_ts(cfg, kPi / 2.0) << std::setw(14) << tau_max_ts
                  << std::defaultfloat << std::setw(8) << required_cp_length(cfg, tau_max_s)
                  << '\n';
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-wideband massive MIMO channel estimation toolkit"};
    app.require_subcommand(1);

    // ----- generate ---------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "draw a multi-user scenario and emit it as JSON");
    ScenarioSource gen_src;
    std::string gen_out = "-";
    gen->add_option("--config", gen_src.config_path, "INI file with [system]/[scenario]");
    gen->add_option("--seed", gen_src.seed, "scenario seed");
    gen->add_option("--tau-max-ts", gen_src.tau_max_ts, "delay spread in symbol periods");
    gen->add_option("--out", gen_out, "output path ('-' = stdout)");

    // ----- estimate-uplink / estimate-downlink ------------------------------
    ScenarioSource est_src;
    double est_snr = 10.0;
    std::string est_pipeline = "dual";
    std::string est_out = "-";
    bool est_known = false;
    double est_kappa = 20.0;
    auto add_estimate_options = [&](CLI::App* sub) {
        sub->add_option("--scenario", est_src.scenario_path, "scenario JSON from `generate`");
        sub->add_option("--config", est_src.config_path, "INI file with [system]/[scenario]");
        sub->add_option("--seed", est_src.seed, "scenario seed when generating");
        sub->add_option("--snr", est_snr, "SNR in dB");
        sub->add_option("--pipeline", est_pipeline, "dual | narrowband | both");
        sub->add_flag("--known-count", est_known, "use true per-user path counts for detection");
        sub->add_option("--kappa", est_kappa, "detection threshold multiplier");
        sub->add_option("--out", est_out, "output path ('-' = stdout)");
    };
    auto* est_ul = app.add_subcommand("estimate-uplink",
                                      "single-trial uplink signature + gain estimation");
    add_estimate_options(est_ul);
    auto* est_dl = app.add_subcommand("estimate-downlink",
                                      "single-trial downlink training and reconstruction");
    add_estimate_options(est_dl);

    // ----- validate-oracle --------------------------------------------------
    auto* oracle = app.add_subcommand("validate-oracle",
                                      "compare the analytic model against the waveform oracle");
    int o_m = 64, o_n = 64, o_over = 16, o_scen = 20, o_paths = 6;
    std::uint64_t o_seed = 1;
    double o_tol = 1e-3;
    bool o_sweep = false;
    oracle->add_option("--m", o_m, "antenna count");
    oracle->add_option("--n", o_n, "subcarrier count");
    oracle->add_option("--oversample", o_over, "waveform oversampling factor");
    oracle->add_option("--scenarios", o_scen, "number of random path draws");
    oracle->add_option("--paths-max", o_paths, "maximum paths per draw");
    oracle->add_option("--seed", o_seed, "master seed");
    oracle->add_option("--tolerance", o_tol, "worst-case NMSE allowed at O=16");
    oracle->add_flag("--sweep", o_sweep, "report O = 4, 8, 16");

    // ----- experiment -------------------------------------------------------
    auto* exp = app.add_subcommand("experiment", "run a Monte-Carlo sweep from a config file");
    std::string exp_config;
    std::string exp_out, exp_pipeline;
    int exp_trials = 0;
    std::uint64_t exp_seed = 0;
    bool exp_seed_set = false, exp_trials_set = false;
    exp->add_option("config", exp_config, "experiment config file")->required();
    exp->add_option("--out", exp_out, "CSV output path (overrides the config)");
    exp->add_option("--pipeline", exp_pipeline, "dual | narrowband | both (overrides)");
    exp->add_option("--trials", exp_trials, "trials per sweep point (overrides)")
        ->each([&](const std::string&) { exp_trials_set = true; });
    exp->add_option("--seed", exp_seed, "master seed (overrides)")
        ->each([&](const std::string&) { exp_seed_set = true; });

    // ----- cp-table ---------------------------------------------------------
    auto* cpt = app.add_subcommand("cp-table", "cyclic-prefix lengths over an antenna-count grid");
    double cp_fs = 1e9, cp_fc = 60e9, cp_dl = 0.5, cp_tau = 0.0;
    std::vector<int> cp_m = {128, 256, 512, 1024};
    cpt->add_option("--fs", cp_fs, "sampled bandwidth in Hz");
    cpt->add_option("--fc", cp_fc, "carrier frequency in Hz");
    cpt->add_option("--d-over-lambda", cp_dl, "antenna spacing in carrier wavelengths");
    cpt->add_option("--tau-max-ts", cp_tau, "maximum path delay in symbol periods");
    cpt->add_option("--m-list", cp_m, "antenna counts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            const Scenario sc = gen_src.make();
            write_text(gen_out, scenario_to_json_string(sc));
            return 0;
        }
        if (est_ul->parsed() || est_dl->parsed()) {
            const Scenario sc = est_src.make();
            EstimatorConfig est;
            est.mode = est_known ? DetectMode::known_count : DetectMode::threshold;
            est.kappa = est_kappa;
            const json result =
                run_estimate(sc, est_snr, pipeline_from_name(est_pipeline), est);
            write_text(est_out, result.dump(2));
            return 0;
        }
        if (oracle->parsed())
            return cmd_validate_oracle(o_m, o_n, o_over, o_scen, o_seed, o_paths, o_tol, o_sweep);
        if (exp->parsed()) {
            ExperimentSpec spec = experiment_spec_from(ConfigFile::load(exp_config));
            if (exp_seed_set) spec.seed = exp_seed;
            if (exp_trials_set) spec.trials = exp_trials;
            if (!exp_pipeline.empty()) spec.pipeline = pipeline_from_name(exp_pipeline);
            if (!exp_out.empty()) spec.csv_path = exp_out;
            const ExperimentResult result = run_experiment(spec);
            if (spec.csv_path.empty() || spec.csv_path == "-")
                std::cout << to_csv(result);
            else
                write_csv(result, spec.csv_path);
            if (!spec.json_path.empty())
                write_json_summary(spec, result, spec.json_path);
            return 0;
        }
        if (cpt->parsed()) {
            cmd_cp_table(cp_fs, cp_fc, cp_dl, cp_tau, cp_m);
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
