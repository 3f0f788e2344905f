// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo experiment runner.  One experiment sweeps a single axis
// (SNR, array size, subcarrier count, bandwidth, or carrier frequency),
// runs the full uplink + downlink estimation pipeline per trial, and emits
// one CSV row per (sweep point, pipeline) plus a JSON summary.
//
// Common-random-numbers discipline: scenario and noise draws depend only on
// (master seed, trial index), never on the sweep point or pipeline, so
// curves across sweep points and between pipelines differ only through the
// quantity under study.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dualwide/estimator.hpp"
#include "dualwide/metrics.hpp"
#include "dualwide/scenario.hpp"
#include "dualwide/types.hpp"

namespace dualwide {

enum class SweepAxis { snr_db, antennas, subcarriers, bandwidth, carrier };

enum class PipelineSel { dual, narrowband, both };

const char* sweep_axis_name(SweepAxis axis);        // snr_db | M | N | f_s | f_c
SweepAxis sweep_axis_from_name(const std::string&);
PipelineSel pipeline_from_name(const std::string&); // dual | narrowband | both

struct ExperimentSpec {
    SystemConfig cfg;         // base system; the swept field is overridden per point
    ScenarioSpec scenario;
    EstimatorConfig est;
    SweepAxis axis = SweepAxis::snr_db;
    std::vector<double> values;
    double snr_db = 10.0;     // fixed SNR when the axis is not snr_db
    double tau_max_ts = 16.0; // scenario delay spread in symbol periods
    int trials = 200;
    PipelineSel pipeline = PipelineSel::both;
    bool perfect_csi_row = true;
    std::uint64_t seed = 1;
    std::string csv_path;     // optional; empty = caller handles output
    std::string json_path;

    void validate() const;
};

/** System + scenario + SNR for one sweep point. */
struct PointConfig {
    SystemConfig cfg;
    ScenarioSpec scenario;
    double snr_db = 0.0;
    double sigma_n2 = 1.0;
    double e_p = 1.0;
    double delay_budget_s = 0.0;  // soft-grouping headroom, (N-1) T_s
};

PointConfig resolve_point(const ExperimentSpec& spec, double value);

/**
 * All random noise one trial needs, drawn up front in a fixed order so the
 * dual-wideband and narrowband pipelines consume identical noise.
 */
struct TrialNoise {
    std::vector<CxMat> preamble;             // one M x N unit-variance matrix per user
    CxMat uplink;                            // M x N
    std::vector<std::vector<cxd>> downlink;  // per user, paths_max * N entries

    TrialNoise(std::uint64_t seed, int users, int m, int n, int paths_max);
};

/** Seeds for trial substreams; shared by the runner and the CLI. */
std::uint64_t trial_scenario_seed(std::uint64_t master, int trial);
std::uint64_t trial_noise_seed(std::uint64_t master, int trial);

/** Optional per-user outputs of a single trial, for inspection tools. */
struct TrialDetail {
    std::vector<UserEstimate> uplink;          // adjusted signatures + LS gains
    std::vector<double> offsets_s;             // uplink soft-grouping shifts
    std::vector<UserEstimate> downlink;        // downlink signatures + gains
    std::vector<double> dl_offsets_s;
    int l_m = 0;
};

/**
 * One full trial of the pipeline (preamble estimation, soft grouping,
 * uplink gain update, downlink training) against the scenario's truth.
 * Errors land in `acc`; estimation failures count a failed trial instead of
 * propagating.  `mode` selects the channel structure the estimator assumes;
 * the simulated truth is always the full dual-wideband model.
 */
void run_single_trial(const Scenario& sc, const PointConfig& pt, const EstimatorConfig& est_cfg,
                      ModelMode mode, const TrialNoise& noise, MetricsAccumulator& acc,
                      TrialDetail* detail = nullptr);

struct SweepRow {
    std::string sweep_var;
    double sweep_value = 0.0;
    std::string pipeline;  // dual_wideband | narrowband_baseline | perfect_csi
    double snr_db = 0.0;
    int m = 0;
    int n = 0;
    double f_s_hz = 0.0;
    double f_c_hz = 0.0;
    MetricsReport metrics;
    double aperture_delay_ts_val = 0.0;  // worst-case angle, in symbol periods
};

struct ExperimentResult {
    std::vector<SweepRow> rows;
};

/**
 * Run every sweep point; deterministic for a fixed spec.  Per-trial
 * estimation failures are counted in the row and never abort the run.
 */
ExperimentResult run_experiment(const ExperimentSpec& spec);

/** Fixed-schema CSV (column order is the stability contract). */
std::string to_csv(const ExperimentResult& result);
void write_csv(const ExperimentResult& result, const std::string& path);

/** Config echo + content hash + per-row metrics as JSON. */
std::string to_json_summary(const ExperimentSpec& spec, const ExperimentResult& result);
void write_json_summary(const ExperimentSpec& spec, const ExperimentResult& result,
                        const std::string& path);

}  // namespace dualwide
