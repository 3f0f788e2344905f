// SPDX-License-Identifier: Apache-2.0
//
// Channel estimation pipeline: preamble least squares, angular-delay path
// detection and signature refinement, multi-user soft grouping with delay
// guards, uplink gain update, and the beamformed downlink training round
// trip.  Every stage accepts a ModelMode so the spatial-narrowband baseline
// (squint matrix forced to all-ones) runs through identical code.

#pragma once

#include <utility>
#include <vector>

#include "dualwide/rng.hpp"
#include "dualwide/types.hpp"

namespace dualwide {

/** Detection strategy for path counting. */
enum class DetectMode {
    threshold,    // energy > kappa * median, connected components
    known_count,  // path count given; strongest non-adjacent local maxima
};

/** Two-stage signature search parameters. */
struct SearchConfig {
    int grid_points = 16;    // uniform candidates per axis over the +/-1-bin window
    int refine_factor = 10;  // final resolution: 1/refine_factor of a bin per axis
};

struct EstimatorConfig {
    DetectMode mode = DetectMode::threshold;
    double kappa = 20.0;  // threshold multiplier over the median bin energy
    int known_count = 0;  // per-user path count when mode == known_count
    SearchConfig search;
};

/** Downlink training parameters shared by all users. */
struct TrainingConfig {
    double e_p = 1.0;      // per-user uplink training power (linear)
    double sigma_n2 = 1.0; // noise variance per complex sample
    int l_m = 0;           // training blocks = max per-user path count
    CxMat s;               // l_m x l_m block matrix with S^H S = l_m I

    /** Build with S the unnormalized l_m-point DFT matrix. */
    static TrainingConfig make(double e_p, double sigma_n2, int l_m);
    void validate() const;
};

/** One detected energy cluster in the angular-delay grid. */
struct DetectedCluster {
    std::vector<std::pair<int, int>> bins;  // (row, col) members
    int peak_row = 0;
    int peak_col = 0;
    double peak_energy = 0.0;
};

/** Estimation output for one user. */
struct UserEstimate {
    AngularDelaySignature signature;
    std::vector<cxd> gains;
    SfwChannel reconstructed;
};

/**
 * Per-user downlink beamformers.  Each user's matrix P_p stacks
 * basis vectors of its downlink signature as columns (zero-padded to l_m
 * columns); B_p = P_p / (MN).  Only the sum of all B_p is stored densely;
 * per-user matrices are rebuilt on demand.
 */
struct BeamformerSet {
    int l_m = 0;
    ModelMode mode = ModelMode::dual_wideband;
    SystemConfig dl_cfg;                          // downlink-view config
    std::vector<AngularDelaySignature> signatures;  // downlink coordinates
    CxMat b_sum;                                  // MN x l_m, sum of B_p

    /** Materialize B_p = P_p/(MN) for one user (MN x l_m, zero-padded). */
    CxMat user_matrix(int p) const;
};

/** Result of soft grouping: adjusted signatures plus the per-user offsets. */
struct SoftGroupResult {
    std::vector<AngularDelaySignature> signatures;
    std::vector<double> offsets_s;
};

/** LS preamble estimate: H_hat[m][n] = y[m][n] / pilot[n]. */
SfwChannel preamble_ls(const CxMat& y_rx, const std::vector<cxd>& pilot);

/**
 * Find path clusters in the angular-delay energy grid.  Clusters are sorted
 * by peak energy, strongest first.  Throws std::runtime_error("no paths
 * detected") when nothing clears the threshold.
 */
std::vector<DetectedCluster> detect_paths(const AngularDelayGrid& g_hat,
                                          const EstimatorConfig& cfg);

/** Peak bin of a cluster mapped back to (psi in (-0.5, 0.5], tau in seconds). */
SignaturePoint coarse_signature(const DetectedCluster& cluster, const SystemConfig& cfg);

/**
 * Maximize the concentration objective over the +/-1-bin neighborhood of
 * the coarse estimate: uniform grid of `grid_points` per axis, then
 * coordinate-wise golden-section down to 1/refine_factor of a bin.  Ties
 * prefer the candidate closer to the coarse point.
 */
SignaturePoint refine_signature(const SfwChannel& h_hat, const SignaturePoint& coarse,
                                const SystemConfig& cfg, const SearchConfig& search,
                                ModelMode mode = ModelMode::dual_wideband);

/**
 * Full single-user signature extraction: detect clusters, refine each, and
 * read the per-path gain off the concentrated peak.  `reconstructed` in the
 * result is left empty; call reconstruct_channel once gains are final.
 */
UserEstimate extract_signatures(const SfwChannel& h_hat, const SystemConfig& cfg,
                                const EstimatorConfig& est,
                                ModelMode mode = ModelMode::dual_wideband);

/**
 * Greedy delay scheduling: users in index order; each user receives the
 * smallest offset from the ladder {0, Omega/(N eta), 2 Omega/(N eta), ...}
 * such that all pairwise signature distances are >= cfg.omega.  User 0 is
 * never shifted.  Throws std::runtime_error("soft grouping infeasible...")
 * when no offset keeps the maximum adjusted delay within `max_delay_s`.
 */
SoftGroupResult soft_grouping(const std::vector<AngularDelaySignature>& signatures,
                              const SystemConfig& cfg, double max_delay_s);

/** Y = sum_p sqrt(E_p) H_p + W, W entries i.i.d. CN(0, sigma_n2). */
CxMat uplink_observation(const std::vector<const SfwChannel*>& channels,
                         const std::vector<double>& e_p, double sigma_n2, Rng& rng);

/** Same with caller-supplied unit-variance noise, scaled by sigma. */
CxMat uplink_observation_with_noise(const std::vector<const SfwChannel*>& channels,
                                    const std::vector<double>& e_p, const CxMat& unit_noise,
                                    double sigma);

/** Per-path gain read-off from the shared observation: p^H vec(Y)/(MN sqrt(E_p)). */
std::vector<cxd> uplink_gain_update(const CxMat& y_u, const AngularDelaySignature& sig,
                                    double e_p, const SystemConfig& cfg,
                                    ModelMode mode = ModelMode::dual_wideband);

/**
 * Rebuild a channel from (signature, gains).  For Link::downlink the
 * signature must be in downlink coordinates and cfg is the uplink config
 * (the downlink view is taken internally).
 */
SfwChannel reconstruct_channel(const AngularDelaySignature& sig, const std::vector<cxd>& gains,
                               const SystemConfig& cfg, Link link,
                               ModelMode mode = ModelMode::dual_wideband);

/** Scale every psi by f_cd/f_c; delays unchanged; adjusted flag cleared. */
std::vector<AngularDelaySignature> map_signatures_downlink(
    const std::vector<AngularDelaySignature>& uplink_sigs, const SystemConfig& cfg);

/**
 * Downlink signatures for all users: carrier mapping followed by a fresh
 * soft-grouping pass in downlink coordinates.
 */
SoftGroupResult downlink_signatures(const std::vector<AngularDelaySignature>& uplink_sigs,
                                    const SystemConfig& cfg, double max_delay_s);

/** Build per-user beamformers from (adjusted) downlink signatures. */
BeamformerSet downlink_beamformer(const std::vector<AngularDelaySignature>& sigs_d,
                                  const SystemConfig& cfg, int l_m,
                                  ModelMode mode = ModelMode::dual_wideband);

/**
 * Simulate the l_m beamformed training blocks through one user's true
 * downlink channel: block q transmits B_D * (column q of S^H); the user sums
 * its per-subcarrier receptions and returns one complex sample per block.
 * Pass rng = nullptr for a noiseless run.
 */
std::vector<cxd> downlink_train_and_receive(const SfwChannel& h_true_d, const BeamformerSet& bf,
                                            const TrainingConfig& training, Rng* rng);

/** Same with caller-supplied unit noise (length l_m * N), scaled by sigma. */
std::vector<cxd> downlink_train_and_receive_with_noise(const SfwChannel& h_true_d,
                                                       const BeamformerSet& bf,
                                                       const TrainingConfig& training,
                                                       const std::vector<cxd>& unit_noise,
                                                       double sigma);

/**
 * Correlate the training observation back to per-path downlink gains
 * (beta_hat = S^H y / l_m, padded entries dropped) and rebuild the channel.
 */
UserEstimate downlink_gain_and_rebuild(const std::vector<cxd>& y, const TrainingConfig& training,
                                       const AngularDelaySignature& sig_d,
                                       const SystemConfig& cfg,
                                       ModelMode mode = ModelMode::dual_wideband);

}  // namespace dualwide
