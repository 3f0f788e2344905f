// SPDX-License-Identifier: Apache-2.0
//
// Error bookkeeping for Monte-Carlo runs.  Parameter errors are computed on
// greedily matched (estimated, true) path pairs in the grid-scaled metric;
// channel errors are Frobenius ratios accumulated as separate numerator and
// denominator sums so that merging partial results stays exact.

#pragma once

#include <vector>

#include "dualwide/types.hpp"

namespace dualwide {

struct MatchedPair {
    int est_index = -1;
    int true_index = -1;
    double distance = 0.0;  // hypot(M * dpsi, N * eta * dtau) at match time
};

/**
 * Greedy globally-closest-first assignment between estimated signature
 * points and true paths; min(est, true) pairs are produced.
 */
std::vector<MatchedPair> match_paths(const std::vector<SignaturePoint>& est,
                                     const std::vector<PathParam>& truth,
                                     const SystemConfig& cfg);

struct MetricsReport {
    double mse_theta = 0.0;     // rad^2, matched pairs
    double mse_tau = 0.0;       // s^2, matched pairs
    double nmse_alpha = 0.0;    // gain error power / true gain power
    double nmse_uplink = 0.0;   // channel error power / true channel power
    double nmse_downlink = 0.0;
    long trials = 0;
    long failures = 0;
    long unmatched = 0;  // true or estimated paths left without a partner
};

class MetricsAccumulator {
  public:
    /**
     * Match one user's estimate against the truth and accumulate angle,
     * delay, and gain errors.  Estimated delays must already be in the same
     * timing frame as the truth (any deliberate shifts removed by the
     * caller).
     */
    void add_parameter_errors(const std::vector<SignaturePoint>& est,
                              const std::vector<cxd>& est_gains,
                              const std::vector<PathParam>& truth, Link link,
                              const SystemConfig& cfg);

    void add_channel_error(const CxMat& est, const CxMat& ref, Link link);

    void add_trial(bool failed);

    void merge(const MetricsAccumulator& other);

    MetricsReport report() const;

  private:
    double se_theta_ = 0.0;
    double se_tau_ = 0.0;
    long n_pairs_ = 0;
    double err_alpha_ = 0.0;
    double ref_alpha_ = 0.0;
    double err_ul_ = 0.0;
    double ref_ul_ = 0.0;
    double err_dl_ = 0.0;
    double ref_dl_ = 0.0;
    long trials_ = 0;
    long failures_ = 0;
    long unmatched_ = 0;
};

}  // namespace dualwide
