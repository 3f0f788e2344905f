// SPDX-License-Identifier: Apache-2.0

#include "dualwide/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dualwide {

namespace {

// A uniform linear array cannot distinguish spatial frequencies a whole
// cycle apart, so estimate-minus-truth differences are folded to the
// principal interval before distances and angle errors are formed.
double fold_cycle(double x) { return x - std::round(x); }

}  // namespace

std::vector<MatchedPair> match_paths(const std::vector<SignaturePoint>& est,
                                     const std::vector<PathParam>& truth,
                                     const SystemConfig& cfg) {
    const double eta = cfg.subcarrier_spacing_hz();
    const std::size_t ne = est.size();
    const std::size_t nt = truth.size();
    std::vector<double> dist(ne * nt);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nt; ++j)
            dist[i * nt + j] =
                std::hypot(static_cast<double>(cfg.M) * fold_cycle(est[i].psi - truth[j].psi),
                           static_cast<double>(cfg.N) * eta * (est[i].tau_s - truth[j].tau_s));

    std::vector<MatchedPair> pairs;
    std::vector<bool> used_e(ne, false), used_t(nt, false);
    const std::size_t want = std::min(ne, nt);
    while (pairs.size() < want) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        for (std::size_t i = 0; i < ne; ++i) {
            if (used_e[i]) continue;
            for (std::size_t j = 0; j < nt; ++j) {
                if (used_t[j]) continue;
                if (dist[i * nt + j] < best) {
                    best = dist[i * nt + j];
                    bi = i;
                    bj = j;
                }
            }
        }
        used_e[bi] = true;
        used_t[bj] = true;
        pairs.push_back({static_cast<int>(bi), static_cast<int>(bj), best});
    }
    return pairs;
}

void MetricsAccumulator::add_parameter_errors(const std::vector<SignaturePoint>& est,
                                              const std::vector<cxd>& est_gains,
                                              const std::vector<PathParam>& truth, Link link,
                                              const SystemConfig& cfg) {
    if (est_gains.size() != est.size())
        throw std::invalid_argument("metrics: one gain per estimated path required");

    const std::vector<MatchedPair> pairs = match_paths(est, truth, cfg);
    for (const MatchedPair& mp : pairs) {
        const SignaturePoint& e = est[static_cast<std::size_t>(mp.est_index)];
        const PathParam& t = truth[static_cast<std::size_t>(mp.true_index)];
        // Evaluate the estimate on the truth's alias branch: near endfire
        // the array maps two angles to nearly the same spatial frequency,
        // and charging that inherent ambiguity to the estimator would
        // swamp the mean with branch flips.  The arcsine argument is
        // clamped so edge-of-range estimates stay finite.
        const double dpsi = fold_cycle(e.psi - t.psi);
        const double s = std::clamp((t.psi + dpsi) / cfg.d_over_lambda, -1.0, 1.0);
        const double dth = std::asin(s) - t.theta_rad;
        se_theta_ += dth * dth;
        const double dtau = e.tau_s - t.tau_s;
        se_tau_ += dtau * dtau;
        err_alpha_ += std::norm(est_gains[static_cast<std::size_t>(mp.est_index)] - t.gain(link));
        ref_alpha_ += std::norm(t.gain(link));
    }
    n_pairs_ += static_cast<long>(pairs.size());
    unmatched_ += static_cast<long>(est.size() + truth.size() - 2 * pairs.size());
}

void MetricsAccumulator::add_channel_error(const CxMat& est, const CxMat& ref, Link link) {
    if (est.rows != ref.rows || est.cols != ref.cols)
        throw std::invalid_argument("metrics: channel shapes differ");
    double err = 0.0;
    for (std::size_t i = 0; i < ref.data.size(); ++i) err += std::norm(est.data[i] - ref.data[i]);
    const double r = ref.frobenius_norm_sq();
    if (link == Link::uplink) {
        err_ul_ += err;
        ref_ul_ += r;
    } else {
        err_dl_ += err;
        ref_dl_ += r;
    }
}

void MetricsAccumulator::add_trial(bool failed) {
    ++trials_;
    if (failed) ++failures_;
}

void MetricsAccumulator::merge(const MetricsAccumulator& other) {
    se_theta_ += other.se_theta_;
    se_tau_ += other.se_tau_;
    n_pairs_ += other.n_pairs_;
    err_alpha_ += other.err_alpha_;
    ref_alpha_ += other.ref_alpha_;
    err_ul_ += other.err_ul_;
    ref_ul_ += other.ref_ul_;
    err_dl_ += other.err_dl_;
    ref_dl_ += other.ref_dl_;
    trials_ += other.trials_;
    failures_ += other.failures_;
    unmatched_ += other.unmatched_;
}

MetricsReport MetricsAccumulator::report() const {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MetricsReport r;
    r.mse_theta = n_pairs_ > 0 ? se_theta_ / static_cast<double>(n_pairs_) : nan;
    r.mse_tau = n_pairs_ > 0 ? se_tau_ / static_cast<double>(n_pairs_) : nan;
    r.nmse_alpha = ref_alpha_ > 0.0 ? err_alpha_ / ref_alpha_ : nan;
    r.nmse_uplink = ref_ul_ > 0.0 ? err_ul_ / ref_ul_ : nan;
    r.nmse_downlink = ref_dl_ > 0.0 ? err_dl_ / ref_dl_ : nan;
    r.trials = trials_;
    r.failures = failures_;
    r.unmatched = unmatched_;
    return r;
}

}  // namespace dualwide
