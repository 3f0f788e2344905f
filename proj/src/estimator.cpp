// SPDX-License-Identifier: Apache-2.0

#include "dualwide/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dualwide/angular_delay.hpp"
#include "dualwide/sfw_model.hpp"

namespace dualwide {

namespace {

inline cxd cis_cycles(double cycles) {
    double f = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * f);
}

/**
 * Concentration-objective evaluator with a cached spatial contraction.
 * For a fixed psi the contraction u[n] = sum_m h[m][n] e^{+j2pi(m psi + m n squint)}
 * costs O(MN) once; each delay probe then costs O(N).
 */
class ObjectiveEval {
  public:
    ObjectiveEval(const CxMat& h, const SystemConfig& cfg, ModelMode mode)
        : h_(h),
          eta_(cfg.subcarrier_spacing_hz()),
          squint_scale_(mode == ModelMode::dual_wideband ? eta_ / cfg.f_c_hz : 0.0),
          inv_root_(1.0 / std::sqrt(static_cast<double>(h.rows) * h.cols)),
          u_(static_cast<size_t>(h.cols)) {}

    void set_psi(double psi) {
        const int M = h_.rows;
        const int N = h_.cols;
        const double squint = psi * squint_scale_;
        for (int n = 0; n < N; ++n) {
            const cxd* col = h_.data.data() + static_cast<size_t>(n) * M;
            const cxd step = cis_cycles(psi + squint * n);
            cxd rot{1.0, 0.0};
            cxd dot{0.0, 0.0};
            for (int m = 0; m < M; ++m) {
                dot += col[m] * rot;
                rot *= step;
            }
            u_[n] = dot;
        }
    }

    /** Complex correlation p(psi, tau)^H vec(h) at the cached psi. */
    cxd correlation(double tau_s) const {
        const cxd step = cis_cycles(eta_ * tau_s);
        cxd rot{1.0, 0.0};
        cxd total{0.0, 0.0};
        for (const cxd& un : u_) {
            total += un * rot;
            rot *= step;
        }
        return total;
    }

    /** Objective value |correlation| / sqrt(MN). */
    double objective(double tau_s) const { return std::abs(correlation(tau_s)) * inv_root_; }

  private:
    const CxMat& h_;
    double eta_;
    double squint_scale_;
    double inv_root_;
    std::vector<cxd> u_;
};

/**
 * Golden-section maximization over [lo, hi]; returns the best probed point.
 * `f` must be unimodal on the bracket for the guarantee to hold.
 */
template <typename F>
void golden_max(F&& f, double lo, double hi, double tol, double& best_x, double& best_v) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    auto consider = [&](double x, double v) {
        if (v > best_v) {
            best_v = v;
            best_x = x;
        }
    };
    consider(x1, f1);
    consider(x2, f2);
    while (b - a > tol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
            consider(x2, f2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
            consider(x1, f1);
        }
    }
}

/**
 * Bin-resolution seed scan around a detected peak.  At a wide fractional
 * bandwidth one path's grid energy smears over roughly `side` bins per axis
 * (side = ceil(f_s/f_c * |psi| * M)) and its delay centroid sits half an
 * aperture delay away from the true delay, so the strongest bin alone can
 * lie several bins from the signature.  Scanning bin-spaced candidates over
 * that halo — including both alias branches for rows near the +-1/2
 * spatial-frequency seam, with the per-candidate delay recentred by the
 * model's aperture shift — lands the seed within about one bin of the
 * objective's global peak before the local +-1-bin refinement runs.
 */
SignaturePoint localize_seed(ObjectiveEval& ev, const DetectedCluster& cl,
                             const SignaturePoint& coarse, const SystemConfig& cfg,
                             ModelMode mode) {
    const double ratio = cfg.fractional_bandwidth();
    const int side =
        std::max(1, static_cast<int>(std::ceil(ratio * std::abs(coarse.psi) * cfg.M)));
    // The footprint drifts one-sided from the signature's row by up to
    // `side` rows, and the strongest bin can sit at either end of the
    // drift, so the halo must span the full width on both sides.
    const int hw = side + 1;
    const double bin_tau = 1.0 / cfg.f_s_hz;
    const double aperture_half =
        mode == ModelMode::dual_wideband ? 0.5 * (cfg.M - 1) / cfg.f_c_hz : 0.0;

    // Offsets nearest-first so that exact objective ties keep the candidate
    // closest to the detected peak.
    std::vector<int> offsets;
    offsets.reserve(2 * static_cast<size_t>(hw) + 1);
    offsets.push_back(0);
    for (int k = 1; k <= hw; ++k) {
        offsets.push_back(-k);
        offsets.push_back(k);
    }

    SignaturePoint best = coarse;
    double best_v = -1.0;
    for (int i : offsets) {
        const int row = detail::imod(cl.peak_row + i, cfg.M);
        const double wrapped = (row > cfg.M / 2) ? static_cast<double>(row - cfg.M) / cfg.M
                                                 : static_cast<double>(row) / cfg.M;
        for (int branch = 0; branch < 2; ++branch) {
            double psi = wrapped;
            if (branch == 1) {
                // Alias partner one full cycle away; only rows near the seam
                // keep a physically plausible partner.
                psi = wrapped - (wrapped > 0.0 ? 1.0 : -1.0);
                if (std::abs(psi) > cfg.d_over_lambda + 1.0 / cfg.M) continue;
            }
            ev.set_psi(psi);
            const double tau_base = coarse.tau_s - psi * aperture_half;
            for (int j : offsets) {
                const double tau = tau_base + j * bin_tau;
                if (tau < -bin_tau) continue;
                const double v = ev.objective(tau);
                if (v > best_v) {
                    best_v = v;
                    best = SignaturePoint{psi, tau};
                }
            }
        }
    }
    return best;
}

}  // namespace

TrainingConfig TrainingConfig::make(double e_p, double sigma_n2, int l_m) {
    if (l_m < 1) throw std::invalid_argument("TrainingConfig: need at least one block");
    TrainingConfig t;
    t.e_p = e_p;
    t.sigma_n2 = sigma_n2;
    t.l_m = l_m;
    t.s = CxMat(l_m, l_m);
    for (int q = 0; q < l_m; ++q)
        for (int l = 0; l < l_m; ++l) {
            double cycles = static_cast<double>(q) * l / l_m;
            cycles -= std::floor(cycles);
            t.s.at(q, l) = std::polar(1.0, -kTwoPi * cycles);
        }
    return t;
}

void TrainingConfig::validate() const {
    if (l_m < 1 || s.rows != l_m || s.cols != l_m)
        throw std::invalid_argument("TrainingConfig: bad block matrix shape");
    for (int i = 0; i < l_m; ++i)
        for (int j = 0; j < l_m; ++j) {
            cxd acc{0.0, 0.0};
            for (int q = 0; q < l_m; ++q) acc += std::conj(s.at(q, i)) * s.at(q, j);
            cxd want = (i == j) ? cxd{static_cast<double>(l_m), 0.0} : cxd{0.0, 0.0};
            if (std::abs(acc - want) > 1e-9 * l_m)
                throw std::invalid_argument("TrainingConfig: S^H S != l_m I");
        }
    if (e_p <= 0.0 || sigma_n2 < 0.0)
        throw std::invalid_argument("TrainingConfig: bad power/noise values");
}

SfwChannel preamble_ls(const CxMat& y_rx, const std::vector<cxd>& pilot) {
    if (static_cast<int>(pilot.size()) != y_rx.cols)
        throw std::invalid_argument("preamble_ls: pilot length must equal subcarrier count");
    for (const cxd& p : pilot)
        if (p == cxd{0.0, 0.0}) throw std::invalid_argument("preamble_ls: zero pilot entry");
    SfwChannel h;
    h.h = CxMat(y_rx.rows, y_rx.cols);
    for (int n = 0; n < y_rx.cols; ++n) {
        const cxd inv = 1.0 / pilot[n];
        for (int m = 0; m < y_rx.rows; ++m) h.h.at(m, n) = y_rx.at(m, n) * inv;
    }
    return h;
}

std::vector<DetectedCluster> detect_paths(const AngularDelayGrid& g_hat,
                                          const EstimatorConfig& cfg) {
    const int M = g_hat.g.rows;
    const int N = g_hat.g.cols;
    std::vector<double> energy(g_hat.g.size());
    for (size_t i = 0; i < energy.size(); ++i) energy[i] = std::norm(g_hat.g.data[i]);

    std::vector<DetectedCluster> clusters;
    auto energy_at = [&](int r, int c) { return energy[static_cast<size_t>(c) * M + r]; };

    if (cfg.mode == DetectMode::threshold) {
        std::vector<double> sorted = energy;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
        const double median = sorted[sorted.size() / 2];
        const double thr = cfg.kappa * median;

        // Kept bins, then union-find with Chebyshev-distance-<=2 adjacency
        // (8-neighborhood components plus the one-bin-gap merge), wrap-aware.
        std::vector<int> kept;
        for (int i = 0; i < static_cast<int>(energy.size()); ++i)
            if (energy[i] > thr) kept.push_back(i);
        std::unordered_map<int, int> pos;
        pos.reserve(kept.size() * 2);
        for (size_t k = 0; k < kept.size(); ++k) pos[kept[k]] = static_cast<int>(k);
        std::vector<int> parent(kept.size());
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (size_t k = 0; k < kept.size(); ++k) {
            int r = kept[k] % M, c = kept[k] / M;
            for (int dr = -2; dr <= 2; ++dr)
                for (int dc = -2; dc <= 2; ++dc) {
                    if (dr == 0 && dc == 0) continue;
                    int rr = detail::imod(r + dr, M), cc = detail::imod(c + dc, N);
                    auto it = pos.find(cc * M + rr);
                    if (it != pos.end()) {
                        int a = find(static_cast<int>(k)), b = find(it->second);
                        if (a != b) parent[a] = b;
                    }
                }
        }
        std::unordered_map<int, size_t> root_to_cluster;
        for (size_t k = 0; k < kept.size(); ++k) {
            int root = find(static_cast<int>(k));
            auto [it, inserted] = root_to_cluster.try_emplace(root, clusters.size());
            if (inserted) clusters.emplace_back();
            DetectedCluster& cl = clusters[it->second];
            int r = kept[k] % M, c = kept[k] / M;
            cl.bins.emplace_back(r, c);
            if (energy_at(r, c) > cl.peak_energy) {
                cl.peak_energy = energy_at(r, c);
                cl.peak_row = r;
                cl.peak_col = c;
            }
        }
    } else {
        // Local maxima over the wrap-around 8-neighborhood.
        std::vector<std::pair<double, int>> maxima;  // (energy, linear index)
        for (int c = 0; c < N; ++c)
            for (int r = 0; r < M; ++r) {
                double e = energy_at(r, c);
                if (e <= 0.0) continue;
                bool is_max = true;
                for (int dr = -1; dr <= 1 && is_max; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        if (energy_at(detail::imod(r + dr, M), detail::imod(c + dc, N)) > e) {
                            is_max = false;
                            break;
                        }
                    }
                if (is_max) maxima.emplace_back(e, c * M + r);
            }
        std::sort(maxima.begin(), maxima.end(),
                  [](const auto& a, const auto& b) { return a.first > b.first; });
        const int want = std::max(1, cfg.known_count);
        std::vector<std::pair<int, int>> seeds;
        for (const auto& [e, idx] : maxima) {
            if (static_cast<int>(seeds.size()) == want) break;
            int r = idx % M, c = idx / M;
            bool clear = true;
            for (const auto& [sr, sc] : seeds) {
                int dr = std::min(detail::imod(r - sr, M), detail::imod(sr - r, M));
                int dc = std::min(detail::imod(c - sc, N), detail::imod(sc - c, N));
                if (std::max(dr, dc) < 2) {
                    clear = false;
                    break;
                }
            }
            if (!clear) continue;
            seeds.emplace_back(r, c);
            DetectedCluster cl;
            cl.peak_row = r;
            cl.peak_col = c;
            cl.peak_energy = e;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    cl.bins.emplace_back(detail::imod(r + dr, M), detail::imod(c + dc, N));
            clusters.push_back(std::move(cl));
        }
    }

    if (clusters.empty()) throw std::runtime_error("no paths detected");
    std::sort(clusters.begin(), clusters.end(),
              [](const DetectedCluster& a, const DetectedCluster& b) {
                  return a.peak_energy > b.peak_energy;
              });
    return clusters;
}

SignaturePoint coarse_signature(const DetectedCluster& cluster, const SystemConfig& cfg) {
    if (cluster.bins.empty()) throw std::invalid_argument("coarse_signature: empty cluster");
    SignaturePoint sp;
    // Map row index to psi in (-0.5, 0.5]: upper half of the grid is negative.
    int m = cluster.peak_row;
    sp.psi = (m > cfg.M / 2) ? static_cast<double>(m - cfg.M) / cfg.M
                             : static_cast<double>(m) / cfg.M;
    sp.tau_s = static_cast<double>(cluster.peak_col) / (cfg.N * cfg.subcarrier_spacing_hz());
    return sp;
}

SignaturePoint refine_signature(const SfwChannel& h_hat, const SignaturePoint& coarse,
                                const SystemConfig& cfg, const SearchConfig& search,
                                ModelMode mode) {
    ObjectiveEval ev(h_hat.h, cfg, mode);
    const int R = std::max(2, search.grid_points);
    const double bin_psi = 1.0 / cfg.M;
    const double bin_tau = 1.0 / cfg.f_s_hz;  // = 1/(N eta) seconds

    double best_psi = coarse.psi;
    double best_tau = coarse.tau_s;
    double best_v = -1.0;
    double best_d = 0.0;
    auto consider = [&](double psi, double tau, double v) {
        double d = std::hypot((psi - coarse.psi) / bin_psi, (tau - coarse.tau_s) / bin_tau);
        if (v > best_v || (v == best_v && d < best_d)) {
            best_v = v;
            best_psi = psi;
            best_tau = tau;
            best_d = d;
        }
    };

    // Stage 1: uniform R x R sweep of the +/-1-bin window.
    for (int i = 0; i < R; ++i) {
        double psi = coarse.psi + (-1.0 + 2.0 * i / (R - 1)) * bin_psi;
        ev.set_psi(psi);
        for (int k = 0; k < R; ++k) {
            double tau = coarse.tau_s + (-1.0 + 2.0 * k / (R - 1)) * bin_tau;
            consider(psi, tau, ev.objective(tau));
        }
    }

    // Stage 2: coordinate-wise golden-section around the grid winner.
    const double rf = std::max(2, search.refine_factor);
    double span_psi = 2.0 * bin_psi / (R - 1);
    double span_tau = 2.0 * bin_tau / (R - 1);
    const double tol_psi = bin_psi / rf;
    const double tol_tau = bin_tau / rf;
    for (int round = 0; round < 3; ++round) {
        double tau_fixed = best_tau;
        golden_max(
            [&](double psi) {
                ev.set_psi(psi);
                return ev.objective(tau_fixed);
            },
            best_psi - span_psi, best_psi + span_psi, tol_psi, best_psi, best_v);
        ev.set_psi(best_psi);
        golden_max([&](double tau) { return ev.objective(tau); }, best_tau - span_tau,
                   best_tau + span_tau, tol_tau, best_tau, best_v);
        span_psi = std::max(span_psi * 0.35, tol_psi);
        span_tau = std::max(span_tau * 0.35, tol_tau);
    }
    // The delay enters the model only through whole-subcarrier rotations,
    // making the objective exactly periodic in it; a seed reached through
    // the wrapped edge of the delay grid would otherwise report one full
    // period high.  Fold into the unambiguous window centred on zero.
    const double period = cfg.N / cfg.f_s_hz;
    best_tau = std::fmod(best_tau, period);
    if (best_tau > 0.5 * period) best_tau -= period;
    if (best_tau <= -0.5 * period) best_tau += period;
    return SignaturePoint{best_psi, best_tau};
}

UserEstimate extract_signatures(const SfwChannel& h_hat, const SystemConfig& cfg,
                                const EstimatorConfig& est, ModelMode mode) {
    const AngularDelayGrid g = to_angular_delay(h_hat);
    const double mn = static_cast<double>(cfg.M) * cfg.N;
    const double eta = cfg.subcarrier_spacing_hz();
    const double ratio = cfg.fractional_bandwidth();

    // Refined duplicates collapse to the same point, so distinctness is
    // decided in the refined signature space, one grid bin apart.
    auto bin_distance = [&](const SignaturePoint& a, const SignaturePoint& b) {
        double w = a.psi - b.psi;
        w -= std::floor(w);  // fractional cycle difference in [0, 1)
        const double dpsi = std::min(w, 1.0 - w);
        return std::hypot(cfg.M * dpsi, cfg.N * eta * (a.tau_s - b.tau_s));
    };

    UserEstimate out;
    if (est.mode == DetectMode::threshold) {
        // One cluster per connected component; refine all, drop refined
        // duplicates (a smeared path occasionally splits into two
        // components), strongest first.
        const std::vector<DetectedCluster> clusters = detect_paths(g, est);
        std::vector<SignaturePoint> fine(clusters.size());
        std::vector<cxd> amp(clusters.size());
#pragma omp parallel for schedule(dynamic)
        for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
            SignaturePoint coarse = coarse_signature(clusters[c], cfg);
            ObjectiveEval ev(h_hat.h, cfg, mode);
            SignaturePoint seed = localize_seed(ev, clusters[c], coarse, cfg, mode);
            fine[c] = refine_signature(h_hat, seed, cfg, est.search, mode);
            amp[c] = basis_correlation(h_hat, fine[c].psi, fine[c].tau_s, cfg, mode) / mn;
        }
        std::vector<int> order(clusters.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return std::abs(amp[a]) > std::abs(amp[b]); });
        for (int idx : order) {
            bool distinct = true;
            for (const SignaturePoint& kept : out.signature.pairs)
                if (bin_distance(fine[idx], kept) < 1.0) {
                    distinct = false;
                    break;
                }
            if (!distinct) continue;
            out.signature.pairs.push_back(fine[idx]);
            out.gains.push_back(amp[idx]);
        }
        return out;
    }

    // Known-count mode.  A widely-smeared path carpets its footprint with
    // grid local maxima, so a fixed-size seed list can exhaust itself on
    // one strong path.  Walk the maxima strongest-first instead, refine
    // each candidate, and stop once `want` distinct signatures are found;
    // candidates whose seed bin lies strictly inside an accepted path's
    // smear footprint are skipped without the refine cost.
    const int want = std::max(1, est.known_count);
    const int side_max = std::max(
        1, static_cast<int>(std::ceil(ratio * cfg.d_over_lambda * cfg.M)));
    const int refine_budget = 4 * want + 2 * side_max + 6;
    EstimatorConfig det = est;
    det.known_count = want * 30 + 64;  // candidate stream bound

    auto ridge_interior = [&](int r, int c, const SignaturePoint& kept) {
        const double a = std::abs(kept.psi);
        const int side = std::max(1, static_cast<int>(std::ceil(ratio * a * cfg.M)));
        double row_f = kept.psi - std::floor(kept.psi);  // cycles in [0, 1)
        double dr = std::abs(r - row_f * cfg.M);
        dr = std::min(dr, cfg.M - dr);
        if (dr > side - 1) return false;
        const double span_s = (cfg.M - 1) * kept.psi / cfg.f_c_hz;  // signed aperture delay
        double lo_s = kept.tau_s, hi_s = kept.tau_s;
        if (mode == ModelMode::dual_wideband) {
            lo_s += std::min(0.0, span_s);
            hi_s += std::max(0.0, span_s);
        } else {
            // The assumed model has no smear, so the kept delay sits near
            // the centroid of the data's footprint.
            lo_s -= 0.5 * std::abs(span_s);
            hi_s += 0.5 * std::abs(span_s);
        }
        const double cbin = static_cast<double>(c);
        return cbin >= std::ceil(lo_s * cfg.f_s_hz) && cbin <= std::floor(hi_s * cfg.f_s_hz);
    };

    const std::vector<DetectedCluster> clusters = detect_paths(g, det);
    int refines = 0;
    for (const DetectedCluster& cl : clusters) {
        if (static_cast<int>(out.signature.pairs.size()) == want || refines >= refine_budget)
            break;
        bool interior = false;
        for (const SignaturePoint& kept : out.signature.pairs)
            if (ridge_interior(cl.peak_row, cl.peak_col, kept)) {
                interior = true;
                break;
            }
        if (interior) continue;
        SignaturePoint coarse = coarse_signature(cl, cfg);
        ObjectiveEval ev(h_hat.h, cfg, mode);
        SignaturePoint seed = localize_seed(ev, cl, coarse, cfg, mode);
        SignaturePoint fine = refine_signature(h_hat, seed, cfg, est.search, mode);
        ++refines;
        const cxd a = basis_correlation(h_hat, fine.psi, fine.tau_s, cfg, mode) / mn;
        int dup = -1;
        for (std::size_t k = 0; k < out.signature.pairs.size(); ++k)
            if (bin_distance(fine, out.signature.pairs[k]) < 1.0) {
                dup = static_cast<int>(k);
                break;
            }
        if (dup >= 0) {
            // Same path found again; keep whichever refinement captures it
            // more strongly.
            if (std::abs(a) > std::abs(out.gains[static_cast<std::size_t>(dup)])) {
                out.signature.pairs[static_cast<std::size_t>(dup)] = fine;
                out.gains[static_cast<std::size_t>(dup)] = a;
            }
            continue;
        }
        out.signature.pairs.push_back(fine);
        out.gains.push_back(a);
    }
    return out;
}

SoftGroupResult soft_grouping(const std::vector<AngularDelaySignature>& signatures,
                              const SystemConfig& cfg, double max_delay_s) {
    if (signatures.empty()) throw std::invalid_argument("soft_grouping: no signatures");
    for (const auto& s : signatures)
        if (s.pairs.empty()) throw std::invalid_argument("soft_grouping: empty signature");

    SoftGroupResult out;
    out.signatures = signatures;
    out.offsets_s.assign(signatures.size(), 0.0);
    for (auto& s : out.signatures) s.adjusted = true;

    const double ladder_step = cfg.omega / (cfg.N * cfg.subcarrier_spacing_hz());
    for (size_t p = 1; p < signatures.size(); ++p) {
        double max_raw = 0.0;
        for (const auto& sp : signatures[p].pairs) max_raw = std::max(max_raw, sp.tau_s);
        size_t blocker = 0;
        bool placed = false;
        for (int k = 0;; ++k) {
            const double delta = k * ladder_step;
            if (max_raw + delta > max_delay_s) break;
            AngularDelaySignature cand = signatures[p];
            for (auto& sp : cand.pairs) sp.tau_s += delta;
            cand.adjusted = true;
            bool ok = true;
            for (size_t r = 0; r < p; ++r) {
                if (signature_distance(cand, out.signatures[r], cfg) < cfg.omega) {
                    ok = false;
                    blocker = r;
                    break;
                }
            }
            if (ok) {
                out.signatures[p] = cand;
                out.offsets_s[p] = delta;
                placed = true;
                break;
            }
        }
        if (!placed) {
            std::ostringstream err;
            err << "soft grouping infeasible: user " << p << " cannot clear user " << blocker
                << " within the delay budget (" << max_delay_s << " s)";
            throw std::runtime_error(err.str());
        }
    }
    return out;
}

CxMat uplink_observation_with_noise(const std::vector<const SfwChannel*>& channels,
                                    const std::vector<double>& e_p, const CxMat& unit_noise,
                                    double sigma) {
    if (channels.empty() || channels.size() != e_p.size())
        throw std::invalid_argument("uplink_observation: channel/power count mismatch");
    CxMat y = unit_noise;
    for (cxd& v : y.data) v *= sigma;
    for (size_t p = 0; p < channels.size(); ++p) {
        const CxMat& h = channels[p]->h;
        if (h.rows != y.rows || h.cols != y.cols)
            throw std::invalid_argument("uplink_observation: shape mismatch");
        const double amp = std::sqrt(e_p[p]);
        for (size_t i = 0; i < y.data.size(); ++i) y.data[i] += amp * h.data[i];
    }
    return y;
}

CxMat uplink_observation(const std::vector<const SfwChannel*>& channels,
                         const std::vector<double>& e_p, double sigma_n2, Rng& rng) {
    if (channels.empty()) throw std::invalid_argument("uplink_observation: no channels");
    CxMat noise(channels.front()->h.rows, channels.front()->h.cols);
    for (cxd& v : noise.data) v = rng.cnormal(1.0);
    return uplink_observation_with_noise(channels, e_p, noise, std::sqrt(sigma_n2));
}

std::vector<cxd> uplink_gain_update(const CxMat& y_u, const AngularDelaySignature& sig,
                                    double e_p, const SystemConfig& cfg, ModelMode mode) {
    const double scale = 1.0 / (static_cast<double>(cfg.M) * cfg.N * std::sqrt(e_p));
    std::vector<cxd> gains(sig.pairs.size());
#pragma omp parallel for schedule(static)
    for (int l = 0; l < static_cast<int>(sig.pairs.size()); ++l)
        gains[l] =
            basis_correlation(y_u, sig.pairs[l].psi, sig.pairs[l].tau_s, cfg, mode) * scale;
    return gains;
}

SfwChannel reconstruct_channel(const AngularDelaySignature& sig, const std::vector<cxd>& gains,
                               const SystemConfig& cfg, Link link, ModelMode mode) {
    const SystemConfig used = (link == Link::downlink) ? cfg.downlink_view() : cfg;
    return assemble_channel(sig, gains, used, mode);
}

std::vector<AngularDelaySignature> map_signatures_downlink(
    const std::vector<AngularDelaySignature>& uplink_sigs, const SystemConfig& cfg) {
    std::vector<AngularDelaySignature> out = uplink_sigs;
    for (auto& sig : out) {
        for (auto& sp : sig.pairs) sp.psi = downlink_map_psi(sp.psi, cfg);
        sig.adjusted = false;
    }
    return out;
}

SoftGroupResult downlink_signatures(const std::vector<AngularDelaySignature>& uplink_sigs,
                                    const SystemConfig& cfg, double max_delay_s) {
    // Grouping distances are measured on the downlink grid, so regroup with
    // the downlink-view config after the carrier mapping.
    return soft_grouping(map_signatures_downlink(uplink_sigs, cfg), cfg.downlink_view(),
                         max_delay_s);
}

BeamformerSet downlink_beamformer(const std::vector<AngularDelaySignature>& sigs_d,
                                  const SystemConfig& cfg, int l_m, ModelMode mode) {
    BeamformerSet bf;
    bf.l_m = l_m;
    bf.mode = mode;
    bf.dl_cfg = cfg.downlink_view();
    bf.signatures = sigs_d;
    const size_t mn = static_cast<size_t>(cfg.M) * cfg.N;
    bf.b_sum = CxMat(static_cast<int>(mn), l_m);
    const double scale = 1.0 / static_cast<double>(mn);
#pragma omp parallel for schedule(static)
    for (int l = 0; l < l_m; ++l) {
        cxd* col = bf.b_sum.data.data() + static_cast<size_t>(l) * mn;
        for (const AngularDelaySignature& sig : sigs_d) {
            if (l >= static_cast<int>(sig.pairs.size())) continue;  // zero-padded column
            std::vector<cxd> p = basis_vector(sig.pairs[l].psi, sig.pairs[l].tau_s, bf.dl_cfg,
                                              bf.mode);
            for (size_t i = 0; i < mn; ++i) col[i] += p[i] * scale;
        }
    }
    return bf;
}

CxMat BeamformerSet::user_matrix(int p) const {
    const AngularDelaySignature& sig = signatures.at(static_cast<size_t>(p));
    const size_t mn = static_cast<size_t>(dl_cfg.M) * dl_cfg.N;
    CxMat b(static_cast<int>(mn), l_m);
    const double scale = 1.0 / static_cast<double>(mn);
    for (int l = 0; l < static_cast<int>(sig.pairs.size()) && l < l_m; ++l) {
        std::vector<cxd> v = basis_vector(sig.pairs[l].psi, sig.pairs[l].tau_s, dl_cfg, mode);
        for (size_t i = 0; i < mn; ++i) b.at(static_cast<int>(i), l) = v[i] * scale;
    }
    return b;
}

std::vector<cxd> downlink_train_and_receive_with_noise(const SfwChannel& h_true_d,
                                                       const BeamformerSet& bf,
                                                       const TrainingConfig& training,
                                                       const std::vector<cxd>& unit_noise,
                                                       double sigma) {
    const int M = h_true_d.h.rows;
    const int N = h_true_d.h.cols;
    const size_t mn = static_cast<size_t>(M) * N;
    if (bf.b_sum.rows != static_cast<int>(mn) || bf.b_sum.cols != training.l_m)
        throw std::invalid_argument("downlink_train_and_receive: beamformer shape mismatch");
    if (unit_noise.size() < static_cast<size_t>(training.l_m) * N && sigma != 0.0)
        throw std::invalid_argument("downlink_train_and_receive: noise buffer too short");

    std::vector<cxd> y(static_cast<size_t>(training.l_m));
    std::vector<cxd> x(mn);
    for (int q = 0; q < training.l_m; ++q) {
        // Block q transmits x = B_D * (column q of S^H).
        std::fill(x.begin(), x.end(), cxd{0.0, 0.0});
        for (int j = 0; j < training.l_m; ++j) {
            const cxd w = std::conj(training.s.at(q, j));
            const cxd* col = bf.b_sum.data.data() + static_cast<size_t>(j) * mn;
            for (size_t i = 0; i < mn; ++i) x[i] += col[i] * w;
        }
        // Per-subcarrier reception, then the user sums across subcarriers.
        cxd acc{0.0, 0.0};
        for (int n = 0; n < N; ++n) {
            const cxd* hcol = h_true_d.h.data.data() + static_cast<size_t>(n) * M;
            const cxd* xseg = x.data() + static_cast<size_t>(n) * M;
            cxd r{0.0, 0.0};
            for (int m = 0; m < M; ++m) r += std::conj(xseg[m]) * hcol[m];
            if (sigma != 0.0) r += sigma * unit_noise[static_cast<size_t>(q) * N + n];
            acc += r;
        }
        y[q] = acc;
    }
    return y;
}

std::vector<cxd> downlink_train_and_receive(const SfwChannel& h_true_d, const BeamformerSet& bf,
                                            const TrainingConfig& training, Rng* rng) {
    std::vector<cxd> noise;
    double sigma = 0.0;
    if (rng != nullptr && training.sigma_n2 > 0.0) {
        noise.resize(static_cast<size_t>(training.l_m) * h_true_d.h.cols);
        for (cxd& v : noise) v = rng->cnormal(1.0);
        sigma = std::sqrt(training.sigma_n2);
    }
    return downlink_train_and_receive_with_noise(h_true_d, bf, training, noise, sigma);
}

UserEstimate downlink_gain_and_rebuild(const std::vector<cxd>& y, const TrainingConfig& training,
                                       const AngularDelaySignature& sig_d,
                                       const SystemConfig& cfg, ModelMode mode) {
    if (y.size() != static_cast<size_t>(training.l_m))
        throw std::invalid_argument("downlink_gain_and_rebuild: observation length mismatch");
    UserEstimate out;
    out.signature = sig_d;
    const size_t l_p = sig_d.pairs.size();
    out.gains.resize(l_p);
    // beta_hat = S^H y / l_m; entries beyond the user's path count are padding.
    for (size_t l = 0; l < l_p; ++l) {
        cxd acc{0.0, 0.0};
        for (int q = 0; q < training.l_m; ++q)
            acc += std::conj(training.s.at(q, static_cast<int>(l))) * y[q];
        out.gains[l] = acc / static_cast<double>(training.l_m);
    }
    out.reconstructed = reconstruct_channel(sig_d, out.gains, cfg, Link::downlink, mode);
    return out;
}

}  // namespace dualwide
