// SPDX-License-Identifier: Apache-2.0

#include "dualwide/sfw_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dualwide {

namespace {

/** exp(+j 2 pi cycles), with the argument reduced to [0, 1) cycles first. */
inline cxd cis_cycles(double cycles) {
    double f = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * f);
}

/**
 * Accumulate gain * path response into h.  The per-column entry sequence
 * over m is geometric (constant phase step), so each column needs two
 * trig evaluations and M complex multiplies.
 */
void accumulate_path(CxMat& h, double psi, double tau_s, cxd gain,
                     const SystemConfig& cfg, ModelMode mode) {
    const int M = h.rows;
    const int N = h.cols;
    const double eta = cfg.subcarrier_spacing_hz();
    const double squint = (mode == ModelMode::dual_wideband) ? psi * eta / cfg.f_c_hz : 0.0;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        cxd acc = gain * cis_cycles(-eta * tau_s * n);
        const cxd step = cis_cycles(-(psi + squint * n));
        cxd* col = h.data.data() + static_cast<size_t>(n) * M;
        for (int m = 0; m < M; ++m) {
            col[m] += acc;
            acc *= step;
        }
    }
}

}  // namespace

double SystemConfig::psi_from_theta(double theta_rad) const {
    return d_over_lambda * std::sin(theta_rad);
}

double SystemConfig::theta_from_psi(double psi) const {
    double s = psi / d_over_lambda;
    if (s < -1.0 || s > 1.0)
        throw std::invalid_argument("theta_from_psi: |psi| exceeds d_over_lambda");
    return std::asin(s);
}

SystemConfig SystemConfig::downlink_view() const {
    SystemConfig v = *this;
    v.d_over_lambda = d_over_lambda * f_cd_hz / f_c_hz;  // same physical spacing
    v.f_c_hz = f_cd_hz;
    return v;
}

void SystemConfig::validate() const {
    std::ostringstream err;
    if (M < 1 || N < 1)
        err << "array/subcarrier counts must be positive (M=" << M << ", N=" << N << ")";
    else if (d_over_lambda <= 0.0)
        err << "antenna spacing must be positive (d_over_lambda=" << d_over_lambda << ")";
    else if (f_c_hz <= 0.0 || f_cd_hz <= 0.0)
        err << "carrier frequencies must be positive";
    else if (f_s_hz <= 0.0)
        err << "sampled bandwidth must be positive";
    else if (f_s_hz > f_c_hz || f_s_hz > f_cd_hz)
        err << "sampled bandwidth must not exceed the carrier frequency";
    else if (n_cp < 0)
        err << "cyclic prefix length must be nonnegative";
    else if (omega < 0)
        err << "delay guard omega must be nonnegative";
    else
        return;
    throw std::invalid_argument("SystemConfig: " + err.str());
}

PathParam make_path(const SystemConfig& cfg, double theta_rad, double tau_s,
                    cxd gain_ul, cxd gain_dl) {
    PathParam p;
    p.theta_rad = theta_rad;
    p.psi = cfg.psi_from_theta(theta_rad);
    p.tau_s = tau_s;
    p.gain_ul = gain_ul;
    p.gain_dl = gain_dl;
    return p;
}

bool SupportRegion::contains(int row, int col, int dilation) const {
    auto axis_ok = [this, dilation](int idx, int anchor, int extent) {
        int rel = detail::imod(dir > 0 ? idx - anchor : anchor - idx, extent);
        return rel <= side - 1 + dilation || rel >= extent - dilation;
    };
    return axis_ok(row, row_anchor, rows) && axis_ok(col, col_anchor, cols);
}

long long SupportRegion::area(int dilation) const {
    long long r = std::min<long long>(side + 2LL * dilation, rows);
    long long c = std::min<long long>(side + 2LL * dilation, cols);
    return r * c;
}

std::vector<cxd> spatial_steering(double psi, int M) {
    std::vector<cxd> a(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m) a[m] = cis_cycles(-psi * m);
    return a;
}

std::vector<cxd> frequency_steering(double tau_s, int N, double eta_hz) {
    std::vector<cxd> b(static_cast<size_t>(N));
    for (int n = 0; n < N; ++n) b[n] = cis_cycles(-eta_hz * tau_s * n);
    return b;
}

CxMat phase_shift_matrix(double psi, const SystemConfig& cfg, ModelMode mode) {
    CxMat t(cfg.M, cfg.N);
    if (mode == ModelMode::narrowband) {
        for (cxd& v : t.data) v = cxd{1.0, 0.0};
        return t;
    }
    const double squint = psi * cfg.subcarrier_spacing_hz() / cfg.f_c_hz;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < cfg.N; ++n) {
        cxd* col = t.data.data() + static_cast<size_t>(n) * cfg.M;
        for (int m = 0; m < cfg.M; ++m) col[m] = cis_cycles(-squint * m * n);
    }
    return t;
}

SfwChannel path_channel(double psi, double tau_s, const SystemConfig& cfg, ModelMode mode) {
    SfwChannel h(cfg.M, cfg.N);
    accumulate_path(h.h, psi, tau_s, cxd{1.0, 0.0}, cfg, mode);
    return h;
}

SfwChannel assemble_channel(const std::vector<PathParam>& paths, const SystemConfig& cfg,
                            Link link, ModelMode mode) {
    SfwChannel h(cfg.M, cfg.N);
    for (const PathParam& p : paths) accumulate_path(h.h, p.psi, p.tau_s, p.gain(link), cfg, mode);
    return h;
}

SfwChannel assemble_channel(const AngularDelaySignature& sig, const std::vector<cxd>& gains,
                            const SystemConfig& cfg, ModelMode mode) {
    if (sig.pairs.size() != gains.size())
        throw std::invalid_argument("assemble_channel: signature/gain count mismatch");
    SfwChannel h(cfg.M, cfg.N);
    for (size_t l = 0; l < gains.size(); ++l)
        accumulate_path(h.h, sig.pairs[l].psi, sig.pairs[l].tau_s, gains[l], cfg, mode);
    return h;
}

std::vector<cxd> basis_vector(double psi, double tau_s, const SystemConfig& cfg, ModelMode mode) {
    const auto a = spatial_steering(psi, cfg.M);
    const auto b = frequency_steering(tau_s, cfg.N, cfg.subcarrier_spacing_hz());
    const CxMat theta = phase_shift_matrix(psi, cfg, mode);
    std::vector<cxd> p(static_cast<size_t>(cfg.M) * cfg.N);
    for (int n = 0; n < cfg.N; ++n)
        for (int m = 0; m < cfg.M; ++m)
            p[static_cast<size_t>(n) * cfg.M + m] = theta.at(m, n) * b[n] * a[m];
    return p;
}

int required_cp_length(const SystemConfig& cfg, double tau_max_s) {
    if (tau_max_s < 0.0) throw std::invalid_argument("required_cp_length: negative tau_max");
    double samples = 0.5 * (cfg.M - 1) * cfg.fractional_bandwidth() + tau_max_s * cfg.f_s_hz;
    return static_cast<int>(std::ceil(samples));
}

double aperture_delay_ts(const SystemConfig& cfg, double theta_rad) {
    return (cfg.M - 1) * cfg.d_over_lambda * std::abs(std::sin(theta_rad)) *
           cfg.fractional_bandwidth();
}

double downlink_map_psi(double psi, const SystemConfig& cfg) {
    return psi * cfg.f_cd_hz / cfg.f_c_hz;
}

double signature_distance(const AngularDelaySignature& a, const AngularDelaySignature& b,
                          const SystemConfig& cfg) {
    if (a.pairs.empty() || b.pairs.empty())
        throw std::invalid_argument("signature_distance: empty signature");
    const double eta = cfg.subcarrier_spacing_hz();
    double best = std::numeric_limits<double>::infinity();
    for (const SignaturePoint& x : a.pairs) {
        for (const SignaturePoint& y : b.pairs) {
            double du = cfg.M * (x.psi - y.psi);
            double dv = cfg.N * eta * (x.tau_s - y.tau_s);
            best = std::min(best, std::hypot(du, dv));
        }
    }
    return best;
}

}  // namespace dualwide
