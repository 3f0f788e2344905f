// SPDX-License-Identifier: Apache-2.0

#include "dualwide/angular_delay.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dualwide/fft.hpp"

namespace dualwide {

namespace {

inline cxd cis(double radians) { return std::polar(1.0, radians); }

inline cxd cis_cycles(double cycles) {
    double f = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * f);
}

enum class Dir { forward, inverse };

/** Transform every column (contiguous) in place. */
void transform_cols(CxMat& x, const FftPlan& plan, Dir dir) {
#pragma omp parallel for schedule(static)
    for (int n = 0; n < x.cols; ++n) {
        cxd* col = x.data.data() + static_cast<size_t>(n) * x.rows;
        if (dir == Dir::forward)
            plan.forward(col);
        else
            plan.inverse_unnormalized(col);
    }
}

/** Transform every row (strided) in place via a scratch buffer. */
void transform_rows(CxMat& x, const FftPlan& plan, Dir dir) {
#pragma omp parallel for schedule(static)
    for (int m = 0; m < x.rows; ++m) {
        std::vector<cxd> row(static_cast<size_t>(x.cols));
        for (int n = 0; n < x.cols; ++n) row[n] = x.at(m, n);
        if (dir == Dir::forward)
            plan.forward(row.data());
        else
            plan.inverse_unnormalized(row.data());
        for (int n = 0; n < x.cols; ++n) x.at(m, n) = row[n];
    }
}

void scale(CxMat& x, double s) {
    for (cxd& v : x.data) v *= s;
}

}  // namespace

AngularDelayGrid to_angular_delay(const SfwChannel& h) {
    AngularDelayGrid g;
    g.g = h.h;
    FftPlan pm(g.g.rows), pn(g.g.cols);
    transform_cols(g.g, pm, Dir::inverse);
    transform_rows(g.g, pn, Dir::inverse);
    scale(g.g, 1.0 / std::sqrt(static_cast<double>(g.g.rows) * g.g.cols));
    return g;
}

SfwChannel from_angular_delay(const AngularDelayGrid& g) {
    SfwChannel h;
    h.h = g.g;
    FftPlan pm(h.h.rows), pn(h.h.cols);
    transform_cols(h.h, pm, Dir::forward);
    transform_rows(h.h, pn, Dir::forward);
    scale(h.h, 1.0 / std::sqrt(static_cast<double>(h.h.rows) * h.h.cols));
    return h;
}

RotationParams grid_and_residual(double psi, double tau_s, const SystemConfig& cfg) {
    RotationParams rp;
    const double x = cfg.M * psi;                                   // angular bins
    const double y = cfg.N * cfg.subcarrier_spacing_hz() * tau_s;   // delay bins
    const long long rx = detail::round_half_up(x);
    const long long ry = detail::round_half_up(y);
    rp.psi_index = detail::imod(static_cast<int>(rx % cfg.M), cfg.M);
    rp.tau_index = detail::imod(static_cast<int>(ry % cfg.N), cfg.N);
    rp.delta_psi = kTwoPi * (x - rx) / cfg.M;
    rp.delta_tau = kTwoPi * (y - ry) / cfg.N;
    return rp;
}

SfwChannel angular_delay_rotate(const SfwChannel& h, double psi_comp, double delta_psi,
                                double delta_tau, const SystemConfig& cfg) {
    const int M = h.h.rows;
    const int N = h.h.cols;
    SfwChannel out(M, N);
    const double squint = psi_comp * cfg.subcarrier_spacing_hz() / cfg.f_c_hz;
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        // Entry: h[m][n] * e^{j m delta_psi} * e^{+j 2 pi m n squint} * e^{j n delta_tau}
        cxd acc = cis(delta_tau * n);
        const cxd step = cis(delta_psi) * cis_cycles(squint * n);
        const cxd* src = h.h.data.data() + static_cast<size_t>(n) * M;
        cxd* dst = out.h.data.data() + static_cast<size_t>(n) * M;
        for (int m = 0; m < M; ++m) {
            dst[m] = src[m] * acc;
            acc *= step;
        }
    }
    return out;
}

SupportRegion support_region(double psi, double tau_s, const SystemConfig& cfg) {
    const double ratio = cfg.fractional_bandwidth();
    if (!(ratio * cfg.d_over_lambda < 1.0) || !((cfg.M - 1) * ratio / (2.0 * cfg.N) < 1.0))
        throw std::domain_error(
            "support_region: sparsity preconditions violated "
            "(fractional bandwidth too large for this array/grid size)");
    SupportRegion r;
    const RotationParams rp = grid_and_residual(psi, tau_s, cfg);
    r.row_anchor = rp.psi_index;
    r.col_anchor = rp.tau_index;
    r.side = std::max(1, static_cast<int>(std::ceil(ratio * std::abs(psi) * cfg.M)));
    r.side = std::min(r.side, std::min(cfg.M, cfg.N));
    r.dir = psi >= 0.0 ? +1 : -1;
    r.rows = cfg.M;
    r.cols = cfg.N;
    return r;
}

cxd basis_correlation(const SfwChannel& h, double psi, double tau_s, const SystemConfig& cfg,
                      ModelMode mode) {
    return basis_correlation(h.h, psi, tau_s, cfg, mode);
}

cxd basis_correlation(const CxMat& h, double psi, double tau_s, const SystemConfig& cfg,
                      ModelMode mode) {
    const int M = h.rows;
    const int N = h.cols;
    const double eta = cfg.subcarrier_spacing_hz();
    const double squint = (mode == ModelMode::dual_wideband) ? psi * eta / cfg.f_c_hz : 0.0;
    // p^H vec(h) = sum_n e^{+j 2 pi n eta tau} sum_m e^{+j 2 pi (m psi + m n squint)} h[m][n]
    cxd total{0.0, 0.0};
    const cxd tau_step = cis_cycles(eta * tau_s);
    cxd tau_rot{1.0, 0.0};
    for (int n = 0; n < N; ++n) {
        const cxd* col = h.data.data() + static_cast<size_t>(n) * M;
        const cxd step = cis_cycles(psi + squint * n);
        cxd rot{1.0, 0.0};
        cxd dot{0.0, 0.0};
        for (int m = 0; m < M; ++m) {
            dot += col[m] * rot;
            rot *= step;
        }
        total += dot * tau_rot;
        tau_rot *= tau_step;
    }
    return total;
}

double concentration_objective(const SfwChannel& h_hat, double psi, double tau_s,
                               const SystemConfig& cfg, ModelMode mode) {
    return std::abs(basis_correlation(h_hat, psi, tau_s, cfg, mode)) /
           std::sqrt(static_cast<double>(h_hat.h.rows) * h_hat.h.cols);
}

void write_grid_magnitude_csv(const AngularDelayGrid& g, std::ostream& os) {
    for (int i = 0; i < g.g.rows; ++i) {
        for (int k = 0; k < g.g.cols; ++k) {
            if (k) os << ',';
            os << std::abs(g.g.at(i, k));
        }
        os << '\n';
    }
}

}  // namespace dualwide
