// SPDX-License-Identifier: Apache-2.0

#include "dualwide/reference.hpp"

#include <cmath>

#include "dualwide/angular_delay.hpp"

namespace dualwide::reference {

namespace {

/** Normalized DFT matrix [F_K]_{p,q} = exp(-j 2 pi p q / K) / sqrt(K). */
CxMat dft_matrix(int K) {
    CxMat f(K, K);
    const double root = 1.0 / std::sqrt(static_cast<double>(K));
    for (int q = 0; q < K; ++q)
        for (int p = 0; p < K; ++p) {
            double cycles = static_cast<double>(p) * q / K;
            cycles -= std::floor(cycles);
            f.at(p, q) = std::polar(root, -kTwoPi * cycles);
        }
    return f;
}

CxMat matmul(const CxMat& a, const CxMat& b, bool conj_a, bool transpose_a,
             bool conj_b, bool transpose_b) {
    const int ar = transpose_a ? a.cols : a.rows;
    const int ac = transpose_a ? a.rows : a.cols;
    const int bc = transpose_b ? b.rows : b.cols;
    CxMat out(ar, bc);
    for (int i = 0; i < ar; ++i)
        for (int j = 0; j < bc; ++j) {
            cxd s{0.0, 0.0};
            for (int k = 0; k < ac; ++k) {
                cxd x = transpose_a ? a.at(k, i) : a.at(i, k);
                cxd y = transpose_b ? b.at(j, k) : b.at(k, j);
                if (conj_a) x = std::conj(x);
                if (conj_b) y = std::conj(y);
                s += x * y;
            }
            out.at(i, j) = s;
        }
    return out;
}

}  // namespace

AngularDelayGrid to_angular_delay_explicit(const SfwChannel& h) {
    const CxMat fm = dft_matrix(h.h.rows);
    const CxMat fn = dft_matrix(h.h.cols);
    // G = F_M^H H F_N^*
    CxMat left = matmul(fm, h.h, /*conj_a=*/true, /*transpose_a=*/true, false, false);
    AngularDelayGrid g;
    g.g = matmul(left, fn, false, false, /*conj_b=*/true, /*transpose_b=*/false);
    return g;
}

SfwChannel from_angular_delay_explicit(const AngularDelayGrid& g) {
    const CxMat fm = dft_matrix(g.g.rows);
    const CxMat fn = dft_matrix(g.g.cols);
    // H = F_M G F_N^T
    CxMat left = matmul(fm, g.g, false, false, false, false);
    SfwChannel h;
    h.h = matmul(left, fn, false, false, /*conj_b=*/false, /*transpose_b=*/true);
    return h;
}

SfwChannel assemble_channel_serial(const std::vector<PathParam>& paths, const SystemConfig& cfg,
                                   Link link, ModelMode mode) {
    SfwChannel h(cfg.M, cfg.N);
    const double eta = cfg.subcarrier_spacing_hz();
    for (const PathParam& p : paths) {
        const double squint = (mode == ModelMode::dual_wideband) ? p.psi * eta / cfg.f_c_hz : 0.0;
        for (int n = 0; n < cfg.N; ++n)
            for (int m = 0; m < cfg.M; ++m) {
                double cycles = m * p.psi + n * eta * p.tau_s + static_cast<double>(m) * n * squint;
                cycles -= std::floor(cycles);
                h.h.at(m, n) += p.gain(link) * std::polar(1.0, -kTwoPi * cycles);
            }
    }
    return h;
}

cxd inner_product_direct(const SignaturePoint& s1, const SignaturePoint& s2,
                         const SystemConfig& cfg, ModelMode mode) {
    const double eta = cfg.subcarrier_spacing_hz();
    const double dpsi = s2.psi - s1.psi;
    const double dtau = s2.tau_s - s1.tau_s;
    const double dsq = (mode == ModelMode::dual_wideband) ? dpsi * eta / cfg.f_c_hz : 0.0;
    cxd total{0.0, 0.0};
    for (int n = 0; n < cfg.N; ++n)
        for (int m = 0; m < cfg.M; ++m) {
            double cycles = m * dpsi + n * eta * dtau + static_cast<double>(m) * n * dsq;
            cycles -= std::floor(cycles);
            total += std::polar(1.0, -kTwoPi * cycles);
        }
    return total;
}

double objective_via_transform(const SfwChannel& h, double psi, double tau_s,
                               const SystemConfig& cfg, ModelMode mode) {
    const RotationParams rp = grid_and_residual(psi, tau_s, cfg);
    const double psi_comp = (mode == ModelMode::dual_wideband) ? psi : 0.0;
    SfwChannel rotated = angular_delay_rotate(h, psi_comp, rp.delta_psi, rp.delta_tau, cfg);
    AngularDelayGrid g = to_angular_delay(rotated);
    return std::abs(g.g.at(rp.psi_index, rp.tau_index));
}

}  // namespace dualwide::reference
