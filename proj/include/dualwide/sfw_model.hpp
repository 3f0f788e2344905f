// SPDX-License-Identifier: Apache-2.0
//
// Space-frequency wideband channel model for a ULA receiving OFDM uplink.
// The per-path channel is an outer product of a spatial steering vector and
// a frequency (delay) steering vector, multiplied elementwise by a phase
// matrix that captures the frequency dependence of the array response
// ("spatial wideband" / beam squint effect).

#pragma once

#include <vector>

#include "dualwide/types.hpp"

namespace dualwide {

/** a(psi)_m = exp(-j 2 pi m psi), m = 0..M-1. */
std::vector<cxd> spatial_steering(double psi, int M);

/** b(tau)_n = exp(-j 2 pi n eta tau), n = 0..N-1, eta in Hz, tau in seconds. */
std::vector<cxd> frequency_steering(double tau_s, int N, double eta_hz);

/**
 * Squint phase matrix Theta(psi): Theta[m][n] = exp(-j 2 pi m n eta psi / f_c).
 * Under ModelMode::narrowband this collapses to the all-ones matrix.
 */
CxMat phase_shift_matrix(double psi, const SystemConfig& cfg,
                         ModelMode mode = ModelMode::dual_wideband);

/**
 * Channel of a single unit-gain path:
 *   H[m][n] = exp(-j 2 pi (m psi + n eta tau + m n eta psi / f_c)).
 */
SfwChannel path_channel(double psi, double tau_s, const SystemConfig& cfg,
                        ModelMode mode = ModelMode::dual_wideband);

/**
 * Multi-path channel: sum over paths of gain * path_channel(psi_l, tau_l).
 * `link` selects which stored gain (and, for downlink, note the caller is
 * expected to pass a downlink-view config so that psi values match f_c).
 */
SfwChannel assemble_channel(const std::vector<PathParam>& paths, const SystemConfig& cfg,
                            Link link = Link::uplink,
                            ModelMode mode = ModelMode::dual_wideband);

/** As above but from an explicit (signature, gains) pair. */
SfwChannel assemble_channel(const AngularDelaySignature& sig, const std::vector<cxd>& gains,
                            const SystemConfig& cfg,
                            ModelMode mode = ModelMode::dual_wideband);

/**
 * Vectorized single-path response p(psi, tau) = diag(vec(Theta)) (b kron a),
 * laid out column-major (antenna index fastest), length M*N.
 */
std::vector<cxd> basis_vector(double psi, double tau_s, const SystemConfig& cfg,
                              ModelMode mode = ModelMode::dual_wideband);

/**
 * Cyclic-prefix length (in base-rate samples) required to absorb both the
 * array aperture delay spread and the maximum path delay:
 *   N_cp = ceil( (M-1)/2 * f_s/f_c + tau_max * f_s ).
 * The first term uses the worst-case |sin(theta)| = 1 at spacing lambda/2.
 */
int required_cp_length(const SystemConfig& cfg, double tau_max_s);

/**
 * Propagation delay between the first and last antenna for a given arrival
 * angle, expressed in base-rate sample periods: (M-1) d |sin(theta)| / c * f_s.
 */
double aperture_delay_ts(const SystemConfig& cfg, double theta_rad);

/** Downlink spatial frequency of the same physical ray: psi * f_cd / f_c. */
double downlink_map_psi(double psi, const SystemConfig& cfg);

/**
 * Distance between two users' signatures in resolution units:
 * minimum over path pairs of || (M dpsi, N eta dtau) ||_2.  Delays are taken
 * as stored (call after soft grouping to measure guarded separation).
 */
double signature_distance(const AngularDelaySignature& a, const AngularDelaySignature& b,
                          const SystemConfig& cfg);

}  // namespace dualwide
