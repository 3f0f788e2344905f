// SPDX-License-Identifier: Apache-2.0
//
// Angular-delay domain machinery: the unitary 2D DFT pair taking a
// space-frequency channel to its sparse angular-delay image, the rotation
// that concentrates an off-grid path onto a single bin, the per-path
// support-region predicate, and the concentration objective maximized by
// the signature search.

#pragma once

#include <iosfwd>

#include "dualwide/types.hpp"

namespace dualwide {

/**
 * G = F_M^H H F_N^* with F_K the normalized DFT matrix
 * [F_K]_{p,q} = exp(-j 2 pi p q / K) / sqrt(K).  Unitary: ||G|| = ||H||.
 */
AngularDelayGrid to_angular_delay(const SfwChannel& h);

/** Inverse of to_angular_delay: H = F_M G F_N^T. */
SfwChannel from_angular_delay(const AngularDelayGrid& g);

/** Nearest angular/delay grid indices and phase residuals for a path. */
RotationParams grid_and_residual(double psi, double tau_s, const SystemConfig& cfg);

/**
 * Rotated channel  H^r = Psi_M(delta_psi) (H o Theta*(psi_comp)) Psi_N(delta_tau)
 * where Psi_K(d) = diag(1, e^{jd}, ..., e^{j(K-1)d}).  Implemented as an
 * elementwise phase multiply.  When (psi_comp, delta_psi, delta_tau) come
 * from grid_and_residual of a single path, the rotated channel's
 * angular-delay image is exactly one nonzero bin of value sqrt(MN) * gain.
 */
SfwChannel angular_delay_rotate(const SfwChannel& h, double psi_comp, double delta_psi,
                                double delta_tau, const SystemConfig& cfg);

/**
 * Index square in the angular-delay grid containing (nearly all of) a
 * path's energy: side = max(1, ceil(f_s/f_c * |psi| * M)) bins per axis,
 * anchored at the path's grid indices and extending forward for psi >= 0,
 * backward for psi < 0 (wrap-around).  Throws std::domain_error when the
 * sparsity preconditions (f_s/f_c * d/lambda < 1 and
 * (M-1)/(2N) * f_s/f_c < 1) do not hold.
 */
SupportRegion support_region(double psi, double tau_s, const SystemConfig& cfg);

/**
 * Raw basis correlation p(psi, tau)^H vec(h), evaluated in O(MN) without
 * forming the basis vector.  The concentration objective and the gain
 * read-off are both thin wrappers over this value.
 */
cxd basis_correlation(const SfwChannel& h, double psi, double tau_s, const SystemConfig& cfg,
                      ModelMode mode = ModelMode::dual_wideband);
cxd basis_correlation(const CxMat& h, double psi, double tau_s, const SystemConfig& cfg,
                      ModelMode mode = ModelMode::dual_wideband);

/**
 * |entry (psi_index, tau_index) of the rotated angular-delay image| for the
 * candidate (psi, tau); equals |basis_correlation| / sqrt(MN).  Peaks at
 * sqrt(MN)|gain| when (psi, tau) hits a lone path exactly.
 */
double concentration_objective(const SfwChannel& h_hat, double psi, double tau_s,
                               const SystemConfig& cfg,
                               ModelMode mode = ModelMode::dual_wideband);

/** Debug dump of |G| as CSV (row = angular bin, column = delay bin). */
void write_grid_magnitude_csv(const AngularDelayGrid& g, std::ostream& os);

}  // namespace dualwide
