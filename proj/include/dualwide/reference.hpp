// SPDX-License-Identifier: Apache-2.0
//
// Slow, obviously-correct reference implementations.  These are serial,
// allocate freely, and evaluate definitions directly (explicit DFT matrix
// products, per-entry trigonometry, explicit double sums).  They exist to
// validate the optimized kernels in the main library and to serve as the
// baseline in the kernel benchmark; production code must not call them.

#pragma once

#include <vector>

#include "dualwide/types.hpp"

namespace dualwide::reference {

/** G = F_M^H H F_N^* evaluated as explicit matrix products, O(M^2 N^2). */
AngularDelayGrid to_angular_delay_explicit(const SfwChannel& h);

/** H = F_M G F_N^T evaluated as explicit matrix products. */
SfwChannel from_angular_delay_explicit(const AngularDelayGrid& g);

/** Multi-path channel assembled entry by entry with std::polar phases. */
SfwChannel assemble_channel_serial(const std::vector<PathParam>& paths, const SystemConfig& cfg,
                                   Link link = Link::uplink,
                                   ModelMode mode = ModelMode::dual_wideband);

/**
 * p(s1)^H p(s2) evaluated as the explicit double sum over (m, n) of the
 * per-entry phase difference, without building either basis vector.
 */
cxd inner_product_direct(const SignaturePoint& s1, const SignaturePoint& s2,
                         const SystemConfig& cfg, ModelMode mode = ModelMode::dual_wideband);

/**
 * The concentration objective computed by the long route: rotate the
 * channel for the candidate (psi, tau), run the full 2D transform, and read
 * |entry| at the candidate's grid indices.
 */
double objective_via_transform(const SfwChannel& h, double psi, double tau_s,
                               const SystemConfig& cfg,
                               ModelMode mode = ModelMode::dual_wideband);

}  // namespace dualwide::reference
