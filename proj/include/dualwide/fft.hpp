// SPDX-License-Identifier: Apache-2.0
//
// Minimal self-contained DFT support: an iterative radix-2 FFT for
// power-of-two lengths and a precomputed-twiddle direct DFT otherwise.
// Plans are immutable after construction and safe to share across threads.

#pragma once

#include <vector>

#include "dualwide/types.hpp"

namespace dualwide {

class FftPlan {
  public:
    explicit FftPlan(int n);

    int size() const { return n_; }

    /** In-place X[k] = sum_m x[m] exp(-j 2 pi m k / n). */
    void forward(cxd* x) const { run(x, false); }

    /** In-place x[m] = sum_k X[k] exp(+j 2 pi m k / n) (no 1/n factor). */
    void inverse_unnormalized(cxd* x) const { run(x, true); }

  private:
    void run(cxd* x, bool inverse) const;

    int n_ = 0;
    bool pow2_ = false;
    std::vector<int> bitrev_;       // radix-2 permutation (empty for direct path)
    std::vector<cxd> stage_tw_;     // concatenated per-stage forward twiddles
    std::vector<cxd> direct_tw_;    // length-n forward twiddle table (direct path)
};

}  // namespace dualwide
