// SPDX-License-Identifier: Apache-2.0

#include "dualwide/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace dualwide {

namespace {
inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline cxd unit(double cycles) {  // exp(-j 2 pi cycles)
    double f = cycles - std::floor(cycles);
    return std::polar(1.0, -kTwoPi * f);
}
}  // namespace

FftPlan::FftPlan(int n) : n_(n), pow2_(is_pow2(n)) {
    if (n < 1) throw std::invalid_argument("FftPlan: length must be positive");
    if (pow2_) {
        bitrev_.resize(n);
        int log2n = 0;
        while ((1 << log2n) < n) ++log2n;
        for (int i = 0; i < n; ++i) {
            int r = 0;
            for (int b = 0; b < log2n; ++b)
                if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
            bitrev_[i] = r;
        }
        // Per-stage twiddles: stage with butterfly span `len` needs len/2 factors.
        for (int len = 2; len <= n; len <<= 1)
            for (int k = 0; k < len / 2; ++k)
                stage_tw_.push_back(unit(static_cast<double>(k) / len));
    } else {
        direct_tw_.resize(n);
        for (int q = 0; q < n; ++q) direct_tw_[q] = unit(static_cast<double>(q) / n);
    }
}

void FftPlan::run(cxd* x, bool inverse) const {
    if (n_ == 1) return;
    if (pow2_) {
        for (int i = 0; i < n_; ++i) {
            int j = bitrev_[i];
            if (i < j) std::swap(x[i], x[j]);
        }
        const cxd* tw = stage_tw_.data();
        for (int len = 2; len <= n_; len <<= 1) {
            const int half = len / 2;
            for (int base = 0; base < n_; base += len) {
                for (int k = 0; k < half; ++k) {
                    cxd w = inverse ? std::conj(tw[k]) : tw[k];
                    cxd u = x[base + k];
                    cxd v = x[base + k + half] * w;
                    x[base + k] = u + v;
                    x[base + k + half] = u - v;
                }
            }
            tw += half;
        }
    } else {
        std::vector<cxd> out(static_cast<size_t>(n_));
        for (int k = 0; k < n_; ++k) {
            cxd s{0.0, 0.0};
            long long idx = 0;
            for (int m = 0; m < n_; ++m) {
                cxd w = direct_tw_[static_cast<size_t>(idx)];
                s += x[m] * (inverse ? std::conj(w) : w);
                idx += k;
                if (idx >= n_) idx -= n_;
            }
            out[k] = s;
        }
        for (int i = 0; i < n_; ++i) x[i] = out[i];
    }
}

}  // namespace dualwide
