// SPDX-License-Identifier: Apache-2.0
//
// Time-domain validation path.  An OFDM block is synthesized as an
// oversampled baseband waveform, pushed through fractionally-delayed paths
// per antenna by direct kernel resampling, and demodulated back to
// per-subcarrier coefficients.  None of this shares a code path with the
// analytic channel model, so agreement between the two is evidence that the
// model's delay/phase bookkeeping is right.
//
// Conventions: subcarrier n rides at frequency n * eta (band [0, f_s)); the
// oversampled rate O * f_s leaves that whole band far below Nyquist, which
// is what makes windowed-sinc resampling in the oversampled domain accurate.
// Sample k of a frame corresponds to t = (k/O - n_cp) * T_s: the cyclic
// prefix occupies t < 0 and the demodulation window is t in [0, N*T_s).

#pragma once

#include <vector>

#include "dualwide/types.hpp"

namespace dualwide {

/** Interpolation pulse used for fractional delay. */
enum class PulseKind {
    windowed_sinc,  // Blackman-windowed sinc, near-ideal in-band response
    linear,         // two-tap linear interpolation; memory < one fine sample
};

/**
 * How the transmitted stream continues outside the synthesized frame.
 *   repeated : identical frames back to back (steady-state pilot stream)
 *   cyclic   : the body repeats with no prefix structure (the idealization
 *              assumed by the analytic model); the difference between the
 *              two demodulated outputs measures inter-block effects.
 */
enum class StreamExtension { repeated, cyclic };

struct WaveformConfig {
    int oversample = 16;          // O, fine samples per base-rate sample
    int kernel_half_width = 16;   // windowed-sinc half-width in base symbols
    PulseKind pulse = PulseKind::windowed_sinc;
    int n_cp = 0;                 // cyclic prefix length in base-rate samples

    /** Throws std::invalid_argument on O < 4 or inadequate kernel support. */
    void validate() const;
};

struct BasebandFrame {
    int oversample = 1;
    int n_cp = 0;
    int n_body = 0;                // base-rate samples in the demod window
    std::vector<cxd> samples;      // length oversample * (n_cp + n_body)

    int body_start() const { return oversample * n_cp; }
};

/**
 * One OFDM block: exact band-limited waveform of the symbol vector
 * (oversampled inverse transform) with the cyclic prefix prepended.
 */
BasebandFrame synth_ofdm(const std::vector<cxd>& freq_symbols, const SystemConfig& cfg,
                         const WaveformConfig& wcfg);

/**
 * Receive the transmitted frame at antenna m: every path contributes a copy
 * resampled late by tau + m * psi / f_c seconds and scaled by
 * gain * e^{-j 2 pi m psi}.  Throws "inter-block interference: CP too short"
 * when the array-wide delay budget exceeds wcfg.n_cp, and rejects timing
 * references that put any arrival before t = -n_cp * T_s.
 */
BasebandFrame propagate_to_antenna(const BasebandFrame& frame, const std::vector<PathParam>& paths,
                                   int m, const SystemConfig& cfg, const WaveformConfig& wcfg,
                                   StreamExtension ext = StreamExtension::repeated);

/** CP strip, decimate to base rate, forward transform: per-subcarrier values. */
std::vector<cxd> demodulate(const BasebandFrame& rx, const SystemConfig& cfg,
                            const WaveformConfig& wcfg);

/**
 * Full measured channel: all-ones pilots through synth -> propagate ->
 * demodulate for every antenna.  Rows are antennas, columns subcarriers.
 */
SfwChannel oracle_channel(const std::vector<PathParam>& paths, const SystemConfig& cfg,
                          const WaveformConfig& wcfg);

/**
 * Inter-block interference measure: relative demodulated-energy difference
 * between the repeated-frame stream and the cyclic idealization at antenna
 * m.  Zero (to rounding) when the prefix absorbs the full delay spread and
 * the pulse has no appreciable cross-boundary memory.
 */
double interblock_interference_ratio(const std::vector<PathParam>& paths, int m,
                                     const SystemConfig& cfg, const WaveformConfig& wcfg);

}  // namespace dualwide
