// SPDX-License-Identifier: Apache-2.0

#include "dualwide/waveform_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dualwide/fft.hpp"

namespace dualwide {

namespace {

/** e^{j 2 pi cycles} with the argument reduced before the trig call. */
cxd cis_cycles(double cycles) {
    const double frac = cycles - std::floor(cycles);
    return std::polar(1.0, kTwoPi * frac);
}

double sinc(double x) {
    const double px = kPi * x;
    if (std::abs(px) < 1e-12) return 1.0;
    return std::sin(px) / px;
}

/** Blackman window on [-1, 1], zero outside. */
double blackman(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return 0.42 + 0.5 * std::cos(kPi * u) + 0.08 * std::cos(kTwoPi * u);
}

/**
 * Resampling filter for one path.  Every output sample sits on the integer
 * fine grid, so the fractional part of (output index - delay) is the same
 * for all outputs and the tap values can be computed once: output k reads
 * stream positions k + base .. k + base + taps.size() - 1.
 */
struct ResampleTaps {
    long long base = 0;
    std::vector<double> taps;
};

ResampleTaps make_taps(double delay_fine, const WaveformConfig& wcfg) {
    ResampleTaps rt;
    const double c0 = -delay_fine;  // interpolation point for output k = 0
    if (wcfg.pulse == PulseKind::linear) {
        rt.base = static_cast<long long>(std::floor(c0));
        const double f = c0 - static_cast<double>(rt.base);
        rt.taps = {1.0 - f, f};
        return rt;
    }
    const long long half = static_cast<long long>(wcfg.kernel_half_width) * wcfg.oversample;
    rt.base = static_cast<long long>(std::ceil(c0 - static_cast<double>(half)));
    const long long last = static_cast<long long>(std::floor(c0 + static_cast<double>(half)));
    rt.taps.resize(static_cast<std::size_t>(last - rt.base + 1));
    for (std::size_t s = 0; s < rt.taps.size(); ++s) {
        const double x = c0 - static_cast<double>(rt.base + static_cast<long long>(s));
        rt.taps[s] = sinc(x) * blackman(x / static_cast<double>(half));
    }
    return rt;
}

/** Materialize the periodic source stream over fine positions [j_min, j_max]. */
std::vector<cxd> materialize_stream(const BasebandFrame& frame, StreamExtension ext,
                                    long long j_min, long long j_max) {
    const long long period = static_cast<long long>(frame.samples.size());
    const long long body_start = static_cast<long long>(frame.oversample) * frame.n_cp;
    const long long body_len = static_cast<long long>(frame.oversample) * frame.n_body;
    std::vector<cxd> out(static_cast<std::size_t>(j_max - j_min + 1));
    for (long long j = j_min; j <= j_max; ++j) {
        cxd v;
        if (ext == StreamExtension::repeated) {
            v = frame.samples[static_cast<std::size_t>(detail::imod(j, period))];
        } else {
            const long long r = detail::imod(j - body_start, body_len);
            v = frame.samples[static_cast<std::size_t>(body_start + r)];
        }
        out[static_cast<std::size_t>(j - j_min)] = v;
    }
    return out;
}

}  // namespace

// ===========================================================================
// Configuration checks
// ===========================================================================

void WaveformConfig::validate() const {
    if (oversample < 4) throw std::invalid_argument("waveform: oversampling factor must be at least 4");
    if (kernel_half_width < 1) throw std::invalid_argument("waveform: kernel half-width must be positive");
    if (pulse == PulseKind::windowed_sinc && oversample * kernel_half_width < 32)
        throw std::invalid_argument("waveform: interpolation kernel support too small");
    if (n_cp < 0) throw std::invalid_argument("waveform: cyclic prefix length must be non-negative");
}

// ===========================================================================
// Synthesis
// ===========================================================================

BasebandFrame synth_ofdm(const std::vector<cxd>& freq_symbols, const SystemConfig& cfg,
                         const WaveformConfig& wcfg) {
    cfg.validate();
    wcfg.validate();
    const int n = cfg.N;
    if (static_cast<int>(freq_symbols.size()) != n)
        throw std::invalid_argument("synth_ofdm: expected one symbol per subcarrier");

    const int o = wcfg.oversample;
    // Fine-grid body samples: evaluate (1/N) sum_n x[n] e^{+j 2 pi n k /(O N)}
    // exactly with a zero-extended inverse transform.  Subcarrier n keeps its
    // own frequency n * eta; nothing is folded to negative frequencies.
    std::vector<cxd> body(static_cast<std::size_t>(o) * n, cxd(0.0, 0.0));
    std::copy(freq_symbols.begin(), freq_symbols.end(), body.begin());
    FftPlan plan(o * n);
    plan.inverse_unnormalized(body.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (cxd& v : body) v *= scale;

    BasebandFrame frame;
    frame.oversample = o;
    frame.n_cp = wcfg.n_cp;
    frame.n_body = n;
    frame.samples.resize(static_cast<std::size_t>(o) * static_cast<std::size_t>(wcfg.n_cp + n));
    const std::size_t cp_fine = static_cast<std::size_t>(o) * static_cast<std::size_t>(wcfg.n_cp);
    // Prefix = tail of the body, i.e. the waveform on t in [-T_cp, 0).
    std::copy(body.end() - static_cast<std::ptrdiff_t>(cp_fine), body.end(), frame.samples.begin());
    std::copy(body.begin(), body.end(), frame.samples.begin() + static_cast<std::ptrdiff_t>(cp_fine));
    return frame;
}

// ===========================================================================
// Propagation
// ===========================================================================

BasebandFrame propagate_to_antenna(const BasebandFrame& frame, const std::vector<PathParam>& paths,
                                   int m, const SystemConfig& cfg, const WaveformConfig& wcfg,
                                   StreamExtension ext) {
    cfg.validate();
    wcfg.validate();
    if (m < 0 || m >= cfg.M)
        throw std::invalid_argument("propagate_to_antenna: antenna index out of range");
    if (frame.oversample != wcfg.oversample || frame.n_cp != wcfg.n_cp || frame.n_body != cfg.N)
        throw std::invalid_argument("propagate_to_antenna: frame does not match configuration");

    const double ts = cfg.symbol_period_s();
    const int o = wcfg.oversample;
    const long long total = static_cast<long long>(frame.samples.size());

    // Array-wide timing checks, independent of which antenna is requested:
    // the latest arrival anywhere on the array must clear the prefix, and
    // the earliest must not precede the prefix start.
    for (const PathParam& p : paths) {
        const double across = static_cast<double>(cfg.M - 1) * p.psi / cfg.f_c_hz;
        const double latest = p.tau_s + std::max(0.0, across);
        const double earliest = p.tau_s + std::min(0.0, across);
        if (static_cast<long long>(std::ceil(latest / ts)) > wcfg.n_cp)
            throw std::runtime_error("inter-block interference: CP too short");
        if (earliest < 0.0)
            throw std::invalid_argument(
                "propagate_to_antenna: arrival before the timing reference; delay the paths");
    }

    // Tap sets and the combined stream span they need.
    std::vector<ResampleTaps> taps(paths.size());
    std::vector<cxd> amp(paths.size());
    long long j_min = 0;
    long long j_max = total - 1;
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const PathParam& p = paths[l];
        const double delay_s = p.tau_s + static_cast<double>(m) * p.psi / cfg.f_c_hz;
        taps[l] = make_taps(delay_s * cfg.f_s_hz * o, wcfg);
        amp[l] = p.gain_ul * cis_cycles(-static_cast<double>(m) * p.psi);
        j_min = std::min(j_min, taps[l].base);
        j_max = std::max(j_max, total - 1 + taps[l].base +
                                    static_cast<long long>(taps[l].taps.size()) - 1);
    }
    const std::vector<cxd> stream = materialize_stream(frame, ext, j_min, j_max);

    BasebandFrame out = frame;
    std::fill(out.samples.begin(), out.samples.end(), cxd(0.0, 0.0));
    for (std::size_t l = 0; l < paths.size(); ++l) {
        const std::vector<double>& h = taps[l].taps;
        const long long off = taps[l].base - j_min;
        for (long long k = 0; k < total; ++k) {
            const cxd* src = stream.data() + static_cast<std::size_t>(k + off);
            cxd acc(0.0, 0.0);
            for (std::size_t s = 0; s < h.size(); ++s) acc += src[s] * h[s];
            out.samples[static_cast<std::size_t>(k)] += amp[l] * acc;
        }
    }
    return out;
}

// ===========================================================================
// Demodulation
// ===========================================================================

std::vector<cxd> demodulate(const BasebandFrame& rx, const SystemConfig& cfg,
                            const WaveformConfig& wcfg) {
    if (rx.oversample != wcfg.oversample || rx.n_body != cfg.N)
        throw std::invalid_argument("demodulate: frame does not match configuration");
    const int o = rx.oversample;
    std::vector<cxd> u(static_cast<std::size_t>(cfg.N));
    for (int r = 0; r < cfg.N; ++r)
        u[static_cast<std::size_t>(r)] =
            rx.samples[static_cast<std::size_t>(rx.body_start() + o * r)];
    FftPlan plan(cfg.N);
    plan.forward(u.data());
    return u;
}

// ===========================================================================
// Whole-array measurement
// ===========================================================================

SfwChannel oracle_channel(const std::vector<PathParam>& paths, const SystemConfig& cfg,
                          const WaveformConfig& wcfg) {
    const std::vector<cxd> pilots(static_cast<std::size_t>(cfg.N), cxd(1.0, 0.0));
    const BasebandFrame tx = synth_ofdm(pilots, cfg, wcfg);

    SfwChannel ch;
    ch.h = CxMat(cfg.M, cfg.N);
#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < cfg.M; ++m) {
        const BasebandFrame rx = propagate_to_antenna(tx, paths, m, cfg, wcfg);
        const std::vector<cxd> row = demodulate(rx, cfg, wcfg);
        for (int n = 0; n < cfg.N; ++n) ch.h.at(m, n) = row[static_cast<std::size_t>(n)];
    }
    return ch;
}

double interblock_interference_ratio(const std::vector<PathParam>& paths, int m,
                                     const SystemConfig& cfg, const WaveformConfig& wcfg) {
    const std::vector<cxd> pilots(static_cast<std::size_t>(cfg.N), cxd(1.0, 0.0));
    const BasebandFrame tx = synth_ofdm(pilots, cfg, wcfg);
    const BasebandFrame rep = propagate_to_antenna(tx, paths, m, cfg, wcfg, StreamExtension::repeated);
    const BasebandFrame cyc = propagate_to_antenna(tx, paths, m, cfg, wcfg, StreamExtension::cyclic);
    const std::vector<cxd> d_rep = demodulate(rep, cfg, wcfg);
    const std::vector<cxd> d_cyc = demodulate(cyc, cfg, wcfg);
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < d_cyc.size(); ++i) {
        diff += std::norm(d_rep[i] - d_cyc[i]);
        ref += std::norm(d_cyc[i]);
    }
    if (ref == 0.0) return 0.0;
    return diff / ref;
}

}  // namespace dualwide
