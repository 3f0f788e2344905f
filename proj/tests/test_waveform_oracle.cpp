// SPDX-License-Identifier: Apache-2.0
//
// Tests for the time-domain validation path: OFDM synthesis, fractional
// delay propagation, demodulation, the assembled antenna-by-subcarrier
// measurement, and the repeated-vs-cyclic inter-block comparison.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "dualwide/rng.hpp"
#include "dualwide/sfw_model.hpp"
#include "dualwide/waveform_oracle.hpp"

using namespace dualwide;

namespace {

SystemConfig oracle_cfg(int m = 4, int n = 32) {
    SystemConfig cfg;
    cfg.M = m;
    cfg.N = n;
    cfg.d_over_lambda = 0.5;
    cfg.f_c_hz = 10e9;
    cfg.f_cd_hz = 10e9;
    cfg.f_s_hz = 1e9;
    cfg.n_cp = 8;
    cfg.validate();
    return cfg;
}

WaveformConfig oracle_wcfg(int oversample = 8, int n_cp = 8) {
    WaveformConfig w;
    w.oversample = oversample;
    w.kernel_half_width = 16;
    w.pulse = PulseKind::windowed_sinc;
    w.n_cp = n_cp;
    return w;
}

std::vector<cxd> random_symbols(int n, uint64_t seed) {
    Rng rng(seed);
    std::vector<cxd> x(static_cast<size_t>(n));
    for (cxd& v : x) v = rng.cnormal(1.0);
    return x;
}

double nmse(const CxMat& est, const CxMat& ref) {
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < ref.data.size(); ++i) {
        num += std::norm(est.data[i] - ref.data[i]);
        den += std::norm(ref.data[i]);
    }
    return num / den;
}

}  // namespace

TEST_CASE("waveform configuration validation") {
    WaveformConfig w = oracle_wcfg();
    CHECK_NOTHROW(w.validate());
    w.oversample = 3;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w = oracle_wcfg();
    w.kernel_half_width = 0;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w = oracle_wcfg(4);
    w.kernel_half_width = 4;  // 16-tap support: too small for the sinc pulse
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
    w.pulse = PulseKind::linear;  // short pulse has no support requirement
    CHECK_NOTHROW(w.validate());
    w = oracle_wcfg();
    w.n_cp = -1;
    CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}

TEST_CASE("synthesis shapes, zero input, and symbol count validation") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const BasebandFrame f = synth_ofdm(std::vector<cxd>(32, cxd{0.0, 0.0}), cfg, w);
    CHECK(f.oversample == w.oversample);
    CHECK(f.n_cp == w.n_cp);
    CHECK(f.n_body == cfg.N);
    CHECK(f.samples.size() == static_cast<size_t>(w.oversample) * (w.n_cp + cfg.N));
    CHECK(f.body_start() == w.oversample * w.n_cp);
    for (const cxd& v : f.samples) CHECK(std::abs(v) == 0.0);

    CHECK_THROWS_AS(synth_ofdm(std::vector<cxd>(31), cfg, w), std::invalid_argument);
}

TEST_CASE("a single subcarrier synthesizes as one complex tone") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const int q = 5;
    std::vector<cxd> x(static_cast<size_t>(cfg.N), cxd{0.0, 0.0});
    x[q] = cxd{1.0, 0.0};
    const BasebandFrame f = synth_ofdm(x, cfg, w);
    // Body sample k is (1/N) e^{+j 2 pi q k / (O N)}; the prefix continues
    // the same tone through negative time.
    const int o = w.oversample;
    for (int k : {0, 1, 7, o * cfg.N / 2, o * cfg.N - 1}) {
        const cxd want =
            std::polar(1.0 / cfg.N, kTwoPi * q * k / static_cast<double>(o * cfg.N));
        CHECK(std::abs(f.samples[static_cast<size_t>(f.body_start() + k)] - want) < 1e-12);
    }
    for (const cxd& v : f.samples)
        CHECK(std::abs(v) == doctest::Approx(1.0 / cfg.N).epsilon(1e-12));
}

TEST_CASE("fine-grid body energy matches the symbol energy (Parseval)") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const std::vector<cxd> x = random_symbols(cfg.N, 3);
    const BasebandFrame f = synth_ofdm(x, cfg, w);
    double body = 0.0;
    for (size_t k = static_cast<size_t>(f.body_start()); k < f.samples.size(); ++k)
        body += std::norm(f.samples[k]);
    double sym = 0.0;
    for (const cxd& v : x) sym += std::norm(v);
    CHECK(body / w.oversample == doctest::Approx(sym / cfg.N).epsilon(1e-12));
}

TEST_CASE("demodulation inverts synthesis exactly") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const std::vector<cxd> x = random_symbols(cfg.N, 4);
    const BasebandFrame f = synth_ofdm(x, cfg, w);
    const std::vector<cxd> back = demodulate(f, cfg, w);
    REQUIRE(back.size() == x.size());
    for (size_t n = 0; n < x.size(); ++n) CHECK(std::abs(back[n] - x[n]) < 1e-12);
}

TEST_CASE("zero-delay broadside path is a pure complex scale") {
    const SystemConfig cfg = oracle_cfg();
    const cxd alpha{0.8, -0.3};
    const PathParam p = make_path(cfg, 0.0, 0.0, alpha, alpha);
    const std::vector<cxd> x = random_symbols(cfg.N, 5);
    for (PulseKind pulse : {PulseKind::windowed_sinc, PulseKind::linear}) {
        WaveformConfig w = oracle_wcfg();
        w.pulse = pulse;
        const BasebandFrame tx = synth_ofdm(x, cfg, w);
        const BasebandFrame rx = propagate_to_antenna(tx, {p}, 0, cfg, w);
        for (size_t k = 0; k < tx.samples.size(); ++k)
            CHECK(std::abs(rx.samples[k] - alpha * tx.samples[k]) < 1e-12);
    }
}

TEST_CASE("integer-symbol delay is an exact cyclic frequency ramp") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const int d = 3;
    const double ts = cfg.symbol_period_s();
    const PathParam p = make_path(cfg, 0.0, d * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0});
    const std::vector<cxd> x = random_symbols(cfg.N, 6);
    const BasebandFrame tx = synth_ofdm(x, cfg, w);
    const BasebandFrame rx = propagate_to_antenna(tx, {p}, 0, cfg, w);
    const std::vector<cxd> got = demodulate(rx, cfg, w);
    for (int n = 0; n < cfg.N; ++n) {
        const cxd ramp = std::polar(1.0, -kTwoPi * d * n / static_cast<double>(cfg.N));
        CHECK(std::abs(got[static_cast<size_t>(n)] - x[static_cast<size_t>(n)] * ramp) < 1e-10);
    }
    // The same ramp is the model's frequency steering vector for this delay.
    const std::vector<cxd> b = frequency_steering(d * ts, cfg.N, cfg.subcarrier_spacing_hz());
    for (int n = 0; n < cfg.N; ++n) {
        const cxd ramp = std::polar(1.0, -kTwoPi * d * n / static_cast<double>(cfg.N));
        CHECK(std::abs(b[static_cast<size_t>(n)] - ramp) < 1e-12);
    }
}

TEST_CASE("propagation is linear in the path set") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const double ts = cfg.symbol_period_s();
    const PathParam p1 = make_path(cfg, 0.4, 1.3 * ts, cxd{1.0, 0.2}, cxd{1.0, 0.0});
    const PathParam p2 = make_path(cfg, -0.7, 4.8 * ts, cxd{-0.5, 0.9}, cxd{1.0, 0.0});
    const BasebandFrame tx = synth_ofdm(random_symbols(cfg.N, 7), cfg, w);
    const BasebandFrame both = propagate_to_antenna(tx, {p1, p2}, 2, cfg, w);
    const BasebandFrame a = propagate_to_antenna(tx, {p1}, 2, cfg, w);
    const BasebandFrame b = propagate_to_antenna(tx, {p2}, 2, cfg, w);
    for (size_t k = 0; k < both.samples.size(); ++k)
        CHECK(std::abs(both.samples[k] - (a.samples[k] + b.samples[k])) < 1e-12);
}

TEST_CASE("measured channel matches the analytic model on fractional delays") {
    const SystemConfig cfg = oracle_cfg(4, 32);
    const WaveformConfig w = oracle_wcfg(8);
    const double ts = cfg.symbol_period_s();
    const std::vector<PathParam> paths = {
        make_path(cfg, 0.9, 2.3 * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0}),
        make_path(cfg, -0.4, 5.71 * ts, cxd{0.3, -0.8}, cxd{1.0, 0.0}),
    };
    const SfwChannel measured = oracle_channel(paths, cfg, w);
    const SfwChannel model = assemble_channel(paths, cfg);
    CHECK(nmse(measured.h, model.h) < 1e-3);
}

TEST_CASE("measured channel is deterministic across calls") {
    const SystemConfig cfg = oracle_cfg(3, 32);
    const WaveformConfig w = oracle_wcfg(8);
    const double ts = cfg.symbol_period_s();
    const std::vector<PathParam> paths = {
        make_path(cfg, 0.5, 1.9 * ts, cxd{0.7, 0.1}, cxd{1.0, 0.0})};
    const SfwChannel a = oracle_channel(paths, cfg, w);
    const SfwChannel b = oracle_channel(paths, cfg, w);
    for (size_t i = 0; i < a.h.data.size(); ++i) CHECK(a.h.data[i] == b.h.data[i]);
}

TEST_CASE("rank-one structure emerges in the narrowband limit") {
    SystemConfig cfg = oracle_cfg(4, 16);
    cfg.f_c_hz = 1e15;  // fractional bandwidth 1e-6: squint vanishes
    cfg.f_cd_hz = cfg.f_c_hz;
    cfg.validate();
    const WaveformConfig w = oracle_wcfg(8);
    const double ts = cfg.symbol_period_s();
    const PathParam p = make_path(cfg, 0.8, 2.5 * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0});
    const SfwChannel h = oracle_channel({p}, cfg, w);
    // Every column is the same spatial steering vector up to the column's
    // own scalar: H[m][n] / H[0][n] must not depend on n.
    for (int m = 1; m < cfg.M; ++m) {
        const cxd r0 = h.h.at(m, 0) / h.h.at(0, 0);
        for (int n = 1; n < cfg.N; ++n) {
            const cxd rn = h.h.at(m, n) / h.h.at(0, n);
            CHECK(std::abs(rn - r0) < 1e-5);
        }
    }
}

TEST_CASE("arrivals beyond the prefix or before the reference are rejected") {
    const SystemConfig cfg = oracle_cfg();
    const WaveformConfig w = oracle_wcfg();
    const double ts = cfg.symbol_period_s();
    const BasebandFrame tx = synth_ofdm(std::vector<cxd>(32, cxd{1.0, 0.0}), cfg, w);

    // Delay exactly n_cp symbols still fits; one sample more does not.
    const PathParam fits = make_path(cfg, 0.0, w.n_cp * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0});
    CHECK_NOTHROW(propagate_to_antenna(tx, {fits}, 0, cfg, w));
    const PathParam late = make_path(cfg, 0.0, (w.n_cp + 0.01) * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0});
    CHECK_THROWS_WITH(propagate_to_antenna(tx, {late}, 0, cfg, w),
                      "inter-block interference: CP too short");

    // A negative-angle path at zero delay arrives before the timing
    // reference on the far antennas, whichever antenna is requested.
    const PathParam early = make_path(cfg, -0.9, 0.0, cxd{1.0, 0.0}, cxd{1.0, 0.0});
    CHECK_THROWS_AS(propagate_to_antenna(tx, {early}, 0, cfg, w), std::invalid_argument);

    CHECK_THROWS_AS(propagate_to_antenna(tx, {fits}, cfg.M, cfg, w), std::invalid_argument);
    WaveformConfig other = oracle_wcfg(4);
    CHECK_THROWS_AS(propagate_to_antenna(tx, {fits}, 0, cfg, other), std::invalid_argument);
}

TEST_CASE("short-memory pulse sees zero inter-block difference under a valid prefix") {
    const SystemConfig cfg = oracle_cfg(4, 32);
    WaveformConfig w = oracle_wcfg(8);
    w.pulse = PulseKind::linear;
    const double ts = cfg.symbol_period_s();
    const std::vector<PathParam> paths = {
        make_path(cfg, 0.6, 2.37 * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0}),
        make_path(cfg, 0.1, 5.91 * ts, cxd{0.4, 0.6}, cxd{1.0, 0.0}),
    };
    // With a two-tap pulse and every arrival inside the prefix, the frame
    // body never reads outside the frame, so the repeated stream and the
    // cyclic idealization produce bit-identical demodulator output.
    CHECK(interblock_interference_ratio(paths, 2, cfg, w) == 0.0);
}

TEST_CASE("long interpolation tails produce a small but nonzero framing error") {
    const SystemConfig cfg = oracle_cfg(4, 32);
    const WaveformConfig w = oracle_wcfg(8);  // windowed sinc reaches past the frame
    const double ts = cfg.symbol_period_s();
    const std::vector<PathParam> paths = {
        make_path(cfg, 0.3, 0.5 * ts, cxd{1.0, 0.0}, cxd{1.0, 0.0})};
    const double ratio = interblock_interference_ratio(paths, 1, cfg, w);
    CHECK(ratio > 0.0);
    CHECK(ratio < 1e-3);
}
