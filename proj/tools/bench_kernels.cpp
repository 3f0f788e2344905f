// SPDX-License-Identifier: Apache-2.0
//
// Kernel benchmark: optimized library kernels against the serial reference
// implementations.  Reports wall time for both and the worst elementwise
// deviation, so performance work cannot silently change results.

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dualwide/angular_delay.hpp"
#include "dualwide/reference.hpp"
#include "dualwide/rng.hpp"
#include "dualwide/scenario.hpp"
#include "dualwide/sfw_model.hpp"

namespace {

using namespace dualwide;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double max_abs_diff(const CxMat& a, const CxMat& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    return worst;
}

void print_row(const std::string& kernel, double t_ref, double t_opt, double diff) {
    std::cout << std::left << std::setw(26) << kernel << std::right << std::fixed
              << std::setprecision(2) << std::setw(12) << t_ref << std::setw(12) << t_opt
              << std::setw(10) << std::setprecision(1) << (t_ref / std::max(t_opt, 1e-9))
              << std::scientific << std::setprecision(2) << std::setw(12) << diff
              << std::defaultfloat << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimized-vs-reference kernel benchmark"};
    int m = 256, n = 256, paths = 6, repeat = 3;
    bool quick = false;
    app.add_option("--m", m, "antenna count");
    app.add_option("--n", n, "subcarrier count");
    app.add_option("--paths", paths, "paths in the assembly benchmark");
    app.add_option("--repeat", repeat, "timing repetitions (best-of)");
    app.add_flag("--quick", quick, "small sizes for smoke testing");
    CLI11_PARSE(app, argc, argv);

    if (quick) {
        m = 32;
        n = 32;
        repeat = 1;
    }

    SystemConfig cfg;
    cfg.M = m;
    cfg.N = n;

    ScenarioSpec spec;
    spec.users = 1;
    spec.paths_min = paths;
    spec.paths_max = paths;
    spec.tau_max_s = 8.0 * cfg.symbol_period_s();
    const Scenario sc = generate_scenario(42, cfg, spec);
    const std::vector<PathParam>& pp = sc.users[0];

    std::cout << "kernel                        ref_ms      opt_ms   speedup    max_diff\n";

    // --- channel assembly --------------------------------------------------
    SfwChannel h_opt, h_ref;
    double t_opt = 1e300, t_ref = 1e300;
    for (int r = 0; r < repeat; ++r) {
        auto t0 = Clock::now();
        h_opt = assemble_channel(pp, cfg, Link::uplink, ModelMode::dual_wideband);
        t_opt = std::min(t_opt, ms_since(t0));
        t0 = Clock::now();
        h_ref = reference::assemble_channel_serial(pp, cfg, Link::uplink,
                                                   ModelMode::dual_wideband);
        t_ref = std::min(t_ref, ms_since(t0));
    }
    print_row("assemble_channel", t_ref, t_opt, max_abs_diff(h_opt.h, h_ref.h));

    // --- angular-delay transform (FFT vs explicit matrices) ----------------
    AngularDelayGrid g_opt, g_ref;
    t_opt = t_ref = 1e300;
    for (int r = 0; r < repeat; ++r) {
        auto t0 = Clock::now();
        g_opt = to_angular_delay(h_opt);
        t_opt = std::min(t_opt, ms_since(t0));
        t0 = Clock::now();
        g_ref = reference::to_angular_delay_explicit(h_opt);
        t_ref = std::min(t_ref, ms_since(t0));
    }
    print_row("to_angular_delay", t_ref, t_opt, max_abs_diff(g_opt.g, g_ref.g));

    // --- inverse transform --------------------------------------------------
    SfwChannel b_opt, b_ref;
    t_opt = t_ref = 1e300;
    for (int r = 0; r < repeat; ++r) {
        auto t0 = Clock::now();
        b_opt = from_angular_delay(g_opt);
        t_opt = std::min(t_opt, ms_since(t0));
        t0 = Clock::now();
        b_ref = reference::from_angular_delay_explicit(g_opt);
        t_ref = std::min(t_ref, ms_since(t0));
    }
    print_row("from_angular_delay", t_ref, t_opt, max_abs_diff(b_opt.h, b_ref.h));

    // --- concentration objective -------------------------------------------
    const SignaturePoint probe{pp[0].psi, pp[0].tau_s};
    double v_opt = 0.0, v_ref = 0.0;
    t_opt = t_ref = 1e300;
    for (int r = 0; r < repeat; ++r) {
        auto t0 = Clock::now();
        v_opt = concentration_objective(h_opt, probe.psi, probe.tau_s, cfg,
                                        ModelMode::dual_wideband);
        t_opt = std::min(t_opt, ms_since(t0));
        t0 = Clock::now();
        v_ref = reference::objective_via_transform(h_opt, probe.psi, probe.tau_s, cfg,
                                                   ModelMode::dual_wideband);
        t_ref = std::min(t_ref, ms_since(t0));
    }
    print_row("concentration_objective", t_ref, t_opt, std::abs(v_opt - v_ref));

    return 0;
}
