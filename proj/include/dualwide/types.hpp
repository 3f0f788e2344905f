// SPDX-License-Identifier: Apache-2.0
//
// Core value types for the dual-wideband massive MIMO simulator:
// system geometry, per-path parameters, channel matrices and the
// angular-delay grids derived from them.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dualwide {

using cxd = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/**
 * Uplink vs downlink side of the link.  The two directions share the array
 * geometry but use different carrier frequencies (FDD), so spatial
 * frequencies and per-path gains differ between them.
 */
enum class Link { uplink, downlink };

/**
 * Channel model used when building steering/basis vectors.
 *   dual_wideband : frequency-dependent array response (phase ramp across
 *                   both antennas and subcarriers, plus the cross term).
 *   narrowband    : conventional model that ignores the frequency variation
 *                   of the array response (cross term forced to one).
 */
enum class ModelMode { dual_wideband, narrowband };

/**
 * Static system description: array size, OFDM dimensioning and carriers.
 *
 * Conventions used throughout:
 *   M              number of ULA antennas (rows of a channel matrix)
 *   N              number of OFDM subcarriers (columns)
 *   d_over_lambda  antenna spacing in uplink-carrier wavelengths
 *   f_c_hz         uplink carrier, f_cd_hz downlink carrier (FDD)
 *   f_s_hz         sampled bandwidth; subcarrier spacing eta = f_s / N
 *   n_cp           cyclic prefix length in base-rate samples
 *   omega          delay-domain guard (in delay-resolution bins) enforced
 *                  between users by soft grouping
 */
struct SystemConfig {
    int M = 64;
    int N = 64;
    double d_over_lambda = 0.5;
    double f_c_hz = 60e9;
    double f_cd_hz = 60e9;
    double f_s_hz = 1e9;
    int n_cp = 0;
    int omega = 10;

    double symbol_period_s() const { return 1.0 / f_s_hz; }
    double subcarrier_spacing_hz() const { return f_s_hz / static_cast<double>(N); }
    double fractional_bandwidth() const { return f_s_hz / f_c_hz; }
    double wavelength_m() const { return kSpeedOfLight / f_c_hz; }
    double spacing_m() const { return d_over_lambda * wavelength_m(); }

    /** Spatial frequency psi = (d / lambda_c) * sin(theta) for arrival angle theta. */
    double psi_from_theta(double theta_rad) const;

    /** Inverse of psi_from_theta; requires |psi| <= d_over_lambda. */
    double theta_from_psi(double psi) const;

    /**
     * View of the same physical system seen from the downlink carrier:
     * f_c becomes f_cd and the spacing is re-expressed in downlink
     * wavelengths (the physical spacing in metres is unchanged).
     */
    SystemConfig downlink_view() const;

    /** Throws std::invalid_argument when any field is out of range. */
    void validate() const;
};

/**
 * One propagation path.  `psi` is the uplink spatial frequency and is kept
 * consistent with `theta_rad` under the owning SystemConfig; `tau_s` is the
 * excess delay in seconds (relative to the receiver timing reference).
 * Uplink and downlink small-scale gains are independent in FDD.
 */
struct PathParam {
    double theta_rad = 0.0;
    double psi = 0.0;
    double tau_s = 0.0;
    cxd gain_ul{0.0, 0.0};
    cxd gain_dl{0.0, 0.0};

    const cxd& gain(Link link) const { return link == Link::uplink ? gain_ul : gain_dl; }
};

/** Build a PathParam from an arrival angle, deriving psi from the config. */
PathParam make_path(const SystemConfig& cfg, double theta_rad, double tau_s,
                    cxd gain_ul, cxd gain_dl = cxd{0.0, 0.0});

/** One (spatial frequency, delay) pair of an estimated or true path. */
struct SignaturePoint {
    double psi = 0.0;
    double tau_s = 0.0;
};

/**
 * The angular-delay signature of one user: the list of (psi, tau) pairs for
 * its paths.  `adjusted` marks signatures whose delays already include the
 * artificial soft-grouping offset of that user.
 */
struct AngularDelaySignature {
    std::vector<SignaturePoint> pairs;
    bool adjusted = false;
};

/** Dense complex matrix, column-major (row index fastest in memory). */
struct CxMat {
    int rows = 0;
    int cols = 0;
    std::vector<cxd> data;

    CxMat() = default;
    CxMat(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    cxd& at(int r, int c) { return data[static_cast<size_t>(c) * rows + r]; }
    const cxd& at(int r, int c) const { return data[static_cast<size_t>(c) * rows + r]; }

    size_t size() const { return data.size(); }

    double frobenius_norm_sq() const {
        double s = 0.0;
        for (const cxd& v : data) s += std::norm(v);
        return s;
    }
};

/** Space-frequency channel matrix H (M antennas x N subcarriers). */
struct SfwChannel {
    CxMat h;

    SfwChannel() = default;
    SfwChannel(int m, int n) : h(m, n) {}

    int antennas() const { return h.rows; }
    int subcarriers() const { return h.cols; }
};

/** Angular-delay domain image G of a channel (unitary 2D transform of H). */
struct AngularDelayGrid {
    CxMat g;

    AngularDelayGrid() = default;
    AngularDelayGrid(int m, int n) : g(m, n) {}
};

/**
 * Nearest grid point and phase residuals of one path:
 *   psi_index, tau_index  integer angular/delay bins in [0, M) x [0, N)
 *   delta_psi, delta_tau  residual phase steps (radians per antenna /
 *                         per subcarrier), each in [-pi/M, pi/M) resp.
 *                         [-pi/N, pi/N) (round-half-up ties go upward)
 * satisfying  2*pi*psi  = (2*pi/M)*psi_index + delta_psi   (mod 2*pi)
 *             2*pi*eta*tau = (2*pi/N)*tau_index + delta_tau (mod 2*pi).
 */
struct RotationParams {
    int psi_index = 0;
    int tau_index = 0;
    double delta_psi = 0.0;
    double delta_tau = 0.0;
};

/**
 * Square index set in the angular-delay grid that carries (nearly all of)
 * one path's energy.  Rows start at `row_anchor` and advance `side` bins in
 * direction `dir` (+1 for psi >= 0, -1 for psi < 0), modulo M; columns do
 * the same from `col_anchor` modulo N.  `contains` applies an extra
 * dilation of `g` bins on every side (Chebyshev margin, wrap-around).
 */
struct SupportRegion {
    int row_anchor = 0;
    int col_anchor = 0;
    int side = 1;
    int dir = +1;
    int rows = 0;  // M
    int cols = 0;  // N

    bool contains(int row, int col, int dilation) const;
    long long area(int dilation) const;
};

namespace detail {
/** floor-based modulo, result in [0, m). */
inline int imod(int a, int m) {
    int r = a % m;
    return r < 0 ? r + m : r;
}
/** Round to nearest integer, ties toward +infinity. */
inline long long round_half_up(double x) {
    return static_cast<long long>(std::floor(x + 0.5));
}
}  // namespace detail

}  // namespace dualwide
