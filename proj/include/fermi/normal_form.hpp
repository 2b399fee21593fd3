// Birkhoff-normal-form checks at elliptic period-2 points: non-resonance,
// the symplectic rotation frame, Taylor coefficients of F^2 in (u, conj u),
// the twist coefficient omega, and island-area measurement.
#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "fermi/core_map.hpp"
#include "fermi/orbits.hpp"

namespace fermi::nf {

using cplx = std::complex<double>;

struct RotationFrame {
    cplx a1, a2;     // d(F^2) at the anchor written as z -> a1 z + a2 conj(z)
    cplx b1, b2;     // z = b1 u + b2 conj(u), with |b1|^2 - |b2|^2 = 1
    double D = 0.0;  // sqrt(2 (1 - Re(lambda a1)))
    cplx lambda_p;   // unit multiplier
    double theta_p = 0.0;
    PhasePoint anchor; // orbit point the frame is centered on (p2)
    cplx to_u(cplx z) const { return std::conj(b1) * z - b2 * std::conj(z); }
    cplx from_u(cplx u) const { return b1 * u + b2 * std::conj(u); }
};

struct BirkhoffCoeffs {
    cplx lambda;                     // extracted degree-1 coefficient
    cplx A3, A4, A5, A6, A7, A8, A9; // u^2, u ubar, ubar^2, u^3, u^2 ubar, u ubar^2, ubar^3
    double model_residual = 0.0;     // degree-3 model vs map on a validation circle
    double h_used = 0.0;
};

struct NondegeneracyReport {
    cplx omega;
    double omega3_bracket_value = 0.0; // bracket polynomial at (nu_bar, theta_p)
    std::vector<int> resonant_orders;  // subset of {1,2,3,4}
    bool general_elliptic = false;
};

/// k in {1,2,3,4} with |lambda^k - 1| < angle_tol. Requires |lambda| = 1 to 1e-9.
std::vector<int> resonance_check(cplx lambda, double angle_tol);

/// Builds and validates the symplectic frame at orbit.p2. Throws if the orbit
/// is not elliptic or the conjugated linearization fails to be a rotation.
RotationFrame rotation_frame(const orbits::PeriodicOrbit2& orbit, const SystemParams& p);

/// Taylor coefficients of F^2 at p2 in (u, conj u) by circle sampling with
/// Richardson extrapolation over radii {h, h/2, h/4}. h <= 0 picks a step
/// balancing truncation against rounding noise.
BirkhoffCoeffs taylor_coeffs(const orbits::PeriodicOrbit2& orbit, const SystemParams& p,
                             double h = 0.0);

/// Same extraction applied to an arbitrary map of the u-plane.
BirkhoffCoeffs extract_taylor(const std::function<cplx(cplx)>& map_u, double h);

/// omega = -i { i Im(conj(lambda) A7) + 3 |A3|^2 (l+1)/(l-1) + |A5|^2 (l^3+1)/(l^3-1) }.
cplx omega(const BirkhoffCoeffs& coeffs, cplx lambda);

/// Bracket polynomial of the order-3 twist coefficient, cotangent form:
/// 2(nu^2+4nu+6) - nu (2+nu)^2 (3 cot(theta/2) + (3+nu)^2 cot(3 theta/2)).
/// Requires nu in (-1,0) and both cotangents positive.
double omega3_bracket(double nu, double theta);

/// theta band where both cotangents are positive and k <= 4 resonances stay away.
inline constexpr double kThetaBandLo = 0.35 * kTwoPi;
inline constexpr double kThetaBandHi = 0.45 * kTwoPi;

NondegeneracyReport nondegeneracy(const orbits::PeriodicOrbit2& orbit, const SystemParams& p,
                                  double angle_tol = 1e-3);

struct IslandMeasurement {
    double area = 0.0;     // bounded fraction of the sampling square times its area
    double rho = 0.0;      // escape radius actually used (u-frame units)
    double fraction = 0.0;
    double t_extent = 0.0, v_extent = 0.0; // bounding box of the bounded set in (t,v)
    long bounded_count = 0;
    bool empty = false;
};

/// Sampling square of side 2 rho in the symplectic u-frame (area-preserving,
/// so u-area equals (t,v)-area); a point is in the island when its F^2 orbit
/// stays within |u| <= rho for iters steps forward AND backward.
IslandMeasurement island_area(const orbits::PeriodicOrbit2& orbit, const SystemParams& p,
                              double rho = 0.0, long iters = 1000, int grid = 101);

/// Least-squares slope of log(area) against log(T') for >= 4 orbits spanning
/// at least a decade in T'.
double area_scaling(const std::vector<std::pair<double, double>>& tprime_area);

struct CatalogOrbit {
    orbits::PeriodicOrbit2 orbit;
    orbits::StabilityReport report;
    SystemParams params;  // A tuned into the (c1,c2) window for this pair
    double tbar_prime = 0.0;
};

/// For each branch pair, tunes A inside the elliptic window with the
/// multiplier controlled by (c1,c2) and returns the resulting orbit.
std::vector<CatalogOrbit> multiplier_controlled_catalog(
    const SystemParams& base, const std::vector<std::pair<int, int>>& pairs, double c1,
    double c2);

/// Branch pairs whose window anchors sit near a common amplitude A0, so the
/// wall derivatives stay comparable while T' grows along the catalog.
std::vector<std::pair<int, int>> constant_amplitude_pairs(const SystemParams& base,
                                                          double A0,
                                                          const std::vector<int>& ns);

} // namespace fermi::nf
