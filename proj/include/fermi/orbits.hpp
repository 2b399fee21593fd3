// Period-2 orbits of the static-wall map, built from the reversor locus
// (+ orbits) and from the half-integer flight-time resonance (- orbits).
#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "fermi/core_map.hpp"

namespace fermi::orbits {

/// Branch n of the fixed-point locus of R: t -> (t, v(2(t0 - t) + n)).
struct LocusBranch {
    int n = 0;
    PhasePoint at(double t, const SystemParams& p) const;
};

struct PeriodicOrbit2 {
    enum class Kind { Plus, Minus };
    PhasePoint p1, p2; // labelled so v1 < v2
    Kind kind = Kind::Plus;
    int n = 0, m = 0;       // branch pair the orbit was constructed from
    double residual = 0.0;  // max norm of F^2(p1) - p1 (circle metric in t)
    double sigma = 0.0;     // Plus only: intersection offset from the phi_dot maximum
    bool outside_primary = false; // Plus root other than the one nearest the anchor
};

struct StabilityReport {
    double nu1 = 0.0, nu2 = 0.0; // nu_i = phidd_i T'_i, crossed index convention
    double half_trace = 0.0;         // analytic, from the (+)/(-) trace formulas
    double half_trace_numeric = 0.0; // (1/2) Tr(dF(p2) dF(p1))
    std::complex<double> multiplier; // meaningful iff Elliptic
    enum class Class { Elliptic, Hyperbolic, Parabolic } classification = Class::Parabolic;
    PeriodicOrbit2::Kind kind = PeriodicOrbit2::Kind::Plus;
    bool elliptic() const { return classification == Class::Elliptic; }
};

/// Analytic vs numeric half-trace disagreed beyond tolerance, or a root failed
/// its F^2 verification.
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

PhasePoint locus_point(int n, double t, const SystemParams& p);

/// Image curve F(locus): tau -> (tau, v(2(tau - t0) + n) + 2 phi_dot(tau)).
PhasePoint image_locus_point(int n, double tau, const SystemParams& p);

/// All transversal period-2 (+)-intersections for the branch pair (n, m),
/// ordered by |sigma|; flight times are n+1/2+2s and m-1/2-2s at offset s.
std::vector<PeriodicOrbit2> find_plus_orbits(int n, int m, const SystemParams& p,
                                             double tol = 1e-9);

/// The (+)-orbit nearest the anchor v(n+1/2) + 2A = v(m-1/2), if any.
std::optional<PeriodicOrbit2> find_plus_orbit(int n, int m, const SystemParams& p,
                                              double tol = 1e-9);

/// (-)-orbit with T(v1) = n+1/2, T(v2) = m+1/2; exists iff |v2-v1| <= 2A.
std::optional<PeriodicOrbit2> find_minus_orbit(int n, int m, const SystemParams& p,
                                               double tol = 1e-9);

/// Half trace of dF1 dF2 from the nu parameters alone.
double analytic_half_trace(PeriodicOrbit2::Kind kind, double nu1, double nu2);

StabilityReport stability(const PeriodicOrbit2& orbit, const SystemParams& p,
                          double agree_tol = 1e-6);

/// (+): nu1+nu2+nu1*nu2 in (c1,c2); (-): nu1*nu2 in (c1,c2). Requires
/// -1 <= c1 < c2 <= 0; then Re(multiplier) lands in (1+2c1, 1+2c2).
bool elliptic_test(const StabilityReport& report, double c1, double c2);

struct AWindow {
    double A_lo = 0.0, A_hi = 0.0;
    double anchor = 0.0; // A_bar with v(n+1/2) + 2 A_bar = v(m-1/2)
    double width() const { return A_hi - A_lo; }
};

/// Scans A near the anchor and returns the maximal subinterval adjacent to it
/// on which find_plus_orbit succeeds and elliptic_test(c1,c2) holds.
std::optional<AWindow> elliptic_A_window(int n, int m, SystemParams base, double c1,
                                         double c2, int grid_steps = 1024);

struct CatalogEntry {
    PeriodicOrbit2 orbit;
    StabilityReport report;
    bool in_c_window = false; // elliptic and elliptic_test(c1,c2) passed
};

struct Catalog {
    std::vector<CatalogEntry> entries;        // ordered by (n, m, kind)
    std::vector<std::string> failures;        // per-pair diagnostics, never fatal
};

/// Tries both kinds on every branch pair with flight times below T_max.
Catalog scan_orbits(const SystemParams& p, double T_max, double c1 = -1.0,
                    double c2 = 0.0, double tol = 1e-9);

} // namespace fermi::orbits
