#include "fermi/orbits.hpp"

#include <algorithm>
#include <cmath>

namespace fermi::orbits {

namespace {

double orbit_residual(const PhasePoint& p1, const SystemParams& p) {
    PhasePoint q = step(step(p1, p), p);
    return std::max(circle_dist(q.t, p1.t), std::abs(q.v - p1.v));
}

// Intersection function for the (+) construction, parametrized by the offset
// sigma from the phi_dot maximum: flight times n+1/2+2s (image branch) and
// m-1/2-2s (locus branch) meet when h vanishes.
double plus_h(double s, int n, int m, const SystemParams& p) {
    const double T1 = n + 0.5 + 2.0 * s;
    const double T2 = m - 0.5 - 2.0 * s;
    return flight_time_inverse(T1, p) + 2.0 * p.A * std::cos(kTwoPi * s) -
           flight_time_inverse(T2, p);
}

std::optional<PeriodicOrbit2> orbit_from_sigma(double s, int n, int m,
                                               const SystemParams& p, double tol) {
    const double T1 = n + 0.5 + 2.0 * s;
    const double T2 = m - 0.5 - 2.0 * s;
    if (T1 <= 0.0 || T2 <= 0.0) return std::nullopt;
    const double v1 = flight_time_inverse(T1, p);
    const double v2 = flight_time_inverse(T2, p);
    if (v1 < p.v_min || v2 < p.v_min) return std::nullopt;
    // A = 0 style tangencies give v1 = v2; those are parabolic and rejected.
    if (std::abs(v2 - v1) < 1e-8 * std::max(1.0, v2)) return std::nullopt;

    PeriodicOrbit2 o;
    o.kind = PeriodicOrbit2::Kind::Plus;
    o.n = n;
    o.m = m;
    o.sigma = s;
    o.p1 = {wrap_unit(-0.5 - s), v1};
    o.p2 = {wrap_unit(s), v2};
    if (v1 > v2) std::swap(o.p1, o.p2);
    o.residual = orbit_residual(o.p1, p);
    if (!(o.residual < tol))
        throw VerificationError("find_plus_orbit: root at sigma = " + std::to_string(s) +
                                " has residual " + std::to_string(o.residual) +
                                " >= tol " + std::to_string(tol));
    return o;
}

} // namespace

PhasePoint LocusBranch::at(double t, const SystemParams& p) const {
    return locus_point(n, t, p);
}

PhasePoint locus_point(int n, double t, const SystemParams& p) {
    const double T = 2.0 * (p.t0 - t) + n;
    if (!(T > 0.0)) throw std::domain_error("locus_point: 2(t0 - t) + n must be > 0");
    return {wrap_unit(t), flight_time_inverse(T, p)};
}

PhasePoint image_locus_point(int n, double tau, const SystemParams& p) {
    const double T = 2.0 * (tau - p.t0) + n;
    if (!(T > 0.0)) throw std::domain_error("image_locus_point: 2(tau - t0) + n must be > 0");
    return {wrap_unit(tau), flight_time_inverse(T, p) + 2.0 * wall_derivative(tau, 1, p)};
}

std::vector<PeriodicOrbit2> find_plus_orbits(int n, int m, const SystemParams& p,
                                             double tol) {
    if (!(m > n && n >= 0)) throw std::domain_error("find_plus_orbits: need m > n >= 0");
    p.validate();

    // sigma window: quarter period around the maximum, clipped so both flight
    // times stay above the admissible floor.
    const double T_floor = flight_time(p.v_min, p);
    double lo = std::max(-0.25 + 1e-9, (T_floor - n - 0.5) / 2.0 + 1e-12);
    double hi = std::min(0.25 - 1e-9, (m - 0.5 - T_floor) / 2.0 - 1e-12);
    std::vector<PeriodicOrbit2> found;
    if (!(lo < hi)) return found;

    // step finer than the root-pair separation scale (v'_1+v'_2)/(4 pi^2 A)
    // so near-tangential crossings at window edges are still bracketed
    int grid = 4096;
    if (p.A > 0.0) {
        const double vp = 1.0 / flight_time_derivative(flight_time_inverse(n + 0.5, p), p) +
                          1.0 / flight_time_derivative(flight_time_inverse(m - 0.5, p), p);
        const double scale = vp / (kTwoPi * kTwoPi * p.A);
        const double need = 16.0 * (hi - lo) / std::max(scale, 1e-12);
        grid = std::clamp(static_cast<int>(need), 4096, 1 << 20);
    }
    double prev_s = lo;
    double prev_h = plus_h(lo, n, m, p);
    for (int i = 1; i <= grid; ++i) {
        const double s = lo + (hi - lo) * i / grid;
        const double h = plus_h(s, n, m, p);
        if (prev_h == 0.0) { // grid node is itself a root (A = 0 tangency)
            if (auto o = orbit_from_sigma(prev_s, n, m, p, tol)) found.push_back(*o);
            prev_s = s;
            prev_h = h;
            continue;
        }
        if (h != 0.0 && (prev_h < 0.0) != (h < 0.0)) {
            double a = prev_s, b = s, fa = prev_h;
            for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = plus_h(mid, n, m, p);
                if (fm == 0.0) { a = b = mid; break; }
                if ((fa < 0.0) == (fm < 0.0)) { a = mid; fa = fm; }
                else b = mid;
            }
            double root = 0.5 * (a + b);
            // one Newton polish; bisection already resolved near-tangential cases
            const double h0 = plus_h(root, n, m, p);
            const double dh = (plus_h(root + 1e-8, n, m, p) - plus_h(root - 1e-8, n, m, p)) / 2e-8;
            if (dh != 0.0) {
                const double cand = root - h0 / dh;
                if (cand > a - 1e-12 && cand < b + 1e-12) root = cand;
            }
            if (auto o = orbit_from_sigma(root, n, m, p, tol)) found.push_back(*o);
        }
        prev_s = s;
        prev_h = h;
    }
    std::sort(found.begin(), found.end(),
              [](const PeriodicOrbit2& a, const PeriodicOrbit2& b) {
                  return std::abs(a.sigma) < std::abs(b.sigma);
              });
    for (size_t i = 1; i < found.size(); ++i) found[i].outside_primary = true;
    return found;
}

std::optional<PeriodicOrbit2> find_plus_orbit(int n, int m, const SystemParams& p,
                                              double tol) {
    auto all = find_plus_orbits(n, m, p, tol);
    if (all.empty()) return std::nullopt;
    return all.front();
}

std::optional<PeriodicOrbit2> find_minus_orbit(int n, int m, const SystemParams& p,
                                               double tol) {
    if (!(m > n && n >= 0)) throw std::domain_error("find_minus_orbit: need m > n >= 0");
    p.validate();
    const double v1 = flight_time_inverse(n + 0.5, p);
    const double v2 = flight_time_inverse(m + 0.5, p);
    if (v1 < p.v_min || v2 < p.v_min) return std::nullopt;
    const double c = (v2 - v1) / (2.0 * p.A);
    if (!(std::abs(c) <= 1.0)) return std::nullopt; // cosine range: no such orbit

    // principal root; the mirrored root is the reversor image of this orbit
    const double t2 = std::acos(c) / kTwoPi;
    PeriodicOrbit2 o;
    o.kind = PeriodicOrbit2::Kind::Minus;
    o.n = n;
    o.m = m;
    o.p1 = {wrap_unit(t2 - 0.5), v1};
    o.p2 = {t2, v2};
    o.residual = orbit_residual(o.p1, p);
    if (!(o.residual < tol))
        throw VerificationError("find_minus_orbit: closed-form candidate has residual " +
                                std::to_string(o.residual));
    return o;
}

double analytic_half_trace(PeriodicOrbit2::Kind kind, double nu1, double nu2) {
    if (kind == PeriodicOrbit2::Kind::Plus)
        return 1.0 + 2.0 * (nu1 + nu2) + 2.0 * nu1 * nu2;
    return 1.0 + 2.0 * nu1 * nu2;
}

StabilityReport stability(const PeriodicOrbit2& orbit, const SystemParams& p,
                          double agree_tol) {
    StabilityReport r;
    r.kind = orbit.kind;
    // crossed convention: phidd_1 is evaluated at t2 and vice versa, because
    // dF at p_i involves the image phase t_i + T(v_i) = t_{i+1}
    r.nu1 = wall_derivative(orbit.p2.t, 2, p) * flight_time_derivative(orbit.p1.v, p);
    r.nu2 = wall_derivative(orbit.p1.t, 2, p) * flight_time_derivative(orbit.p2.v, p);
    r.half_trace = analytic_half_trace(orbit.kind, r.nu1, r.nu2);

    const Jacobian2x2 J1 = differential(orbit.p1, p);
    const Jacobian2x2 J2 = differential(orbit.p2, p);
    r.half_trace_numeric =
        0.5 * (J2.dt_dt * J1.dt_dt + J2.dt_dv * J1.dv_dt +
               J2.dv_dt * J1.dt_dv + J2.dv_dv * J1.dv_dv);
    if (std::abs(r.half_trace - r.half_trace_numeric) > agree_tol)
        throw VerificationError(
            "stability: analytic half-trace " + std::to_string(r.half_trace) +
            " vs numeric " + std::to_string(r.half_trace_numeric) +
            " disagree; orbit kind is likely misclassified");

    const double ht = r.half_trace;
    if (std::abs(ht - 1.0) < 1e-9 || std::abs(ht + 1.0) < 1e-9)
        r.classification = StabilityReport::Class::Parabolic;
    else if (std::abs(ht) < 1.0)
        r.classification = StabilityReport::Class::Elliptic;
    else
        r.classification = StabilityReport::Class::Hyperbolic;
    if (r.classification == StabilityReport::Class::Elliptic)
        r.multiplier = {ht, std::sqrt(1.0 - ht * ht)};
    else
        r.multiplier = {ht, 0.0};
    return r;
}

bool elliptic_test(const StabilityReport& report, double c1, double c2) {
    if (!(-1.0 <= c1 && c1 < c2 && c2 <= 0.0))
        throw std::domain_error("elliptic_test: need -1 <= c1 < c2 <= 0");
    const double s = report.kind == PeriodicOrbit2::Kind::Plus
                         ? report.nu1 + report.nu2 + report.nu1 * report.nu2
                         : report.nu1 * report.nu2;
    return c1 < s && s < c2;
}

std::optional<AWindow> elliptic_A_window(int n, int m, SystemParams base, double c1,
                                         double c2, int grid_steps) {
    if (!(m > n && n >= 0)) throw std::domain_error("elliptic_A_window: need m > n >= 0");
    const double v1 = flight_time_inverse(n + 0.5, base);
    const double v2 = flight_time_inverse(m - 0.5, base);
    if (!(v2 > v1)) return std::nullopt;
    const double anchor = 0.5 * (v2 - v1);

    // size the scan from the linearized window geometry: the full elliptic
    // window has phidd(t2) sweeping (-1/T'_2, 0)
    const double Tp1 = flight_time_derivative(v1, base);
    const double Tp2 = flight_time_derivative(v2, base);
    const double west = (1.0 / Tp1 + 1.0 / Tp2) / (2.0 * kTwoPi * kTwoPi * anchor * Tp2);
    const double A_lo_scan = std::max(anchor - 12.0 * west, 1e-12);
    const double A_hi_scan = anchor + 2.0 * west;

    auto good = [&](double A) {
        SystemParams q = base;
        q.A = A;
        if (!(q.B > q.A / kTwoPi)) q.B = q.A; // keep the plate positivity metadata valid
        try {
            auto o = find_plus_orbit(n, m, q);
            if (!o) return false;
            auto rep = stability(*o, q);
            return rep.elliptic() && elliptic_test(rep, c1, c2);
        } catch (const std::exception&) {
            return false;
        }
    };

    // grid scan, then keep the true-run adjacent to the anchor (the windows
    // further below the anchor belong to secondary intersections)
    std::vector<char> ok(static_cast<size_t>(grid_steps) + 1);
    auto A_at = [&](int i) {
        return A_lo_scan + (A_hi_scan - A_lo_scan) * i / grid_steps;
    };
    for (int i = 0; i <= grid_steps; ++i) ok[static_cast<size_t>(i)] = good(A_at(i)) ? 1 : 0;

    int run_lo = -1, run_hi = -1;
    for (int i = grid_steps; i >= 0; --i) {
        if (ok[static_cast<size_t>(i)]) {
            run_hi = i;
            run_lo = i;
            while (run_lo > 0 && ok[static_cast<size_t>(run_lo - 1)]) --run_lo;
            break;
        }
    }
    if (run_hi < 0) return std::nullopt;
    if (run_hi - run_lo < 2)
        throw std::runtime_error("elliptic_A_window: grid too coarse to resolve the window");

    // refine both edges by bisection on the predicate
    auto refine = [&](double in, double out) {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (in + out);
            if (good(mid)) in = mid;
            else out = mid;
        }
        return in;
    };
    AWindow w;
    w.anchor = anchor;
    w.A_lo = run_lo == 0 ? A_at(0) : refine(A_at(run_lo), A_at(run_lo - 1));
    w.A_hi = run_hi == grid_steps ? A_at(grid_steps) : refine(A_at(run_hi), A_at(run_hi + 1));
    return w;
}

Catalog scan_orbits(const SystemParams& p, double T_max, double c1, double c2,
                    double tol) {
    if (!(T_max >= 1.0)) return {};
    Catalog cat;
    const int n_max = static_cast<int>(std::floor(T_max));
    for (int n = 0; n <= n_max; ++n) {
        for (int m = n + 1; m <= n_max + 1; ++m) {
            auto push = [&](const PeriodicOrbit2& o) {
                StabilityReport rep = stability(o, p);
                const bool in_win = rep.elliptic() && elliptic_test(rep, c1, c2);
                cat.entries.push_back({o, rep, in_win});
            };
            if (n + 0.5 < T_max && m - 0.5 < T_max) {
                try {
                    for (auto& o : find_plus_orbits(n, m, p, tol)) push(o);
                } catch (const std::exception& e) {
                    cat.failures.push_back("plus(" + std::to_string(n) + "," +
                                           std::to_string(m) + "): " + e.what());
                }
            }
            if (n + 0.5 < T_max && m + 0.5 < T_max) {
                try {
                    if (auto o = find_minus_orbit(n, m, p, tol)) push(*o);
                } catch (const std::exception& e) {
                    cat.failures.push_back("minus(" + std::to_string(n) + "," +
                                           std::to_string(m) + "): " + e.what());
                }
            }
        }
    }
    std::sort(cat.entries.begin(), cat.entries.end(),
              [](const CatalogEntry& a, const CatalogEntry& b) {
                  if (a.orbit.n != b.orbit.n) return a.orbit.n < b.orbit.n;
                  if (a.orbit.m != b.orbit.m) return a.orbit.m < b.orbit.m;
                  if (a.orbit.kind != b.orbit.kind)
                      return a.orbit.kind == PeriodicOrbit2::Kind::Plus;
                  return std::abs(a.orbit.sigma) < std::abs(b.orbit.sigma);
              });
    return cat;
}

} // namespace fermi::orbits
