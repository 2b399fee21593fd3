#include "fermi/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fermi::nf {

namespace {

struct Mat2 {
    double m11, m12, m21, m22;
};

Mat2 mul(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

Mat2 as_mat(const Jacobian2x2& J) { return {J.dt_dt, J.dt_dv, J.dv_dt, J.dv_dv}; }

double tbar_prime_of(const orbits::PeriodicOrbit2& o, const SystemParams& p) {
    return 0.5 * (flight_time_derivative(o.p1.v, p) + flight_time_derivative(o.p2.v, p));
}

// F^2 displacement around the anchor, in z = dt + i dv
cplx f2_displacement(const PhasePoint& anchor, cplx z, const SystemParams& p) {
    PhasePoint q{wrap_unit(anchor.t + z.real()), anchor.v + z.imag()};
    q = step(step(q, p), p);
    double dt = q.t - anchor.t;
    if (dt > 0.5) dt -= 1.0;
    if (dt < -0.5) dt += 1.0;
    return {dt, q.v - anchor.v};
}

} // namespace

std::vector<int> resonance_check(cplx lambda, double angle_tol) {
    if (std::abs(std::abs(lambda) - 1.0) > 1e-9)
        throw std::domain_error("resonance_check: multiplier must have unit modulus");
    std::vector<int> res;
    cplx lk = 1.0;
    for (int k = 1; k <= 4; ++k) {
        lk *= lambda;
        if (std::abs(lk - 1.0) < angle_tol) res.push_back(k);
    }
    return res;
}

RotationFrame rotation_frame(const orbits::PeriodicOrbit2& orbit, const SystemParams& p) {
    // d(F^2) at p2 is dF(p1) dF(p2) since F(p2) = p1
    const Mat2 M = mul(as_mat(differential(orbit.p1, p)), as_mat(differential(orbit.p2, p)));
    RotationFrame f;
    f.anchor = orbit.p2;
    f.a1 = {0.5 * (M.m11 + M.m22), 0.5 * (M.m21 - M.m12)};
    f.a2 = {0.5 * (M.m11 - M.m22), 0.5 * (M.m21 + M.m12)};

    const double re = f.a1.real();
    if (!(std::abs(re) < 1.0))
        throw std::runtime_error("rotation_frame: orbit is not elliptic (|Re a1| >= 1)");
    const double s = f.a1.imag() >= 0.0 ? 1.0 : -1.0;
    f.lambda_p = {re, s * std::sqrt(1.0 - re * re)};
    f.theta_p = std::arg(f.lambda_p);

    const double D2 = 2.0 * (1.0 - (f.lambda_p * f.a1).real());
    if (!(D2 > 0.0)) throw std::runtime_error("rotation_frame: D^2 <= 0 on an elliptic orbit");
    f.D = std::sqrt(D2);
    f.b1 = {(f.lambda_p.imag() + f.a1.imag()) / f.D, 0.0};
    f.b2 = cplx{0.0, 1.0} * f.a2 / f.D;

    const double sympl = std::norm(f.b1) - std::norm(f.b2);
    if (std::abs(sympl - 1.0) > 1e-9)
        throw std::runtime_error("rotation_frame: frame not symplectic, |b1|^2-|b2|^2 = " +
                                 std::to_string(sympl));
    // conjugated linearization must be the rotation by theta_p
    for (cplx u : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
        const cplx z = f.from_u(u);
        const cplx Mz = {M.m11 * z.real() + M.m12 * z.imag(),
                         M.m21 * z.real() + M.m22 * z.imag()};
        const cplx got = f.to_u(Mz);
        if (std::abs(got - f.lambda_p * u) > 1e-6)
            throw std::runtime_error("rotation_frame: conjugation residual " +
                                     std::to_string(std::abs(got - f.lambda_p * u)));
    }
    return f;
}

BirkhoffCoeffs taylor_coeffs(const orbits::PeriodicOrbit2& orbit, const SystemParams& p,
                             double h) {
    const RotationFrame f = rotation_frame(orbit, p);
    auto map_u = [&f, &p](cplx u) { return f.to_u(f2_displacement(f.anchor, f.from_u(u), p)); };
    if (h > 0.0) return extract_taylor(map_u, h);
    // island-scaled start; the degree-4 tail carries powers of 2 pi A, so walk
    // the step down until the validation residual is in the truncation regime
    const double tp = tbar_prime_of(orbit, p);
    double trial = 4.5e-3 * std::pow(tp, -1.5);
    std::string last = "taylor_coeffs: no step size attempted";
    for (int attempt = 0; attempt < 8; ++attempt, trial *= 0.5) {
        try {
            return extract_taylor(map_u, trial);
        } catch (const std::exception& e) {
            last = e.what();
        }
    }
    throw std::runtime_error(last);
}

BirkhoffCoeffs extract_taylor(const std::function<cplx(cplx)>& map_u, double h) {
    constexpr int J = 16;
    auto ring = [&](double r, cplx* c /*frequencies -3..3 in c[f+3]*/) {
        cplx acc[7] = {};
        for (int j = 0; j < J; ++j) {
            const double phi = kTwoPi * j / J;
            const cplx u = std::polar(r, phi);
            const cplx G = map_u(u);
            for (int fr = -3; fr <= 3; ++fr)
                acc[fr + 3] += G * std::polar(1.0, -fr * phi);
        }
        for (int i = 0; i < 7; ++i) c[i] = acc[i] / static_cast<double>(J);
    };

    cplx c1[7], c2[7], c4[7]; // radii h, h/2, h/4
    ring(h, c1);
    ring(h / 2.0, c2);
    ring(h / 4.0, c4);

    auto freq = [&](const cplx* c, int fr) { return c[fr + 3]; };

    // single leading order r^pw with one Richardson level per radius pair
    auto extract_pure = [&](int fr, int pw, double* spread) {
        const double p1 = std::pow(h, pw), p2 = std::pow(h / 2.0, pw),
                     p4 = std::pow(h / 4.0, pw);
        const cplx e1 = freq(c1, fr) / p1, e2 = freq(c2, fr) / p2, e4 = freq(c4, fr) / p4;
        const cplx r1 = (4.0 * e2 - e1) / 3.0, r2 = (4.0 * e4 - e2) / 3.0;
        if (spread) *spread = std::abs(r2 - r1);
        return (16.0 * r2 - r1) / 15.0;
    };
    // frequency carrying orders r^1 and r^3: solve the pair, Richardson the cubic
    auto extract_13 = [&](int fr, cplx* lin) {
        auto solve = [&](const cplx& ca, double ra, const cplx& cb, double rb) {
            // ca = a ra + b ra^3, cb = a rb + b rb^3
            const double det = ra * rb * rb * rb - rb * ra * ra * ra;
            const cplx a = (ca * rb * rb * rb - cb * ra * ra * ra) / det;
            const cplx b = (cb * ra - ca * rb) / det;
            return std::pair<cplx, cplx>{a, b};
        };
        auto [a1v, b1v] = solve(freq(c1, fr), h, freq(c2, fr), h / 2.0);
        auto [a2v, b2v] = solve(freq(c2, fr), h / 2.0, freq(c4, fr), h / 4.0);
        if (lin) *lin = (16.0 * a2v - a1v) / 15.0;
        return (4.0 * b2v - b1v) / 3.0;
    };

    BirkhoffCoeffs out;
    out.h_used = h;
    double spread = 0.0, worst = 0.0;
    out.A3 = extract_pure(+2, 2, &spread); worst = std::max(worst, spread);
    out.A4 = extract_pure(0, 2, &spread); worst = std::max(worst, spread);
    out.A5 = extract_pure(-2, 2, &spread); worst = std::max(worst, spread);
    out.A6 = extract_pure(+3, 3, &spread); worst = std::max(worst, spread);
    out.A9 = extract_pure(-3, 3, &spread); worst = std::max(worst, spread);
    out.A7 = extract_13(+1, &out.lambda);
    out.A8 = extract_13(-1, nullptr);

    // Richardson levels must actually contract (truncation regime, not noise)
    const double scale = std::abs(out.A7) + std::abs(out.A3) + 1.0;
    if (worst > 0.25 * scale)
        throw std::runtime_error("taylor_coeffs: extrapolation not converging; adjust h");

    // degree-3 model against the map on a validation circle
    const double rv = 0.75 * h;
    double resid = 0.0;
    for (int j = 0; j < J; ++j) {
        const cplx u = std::polar(rv, kTwoPi * (j + 0.37) / J);
        const cplx ub = std::conj(u);
        const cplx model = out.lambda * u + out.A3 * u * u + out.A4 * u * ub +
                           out.A5 * ub * ub + out.A6 * u * u * u + out.A7 * u * u * ub +
                           out.A8 * u * ub * ub + out.A9 * ub * ub * ub;
        resid = std::max(resid, std::abs(map_u(u) - model));
    }
    out.model_residual = resid / rv;
    if (!(out.model_residual < 1e-4))
        throw std::runtime_error("taylor_coeffs: validation residual " +
                                 std::to_string(out.model_residual) + " exceeds 1e-4");
    return out;
}

cplx omega(const BirkhoffCoeffs& coeffs, cplx lambda) {
    const cplx l3 = lambda * lambda * lambda;
    if (std::abs(lambda - 1.0) < 1e-9 || std::abs(l3 - 1.0) < 1e-9)
        throw std::domain_error("omega: resonant multiplier (pole in the twist formula)");
    const cplx i{0.0, 1.0};
    const cplx term1{0.0, (std::conj(lambda) * coeffs.A7).imag()}; // i Im(conj(l) A7)
    const cplx term2 = 3.0 * std::norm(coeffs.A3) * (lambda + 1.0) / (lambda - 1.0);
    const cplx term3 = std::norm(coeffs.A5) * (l3 + 1.0) / (l3 - 1.0);
    return -i * (term1 + term2 + term3);
}

double omega3_bracket(double nu, double theta) {
    if (!(nu > -1.0 && nu < 0.0))
        throw std::domain_error("omega3_bracket: nu must lie in (-1, 0)");
    const double cot_half = std::cos(theta / 2.0) / std::sin(theta / 2.0);
    const double cot_3half = std::cos(1.5 * theta) / std::sin(1.5 * theta);
    if (!(cot_half > 0.0 && cot_3half > 0.0))
        throw std::domain_error("omega3_bracket: theta outside the positive-cotangent band");
    const double q = 2.0 * (nu * nu + 4.0 * nu + 6.0);
    const double c = (2.0 + nu) * (2.0 + nu) *
                     (3.0 * cot_half + (3.0 + nu) * (3.0 + nu) * cot_3half);
    return q - nu * c;
}

NondegeneracyReport nondegeneracy(const orbits::PeriodicOrbit2& orbit, const SystemParams& p,
                                  double angle_tol) {
    NondegeneracyReport rep;
    const RotationFrame f = rotation_frame(orbit, p);
    rep.resonant_orders = resonance_check(f.lambda_p, angle_tol);
    const BirkhoffCoeffs coeffs = taylor_coeffs(orbit, p);
    rep.omega = omega(coeffs, f.lambda_p);
    const double tp = tbar_prime_of(orbit, p);
    const double nu_bar = wall_derivative(orbit.p2.t, 2, p) * tp;
    const double theta = std::abs(f.theta_p);
    rep.omega3_bracket_value =
        (nu_bar > -1.0 && nu_bar < 0.0 &&
         std::tan(theta / 2.0) > 0.0 && std::tan(1.5 * theta) > 0.0)
            ? omega3_bracket(nu_bar, theta)
            : 0.0;
    rep.general_elliptic =
        rep.resonant_orders.empty() && std::abs(rep.omega) > 1e-6 * tp * tp * tp;
    return rep;
}

IslandMeasurement island_area(const orbits::PeriodicOrbit2& orbit, const SystemParams& p,
                              double rho, long iters, int grid) {
    // hyperbolic orbits skip the frame; the plain z-plane suffices to see area ~ 0
    RotationFrame f;
    f.anchor = orbit.p2;
    f.b1 = 1.0;
    f.b2 = 0.0;
    bool have_frame = false;
    try {
        f = rotation_frame(orbit, p);
        have_frame = true;
    } catch (const std::exception&) {
    }

    const double tp = tbar_prime_of(orbit, p);
    double r = rho > 0.0 ? rho : 3.0 * std::pow(tp, -1.5);

    IslandMeasurement best;
    const bool rho_fixed = rho > 0.0;
    for (int attempt = 0; attempt < 10; ++attempt) {
        long bounded = 0;
        double max_abs_u = 0.0, t_lo = 1e300, t_hi = -1e300, v_lo = 1e300, v_hi = -1e300;
        for (int iy = 0; iy < grid; ++iy) {
            for (int ix = 0; ix < grid; ++ix) {
                const cplx u0{-r + 2.0 * r * ix / (grid - 1), -r + 2.0 * r * iy / (grid - 1)};
                if (std::abs(u0) > r) continue; // outside the escape ball from the start
                bool stays = true;
                for (int dir = 0; dir < 2 && stays; ++dir) {
                    PhasePoint q{wrap_unit(f.anchor.t + f.from_u(u0).real()),
                                 f.anchor.v + f.from_u(u0).imag()};
                    for (long it = 0; it < iters && stays; ++it) {
                        try {
                            q = dir == 0 ? step(step(q, p), p)
                                         : step_inverse(step_inverse(q, p), p);
                        } catch (const DomainExit&) {
                            stays = false;
                            break;
                        }
                        double dt = q.t - f.anchor.t;
                        if (dt > 0.5) dt -= 1.0;
                        if (dt < -0.5) dt += 1.0;
                        const cplx uk = f.to_u({dt, q.v - f.anchor.v});
                        if (std::abs(uk) > r) stays = false;
                    }
                }
                if (stays) {
                    ++bounded;
                    max_abs_u = std::max({max_abs_u, std::abs(u0.real()), std::abs(u0.imag())});
                    const cplx z = f.from_u(u0);
                    t_lo = std::min(t_lo, z.real());
                    t_hi = std::max(t_hi, z.real());
                    v_lo = std::min(v_lo, z.imag());
                    v_hi = std::max(v_hi, z.imag());
                }
            }
        }
        best.rho = r;
        best.bounded_count = bounded;
        best.fraction = static_cast<double>(bounded) / (static_cast<double>(grid) * grid);
        best.area = best.fraction * 4.0 * r * r;
        best.t_extent = bounded > 0 ? t_hi - t_lo : 0.0;
        best.v_extent = bounded > 0 ? v_hi - v_lo : 0.0;
        best.empty = bounded <= 1; // the periodic point itself always survives

        if (rho_fixed || attempt == 9) return best;
        // zoom the sampling ball onto the island: the a-priori T'^{-3/2} scale
        // only fixes the order of magnitude, not the constant
        if (bounded <= std::max<long>(4, grid * grid / 10000)) {
            if (!have_frame) return best; // hyperbolic: stays center-only at any zoom
            r *= 0.25;
            continue;
        }
        if (max_abs_u > 0.9 * r) {
            r *= 2.0; // island clipped by the ball
            continue;
        }
        if (max_abs_u < 0.25 * r) {
            r = 3.0 * max_abs_u; // resolved but small: tighten for resolution
            continue;
        }
        return best;
    }
    return best;
}

double area_scaling(const std::vector<std::pair<double, double>>& tprime_area) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [tp, area] : tprime_area)
        if (area > 0.0 && tp > 0.0) pts.emplace_back(std::log(tp), std::log(area));
    if (pts.size() < 4) throw std::domain_error("area_scaling: need >= 4 positive areas");
    double lo = pts[0].first, hi = pts[0].first;
    for (auto& [x, y] : pts) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    if (hi - lo < std::log(10.0) * 0.999)
        throw std::domain_error("area_scaling: orbits must span at least a decade in T'");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(pts.size());
    for (auto& [x, y] : pts) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::pair<int, int>> constant_amplitude_pairs(const SystemParams& base,
                                                          double A0,
                                                          const std::vector<int>& ns) {
    std::vector<std::pair<int, int>> pairs;
    for (int n : ns) {
        const double v1 = flight_time_inverse(n + 0.5, base);
        const double T2 = flight_time(v1 + 2.0 * A0, base);
        const int m = static_cast<int>(std::llround(T2 + 0.5));
        if (m > n) pairs.emplace_back(n, m);
    }
    return pairs;
}

std::vector<CatalogOrbit> multiplier_controlled_catalog(
    const SystemParams& base, const std::vector<std::pair<int, int>>& pairs, double c1,
    double c2) {
    std::vector<CatalogOrbit> cat;
    for (const auto& [n, m] : pairs) {
        const auto w = orbits::elliptic_A_window(n, m, base, c1, c2);
        if (!w) continue;
        SystemParams q = base;
        q.A = 0.5 * (w->A_lo + w->A_hi);
        if (!(q.B > q.A / kTwoPi)) q.B = q.A;
        const auto o = orbits::find_plus_orbit(n, m, q);
        if (!o) continue;
        CatalogOrbit entry{*o, orbits::stability(*o, q), q, tbar_prime_of(*o, q)};
        cat.push_back(entry);
    }
    return cat;
}

} // namespace fermi::nf
