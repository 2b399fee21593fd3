#include "fermi/core_map.hpp"

#include <cmath>

namespace fermi {

void SystemParams::validate() const {
    if (!(A >= 0.0)) throw std::invalid_argument("SystemParams: A must be >= 0");
    if (!(C > 0.0)) throw std::invalid_argument("SystemParams: C must be > 0");
    if (!(v_min > 0.0)) throw std::invalid_argument("SystemParams: v_min must be > 0");
    if (!(B > A / kTwoPi)) throw std::invalid_argument("SystemParams: need B > A/(2pi)");
    if (!(gamma >= -1.0)) throw std::invalid_argument("SystemParams: gamma must be >= -1");
    // Only the odd-symmetry centers of A cos(2pi t) admit the reversor.
    if (std::abs(t0 - 0.25) > 1e-12 && std::abs(t0 - 0.75) > 1e-12)
        throw std::invalid_argument("SystemParams: t0 must be 1/4 or 3/4");
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::WeakPotential: return "WeakPotential";
        case Regime::Gravity: return "Gravity";
        case Regime::StrongPotential: return "StrongPotential";
        case Regime::Elastic: return "Elastic";
        case Regime::StrongPotentialII: return "StrongPotentialII";
        case Regime::FermiUlamLimit: return "FermiUlamLimit";
    }
    return "?";
}

double wrap_unit(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r -= 1.0; // floor rounding can push tiny negatives to 1.0
    if (r < 0.0) r += 1.0;
    return r;
}

double circle_dist(double a, double b) {
    double d = wrap_unit(a - b);
    return d <= 0.5 ? d : 1.0 - d;
}

double gamma_from_alpha(double alpha) {
    if (!(alpha > 0.0)) throw std::domain_error("gamma_from_alpha: alpha must be > 0");
    return 2.0 / alpha - 1.0;
}

Regime classify_regime(double gamma) {
    if (gamma < -1.0) throw std::domain_error("classify_regime: gamma < -1");
    if (gamma == -1.0) return Regime::FermiUlamLimit;
    if (gamma < 0.0) return Regime::StrongPotentialII;
    if (gamma == 0.0) return Regime::Elastic;
    if (gamma < 1.0) return Regime::StrongPotential;
    if (gamma == 1.0) return Regime::Gravity;
    return Regime::WeakPotential;
}

double wall_derivative(double t, int order, const SystemParams& p) {
    const double w = kTwoPi * t;
    switch (order) {
        case 1: return p.A * std::cos(w);
        case 2: return -kTwoPi * p.A * std::sin(w);
        case 3: return -kTwoPi * kTwoPi * p.A * std::cos(w);
        case 4: return kTwoPi * kTwoPi * kTwoPi * p.A * std::sin(w);
        default: throw std::domain_error("wall_derivative: order must be in 1..4");
    }
}

double flight_time(double v, const SystemParams& p) {
    if (!(v >= p.v_min)) throw std::domain_error("flight_time: v below v_min");
    return p.C * std::pow(v, p.gamma);
}

double flight_time_inverse(double T, const SystemParams& p) {
    if (!(T > 0.0)) throw std::domain_error("flight_time_inverse: T must be > 0");
    if (p.gamma == 0.0)
        throw std::domain_error("flight_time_inverse: T(v) is constant for gamma = 0");
    return std::pow(T / p.C, 1.0 / p.gamma);
}

double flight_time_derivative(double v, const SystemParams& p) {
    return p.C * p.gamma * std::pow(v, p.gamma - 1.0);
}

PhasePoint step(const PhasePoint& pt, const SystemParams& p) {
    const double t1 = wrap_unit(pt.t + flight_time(pt.v, p));
    const double v1 = pt.v + 2.0 * wall_derivative(t1, 1, p);
    if (v1 < p.v_min) throw DomainExit(t1, v1);
    return {t1, v1};
}

PhasePoint step_inverse(const PhasePoint& pt, const SystemParams& p) {
    const double v0 = pt.v - 2.0 * wall_derivative(pt.t, 1, p);
    if (v0 < p.v_min) throw DomainExit(pt.t, v0);
    const double t0 = wrap_unit(pt.t - flight_time(v0, p));
    return {t0, v0};
}

Jacobian2x2 differential(const PhasePoint& pt, const SystemParams& p) {
    const double Tp = flight_time_derivative(pt.v, p);
    const double t1 = wrap_unit(pt.t + flight_time(pt.v, p));
    const double dd = wall_derivative(t1, 2, p);
    return {1.0, Tp, 2.0 * dd, 1.0 + 2.0 * Tp * dd};
}

PhasePoint reversor(const PhasePoint& pt, const SystemParams& p) {
    return {wrap_unit(2.0 * p.t0 - pt.t - flight_time(pt.v, p)), pt.v};
}

Trajectory iterate(const PhasePoint& pt, long n, const SystemParams& p) {
    Trajectory tr;
    const long steps = n >= 0 ? n : -n;
    tr.points.reserve(static_cast<size_t>(steps) + 1);
    tr.points.push_back(pt);
    PhasePoint cur = pt;
    for (long i = 0; i < steps; ++i) {
        try {
            cur = n >= 0 ? step(cur, p) : step_inverse(cur, p);
        } catch (const DomainExit& e) {
            tr.exited = true;
            tr.exit_index = i;
            tr.exit_t_raw = e.t_raw;
            tr.exit_v_raw = e.v_raw;
            break;
        }
        tr.points.push_back(cur);
    }
    return tr;
}

} // namespace fermi
