// Static-wall approximation of a ball bouncing on an oscillating plate:
// F : (t, v) -> (t + T(v) mod 1, v + 2 phi_dot(t + T(v))),  T(v) = C v^gamma.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fermi {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

/// Plate motion phi(t) = B + (A/2pi) sin(2pi t) and flight law T(v) = C v^gamma.
struct SystemParams {
    double A = 0.1;     // plate velocity amplitude, max of phi_dot
    double B = 1.0;     // mean plate height; metadata only, never enters the map
    double t0 = 0.25;   // odd-symmetry center of phi_dot on S^1 (1/4 or 3/4)
    double C = 1.0;     // flight-time coefficient
    double gamma = 1.5; // flight-time exponent
    double v_min = 1e-6; // admissible velocity floor

    void validate() const; // throws std::invalid_argument naming the violation
};

struct PhasePoint {
    double t = 0.0; // collision phase in [0,1)
    double v = 0.0; // post-collision velocity, > 0
};

struct Jacobian2x2 {
    double dt_dt = 1.0, dt_dv = 0.0;
    double dv_dt = 0.0, dv_dv = 1.0;
    double det() const { return dt_dt * dv_dv - dt_dv * dv_dt; }
    double trace() const { return dt_dt + dv_dv; }
};

enum class Regime {
    WeakPotential,     // gamma > 1  (0 < alpha < 1)
    Gravity,           // gamma = 1
    StrongPotential,   // 0 < gamma < 1
    Elastic,           // gamma = 0
    StrongPotentialII, // -1 < gamma < 0
    FermiUlamLimit,    // gamma = -1
};

const char* regime_name(Regime r);

/// Step left the admissible domain (v' < v_min): the approximation is not
/// valid near v = 0, so this is an explicit exit rather than a clamp.
struct DomainExit : std::runtime_error {
    double t_raw, v_raw;
    DomainExit(double t, double v)
        : std::runtime_error("domain exit: v' = " + std::to_string(v) +
                             " fell below v_min at t' = " + std::to_string(t)),
          t_raw(t), v_raw(v) {}
};

/// Reduce to [0,1); floor-based so negative arguments land correctly.
double wrap_unit(double x);

/// Circle distance |a - b| on R/Z.
double circle_dist(double a, double b);

double gamma_from_alpha(double alpha);
Regime classify_regime(double gamma);

/// d^order phi / dt^order for order in 1..4.
double wall_derivative(double t, int order, const SystemParams& p);

double flight_time(double v, const SystemParams& p);            // T(v) = C v^gamma
double flight_time_inverse(double T, const SystemParams& p);    // v(T) = (T/C)^(1/gamma)
double flight_time_derivative(double v, const SystemParams& p); // T'(v) = C gamma v^(gamma-1)

PhasePoint step(const PhasePoint& pt, const SystemParams& p);
PhasePoint step_inverse(const PhasePoint& pt, const SystemParams& p);

/// dF at pt; phi_ddot is evaluated at the image phase t + T(v). det = 1.
Jacobian2x2 differential(const PhasePoint& pt, const SystemParams& p);

/// R : (t,v) -> (2 t0 - t - T(v), v).  R^2 = id and R F R = F^{-1}.
PhasePoint reversor(const PhasePoint& pt, const SystemParams& p);

struct Trajectory {
    std::vector<PhasePoint> points; // length n+1 on success
    bool exited = false;
    long exit_index = -1; // index of the step that failed
    double exit_t_raw = 0.0, exit_v_raw = 0.0;
};

/// n >= 0 iterates forward, n < 0 uses step_inverse. Stops early on domain exit.
Trajectory iterate(const PhasePoint& pt, long n, const SystemParams& p);

} // namespace fermi
