// Expanding-Cantor constructions with good-branch selection and running
// Hausdorff dimension, plus the hyperbolic region / cone field / expansion
// bounds that reduce the escaping set to that model on the curve Gamma_C.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fermi/core_map.hpp"

namespace fermi::fractal {

struct Interval {
    double lo = 0.0, hi = 0.0;
    double len() const { return hi - lo; }
    bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
};

/// Per-level expansion bounds 1 < m_lo_n < m_hi_n with m_hi_n < C_ratio m_lo_n.
struct ExpansionBounds {
    std::vector<double> m_lo, m_hi;
    double C_ratio = 1.0;
    void validate() const;
};

/// Degree-d expanding circle map f(x) = d x + (kappa/2pi) sin(2pi x) mod 1,
/// lift slope in [d - kappa, d + kappa]; kappa = 0 is the exact-linear case.
struct ModelMap {
    int d = 3;
    double kappa = 0.0;
    double lift(double x) const;
    double slope(double x) const;
    double invert(double y) const; // monotone bisection on [0,1], y in [0, d]
};

/// k with k+1 <= m*len < k+2, for both bounds. Requires m_lo*len > 2.
std::pair<std::int64_t, std::int64_t> k_bounds(double m_lo, double m_hi, double len);

struct CantorLevel {
    int k_good = 0;       // good branches of f_n relative to J0 (shared by all nodes)
    double log_K = 0.0;   // log of the cumulative good-interval count K_n
    std::vector<Interval> intervals; // explicit nodes; empty past the storage cap
    std::vector<std::uint32_t> parent; // index into the previous level, explicit mode
    double uniform_len = 0.0; // > 0 when every node at this level has this length
    double min_len = 0.0, max_len = 0.0;
    double s_min = 0.0, s_max = 0.0; // running dimension extremes at this level
};

struct CantorTree {
    Interval J0;
    std::vector<CantorLevel> levels; // levels[i] = depth i+1
};

/// Nested good-branch preimage tree of J0 under f_depth o ... o f_1.
/// Past explicit_cap intervals a level is kept in summary form, which is only
/// exact for kappa = 0 maps (equal lengths); otherwise this throws.
CantorTree build_cantor(const std::vector<ModelMap>& maps, Interval J0, int depth,
                        std::size_t explicit_cap = 200000);

/// s with |J'|^s = K_n^{-1}, i.e. s = log K_n / (-log |J'|).
double running_dimension(const CantorTree& tree, int level, std::size_t node);

/// Lower bound 1 + (log len + n(log(len/3) - log C)) / (log M_hi_n - log len)
/// on the running dimension of a good-branch tree with ratio-C bounds.
double dimension_lower_bound(int n, double len, double C_ratio, double M_hi_n);
double dimension_lower_bound_log(int n, double len, double C_ratio, double log_M_hi_n);

struct HyperbolicRegionParams {
    double a = 0.0;        // |phi_ddot| > a defines B_a
    double eps = 0.0;      // velocity gain per collision > eps defines A_eps
    double c = 0.0;        // cone half-width, 0 < c < a
    double C_height = 0.0; // Gamma_C = {(t, C_height + 2 phi_dot(t))}
    double v_bar = 0.0;    // validity floor for hyperbolicity and cone invariance
    double Ct1 = 1.0, Ct2 = 1.0; // calibrated chain-rule constants

    /// a = pi A (half the max of |phi_ddot|), eps = A, c = a/2.
    static HyperbolicRegionParams defaults_for(const SystemParams& p, double C_height);
    /// Largest t-interval with 2 phi_dot > eps and |phi_ddot| > a (closed form).
    Interval region_interval(const SystemParams& p) const;
};

/// |Tr dF| - 2 when F(p) lands in B_a; empty when the hypothesis fails.
std::optional<double> hyperbolicity_margin(const PhasePoint& pt, const SystemParams& p,
                                           double a);

/// Pushes both boundary rays of the cone at pt through dF and checks they land
/// strictly inside the cone at F(pt). Requires the cone to be defined (the
/// relevant |phi_ddot| > a) at both points.
bool cone_invariance_test(const PhasePoint& pt, const SystemParams& p, double c, double a);

struct FnDerivative {
    double value = 0.0; // |F_n'(t)| along Gamma_C by the chain rule
    double lower_bound = 0.0, upper_bound = 0.0;
    bool in_region = true; // orbit stayed in A_eps, B_a, v >= v_bar for all n steps
};

FnDerivative Fn_derivative(double t, int n, double C_height, const SystemParams& p,
                           const HyperbolicRegionParams& region);

/// Fixes Ct1/Ct2 from in-region samples so the product bounds hold up to n_max.
void calibrate_reduction_constants(HyperbolicRegionParams& region, const SystemParams& p,
                                   int n_max, int samples);

struct BoxCount {
    int j = 0;       // resolution 2^-j
    std::int64_t boxes = 0;
};

struct EscapeTree {
    std::vector<std::vector<Interval>> levels; // level k: first k collisions inside J0
    std::vector<double> box_dims;              // per-level box-dimension estimates
    std::vector<BoxCount> ladder;              // ladder of the deepest level
    double box_dim = 0.0;
};

/// Nested t-intervals on Gamma_C whose first `depth` collision phases stay in
/// J0 (the gain-and-hyperbolicity window), with box-counting estimates.
EscapeTree escape_candidate_tree(const SystemParams& p, const HyperbolicRegionParams& region,
                                 Interval J0, int depth);

} // namespace fermi::fractal
