#include "fermi/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fermi::fractal {

void ExpansionBounds::validate() const {
    if (m_lo.size() != m_hi.size() || m_lo.empty())
        throw std::invalid_argument("ExpansionBounds: need matching nonempty sequences");
    double prev_lo = 1.0, prev_hi = 1.0;
    for (std::size_t i = 0; i < m_lo.size(); ++i) {
        if (!(1.0 < m_lo[i] && m_lo[i] < m_hi[i]))
            throw std::invalid_argument("ExpansionBounds: need 1 < m_lo < m_hi");
        if (m_lo[i] + 1e-15 < prev_lo || m_hi[i] + 1e-15 < prev_hi)
            throw std::invalid_argument("ExpansionBounds: sequences must be nondecreasing");
        if (!(m_hi[i] < C_ratio * m_lo[i]))
            throw std::invalid_argument("ExpansionBounds: need m_hi < C_ratio * m_lo");
        prev_lo = m_lo[i];
        prev_hi = m_hi[i];
    }
}

double ModelMap::lift(double x) const {
    return d * x + kappa * std::sin(kTwoPi * x) / kTwoPi;
}

double ModelMap::slope(double x) const { return d + kappa * std::cos(kTwoPi * x); }

double ModelMap::invert(double y) const {
    if (kappa == 0.0) return y / d;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lift(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<std::int64_t, std::int64_t> k_bounds(double m_lo, double m_hi, double len) {
    if (!(m_lo * len > 2.0))
        throw std::domain_error("k_bounds: requires m_lo * len > 2");
    const auto k_from = [](double x) {
        return static_cast<std::int64_t>(std::floor(x)) - 1; // k+1 <= x < k+2
    };
    return {k_from(m_lo * len), k_from(m_hi * len)};
}

CantorTree build_cantor(const std::vector<ModelMap>& maps, Interval J0, int depth,
                        std::size_t explicit_cap) {
    if (depth < 1 || static_cast<int>(maps.size()) < depth)
        throw std::invalid_argument("build_cantor: need one map per level");
    if (!(0.0 <= J0.lo && J0.lo < J0.hi && J0.hi <= 1.0))
        throw std::invalid_argument("build_cantor: J0 must be a subinterval of [0,1]");

    CantorTree tree;
    tree.J0 = J0;
    // paths of the currently explicit nodes (branch index per level)
    std::vector<std::vector<std::uint16_t>> paths{{}};
    bool summary = false;
    bool all_linear = true;
    double log_K = 0.0;
    double uniform_len = J0.len();
    std::vector<Interval> prev_intervals{J0};

    for (int lvl = 0; lvl < depth; ++lvl) {
        const ModelMap& f = maps[static_cast<std::size_t>(lvl)];
        all_linear = all_linear && f.kappa == 0.0;

        // branch images of J0 under f^{-1}; good ones sit entirely inside J0
        std::vector<Interval> Wb;
        std::vector<int> good_branches;
        for (int b = 0; b < f.d; ++b) {
            Interval w{f.invert(J0.lo + b), f.invert(J0.hi + b)};
            Wb.push_back(w);
            if (J0.lo <= w.lo + 1e-15 && w.hi <= J0.hi + 1e-15) good_branches.push_back(b);
        }
        CantorLevel level;
        level.k_good = static_cast<int>(good_branches.size());
        if (level.k_good == 0)
            throw std::runtime_error("build_cantor: level " + std::to_string(lvl + 1) +
                                     " has no good branches (preconditions violated)");
        log_K += std::log(static_cast<double>(level.k_good));
        level.log_K = log_K;
        uniform_len /= f.d;

        const std::size_t next_count = paths.size() * static_cast<std::size_t>(level.k_good);
        if (!summary && next_count > explicit_cap) {
            if (!all_linear)
                throw std::runtime_error(
                    "build_cantor: interval count exceeds the explicit cap and the maps "
                    "are not exact-linear; reduce depth");
            summary = true;
            paths.clear();
            prev_intervals.clear();
        }

        if (summary) {
            level.uniform_len = uniform_len;
            level.min_len = level.max_len = uniform_len;
        } else {
            std::vector<std::vector<std::uint16_t>> next_paths;
            next_paths.reserve(next_count);
            level.intervals.reserve(next_count);
            level.parent.reserve(next_count);
            level.min_len = 1e300;
            for (std::size_t pi = 0; pi < paths.size(); ++pi) {
                for (int b : good_branches) {
                    // pull the branch image back through the node's inverse chain
                    auto pull = [&](double w) {
                        for (int l = lvl - 1; l >= 0; --l)
                            w = maps[static_cast<std::size_t>(l)].invert(
                                w + paths[pi][static_cast<std::size_t>(l)]);
                        return w;
                    };
                    Interval child{pull(Wb[static_cast<std::size_t>(b)].lo),
                                   pull(Wb[static_cast<std::size_t>(b)].hi)};
                    level.intervals.push_back(child);
                    level.parent.push_back(static_cast<std::uint32_t>(pi));
                    level.min_len = std::min(level.min_len, child.len());
                    level.max_len = std::max(level.max_len, child.len());
                    auto path = paths[pi];
                    path.push_back(static_cast<std::uint16_t>(b));
                    next_paths.push_back(std::move(path));
                }
            }
            if (all_linear) level.uniform_len = uniform_len;
            paths = std::move(next_paths);
            prev_intervals = level.intervals;
        }
        if (summary) {
            level.s_min = level.s_max = log_K / -std::log(uniform_len);
        } else {
            level.s_min = log_K / -std::log(level.min_len); // shortest interval, smallest s
            level.s_max = log_K / -std::log(level.max_len);
        }
        tree.levels.push_back(std::move(level));
    }
    return tree;
}

double running_dimension(const CantorTree& tree, int level, std::size_t node) {
    if (level < 1 || level > static_cast<int>(tree.levels.size()))
        throw std::domain_error("running_dimension: level out of range");
    const CantorLevel& L = tree.levels[static_cast<std::size_t>(level - 1)];
    double len;
    if (!L.intervals.empty()) {
        if (node >= L.intervals.size())
            throw std::domain_error("running_dimension: node out of range");
        len = L.intervals[node].len();
    } else {
        len = L.uniform_len;
    }
    if (!(len > 0.0 && len < 1.0))
        throw std::domain_error("running_dimension: interval length must be in (0,1)");
    return L.log_K / -std::log(len);
}

double dimension_lower_bound(int n, double len, double C_ratio, double M_hi_n) {
    return dimension_lower_bound_log(n, len, C_ratio, std::log(M_hi_n));
}

double dimension_lower_bound_log(int n, double len, double C_ratio, double log_M_hi_n) {
    if (!(log_M_hi_n > 0.0)) throw std::domain_error("dimension_lower_bound: M_hi_n must be > 1");
    return 1.0 + (std::log(len) + n * (std::log(len / 3.0) - std::log(C_ratio))) /
                     (log_M_hi_n - std::log(len));
}

HyperbolicRegionParams HyperbolicRegionParams::defaults_for(const SystemParams& p,
                                                            double C_height) {
    HyperbolicRegionParams r;
    r.a = 0.5 * kTwoPi * p.A; // half of max |phi_ddot| = 2 pi A
    r.eps = p.A;
    r.c = 0.5 * r.a;
    r.C_height = C_height;
    // floor where T'(v) a comfortably dominates the O(1) terms
    r.v_bar = p.gamma != 1.0
                  ? std::pow(8.0 / (p.C * p.gamma * std::max(r.a, 1e-12)), 1.0 / (p.gamma - 1.0))
                  : 1.0;
    return r;
}

Interval HyperbolicRegionParams::region_interval(const SystemParams& p) const {
    if (!(p.A > 0.0)) throw std::domain_error("region_interval: needs A > 0");
    const double ca = eps / (2.0 * p.A);
    const double sa = a / (kTwoPi * p.A);
    if (!(ca < 1.0 && sa < 1.0))
        throw std::domain_error("region_interval: thresholds exceed the wall amplitudes");
    const double t_gain = std::acos(ca) / kTwoPi;  // A_eps = (-t_gain, t_gain)
    const double t_acc = std::asin(sa) / kTwoPi;   // B_a starts at t_acc
    if (!(t_acc < t_gain))
        throw std::domain_error("region_interval: A_eps and B_a do not intersect");
    return {t_acc, t_gain};
}

std::optional<double> hyperbolicity_margin(const PhasePoint& pt, const SystemParams& p,
                                           double a) {
    const double t1 = wrap_unit(pt.t + flight_time(pt.v, p));
    const double dd = wall_derivative(t1, 2, p);
    if (!(std::abs(dd) > a)) return std::nullopt;
    return std::abs(2.0 * (1.0 + flight_time_derivative(pt.v, p) * dd)) - 2.0;
}

bool cone_invariance_test(const PhasePoint& pt, const SystemParams& p, double c, double a) {
    if (!(0.0 < c && c < a)) throw std::domain_error("cone_invariance_test: need 0 < c < a");
    // the cone at p is anchored at the expanding direction 2 phi_ddot(t+T(v));
    // its push lands at F(p) whose own collision phase is the same t+T(v), so
    // source and target anchors agree along orbits
    const double t1 = wrap_unit(pt.t + flight_time(pt.v, p));
    if (!(std::abs(wall_derivative(pt.t, 2, p)) > a) ||
        !(std::abs(wall_derivative(t1, 2, p)) > a))
        throw std::domain_error("cone_invariance_test: p or F(p) outside B_a");

    const Jacobian2x2 J = differential(pt, p);
    const double center = 2.0 * wall_derivative(t1, 2, p);
    for (double s : {center - c, center + c}) {
        const double dt = J.dt_dt + J.dt_dv * s;
        const double dv = J.dv_dt + J.dv_dv * s;
        if (dt == 0.0) return false; // vertical tangent: outside any cone
        if (!(std::abs(dv / dt - center) < c)) return false;
    }
    return true;
}

FnDerivative Fn_derivative(double t, int n, double C_height, const SystemParams& p,
                           const HyperbolicRegionParams& region) {
    if (n < 1) throw std::domain_error("Fn_derivative: need n >= 1");
    FnDerivative out;
    PhasePoint cur{wrap_unit(t), C_height + 2.0 * wall_derivative(t, 1, p)};
    double wt = 1.0, wv = 2.0 * wall_derivative(t, 2, p); // tangent of Gamma_C
    const double C_lo = C_height - 2.0 * p.A;
    const double C_hi = C_height + 2.0 * p.A;
    double log_lower = 0.0, log_upper = 0.0;
    for (int k = 0; k <= n; ++k) {
        log_lower += (p.gamma - 1.0) * std::log(C_lo + region.eps * k);
        log_upper += (p.gamma - 1.0) * std::log(C_hi + 3.0 * p.A * k);
    }
    out.lower_bound = region.Ct1 * std::exp(log_lower);
    out.upper_bound = region.Ct2 * std::exp(log_upper);

    for (int k = 1; k <= n; ++k) {
        const Jacobian2x2 J = differential(cur, p);
        const double nwt = J.dt_dt * wt + J.dt_dv * wv;
        const double nwv = J.dv_dt * wt + J.dv_dv * wv;
        wt = nwt;
        wv = nwv;
        try {
            cur = step(cur, p);
        } catch (const DomainExit&) {
            out.in_region = false;
            out.value = std::abs(wt);
            return out;
        }
        const bool gain = 2.0 * wall_derivative(cur.t, 1, p) > region.eps;
        const bool acc = std::abs(wall_derivative(cur.t, 2, p)) > region.a;
        if (!gain || !acc || cur.v < region.v_bar) out.in_region = false;
    }
    out.value = std::abs(wt);
    return out;
}

void calibrate_reduction_constants(HyperbolicRegionParams& region, const SystemParams& p,
                                   int n_max, int samples) {
    const Interval J0 = region.region_interval(p);
    double lo_ratio = 1e300, hi_ratio = 0.0;
    HyperbolicRegionParams raw = region;
    raw.Ct1 = raw.Ct2 = 1.0;
    bool any = false;
    for (int i = 0; i < samples; ++i) {
        const double t = J0.lo + J0.len() * (i + 0.5) / samples;
        for (int n = 1; n <= n_max; ++n) {
            const FnDerivative d = Fn_derivative(t, n, region.C_height, p, raw);
            if (!d.in_region) break;
            any = true;
            lo_ratio = std::min(lo_ratio, d.value / d.lower_bound);
            hi_ratio = std::max(hi_ratio, d.value / d.upper_bound);
        }
    }
    if (!any)
        throw std::runtime_error("calibrate_reduction_constants: no in-region samples");
    // 10% slack so verification on a different sample grid stays inside
    region.Ct1 = lo_ratio * 0.9;
    region.Ct2 = hi_ratio * 1.1;
}

namespace {

// lift of the k-th collision phase above gamma_C(t); continuous in t
double collision_lift(double t, int k, double C_height, const SystemParams& p) {
    double t_raw = t;
    PhasePoint cur{wrap_unit(t), C_height + 2.0 * wall_derivative(t, 1, p)};
    for (int i = 0; i < k; ++i) {
        t_raw += flight_time(cur.v, p);
        cur = step(cur, p);
    }
    return t_raw;
}

std::int64_t count_boxes(const std::vector<Interval>& sorted_disjoint, int j) {
    const double scale = std::ldexp(1.0, j); // 2^j
    std::int64_t count = 0, last = -1;
    for (const auto& iv : sorted_disjoint) {
        auto lo = static_cast<std::int64_t>(std::floor(iv.lo * scale));
        auto hi = static_cast<std::int64_t>(std::floor(iv.hi * scale));
        if (lo <= last) lo = last + 1;
        if (hi >= lo) {
            count += hi - lo + 1;
            last = hi;
        }
    }
    return count;
}

double ladder_slope(const std::vector<BoxCount>& ladder) {
    // slope over the straight part: R^2-maximizing window spanning at least
    // half the ladder (short windows lock onto single stair treads)
    const double ln2 = std::log(2.0);
    const std::size_t min_w = std::max<std::size_t>(4, ladder.size() / 2);
    double best_r2 = -1.0, best_slope = 0.0;
    for (std::size_t i0 = 0; i0 + min_w <= ladder.size(); ++i0) {
        for (std::size_t i1 = i0 + min_w - 1; i1 < ladder.size(); ++i1) {
            if (!(ladder[i1].boxes > ladder[i0].boxes)) continue;
            double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
            const double n = static_cast<double>(i1 - i0 + 1);
            for (std::size_t j = i0; j <= i1; ++j) {
                const double x = ladder[j].j * ln2;
                const double y = std::log(static_cast<double>(ladder[j].boxes));
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                syy += y * y;
            }
            const double cxx = sxx - sx * sx / n, cxy = sxy - sx * sy / n,
                         cyy = syy - sy * sy / n;
            const double r2 = cyy > 0.0 ? cxy * cxy / (cxx * cyy) : 0.0;
            if (r2 > best_r2) {
                best_r2 = r2;
                best_slope = cxy / cxx;
            }
        }
    }
    return best_slope;
}

std::vector<BoxCount> build_ladder(const std::vector<Interval>& intervals, double J0_len) {
    std::vector<Interval> sorted = intervals;
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    double min_len = 1.0;
    for (const auto& iv : sorted) min_len = std::min(min_len, std::max(iv.len(), 1e-14));
    const int j_lo = std::max(1, static_cast<int>(std::ceil(-std::log2(J0_len))) + 1);
    const int j_hi = std::max(j_lo + 3, static_cast<int>(std::floor(-std::log2(min_len))));
    std::vector<BoxCount> ladder;
    for (int j = j_lo; j <= j_hi; ++j) ladder.push_back({j, count_boxes(sorted, j)});
    return ladder;
}

} // namespace

EscapeTree escape_candidate_tree(const SystemParams& p, const HyperbolicRegionParams& region,
                                 Interval J0, int depth) {
    const Interval admissible = region.region_interval(p);
    if (!(admissible.lo <= J0.lo && J0.hi <= admissible.hi))
        throw std::domain_error(
            "escape_candidate_tree: J0 must sit inside the A_eps and B_a window");
    if (depth < 1) throw std::domain_error("escape_candidate_tree: need depth >= 1");

    EscapeTree tree;
    std::vector<Interval> current{J0};
    for (int k = 1; k <= depth; ++k) {
        std::vector<Interval> next;
        auto inside = [&](double t) {
            const double ph = wrap_unit(collision_lift(t, k, region.C_height, p));
            return J0.lo < ph && ph < J0.hi;
        };
        for (const auto& parent : current) {
            // sample finely enough that every crossing of the J0 boundary is seen
            const double span = std::abs(collision_lift(parent.hi, k, region.C_height, p) -
                                         collision_lift(parent.lo, k, region.C_height, p));
            const int ns = std::clamp(static_cast<int>(span / J0.len() * 24.0) + 16, 16, 400000);
            double prev_t = parent.lo;
            bool prev_in = inside(prev_t);
            double open_lo = prev_in ? parent.lo : 0.0;
            for (int i = 1; i <= ns; ++i) {
                const double t = parent.lo + parent.len() * i / ns;
                const bool in = inside(t);
                if (in != prev_in) {
                    double a = prev_t, b = t;
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (a + b);
                        (inside(mid) == prev_in ? a : b) = mid;
                    }
                    const double edge = 0.5 * (a + b);
                    if (prev_in) next.push_back({open_lo, edge});
                    else open_lo = edge;
                }
                prev_t = t;
                prev_in = in;
            }
            if (prev_in) next.push_back({open_lo, parent.hi});
        }
        current = std::move(next);
        tree.levels.push_back(current);
        if (current.empty()) break;
        const auto ladder = build_ladder(current, J0.len());
        tree.box_dims.push_back(ladder_slope(ladder));
        if (k == depth || current.empty()) tree.ladder = ladder;
    }
    if (!tree.box_dims.empty()) tree.box_dim = tree.box_dims.back();
    return tree;
}

} // namespace fermi::fractal
