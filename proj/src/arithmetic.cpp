#include "fermi/arithmetic.hpp"

#include <algorithm>
#include <cmath>

namespace fermi::arith {

namespace {

// splitmix64; pinned here so Monte Carlo streams are identical across platforms
std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

void window_coefs(const Params& P, WindowFamily family, double& lo_coef, double& hi_coef) {
    lo_coef = P.C1 / P.a;
    hi_coef = P.C2 / P.a;
    switch (family) {
        case WindowFamily::PerA: lo_coef = P.C1 / P.a; hi_coef = P.C2 / P.a; break;
        case WindowFamily::Superset: lo_coef = P.C1 / P.beta_hi; hi_coef = P.C2 / P.alpha_lo; break;
        case WindowFamily::Subset: lo_coef = P.C1 / P.alpha_lo; hi_coef = P.C2 / P.beta_hi; break;
    }
}

// smallest positive a with (n^{1/g} + a)^g = m + (Ci/a) m^{-xi}
double window_edge(std::int64_t n, std::int64_t m, double Ci, const Params& P) {
    const double n_root = std::pow(static_cast<double>(n), 1.0 / P.gamma);
    const double moff = std::pow(static_cast<double>(m), -P.xi);
    double a = std::pow(static_cast<double>(m), 1.0 / P.gamma) - n_root;
    for (int it = 0; it < 80; ++it) {
        const double next =
            std::pow(static_cast<double>(m) + (Ci / a) * moff, 1.0 / P.gamma) - n_root;
        if (!(next > 0.0)) return a; // degenerate geometry; caller clips anyway
        if (std::abs(next - a) < 1e-16 * std::max(1.0, a)) return next;
        a = next;
    }
    return a;
}

double root_diff(long double x_hi, long double x_lo, double inv_gamma) {
    return static_cast<double>(std::pow(x_hi, static_cast<long double>(inv_gamma)) -
                               std::pow(x_lo, static_cast<long double>(inv_gamma)));
}

} // namespace

void Params::validate() const {
    if (!(a > 0.0)) throw std::invalid_argument("arith::Params: a must be > 0");
    if (!(gamma > 1.0)) throw std::invalid_argument("arith::Params: gamma must be > 1");
    if (!(xi > 0.0)) throw std::invalid_argument("arith::Params: xi must be > 0");
    if (!(0.0 < C1 && C1 < C2)) throw std::invalid_argument("arith::Params: need 0 < C1 < C2");
    if (!(0.0 < alpha_lo && alpha_lo < beta_hi))
        throw std::invalid_argument("arith::Params: need 0 < Alpha < beta");
    if (!(beta_hi / alpha_lo < C2 / C1))
        throw std::invalid_argument("arith::Params: need beta/alpha < C2/C1");
}

Params Params::plus_orbits(double gamma_) {
    Params P;
    P.gamma = gamma_;
    P.xi = 1.0 - 1.0 / gamma_;
    return P;
}

Params Params::minus_orbits(double gamma_) {
    Params P;
    P.gamma = gamma_;
    P.xi = 2.0 - 2.0 / gamma_;
    return P;
}

const char* regime_class_name(RegimeReport::Class c) {
    switch (c) {
        case RegimeReport::Class::AllParameters: return "AllParameters";
        case RegimeReport::Class::FullMeasure: return "FullMeasure";
        case RegimeReport::Class::ZeroMeasure: return "ZeroMeasure";
        case RegimeReport::Class::CriticalMixed: return "CriticalMixed";
    }
    return "?";
}

Interval window(double a, std::int64_t m, const Params& P) {
    if (!(a > 0.0) || m < 1) throw std::domain_error("window: need a > 0 and m >= 1");
    const double moff = std::pow(static_cast<double>(m), -P.xi);
    return {static_cast<double>(m) + (P.C1 / a) * moff,
            static_cast<double>(m) + (P.C2 / a) * moff};
}

std::optional<Hit> check_n(std::int64_t n, const Params& P, WindowFamily family) {
    if (n < 1) throw std::domain_error("check_n: n must be >= 1");
    double lo_coef, hi_coef;
    window_coefs(P, family, lo_coef, hi_coef);
    const double x =
        std::pow(std::pow(static_cast<double>(n), 1.0 / P.gamma) + P.a, P.gamma);
    const auto m = static_cast<std::int64_t>(std::floor(x));
    if (m < 1) return std::nullopt;
    const double moff = std::pow(static_cast<double>(m), -P.xi);
    Interval w{static_cast<double>(m) + lo_coef * moff,
               static_cast<double>(m) + hi_coef * moff};
    double excess = x - static_cast<double>(m);
    if (std::abs(excess) < 1e-9 * static_cast<double>(m)) {
        // re-evaluate the cancellation-prone difference in extended precision
        const long double xl = std::pow(
            std::pow(static_cast<long double>(n), 1.0L / static_cast<long double>(P.gamma)) +
                static_cast<long double>(P.a),
            static_cast<long double>(P.gamma));
        excess = static_cast<double>(xl - static_cast<long double>(m));
    }
    if (!(excess > lo_coef * moff && excess < hi_coef * moff)) return std::nullopt;
    return Hit{n, m - n, x, w};
}

ScanResult scan(const Params& P, std::int64_t N, WindowFamily family) {
    P.validate();
    ScanResult r;
    for (std::int64_t n = 1; n <= N; ++n)
        if (auto h = check_n(n, P, family)) {
            r.hits.push_back(*h);
            ++r.count;
        }
    return r;
}

RegimeReport regime(const Params& P) {
    P.validate();
    RegimeReport r;
    const double inv_gamma = 1.0 / P.gamma;
    r.overlapping = P.xi < inv_gamma - 1e-12;
    r.diverging = P.xi <= 1.0 + 1e-12;
    r.critical = std::abs(P.xi - inv_gamma) < 1e-12;
    if (r.critical) r.predicted = RegimeReport::Class::CriticalMixed;
    else if (r.overlapping) r.predicted = RegimeReport::Class::AllParameters;
    else if (r.diverging) r.predicted = RegimeReport::Class::FullMeasure;
    else r.predicted = RegimeReport::Class::ZeroMeasure;
    return r;
}

Asymptotics interval_asymptotics(std::int64_t n, std::int64_t k, const Params& P) {
    if (n < 1 || n + k < 1) throw std::domain_error("interval_asymptotics: need n, n+k >= 1");
    Asymptotics r;
    const std::int64_t m = n + k;
    const double inv_gamma = 1.0 / P.gamma;

    const double a1 = window_edge(n, m, P.C1, P);
    const double a2 = window_edge(n, m, P.C2, P);
    r.delta_exact = a2 - a1;
    r.a_location = 0.5 * (a1 + a2);
    r.delta_E1 = ((P.C2 - P.C1) / r.a_location) / P.gamma *
                 std::pow(static_cast<double>(m), -P.xi - (1.0 - inv_gamma));

    r.Delta_exact = root_diff(static_cast<long double>(m) + 1.0L,
                              static_cast<long double>(m), inv_gamma);
    r.Delta_E2 = (1.0 / P.gamma) * std::pow(static_cast<double>(m), -(1.0 - inv_gamma));

    // drift of the k-th window between rows n and n+1; negative (moves left)
    r.Delta_bar_exact = root_diff(static_cast<long double>(m) + 1.0L,
                                  static_cast<long double>(m), inv_gamma) -
                        root_diff(static_cast<long double>(n) + 1.0L,
                                  static_cast<long double>(n), inv_gamma);
    r.Delta_bar_E3 = -(1.0 / P.gamma) * (1.0 - inv_gamma) * static_cast<double>(k) *
                     std::pow(static_cast<double>(n), inv_gamma - 2.0);

    const double n_root = std::pow(static_cast<double>(n), inv_gamma);
    const double lo = std::pow(n_root + P.alpha_lo, P.gamma) - static_cast<double>(n);
    const double hi = std::pow(n_root + P.beta_hi, P.gamma) - static_cast<double>(n);
    r.Kn_exact_lo = static_cast<std::int64_t>(std::ceil(lo));
    r.Kn_exact_hi = static_cast<std::int64_t>(std::floor(hi));
    const double scale = P.gamma * std::pow(static_cast<double>(n), 1.0 - inv_gamma);
    r.Kn_E4_lo = static_cast<std::int64_t>(std::ceil(P.alpha_lo * scale));
    r.Kn_E4_hi = static_cast<std::int64_t>(std::floor(P.beta_hi * scale));
    return r;
}

PartialSum measure_partial_sum(const Params& P, std::int64_t N) {
    P.validate();
    if (N < 10) throw std::domain_error("measure_partial_sum: need N >= 10");
    PartialSum out;
    double total = 0.0;
    for (std::int64_t n = 1; n <= N; ++n) {
        const auto asy = interval_asymptotics(n, 1, P);
        // window k-range within [alpha, beta], padded for edge windows
        const std::int64_t k_lo = std::max<std::int64_t>(1, asy.Kn_exact_lo - 2);
        const std::int64_t k_hi = std::max(k_lo, asy.Kn_exact_hi + 2);
        for (std::int64_t k = k_lo; k <= k_hi; ++k) {
            const double a1 = window_edge(n, n + k, P.C1, P);
            const double a2 = window_edge(n, n + k, P.C2, P);
            const double lo = std::max(a1, P.alpha_lo);
            const double hi = std::min(a2, P.beta_hi);
            if (hi > lo) total += hi - lo;
        }
    }
    out.exact_sum = total / (P.beta_hi - P.alpha_lo);
    const double ell = 0.5 * (P.ell_minus() + P.ell_plus());
    if (std::abs(P.xi - 1.0) < 1e-12) {
        out.log_variant = true;
        out.asymptotic = ell * std::log(static_cast<double>(N));
    } else {
        out.asymptotic = ell * std::pow(static_cast<double>(N), 1.0 - P.xi) / (1.0 - P.xi);
    }
    return out;
}

double measure_partial_sum_mc(const Params& P, std::int64_t N, std::int64_t total_samples,
                              std::uint64_t seed) {
    P.validate();
    const std::int64_t per_n = std::max<std::int64_t>(1, total_samples / N);
    std::uint64_t state = seed;
    std::int64_t hits = 0;
    Params Q = P;
    for (std::int64_t n = 1; n <= N; ++n) {
        for (std::int64_t j = 0; j < per_n; ++j) {
            Q.a = P.alpha_lo + (P.beta_hi - P.alpha_lo) * uniform01(state);
            if (check_n(n, Q)) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(per_n);
}

PairCorrelation pair_correlation(const Params& P, std::int64_t N,
                                 std::int64_t max_intervals) {
    P.validate();
    PairCorrelation out;
    // endpoint events of all clipped windows; c(a) counts overlapping rows n
    std::vector<std::pair<double, int>> events;
    std::int64_t n = 1;
    for (; n <= N; ++n) {
        if (static_cast<std::int64_t>(events.size()) / 2 > max_intervals) break;
        const auto asy = interval_asymptotics(n, 1, P);
        const std::int64_t k_lo = std::max<std::int64_t>(1, asy.Kn_exact_lo - 2);
        const std::int64_t k_hi = std::max(k_lo, asy.Kn_exact_hi + 2);
        for (std::int64_t k = k_lo; k <= k_hi; ++k) {
            const double a1 = window_edge(n, n + k, P.C1, P);
            const double a2 = window_edge(n, n + k, P.C2, P);
            const double lo = std::max(a1, P.alpha_lo);
            const double hi = std::min(a2, P.beta_hi);
            if (hi > lo) {
                events.emplace_back(lo, +1);
                events.emplace_back(hi, -1);
            }
        }
    }
    out.reached_N = n - 1;
    std::sort(events.begin(), events.end());
    double single = 0.0, dbl = 0.0, prev = P.alpha_lo;
    std::int64_t depth = 0;
    for (const auto& [pos, d] : events) {
        const double seg = pos - prev;
        if (seg > 0.0 && depth > 0) {
            single += seg * static_cast<double>(depth);
            dbl += seg * static_cast<double>(depth) * static_cast<double>(depth);
        }
        depth += d;
        prev = pos;
    }
    const double norm = P.beta_hi - P.alpha_lo;
    out.double_sum = dbl / norm;
    const double s = single / norm;
    out.squared_single_sum = s * s;
    out.ratio = out.squared_single_sum > 0.0 ? out.double_sum / out.squared_single_sum : 0.0;
    return out;
}

WaveRatio wave_ratio(std::int64_t n, std::int64_t k, std::int64_t p, const Params& P,
                     std::int64_t N) {
    if (k < 1 || p < 1) throw std::domain_error("wave_ratio: need k, p >= 1");
    P.validate();
    WaveRatio out;
    const double eta = static_cast<double>(k + p) / static_cast<double>(k);
    const double g = P.gamma;
    out.r = static_cast<std::int64_t>(
        std::llround(static_cast<double>(n) * std::pow(eta, g / (g - 1.0))));
    const auto asy = interval_asymptotics(out.r, k + p, P);
    const double ell = (P.C2 - P.C1) / asy.a_location;
    out.lambda_formula = ell * (g / (g - 1.0)) *
                         std::pow(static_cast<double>(n), 1.0 - P.xi) /
                         static_cast<double>(k) *
                         std::pow(eta, (1.0 - P.xi * g) / (g - 1.0));
    out.exact_ratio = asy.delta_exact / std::abs(asy.Delta_bar_exact);
    out.P_nk = (std::pow(static_cast<double>(N), 1.0 - 1.0 / g) /
                    std::pow(static_cast<double>(n), 1.0 - 1.0 / g) -
                1.0) *
               static_cast<double>(k);
    return out;
}

IslandSeries island_measure_series(double gamma, std::int64_t K) {
    if (!(gamma > 1.0 && gamma < 2.0))
        throw std::domain_error("island_measure_series: branch analysis assumes 1 < gamma < 2");
    if (K < 10) throw std::domain_error("island_measure_series: need K >= 10");
    IslandSeries out;
    out.refined_exponent = (2.0 - gamma) / (gamma - 1.0) - 3.0;
    out.finite = out.refined_exponent < -1.0;
    out.crude_converges = 3.0 * (1.0 - 1.0 / gamma) > 1.0;

    std::int64_t next_cp = 10;
    double refined = 0.0, crude = 0.0;
    const double crude_expo = -3.0 * (1.0 - 1.0 / gamma);
    for (std::int64_t k = 1; k <= K; ++k) {
        const double kd = static_cast<double>(k);
        refined += std::pow(kd, out.refined_exponent);
        crude += std::pow(kd, crude_expo);
        if (k == next_cp || k == K) {
            out.checkpoints.push_back(k);
            out.refined_partial.push_back(refined);
            out.crude_partial.push_back(crude);
            if (k == next_cp) next_cp *= 10;
        }
    }
    return out;
}

} // namespace fermi::arith
