// Arithmetic condition for elliptic windows: membership of (n^{1/gamma}+a)^gamma
// in the interval family G_{a,m} = (m + C1/a m^-xi, m + C2/a m^-xi), its
// regime classification, and the measure estimates behind the Borel-Cantelli
// argument.
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <stdexcept>

namespace fermi::arith {

struct Params {
    double a = 1.0; // plays 2A
    double gamma = 1.5;
    double xi = 1.0 - 1.0 / 1.5;
    double C1 = 0.2, C2 = 0.4;
    double alpha_lo = 0.5, beta_hi = 0.9; // parameter interval [alpha, beta]

    void validate() const;
    // l-band endpoints from restricting a to [alpha, beta]
    double ell_minus() const { return C2 / beta_hi - C1 / alpha_lo; }
    double ell_plus() const { return C2 / alpha_lo - C1 / beta_hi; }

    static Params plus_orbits(double gamma_);  // xi = 1 - 1/gamma
    static Params minus_orbits(double gamma_); // xi = 2 - 2/gamma
};

struct Interval {
    double lo = 0.0, hi = 0.0;
    double len() const { return hi > lo ? hi - lo : 0.0; }
    bool contains(double x) const { return lo < x && x < hi; }
};

struct Hit {
    std::int64_t n = 0;
    std::int64_t k = 0;      // m - n
    double value = 0.0;      // (n^{1/gamma} + a)^gamma
    Interval window;         // G_{a, n+k}
};

struct RegimeReport {
    bool overlapping = false; // xi < 1/gamma
    bool diverging = false;   // xi <= 1
    bool critical = false;    // xi = 1/gamma
    enum class Class { AllParameters, FullMeasure, ZeroMeasure, CriticalMixed } predicted =
        Class::FullMeasure;
};

const char* regime_class_name(RegimeReport::Class c);

/// Which window constants to use when a ranges over [alpha, beta]:
/// per-a (C1/a, C2/a), superset (C1/beta, C2/alpha), subset (C1/alpha, C2/beta).
enum class WindowFamily { PerA, Superset, Subset };

Interval window(double a, std::int64_t m, const Params& P);
std::optional<Hit> check_n(std::int64_t n, const Params& P,
                           WindowFamily family = WindowFamily::PerA);

struct ScanResult {
    std::vector<Hit> hits;
    std::int64_t count = 0;
};
ScanResult scan(const Params& P, std::int64_t N, WindowFamily family = WindowFamily::PerA);

RegimeReport regime(const Params& P);

/// Exact interval quantities for the set A^n_k (parameters a hitting window
/// n+k) next to their leading-order forms E1..E4.
struct Asymptotics {
    double delta_exact = 0.0, delta_E1 = 0.0;         // |A^n_k|
    double Delta_exact = 0.0, Delta_E2 = 0.0;         // |I^n_k|, window spacing in a
    double Delta_bar_exact = 0.0, Delta_bar_E3 = 0.0; // signed drift between A^n_k, A^{n+1}_k
    std::int64_t Kn_exact_lo = 0, Kn_exact_hi = -1;
    std::int64_t Kn_E4_lo = 0, Kn_E4_hi = -1;
    double a_location = 0.0; // where the window sits on the a-axis
};
Asymptotics interval_asymptotics(std::int64_t n, std::int64_t k, const Params& P);

struct PartialSum {
    double exact_sum = 0.0;  // sum_{n<=N} P(A^n) from explicit interval unions
    double asymptotic = 0.0; // l N^{1-xi}/(1-xi), l the midpoint of (l^-, l^+)
    bool log_variant = false; // xi = 1 flagged case
};
PartialSum measure_partial_sum(const Params& P, std::int64_t N);

/// Monte Carlo membership estimate of the same partial sum; stratified over n
/// with total_samples/N draws per stratum. Independent of the interval solver.
double measure_partial_sum_mc(const Params& P, std::int64_t N, std::int64_t total_samples,
                              std::uint64_t seed);

struct PairCorrelation {
    double double_sum = 0.0;         // sum_{n,m<=N} P(A^n A^m), exact intersections
    double squared_single_sum = 0.0; // (sum_{n<=N} P(A^n))^2
    double ratio = 0.0;
    std::int64_t reached_N = 0; // < N when the interval budget ran out
};
PairCorrelation pair_correlation(const Params& P, std::int64_t N,
                                 std::int64_t max_intervals = 50'000'000);

struct WaveRatio {
    double lambda_formula = 0.0; // l (gamma/(gamma-1)) (n^{1-xi}/k) eta^{(1-xi gamma)/(gamma-1)}
    double exact_ratio = 0.0;    // delta^r_{k+p} / |Delta_bar^r_{k+p}| at the wave index r
    std::int64_t r = 0;          // r = n ((k+p)/k)^{gamma/(gamma-1)}
    double P_nk = 0.0;           // wave count (N^{1-1/gamma}/n^{1-1/gamma} - 1) k
};
WaveRatio wave_ratio(std::int64_t n, std::int64_t k, std::int64_t p, const Params& P,
                     std::int64_t N);

struct IslandSeries {
    std::vector<double> refined_partial; // partial sums at decade checkpoints
    std::vector<double> crude_partial;
    std::vector<std::int64_t> checkpoints;
    double refined_exponent = 0.0; // (2-gamma)/(gamma-1) - 3
    bool finite = false;           // refined_exponent < -1  <=>  gamma > 4/3
    bool crude_converges = false;  // 3(1-1/gamma) > 1     <=>  gamma > 3/2
};
/// Total-measure series for period-2 (+)-islands: refined
/// sum_k k^{(2-gamma)/(gamma-1)} k^{-3} vs crude sum_n n^{-3(1-1/gamma)}.
IslandSeries island_measure_series(double gamma, std::int64_t K);

} // namespace fermi::arith
