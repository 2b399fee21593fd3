// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
// Heavier, end-to-end checks of the documented numerical claims; run through
// ctest or directly (optionally with FERMI_BIN pointing at the CLI binary).
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fermi/arithmetic.hpp"
#include "fermi/core_map.hpp"
#include "fermi/fractal.hpp"
#include "fermi/normal_form.hpp"
#include "fermi/orbits.hpp"
#include "fermi/rng.hpp"

using namespace fermi;

namespace {

int failures = 0;

void report(int criterion, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

SystemParams gamma_params(double gamma, double A) {
    SystemParams p;
    p.gamma = gamma;
    p.C = 1.0;
    p.A = A;
    p.B = std::max(1.0, A);
    return p;
}

void c1_symplecticity() {
    double worst = 0.0;
    for (double gamma : {1.2, 1.5, 3.0}) {
        auto p = gamma_params(gamma, 0.7);
        SplitMix64 rng(12345);
        for (int i = 0; i < 100000; ++i) {
            PhasePoint x{rng.uniform01(), 0.5 + 9.5 * rng.uniform01()};
            worst = std::max(worst, std::abs(differential(x, p).det() - 1.0));
        }
    }
    report(1, "symplecticity |det dF - 1| < 1e-12", worst < 1e-12,
           "worst " + std::to_string(worst));
}

void c2_reversibility() {
    double worst_r2 = 0.0, worst_rf = 0.0;
    auto p = gamma_params(1.5, 0.4);
    SplitMix64 rng(777);
    for (int i = 0; i < 10000; ++i) {
        PhasePoint x{rng.uniform01(), 0.6 + 8.0 * rng.uniform01()};
        auto rr = reversor(reversor(x, p), p);
        worst_r2 = std::max({worst_r2, circle_dist(rr.t, x.t), std::abs(rr.v - x.v)});
        try {
            auto y = reversor(step(reversor(step(x, p), p), p), p);
            worst_rf = std::max({worst_rf, circle_dist(y.t, x.t), std::abs(y.v - x.v)});
        } catch (const DomainExit&) {
            // rare low-v exits do not carry reversibility information
        }
    }
    report(2, "reversor involution and R F R = F^{-1}", worst_r2 < 1e-12 && worst_rf < 1e-9,
           "R^2 " + std::to_string(worst_r2) + ", (RF)^2 " + std::to_string(worst_rf));
}

void c3_period2_verification() {
    auto p = gamma_params(1.5, 0.5);
    const auto cat = orbits::scan_orbits(p, 6.0, -1.0, 0.0, 1e-9);
    bool ok = !cat.entries.empty();
    double worst_resid = 0.0, worst_agree = 0.0, worst_fix = 0.0, worst_frac = 0.0;
    for (const auto& e : cat.entries) {
        worst_resid = std::max(worst_resid, e.orbit.residual);
        worst_agree =
            std::max(worst_agree, std::abs(e.report.half_trace - e.report.half_trace_numeric));
        if (e.orbit.kind == orbits::PeriodicOrbit2::Kind::Plus) {
            for (auto pt : {e.orbit.p1, e.orbit.p2})
                worst_fix = std::max(worst_fix, circle_dist(reversor(pt, p).t, pt.t));
        } else {
            for (auto pt : {e.orbit.p1, e.orbit.p2}) {
                const double T = flight_time(pt.v, p);
                worst_frac = std::max(worst_frac, std::abs(T - std::floor(T) - 0.5));
            }
        }
    }
    ok = ok && worst_resid < 1e-9 && worst_agree < 1e-6 && worst_fix < 1e-9 &&
         worst_frac < 1e-9;
    std::ostringstream d;
    d << cat.entries.size() << " orbits, resid " << worst_resid << ", trace "
      << worst_agree << ", locus " << worst_fix << ", frac " << worst_frac;
    report(3, "period-2 catalog verification", ok, d.str());
}

void c4_window_scaling() {
    SystemParams base = gamma_params(1.5, 0.0);
    const int n = 0;
    std::vector<double> xs, ys;
    bool found_all = true;
    for (int m : {40, 41, 42}) {
        auto w = orbits::elliptic_A_window(n, m, base, -1.0, 0.0);
        if (!w) {
            found_all = false;
            continue;
        }
        xs.push_back(std::log(static_cast<double>(m)));
        // the claim is width = O(1/(A m^{1-1/gamma})); the anchor A varies with
        // m, so the m-exponent is read off the anchor-normalized width
        ys.push_back(std::log(w->width() * w->anchor));
    }
    double slope = 0.0;
    if (xs.size() == 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < 3; ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        slope = (3 * sxy - sx * sy) / (3 * sxx - sx * sx);
    }
    const double expect = -(1.0 - 1.0 / 1.5);
    const bool ok = found_all && std::abs(slope - expect) < 0.15;
    report(4, "elliptic A-window width scaling in m", ok,
           "slope " + std::to_string(slope) + " vs " + std::to_string(expect) + " +- 0.15");
}

void c5_regime_table() {
    bool ok = true;
    std::string bad;
    for (double g : {1.2, 1.5, 1.9, 2.5, 3.0, 4.0}) {
        const auto rp = arith::regime(arith::Params::plus_orbits(g));
        if (!rp.diverging) { ok = false; bad += " plus-diverging@" + std::to_string(g); }
        if ((g < 2.0) != rp.overlapping) { ok = false; bad += " plus-overlap@" + std::to_string(g); }
        const auto rm = arith::regime(arith::Params::minus_orbits(g));
        const bool zero = rm.predicted == arith::RegimeReport::Class::ZeroMeasure;
        if ((g > 2.0) != zero) { ok = false; bad += " minus-zero@" + std::to_string(g); }
    }
    report(5, "regime table (diverging/overlapping/zero-measure)", ok,
           ok ? "all gamma agree" : bad);
}

void c6_partial_sum_law() {
    auto P = arith::Params::plus_orbits(1.5);
    const auto ps = arith::measure_partial_sum(P, 100000);
    const double ratio = ps.exact_sum / ps.asymptotic;
    const double mc = arith::measure_partial_sum_mc(P, 100000, 1000000, 0x00c0ffee);
    const double mc_rel = std::abs(mc - ps.exact_sum) / ps.exact_sum;
    const bool ok = ratio > 0.8 && ratio < 1.25 && mc_rel < 0.01;
    std::ostringstream d;
    d << "exact " << ps.exact_sum << ", asymptotic " << ps.asymptotic << " (ratio " << ratio
      << "), MC " << mc << " (rel " << mc_rel << ")";
    report(6, "partial-sum law and Monte Carlo agreement", ok, d.str());
}

void c7_weak_independence() {
    auto P = arith::Params::plus_orbits(1.5);
    const auto pc = arith::pair_correlation(P, 10000);
    const bool ok = pc.reached_N == 10000 && pc.ratio > 0.85 && pc.ratio < 1.15;
    report(7, "pair-correlation weak independence", ok, "ratio " + std::to_string(pc.ratio));
}

void c8_asymptotics() {
    auto P = arith::Params::plus_orbits(1.5);
    const std::int64_t n = 10000;
    const auto span = arith::interval_asymptotics(n, 1, P);
    const std::int64_t k = (span.Kn_exact_lo + span.Kn_exact_hi) / 2;
    const auto r = arith::interval_asymptotics(n, k, P);
    const double e1 = std::abs(r.delta_exact - r.delta_E1) / r.delta_exact;
    const double e2 = std::abs(r.Delta_exact - r.Delta_E2) / r.Delta_exact;
    const double e3 =
        std::abs(r.Delta_bar_exact - r.Delta_bar_E3) / std::abs(r.Delta_bar_exact);
    const double e4 = std::max(
        std::abs(static_cast<double>(r.Kn_E4_lo - r.Kn_exact_lo)) /
            static_cast<double>(r.Kn_exact_lo),
        std::abs(static_cast<double>(r.Kn_E4_hi - r.Kn_exact_hi)) /
            static_cast<double>(r.Kn_exact_hi));
    const bool ok = e1 < 0.05 && e2 < 0.05 && e3 < 0.05 && e4 < 0.05;
    std::ostringstream d;
    d << "E1 " << e1 << ", E2 " << e2 << ", E3 " << e3 << ", E4 " << e4 << " at n=" << n
      << " k=" << k;
    report(8, "E1-E4 leading terms within 5%", ok, d.str());
}

void c9_island_measure_dichotomy() {
    const auto s15 = arith::island_measure_series(1.5, 10000000);
    const auto s125 = arith::island_measure_series(1.25, 10000000);
    const auto s43 = arith::island_measure_series(4.0 / 3.0, 10000000);
    bool ok = s15.finite && !s125.finite && !s43.finite;
    std::string detail = "verdicts " + std::string(s15.finite ? "F" : "D") +
                         std::string(s125.finite ? "F" : "D") +
                         std::string(s43.finite ? "F" : "D");
    // numeric consistency: convergent tail below 1e-6 per decade vs real growth
    const auto sz = s15.refined_partial.size();
    const double tail15 = s15.refined_partial[sz - 1] - s15.refined_partial[sz - 2];
    ok = ok && tail15 < 1e-6;
    detail += ", gamma=1.5 last-decade increment " + std::to_string(tail15);
    const auto sz2 = s125.refined_partial.size();
    const bool grows125 =
        s125.refined_partial[sz2 - 1] > 2.0 * s125.refined_partial[sz2 - 2];
    ok = ok && grows125;
    const auto sz3 = s43.refined_partial.size();
    const double inc_a = s43.refined_partial[sz3 - 1] - s43.refined_partial[sz3 - 2];
    const double inc_b = s43.refined_partial[sz3 - 2] - s43.refined_partial[sz3 - 3];
    ok = ok && inc_a > 0.5 * inc_b; // harmonic boundary: increments do not decay
    report(9, "island-measure dichotomy (finite iff gamma > 4/3)", ok, detail);
}

void c10_omega3_positivity() {
    double min_val = 1e300;
    bool ok = true;
    try {
        for (int i = 1; i < 100; ++i) {
            const double nu = -1.0 + i / 100.0;
            for (int j = 0; j < 100; ++j) {
                const double th = nf::kThetaBandLo +
                                  (nf::kThetaBandHi - nf::kThetaBandLo) * (j + 0.5) / 100.0;
                min_val = std::min(min_val, nf::omega3_bracket(nu, th));
            }
        }
    } catch (const std::exception&) {
        ok = false;
    }
    ok = ok && min_val > 0.0;
    report(10, "omega_3 bracket positive on the admissible grid", ok,
           "grid minimum " + std::to_string(min_val));
}

struct CatalogData {
    std::vector<nf::CatalogOrbit> entries;
    std::vector<nf::BirkhoffCoeffs> coeffs;
};

CatalogData build_catalog() {
    CatalogData data;
    SystemParams base = gamma_params(1.5, 0.0);
    const auto pairs =
        nf::constant_amplitude_pairs(base, 0.5, {5, 12, 30, 80, 220, 600, 1700, 5000, 9000});
    data.entries = nf::multiplier_controlled_catalog(base, pairs, -0.95, -0.8);
    for (const auto& e : data.entries)
        data.coeffs.push_back(nf::taylor_coeffs(e.orbit, e.params));
    return data;
}

void c11_area_scaling(const CatalogData& cat) {
    std::vector<std::pair<double, double>> ta;
    for (const auto& e : cat.entries) {
        const auto m = nf::island_area(e.orbit, e.params, 0.0, 1000, 81);
        if (!m.empty && m.bounded_count >= 9) ta.emplace_back(e.tbar_prime, m.area);
    }
    double slope = 0.0;
    bool ok = false;
    std::string detail;
    try {
        slope = nf::area_scaling(ta);
        ok = slope > -3.8 && slope < -2.2;
        detail = "slope " + std::to_string(slope) + " over " + std::to_string(ta.size()) +
                 " islands";
    } catch (const std::exception& e) {
        detail = e.what();
    }
    report(11, "island area scales like T'^{-3}", ok, detail);
}

void c12_birkhoff_orders(const CatalogData& cat) {
    double lo3 = 1e300, hi3 = 0.0, lo5 = 1e300, hi5 = 0.0, lo7 = 1e300, hi7 = 0.0;
    for (std::size_t i = 0; i < cat.entries.size(); ++i) {
        const double tp = cat.entries[i].tbar_prime;
        const double r3 = std::abs(cat.coeffs[i].A3) / std::pow(tp, 1.5);
        const double r5 = std::abs(cat.coeffs[i].A5) / std::pow(tp, 1.5);
        const double r7 = std::abs(cat.coeffs[i].A7) / (tp * tp * tp);
        lo3 = std::min(lo3, r3);
        hi3 = std::max(hi3, r3);
        lo5 = std::min(lo5, r5);
        hi5 = std::max(hi5, r5);
        lo7 = std::min(lo7, r7);
        hi7 = std::max(hi7, r7);
    }
    const bool ok = !cat.entries.empty() && hi3 / lo3 < 10.0 && hi5 / lo5 < 10.0 &&
                    hi7 / lo7 < 10.0;
    std::ostringstream d;
    d << "band ratios A3 " << hi3 / lo3 << ", A5 " << hi5 / lo5 << ", A7 " << hi7 / lo7
      << " across " << cat.entries.size() << " orbits";
    report(12, "Birkhoff coefficients track T'^{3/2} and T'^3", ok, d.str());
}

void c13_middle_third() {
    std::vector<fractal::ModelMap> maps(10, fractal::ModelMap{3, 0.0});
    const auto tree = fractal::build_cantor(maps, {0.0, 1.0 - 1e-12}, 10);
    double worst = 0.0;
    for (int lvl = 8; lvl <= 10; ++lvl)
        worst = std::max(worst, std::abs(fractal::running_dimension(tree, lvl, 0) -
                                         std::log(2.0) / std::log(3.0)));
    report(13, "middle-third running dimension hits log2/log3", worst < 1e-3,
           "worst deviation " + std::to_string(worst) + " at depth 8..10");
}

void c14_dimension_trend() {
    const double len = 1.0 - 1e-12;
    std::vector<fractal::ModelMap> maps;
    for (int n = 1; n <= 12; ++n) maps.push_back(fractal::ModelMap{2 * n + 2, 0.0});
    const auto tree = fractal::build_cantor(maps, {0.0, len}, 12, 5000);
    bool monotone = true, bounded = true;
    double prev = 0.0, log_M = 0.0, final_s = 0.0;
    for (int lvl = 1; lvl <= 12; ++lvl) {
        const double s = tree.levels[static_cast<std::size_t>(lvl - 1)].s_min;
        if (lvl > 3 && s < prev - 1e-12) monotone = false;
        prev = s;
        final_s = s;
        log_M += std::log(2.0 * lvl + 2.0);
        const double lb = fractal::dimension_lower_bound_log(lvl, len, 1.0 + 1e-9, log_M);
        if (lb > s) bounded = false;
    }
    const bool ok = monotone && bounded && final_s > 0.8;
    std::ostringstream d;
    d << "final s " << final_s << ", monotone " << (monotone ? "yes" : "no")
      << ", bound below observed " << (bounded ? "yes" : "no");
    report(14, "running-dimension trend for 2n+2 maps", ok, d.str());
}

void c15_expansion_sandwich() {
    auto p = gamma_params(1.5, 1.0);
    auto region = fractal::HyperbolicRegionParams::defaults_for(p, 30.0);
    fractal::calibrate_reduction_constants(region, p, 8, 500);
    const auto J0 = region.region_interval(p);
    int in_region = 0, inside = 0;
    for (int i = 0; i < 1000; ++i) {
        const double t = J0.lo + J0.len() * (i + 0.25) / 1000.0; // off the calibration grid
        for (int n = 1; n <= 8; ++n) {
            const auto d = fractal::Fn_derivative(t, n, region.C_height, p, region);
            if (!d.in_region) break;
            ++in_region;
            if (d.lower_bound <= d.value && d.value <= d.upper_bound) ++inside;
        }
    }
    const bool ok = in_region > 100 && inside == in_region;
    report(15, "expansion between calibrated product bounds", ok,
           std::to_string(inside) + "/" + std::to_string(in_region) + " in-region evals");
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void c16_cli_determinism() {
    const char* bin_env = std::getenv("FERMI_BIN");
#ifdef FERMI_BIN_PATH
    const std::string bin = bin_env ? bin_env : FERMI_BIN_PATH;
#else
    const std::string bin = bin_env ? bin_env : "";
#endif
    if (bin.empty() || !std::filesystem::exists(bin)) {
        report(16, "CLI determinism", false, "fermi binary not found; set FERMI_BIN");
        return;
    }
    const auto tmp = std::filesystem::temp_directory_path() / "fermi_accept_cli";
    std::filesystem::remove_all(tmp);
    std::filesystem::create_directories(tmp);

    const std::vector<std::pair<std::string, std::string>> runs = {
        {"simulate", "{\"params\":{\"A\":0.1,\"gamma\":1.5},\"initial\":{\"t\":0.2,\"v\":3.0},"
                     "\"steps\":50}"},
        {"phase-portrait",
         "{\"params\":{\"A\":0.3,\"gamma\":1.5},\"seeds\":40,\"iters\":150,"
         "\"window\":{\"v_lo\":1.0,\"v_hi\":5.0},\"mark_orbits\":[[1,4]]}"},
        {"find-orbits", "{\"params\":{\"A\":0.5,\"gamma\":1.5},\"T_max\":5}"},
        {"scan-A", "{\"params\":{\"gamma\":1.5},\"n\":0,\"m_list\":[12,13],\"grid\":512}"},
        {"arith-scan", "{\"arith\":{\"gamma\":1.5},\"N\":20000,\"with_measure\":true,"
                       "\"mc_samples\":200000}"},
        {"island-area", "{\"params\":{\"gamma\":1.5},\"A0\":0.5,\"n_list\":[5,12,30],"
                        "\"iters\":200,\"grid\":41}"},
        {"cantor", "{\"model\":{\"d0\":4,\"growth\":2},\"depth\":8}"},
        {"escape-dim", "{\"params\":{\"A\":1.0,\"gamma\":1.5},\"C_height\":30,\"depth\":4}"},
    };
    bool ok = true;
    std::string detail;
    for (const auto& [cmd, cfg] : runs) {
        const auto cfg_path = tmp / (cmd + ".json");
        std::ofstream(cfg_path) << cfg;
        const auto dir_a = tmp / (cmd + "_a"), dir_b = tmp / (cmd + "_b");
        for (const auto& dir : {dir_a, dir_b}) {
            const std::string run = bin + " " + cmd + " --config " + cfg_path.string() +
                                    " --out " + dir.string() + " --seed 7 > /dev/null 2>&1";
            if (std::system(run.c_str()) != 0) {
                ok = false;
                detail += " " + cmd + ":exit";
            }
        }
        if (!std::filesystem::exists(dir_a)) continue;
        for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
            const auto twin = dir_b / entry.path().filename();
            if (!std::filesystem::exists(twin) ||
                slurp(entry.path()) != slurp(twin)) {
                ok = false;
                detail += " " + cmd + "/" + entry.path().filename().string();
            }
        }
    }
    report(16, "CLI outputs byte-identical across reruns", ok,
           ok ? "all 8 commands" : "mismatch:" + detail);
}

} // namespace

int main() {
    c1_symplecticity();
    c2_reversibility();
    c3_period2_verification();
    c4_window_scaling();
    c5_regime_table();
    c6_partial_sum_law();
    c7_weak_independence();
    c8_asymptotics();
    c9_island_measure_dichotomy();
    c10_omega3_positivity();
    const auto cat = build_catalog();
    c11_area_scaling(cat);
    c12_birkhoff_orders(cat);
    c13_middle_third();
    c14_dimension_trend();
    c15_expansion_sandwich();
    c16_cli_determinism();
    if (failures) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all 16 criteria passed\n");
    return 0;
}
