// fermi: command-line front end for the static-wall accelerator toolkit.
//   fermi <command> --config <file.json> [--out <dir>] [--seed <u64>]
//         [--set key.path=value ...]
// Exit codes: 0 success, 2 configuration error, 3 numerical/verification failure.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fermi/arithmetic.hpp"
#include "fermi/core_map.hpp"
#include "fermi/fractal.hpp"
#include "fermi/normal_form.hpp"
#include "fermi/orbits.hpp"
#include "fermi/parallel.hpp"
#include "fermi/rng.hpp"

using json = nlohmann::json;
using namespace fermi;

namespace {

struct Options {
    std::string command;
    json config;
    std::filesystem::path out = ".";
    std::uint64_t seed = 1;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct Csv {
    std::ofstream f;
    explicit Csv(const std::filesystem::path& path) : f(path, std::ios::binary) {
        if (!f) throw ConfigError("cannot open output file " + path.string());
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) f << ',';
            f << cells[i];
        }
        f << "\r\n";
    }
};

SystemParams params_from(const json& j) {
    SystemParams p;
    p.A = j.value("A", p.A);
    p.B = j.value("B", p.B);
    p.t0 = j.value("t0", p.t0);
    p.C = j.value("C", p.C);
    p.gamma = j.value("gamma", p.gamma);
    p.v_min = j.value("v_min", p.v_min);
    if (p.B <= p.A / kTwoPi && !j.contains("B")) p.B = p.A; // keep the default sane
    p.validate();
    return p;
}

arith::Params arith_from(const json& j) {
    arith::Params P;
    P.gamma = j.value("gamma", P.gamma);
    P.xi = j.contains("xi") ? j["xi"].get<double>() : 1.0 - 1.0 / P.gamma;
    P.a = j.value("a", P.a);
    P.C1 = j.value("C1", P.C1);
    P.C2 = j.value("C2", P.C2);
    P.alpha_lo = j.value("alpha", P.alpha_lo);
    P.beta_hi = j.value("beta", P.beta_hi);
    P.validate();
    return P;
}

// svg scatter: one circle per point, orbit markers on top
void write_svg(const std::filesystem::path& path,
               const std::vector<std::pair<double, double>>& pts,
               const std::vector<std::pair<double, double>>& markers, double t_lo,
               double t_hi, double v_lo, double v_hi) {
    const int W = 1000, H = 700;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file " + path.string());
    auto X = [&](double t) { return (t - t_lo) / (t_hi - t_lo) * W; };
    auto Y = [&](double v) { return H - (v - v_lo) / (v_hi - v_lo) * H; };
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' ' << H
      << "\">\n<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    for (const auto& [t, v] : pts)
        f << "<circle cx=\"" << fmt(X(t)) << "\" cy=\"" << fmt(Y(v))
          << "\" r=\"0.8\" fill=\"#33658a\"/>\n";
    for (const auto& [t, v] : markers)
        f << "<circle cx=\"" << fmt(X(t)) << "\" cy=\"" << fmt(Y(v))
          << "\" r=\"4\" fill=\"none\" stroke=\"#d1495b\" stroke-width=\"1.5\"/>\n";
    f << "</svg>\n";
}

int cmd_simulate(const Options& opt) {
    const auto p = params_from(opt.config.value("params", json::object()));
    const auto init = opt.config.value("initial", json::object());
    PhasePoint x{init.value("t", 0.0), init.value("v", 2.0)};
    const long steps = opt.config.value("steps", 100L);
    if (steps < 0) throw ConfigError("simulate: steps must be >= 0");
    if (x.v < p.v_min) throw ConfigError("simulate: initial v below v_min");

    auto tr = iterate(x, steps, p);
    Csv csv(opt.out / "simulate.csv");
    csv.row({"step", "t", "v", "T", "exited"});
    for (std::size_t i = 0; i < tr.points.size(); ++i) {
        const auto& pt = tr.points[i];
        const bool last_exit = tr.exited && i + 1 == tr.points.size();
        csv.row({std::to_string(i), fmt(pt.t), fmt(pt.v), fmt(flight_time(pt.v, p)),
                 last_exit ? "1" : "0"});
    }
    return 0;
}

int cmd_phase_portrait(const Options& opt) {
    const auto p = params_from(opt.config.value("params", json::object()));
    const auto win = opt.config.value("window", json::object());
    const double t_lo = win.value("t_lo", 0.0), t_hi = win.value("t_hi", 1.0);
    const double v_lo = win.value("v_lo", 1.0), v_hi = win.value("v_hi", 6.0);
    const long seeds = opt.config.value("seeds", 100L);
    const long iters = opt.config.value("iters", 500L);
    if (!(t_lo < t_hi && v_lo < v_hi)) throw ConfigError("phase-portrait: empty window");
    if (seeds < 1 || iters < 1) throw ConfigError("phase-portrait: need seeds, iters >= 1");

    SplitMix64 rng(opt.seed);
    std::vector<std::pair<double, double>> cloud;
    Csv csv(opt.out / "portrait.csv");
    csv.row({"seed_index", "iter", "t", "v"});
    for (long s = 0; s < seeds; ++s) {
        PhasePoint cur{t_lo + (t_hi - t_lo) * rng.uniform01(),
                       v_lo + (v_hi - v_lo) * rng.uniform01()};
        for (long i = 0; i <= iters; ++i) {
            if (cur.v >= v_lo && cur.v <= v_hi && cur.t >= t_lo && cur.t <= t_hi) {
                cloud.emplace_back(cur.t, cur.v);
                csv.row({std::to_string(s), std::to_string(i), fmt(cur.t), fmt(cur.v)});
            }
            try {
                cur = step(cur, p);
            } catch (const DomainExit&) {
                break;
            }
        }
    }

    std::vector<std::pair<double, double>> markers;
    for (const auto& nm : opt.config.value("mark_orbits", json::array())) {
        const int n = nm.at(0).get<int>(), m = nm.at(1).get<int>();
        if (auto o = orbits::find_plus_orbit(n, m, p)) {
            markers.emplace_back(o->p1.t, o->p1.v);
            markers.emplace_back(o->p2.t, o->p2.v);
        }
    }
    write_svg(opt.out / "portrait.svg", cloud, markers, t_lo, t_hi, v_lo, v_hi);
    return 0;
}

int cmd_find_orbits(const Options& opt) {
    const auto p = params_from(opt.config.value("params", json::object()));
    const double T_max = opt.config.value("T_max", 6.0);
    const double c1 = opt.config.value("c1", -1.0), c2 = opt.config.value("c2", 0.0);
    const double tol = opt.config.value("tol", 1e-9);

    const auto cat = orbits::scan_orbits(p, T_max, c1, c2, tol);
    Csv csv(opt.out / "orbits.csv");
    csv.row({"n", "m", "kind", "t1", "v1", "t2", "v2", "residual", "nu1", "nu2",
             "half_trace", "half_trace_numeric", "class", "re_lambda", "in_window",
             "outside_primary"});
    long elliptic = 0;
    for (const auto& e : cat.entries) {
        const auto& o = e.orbit;
        const auto& r = e.report;
        const char* cls = r.classification == orbits::StabilityReport::Class::Elliptic
                              ? "elliptic"
                              : (r.classification == orbits::StabilityReport::Class::Hyperbolic
                                     ? "hyperbolic"
                                     : "parabolic");
        if (r.elliptic()) ++elliptic;
        csv.row({std::to_string(o.n), std::to_string(o.m),
                 o.kind == orbits::PeriodicOrbit2::Kind::Plus ? "plus" : "minus",
                 fmt(o.p1.t), fmt(o.p1.v), fmt(o.p2.t), fmt(o.p2.v), fmt(o.residual),
                 fmt(r.nu1), fmt(r.nu2), fmt(r.half_trace), fmt(r.half_trace_numeric), cls,
                 fmt(r.multiplier.real()), e.in_c_window ? "1" : "0",
                 o.outside_primary ? "1" : "0"});
    }
    csv.row({"summary", std::to_string(cat.entries.size()), "orbits", "", "", "", "", "",
             "", "", "", "", "elliptic", std::to_string(elliptic), "",
             std::to_string(cat.failures.size())});
    return 0;
}

int cmd_scan_A(const Options& opt) {
    SystemParams base = params_from(opt.config.value("params", json::object()));
    base.A = 0.0;
    const int n = opt.config.value("n", 0);
    std::vector<int> ms;
    for (const auto& m : opt.config.value("m_list", json::array())) ms.push_back(m.get<int>());
    if (ms.empty()) throw ConfigError("scan-A: m_list must not be empty");
    const double c1 = opt.config.value("c1", -1.0), c2 = opt.config.value("c2", 0.0);
    const int grid = opt.config.value("grid", 2048);

    Csv csv(opt.out / "windows.csv");
    csv.row({"n", "m", "anchor", "A_lo", "A_hi", "width", "width_times_anchor"});
    std::vector<std::pair<double, double>> norm_pts, raw_pts;
    for (int m : ms) {
        const auto w = orbits::elliptic_A_window(n, m, base, c1, c2, grid);
        if (!w) {
            csv.row({std::to_string(n), std::to_string(m), "", "", "", "", ""});
            continue;
        }
        csv.row({std::to_string(n), std::to_string(m), fmt(w->anchor), fmt(w->A_lo),
                 fmt(w->A_hi), fmt(w->width()), fmt(w->width() * w->anchor)});
        raw_pts.emplace_back(std::log(static_cast<double>(m)), std::log(w->width()));
        norm_pts.emplace_back(std::log(static_cast<double>(m)),
                              std::log(w->width() * w->anchor));
    }
    auto slope = [](const std::vector<std::pair<double, double>>& pts) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto& [x, y] : pts) {
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double k = static_cast<double>(pts.size());
        return (k * sxy - sx * sy) / (k * sxx - sx * sx);
    };
    if (norm_pts.size() >= 2)
        csv.row({"summary", "slope_width", fmt(slope(raw_pts)), "slope_width_times_anchor",
                 fmt(slope(norm_pts)), "expected", fmt(-(1.0 - 1.0 / base.gamma))});
    return 0;
}

int cmd_arith_scan(const Options& opt) {
    const auto P = arith_from(opt.config.value("arith", json::object()));
    const auto N = opt.config.value("N", static_cast<std::int64_t>(10000));
    const auto scan = arith::scan(P, N);
    const auto reg = arith::regime(P);

    Csv csv(opt.out / "hits.csv");
    csv.row({"n", "k", "m", "value", "win_lo", "win_hi"});
    for (const auto& h : scan.hits)
        csv.row({std::to_string(h.n), std::to_string(h.k), std::to_string(h.n + h.k),
                 fmt(h.value), fmt(h.window.lo), fmt(h.window.hi)});
    std::string measure_cols[3] = {"", "", ""};
    if (opt.config.value("with_measure", false)) {
        const auto ps = arith::measure_partial_sum(P, N);
        const auto mc_samples = opt.config.value("mc_samples", static_cast<std::int64_t>(0));
        measure_cols[0] = fmt(ps.exact_sum);
        measure_cols[1] = fmt(ps.asymptotic);
        if (mc_samples > 0)
            measure_cols[2] = fmt(arith::measure_partial_sum_mc(P, N, mc_samples, opt.seed));
    }
    csv.row({"summary", std::to_string(scan.count), arith::regime_class_name(reg.predicted),
             reg.overlapping ? "overlapping" : "non-overlapping",
             reg.diverging ? "diverging" : "non-diverging",
             reg.critical ? "critical" : "non-critical"});
    csv.row({"measure", measure_cols[0], measure_cols[1], measure_cols[2], "", ""});
    return 0;
}

int cmd_island_area(const Options& opt) {
    SystemParams base = params_from(opt.config.value("params", json::object()));
    base.A = 0.0;
    const double A0 = opt.config.value("A0", 0.5);
    std::vector<int> ns;
    for (const auto& n : opt.config.value("n_list", json::array())) ns.push_back(n.get<int>());
    if (ns.empty()) throw ConfigError("island-area: n_list must not be empty");
    const double c1 = opt.config.value("c1", -0.9), c2 = opt.config.value("c2", -0.6);
    const long iters = opt.config.value("iters", 1000L);
    const int grid = opt.config.value("grid", 81);

    const auto pairs = nf::constant_amplitude_pairs(base, A0, ns);
    const auto cat = nf::multiplier_controlled_catalog(base, pairs, c1, c2);

    std::vector<nf::IslandMeasurement> meas(cat.size());
    parallel_for(cat.size(), [&](std::size_t i) {
        meas[i] = nf::island_area(cat[i].orbit, cat[i].params, 0.0, iters, grid);
    });

    Csv csv(opt.out / "islands.csv");
    csv.row({"n", "m", "A", "re_lambda", "tbar_prime", "rho", "fraction", "bounded",
             "area", "t_extent", "v_extent"});
    std::vector<std::pair<double, double>> ta;
    for (std::size_t i = 0; i < cat.size(); ++i) {
        const auto& e = cat[i];
        const auto& im = meas[i];
        csv.row({std::to_string(e.orbit.n), std::to_string(e.orbit.m), fmt(e.params.A),
                 fmt(e.report.multiplier.real()), fmt(e.tbar_prime), fmt(im.rho),
                 fmt(im.fraction), std::to_string(im.bounded_count), fmt(im.area),
                 fmt(im.t_extent), fmt(im.v_extent)});
        if (!im.empty && im.bounded_count >= 9) ta.emplace_back(e.tbar_prime, im.area);
    }
    std::string slope_txt = "insufficient";
    try {
        slope_txt = fmt(nf::area_scaling(ta));
    } catch (const std::exception&) {
    }
    csv.row({"summary", "slope_log_area_vs_log_Tp", slope_txt, "target", "-3", "orbits",
             std::to_string(ta.size()), "", "", "", ""});
    return 0;
}

int cmd_cantor(const Options& opt) {
    const auto model = opt.config.value("model", json::object());
    const int depth = opt.config.value("depth", 8);
    const double len = opt.config.value("len", 1.0 - 1e-12);
    const double kappa = model.value("kappa", 0.0);
    std::vector<fractal::ModelMap> maps;
    if (model.contains("d_list")) {
        for (const auto& d : model["d_list"]) maps.push_back({d.get<int>(), kappa});
    } else {
        const int d0 = model.value("d0", 3);
        const int growth = model.value("growth", 0); // d_n = d0 + growth * n
        for (int n = 1; n <= depth; ++n) maps.push_back({d0 + growth * n, kappa});
    }
    if (static_cast<int>(maps.size()) < depth)
        throw ConfigError("cantor: need at least `depth` maps");

    const auto tree = fractal::build_cantor(maps, {0.0, len}, depth);
    Csv csv(opt.out / "cantor.csv");
    csv.row({"level", "d", "k_good", "log_K", "min_len", "max_len", "s_min", "s_max",
             "lower_bound"});
    double log_M_hi = 0.0;
    double c_ratio = 1.0;
    for (const auto& m : maps)
        c_ratio = std::max(c_ratio, (m.d + kappa) / (m.d - kappa) * (1.0 + 1e-12));
    for (int lvl = 1; lvl <= depth; ++lvl) {
        const auto& L = tree.levels[static_cast<std::size_t>(lvl - 1)];
        const auto& m = maps[static_cast<std::size_t>(lvl - 1)];
        log_M_hi += std::log(m.d + kappa);
        const double lb = fractal::dimension_lower_bound_log(lvl, len, c_ratio, log_M_hi);
        const double lo = L.intervals.empty() ? L.uniform_len : L.min_len;
        const double hi = L.intervals.empty() ? L.uniform_len : L.max_len;
        csv.row({std::to_string(lvl), std::to_string(m.d), std::to_string(L.k_good),
                 fmt(L.log_K), fmt(lo), fmt(hi), fmt(L.s_min), fmt(L.s_max), fmt(lb)});
    }
    return 0;
}

int cmd_escape_dim(const Options& opt) {
    const auto p = params_from(opt.config.value("params", json::object()));
    const double C_height = opt.config.value("C_height", 30.0);
    const int depth = opt.config.value("depth", 5);
    const double shrink = opt.config.value("J0_shrink", 0.1);
    auto region = fractal::HyperbolicRegionParams::defaults_for(p, C_height);
    const auto adm = region.region_interval(p);
    const fractal::Interval J0{adm.lo + shrink * adm.len(), adm.hi - shrink * adm.len()};

    const auto tree = fractal::escape_candidate_tree(p, region, J0, depth);
    Csv csv(opt.out / "escape.csv");
    csv.row({"level", "count", "total_len", "box_dim"});
    for (std::size_t k = 0; k < tree.levels.size(); ++k) {
        double total = 0.0;
        for (const auto& iv : tree.levels[k]) total += iv.len();
        csv.row({std::to_string(k + 1), std::to_string(tree.levels[k].size()), fmt(total),
                 k < tree.box_dims.size() ? fmt(tree.box_dims[k]) : ""});
    }
    csv.row({"summary", "box_dim", fmt(tree.box_dim), ""});
    return 0;
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must look like key.path=value");
    const std::string path = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    json* node = &config;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key =
            path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (dot == std::string::npos) {
            const json parsed = json::parse(value, nullptr, false);
            (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

int usage() {
    std::cerr << "usage: fermi <simulate|phase-portrait|find-orbits|scan-A|arith-scan|"
                 "island-area|cantor|escape-dim> --config <file.json> [--out <dir>] "
                 "[--seed <u64>] [--set key.path=value ...]\n";
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    try {
        if (argc < 2) return usage();
        opt.command = argv[1];
        std::string config_path;
        std::vector<std::string> overrides;
        for (int i = 2; i < argc; ++i) {
            const std::string arg = argv[i];
            auto need = [&](const char* what) -> std::string {
                if (i + 1 >= argc) throw ConfigError(std::string("missing value for ") + what);
                return argv[++i];
            };
            if (arg == "--config") config_path = need("--config");
            else if (arg == "--out") opt.out = need("--out");
            else if (arg == "--seed") opt.seed = std::stoull(need("--seed"));
            else if (arg == "--set") overrides.push_back(need("--set"));
            else throw ConfigError("unknown flag " + arg);
        }
        if (config_path.empty()) {
            opt.config = json::object();
        } else {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot read config " + config_path);
            in >> opt.config;
        }
        for (const auto& o : overrides) apply_override(opt.config, o);
        std::filesystem::create_directories(opt.out);

        if (opt.command == "simulate") return cmd_simulate(opt);
        if (opt.command == "phase-portrait") return cmd_phase_portrait(opt);
        if (opt.command == "find-orbits") return cmd_find_orbits(opt);
        if (opt.command == "scan-A") return cmd_scan_A(opt);
        if (opt.command == "arith-scan") return cmd_arith_scan(opt);
        if (opt.command == "island-area") return cmd_island_area(opt);
        if (opt.command == "cantor") return cmd_cantor(opt);
        if (opt.command == "escape-dim") return cmd_escape_dim(opt);
        return usage();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
