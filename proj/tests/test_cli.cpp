#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fermi/normal_form.hpp"
#include "fermi/orbits.hpp"
#include "fermi/rng.hpp"

namespace fs = std::filesystem;
using namespace fermi;

namespace {

const std::string kBin = FERMI_BIN_PATH;

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "fermi_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& cmd, const std::string& config_json, const fs::path& out,
        const std::string& extra = "") {
    const auto cfg = out.string() + ".json";
    std::ofstream(cfg) << config_json;
    fs::create_directories(out);
    const std::string line = kBin + " " + cmd + " --config " + cfg + " --out " +
                             out.string() + " " + extra + " > /dev/null 2>&1";
    const int rc = std::system(line.c_str());
    return WEXITSTATUS(rc);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream f(p);
    REQUIRE(f.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(cells);
    }
    return rows;
}

} // namespace

TEST_CASE("simulate: schema, constant v at A = 0, single row at steps = 0") {
    auto out = work_dir() / "sim0";
    REQUIRE(run("simulate",
                R"({"params":{"A":0.0,"gamma":1.5},"initial":{"t":0.1,"v":2.5},"steps":5})",
                out) == 0);
    auto rows = read_csv(out / "simulate.csv");
    REQUIRE(rows.size() == 7); // header + 6
    CHECK(rows[0] == std::vector<std::string>{"step", "t", "v", "T", "exited"});
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].size() == rows[0].size());
        CHECK(std::stod(rows[i][2]) == doctest::Approx(2.5));
    }

    auto out1 = work_dir() / "sim1";
    REQUIRE(run("simulate", R"({"params":{"A":0.1},"steps":0})", out1) == 0);
    CHECK(read_csv(out1 / "simulate.csv").size() == 2);
}

TEST_CASE("exit codes: 2 for config violations") {
    CHECK(run("simulate", R"({"params":{"A":0.1,"t0":0.3}})", work_dir() / "bad1") == 2);
    CHECK(run("simulate", R"({"params":{"C":-1.0}})", work_dir() / "bad2") == 2);
    CHECK(run("simulate", R"({"steps":-4})", work_dir() / "bad3") == 2);
    CHECK(run("phase-portrait", R"({"window":{"v_lo":5.0,"v_hi":1.0}})",
              work_dir() / "bad4") == 2);
    CHECK(run("scan-A", R"({"m_list":[]})", work_dir() / "bad5") == 2);
    CHECK(run("nonsense", "{}", work_dir() / "bad6") == 2);
}

TEST_CASE("find-orbits: empty catalog below T = 1 still succeeds") {
    auto out = work_dir() / "orb0";
    REQUIRE(run("find-orbits", R"({"params":{"A":0.5,"gamma":1.5},"T_max":0.5})", out) == 0);
    auto rows = read_csv(out / "orbits.csv");
    REQUIRE(rows.size() == 2); // header + summary
    CHECK(rows[1][0] == "summary");
    CHECK(rows[1][1] == "0");
}

TEST_CASE("find-orbits: constant column count and verified residuals") {
    auto out = work_dir() / "orb1";
    REQUIRE(run("find-orbits", R"({"params":{"A":0.5,"gamma":1.5},"T_max":5})", out) == 0);
    auto rows = read_csv(out / "orbits.csv");
    REQUIRE(rows.size() > 3);
    for (const auto& r : rows) CHECK(r.size() == rows[0].size());
    for (size_t i = 1; i + 1 < rows.size(); ++i)
        CHECK(std::stod(rows[i][7]) < 1e-9); // residual column
}

TEST_CASE("arith-scan: defaults classify the overlapping regime") {
    auto out = work_dir() / "arith0";
    REQUIRE(run("arith-scan", R"({"arith":{"gamma":1.5},"N":3000})", out) == 0);
    auto rows = read_csv(out / "hits.csv");
    REQUIRE(rows.size() >= 3);
    const auto& summary = rows[rows.size() - 2];
    REQUIRE(summary[0] == "summary");
    CHECK(summary[2] == "AllParameters");
    CHECK(summary[3] == "overlapping");
}

TEST_CASE("phase-portrait: svg parses and covers the point cloud") {
    auto out = work_dir() / "pp0";
    REQUIRE(run("phase-portrait",
                R"({"params":{"A":0.3,"gamma":1.5},"seeds":30,"iters":100,)"
                R"("window":{"v_lo":1.0,"v_hi":5.0}})",
                out, "--seed 11") == 0);
    std::ifstream svg(out / "portrait.svg");
    REQUIRE(svg.good());
    std::stringstream ss;
    ss << svg.rdbuf();
    const std::string body = ss.str();
    CHECK(body.rfind("<svg", 0) == 0);
    CHECK(body.find("</svg>") != std::string::npos);
    size_t circles = 0;
    for (size_t pos = 0; (pos = body.find("<circle", pos)) != std::string::npos; ++pos)
        ++circles;
    const auto rows = read_csv(out / "portrait.csv");
    CHECK(circles >= rows.size() - 1); // one circle per emitted point
}

TEST_CASE("portrait window around an elliptic point keeps seeds bounded") {
    // oracle: island_area fixes the island scales; seeds inside should stay
    SystemParams base;
    base.A = 0.0;
    base.C = 1.0;
    base.gamma = 1.5;
    base.B = 1.0;
    auto w = orbits::elliptic_A_window(5, 9, base, -0.95, -0.8);
    REQUIRE(w.has_value());
    SystemParams p = base;
    p.A = 0.5 * (w->A_lo + w->A_hi);
    p.B = std::max(1.0, p.A);
    auto o = orbits::find_plus_orbit(5, 9, p);
    REQUIRE(o.has_value());
    const auto island = nf::island_area(*o, p, 0.0, 400, 41);
    REQUIRE(island.bounded_count >= 9);
    const double rt = 0.5 * island.t_extent, rv = 0.5 * island.v_extent;

    auto stays = [&](PhasePoint x) {
        for (int i = 0; i < 1000; ++i) {
            try {
                x = step(step(x, p), p);
            } catch (const DomainExit&) {
                return false;
            }
            double dt = x.t - o->p2.t;
            if (dt > 0.5) dt -= 1.0;
            if (dt < -0.5) dt += 1.0;
            if (std::abs(dt) > 2.0 * rt || std::abs(x.v - o->p2.v) > 2.0 * rv) return false;
        }
        return true;
    };
    SplitMix64 rng(99);
    int kept = 0;
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
        PhasePoint x{o->p2.t + rt * 0.8 * (2.0 * rng.uniform01() - 1.0),
                     o->p2.v + rv * 0.8 * (2.0 * rng.uniform01() - 1.0)};
        x.t = wrap_unit(x.t);
        if (stays(x)) ++kept;
    }
    CHECK(kept >= seeds * 30 / 100);

    // hyperbolic neighborhood: almost nothing stays
    SystemParams ph = base;
    ph.A = w->anchor * 1.05;
    ph.B = std::max(1.0, ph.A);
    auto oh = orbits::find_plus_orbit(5, 9, ph);
    REQUIRE(oh.has_value());
    auto stays_h = [&](PhasePoint x) {
        for (int i = 0; i < 1000; ++i) {
            try {
                x = step(step(x, ph), ph);
            } catch (const DomainExit&) {
                return false;
            }
            double dt = x.t - oh->p2.t;
            if (dt > 0.5) dt -= 1.0;
            if (dt < -0.5) dt += 1.0;
            if (std::abs(dt) > 2.0 * rt || std::abs(x.v - oh->p2.v) > 2.0 * rv) return false;
        }
        return true;
    };
    int kept_h = 0;
    for (int s = 0; s < seeds; ++s) {
        PhasePoint x{oh->p2.t + rt * 0.8 * (2.0 * rng.uniform01() - 1.0),
                     oh->p2.v + rv * 0.8 * (2.0 * rng.uniform01() - 1.0)};
        x.t = wrap_unit(x.t);
        if (stays_h(x)) ++kept_h;
    }
    CHECK(kept_h < seeds * 5 / 100);
}

TEST_CASE("cantor and escape-dim emit their tables") {
    auto out = work_dir() / "cant0";
    REQUIRE(run("cantor", R"({"model":{"d0":4,"growth":2},"depth":6})", out) == 0);
    auto rows = read_csv(out / "cantor.csv");
    REQUIRE(rows.size() == 7);
    for (const auto& r : rows) CHECK(r.size() == rows[0].size());
    // s_min column nondecreasing beyond level 3
    double prev = 0.0;
    for (size_t i = 4; i < rows.size(); ++i) {
        const double s = std::stod(rows[i][6]);
        CHECK(s >= prev - 1e-12);
        prev = s;
    }

    auto out2 = work_dir() / "esc0";
    REQUIRE(run("escape-dim",
                R"({"params":{"A":1.0,"gamma":1.5},"C_height":30,"depth":3})", out2) == 0);
    auto rows2 = read_csv(out2 / "escape.csv");
    REQUIRE(rows2.size() == 5); // header + 3 levels + summary
    CHECK(rows2.back()[0] == "summary");
    CHECK(std::stod(rows2.back()[2]) > 0.0);
}

TEST_CASE("scan-A summary reports both slopes") {
    auto out = work_dir() / "scanA";
    REQUIRE(run("scan-A",
                R"({"params":{"gamma":1.5},"n":0,"m_list":[12,13,14],"grid":512})",
                out) == 0);
    auto rows = read_csv(out / "windows.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows.back()[0] == "summary");
    const double norm_slope = std::stod(rows.back()[4]);
    CHECK(norm_slope < 0.0);
}
