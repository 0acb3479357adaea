// Acceptance suite: runs every verification criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "waist/equalizer.hpp"
#include "waist/io.hpp"
#include "waist/maps.hpp"
#include "waist/measure.hpp"
#include "waist/suites.hpp"
#include "waist/waist_verifier.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& details, double seconds) {
    std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", idx, name,
                details.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- criterion 1: tube formula + MC cross-check -----------------------------

void criterion_tube() {
    const auto t0 = Clock::now();
    double worst_closed = 0.0;
    for (int i = 1; i <= 15; ++i) {
        const double eps = 0.1 * i;
        worst_closed = std::max(worst_closed,
                                std::fabs(waist::tube_fraction(2, 1, eps) - std::sin(eps)));
        worst_closed = std::max(
            worst_closed,
            std::fabs(waist::tube_fraction(3, 2, eps) - std::sin(eps) * std::sin(eps)));
    }
    bool mc_ok = true;
    double worst_mc = 0.0;
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}}) {
        for (double eps : {0.3, 0.8}) {
            const auto [est, sigma] =
                waist::mc_equatorial_tube_fraction(n, k, eps, 1000000, 1001, 2);
            const double pull = std::fabs(est - waist::tube_fraction(n, k, eps)) / sigma;
            worst_mc = std::max(worst_mc, pull);
            if (pull > 4.0) mc_ok = false;
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[160];
    std::snprintf(buf, sizeof buf, "closed-form err %.2e <= 1e-10; worst MC pull %.2f sigma <= 4",
                  worst_closed, worst_mc);
    report(1, "tube formula", worst_closed <= 1e-10 && mc_ok && secs < 10.0, buf, secs);
}

// --- criteria 2, 3, 4, 7 via the lemma suites --------------------------------

const waist::CheckRecord* find(const waist::SuiteResult& s, const std::string& name) {
    for (const auto& r : s.records)
        if (r.check == name) return &r;
    return nullptr;
}

void criterion_concavity() {
    const auto t0 = Clock::now();
    waist::SuiteCounts counts;
    counts.imp_triples = 500;
    const waist::SuiteResult suite = waist::run_concavity_suite(1002, counts);
    const auto* rb = find(suite, "ratio_bound");
    const auto* eq = find(suite, "ratio_bound_equality");
    const bool pass = rb && rb->pass && eq && eq->pass;
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    char buf[160];
    std::snprintf(buf, sizeof buf, "500 triples, worst lhs-rhs %.2e >= -1e-8; equality err %.2e",
                  rb ? rb->measured : -1.0, eq ? eq->measured : -1.0);
    report(2, "mass-ratio inequality suite", pass && secs < 60.0, buf, secs);
}

void criterion_ball_lower() {
    const auto t0 = Clock::now();
    waist::SuiteCounts counts;
    counts.ne_instances = 100;
    waist::SuiteResult suite;
    suite.suite = "measure-ne";
    {
        waist::RngStream rng(1003, 300);
        int fails = 0;
        double worst = 1e300;
        for (int i = 0; i < counts.ne_instances; ++i) {
            const waist::KDimMeasure mu = waist::random_measure(rng, i);
            for (double eps : {0.1, 0.3, 0.6, 1.0, 1.4}) {
                const auto r = waist::ball_lower_bound_check(mu, eps);
                worst = std::min(worst, r.measured - r.bound);
                if (!r.pass) ++fails;
            }
        }
        const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "100 instances x 5 radii, worst margin %.2e >= -1e-6, %d failures", worst,
                      fails);
        report(3, "ball-mass lower bound suite", fails == 0 && secs < 120.0, buf, secs);
    }
}

void criterion_partition() {
    const auto t0 = Clock::now();
    waist::SuiteCounts counts;
    counts.canonical_orbits = 100;
    const waist::SuiteResult suite = waist::run_partition_suite(1004, counts);
    bool pass = true;
    for (const char* name : {"orbit_size", "orbit_depth2_exact", "canonical_form_orbit_constant",
                             "volume_additivity", "volume_additivity_independent"}) {
        bool found = false;
        for (const auto& r : suite.records)
            if (r.check == name) {
                found = true;
                pass = pass && r.pass;
            }
        pass = pass && found;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(4, "partition/group suite",
           pass && secs < 60.0,
           "orbit sizes 2^(2^i-1) at i=1,2,3; exact depth-2 orbit; canonical form on 100 orbits; "
           "volume additivity",
           secs);
}

void criterion_measure_props() {
    const auto t0 = Clock::now();
    waist::SuiteCounts counts;
    counts.bishop_cells = 50;
    counts.boundeddensity_instances = 100;
    counts.maj_instances = 100;
    counts.gpl_instances = 50;
    counts.desint_pairs = 20;
    const waist::SuiteResult suite = waist::run_measure_suite(1007, counts, 2);
    bool pass = true;
    std::string failing;
    for (const char* name : {"bishop_gromov", "density_max_bound", "ball_mass_upper",
                             "gpl_ball_concavity", "desintegration"}) {
        const auto* r = find(suite, name);
        if (!r || !r->pass) {
            pass = false;
            failing += std::string(name) + " ";
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(7, "measure property suites", pass && secs < 300.0,
           pass ? "Bishop-Gromov 50, density bound 100, ball-mass upper 100, gpl 50, desint 20"
                : "failing: " + failing,
           secs);
}

// --- criterion 5: equalizer --------------------------------------------------

void criterion_equalizer() {
    const auto t0 = Clock::now();
    waist::MapFn height = [](const waist::UnitVector& x) { return std::vector<double>{x[2]}; };
    bool pass = true;
    std::string details;
    for (int depth : {1, 2}) {
        waist::SolveOptions opt;
        opt.restarts = 4;
        opt.tolerance = 2.5e-3;
        opt.coarse_samples = 10000;
        opt.fine_samples = 1000000;
        opt.verify_samples = 10000000;
        opt.max_iterations = depth == 1 ? 300 : 400;
        opt.root_seed = 1005;
        opt.threads = 2;
        const waist::SolveResult res = waist::solve(depth, 2, height, 1, opt);
        const bool ok = res.partition.has_value() && res.residual_verified < 5e-3 &&
                        res.volume_gap < 5e-3 && res.image_diameter < 5e-3;
        char buf[160];
        std::snprintf(buf, sizeof buf, "i=%d: residual %.2e, volume gap %.2e, image diam %.2e; ",
                      depth, res.residual_verified, res.volume_gap, res.image_diameter);
        details += buf;
        pass = pass && ok;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(5, "equalizer at 1e7-sample re-verification", pass && secs < 600.0, details, secs);
}

// --- criterion 6: waist desk check -------------------------------------------

void criterion_waist() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string details;
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {3, 2}}) {
        for (double eps : {0.2, 0.5, 1.0}) {
            waist::WaistOptions opt;
            opt.seed = 1006;
            opt.threads = 2;
            double bias_coef = 0.0;
            for (const waist::MapSpec& map : waist::MapSpec::library(n, k)) {
                const waist::WaistReport rep = waist::waist_estimate(map, eps, opt);
                if (map.kind == waist::MapSpec::Kind::projection) {
                    bias_coef = std::max(0.0, rep.gap) / rep.delta;
                    if (std::fabs(rep.gap) > 0.02) {
                        pass = false;
                        char buf[120];
                        std::snprintf(buf, sizeof buf, "proj(%d,%d,eps=%.1f) |gap|=%.3f>0.02; ",
                                      n, k, eps, std::fabs(rep.gap));
                        details += buf;
                    }
                } else {
                    const waist::TheoremCheck tc = waist::theorem_check(rep, bias_coef);
                    if (!tc.pass) {
                        pass = false;
                        char buf[160];
                        std::snprintf(buf, sizeof buf,
                                      "%s(%d,%d,eps=%.1f) max %.4f < bound %.4f - %.4f; ",
                                      rep.map_name.c_str(), n, k, eps, tc.max_fraction, tc.bound,
                                      tc.allowance);
                        details += buf;
                    }
                }
            }
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (pass) details = "9 configurations x 3 maps, projection |gap| <= 0.02 everywhere";
    report(6, "waist theorem desk check", pass && secs < 900.0, details, secs);
}

// --- criterion 8: determinism across parallelism widths ----------------------

int run_cli(const std::string& args) {
    const std::string cmd = std::string(WAISTCLI_PATH) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
}

void criterion_determinism() {
    const auto t0 = Clock::now();
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "waist_accept_det";
    fs::remove_all(base);
    bool pass = true;
    std::string details;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"tube", "tube --n 3 --k 2 --eps 0.3,0.7 --mc 200000"},
        {"equalize",
         "equalize --i 1 --n 2 --k 1 --map proj --restarts 2 --coarse 4000 --fine 50000 "
         "--verify 100000 --max-iter 120"},
        {"waist", "waist --map proj --n 2 --k 1 --eps 0.5 --phase1 100000 --phase2 20000 "
                  "--bias-coef 0.5"},
        {"check", "check partition"},
    };
    for (const auto& [name, args] : commands) {
        const fs::path d1 = base / (name + "_w1");
        const fs::path d8 = base / (name + "_w8");
        run_cli("--seed 7 --threads 1 --out " + d1.string() + " " + args);
        run_cli("--seed 7 --threads 8 --out " + d8.string() + " " + args);
        if (!fs::exists(d1 / "manifest.json") || !fs::exists(d8 / "manifest.json")) {
            pass = false;
            details += name + ": missing outputs; ";
            continue;
        }
        for (const auto& entry : fs::directory_iterator(d1)) {
            const std::string fname = entry.path().filename().string();
            if (read_file(entry.path()) != read_file(d8 / fname)) {
                pass = false;
                details += name + "/" + fname + " differs; ";
            }
        }
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (pass) details = "tube, equalize, waist, check byte-identical at widths 1 and 8";
    report(8, "determinism across widths", pass, details, secs);
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    criterion_tube();
    criterion_concavity();
    criterion_ball_lower();
    criterion_partition();
    criterion_equalizer();
    criterion_waist();
    criterion_measure_props();
    criterion_determinism();
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::printf("%s: %d criterion(s) failed [total %.1fs]\n",
                g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failures, secs);
    return g_failures == 0 ? 0 : 1;
}
