// Command-line front end: tube volumes, equalizing partitions, waist
// estimates and the lemma property suites, with reproducible seeded output.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "waist/equalizer.hpp"
#include "waist/io.hpp"
#include "waist/maps.hpp"
#include "waist/measure.hpp"
#include "waist/suites.hpp"
#include "waist/waist_verifier.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitCheckFailed = 4;

struct GlobalArgs {
    std::uint64_t seed = 12345;
    int threads = 1;
    std::string out_dir = "out";
};

nlohmann::json run_info(const GlobalArgs& g, const std::string& command) {
    return {{"command", command}, {"seed", g.seed}, {"threads", g.threads}};
}

int cmd_tube(const GlobalArgs& g, int n, int k, const std::vector<double>& eps_list, long mc) {
    std::string csv = mc > 0 ? "eps,fraction,mc,mc_sigma\n" : "eps,fraction\n";
    std::printf("%-8s %-14s", "eps", "fraction");
    if (mc > 0) std::printf(" %-14s %-10s", "mc", "sigma");
    std::printf("\n");
    for (double eps : eps_list) {
        const double frac = waist::tube_fraction(n, k, eps);
        csv += waist::format_g(eps) + "," + waist::format_g17(frac);
        std::printf("%-8.4f %-14.10f", eps, frac);
        if (mc > 0) {
            const auto [est, sigma] = waist::mc_equatorial_tube_fraction(
                n, k, eps, static_cast<std::size_t>(mc), g.seed, g.threads);
            csv += "," + waist::format_g(est) + "," + waist::format_g(sigma);
            std::printf(" %-14.10f %-10.2e", est, sigma);
        }
        csv += "\n";
        std::printf("\n");
    }
    waist::ArtifactWriter writer(g.out_dir);
    writer.add("tube.csv", csv);
    nlohmann::json info = run_info(g, "tube");
    info["n"] = n;
    info["k"] = k;
    writer.write_all(info);
    return 0;
}

int cmd_equalize(const GlobalArgs& g, int depth, int n, int k, const std::string& map_name,
                 waist::SolveOptions opts) {
    const waist::MapSpec map = waist::MapSpec::parse(map_name, n, k);
    opts.root_seed = g.seed;
    opts.threads = g.threads;
    waist::MapFn f = [&map](const waist::UnitVector& x) { return map(x); };
    const waist::SolveResult res = waist::solve(depth, n, f, k, opts);

    waist::ArtifactWriter writer(g.out_dir);
    if (res.partition) writer.add("partition.txt", waist::to_text(*res.partition));
    writer.add("trace.jsonl", waist::solve_trace_jsonl(res));
    writer.add("summary.json",
               waist::solve_summary_json(res, depth, n, k, map.name()).dump(2) + "\n");
    nlohmann::json info = run_info(g, "equalize");
    info["depth"] = depth;
    info["n"] = n;
    info["k"] = k;
    info["map"] = map.name();
    writer.write_all(info);

    std::printf("equalize i=%d n=%d k=%d map=%s: residual=%.3e verified=%.3e volume_gap=%.3e "
                "image_diameter=%.3e %s\n",
                depth, n, k, map.name().c_str(), res.residual_opt, res.residual_verified,
                res.volume_gap, res.image_diameter, res.converged ? "CONVERGED" : "NOT-CONVERGED");
    return res.converged ? 0 : kExitNotConverged;
}

int cmd_waist(const GlobalArgs& g, const std::string& map_name, int n, int k, double eps,
              waist::WaistOptions wopts, double bias_coef) {
    const waist::MapSpec map = waist::MapSpec::parse(map_name, n, k);
    wopts.seed = g.seed;
    wopts.threads = g.threads;
    const waist::WaistReport rep = waist::waist_estimate(map, eps, wopts);
    if (bias_coef < 0.0) {
        if (map.kind == waist::MapSpec::Kind::projection) {
            bias_coef = std::max(0.0, rep.gap) / rep.delta;
        } else {
            bias_coef = waist::calibrate_slab_bias(n, k, eps, wopts);
        }
    }
    const waist::TheoremCheck check = waist::theorem_check(rep, bias_coef);

    waist::ArtifactWriter writer(g.out_dir);
    nlohmann::json j = waist::waist_report_json(rep);
    j["bias_coef"] = bias_coef;
    j["allowance"] = check.allowance;
    j["theorem_pass"] = check.pass;
    writer.add("waist.json", j.dump(2) + "\n");
    writer.add("waist.csv", waist::waist_report_csv(rep));
    writer.add("waist_plot.txt", waist::waist_report_plot(rep));
    nlohmann::json info = run_info(g, "waist");
    info["map"] = map.name();
    info["n"] = n;
    info["k"] = k;
    info["eps"] = eps;
    writer.write_all(info);

    if (rep.skipped) std::printf("warning: %zu grid points had empty slabs (data gaps)\n",
                                 rep.skipped);
    std::printf("waist map=%s n=%d k=%d eps=%.3f: max=%.6f bound=%.6f gap=%+.6f "
                "allowance=%.6f %s\n",
                map.name().c_str(), n, k, eps, rep.max_fraction, rep.bound, rep.gap,
                check.allowance, check.pass ? "PASS" : "FAIL");
    return check.pass ? 0 : kExitCheckFailed;
}

int cmd_check(const GlobalArgs& g, const std::string& suite) {
    std::vector<waist::SuiteResult> results;
    if (suite == "concavity" || suite == "all")
        results.push_back(waist::run_concavity_suite(g.seed));
    if (suite == "partition" || suite == "all")
        results.push_back(waist::run_partition_suite(g.seed));
    if (suite == "measure" || suite == "all")
        results.push_back(waist::run_measure_suite(g.seed, {}, g.threads));

    std::string jsonl;
    bool all_pass = true;
    for (const auto& res : results) {
        jsonl += waist::suite_results_jsonl(res);
        for (const auto& r : res.records)
            std::printf("[%s] %s/%s measured=%.6g bound=%.6g\n", r.pass ? "PASS" : "FAIL",
                        res.suite.c_str(), r.check.c_str(), r.measured, r.bound);
        all_pass = all_pass && res.all_pass();
    }
    waist::ArtifactWriter writer(g.out_dir);
    writer.add("results.jsonl", jsonl);
    nlohmann::json info = run_info(g, "check");
    info["suite"] = suite;
    writer.write_all(info);
    return all_pass ? 0 : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spherical waist toolkit: tube volumes, equalizing partitions, "
                 "waist verification and lemma suites"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file, one section per subcommand");

    GlobalArgs g;
    app.add_option("--seed", g.seed, "root seed; all randomness derives from it");
    app.add_option("--threads", g.threads, "parallelism width")->check(CLI::Range(1, 64));
    app.add_option("--out", g.out_dir, "output directory");

    // tube
    auto* tube = app.add_subcommand("tube", "closed-form equatorial tube volume fractions");
    int tn = 2, tk = 1;
    std::vector<double> teps = {0.5};
    long tmc = 0;
    tube->add_option("--n", tn, "sphere dimension")->check(CLI::Range(1, 16));
    tube->add_option("--k", tk, "codimension")->check(CLI::Range(1, 16));
    tube->add_option("--eps", teps, "tube radii (radians)")->delimiter(',');
    tube->add_option("--mc", tmc, "Monte Carlo cross-check sample count");

    // equalize
    auto* eq = app.add_subcommand("equalize", "search for an equal-volume equal-image partition");
    int ei = 1, en = 2, ek = 1;
    std::string emap = "proj";
    waist::SolveOptions eopts;
    eq->add_option("--i", ei, "partition depth")->check(CLI::Range(1, 4));
    eq->add_option("--n", en, "sphere dimension")->check(CLI::Range(2, 8));
    eq->add_option("--k", ek, "map range dimension")->check(CLI::Range(1, 4));
    eq->add_option("--map", emap, "map: proj | perturbed[:eta[:freq]] | radial[:amp]");
    eq->add_option("--restarts", eopts.restarts)->check(CLI::Range(1, 64));
    eq->add_option("--tol", eopts.tolerance, "residual tolerance");
    eq->add_option("--coarse", eopts.coarse_samples, "coarse-tier samples per evaluation");
    eq->add_option("--fine", eopts.fine_samples, "fine-tier samples per evaluation");
    eq->add_option("--verify", eopts.verify_samples, "re-verification samples (0: 10x fine)");
    eq->add_option("--max-iter", eopts.max_iterations, "simplex iterations per tier");

    // waist
    auto* ws = app.add_subcommand("waist", "max-over-z fiber tube volume vs the bound");
    int wn = 2, wk = 1;
    std::string wmap = "proj";
    double weps = 0.5, wbias = -1.0;
    waist::WaistOptions wopts;
    long wphase1 = 0, wphase2 = 0;
    ws->add_option("--map", wmap, "map: proj | perturbed[:eta[:freq]] | radial[:amp]");
    ws->add_option("--n", wn, "sphere dimension")->check(CLI::Range(2, 8));
    ws->add_option("--k", wk, "map range dimension")->check(CLI::Range(1, 2));
    ws->add_option("--eps", weps, "tube radius (radians)")
        ->check(CLI::Range(1e-6, 1.5707963267948966));
    ws->add_option("--phase1", wphase1, "slab-source samples (0: per-k default)");
    ws->add_option("--phase2", wphase2, "query samples (0: per-k default)");
    ws->add_option("--slab", wopts.delta, "slab half-width (0: default)");
    ws->add_option("--grid-res", wopts.grid_res, "z-grid resolution (0: eps/4)");
    ws->add_option("--bias-coef", wbias,
                   "slab bias coefficient; negative calibrates on the projection");

    // check
    auto* ck = app.add_subcommand("check", "run a lemma property suite");
    std::string suite;
    ck->add_option("suite", suite, "concavity | measure | partition | all")
        ->required()
        ->check(CLI::IsMember({"concavity", "measure", "partition", "all"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (app.got_subcommand(tube)) return cmd_tube(g, tn, tk, teps, tmc);
        if (app.got_subcommand(eq)) return cmd_equalize(g, ei, en, ek, emap, eopts);
        if (app.got_subcommand(ws)) {
            if (wphase1 > 0) wopts.phase1 = static_cast<std::size_t>(wphase1);
            if (wphase2 > 0) wopts.phase2 = static_cast<std::size_t>(wphase2);
            return cmd_waist(g, wmap, wn, wk, weps, wopts, wbias);
        }
        if (app.got_subcommand(ck)) return cmd_check(g, suite);
    } catch (const waist::OutOfDomain&) {
        std::fprintf(stderr, "error: invalid argument combination\n");
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kExitUsage;
}
