#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "waist/waist_verifier.hpp"

using namespace waist;

TEST_CASE("fiber tube volume of the equatorial fiber") {
    const MapSpec proj{MapSpec::Kind::projection, 2, 1};
    const std::vector<double> z0 = {0.0};
    const FiberTube ft = fiber_tube_volume(proj, z0, 0.5, 0.01, 400000, 50000, 404, 2);
    // exact equatorial tube volume is sin(eps); slab bias is one-sided
    CHECK(ft.fraction == Catch::Approx(std::sin(0.5)).margin(0.02));
    CHECK(ft.fraction >= std::sin(0.5) - 4 * ft.sigma);
    CHECK(ft.slab_count > 100);

    const std::vector<double> z_out = {2.0};
    CHECK_THROWS_AS(fiber_tube_volume(proj, z_out, 0.5, 0.01, 100000, 10000, 404), EmptySlab);

    // at eps = pi/2 the tube of the central fiber covers the whole sphere
    const FiberTube full = fiber_tube_volume(proj, z0, kHalfPi, 0.01, 100000, 20000, 404);
    CHECK(full.fraction == 1.0);
}

TEST_CASE("per-z fraction is nondecreasing in eps on shared clouds") {
    const MapSpec proj{MapSpec::Kind::projection, 2, 1};
    const MapCloud cloud(proj, 200000, 405);
    const std::vector<double> queries = uniform_cloud(405, 41000, 2, 30000);
    for (double z : {-0.4, 0.0, 0.3}) {
        const std::vector<double> zz = {z};
        double prev = -1.0;
        for (double eps : {0.2, 0.35, 0.5, 0.8, 1.1}) {
            const FiberTube ft = fiber_tube_from_cloud(cloud, zz, eps, 0.01, queries);
            CHECK(ft.fraction >= prev);  // exact: same clouds, larger radius
            prev = ft.fraction;
        }
    }
}

TEST_CASE("waist estimate on the projection") {
    WaistOptions opt;
    opt.phase1 = 400000;
    opt.seed = 406;
    opt.threads = 2;
    const MapSpec proj{MapSpec::Kind::projection, 2, 1};
    const WaistReport rep = waist_estimate(proj, 0.5, opt);
    CHECK(rep.bound == Catch::Approx(std::sin(0.5)).margin(1e-10));
    CHECK(std::fabs(rep.gap) < 0.02);
    CHECK(std::fabs(rep.argmax_z[0]) < 0.15);  // extremal fiber sits at z = 0
    CHECK(rep.rows.size() > 10);

    const TheoremCheck tc = theorem_check(rep, std::max(0.0, rep.gap) / rep.delta);
    CHECK(tc.pass);
}

TEST_CASE("waist estimate flags empty grid corners but keeps going") {
    WaistOptions opt;
    opt.phase1 = 200000;
    opt.seed = 407;
    opt.threads = 2;
    const MapSpec proj{MapSpec::Kind::projection, 2, 1};
    const WaistReport rep = waist_estimate(proj, 1.0, opt);
    CHECK(rep.max_fraction >= rep.bound - (4 * rep.sigma_at_max + 0.03));
    CHECK(rep.skipped <= 4);
}

TEST_CASE("degradation vanishes with the perturbation") {
    WaistOptions opt;
    opt.phase1 = 300000;
    opt.phase2 = 40000;
    opt.seed = 408;
    opt.threads = 2;
    const MapSpec proj{MapSpec::Kind::projection, 2, 1};
    const std::vector<double> deltas = {0.2, 0.05, 0.0};
    const auto rows = continuity_degradation(proj, deltas, 0.5, opt);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].sup_norm <= 0.2 + 1e-12);
    CHECK(rows[2].diff == 0.0);                     // eta = 0 reproduces f exactly
    CHECK(rows[1].diff <= rows[0].diff + 0.015);    // drift shrinks with delta
}
