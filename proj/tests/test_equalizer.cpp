#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "waist/equalizer.hpp"
#include "waist/suites.hpp"

using namespace waist;

namespace {

const MapFn kHeight = [](const UnitVector& x) { return std::vector<double>{x[2]}; };

}  // namespace

TEST_CASE("section values at hand-checked partitions") {
    // normal on the equator of the height map: both volumes are halves and
    // the two centroids sit on the equator, so the section vanishes
    const OrientedPartition equator(1, {UnitVector::axis(0, 2)});
    const SectionValue sv = section_F(equator, kHeight, 1, 400000, 901);
    CHECK(std::fabs(sv.dv[1]) < 0.01);
    CHECK(std::fabs(sv.dphi[1][0]) < 0.01);

    // pole-pointing normal: volumes agree but the images are +-1 apart
    const OrientedPartition pole(1, {UnitVector::axis(2, 2)});
    const SectionValue sp = section_F(pole, kHeight, 1, 400000, 901);
    CHECK(std::fabs(sp.dv[1]) < 0.01);
    CHECK(sp.dphi[1][0] == Catch::Approx(1.0).margin(0.01));
    CHECK(residual(sp) == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("constant maps tie the section to pure volume differences") {
    RngStream rng(902, 0);
    const OrientedPartition p = random_partition(rng, 2, 2);
    MapFn constant = [](const UnitVector&) { return std::vector<double>{3.0}; };
    const std::vector<double> cloud = uniform_cloud(903, 0, 2, 50000);
    const SectionEval ev = evaluate_section(p, constant, 1, cloud);
    for (int m = 1; m <= p.node_count(); ++m)
        CHECK(ev.value.dphi[static_cast<std::size_t>(m)][0] ==
              Catch::Approx(3.0 * ev.value.dv[static_cast<std::size_t>(m)]).margin(1e-12));
}

TEST_CASE("residual norm") {
    SectionValue s;
    s.depth = 2;
    s.k = 1;
    s.dv = {0.0, 0.3, 0.0, -0.4};
    s.dphi = {{0.0}, {0.0}, {0.0}, {0.0}};
    CHECK(residual(s) == Catch::Approx(0.5).margin(1e-15));
    for (auto& v : s.dv) v *= 2.0;
    CHECK(residual(s) == Catch::Approx(1.0).margin(1e-15));

    SectionValue zero;
    zero.dv = {0.0, 0.0};
    zero.dphi = {{0.0}, {0.0}};
    CHECK(residual(zero) == 0.0);
    CHECK(s.packed().size() == 6);
}

TEST_CASE("section residual is automorphism invariant on a shared cloud") {
    RngStream rng(904, 0);
    const std::vector<double> cloud = uniform_cloud(905, 0, 2, 100000);
    for (int i = 0; i < 10; ++i) {
        const int depth = 1 + i % 3;
        const OrientedPartition p = random_partition(rng, depth, 2);
        const std::uint64_t mask = rng.next_u64() & ((1ull << ((1 << depth) - 1)) - 1);
        const OrientedPartition q =
            apply_automorphism(TreeAutomorphism::from_mask(depth, mask), p);
        const double rp = residual(evaluate_section(p, kHeight, 1, cloud).value);
        const double rq = residual(evaluate_section(q, kHeight, 1, cloud).value);
        CHECK(rp == Catch::Approx(rq).margin(1e-9));
    }
}

TEST_CASE("solver finds an equalizing cut at depth one") {
    SolveOptions opt;
    opt.restarts = 3;
    opt.tolerance = 2.5e-3;
    opt.coarse_samples = 8000;
    opt.fine_samples = 200000;
    opt.verify_samples = 800000;
    opt.max_iterations = 250;
    opt.root_seed = 71;
    opt.threads = 2;
    const SolveResult res = solve(1, 2, kHeight, 1, opt);
    REQUIRE(res.partition.has_value());
    CHECK(res.converged);
    CHECK(res.residual_verified < 5e-3);
    // zeros of the height-map section are equatorial cuts
    CHECK(std::fabs(res.partition->normal(1)[2]) < 1e-2);
    CHECK(!res.trace.empty());
}

TEST_CASE("solver with a constant map only needs equal volumes") {
    MapFn constant = [](const UnitVector&) { return std::vector<double>{1.0}; };
    SolveOptions opt;
    opt.restarts = 2;
    opt.tolerance = 2.5e-3;
    opt.coarse_samples = 8000;
    opt.fine_samples = 100000;
    opt.verify_samples = 400000;
    opt.max_iterations = 150;
    opt.root_seed = 72;
    opt.threads = 2;
    const SolveResult res = solve(1, 2, constant, 1, opt);
    CHECK(res.residual_verified < 5e-3);
    CHECK(res.volume_gap < 5e-3);
}

TEST_CASE("grassmann net covers sampled balls") {
    RngStream rng(73, 0);
    const auto planes = grassmann_net(3, 1, 0.5, rng, 2000);
    CHECK(!planes.empty());
    CHECK(planes[0].dim() == 1);
    CHECK(planes[0].ambient() == 4);

    // fresh test balls are covered
    RngStream fresh(74, 0);
    int uncovered = 0;
    for (int b = 0; b < 2000; ++b) {
        const auto W = random_orthonormal(fresh, 4, 3);
        std::vector<double> x(4, 0.0);
        for (const auto& w : W) axpy(fresh.next_normal(), w, x);
        scale_inplace(x, 1.0 / norm(x));
        bool hit = false;
        for (const auto& L : planes)
            if (angle_to_subspace(L.basis, x) <= 0.5) hit = true;
        if (!hit) ++uncovered;
    }
    CHECK(uncovered <= 2);  // probabilistic net: fresh misses are rare

    // a coarse net needs very few planes
    RngStream rng2(75, 0);
    const auto coarse = grassmann_net(3, 1, 1.5, rng2, 2000);
    CHECK(coarse.size() <= 6);

    RngStream rng3(76, 0);
    CHECK_THROWS_AS(grassmann_net(2, 1, 0.5, rng3), OutOfDomain);  // n - k - 1 = 0
}

TEST_CASE("pancake width of a thin wedge") {
    // wedge of dihedral half-angle delta about the great circle x3 = 0:
    // { s x2 > c |x3| } has width exactly delta against that circle
    const double delta = 0.2;
    const double s = std::sin(delta), c = std::cos(delta);
    ConvexCell wedge;
    wedge.constraints = {{normalize({0.0, s, c}), +1}, {normalize({0.0, s, -c}), +1}};
    RngStream rng(77, 0);
    const double w = pancake_width(wedge, 1, 20000, rng);
    CHECK(w == Catch::Approx(delta).epsilon(0.10));

    // refining the wedge cannot increase the width
    ConvexCell half = wedge;
    half.constraints.push_back({UnitVector::axis(0, 2), +1});
    RngStream rng2(78, 0);
    const double w2 = pancake_width(half, 1, 20000, rng2);
    CHECK(w2 <= w * 1.05 + 1e-3);

    // hemisphere width: strictly positive, reproducible regression value
    ConvexCell hemi;
    hemi.constraints = {{UnitVector::axis(2, 2), +1}};
    RngStream rng3(79, 0);
    const double wh = pancake_width(hemi, 1, 20000, rng3);
    CHECK(wh > 0.3);
    RngStream rng4(79, 0);
    CHECK(pancake_width(hemi, 1, 20000, rng4) == wh);

    ConvexCell empty;
    empty.constraints = {{UnitVector::axis(2, 2), +1}, {UnitVector::axis(2, 2), -1}};
    RngStream rng5(80, 0);
    CHECK_THROWS_AS(pancake_width(empty, 1, 5000, rng5), EmptyCell);
}

TEST_CASE("constrained solve on a single subsphere") {
    // one plane L: normals confined to the S^2 of its complement
    RngStream rng(81, 0);
    const auto planes = std::vector<Subspace>{Subspace{{{0.0, 0.0, 0.0, 1.0}}}};
    MapFn height3 = [](const UnitVector& x) { return std::vector<double>{x[2]}; };
    SolveOptions opt;
    opt.restarts = 2;
    opt.tolerance = 5e-3;
    opt.coarse_samples = 6000;
    opt.fine_samples = 150000;
    opt.verify_samples = 600000;
    opt.max_iterations = 200;
    opt.root_seed = 82;
    opt.threads = 2;
    const ConstrainedResult res = constrained_solve(1, 3, height3, 1, planes, opt, 3000);
    REQUIRE(res.solve.partition.has_value());
    CHECK(res.solve.residual_verified < 1e-2);
    // the normal stays inside the designated subsphere
    CHECK(std::fabs(res.solve.partition->normal(1)[3]) < 1e-12);
    CHECK(res.pancake_widths.size() == 2);
}

TEST_CASE("pancake widths shrink as constrained depth grows") {
    RngStream rng(83, 0);
    const auto planes = grassmann_net(3, 1, 0.6, rng, 1500);
    MapFn height3 = [](const UnitVector& x) { return std::vector<double>{x[2]}; };
    SolveOptions opt;
    opt.restarts = 2;
    opt.tolerance = 0.05;
    opt.coarse_samples = 5000;
    opt.fine_samples = 40000;
    opt.verify_samples = 100000;
    opt.max_iterations = 120;
    opt.threads = 2;
    double prev = 1e300;
    for (int depth : {2, 3, 4}) {
        opt.root_seed = 84 + static_cast<std::uint64_t>(depth);
        const ConstrainedResult res = constrained_solve(depth, 3, height3, 1, planes, opt, 2500);
        REQUIRE(res.solve.partition.has_value());
        double sum = 0.0;
        int cnt = 0;
        for (double w : res.pancake_widths)
            if (!std::isnan(w)) {
                sum += w;
                ++cnt;
            }
        REQUIRE(cnt > 0);
        const double mean = sum / cnt;
        INFO("depth " << depth << " mean width " << mean);
        CHECK(mean < prev + 1e-9);
        prev = mean;
    }
}
