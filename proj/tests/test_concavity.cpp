#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "waist/concavity.hpp"
#include "waist/suites.hpp"

using namespace waist;

TEST_CASE("evaluation of generated densities") {
    const Density1D dsin(1.0, 0.0, kPi, {{0.0, 1.0}});
    CHECK(dsin.eval(kPi / 2) == Catch::Approx(1.0).margin(1e-15));

    const Density1D dcos2(2.0, -kPi / 3, kPi / 3, {{1.0, 0.0}});
    CHECK(dcos2.eval(0.0) == Catch::Approx(1.0).margin(1e-15));

    const Density1D dmin(1.0, 0.1, 1.4, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(dmin.eval(kPi / 4) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));

    CHECK_THROWS_AS(dmin.eval(1.6), OutOfDomain);
}

TEST_CASE("discrete sin-concavity criterion") {
    // sine itself satisfies the chord identity with equality
    const Density1D dsin(1.0, 0.1, kPi - 0.1, {{0.0, 1.0}});
    CHECK(is_sin_concave(sample_root_grid(dsin, 2001)));

    // constants fail: 2 <= 2 cos(h) is false
    GridFunction constant;
    constant.t0 = 0.0;
    constant.step = 0.01;
    constant.values.assign(101, 1.0);
    CHECK(!is_sin_concave(constant));

    const Density1D dcos(1.0, -kPi / 3, kPi / 3, {{1.0, 0.0}});
    CHECK(is_sin_concave(sample_root_grid(dcos, 2001)));
}

TEST_CASE("unique maximum check") {
    const Density1D dcos(3.0, -1.0, 1.0, {{1.0, 0.0}});
    CHECK(unique_max_check(dcos));

    const Density1D dmin(1.0, 0.1, 1.4, {{1.0, 0.0}, {0.0, 1.0}});
    CHECK(unique_max_check(dmin));

    GridFunction bimodal;
    bimodal.t0 = 0.0;
    bimodal.step = 0.001;
    bimodal.values.resize(1001);
    for (std::size_t i = 0; i <= 1000; ++i) {
        const double t = static_cast<double>(i) * 0.001;
        bimodal.values[i] = std::sin(2.0 * kPi * t) * std::sin(2.0 * kPi * t) + 0.1;
    }
    CHECK(!unique_max_check(bimodal));
}

TEST_CASE("symmetrize") {
    const Density1D dcos(1.0, 0.0, kPi / 3, {{1.0, 0.0}});
    CHECK(is_sin_concave(symmetrize(dcos)));

    const Density1D tilted(1.0, 0.0, 0.9, {{1.0, -0.2}});
    CHECK(is_sin_concave(symmetrize(tilted)));

    const Density1D rising(1.0, 0.0, kPi / 2, {{0.0, 1.0}});  // max at pi/2
    CHECK_THROWS_AS(symmetrize(rising), MaxNotAtZero);
}

TEST_CASE("cosine comparison") {
    const Density1D dcos(2.0, 0.0, kHalfPi, {{1.0, 0.0}});
    const CosComparison eq = cos_comparison(dcos, 0.4, kHalfPi);
    CHECK(eq.c == Catch::Approx(1.0).margin(1e-12));
    CHECK(eq.crossing_verified);

    RngStream rng(17, 0);
    for (int i = 0; i < 100; ++i) {
        const Density1D d = make_random_density(rng, 1.0 + i % 3, true);
        const double tau = d.t1();
        const CosComparison cc = cos_comparison(d, 0.3 * tau, tau);
        CHECK(cc.crossing_verified);
    }

    CHECK_THROWS_AS(cos_comparison(dcos, 0.4, 2.0), OutOfDomain);  // tau > pi/2 rejected
}

TEST_CASE("mass ratio bound") {
    const Density1D dcos(2.0, 0.0, kHalfPi, {{1.0, 0.0}});
    const RatioBound eq = ratio_bound(dcos, 1.0, 0.5);
    CHECK(std::fabs(eq.lhs - eq.rhs) < 1e-10);

    // eps beyond tau: left side is exactly one
    const Density1D small(1.0, 0.0, 0.4, {{1.0, -0.3}});
    const RatioBound one = ratio_bound(small, 0.7, 1.2);
    CHECK(one.lhs == Catch::Approx(1.0).margin(1e-12));
    CHECK(one.lhs >= one.rhs - 1e-8);

    const Density1D mixed(1.0, 0.0, 0.7, {{1.0, -0.1}, {0.9, -0.25}});
    const RatioBound rb = ratio_bound(mixed, 1.0, 0.4);
    CHECK(rb.lhs >= rb.rhs - 1e-8);

    const Density1D zero(1.0, 0.0, 0.4, {{-1.0, 0.0}});
    CHECK_THROWS_AS(ratio_bound(zero, 1.0, 0.2), ZeroMass);
}

TEST_CASE("density serialization round-trips") {
    RngStream rng(18, 0);
    for (int i = 0; i < 20; ++i) {
        const Density1D d = make_random_density(rng, 1.0 + i % 5, i % 2 == 0);
        const Density1D back = parse_density(to_text(d));
        CHECK(back.power() == d.power());
        CHECK(back.t0() == d.t0());
        CHECK(back.t1() == d.t1());
        CHECK(back.lines() == d.lines());
    }
}

TEST_CASE("concavity lemma suite") {
    const SuiteResult suite = run_concavity_suite(905);
    for (const auto& r : suite.records) {
        INFO(r.check);
        CHECK(r.pass);
    }
}
