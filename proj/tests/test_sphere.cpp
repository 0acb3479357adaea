#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "waist/sphere.hpp"

using namespace waist;

TEST_CASE("normalize") {
    const UnitVector a = normalize({2.0, 0.0, 0.0});
    CHECK(a[0] == 1.0);
    CHECK(a[1] == 0.0);

    const UnitVector b = normalize({1.0, 1.0, 0.0, 0.0});
    CHECK(b[0] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(b[1] == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(b[2] == 0.0);

    CHECK_THROWS_AS(normalize({0.0, 0.0, 0.0}), ZeroVector);
}

TEST_CASE("geodesic distance") {
    const auto e1 = UnitVector::axis(0, 2);
    const auto e2 = UnitVector::axis(1, 2);
    CHECK(geodesic_distance(e1, e2) == Catch::Approx(kPi / 2).margin(1e-15));
    CHECK(geodesic_distance(e1, e1) == 0.0);
    CHECK(geodesic_distance(e1, e1.negated()) == Catch::Approx(kPi).margin(1e-15));
    CHECK_THROWS_AS(geodesic_distance(e1, UnitVector::axis(0, 3)), DimMismatch);
}

TEST_CASE("polar coordinates") {
    const auto e1 = UnitVector::axis(0, 2);
    const auto e3 = UnitVector::axis(2, 2);
    const UnitVector q = polar_coordinates(e3, kPi / 2, e1);
    CHECK(geodesic_distance(q, e1) < 1e-12);
    const UnitVector r = polar_coordinates(e3, 0.0, e1);
    CHECK(geodesic_distance(r, e3) < 1e-12);
    const UnitVector s = polar_coordinates(e3, kPi / 4, e1);
    CHECK(s[0] == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(s[1] == 0.0);
    CHECK(s[2] == Catch::Approx(std::sqrt(0.5)).epsilon(1e-12));

    CHECK_THROWS_AS(polar_coordinates(e3, 0.3, e3), NotTangent);
}

TEST_CASE("polar points sit at the requested distance") {
    RngStream rng(11, 0);
    for (int i = 0; i < 200; ++i) {
        const UnitVector c = sample_uniform(rng, 3);
        UnitVector raw = sample_uniform(rng, 3);
        std::vector<double> t(raw.coords().begin(), raw.coords().end());
        axpy(-dot(c, raw), c.coords(), t);
        if (norm(t) < 1e-6) continue;
        const UnitVector u = normalize(std::move(t));
        const double dist = 0.1 + 2.9 * rng.next_double();
        CHECK(std::fabs(geodesic_distance(polar_coordinates(c, dist, u), c) - dist) < 1e-9);
    }
}

TEST_CASE("spherical centroid") {
    const auto e1 = UnitVector::axis(0, 2);
    const auto e2 = UnitVector::axis(1, 2);
    const UnitVector single = spherical_centroid(std::vector<UnitVector>{e1}, std::vector<double>{1.0});
    CHECK(geodesic_distance(single, e1) < 1e-14);

    const UnitVector mid =
        spherical_centroid(std::vector<UnitVector>{e1, e2}, std::vector<double>{1.0, 1.0});
    CHECK(mid[0] == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));
    CHECK(mid[1] == Catch::Approx(std::sqrt(0.5)).epsilon(1e-14));

    CHECK_THROWS_AS(spherical_centroid(std::vector<UnitVector>{e1, e1.negated()},
                                       std::vector<double>{1.0, 1.0}),
                    DegenerateMean);
}

TEST_CASE("rng streams are reproducible and schedule independent") {
    RngStream a(99, 7), b(99, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

    RngStream c(99, 8);
    int same = 0;
    RngStream a2(99, 7);
    for (int i = 0; i < 1000; ++i)
        if (a2.next_u64() == c.next_u64()) ++same;
    CHECK(same == 0);
}

TEST_CASE("uniform sampling statistics") {
    const std::size_t N = 1000000;
    const std::vector<double> cloud = uniform_cloud(20240, 0, 2, N, 2);

    SECTION("coordinate means vanish at the CLT scale") {
        double mean[3] = {0, 0, 0};
        for (std::size_t s = 0; s < N; ++s)
            for (int j = 0; j < 3; ++j) mean[j] += cloud[s * 3 + static_cast<std::size_t>(j)];
        const double sigma = (1.0 / std::sqrt(3.0)) / std::sqrt(static_cast<double>(N));
        for (int j = 0; j < 3; ++j) CHECK(std::fabs(mean[j] / static_cast<double>(N)) < 5 * sigma);
    }

    SECTION("hemisphere and cap fractions") {
        long upper = 0, cap = 0;
        const double c3 = std::cos(kPi / 3);
        for (std::size_t s = 0; s < N; ++s) {
            if (cloud[s * 3 + 2] > 0) ++upper;
            if (cloud[s * 3 + 2] > c3) ++cap;
        }
        const double f_up = static_cast<double>(upper) / static_cast<double>(N);
        const double s_up = std::sqrt(0.25 / static_cast<double>(N));
        CHECK(std::fabs(f_up - 0.5) < 3 * s_up);

        // cap of angular radius pi/3: (1 - cos(pi/3)) / 2 = 1/4
        const double f_cap = static_cast<double>(cap) / static_cast<double>(N);
        const double s_cap = std::sqrt(0.25 * 0.75 / static_cast<double>(N));
        CHECK(std::fabs(f_cap - 0.25) < 3 * s_cap);
    }

    SECTION("rotation invariance of cap masses") {
        // rotate z -> x and recount the same cap
        long cap_x = 0, cap_z = 0;
        const double c3 = std::cos(kPi / 3);
        for (std::size_t s = 0; s < N; ++s) {
            if (cloud[s * 3 + 0] > c3) ++cap_x;
            if (cloud[s * 3 + 2] > c3) ++cap_z;
        }
        const double sigma = std::sqrt(2.0 * 0.25 * 0.75 / static_cast<double>(N));
        CHECK(std::fabs(cap_x - cap_z) / static_cast<double>(N) < 4 * sigma);
    }
}

TEST_CASE("triangle inequality on sampled triples") {
    RngStream rng(5, 3);
    for (int i = 0; i < 2000; ++i) {
        const UnitVector a = sample_uniform(rng, 3);
        const UnitVector b = sample_uniform(rng, 3);
        const UnitVector c = sample_uniform(rng, 3);
        CHECK(geodesic_distance(a, b) + geodesic_distance(b, c) >=
              geodesic_distance(a, c) - 1e-9);
    }
}
