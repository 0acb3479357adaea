#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "waist/partition.hpp"
#include "waist/suites.hpp"

using namespace waist;

namespace {

OrientedPartition axes_partition() {
    return OrientedPartition(2, {UnitVector::axis(2, 2), UnitVector::axis(0, 2),
                                 UnitVector::axis(1, 2)});
}

}  // namespace

TEST_CASE("cell_of descends by signed dot products") {
    const OrientedPartition p1(1, {UnitVector::axis(2, 2)});
    CHECK(cell_of(normalize({0.0, 0.0, 1.0}), p1) == 0);
    CHECK(cell_of(normalize({0.0, 0.0, -1.0}), p1) == 1);

    const OrientedPartition p2 = axes_partition();
    CHECK(cell_of(normalize({1.0, 0.0, 0.5}), p2) == 0);  // both dots positive

    CHECK_THROWS_AS(cell_of(UnitVector::axis(0, 2), p1), OnBoundary);
}

TEST_CASE("cell constraints follow the root-to-leaf path") {
    const OrientedPartition p1(1, {UnitVector::axis(2, 2)});
    const ConvexCell left = cell_constraints(p1, 0);
    REQUIRE(left.constraints.size() == 1);
    CHECK(left.constraints[0].first == UnitVector::axis(2, 2));
    CHECK(left.constraints[0].second == +1);

    const OrientedPartition p2 = axes_partition();
    const ConvexCell lr = cell_constraints(p2, 1);  // (left, right)
    REQUIRE(lr.constraints.size() == 2);
    CHECK(lr.constraints[0].first == UnitVector::axis(2, 2));
    CHECK(lr.constraints[0].second == +1);
    CHECK(lr.constraints[1].first == UnitVector::axis(0, 2));
    CHECK(lr.constraints[1].second == -1);

    const ConvexCell rl = cell_constraints(p2, 2);  // (right, left)
    CHECK(rl.constraints[0].second == -1);
    CHECK(rl.constraints[1].first == UnitVector::axis(1, 2));
    CHECK(rl.constraints[1].second == +1);
}

TEST_CASE("cell volumes by Monte Carlo") {
    RngStream rng(31, 0);
    const OrientedPartition p1(1, {UnitVector::axis(2, 2)});
    const auto [hemi, s1] = cell_volume_mc(cell_constraints(p1, 0), 200000, rng);
    CHECK(std::fabs(hemi - 0.5) < 3 * s1);

    const auto [quarter, s2] = cell_volume_mc(cell_constraints(axes_partition(), 0), 200000, rng);
    CHECK(std::fabs(quarter - 0.25) < 3 * s2);

    ConvexCell empty;
    empty.constraints = {{UnitVector::axis(2, 2), +1}, {UnitVector::axis(2, 2), -1}};
    const auto [zero, s3] = cell_volume_mc(empty, 10000, rng);
    CHECK(zero == 0.0);
    CHECK(s3 == 0.0);
}

TEST_CASE("automorphism action on depth-2 partitions") {
    RngStream rng(77, 0);
    const UnitVector x = sample_uniform(rng, 2), y = sample_uniform(rng, 2),
                     z = sample_uniform(rng, 2);
    const OrientedPartition p(2, {x, y, z});

    const OrientedPartition root_swap =
        apply_automorphism(TreeAutomorphism::from_mask(2, 0b001), p);
    CHECK(root_swap == OrientedPartition(2, {x.negated(), z, y}));

    const OrientedPartition left_swap =
        apply_automorphism(TreeAutomorphism::from_mask(2, 0b010), p);
    CHECK(left_swap == OrientedPartition(2, {x, y.negated(), z}));

    CHECK(apply_automorphism(TreeAutomorphism::identity(2), p) == p);
}

TEST_CASE("orbits") {
    RngStream rng(78, 0);
    const UnitVector v = sample_uniform(rng, 2);
    const OrientedPartition p1(1, {v});
    const auto orb1 = orbit(p1);
    REQUIRE(orb1.size() == 2);
    CHECK(((orb1[0] == p1 && orb1[1] == OrientedPartition(1, {v.negated()})) ||
           (orb1[1] == p1 && orb1[0] == OrientedPartition(1, {v.negated()}))));

    const OrientedPartition p3 = random_partition(rng, 3, 2);
    std::set<std::vector<double>> distinct;
    for (const auto& q : orbit(p3)) distinct.insert(q.flat());
    CHECK(distinct.size() == 128);

    std::vector<UnitVector> many;
    for (int m = 0; m < 31; ++m) many.push_back(sample_uniform(rng, 2));
    CHECK_THROWS_AS(orbit(OrientedPartition(5, many)), DepthTooLarge);
}

TEST_CASE("canonical form") {
    RngStream rng(79, 0);
    for (int i = 0; i < 30; ++i) {
        const int depth = 1 + static_cast<int>(rng.next_double() * 2.0);
        const OrientedPartition p = random_partition(rng, depth, 2);
        const OrientedPartition canon = canonical_form(p);
        const std::uint64_t mask = rng.next_u64() & ((1ull << ((1 << depth) - 1)) - 1);
        CHECK(canonical_form(apply_automorphism(TreeAutomorphism::from_mask(depth, mask), p)) ==
              canon);
        CHECK(canonical_form(canon) == canon);
        // canonical form is never lexicographically larger than the input
        CHECK(!detail::flat_less(p.flat(), canon.flat()));
    }
}

TEST_CASE("node aggregates") {
    const OrientedPartition p(1, {UnitVector::axis(2, 2)});
    MapFn f = [](const UnitVector& x) { return std::vector<double>{x[2]}; };
    const std::vector<double> volumes = {0.5, 0.5};
    const std::vector<std::optional<UnitVector>> centers = {UnitVector::axis(2, 2),
                                                            UnitVector::axis(2, 2).negated()};
    const NodeAggregates agg = node_aggregates(p, f, 1, volumes, centers);
    CHECK(agg.v_pos[1] == 0.5);
    CHECK(agg.v_neg[1] == 0.5);
    CHECK(agg.phi_pos[1][0] == Catch::Approx(0.5));
    CHECK(agg.phi_neg[1][0] == Catch::Approx(-0.5));
    // root volume aggregates recover the whole sphere
    CHECK(agg.v_pos[1] + agg.v_neg[1] == Catch::Approx(1.0));
}

TEST_CASE("constant maps reduce aggregates to volumes") {
    RngStream rng(80, 0);
    const OrientedPartition p = random_partition(rng, 2, 2);
    MapFn constant = [](const UnitVector&) { return std::vector<double>{2.5}; };
    const std::vector<double> cloud = uniform_cloud(81, 0, 2, 20000);
    const CellStats st = classify_cloud(p, cloud);
    std::vector<double> volumes;
    std::vector<std::optional<UnitVector>> centers;
    for (int leaf = 0; leaf < p.leaf_count(); ++leaf) {
        volumes.push_back(st.volume(leaf));
        centers.push_back(st.center(leaf));
    }
    const NodeAggregates agg = node_aggregates(p, constant, 1, volumes, centers);
    for (int m = 1; m <= p.node_count(); ++m) {
        CHECK(agg.phi_pos[static_cast<std::size_t>(m)][0] ==
              Catch::Approx(2.5 * agg.v_pos[static_cast<std::size_t>(m)]).margin(1e-12));
        CHECK(agg.phi_neg[static_cast<std::size_t>(m)][0] ==
              Catch::Approx(2.5 * agg.v_neg[static_cast<std::size_t>(m)]).margin(1e-12));
    }
}

TEST_CASE("group law and free action") {
    const SuiteResult suite = run_partition_suite(4242);
    for (const auto& r : suite.records) {
        INFO(r.check);
        CHECK(r.pass);
    }
}

TEST_CASE("serialization round-trips bit-exactly") {
    RngStream rng(82, 0);
    for (int i = 0; i < 20; ++i) {
        const OrientedPartition p = random_partition(rng, 1 + i % 4, 3);
        const std::string text = to_text(p);
        CHECK(parse_partition(text) == p);
        CHECK(to_text(parse_partition(text)) == text);
    }
    CHECK_THROWS_AS(parse_partition("bogus"), OutOfDomain);
}
