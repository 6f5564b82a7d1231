#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "arbor/rays.hpp"
#include "arbor/rng.hpp"

using namespace arbor;

namespace {

RayRelation random_partition(int m, int k, int classes, CounterRng& rng) {
    const auto total = stems_at_depth(m, k);
    std::vector<int> cls(static_cast<std::size_t>(total));
    for (auto& c : cls) c = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(classes));
    return open_relation(m, k, std::move(cls));
}

// Coarsen by merging two random classes.
RayRelation coarsen_once(const RayRelation& rel, CounterRng& rng) {
    if (rel.class_count < 2) return rel;
    const int a = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(rel.class_count));
    int b = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(rel.class_count));
    if (b == a) b = (a + 1) % rel.class_count;
    auto cls = rel.stem_class;
    for (auto& c : cls)
        if (c == b) c = a;
    return open_relation(rel.m, rel.depth, std::move(cls));
}

} // namespace

TEST_CASE("stem indexing") {
    CHECK(stems_at_depth(2, 1) == 3);
    CHECK(stems_at_depth(2, 2) == 6);
    CHECK(stems_at_depth(3, 2) == 12);

    CounterRng rng(kDefaultSeed, 3);
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 2 + static_cast<int>(rng.next_u64() % 3);
        const int k = 1 + static_cast<int>(rng.next_u64() % 4);
        const auto idx = static_cast<std::int64_t>(rng.next_u64() %
                                                   static_cast<std::uint64_t>(stems_at_depth(m, k)));
        const auto path = stem_path(m, k, idx);
        CHECK(stem_index(m, path) == idx);
    }
}

TEST_CASE("wired and free constructors") {
    const auto w = wired_relation(2);
    CHECK(w.class_count == 1);
    CHECK(w.depth == 1);
    CHECK(w.stem_class == std::vector<int>{0, 0, 0});

    const auto f = free_relation();
    CHECK(f.is_free());
    CHECK(f.stem_class.empty());

    // the root alone is the smallest cutset and generates the wired relation
    CHECK(cutset_relation({{}}, 2) == w);
}

TEST_CASE("cutset relations") {
    // all depth-1 vertices: one class per cone
    const auto depth1 = cutset_relation({{0}, {1}, {2}}, 2);
    CHECK(depth1.class_count == 3);
    CHECK(depth1.depth == 1);

    // child 0 of the root plus the grandchildren under children 1 and 2
    const auto mixed = cutset_relation({{0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}}, 2);
    CHECK(mixed.depth == 2);
    CHECK(mixed.class_count == 5);
    std::vector<int> sizes(5, 0);
    for (int c : mixed.stem_class) ++sizes[static_cast<std::size_t>(c)];
    CHECK(sizes == std::vector<int>{2, 1, 1, 1, 1});

    CHECK_THROWS_AS(cutset_relation({{0}, {0, 1}}, 2), std::invalid_argument); // comparable pair
    CHECK_THROWS_AS(cutset_relation({{0}, {1}}, 2), std::invalid_argument);    // misses a cone
    CHECK_THROWS_AS(cutset_relation({{}, {1}}, 2), std::invalid_argument);     // root plus more
}

TEST_CASE("partial order on relations") {
    const auto w = wired_relation(2);
    const auto f = free_relation();
    const auto depth1 = cutset_relation({{0}, {1}, {2}}, 2);

    CHECK(relation_leq(f, f));
    CHECK(relation_leq(f, w));
    CHECK(relation_leq(f, depth1));
    CHECK(relation_leq(depth1, w));
    CHECK(relation_leq(w, w));
    CHECK_FALSE(relation_leq(w, depth1));
    CHECK_FALSE(relation_leq(depth1, f));

    // incomparable pair on the four stems below one root child (depth 2)
    // stems 0..5; {01|23|45} vs {02|13|45} restricted to the first cone
    const auto a = open_relation(2, 2, {0, 0, 1, 1, 2, 2});
    const auto b = open_relation(2, 2, {0, 1, 0, 1, 2, 2});
    CHECK_FALSE(relation_leq(a, b));
    CHECK_FALSE(relation_leq(b, a));

    // refinement across depths: depth-1 cones vs their depth-2 split
    const auto split = open_relation(2, 2, {0, 0, 1, 1, 2, 3});
    CHECK(relation_leq(split, depth1));
    CHECK_FALSE(relation_leq(depth1, split));

    CHECK_THROWS_AS(relation_leq(wired_relation(2), wired_relation(3)), std::invalid_argument);
}

TEST_CASE("partial order properties on random partitions") {
    CounterRng rng(kDefaultSeed, 4);
    for (int trial = 0; trial < 60; ++trial) {
        const auto a = random_partition(2, 2, 3, rng);
        const auto b = coarsen_once(a, rng);
        const auto c = coarsen_once(b, rng);
        CHECK(relation_leq(a, a));            // reflexive
        CHECK(relation_leq(a, b));            // coarsening moves up
        CHECK(relation_leq(b, c));
        CHECK(relation_leq(a, c));            // transitive along the chain
        if (relation_leq(b, a)) CHECK(a == b); // antisymmetric on canonical forms
    }
}

TEST_CASE("boundary identification") {
    const auto w = wired_relation(2);
    for (int n : {1, 2, 3}) {
        const auto ident = boundary_identification(w, n, 2);
        for (int c : ident) CHECK(c == 0);
    }

    // free: injective identity map
    const auto f = boundary_identification(free_relation(), 2, 2);
    CHECK(static_cast<std::int64_t>(f.size()) == stems_at_depth(2, 2));
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == static_cast<int>(i));

    // relation depth equal to the box depth: classes reproduced exactly
    const auto rel = open_relation(2, 2, {0, 1, 0, 1, 2, 2});
    CHECK(boundary_identification(rel, 2, 2) == rel.stem_class);

    // vertices at depth n+1 identified iff their parents are (n >= k)
    const auto at2 = boundary_identification(rel, 2, 2);
    const auto at3 = boundary_identification(rel, 3, 2);
    for (std::int64_t u = 0; u < stems_at_depth(2, 3); ++u)
        for (std::int64_t v = 0; v < u; ++v)
            CHECK((at3[static_cast<std::size_t>(u)] == at3[static_cast<std::size_t>(v)]) ==
                  (at2[static_cast<std::size_t>(u / 2)] == at2[static_cast<std::size_t>(v / 2)]));

    CHECK_THROWS_AS(boundary_identification(rel, 1, 2), std::invalid_argument); // box shallower than k
}

TEST_CASE("box coarsening") {
    const auto w = wired_relation(2);
    CHECK(coarsen_to_box(w, 1) == w);
    CHECK(coarsen_to_box(w, 4) == w);

    const auto rel = open_relation(2, 2, {0, 1, 0, 1, 2, 2});
    CHECK(coarsen_to_box(rel, 2) == rel);
    CHECK(coarsen_to_box(rel, 3) == rel);

    // classes {00,10}, {01}, {11,20}, {21}: cones 0-1 share a class, 1-2 share
    // a class, so everything merges at depth 1
    const auto chained = open_relation(2, 2, {0, 1, 0, 2, 2, 3});
    const auto merged = coarsen_to_box(chained, 1);
    CHECK(merged.depth == 1);
    CHECK(merged.class_count == 1);

    // cone-aligned classes stay separate
    const auto aligned = open_relation(2, 2, {0, 0, 1, 1, 2, 2});
    const auto kept = coarsen_to_box(aligned, 1);
    CHECK(kept.class_count == 3);

    CHECK_THROWS_AS(coarsen_to_box(free_relation(), 1), std::invalid_argument);
}

TEST_CASE("json round trip") {
    CounterRng rng(kDefaultSeed, 5);
    const auto w = wired_relation(3);
    CHECK(relation_from_json(relation_to_json(w), 3) == w);
    CHECK(relation_from_json(relation_to_json(free_relation()), 2) == free_relation());
    for (int trial = 0; trial < 20; ++trial) {
        const auto rel = random_partition(2, 2, 3, rng);
        CHECK(relation_from_json(relation_to_json(rel), 2) == rel);
    }
    const auto cut = relation_from_json(nlohmann::json{{"kind", "cutset"},
                                                       {"vertices", {{0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}}}},
                                        2);
    CHECK(cut == cutset_relation({{0}, {1, 0}, {1, 1}, {2, 0}, {2, 1}}, 2));

    CHECK_THROWS_AS(relation_from_json(nlohmann::json{{"kind", "bogus"}}, 2), std::invalid_argument);
}
