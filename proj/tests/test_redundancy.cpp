#include <doctest.h>

#include <random>

#include "pgrules/redundancy.hpp"
#include "pgrules/testkit.hpp"
#include "test_util.hpp"

using namespace pgrules;

namespace {

Detection det(const Box& box, int label, double score) {
    Detection d;
    d.box = box;
    d.label = label;
    d.score = score;
    return d;
}

DetectionSet make_set(std::vector<Detection> dets) {
    DetectionSet ds;
    ds.image_id = "test";
    ds.detections = std::move(dets);
    return ds;
}

} // namespace

TEST_CASE("containment flags the nested same-class box only") {
    CHECK(find_contained_redundant(make_set({det(Box(2, 2, 4, 4), 0, 0.9)})).empty());

    const auto flags = find_contained_redundant(
        make_set({det(Box(2, 2, 4, 4), 0, 0.9), det(Box(0, 0, 10, 10), 0, 0.8)}));
    CHECK(flags == std::set<std::size_t>{0});

    // cross-class pairs are exempt
    CHECK(find_contained_redundant(
              make_set({det(Box(2, 2, 4, 4), 0, 0.9), det(Box(0, 0, 10, 10), 1, 0.8)}))
              .empty());
}

TEST_CASE("overlap redundancy at the RF threshold") {
    // small box fully overlaps its own area; at rf=0.6 the pair is mutual
    // (the big box's fraction is exactly 0.6), so the lower score loses
    const auto flags = find_overlap_redundant(
        make_set({det(Box(0, 0, 10, 6), 0, 0.8), det(Box(0, 0, 10, 10), 0, 0.9)}), 0.6);
    CHECK(flags == std::set<std::size_t>{0});

    // at rf=0.61 the big box's fraction (0.6) no longer qualifies; only the
    // contained small box is flagged, regardless of scores
    const auto one_way = find_overlap_redundant(
        make_set({det(Box(0, 0, 10, 10), 0, 0.1), det(Box(0, 0, 10, 6), 0, 0.9)}), 0.61);
    CHECK(one_way == std::set<std::size_t>{1});

    CHECK(find_overlap_redundant(
              make_set({det(Box(0, 0, 5, 5), 0, 0.9), det(Box(20, 20, 25, 25), 0, 0.8)}), 0.1)
              .empty());
}

TEST_CASE("zero-area box outside any container propagates ZeroAreaBox") {
    const auto ds = make_set({det(Box(20, 20, 20, 30), 0, 0.9), det(Box(0, 0, 10, 10), 0, 0.8)});
    CHECK_THROWS_AS(find_overlap_redundant(ds, 0.6), ZeroAreaBox);
}

TEST_CASE("apply_redundancy_filter") {
    CHECK(apply_redundancy_filter(make_set({}), 0.6).detections.empty());

    const auto filtered = apply_redundancy_filter(
        make_set({det(Box(2, 2, 4, 4), 0, 0.9), det(Box(0, 0, 10, 10), 0, 0.8)}), 0.6);
    REQUIRE(filtered.detections.size() == 1);
    CHECK(filtered.detections[0].box == Box(0, 0, 10, 10));

    // three identical boxes with equal scores: the first survives
    const auto identical = apply_redundancy_filter(
        make_set({det(Box(1, 1, 5, 5), 0, 0.5), det(Box(1, 1, 5, 5), 0, 0.5),
                  det(Box(1, 1, 5, 5), 0, 0.5)}),
        0.6);
    REQUIRE(identical.detections.size() == 1);
    CHECK(find_overlap_redundant(make_set({det(Box(1, 1, 5, 5), 0, 0.5),
                                           det(Box(1, 1, 5, 5), 0, 0.5),
                                           det(Box(1, 1, 5, 5), 0, 0.5)}),
                                 0.6) == std::set<std::size_t>{1, 2});
}

TEST_CASE("filter is idempotent and survivors are pairwise irredundant") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const DetectionSet ds = testutil::random_set(rng, 20);
        const double rf = 0.5 + 0.4 * (trial % 5) / 5.0;
        const DetectionSet once = apply_redundancy_filter(ds, rf);
        const DetectionSet twice = apply_redundancy_filter(once, rf);
        REQUIRE(once.detections.size() == twice.detections.size());

        for (std::size_t i = 0; i < once.detections.size(); ++i) {
            for (std::size_t j = 0; j < once.detections.size(); ++j) {
                if (i == j) continue;
                const auto& a = once.detections[i];
                const auto& b = once.detections[j];
                if (a.label != b.label) continue;
                CHECK_FALSE((is_contained(a.box, b.box) ||
                             overlap_fraction(a.box, b.box) >= rf));
            }
        }
    }
}

TEST_CASE("filter agrees with the brute-force oracle") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const DetectionSet ds = testutil::random_set(rng, 25);
        const double rf = 0.3 + 0.1 * (trial % 7);
        const auto flagged = find_overlap_redundant(ds, rf);
        std::set<std::size_t> survivors;
        for (std::size_t i = 0; i < ds.detections.size(); ++i)
            if (!flagged.count(i)) survivors.insert(i);
        CHECK(survivors == testkit::oracle_redundancy(ds, rf));
    }
}

TEST_CASE("raising rf keeps more boxes when all redundancies are one-way") {
    std::mt19937_64 rng(31);
    const double rf_lo = 0.5, rf_hi = 0.8;
    int tested = 0;
    for (int trial = 0; trial < 400 && tested < 100; ++trial) {
        const DetectionSet ds = testutil::random_set(rng, 15);

        // skip sets with a mutually redundant pair at the lower threshold
        bool mutual = false;
        for (std::size_t i = 0; i < ds.detections.size() && !mutual; ++i) {
            for (std::size_t j = i + 1; j < ds.detections.size() && !mutual; ++j) {
                const auto& a = ds.detections[i];
                const auto& b = ds.detections[j];
                if (a.label != b.label || area(a.box) == 0 || area(b.box) == 0) continue;
                const bool ab = is_contained(a.box, b.box) ||
                                overlap_fraction(a.box, b.box) >= rf_lo;
                const bool ba = is_contained(b.box, a.box) ||
                                overlap_fraction(b.box, a.box) >= rf_lo;
                mutual = ab && ba;
            }
        }
        if (mutual) continue;
        ++tested;

        const auto lo = find_overlap_redundant(ds, rf_lo);
        const auto hi = find_overlap_redundant(ds, rf_hi);
        for (std::size_t idx : hi) CHECK(lo.count(idx) == 1);
    }
    CHECK(tested >= 50);
}

TEST_CASE("mutual pairs can flip the survivor as rf rises") {
    // Documented consequence of the score tie-break: A's overlap fraction is
    // 0.9 and B's is 0.7, so at rf=0.6 the pair is mutual and low-scoring B
    // loses, while at rf=0.8 only A qualifies and is removed outright.
    const Box box_a(0, 0, 7, 1);       // area 7
    const Box box_b(0.7, 0, 9.7, 1);   // area 9, intersection 6.3
    const auto ds = make_set({det(box_a, 0, 0.9), det(box_b, 0, 0.2)});
    REQUIRE(overlap_fraction(box_a, box_b) == doctest::Approx(0.9));
    REQUIRE(overlap_fraction(box_b, box_a) == doctest::Approx(0.7));

    CHECK(find_overlap_redundant(ds, 0.6) == std::set<std::size_t>{1});
    CHECK(find_overlap_redundant(ds, 0.8) == std::set<std::size_t>{0});
}
