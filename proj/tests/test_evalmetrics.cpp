#include <doctest.h>

#include <random>

#include "pgrules/evalmetrics.hpp"
#include "pgrules/testkit.hpp"

using namespace pgrules;

namespace {

Detection pred(const Box& box, int label, double score, std::int64_t id) {
    Detection d;
    d.box = box;
    d.label = label;
    d.score = score;
    d.id = id;
    return d;
}

} // namespace

TEST_CASE("match_detections is greedy, score-ordered and class-aware") {
    DetectionSet ds;
    ds.image_id = "img";
    std::vector<GtAnnotation> gts = {{Box(0, 0, 10, 10), 0}};

    ds.detections = {pred(Box(0, 0, 10, 10), 0, 0.9, 0)};
    auto m = match_detections(ds, gts, 0.5);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pair_ious[0] == 1.0);

    // two predictions on one ground truth: the higher score wins
    ds.detections = {pred(Box(0, 0, 10, 9), 0, 0.5, 0), pred(Box(0, 0, 10, 10), 0, 0.9, 1)};
    m = match_detections(ds, gts, 0.5);
    REQUIRE(m.pairs.size() == 1);
    CHECK(m.pairs[0].first == 1);
    CHECK(m.unmatched_preds == std::vector<std::size_t>{0});

    // perfect overlap across classes does not match
    ds.detections = {pred(Box(0, 0, 10, 10), 1, 0.9, 0)};
    m = match_detections(ds, gts, 0.5);
    CHECK(m.pairs.empty());
    CHECK(m.unmatched_gts.size() == 1);
}

TEST_CASE("average_iou_at filters the pooled match set by t") {
    // three disjoint ground-truth boxes and predictions with IoU 0.8/0.6/0.4
    GroundTruthSet gts;
    gts.images["img"] = {{Box(0, 0, 10, 10), 0}, {Box(100, 0, 110, 10), 0},
                         {Box(200, 0, 210, 10), 0}};
    DetectionSet ds;
    ds.image_id = "img";
    ds.detections = {pred(Box(0, 0, 10, 8), 0, 0.9, 0), pred(Box(100, 0, 110, 6), 0, 0.8, 1),
                     pred(Box(200, 0, 210, 4), 0, 0.7, 2)};

    CHECK(average_iou_at({ds}, gts, 0.5) == doctest::Approx(0.7));
    CHECK(average_iou_at({ds}, gts, 0.9) == 0.0);

    DetectionSet exact;
    exact.image_id = "img";
    exact.detections = {pred(Box(0, 0, 10, 10), 0, 0.9, 0),
                        pred(Box(100, 0, 110, 10), 0, 0.8, 1),
                        pred(Box(200, 0, 210, 10), 0, 0.7, 2)};
    CHECK(average_iou_at({exact}, gts, 0.5) == 1.0);

    // non-decreasing in t over the same match set
    double prev = 0.0;
    for (double t : {0.1, 0.3, 0.5, 0.7}) {
        const double v = average_iou_at({ds}, gts, t);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("mean_average_precision basics and oracle agreement") {
    GroundTruthSet gts;
    gts.images["a"] = {{Box(0, 0, 10, 10), 0}, {Box(20, 20, 30, 30), 1}};
    gts.images["b"] = {{Box(0, 0, 10, 10), 0}};

    // all ground truths detected exactly, no extras
    std::vector<DetectionSet> perfect(2);
    perfect[0].image_id = "a";
    perfect[0].detections = {pred(Box(0, 0, 10, 10), 0, 0.9, 0),
                             pred(Box(20, 20, 30, 30), 1, 0.8, 1)};
    perfect[1].image_id = "b";
    perfect[1].detections = {pred(Box(0, 0, 10, 10), 0, 0.7, 2)};
    CHECK(mean_average_precision(perfect, gts) == doctest::Approx(1.0));

    std::vector<DetectionSet> nothing(1);
    nothing[0].image_id = "a";
    CHECK(mean_average_precision(nothing, gts) == 0.0);

    // one false positive outscoring a true detection
    std::vector<DetectionSet> with_fp = perfect;
    with_fp[1].detections.push_back(pred(Box(50, 50, 60, 60), 0, 0.95, 3));
    const double production = mean_average_precision(with_fp, gts);
    const double oracle = testkit::oracle_ap(with_fp, gts);
    CHECK(production == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(production < 1.0);
}

TEST_CASE("count_false_positives tallies unmatched predictions by group") {
    const Vocabulary vocab = Vocabulary::mevd();
    const std::map<std::string, std::vector<int>> groups = {
        {"Land", {0, 1, 2, 3, 4}}, {"Water", {5}}};

    GroundTruthSet gts;
    gts.images["img"] = {{Box(0, 0, 10, 10), 2}};
    DetectionSet ds;
    ds.image_id = "img";
    ds.detections = {pred(Box(0, 0, 10, 10), 2, 0.9, 0),   // matched car
                     pred(Box(50, 0, 60, 10), 5, 0.8, 1)}; // boat with no boat GT
    auto fp = count_false_positives({ds}, gts, groups, vocab);
    CHECK(fp.at("Water") == 1);
    CHECK(fp.at("Land") == 0);

    // constructed fixture: 5 land FPs, 2 water FPs
    DetectionSet many;
    many.image_id = "img";
    many.detections = {pred(Box(0, 0, 10, 10), 2, 0.9, 0)};
    for (int i = 0; i < 5; ++i)
        many.detections.push_back(pred(Box(100 + 20 * i, 0, 110 + 20 * i, 10), i % 5, 0.5, 10 + i));
    for (int i = 0; i < 2; ++i)
        many.detections.push_back(pred(Box(100 + 20 * i, 100, 110 + 20 * i, 110), 5, 0.5, 20 + i));
    fp = count_false_positives({many}, gts, groups, vocab);
    CHECK(fp.at("Land") == 5);
    CHECK(fp.at("Water") == 2);

    // matched + FP = total predictions
    long matched_total = 0;
    const auto m = match_detections(many, gts.for_image("img"), 0.5);
    matched_total += static_cast<long>(m.pairs.size());
    CHECK(matched_total + fp.at("Land") + fp.at("Water") ==
          static_cast<long>(many.detections.size()));

    // groups must partition the vocabulary
    CHECK_THROWS_AS(count_false_positives({ds}, gts, {{"Land", {0, 1, 2}}}, vocab), ConfigError);
    CHECK_THROWS_AS(count_false_positives(
                        {ds}, gts, {{"A", {0, 1, 2, 3, 4, 5}}, {"B", {5}}}, vocab),
                    ConfigError);
}

TEST_CASE("confidence_change_report pairs by provenance id") {
    DetectionSet before;
    before.image_id = "img";
    before.detections = {pred(Box(0, 0, 10, 10), 0, 0.5, 0), pred(Box(20, 0, 30, 10), 0, 0.6, 1),
                         pred(Box(40, 0, 50, 10), 0, 0.7, 2)};

    // identity
    auto changes = confidence_change_report({before}, {before});
    CHECK(changes.num_increased == 0);
    CHECK(changes.num_decreased == 0);

    // one boost and one removal
    DetectionSet after = before;
    after.detections[0].score = 0.9;
    after.detections.erase(after.detections.begin() + 1);
    changes = confidence_change_report({before}, {after});
    CHECK(changes.num_increased == 1);
    CHECK(changes.num_decreased == 1);
    CHECK(changes.pct_increased == doctest::Approx(100.0 / 3.0));

    // 3 boosts, 2 reductions, 1 removal -> (3, 3)
    DetectionSet base6;
    base6.image_id = "img";
    for (int i = 0; i < 6; ++i)
        base6.detections.push_back(pred(Box(20.0 * i, 0, 20.0 * i + 10, 10), 0, 0.5, i));
    DetectionSet mixed = base6;
    mixed.detections[0].score = 0.6;
    mixed.detections[1].score = 0.7;
    mixed.detections[2].score = 0.8;
    mixed.detections[3].score = 0.4;
    mixed.detections[4].score = 0.3;
    mixed.detections.erase(mixed.detections.begin() + 5);
    changes = confidence_change_report({base6}, {mixed});
    CHECK(changes.num_increased == 3);
    CHECK(changes.num_decreased == 3);

    // refined ids must come from the baseline
    DetectionSet alien = before;
    alien.detections[0].id = 99;
    CHECK_THROWS_AS(confidence_change_report({before}, {alien}), ProvenanceMismatch);
}

TEST_CASE("box_reduction_report computes (B-P)/B and cites published figures") {
    const BoxReduction r = box_reduction_report(598, 451);
    CHECK(r.reduction_percent == doctest::Approx(24.5819397993));
    REQUIRE(r.published_reference.has_value());
    CHECK(*r.published_reference == 37.88);

    const BoxReduction dvd = box_reduction_report(6192, 5548);
    CHECK(dvd.reduction_percent == doctest::Approx(10.4005167959));
    CHECK(*dvd.published_reference == 10.56);

    CHECK(box_reduction_report(100, 100).reduction_percent == 0.0);
    CHECK_FALSE(box_reduction_report(100, 100).published_reference.has_value());
    CHECK_THROWS_AS(box_reduction_report(100, 150), InvalidCounts);
    CHECK_THROWS_AS(box_reduction_report(0, 0), InvalidCounts);

    // invariant under duplicating both counts
    CHECK(box_reduction_report(299, 226).reduction_percent ==
          doctest::Approx(box_reduction_report(598, 452).reduction_percent));
}
