#include <doctest.h>

#include <json.hpp>

#include "pgrules/cawal.hpp"
#include "pgrules/io.hpp"
#include "pgrules/scoring.hpp"

using namespace pgrules;

namespace {

SceneLabelMap scene(std::vector<std::vector<int>> rows) {
    SceneLabelMap m;
    m.image_id = "img";
    m.legend = {{0, "water"}, {1, "land"}};
    m.rows = std::move(rows);
    return m;
}

// a map with exactly `hits` water cells out of `total`
SceneLabelMap scene_with_fraction(int hits, int total) {
    std::vector<int> flat(static_cast<std::size_t>(total), 1);
    std::fill(flat.begin(), flat.begin() + hits, 0);
    return scene({flat});
}

Detection boat_detection(double own_logit) {
    Detection d;
    d.box = Box(0, 0, 10, 10);
    d.label = 5;
    d.logits = {-2.0, -1.5, -3.0, 0.5, -0.25, own_logit};
    d.score = logistic(own_logit);
    d.id = 1;
    return d;
}

ContextBinding water_boosts_boats() {
    ContextBinding b;
    b.context_labels = {"water"};
    b.boosted_classes = {5};
    b.adjust_percent = 10.0;
    b.threshold = 0.30;
    return b;
}

std::string dump(const DetectionSet& ds) {
    const Vocabulary vocab = Vocabulary::mevd();
    return detections_to_json({ds}, vocab).dump();
}

} // namespace

TEST_CASE("context_fraction counts context labels over all lists") {
    CHECK(context_fraction(scene({{0, 0, 1}, {0, 1, 1}}), {"water"}) == doctest::Approx(0.5));
    CHECK(context_fraction(scene({{1, 1}, {1}}), {"water"}) == 0.0);
    CHECK(context_fraction(scene({{0, 0, 0}}), {"water"}) == 1.0);
    CHECK_THROWS_AS(context_fraction(scene({}), {"water"}), EmptySceneMap);
    CHECK_THROWS_AS(context_fraction(scene({{}, {}}), {"water"}), EmptySceneMap);
}

TEST_CASE("apply_cawal boosts whole logit rows above the threshold") {
    DetectionSet ds;
    ds.image_id = "img";
    ds.detections = {boat_detection(1.0)};

    // fraction 0.4 > 0.30: every logit of the boat row scales by 1.1
    const auto boosted = apply_cawal(ds, scene_with_fraction(40, 100), water_boosts_boats());
    const auto& logits = boosted.detections[0].logits;
    const auto& before = ds.detections[0].logits;
    for (std::size_t i = 0; i < logits.size(); ++i)
        CHECK(logits[i] == before[i] * 1.1);
    CHECK(boosted.detections[0].score == logistic(1.0 * 1.1));
    CHECK(boosted.detections[0].score > ds.detections[0].score);
}

TEST_CASE("threshold comparison is strictly greater-than") {
    DetectionSet ds;
    ds.image_id = "img";
    ds.detections = {boat_detection(1.0)};

    const auto at_threshold = apply_cawal(ds, scene_with_fraction(30, 100), water_boosts_boats());
    CHECK(dump(at_threshold) == dump(ds)); // byte-identical

    const auto above = apply_cawal(ds, scene_with_fraction(31, 100), water_boosts_boats());
    CHECK(dump(above) != dump(ds));
}

TEST_CASE("bindings require at least one boosted class") {
    ContextBinding empty;
    empty.context_labels = {"water"};
    CHECK_THROWS_AS(empty.validate(), ConfigError);

    ContextBinding bad_threshold = water_boosts_boats();
    bad_threshold.threshold = 1.5;
    CHECK_THROWS_AS(bad_threshold.validate(), ConfigError);
}

TEST_CASE("detections without logits get the factor applied to the score") {
    DetectionSet ds;
    ds.image_id = "img";
    Detection d;
    d.box = Box(0, 0, 5, 5);
    d.label = 5;
    d.score = 0.95;
    ds.detections = {d};

    const auto out = apply_cawal(ds, scene_with_fraction(50, 100), water_boosts_boats());
    CHECK(out.detections[0].score == doctest::Approx(1.0)); // 0.95 * 1.1 clamps to 1
}

TEST_CASE("a label with no logit entry is a fault") {
    DetectionSet ds;
    ds.image_id = "img";
    Detection d;
    d.box = Box(0, 0, 5, 5);
    d.label = 5;
    d.logits = {0.1, 0.2}; // shorter than the label index
    d.score = 0.5;
    ds.detections = {d};
    CHECK_THROWS_AS(apply_cawal(ds, scene_with_fraction(50, 100), water_boosts_boats()),
                    MissingLogits);
}

TEST_CASE("attenuation is off unless enabled") {
    DetectionSet ds;
    ds.image_id = "img";
    Detection car = boat_detection(2.0);
    car.label = 2;
    car.score = logistic(car.logits[2]);
    ds.detections = {car};

    ContextBinding binding = water_boosts_boats();
    binding.attenuated_classes = {2};
    const auto untouched = apply_cawal(ds, scene_with_fraction(50, 100), binding);
    CHECK(dump(untouched) == dump(ds));

    binding.attenuate = true;
    const auto attenuated = apply_cawal(ds, scene_with_fraction(50, 100), binding);
    for (std::size_t i = 0; i < car.logits.size(); ++i)
        CHECK(attenuated.detections[0].logits[i] == car.logits[i] * 0.9);
}

TEST_CASE("scaling preserves sign pattern and non-boosted detections") {
    DetectionSet ds;
    ds.image_id = "img";
    Detection boat = boat_detection(0.75);
    Detection car = boat_detection(1.5);
    car.label = 2;
    car.id = 2;
    car.score = logistic(car.logits[2]);
    ds.detections = {boat, car};

    const auto out = apply_cawal(ds, scene_with_fraction(45, 100), water_boosts_boats());
    for (std::size_t i = 0; i < out.detections[0].logits.size(); ++i) {
        const double before = ds.detections[0].logits[i];
        const double after = out.detections[0].logits[i];
        CHECK((before >= 0) == (after >= 0));
        if (before > 0) CHECK(after > before);
    }
    CHECK(dump(DetectionSet{"img", {out.detections[1]}}) ==
          dump(DetectionSet{"img", {ds.detections[1]}}));

    // determinism
    const auto again = apply_cawal(ds, scene_with_fraction(45, 100), water_boosts_boats());
    CHECK(dump(again) == dump(out));
}
