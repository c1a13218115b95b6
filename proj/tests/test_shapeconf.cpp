#include <doctest.h>

#include <cmath>
#include <random>

#include "pgrules/scoring.hpp"
#include "pgrules/shapeconf.hpp"

using namespace pgrules;

namespace {

const Vocabulary kVocab = Vocabulary::mevd();

std::map<std::string, CountRange> ranges(std::map<std::string, CountRange> r) { return r; }

} // namespace

TEST_CASE("relative_error_sum") {
    // every count inside its range: zero error
    CHECK(relative_error_sum({{"rectangle", 1}, {"trapezoid", 2}},
                             ranges({{"rectangle", {1, 1}}, {"trapezoid", {2, 2}}})) == 0.0);
    // one above a tight range
    CHECK(relative_error_sum({{"rectangle", 2}}, ranges({{"rectangle", {1, 1}}})) == 1.0);
    // zero-expected shapes go through the max(k,1) guard
    CHECK(relative_error_sum({{"triangle", 2}}, ranges({{"triangle", {0, 0}}})) == 4.0);
    // shapes absent from the expectation default to [0,0]
    CHECK(relative_error_sum({{"triangle", 2}}, ranges({})) == 4.0);
    // shapes absent from the counts default to 0
    CHECK(relative_error_sum({}, ranges({{"rectangle", {1, 2}}})) == 1.0);

    CHECK_THROWS_AS(relative_error_sum({{"blob", 1}}, ranges({})), SchemaError);
    CHECK_THROWS_AS(relative_error_sum({{"triangle", -1}}, ranges({})), NegativeCount);
}

TEST_CASE("shape_confidence traces the printed curve") {
    CHECK(shape_confidence({}, ranges({}), 1.0) == 0.5); // zero error, exactly
    CHECK(shape_confidence({{"rectangle", 2}}, ranges({{"rectangle", {1, 1}}}), 1.0) ==
          doctest::Approx(0.268941).epsilon(1e-6));

    // strictly decreasing in the error sum, bounded in (0, 0.5]
    double prev = 1.0;
    for (int i = 0; i <= 100; ++i) {
        const double err = 0.2 * i;
        const double e = std::exp(-err);
        const double c = e / (1.0 + e);
        CHECK(c > 0.0);
        CHECK(c <= 0.5);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("apply_shape_gate keeps matches and removes mismatches") {
    const ShapeKnowledge sk = parse_shape_knowledge(builtin_fixture("shape-counts-v1"));
    ShapeGateConfig cfg;
    cfg.boost_percent = 10.0;

    Detection bus;
    bus.box = Box(0, 0, 60, 30);
    bus.label = kVocab.id_of("bus");
    bus.logits = {-1, -1, -0.5, 1.2, -0.5, -2};
    bus.score = logistic(1.2);

    const ShapeCounts matching = {
        {"rectangle", 1}, {"square", 1}, {"trapezoid", 2}, {"triangle", 0}};
    const ShapeGateResult kept = apply_shape_gate(bus, matching, sk, cfg, kVocab);
    CHECK(kept.keep);
    CHECK(kept.confidence == 0.5);
    CHECK(kept.detection.logits[static_cast<std::size_t>(bus.label)] ==
          doctest::Approx(1.2 * 1.1));
    CHECK(kept.detection.score == logistic(kept.detection.logits[3]));

    const ShapeCounts mismatching = {
        {"rectangle", 3}, {"square", 0}, {"trapezoid", 0}, {"triangle", 2}};
    const ShapeGateResult removed = apply_shape_gate(bus, mismatching, sk, cfg, kVocab);
    CHECK_FALSE(removed.keep);
    CHECK(removed.confidence > 0.0);
    CHECK(removed.confidence < 0.5); // the numeric confidence is still reported

    Detection boat = bus;
    boat.label = kVocab.id_of("boat");
    CHECK_THROWS_AS(apply_shape_gate(boat, matching, sk, cfg, kVocab), UnknownClass);
}

TEST_CASE("gate match is equivalent to zero error") {
    const ShapeKnowledge sk = parse_shape_knowledge(builtin_fixture("shape-counts-v1"));
    ShapeGateConfig cfg;
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> count(0, 3);

    const std::vector<std::string> classes = {"bus", "truck", "car", "motorcycle", "bicycle"};
    for (int trial = 0; trial < 300; ++trial) {
        const std::string& cls = classes[static_cast<std::size_t>(trial) % classes.size()];
        ShapeCounts counts;
        for (const auto& shape : shape_vocabulary())
            if (count(rng) > 0) counts[shape] = count(rng);

        Detection d;
        d.box = Box(0, 0, 10, 10);
        d.label = kVocab.id_of(cls);
        d.score = 0.7;
        const double err = relative_error_sum(counts, sk.classes.at(cls));
        const ShapeGateResult r = apply_shape_gate(d, counts, sk, cfg, kVocab);
        CHECK(r.keep == (err == 0.0));
        if (!r.keep) CHECK(r.confidence < 0.5);
    }
}
