#include "pgrules/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace pgrules::testkit {

using nlohmann::json;

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

namespace {

// independent box arithmetic (not the production geometry routines)
bool cell_inside(double lo, double hi, double c) { return lo < c && c < hi; }

bool oracle_contained(const Box& in, const Box& out) {
    if (in.x1 < out.x1) return false;
    if (in.y1 < out.y1) return false;
    if (in.x2 > out.x2) return false;
    if (in.y2 > out.y2) return false;
    return true;
}

double oracle_overlap(const Box& bi, const Box& bj) {
    const double ix = std::max(0.0, std::min(bi.x2, bj.x2) - std::max(bi.x1, bj.x1));
    const double iy = std::max(0.0, std::min(bi.y2, bj.y2) - std::max(bi.y1, bj.y1));
    const double ai = (bi.x2 - bi.x1) * (bi.y2 - bi.y1);
    return ix * iy / ai;
}

double oracle_iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
    const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
    return inter / (area_a + area_b - inter);
}

} // namespace

std::set<std::size_t> oracle_redundancy(const DetectionSet& ds, double rf) {
    const auto& dets = ds.detections;
    const std::size_t n = dets.size();

    // phase 1: full pairwise condition matrix
    std::vector<std::vector<bool>> cond(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || dets[i].label != dets[j].label) continue;
            cond[i][j] = oracle_contained(dets[i].box, dets[j].box) ||
                         oracle_overlap(dets[i].box, dets[j].box) >= rf;
        }
    }

    // phase 2: flag, resolving mutual pairs toward the lower score / higher index
    std::vector<bool> flagged(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j || !cond[i][j]) continue;
            if (!cond[j][i]) {
                flagged[i] = true;
            } else {
                const bool j_wins = dets[j].score > dets[i].score ||
                                    (dets[j].score == dets[i].score && j < i);
                if (j_wins) flagged[i] = true;
            }
        }
    }

    std::set<std::size_t> survivors;
    for (std::size_t i = 0; i < n; ++i)
        if (!flagged[i]) survivors.insert(i);
    return survivors;
}

long raster_intersection_cells(const Box& a, const Box& b) {
    long cells = 0;
    const long x_lo = static_cast<long>(std::floor(std::max(a.x1, b.x1)));
    const long x_hi = static_cast<long>(std::ceil(std::min(a.x2, b.x2)));
    const long y_lo = static_cast<long>(std::floor(std::max(a.y1, b.y1)));
    const long y_hi = static_cast<long>(std::ceil(std::min(a.y2, b.y2)));
    for (long x = x_lo; x < x_hi; ++x) {
        for (long y = y_lo; y < y_hi; ++y) {
            const double cx = x + 0.5, cy = y + 0.5;
            if (cell_inside(a.x1, a.x2, cx) && cell_inside(a.y1, a.y2, cy) &&
                cell_inside(b.x1, b.x2, cx) && cell_inside(b.y1, b.y2, cy))
                ++cells;
        }
    }
    return cells;
}

double oracle_overlap_raster(const Box& a, const Box& b, int resolution) {
    const double step = 1.0 / resolution;
    long in_a = 0, in_both = 0;
    const long x_lo = static_cast<long>(std::floor(a.x1 * resolution));
    const long x_hi = static_cast<long>(std::ceil(a.x2 * resolution));
    const long y_lo = static_cast<long>(std::floor(a.y1 * resolution));
    const long y_hi = static_cast<long>(std::ceil(a.y2 * resolution));
    for (long x = x_lo; x < x_hi; ++x) {
        for (long y = y_lo; y < y_hi; ++y) {
            const double cx = (x + 0.5) * step, cy = (y + 0.5) * step;
            if (!cell_inside(a.x1, a.x2, cx) || !cell_inside(a.y1, a.y2, cy)) continue;
            ++in_a;
            if (cell_inside(b.x1, b.x2, cx) && cell_inside(b.y1, b.y2, cy)) ++in_both;
        }
    }
    return static_cast<double>(in_both) / static_cast<double>(in_a);
}

double oracle_ap(const std::vector<DetectionSet>& preds, const GroundTruthSet& gts) {
    std::set<int> classes;
    std::map<int, long> gt_count;
    for (const auto& [_, anns] : gts.images) {
        for (const auto& a : anns) {
            classes.insert(a.label);
            ++gt_count[a.label];
        }
    }
    if (classes.empty()) return 0.0;

    double ap_sum = 0.0;
    for (int cls : classes) {
        struct Pred {
            double score;
            std::size_t image;
            std::size_t index;
        };
        std::vector<Pred> ranked;
        for (std::size_t im = 0; im < preds.size(); ++im)
            for (std::size_t pi = 0; pi < preds[im].detections.size(); ++pi)
                if (preds[im].detections[pi].label == cls)
                    ranked.push_back({preds[im].detections[pi].score, im, pi});
        std::sort(ranked.begin(), ranked.end(), [](const Pred& a, const Pred& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.image != b.image) return a.image < b.image;
            return a.index < b.index;
        });

        // greedy matching, recomputed naively per prediction
        std::map<std::size_t, std::vector<bool>> gt_taken;
        std::vector<bool> tp(ranked.size(), false);
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            const auto& p = ranked[k];
            const auto& anns = gts.for_image(preds[p.image].image_id);
            auto& taken = gt_taken[p.image];
            taken.resize(anns.size(), false);
            double best = 0.0;
            std::size_t best_gi = anns.size();
            for (std::size_t gi = 0; gi < anns.size(); ++gi) {
                if (taken[gi] || anns[gi].label != cls) continue;
                const double v = oracle_iou(preds[p.image].detections[p.index].box, anns[gi].box);
                if (v >= 0.5 && v > best) {
                    best = v;
                    best_gi = gi;
                }
            }
            if (best_gi < anns.size()) {
                taken[best_gi] = true;
                tp[k] = true;
            }
        }

        std::vector<double> precision(ranked.size()), recall(ranked.size());
        long tps = 0;
        for (std::size_t k = 0; k < ranked.size(); ++k) {
            if (tp[k]) ++tps;
            precision[k] = static_cast<double>(tps) / static_cast<double>(k + 1);
            recall[k] = static_cast<double>(tps) / static_cast<double>(gt_count[cls]);
        }

        // 101 recall points, each sampled by rescanning the whole staircase
        double ap = 0.0;
        for (int i = 0; i <= 100; ++i) {
            const double r = static_cast<double>(i) / 100.0;
            double best = 0.0;
            for (std::size_t k = 0; k < ranked.size(); ++k)
                if (recall[k] >= r && precision[k] > best) best = precision[k];
            ap += best;
        }
        ap_sum += ap / 101.0;
    }
    return ap_sum / static_cast<double>(classes.size());
}

// ---------------------------------------------------------------------------
// scenario generation
// ---------------------------------------------------------------------------

namespace {

constexpr double kCell = 100.0; // placement grid pitch, one box per cell
constexpr int kCellsPerSide = 10;

struct SizeProfile {
    double w, h;
};

// strictly increasing areas: bicycle < motorcycle < car < truck < bus < boat,
// matching the bundled size-relation graph
const std::map<std::string, SizeProfile>& size_profiles() {
    static const std::map<std::string, SizeProfile> profiles = {
        {"bicycle", {18, 8}},  {"motorcycle", {22, 10}}, {"car", {36, 18}},
        {"truck", {56, 24}},   {"bus", {64, 28}},        {"boat", {72, 40}},
    };
    return profiles;
}

std::string image_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "img_%03d", i);
    return buf;
}

std::vector<double> make_logits(std::mt19937_64& rng, int vocab_size, int label, double score) {
    std::uniform_real_distribution<double> off(-4.0, -1.0);
    std::vector<double> logits(static_cast<std::size_t>(vocab_size));
    for (auto& v : logits) v = off(rng);
    logits[static_cast<std::size_t>(label)] = std::log(score / (1.0 - score));
    return logits;
}

} // namespace

Scenario gen_scenario(const ScenarioSpec& spec) {
    if (spec.image_count < 1 || spec.min_boxes_per_image < 1 ||
        spec.max_boxes_per_image < spec.min_boxes_per_image)
        throw ConfigError("invalid scenario spec");
    if (spec.max_boxes_per_image + spec.mislabeled_per_image > kCellsPerSide * kCellsPerSide)
        throw ConfigError("scenario spec exceeds placement grid capacity");

    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    Scenario s;
    s.vocabulary = Vocabulary::mevd();
    s.knowledge = parse_knowledge_graph(builtin_fixture("size-graph-v1"));
    const ShapeKnowledge shape_table = parse_shape_knowledge(builtin_fixture("shape-counts-v1"));

    const std::vector<int> land_labels = {
        s.vocabulary.id_of("bicycle"), s.vocabulary.id_of("motorcycle"),
        s.vocabulary.id_of("car"), s.vocabulary.id_of("bus"), s.vocabulary.id_of("truck")};
    const int boat = s.vocabulary.id_of("boat");

    const int water_images =
        static_cast<int>(std::llround(spec.water_image_fraction * spec.image_count));

    long planted_redundant = 0;
    long mislabeled_land = 0, mislabeled_water = 0; // by group of the predicted class
    long dup_fp_land = 0, dup_fp_water = 0;
    std::int64_t next_id = 0;

    for (int im = 0; im < spec.image_count; ++im) {
        const bool is_water = im < water_images;
        const std::string image_id = image_name(im);

        DetectionSet ds;
        ds.image_id = image_id;
        std::vector<GtAnnotation> gt;
        std::map<int, ShapeCounts> img_shapes;
        int source_index = 0;

        // one box per placement cell keeps unrelated boxes disjoint
        std::vector<int> cells(kCellsPerSide * kCellsPerSide);
        std::iota(cells.begin(), cells.end(), 0);
        std::shuffle(cells.begin(), cells.end(), rng);
        std::size_t next_cell = 0;

        auto place_box = [&](const std::string& class_name) {
            const SizeProfile p = size_profiles().at(class_name);
            std::uniform_real_distribution<double> stretch(0.9, 1.1);
            const double w = p.w * stretch(rng), h = p.h * stretch(rng);
            const int cell = cells[next_cell++];
            const double cx = (cell % kCellsPerSide) * kCell;
            const double cy = (cell / kCellsPerSide) * kCell;
            std::uniform_real_distribution<double> ox(1.0, kCell - 1.0 - w);
            std::uniform_real_distribution<double> oy(1.0, kCell - 1.0 - h);
            const double x1 = cx + ox(rng), y1 = cy + oy(rng);
            return Box(x1, y1, x1 + w, y1 + h);
        };

        auto emit_shape_counts = [&](int label, int idx, bool matching) {
            const std::string& name = s.vocabulary.name_of(label);
            auto row = shape_table.classes.find(name);
            if (row == shape_table.classes.end()) return; // no table row: bypasses the gate
            ShapeCounts counts;
            for (const auto& [shape, range] : row->second) {
                if (matching) {
                    std::uniform_int_distribution<int> in_range(range.lo, range.hi);
                    counts[shape] = in_range(rng);
                } else {
                    counts[shape] = range.lo;
                }
            }
            if (!matching) counts["triangle"] = row->second.at("triangle").hi + 2;
            img_shapes[idx] = counts;
        };

        const int gt_boxes = std::uniform_int_distribution<int>(
            spec.min_boxes_per_image, spec.max_boxes_per_image)(rng);
        for (int b = 0; b < gt_boxes; ++b) {
            const int label = is_water ? boat
                                       : land_labels[std::uniform_int_distribution<std::size_t>(
                                             0, land_labels.size() - 1)(rng)];
            const Box gt_box = place_box(s.vocabulary.name_of(label));
            gt.push_back({gt_box, label});

            // detector output: the ground-truth box with mild corner jitter
            std::uniform_real_distribution<double> jx(-0.05 * gt_box.width(),
                                                      0.05 * gt_box.width());
            std::uniform_real_distribution<double> jy(-0.05 * gt_box.height(),
                                                      0.05 * gt_box.height());
            const Box det_box(gt_box.x1 + jx(rng), gt_box.y1 + jy(rng), gt_box.x2 + jx(rng),
                              gt_box.y2 + jy(rng));
            Detection det;
            det.box = det_box;
            det.label = label;
            det.score = 0.75 + 0.23 * unit(rng);
            det.logits = make_logits(rng, s.vocabulary.size(), label, det.score);
            det.id = next_id++;
            det.source_index = source_index++;
            emit_shape_counts(label, det.source_index, /*matching=*/true);
            ds.detections.push_back(det);

            if (unit(rng) < spec.nesting_probability) {
                // contained duplicate: central half of the host box, lower score
                Detection dup;
                dup.box = Box(det_box.x1 + 0.25 * det_box.width(),
                              det_box.y1 + 0.25 * det_box.height(),
                              det_box.x2 - 0.25 * det_box.width(),
                              det_box.y2 - 0.25 * det_box.height());
                dup.label = label;
                dup.score = std::max(0.05, det.score - (0.15 + 0.15 * unit(rng)));
                dup.logits = make_logits(rng, s.vocabulary.size(), label, dup.score);
                dup.id = next_id++;
                dup.source_index = source_index++;
                emit_shape_counts(label, dup.source_index, /*matching=*/true);
                ds.detections.push_back(dup);
                ++planted_redundant;
                if (label == boat) ++dup_fp_water; else ++dup_fp_land;
            }
        }

        for (int f = 0; f < spec.mislabeled_per_image; ++f) {
            // context false positive: a class that contradicts the scene
            const int label = is_water
                                  ? land_labels[std::uniform_int_distribution<std::size_t>(
                                        0, land_labels.size() - 1)(rng)]
                                  : boat;
            Detection fp;
            fp.box = place_box(s.vocabulary.name_of(label));
            fp.label = label;
            fp.score = 0.55 + 0.25 * unit(rng);
            fp.logits = make_logits(rng, s.vocabulary.size(), label, fp.score);
            fp.id = next_id++;
            fp.source_index = source_index++;
            emit_shape_counts(label, fp.source_index, /*matching=*/false);
            ds.detections.push_back(fp);
            if (label == boat) ++mislabeled_water; else ++mislabeled_land;
        }

        // scene map with the dominant label covering exactly context_mix cells
        SceneLabelMap scene;
        scene.image_id = image_id;
        scene.legend = {{0, "water"}, {1, "land"}};
        const int cells_total = spec.scene_grid_rows * spec.scene_grid_cols;
        const int dominant = static_cast<int>(std::llround(spec.context_mix * cells_total));
        std::vector<int> flat(static_cast<std::size_t>(cells_total), is_water ? 1 : 0);
        std::fill(flat.begin(), flat.begin() + dominant, is_water ? 0 : 1);
        std::shuffle(flat.begin(), flat.end(), rng);
        scene.rows.resize(static_cast<std::size_t>(spec.scene_grid_rows));
        for (int r = 0; r < spec.scene_grid_rows; ++r)
            scene.rows[static_cast<std::size_t>(r)] = std::vector<int>(
                flat.begin() + r * spec.scene_grid_cols,
                flat.begin() + (r + 1) * spec.scene_grid_cols);

        s.detections.push_back(std::move(ds));
        s.ground_truth.images[image_id] = std::move(gt);
        s.scenes.push_back(std::move(scene));
        if (!img_shapes.empty()) s.shape_counts[image_id] = std::move(img_shapes);
    }

    // every planted extra box is an unmatched prediction, hence a false
    // positive of its predicted class's group; mislabeled boats carry no
    // shape-table row so the gate cannot remove them
    const long fp_base_land = dup_fp_land + mislabeled_land;
    const long fp_base_water = dup_fp_water + mislabeled_water;
    s.manifest = json{
        {"seed", spec.seed},
        {"image_count", spec.image_count},
        {"planted",
         {{"redundant_boxes", planted_redundant},
          {"mislabeled_fps", {{"Land", mislabeled_land}, {"Water", mislabeled_water}}}}},
        {"scene", {{"context_fraction", spec.context_mix}}},
        {"expected",
         {{"redundancy_removed", planted_redundant},
          {"fp_baseline",
           {{"Land", fp_base_land}, {"Water", fp_base_water}, {"total", fp_base_land + fp_base_water}}},
          {"fp_refined",
           {{"Land", 0}, {"Water", mislabeled_water}, {"total", mislabeled_water}}}}},
    };
    return s;
}

} // namespace pgrules::testkit
