#include "pgrules/io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace pgrules {

using nlohmann::json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out.flush()) throw Error("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error("cannot move '" + tmp + "' to '" + path + "': " + ec.message());
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
    }
}

namespace {

Box box_from_record(const json& rec, const std::string& where) {
    const bool corners = rec.contains("box");
    const bool xywh = rec.contains("bbox");
    if (corners == xywh)
        throw SchemaError(where + ": need exactly one of 'box' (corners) or 'bbox' (x,y,w,h)");
    const json& arr = corners ? rec["box"] : rec["bbox"];
    if (!arr.is_array() || arr.size() != 4 || !arr[0].is_number())
        throw SchemaError(where + ": box must be an array of four numbers");
    const double a = arr[0], b = arr[1], c = arr[2], d = arr[3];
    return corners ? Box(a, b, c, d) : Box::from_xywh(a, b, c, d);
}

int label_from_record(const json& rec, const Vocabulary& vocab, const std::string& where) {
    if (!rec.contains("category") || !rec["category"].is_string())
        throw SchemaError(where + ": missing string field 'category'");
    const std::string name = rec["category"].get<std::string>();
    const int label = vocab.id_of(name);
    if (label < 0) throw UnknownClass(where + ": class '" + name + "' not in vocabulary");
    return label;
}

} // namespace

std::vector<DetectionSet> load_detections(const std::string& path, const Vocabulary& vocab) {
    const json doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("detections") || !doc["detections"].is_array())
        throw SchemaError("'" + path + "': expected top-level {\"detections\": [...]}");

    std::vector<DetectionSet> sets;
    std::map<std::string, std::size_t> set_index;
    std::map<std::string, int> next_source;
    std::set<std::int64_t> used_ids;
    std::int64_t next_id = 0;

    std::size_t record = 0;
    for (const auto& rec : doc["detections"]) {
        const std::string where = "detections[" + std::to_string(record++) + "]";
        if (!rec.is_object() || !rec.contains("image_id"))
            throw SchemaError(where + ": missing field 'image_id'");
        const std::string image_id = rec["image_id"].is_string()
                                         ? rec["image_id"].get<std::string>()
                                         : rec["image_id"].dump();

        Detection d;
        d.box = box_from_record(rec, where);
        d.label = label_from_record(rec, vocab, where);
        if (!rec.contains("score") || !rec["score"].is_number())
            throw SchemaError(where + ": missing numeric field 'score'");
        d.score = rec["score"].get<double>();
        if (d.score < 0.0 || d.score > 1.0)
            throw SchemaError(where + ": score outside [0,1]");
        if (rec.contains("logits")) {
            if (!rec["logits"].is_array() ||
                static_cast<int>(rec["logits"].size()) != vocab.size())
                throw SchemaError(where + ": logits must have one entry per class (" +
                                  std::to_string(vocab.size()) + ")");
            d.logits = rec["logits"].get<std::vector<double>>();
        }

        if (rec.contains("id")) {
            if (!rec["id"].is_number_integer())
                throw SchemaError(where + ": id must be an integer");
            d.id = rec["id"].get<std::int64_t>();
        } else {
            while (used_ids.count(next_id)) ++next_id;
            d.id = next_id++;
        }
        if (!used_ids.insert(d.id).second)
            throw SchemaError(where + ": duplicate detection id " + std::to_string(d.id));

        auto [it, fresh] = set_index.try_emplace(image_id, sets.size());
        if (fresh) sets.push_back(DetectionSet{image_id, {}});
        d.source_index = rec.contains("source_index") ? rec["source_index"].get<int>()
                                                      : next_source[image_id];
        next_source[image_id] =
            std::max(next_source[image_id], d.source_index + 1);
        sets[it->second].detections.push_back(std::move(d));
    }
    return sets;
}

json detections_to_json(const std::vector<DetectionSet>& sets, const Vocabulary& vocab) {
    json records = json::array();
    for (const auto& ds : sets) {
        for (const auto& d : ds.detections) {
            json rec = {{"id", d.id},
                        {"image_id", ds.image_id},
                        {"category", vocab.name_of(d.label)},
                        {"box", {d.box.x1, d.box.y1, d.box.x2, d.box.y2}},
                        {"score", d.score},
                        {"source_index", d.source_index}};
            if (d.has_logits()) rec["logits"] = d.logits;
            records.push_back(std::move(rec));
        }
    }
    return json{{"detections", records}};
}

void save_detections(const std::vector<DetectionSet>& sets, const Vocabulary& vocab,
                     const std::string& path) {
    write_text_file_atomic(path, detections_to_json(sets, vocab).dump(2) + "\n");
}

GroundTruthSet load_ground_truth(const std::string& path, const Vocabulary& vocab) {
    const json doc = parse_json_file(path);
    if (!doc.is_object() || !doc.contains("annotations") || !doc["annotations"].is_array())
        throw SchemaError("'" + path + "': expected top-level {\"annotations\": [...]}");

    GroundTruthSet gts;
    std::size_t record = 0;
    for (const auto& rec : doc["annotations"]) {
        const std::string where = "annotations[" + std::to_string(record++) + "]";
        if (!rec.is_object() || !rec.contains("image_id"))
            throw SchemaError(where + ": missing field 'image_id'");
        GtAnnotation ann;
        ann.box = box_from_record(rec, where);
        ann.label = label_from_record(rec, vocab, where);
        gts.images[rec["image_id"].get<std::string>()].push_back(ann);
    }
    return gts;
}

json ground_truth_to_json(const GroundTruthSet& gts, const Vocabulary& vocab) {
    json records = json::array();
    for (const auto& [image_id, anns] : gts.images) {
        for (const auto& a : anns) {
            records.push_back({{"image_id", image_id},
                               {"category", vocab.name_of(a.label)},
                               {"box", {a.box.x1, a.box.y1, a.box.x2, a.box.y2}}});
        }
    }
    return json{{"annotations", records}};
}

std::vector<SceneLabelMap> load_scene_maps(const std::string& path) {
    const json doc = parse_json_file(path);
    if (!doc.is_array()) throw SchemaError("'" + path + "': expected an array of scene maps");

    std::vector<SceneLabelMap> maps;
    for (const auto& rec : doc) {
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("legend") ||
            !rec.contains("grid"))
            throw SchemaError("scene map needs image_id, legend and grid");
        SceneLabelMap m;
        m.image_id = rec["image_id"].get<std::string>();
        for (const auto& [key, name] : rec["legend"].items()) {
            try {
                m.legend[std::stoi(key)] = name.get<std::string>();
            } catch (const std::exception&) {
                throw SchemaError("scene legend keys must be integer strings, got '" + key + "'");
            }
        }
        for (const auto& row : rec["grid"]) {
            std::vector<int> cells;
            for (const auto& cell : row) {
                const int id = cell.get<int>();
                if (!m.legend.count(id))
                    throw SchemaError("scene map '" + m.image_id + "' uses label " +
                                      std::to_string(id) + " missing from the legend");
                cells.push_back(id);
            }
            m.rows.push_back(std::move(cells));
        }
        maps.push_back(std::move(m));
    }
    return maps;
}

json scene_maps_to_json(const std::vector<SceneLabelMap>& maps) {
    json arr = json::array();
    for (const auto& m : maps) {
        json legend = json::object();
        for (const auto& [id, name] : m.legend) legend[std::to_string(id)] = name;
        arr.push_back({{"image_id", m.image_id}, {"legend", legend}, {"grid", m.rows}});
    }
    return arr;
}

ShapeCountsByImage load_shape_counts(const std::string& path) {
    const json doc = parse_json_file(path);
    if (!doc.is_array())
        throw SchemaError("'" + path + "': expected an array of per-image shape counts");

    ShapeCountsByImage by_image;
    for (const auto& rec : doc) {
        if (!rec.is_object() || !rec.contains("image_id") || !rec.contains("per_detection"))
            throw SchemaError("shape-count record needs image_id and per_detection");
        const std::string image_id = rec["image_id"].get<std::string>();
        auto& per_detection = by_image[image_id];
        for (const auto& entry : rec["per_detection"]) {
            if (!entry.contains("index") || !entry.contains("counts"))
                throw SchemaError("per_detection entries need index and counts");
            const int index = entry["index"].get<int>();
            if (per_detection.count(index))
                throw SchemaError("duplicate shape-count index " + std::to_string(index) +
                                  " for image '" + image_id + "'");
            ShapeCounts counts;
            for (const auto& [shape, v] : entry["counts"].items()) {
                if (!v.is_number_integer())
                    throw SchemaError("shape counts must be integers");
                counts[shape] = v.get<int>();
            }
            per_detection[index] = std::move(counts);
        }
    }
    return by_image;
}

json shape_counts_to_json(const ShapeCountsByImage& counts) {
    json arr = json::array();
    for (const auto& [image_id, per_detection] : counts) {
        json entries = json::array();
        for (const auto& [index, c] : per_detection)
            entries.push_back({{"index", index}, {"counts", c}});
        arr.push_back({{"image_id", image_id}, {"per_detection", entries}});
    }
    return arr;
}

} // namespace pgrules
