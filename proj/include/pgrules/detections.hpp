#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pgrules/errors.hpp"
#include "pgrules/geometry.hpp"

namespace pgrules {

// Class-name <-> label-index mapping. Label indices double as positions in
// every detection's logits vector.
struct Vocabulary {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> index;

    Vocabulary() = default;
    explicit Vocabulary(std::vector<std::string> class_names)
        : names(std::move(class_names)) {
        for (int i = 0; i < static_cast<int>(names.size()); ++i) {
            if (!index.emplace(names[i], i).second)
                throw ConfigError("duplicate class name in vocabulary: " + names[i]);
        }
    }

    int size() const { return static_cast<int>(names.size()); }

    bool contains(const std::string& name) const { return index.count(name) != 0; }

    // -1 when absent; callers decide whether that is an error.
    int id_of(const std::string& name) const {
        auto it = index.find(name);
        return it == index.end() ? -1 : it->second;
    }

    const std::string& name_of(int id) const {
        if (id < 0 || id >= size())
            throw UnknownClass("label index out of range: " + std::to_string(id));
        return names[static_cast<std::size_t>(id)];
    }

    // The six multi-environment vehicle classes used as the default.
    static Vocabulary mevd() {
        return Vocabulary({"bicycle", "motorcycle", "car", "bus", "truck", "boat"});
    }
};

struct Detection {
    Box box;
    int label = 0;
    double score = 0.0;
    std::vector<double> logits; // empty means "no logits attached"
    std::int64_t id = -1;       // provenance id, stable across pipeline stages
    int source_index = -1;      // position within the image's list in the input file

    bool has_logits() const { return !logits.empty(); }
};

// Per-image detections. Filtering preserves the relative order of survivors.
struct DetectionSet {
    std::string image_id;
    std::vector<Detection> detections;
};

} // namespace pgrules
