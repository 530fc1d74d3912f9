#pragma once

// Domain types shared between the synthesizer, the frame store and the
// explainability metrics.

#include <optional>
#include <string>
#include <utility>

#include "gla/common.hpp"

namespace gla {

enum class Label { empty = 0, person = 1 };

inline std::string to_string(Label l) { return l == Label::person ? "person" : "empty"; }

inline Label label_from_string(const std::string& s) {
    if (s == "person") return Label::person;
    if (s == "empty") return Label::empty;
    throw ValidationError("unknown label: '" + s + "'");
}

// Where the person blob actually is, in (range_bin, angle_bin) coordinates.
// Centers are continuous (sub-bin) since the generators know exact positions.
struct GroundTruth {
    Label label = Label::empty;
    std::optional<std::pair<double, double>> blob_center;  // (range_bin, angle_bin)
    double blob_radius_bins = 0.0;

    void validate(int range_bins, int angle_bins) const {
        if ((label == Label::person) != blob_center.has_value())
            throw ValidationError("ground truth: blob_center present iff label=person");
        if (blob_center) {
            auto [r, a] = *blob_center;
            if (r < 0 || r > range_bins - 1 || a < 0 || a > angle_bins - 1)
                throw ValidationError("ground truth: blob_center outside frame bounds");
            if (!(blob_radius_bins > 0)) throw ValidationError("ground truth: blob radius must be positive");
        }
    }
};

}  // namespace gla
