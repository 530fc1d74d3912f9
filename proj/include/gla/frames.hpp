#pragma once

// RA frame data model and persistence: per-frame [0,1] normalization,
// colormap expansion, bilinear resizing, the raw float32 + JSON sidecar
// format, and dataset manifests.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gla/common.hpp"
#include "gla/detail/png.hpp"
#include "gla/tensor.hpp"
#include "gla/types.hpp"

namespace gla::frames {

constexpr int kSidecarSchemaVersion = 1;
constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kNormalizationId = "minmax_unit-v1";
inline constexpr const char* kColormapId = "gla-thermal-v1";
inline constexpr const char* kCamColormapId = "gla-heat-v1";

struct RAFrame {
    Tensor<float> pixels;  // (C, H, W); [0,1] once normalized
    std::optional<Label> label;
    std::string source_id;

    // provenance
    std::optional<GroundTruth> gt;
    uint64_t seed = 0;
    std::string mode = "external";
    std::string params_digest;
    std::string normalization = "none";

    int channels() const { return pixels.shape.empty() ? 0 : pixels.shape[0]; }
    int height() const { return pixels.shape.size() == 3 ? pixels.shape[1] : 0; }
    int width() const { return pixels.shape.size() == 3 ? pixels.shape[2] : 0; }
};

// ---------------------------------------------------------------------------
// normalize_frame: per-frame (instance-wise) affine min-max map to [0,1].
// Constant frames map to 0.5 so downstream BCE stays finite.
// ---------------------------------------------------------------------------
template <typename S>
Tensor<S> normalize_frame(const Tensor<S>& raw) {
    if (raw.empty()) throw ValidationError("normalize_frame: empty input");
    for (S x : raw.v)
        if (!std::isfinite(static_cast<double>(x)))
            throw ValidationError("normalize_frame: non-finite value in input");
    S lo = raw.min(), hi = raw.max();
    Tensor<S> out = raw;
    if (lo == hi) {
        out.fill(S(0.5));
        return out;
    }
    S span = hi - lo;
    for (S& x : out.v) x = (x - lo) / span;
    return out;
}

// ---------------------------------------------------------------------------
// Colormaps. The shipped LUTs are generated from a few control points with
// strictly increasing Rec.709 luminance; entries are stored as float RGB in
// [0,1] and looked up with piecewise-linear interpolation.
// ---------------------------------------------------------------------------

using Rgb = std::array<double, 3>;

inline double luminance(const Rgb& c) { return 0.2126 * c[0] + 0.7152 * c[1] + 0.0722 * c[2]; }

namespace detail {
inline std::array<Rgb, 256> build_lut(const std::vector<std::pair<double, Rgb>>& stops) {
    std::array<Rgb, 256> lut{};
    for (int i = 0; i < 256; ++i) {
        double g = i / 255.0;
        size_t k = 0;
        while (k + 2 < stops.size() && g > stops[k + 1].first) ++k;
        double g0 = stops[k].first, g1 = stops[k + 1].first;
        double t = g1 > g0 ? (g - g0) / (g1 - g0) : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        for (int ch = 0; ch < 3; ++ch)
            lut[i][ch] = stops[k].second[ch] + t * (stops[k + 1].second[ch] - stops[k].second[ch]);
    }
    return lut;
}
}  // namespace detail

inline const std::array<Rgb, 256>& thermal_lut() {
    static const std::array<Rgb, 256> lut = detail::build_lut({
        {0.00, {0.00, 0.00, 0.02}},
        {0.15, {0.09, 0.02, 0.32}},
        {0.35, {0.45, 0.05, 0.50}},
        {0.55, {0.80, 0.25, 0.30}},
        {0.72, {0.95, 0.55, 0.10}},
        {0.88, {0.99, 0.82, 0.20}},
        {1.00, {1.00, 1.00, 0.85}},
    });
    return lut;
}

inline const std::array<Rgb, 256>& heat_lut() {
    static const std::array<Rgb, 256> lut = detail::build_lut({
        {0.00, {0.00, 0.00, 0.00}},
        {0.35, {0.55, 0.00, 0.00}},
        {0.65, {1.00, 0.45, 0.00}},
        {0.85, {1.00, 0.85, 0.10}},
        {1.00, {1.00, 1.00, 1.00}},
    });
    return lut;
}

// Interpolated lookup; g must be in [0,1]. g=0 hits entry 0, g=1 entry 255.
inline Rgb lut_lookup(const std::array<Rgb, 256>& lut, double g) {
    double x = g * 255.0;
    int i = static_cast<int>(x);
    if (i >= 255) return lut[255];
    if (i < 0) return lut[0];
    double t = x - i;
    Rgb out;
    for (int ch = 0; ch < 3; ++ch) out[ch] = lut[i][ch] + t * (lut[i + 1][ch] - lut[i][ch]);
    return out;
}

enum class ColormapMode { replicate, lut };

inline ColormapMode colormap_mode_from_string(const std::string& s) {
    if (s == "replicate") return ColormapMode::replicate;
    if (s == "lut") return ColormapMode::lut;
    throw ValidationError("unknown colormap mode: '" + s + "'");
}

inline std::string to_string(ColormapMode m) {
    return m == ColormapMode::replicate ? "replicate" : "lut";
}

// (1,H,W) grayscale in [0,1] -> (3,H,W).
template <typename S>
Tensor<S> apply_colormap(const Tensor<S>& gray, ColormapMode mode = ColormapMode::lut) {
    if (gray.shape.size() != 3 || gray.shape[0] != 1)
        throw StructuralError("apply_colormap: expected (1,H,W) input");
    const int h = gray.shape[1], w = gray.shape[2];
    Tensor<S> out({3, h, w});
    if (mode == ColormapMode::replicate) {
        for (int c = 0; c < 3; ++c)
            std::copy(gray.v.begin(), gray.v.end(), out.v.begin() + static_cast<size_t>(c) * h * w);
        return out;
    }
    const auto& lut = thermal_lut();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            Rgb c = lut_lookup(lut, static_cast<double>(gray.at(0, y, x)));
            out.at(0, y, x) = static_cast<S>(c[0]);
            out.at(1, y, x) = static_cast<S>(c[1]);
            out.at(2, y, x) = static_cast<S>(c[2]);
        }
    return out;
}

// ---------------------------------------------------------------------------
// resize_frame: bilinear, identity at equal size.
// ---------------------------------------------------------------------------
template <typename S>
Tensor<S> resize_frame(const Tensor<S>& frame, int target_h, int target_w) {
    if (target_h < 8 || target_w < 8) throw ValidationError("resize_frame: target must be >= 8x8");
    return bilinear_resize(frame, target_h, target_w);
}

// ---------------------------------------------------------------------------
// Persistence: <stem>.raf (little-endian float32, C order) + <stem>.json
// sidecar + <stem>.png preview.
// ---------------------------------------------------------------------------

namespace detail {
inline nlohmann::json require_field(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) throw IoError(std::string("frame sidecar: missing field '") + field + "'");
    return j.at(field);
}
}  // namespace detail

inline void write_preview_png(const std::filesystem::path& path, const Tensor<float>& gray) {
    const int h = gray.shape[1], w = gray.shape[2];
    std::vector<unsigned char> px(static_cast<size_t>(h) * w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float v = std::clamp(gray.at(0, y, x), 0.0f, 1.0f);
            px[static_cast<size_t>(y) * w + x] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
    gla::detail::png_write(path, w, h, 1, px);
}

inline void save_frame(const std::filesystem::path& stem, const RAFrame& frame) {
    namespace fs = std::filesystem;
    if (frame.pixels.shape.size() != 3) throw StructuralError("save_frame: expected CHW pixels");
    if (frame.label && *frame.label == Label::person && !(frame.gt && frame.gt->blob_center))
        throw ValidationError("save_frame: person frame requires a ground-truth blob center");

    fs::path raw_path = stem;
    raw_path += ".raf";
    std::ofstream raw(raw_path, std::ios::binary);
    if (!raw) throw IoError("save_frame: cannot open " + raw_path.string());
    raw.write(reinterpret_cast<const char*>(frame.pixels.v.data()),
              static_cast<std::streamsize>(frame.pixels.v.size() * sizeof(float)));
    if (!raw) throw IoError("save_frame: short write " + raw_path.string());
    raw.close();

    nlohmann::json side;
    side["schema_version"] = kSidecarSchemaVersion;
    side["shape"] = frame.pixels.shape;
    side["dtype"] = "f32";
    side["label"] = frame.label ? nlohmann::json(to_string(*frame.label)) : nlohmann::json(nullptr);
    if (frame.gt && frame.gt->blob_center) {
        side["blob_center"] = {frame.gt->blob_center->first, frame.gt->blob_center->second};
        side["blob_radius_bins"] = frame.gt->blob_radius_bins;
    } else {
        side["blob_center"] = nullptr;
        side["blob_radius_bins"] = nullptr;
    }
    side["seed"] = frame.seed;
    side["mode"] = frame.mode;
    side["params_digest"] = frame.params_digest.empty() ? nlohmann::json(nullptr)
                                                        : nlohmann::json(frame.params_digest);
    side["normalization"] = frame.normalization;
    side["source_id"] = frame.source_id;

    fs::path json_path = stem;
    json_path += ".json";
    std::ofstream js(json_path);
    if (!js) throw IoError("save_frame: cannot open " + json_path.string());
    js << side.dump(2) << "\n";

    if (frame.channels() == 1) {
        fs::path png_path = stem;
        png_path += ".png";
        write_preview_png(png_path, frame.pixels);
    }
}

inline RAFrame load_frame(const std::filesystem::path& stem) {
    namespace fs = std::filesystem;
    fs::path raw_path = stem, json_path = stem;
    raw_path += ".raf";
    json_path += ".json";

    std::ifstream js(json_path);
    if (!js) throw IoError("load_frame: missing sidecar " + json_path.string());
    nlohmann::json side;
    try {
        js >> side;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_frame: corrupt sidecar " + json_path.string() + ": " + e.what());
    }

    if (detail::require_field(side, "schema_version").get<int>() != kSidecarSchemaVersion)
        throw IoError("load_frame: unsupported sidecar schema_version");
    auto shape = detail::require_field(side, "shape").get<std::vector<int>>();
    if (shape.size() != 3) throw IoError("load_frame: sidecar field 'shape' must be rank 3");

    RAFrame frame;
    frame.pixels.shape = shape;
    size_t n = Tensor<float>::numel_of(shape);

    std::ifstream raw(raw_path, std::ios::binary);
    if (!raw) throw IoError("load_frame: missing raw file " + raw_path.string());
    raw.seekg(0, std::ios::end);
    size_t bytes = static_cast<size_t>(raw.tellg());
    if (bytes != n * sizeof(float))
        throw IoError("load_frame: size mismatch in " + raw_path.string() + ": expected " +
                      std::to_string(n * sizeof(float)) + " bytes, found " + std::to_string(bytes));
    raw.seekg(0);
    frame.pixels.v.resize(n);
    raw.read(reinterpret_cast<char*>(frame.pixels.v.data()),
             static_cast<std::streamsize>(n * sizeof(float)));
    if (!raw) throw IoError("load_frame: short read " + raw_path.string());

    auto label_j = detail::require_field(side, "label");
    if (!label_j.is_null()) frame.label = label_from_string(label_j.get<std::string>());
    auto center_j = detail::require_field(side, "blob_center");
    if (!center_j.is_null()) {
        GroundTruth gt;
        gt.label = Label::person;
        gt.blob_center = {center_j.at(0).get<double>(), center_j.at(1).get<double>()};
        auto radius_j = detail::require_field(side, "blob_radius_bins");
        if (radius_j.is_null()) throw IoError("load_frame: sidecar field 'blob_radius_bins' is null for a person frame");
        gt.blob_radius_bins = radius_j.get<double>();
        frame.gt = gt;
    } else if (frame.label && *frame.label == Label::person) {
        throw ValidationError("load_frame: sidecar label 'person' without blob_center");
    } else if (frame.label) {
        frame.gt = GroundTruth{*frame.label, std::nullopt, 0.0};
    }
    frame.seed = detail::require_field(side, "seed").get<uint64_t>();
    frame.mode = detail::require_field(side, "mode").get<std::string>();
    auto pd = detail::require_field(side, "params_digest");
    frame.params_digest = pd.is_null() ? "" : pd.get<std::string>();
    frame.normalization = detail::require_field(side, "normalization").get<std::string>();
    frame.source_id = side.value("source_id", stem.filename().string());
    return frame;
}

// ---------------------------------------------------------------------------
// Dataset manifest.
// ---------------------------------------------------------------------------

enum class Split { train = 0, val = 1, test = 2 };

inline std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        default: return "test";
    }
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw ValidationError("unknown split: '" + s + "'");
}

struct ManifestEntry {
    std::string frame;  // path stem relative to the manifest directory
    Label label = Label::empty;
    uint64_t seed = 0;
    std::string mode;
    Split split = Split::train;
    GroundTruth gt;
};

struct DatasetManifest {
    uint64_t seed = 0;
    std::string mode;
    int height = 0, width = 0;
    nlohmann::json params_echo;
    std::string params_digest;
    std::array<double, 3> split_fractions{0.70, 0.15, 0.15};
    std::vector<ManifestEntry> entries;

    std::map<std::string, int> label_counts() const {
        std::map<std::string, int> counts{{"empty", 0}, {"person", 0}};
        for (const auto& e : entries) counts[to_string(e.label)]++;
        return counts;
    }

    void validate() const {
        double fsum = split_fractions[0] + split_fractions[1] + split_fractions[2];
        if (std::abs(fsum - 1.0) > 1e-9)
            throw ValidationError("manifest: split fractions must sum to 1");
        std::map<std::string, int> seen;
        for (const auto& e : entries) {
            if (++seen[e.frame] > 1) throw ValidationError("manifest: duplicate frame path " + e.frame);
            if (e.label == Label::person && !e.gt.blob_center)
                throw ValidationError("manifest: person entry without blob center: " + e.frame);
        }
    }
};

inline nlohmann::json gt_to_json(const GroundTruth& gt) {
    nlohmann::json j;
    j["label"] = to_string(gt.label);
    if (gt.blob_center) {
        j["blob_center"] = {gt.blob_center->first, gt.blob_center->second};
        j["blob_radius_bins"] = gt.blob_radius_bins;
    } else {
        j["blob_center"] = nullptr;
        j["blob_radius_bins"] = nullptr;
    }
    return j;
}

inline GroundTruth gt_from_json(const nlohmann::json& j) {
    GroundTruth gt;
    gt.label = label_from_string(j.at("label").get<std::string>());
    if (!j.at("blob_center").is_null()) {
        gt.blob_center = {j.at("blob_center").at(0).get<double>(),
                          j.at("blob_center").at(1).get<double>()};
        gt.blob_radius_bins = j.at("blob_radius_bins").get<double>();
    }
    return gt;
}

inline void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    m.validate();
    nlohmann::json j;
    j["schema_version"] = kManifestSchemaVersion;
    j["seed"] = m.seed;
    j["mode"] = m.mode;
    j["resolution"] = {m.height, m.width};
    j["params"] = m.params_echo;
    j["params_digest"] = m.params_digest;
    j["split_fractions"] = {{"train", m.split_fractions[0]},
                            {"val", m.split_fractions[1]},
                            {"test", m.split_fractions[2]}};
    j["counts"] = m.label_counts();
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : m.entries) {
        nlohmann::json ej;
        ej["frame"] = e.frame;
        ej["label"] = to_string(e.label);
        ej["seed"] = e.seed;
        ej["mode"] = e.mode;
        ej["split"] = to_string(e.split);
        ej["ground_truth"] = gt_to_json(e.gt);
        entries.push_back(std::move(ej));
    }
    j["entries"] = std::move(entries);
    std::ofstream f(path);
    if (!f) throw IoError("save_manifest: cannot open " + path.string());
    f << j.dump(2) << "\n";
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("load_manifest: cannot open " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("load_manifest: corrupt manifest " + path.string() + ": " + e.what());
    }
    if (j.at("schema_version").get<int>() != kManifestSchemaVersion)
        throw IoError("load_manifest: unsupported schema_version");
    DatasetManifest m;
    m.seed = j.at("seed").get<uint64_t>();
    m.mode = j.at("mode").get<std::string>();
    m.height = j.at("resolution").at(0).get<int>();
    m.width = j.at("resolution").at(1).get<int>();
    m.params_echo = j.at("params");
    m.params_digest = j.at("params_digest").get<std::string>();
    m.split_fractions = {j.at("split_fractions").at("train").get<double>(),
                         j.at("split_fractions").at("val").get<double>(),
                         j.at("split_fractions").at("test").get<double>()};
    for (const auto& ej : j.at("entries")) {
        ManifestEntry e;
        e.frame = ej.at("frame").get<std::string>();
        e.label = label_from_string(ej.at("label").get<std::string>());
        e.seed = ej.at("seed").get<uint64_t>();
        e.mode = ej.at("mode").get<std::string>();
        e.split = split_from_string(ej.at("split").get<std::string>());
        e.gt = gt_from_json(ej.at("ground_truth"));
        m.entries.push_back(std::move(e));
    }
    m.validate();
    return m;
}

}  // namespace gla::frames
