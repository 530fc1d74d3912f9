#pragma once

// Synthetic RA data with ground truth. Two generators share one scene
// vocabulary: the full signal chain (ADC cube -> range/Doppler FFT -> MVDR
// angle spectrum) and a fast image-level renderer matching the same
// phenomenology (dominant person blob, static clutter, multipath bands).

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gla/common.hpp"
#include "gla/frames.hpp"
#include "gla/tensor.hpp"
#include "gla/types.hpp"

namespace gla::rf {

constexpr double kSpeedOfLight = 299792458.0;

// ---------------------------------------------------------------------------
// Radar configuration. The physical constants are a typical 77 GHz
// single-chip geometry; every run records them (plus a digest) in manifests
// and sidecars since they are stand-ins, not measured hardware.
// ---------------------------------------------------------------------------
struct RadarParams {
    int num_rx_antennas = 8;
    double antenna_spacing = 0.5;  // fraction of wavelength, uniform linear array
    int num_chirps = 64;
    int samples_per_chirp = 128;
    double chirp_slope = 30e12;         // Hz/s
    double sample_rate = 10e6;          // Hz
    double carrier_wavelength = 3.9e-3; // m
    int range_bins = 64;
    int angle_bins = 64;
    double angle_span_deg = 60.0;       // grid covers [-span, +span]

    void validate() const {
        if (num_rx_antennas < 1 || num_chirps < 1 || samples_per_chirp < 1 || range_bins < 1)
            throw ValidationError("radar params: counts must be >= 1");
        if (angle_bins < 3) throw ValidationError("radar params: angle_bins must be >= 3");
        if (!(antenna_spacing > 0.0) || antenna_spacing > 1.0)
            throw ValidationError("radar params: antenna_spacing must be in (0, 1]");
        if (!(chirp_slope > 0) || !(sample_rate > 0) || !(carrier_wavelength > 0) ||
            !(angle_span_deg > 0))
            throw ValidationError("radar params: physical constants must be positive");
        if (range_bins > samples_per_chirp)
            throw ValidationError("radar params: range_bins cannot exceed samples_per_chirp");
        if (!(range_resolution() > 0))
            throw ValidationError("radar params: range resolution must be positive");
    }

    // one range-FFT bin in meters
    double range_resolution() const {
        return kSpeedOfLight * sample_rate / (2.0 * chirp_slope * samples_per_chirp);
    }

    // largest range that still lands inside the kept range bins
    double max_range() const { return range_bins * range_resolution(); }

    double beat_frequency(double range_m) const {
        return 2.0 * chirp_slope * range_m / kSpeedOfLight;
    }

    // continuous range-FFT bin coordinate of a target
    double range_bin_of(double range_m) const {
        return beat_frequency(range_m) * samples_per_chirp / sample_rate;
    }

    double angle_step_deg() const { return 2.0 * angle_span_deg / (angle_bins - 1); }

    double grid_angle_deg(int i) const { return -angle_span_deg + i * angle_step_deg(); }

    // continuous angle-grid coordinate of a target
    double angle_bin_of(double angle_deg) const {
        return (angle_deg + angle_span_deg) / (2.0 * angle_span_deg) * (angle_bins - 1);
    }

    nlohmann::json to_json() const {
        return {
            {"num_rx_antennas", num_rx_antennas}, {"antenna_spacing", antenna_spacing},
            {"num_chirps", num_chirps},           {"samples_per_chirp", samples_per_chirp},
            {"chirp_slope", chirp_slope},         {"sample_rate", sample_rate},
            {"carrier_wavelength", carrier_wavelength},
            {"range_bins", range_bins},           {"angle_bins", angle_bins},
            {"angle_span_deg", angle_span_deg},
        };
    }

    static RadarParams from_json(const nlohmann::json& j) {
        RadarParams p;
        p.num_rx_antennas = j.at("num_rx_antennas").get<int>();
        p.antenna_spacing = j.at("antenna_spacing").get<double>();
        p.num_chirps = j.at("num_chirps").get<int>();
        p.samples_per_chirp = j.at("samples_per_chirp").get<int>();
        p.chirp_slope = j.at("chirp_slope").get<double>();
        p.sample_rate = j.at("sample_rate").get<double>();
        p.carrier_wavelength = j.at("carrier_wavelength").get<double>();
        p.range_bins = j.at("range_bins").get<int>();
        p.angle_bins = j.at("angle_bins").get<int>();
        p.angle_span_deg = j.at("angle_span_deg").get<double>();
        return p;
    }

    std::string digest() const { return to_hex(fnv1a64(to_json().dump())); }
};

// ---------------------------------------------------------------------------
// Scenes.
// ---------------------------------------------------------------------------

struct PointTarget {
    double range_m = 0;
    double angle_deg = 0;
    double reflectivity = 0;  // linear amplitude
};

struct PersonTarget {
    double range_m = 0;
    double angle_deg = 0;
    double reflectivity = 1.0;
    double blob_radius_bins = 2.0;  // isotropic gaussian radius used by the image renderer
};

struct MultipathBand {
    double range_bin = 0;
    double amplitude = 0;
    double thickness_bins = 1.0;
};

struct SceneSpec {
    Label label = Label::empty;
    std::optional<PersonTarget> person;
    std::vector<PointTarget> clutter;
    std::vector<MultipathBand> bands;
    double noise_power = 0.0;  // linear
    uint64_t seed = 0;

    void validate(const RadarParams& params) const {
        params.validate();
        if ((label == Label::person) != person.has_value())
            throw ValidationError("scene: person_target present iff label=person");
        auto check_target = [&](double range_m, double angle_deg, double refl) {
            if (range_m < 0 || range_m >= params.max_range())
                throw ValidationError("scene: target range " + std::to_string(range_m) +
                                      " m outside unambiguous range [0, " +
                                      std::to_string(params.max_range()) + ") m");
            if (std::abs(angle_deg) > params.angle_span_deg)
                throw ValidationError("scene: target angle outside the angle grid");
            if (refl < 0) throw ValidationError("scene: reflectivity must be >= 0");
        };
        if (person) {
            check_target(person->range_m, person->angle_deg, person->reflectivity);
            if (!(person->blob_radius_bins > 0))
                throw ValidationError("scene: person blob radius must be positive");
        }
        for (const auto& t : clutter) check_target(t.range_m, t.angle_deg, t.reflectivity);
        for (const auto& b : bands) {
            if (b.range_bin < 0 || b.range_bin > params.range_bins - 1)
                throw ValidationError("scene: band range bin outside frame");
            if (b.amplitude < 0 || !(b.thickness_bins > 0))
                throw ValidationError("scene: band amplitude/thickness invalid");
        }
        if (noise_power < 0) throw ValidationError("scene: noise power must be >= 0");
    }

    GroundTruth ground_truth(const RadarParams& params) const {
        GroundTruth gt;
        gt.label = label;
        if (person) {
            gt.blob_center = {params.range_bin_of(person->range_m),
                              params.angle_bin_of(person->angle_deg)};
            gt.blob_radius_bins = person->blob_radius_bins;
        }
        return gt;
    }
};

// ---------------------------------------------------------------------------
// simulate_adc: complex cube [rx][chirp][sample]. Static point targets beat
// at f_b = 2*S*r/c with per-antenna phase -2*pi*m*spacing*sin(theta); noise
// is circular complex gaussian with the requested power.
// ---------------------------------------------------------------------------

using Cube = std::vector<std::complex<double>>;  // rx-major [rx][chirp][sample]

inline size_t cube_index(const RadarParams& p, int rx, int chirp, int sample) {
    return (static_cast<size_t>(rx) * p.num_chirps + chirp) * p.samples_per_chirp + sample;
}

inline Cube simulate_adc(const SceneSpec& scene, const RadarParams& params) {
    scene.validate(params);
    const int M = params.num_rx_antennas, Q = params.num_chirps, N = params.samples_per_chirp;
    Cube cube(static_cast<size_t>(M) * Q * N, {0.0, 0.0});

    struct Emitter {
        double range_m, angle_deg, amplitude;
    };
    std::vector<Emitter> emitters;
    if (scene.person)
        emitters.push_back({scene.person->range_m, scene.person->angle_deg, scene.person->reflectivity});
    for (const auto& t : scene.clutter) emitters.push_back({t.range_m, t.angle_deg, t.reflectivity});

    Rng phase_rng = make_rng(scene.seed, "adc-phase");
    const double two_pi = 6.283185307179586476925286766559;
    std::vector<std::complex<double>> per_antenna_sample(static_cast<size_t>(M) * N);
    for (const auto& e : emitters) {
        double fb = params.beat_frequency(e.range_m);
        double phi0 = phase_rng.uniform() * two_pi;
        double sin_theta = std::sin(e.angle_deg * two_pi / 360.0);
        for (int m = 0; m < M; ++m) {
            double ant_phase = -two_pi * m * params.antenna_spacing * sin_theta;
            for (int n = 0; n < N; ++n) {
                double ph = two_pi * fb * n / params.sample_rate + phi0 + ant_phase;
                per_antenna_sample[static_cast<size_t>(m) * N + n] =
                    e.amplitude * std::complex<double>(std::cos(ph), std::sin(ph));
            }
        }
        // static scene: identical contribution on every chirp
        for (int m = 0; m < M; ++m)
            for (int q = 0; q < Q; ++q)
                for (int n = 0; n < N; ++n)
                    cube[cube_index(params, m, q, n)] += per_antenna_sample[static_cast<size_t>(m) * N + n];
    }

    if (scene.noise_power > 0) {
        Rng noise_rng = make_rng(scene.seed, "adc-noise");
        double sigma = std::sqrt(scene.noise_power / 2.0);
        for (auto& s : cube)
            s += std::complex<double>(sigma * noise_rng.normal(), sigma * noise_rng.normal());
    }
    return cube;
}

// ---------------------------------------------------------------------------
// range_doppler_fft: FFT along fast time (keep the first range_bins bins),
// then along chirps. Output [rx][doppler=num_chirps][range_bins],
// zero-Doppler at index 0.
// ---------------------------------------------------------------------------

enum class Window { rectangular, hann };

inline std::vector<double> make_window(Window w, int n) {
    std::vector<double> out(static_cast<size_t>(n), 1.0);
    if (w == Window::hann && n > 1) {
        const double two_pi = 6.283185307179586476925286766559;
        for (int i = 0; i < n; ++i) out[i] = 0.5 * (1.0 - std::cos(two_pi * i / (n - 1)));
    }
    return out;
}

using RdTensor = std::vector<std::complex<double>>;  // [rx][doppler][range_bins]

inline size_t rd_index(const RadarParams& p, int rx, int doppler, int range_bin) {
    return (static_cast<size_t>(rx) * p.num_chirps + doppler) * p.range_bins + range_bin;
}

inline RdTensor range_doppler_fft(const Cube& cube, const RadarParams& params,
                                  Window range_window = Window::hann,
                                  Window doppler_window = Window::rectangular) {
    const int M = params.num_rx_antennas, Q = params.num_chirps, N = params.samples_per_chirp;
    if (cube.size() != static_cast<size_t>(M) * Q * N)
        throw StructuralError("range_doppler_fft: cube size does not match params");

    Eigen::FFT<double> fft;
    auto wr = make_window(range_window, N);
    auto wd = make_window(doppler_window, Q);

    RdTensor out(static_cast<size_t>(M) * Q * params.range_bins);
    std::vector<std::complex<double>> in_buf(static_cast<size_t>(N)), out_buf;

    // fast-time FFT per (rx, chirp), truncated to range_bins
    std::vector<std::complex<double>> range_stage(static_cast<size_t>(M) * Q * params.range_bins);
    for (int m = 0; m < M; ++m)
        for (int q = 0; q < Q; ++q) {
            for (int n = 0; n < N; ++n)
                in_buf[n] = cube[cube_index(params, m, q, n)] * wr[n];
            fft.fwd(out_buf, in_buf);
            for (int r = 0; r < params.range_bins; ++r)
                range_stage[(static_cast<size_t>(m) * Q + q) * params.range_bins + r] = out_buf[r];
        }

    // slow-time FFT per (rx, range bin)
    std::vector<std::complex<double>> chirp_buf(static_cast<size_t>(Q));
    for (int m = 0; m < M; ++m)
        for (int r = 0; r < params.range_bins; ++r) {
            for (int q = 0; q < Q; ++q)
                chirp_buf[q] = range_stage[(static_cast<size_t>(m) * Q + q) * params.range_bins + r] * wd[q];
            fft.fwd(out_buf, chirp_buf);
            for (int q = 0; q < Q; ++q) out[rd_index(params, m, q, r)] = out_buf[q];
        }
    return out;
}

// ---------------------------------------------------------------------------
// MVDR / Capon angle spectrum: P(theta) = 1 / (a^H (R + loading I)^-1 a).
// ---------------------------------------------------------------------------

inline Eigen::VectorXcd steering_vector(const RadarParams& params, double angle_deg) {
    const double two_pi = 6.283185307179586476925286766559;
    Eigen::VectorXcd a(params.num_rx_antennas);
    double sin_theta = std::sin(angle_deg * two_pi / 360.0);
    for (int m = 0; m < params.num_rx_antennas; ++m) {
        double ph = -two_pi * m * params.antenna_spacing * sin_theta;
        a(m) = std::complex<double>(std::cos(ph), std::sin(ph));
    }
    return a;
}

// snapshots: M x T complex matrix (columns are snapshots); loading is the
// absolute diagonal load added to the sample covariance.
inline std::vector<double> mvdr_angle_spectrum(const Eigen::MatrixXcd& snapshots,
                                               const RadarParams& params, double loading) {
    const int M = params.num_rx_antennas;
    if (snapshots.rows() != M) throw StructuralError("mvdr: snapshot rows must equal num_rx_antennas");
    if (snapshots.cols() < 1) throw ValidationError("mvdr: need at least one snapshot");
    if (loading < 0) throw ValidationError("mvdr: loading must be >= 0");

    Eigen::MatrixXcd R = (snapshots * snapshots.adjoint()) / static_cast<double>(snapshots.cols());
    R += loading * Eigen::MatrixXcd::Identity(M, M);

    Eigen::LLT<Eigen::MatrixXcd> llt(R);
    if (llt.info() != Eigen::Success)
        throw NumericalError("mvdr: covariance not positive definite; supply loading > 0 or more snapshots");

    std::vector<double> spectrum(static_cast<size_t>(params.angle_bins));
    for (int i = 0; i < params.angle_bins; ++i) {
        Eigen::VectorXcd a = steering_vector(params, params.grid_angle_deg(i));
        double denom = std::real(a.dot(llt.solve(a)));  // a^H R^-1 a
        if (!(denom > 0) || !std::isfinite(denom))
            throw NumericalError("mvdr: ill-conditioned covariance (non-positive quadratic form)");
        spectrum[static_cast<size_t>(i)] = 1.0 / denom;
    }
    return spectrum;
}

// default diagonal loading for a sample covariance of the given snapshots
inline double default_loading(const Eigen::MatrixXcd& snapshots, const RadarParams& params) {
    double tr = snapshots.squaredNorm() / static_cast<double>(snapshots.cols());
    return 1e-3 * tr / params.num_rx_antennas;
}

// ---------------------------------------------------------------------------
// Signal-chain RA map: MVDR spectrum per range bin, snapshots pooled over the
// Doppler bins of that range cell. Stored in amplitude (sqrt power) scale.
// ---------------------------------------------------------------------------

// In the signal chain a multipath band is a ring of weak scatterers spread
// across angle at the band's range.
inline std::vector<PointTarget> band_scatterers(const MultipathBand& band, const RadarParams& params,
                                                uint64_t scene_seed, int band_index) {
    Rng rng = make_rng(scene_seed, "band", static_cast<uint64_t>(band_index));
    constexpr int kScatterers = 16;
    std::vector<PointTarget> out;
    out.reserve(kScatterers);
    for (int i = 0; i < kScatterers; ++i) {
        double jitter = rng.normal() * band.thickness_bins;
        double bin = std::clamp(band.range_bin + jitter, 0.0, params.range_bins - 1.0);
        PointTarget t;
        t.range_m = bin * params.range_resolution();
        t.angle_deg = rng.uniform(-params.angle_span_deg * 0.95, params.angle_span_deg * 0.95);
        t.reflectivity = band.amplitude * (0.5 + rng.uniform());
        out.push_back(t);
    }
    return out;
}

inline Tensor<float> ra_map_signal_chain(const SceneSpec& scene, const RadarParams& params) {
    SceneSpec expanded = scene;
    for (size_t b = 0; b < scene.bands.size(); ++b) {
        auto scatter = band_scatterers(scene.bands[b], params, scene.seed, static_cast<int>(b));
        expanded.clutter.insert(expanded.clutter.end(), scatter.begin(), scatter.end());
    }
    expanded.bands.clear();

    Cube cube = simulate_adc(expanded, params);
    RdTensor rd = range_doppler_fft(cube, params);

    const int M = params.num_rx_antennas, Q = params.num_chirps;
    Tensor<float> ra({1, params.range_bins, params.angle_bins});
    Eigen::MatrixXcd snapshots(M, Q);
    for (int r = 0; r < params.range_bins; ++r) {
        for (int m = 0; m < M; ++m)
            for (int q = 0; q < Q; ++q) snapshots(m, q) = rd[rd_index(params, m, q, r)];
        double loading = default_loading(snapshots, params);
        auto spectrum = mvdr_angle_spectrum(snapshots, params, loading);
        for (int i = 0; i < params.angle_bins; ++i)
            ra.at(0, r, i) = static_cast<float>(std::sqrt(spectrum[static_cast<size_t>(i)]));
    }
    return ra;
}

// ---------------------------------------------------------------------------
// synth_ra_image: direct render of the same phenomenology. Returns the raw
// (unnormalized) intensity image plus ground truth.
// ---------------------------------------------------------------------------

inline std::pair<Tensor<float>, GroundTruth> synth_ra_image(const SceneSpec& scene,
                                                            const RadarParams& params) {
    scene.validate(params);
    const int H = params.range_bins, W = params.angle_bins;
    Tensor<float> img({1, H, W});

    auto add_blob = [&](double cr, double ca, double amp, double radius) {
        double inv = 1.0 / (2.0 * radius * radius);
        for (int r = 0; r < H; ++r)
            for (int c = 0; c < W; ++c) {
                double d2 = (r - cr) * (r - cr) + (c - ca) * (c - ca);
                img.at(0, r, c) += static_cast<float>(amp * std::exp(-d2 * inv));
            }
    };

    if (scene.person)
        add_blob(params.range_bin_of(scene.person->range_m), params.angle_bin_of(scene.person->angle_deg),
                 scene.person->reflectivity, scene.person->blob_radius_bins);
    constexpr double kClutterRadius = 1.2;
    for (const auto& t : scene.clutter)
        add_blob(params.range_bin_of(t.range_m), params.angle_bin_of(t.angle_deg), t.reflectivity,
                 kClutterRadius);

    for (const auto& b : scene.bands) {
        double inv = 1.0 / (2.0 * b.thickness_bins * b.thickness_bins);
        for (int r = 0; r < H; ++r) {
            double d2 = (r - b.range_bin) * (r - b.range_bin);
            float add = static_cast<float>(b.amplitude * std::exp(-d2 * inv));
            for (int c = 0; c < W; ++c) img.at(0, r, c) += add;
        }
    }

    if (scene.noise_power > 0) {
        // exponential intensity noise (power of circular gaussian speckle)
        Rng rng = make_rng(scene.seed, "img-noise");
        for (auto& px : img.v) {
            double u = std::max(rng.uniform(), 1e-300);
            px += static_cast<float>(-scene.noise_power * std::log(u));
        }
    }
    return {std::move(img), scene.ground_truth(params)};
}

// ---------------------------------------------------------------------------
// Dataset generation.
// ---------------------------------------------------------------------------

enum class GenMode { signal_chain, image_level };

inline std::string to_string(GenMode m) {
    return m == GenMode::signal_chain ? "signal_chain" : "image_level";
}

inline GenMode gen_mode_from_string(const std::string& s) {
    if (s == "signal_chain" || s == "signal") return GenMode::signal_chain;
    if (s == "image_level" || s == "image") return GenMode::image_level;
    throw ValidationError("unknown generation mode: '" + s + "'");
}

// Ranges the random scenes are drawn from. The person blob dominates the
// background by construction so presence frames carry a single strong blob
// over the shared clutter/band floor.
struct SceneDistribution {
    double person_range_frac_min = 0.15, person_range_frac_max = 0.85;
    double person_angle_deg_min = -45.0, person_angle_deg_max = 45.0;
    double person_refl_min = 0.9, person_refl_max = 1.1;
    double blob_radius_min = 1.5, blob_radius_max = 3.0;
    int clutter_count_min = 2, clutter_count_max = 5;
    double clutter_refl_min = 0.04, clutter_refl_max = 0.18;
    double clutter_range_frac_min = 0.08, clutter_range_frac_max = 0.92;
    int band_count_min = 1, band_count_max = 3;
    double band_amp_min = 0.04, band_amp_max = 0.12;
    double band_thickness_min = 0.8, band_thickness_max = 2.0;
    double noise_power_min = 0.003, noise_power_max = 0.015;
    bool shared_clutter = true;  // one static layout per dataset

    struct Layout {
        std::vector<PointTarget> clutter;
        std::vector<MultipathBand> bands;
    };

    Layout draw_layout(Rng& rng, const RadarParams& params) const {
        Layout layout;
        int nc = static_cast<int>(rng.uniform_int(clutter_count_min, clutter_count_max));
        for (int i = 0; i < nc; ++i) {
            PointTarget t;
            t.range_m = rng.uniform(clutter_range_frac_min, clutter_range_frac_max) * params.max_range();
            t.angle_deg = rng.uniform(-params.angle_span_deg * 0.9, params.angle_span_deg * 0.9);
            t.reflectivity = rng.uniform(clutter_refl_min, clutter_refl_max);
            layout.clutter.push_back(t);
        }
        int nb = static_cast<int>(rng.uniform_int(band_count_min, band_count_max));
        for (int i = 0; i < nb; ++i) {
            MultipathBand b;
            b.range_bin = rng.uniform(3.0, params.range_bins - 4.0);
            b.amplitude = rng.uniform(band_amp_min, band_amp_max);
            b.thickness_bins = rng.uniform(band_thickness_min, band_thickness_max);
            layout.bands.push_back(b);
        }
        return layout;
    }

    SceneSpec draw_scene(Label label, uint64_t frame_seed, const RadarParams& params,
                         const Layout& layout) const {
        Rng rng(frame_seed);
        SceneSpec scene;
        scene.label = label;
        scene.seed = frame_seed;
        scene.clutter = layout.clutter;
        scene.bands = layout.bands;
        scene.noise_power = rng.uniform(noise_power_min, noise_power_max);
        if (label == Label::person) {
            PersonTarget p;
            p.range_m = rng.uniform(person_range_frac_min, person_range_frac_max) * params.max_range();
            p.angle_deg = rng.uniform(person_angle_deg_min, person_angle_deg_max);
            p.reflectivity = rng.uniform(person_refl_min, person_refl_max);
            p.blob_radius_bins = rng.uniform(blob_radius_min, blob_radius_max);
            scene.person = p;
        }
        return scene;
    }
};

// Renders one frame (either mode) as a normalized RAFrame plus ground truth.
inline frames::RAFrame render_frame(const SceneSpec& scene, const RadarParams& params, GenMode mode,
                                    const std::string& source_id) {
    Tensor<float> raw;
    GroundTruth gt;
    if (mode == GenMode::image_level) {
        auto [img, g] = synth_ra_image(scene, params);
        raw = std::move(img);
        gt = g;
    } else {
        raw = ra_map_signal_chain(scene, params);
        gt = scene.ground_truth(params);
        if (gt.blob_center) {
            // effective blob width in the chain output is set by the array beamwidth
            double bw_deg = 0.886 * 2.0 / (params.num_rx_antennas * params.antenna_spacing) * 180.0 /
                            3.14159265358979323846 / 2.0;
            gt.blob_radius_bins = std::max(1.5, bw_deg / params.angle_step_deg() / 2.0);
        }
    }
    frames::RAFrame frame;
    frame.pixels = frames::normalize_frame(raw);
    frame.label = scene.label;
    frame.gt = gt;
    frame.seed = scene.seed;
    frame.mode = to_string(mode);
    frame.params_digest = params.digest();
    frame.normalization = frames::kNormalizationId;
    frame.source_id = source_id;
    return frame;
}

// Writes frames + sidecars + previews under out_dir/frames and a manifest at
// out_dir/manifest.json. Re-running with identical arguments reproduces
// byte-identical files.
inline frames::DatasetManifest generate_dataset(int n_empty, int n_person, const RadarParams& params,
                                                const SceneDistribution& dist, GenMode mode,
                                                uint64_t seed, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    if (n_empty < 0 || n_person < 0) throw ValidationError("generate_dataset: counts must be >= 0");
    params.validate();

    std::error_code ec;
    fs::create_directories(out_dir / "frames", ec);
    if (ec) throw IoError("generate_dataset: cannot create output directory " + out_dir.string());

    frames::DatasetManifest manifest;
    manifest.seed = seed;
    manifest.mode = to_string(mode);
    manifest.height = params.range_bins;
    manifest.width = params.angle_bins;
    manifest.params_echo = params.to_json();
    manifest.params_digest = params.digest();

    Rng layout_rng = make_rng(seed, "layout");
    SceneDistribution::Layout shared_layout = dist.draw_layout(layout_rng, params);

    const int total = n_empty + n_person;
    for (int i = 0; i < total; ++i) {
        Label label = i < n_empty ? Label::empty : Label::person;
        uint64_t frame_seed = stream_seed(seed, "frame", static_cast<uint64_t>(i));
        SceneDistribution::Layout layout = shared_layout;
        if (!dist.shared_clutter) {
            Rng per_frame = make_rng(seed, "layout", static_cast<uint64_t>(i));
            layout = dist.draw_layout(per_frame, params);
        }
        SceneSpec scene = dist.draw_scene(label, frame_seed, params, layout);

        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d", i);
        frames::RAFrame frame = render_frame(scene, params, mode, name);
        frames::save_frame(out_dir / "frames" / name, frame);

        frames::ManifestEntry entry;
        entry.frame = std::string("frames/") + name;
        entry.label = label;
        entry.seed = frame_seed;
        entry.mode = to_string(mode);
        entry.gt = *frame.gt;
        manifest.entries.push_back(std::move(entry));
    }

    // balanced per-class split assignment, deterministic in the master seed
    auto assign_splits = [&](Label label, uint64_t cls) {
        std::vector<size_t> idx;
        for (size_t i = 0; i < manifest.entries.size(); ++i)
            if (manifest.entries[i].label == label) idx.push_back(i);
        Rng rng = make_rng(seed, "split", cls);
        rng.shuffle(idx);
        size_t n = idx.size();
        size_t n_train = static_cast<size_t>(std::lround(manifest.split_fractions[0] * n));
        size_t n_val = static_cast<size_t>(std::lround(manifest.split_fractions[1] * n));
        n_train = std::min(n_train, n);
        n_val = std::min(n_val, n - n_train);
        for (size_t k = 0; k < n; ++k) {
            frames::Split s = k < n_train               ? frames::Split::train
                              : k < n_train + n_val     ? frames::Split::val
                                                        : frames::Split::test;
            manifest.entries[idx[k]].split = s;
        }
    };
    assign_splits(Label::empty, 0);
    assign_splits(Label::person, 1);

    frames::save_manifest(out_dir / "manifest.json", manifest);
    return manifest;
}

}  // namespace gla::rf
