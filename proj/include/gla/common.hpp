#pragma once

// Shared plumbing: error taxonomy, hashing/digests, and the deterministic
// RNG streams every generator in the project derives from.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gla {

// ---------------------------------------------------------------------------
// Errors. CLI maps these to exit codes: validation/io -> 2, numerical -> 3.
// ---------------------------------------------------------------------------

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape/dimension contract violations.
struct StructuralError : ValidationError {
    using ValidationError::ValidationError;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Hashing. FNV-1a 64 is used for content digests (frames, params, parameter
// blobs) so reruns can be compared without external tooling.
// ---------------------------------------------------------------------------

inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

inline std::string to_hex(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

// Running digest over heterogeneous payloads (little-endian byte views).
class Digest {
public:
    void update(const void* data, size_t n) { h_ = fnv1a64(data, n, h_); }
    void update(std::string_view s) { update(s.data(), s.size()); }
    template <typename T>
    void update_scalar(T v) {
        static_assert(std::is_trivially_copyable_v<T>);
        update(&v, sizeof(T));
    }
    template <typename T>
    void update_vector(const std::vector<T>& v) {
        static_assert(std::is_trivially_copyable_v<T>);
        if (!v.empty()) update(v.data(), v.size() * sizeof(T));
    }
    uint64_t value() const { return h_; }
    std::string hex() const { return to_hex(h_); }

private:
    uint64_t h_ = 0xcbf29ce484222325ULL;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. Every randomized operation takes (seed, stream tag,
// indices) so any subset of the work can be regenerated independently and
// parallel schedules reproduce the sequential output.
// ---------------------------------------------------------------------------

inline uint64_t mix64(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t stream_seed(uint64_t master, std::string_view tag) {
    return mix64(master ^ fnv1a64(tag));
}

inline uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t a) {
    return mix64(mix64(master ^ fnv1a64(tag)) ^ a);
}

inline uint64_t stream_seed(uint64_t master, std::string_view tag, uint64_t a, uint64_t b) {
    return mix64(mix64(mix64(master ^ fnv1a64(tag)) ^ a) ^ b);
}

// mt19937_64 with hand-rolled distributions; std:: distributions are
// implementation-defined and would tie output bytes to the standard library.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next() { return gen_(); }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [lo, hi] by rejection-free modulo (bias negligible for
    // the small ranges used here, but keep it exact anyway via rejection)
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return lo + static_cast<int64_t>(v % span);
    }

    // Box-Muller; consumes exactly two words per call.
    double normal() {
        double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        // Fisher-Yates, fixed draw order
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

inline Rng make_rng(uint64_t master, std::string_view tag) { return Rng(stream_seed(master, tag)); }
inline Rng make_rng(uint64_t master, std::string_view tag, uint64_t a) {
    return Rng(stream_seed(master, tag, a));
}
inline Rng make_rng(uint64_t master, std::string_view tag, uint64_t a, uint64_t b) {
    return Rng(stream_seed(master, tag, a, b));
}

}  // namespace gla
