#pragma once

// Minimal dense tensor used across the project: row-major (C, H, W) images
// and flat vectors. Heavy linear algebra maps the raw buffers into Eigen.

#include <algorithm>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "gla/common.hpp"

namespace gla {

template <typename S>
struct Tensor {
    std::vector<int> shape;
    std::vector<S> v;

    Tensor() = default;
    explicit Tensor(std::vector<int> shp) : shape(std::move(shp)), v(numel_of(shape), S(0)) {}
    Tensor(std::vector<int> shp, std::vector<S> data) : shape(std::move(shp)), v(std::move(data)) {
        if (static_cast<size_t>(numel_of(shape)) != v.size())
            throw StructuralError("tensor: shape does not match data size");
    }

    static size_t numel_of(const std::vector<int>& shp) {
        size_t n = 1;
        for (int d : shp) {
            if (d < 0) throw StructuralError("tensor: negative dimension");
            n *= static_cast<size_t>(d);
        }
        return shp.empty() ? 0 : n;
    }

    size_t numel() const { return v.size(); }
    bool empty() const { return v.empty(); }

    int dim(int i) const { return shape.at(static_cast<size_t>(i)); }

    // CHW accessors for rank-3 tensors
    S& at(int c, int y, int x) {
        return v[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }
    S at(int c, int y, int x) const {
        return v[(static_cast<size_t>(c) * shape[1] + y) * shape[2] + x];
    }

    void fill(S x) { std::fill(v.begin(), v.end(), x); }

    S min() const { return *std::min_element(v.begin(), v.end()); }
    S max() const { return *std::max_element(v.begin(), v.end()); }

    template <typename T>
    Tensor<T> cast() const {
        Tensor<T> out;
        out.shape = shape;
        out.v.resize(v.size());
        std::transform(v.begin(), v.end(), out.v.begin(), [](S x) { return static_cast<T>(x); });
        return out;
    }
};

// Bilinear resample of a (C, H, W) tensor to (C, th, tw). Same-size calls
// return a bit-identical copy. Uses corner-aligned sampling so endpoints map
// exactly; output values stay inside [min(input), max(input)] by convexity.
template <typename S>
Tensor<S> bilinear_resize(const Tensor<S>& in, int th, int tw) {
    if (in.shape.size() != 3) throw StructuralError("bilinear_resize: expected CHW tensor");
    const int c = in.shape[0], h = in.shape[1], w = in.shape[2];
    if (th == h && tw == w) return in;
    Tensor<S> out({c, th, tw});
    const double sy = th > 1 ? static_cast<double>(h - 1) / (th - 1) : 0.0;
    const double sx = tw > 1 ? static_cast<double>(w - 1) / (tw - 1) : 0.0;
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < th; ++y) {
            double fy = y * sy;
            int y0 = static_cast<int>(fy);
            int y1 = std::min(y0 + 1, h - 1);
            double wy = fy - y0;
            for (int x = 0; x < tw; ++x) {
                double fx = x * sx;
                int x0 = static_cast<int>(fx);
                int x1 = std::min(x0 + 1, w - 1);
                double wx = fx - x0;
                double v00 = in.at(ch, y0, x0), v01 = in.at(ch, y0, x1);
                double v10 = in.at(ch, y1, x0), v11 = in.at(ch, y1, x1);
                double top = v00 + (v01 - v00) * wx;
                double bot = v10 + (v11 - v10) * wx;
                out.at(ch, y, x) = static_cast<S>(top + (bot - top) * wy);
            }
        }
    }
    return out;
}

}  // namespace gla
