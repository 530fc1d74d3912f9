#pragma once

// Small templated NN toolkit: strided conv / transposed conv / linear layers
// with explicit backward passes, ReLU/sigmoid helpers and Adam. Layers are
// const during forward and data-backward so evaluation and CAM extraction can
// share a frozen model; only *_params accumulation and the optimizer mutate.
//
// Scalar is templated (float for training, double for finite-difference
// checks). Matrix products map the flat row-major buffers into Eigen.

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "gla/common.hpp"
#include "gla/tensor.hpp"

namespace gla::nn {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using Map = Eigen::Map<RowMat<S>>;
template <typename S>
using CMap = Eigen::Map<const RowMat<S>>;

// ---------------------------------------------------------------------------
// im2col / col2im (adjoint pair)
// ---------------------------------------------------------------------------

inline int conv_out_dim(int in, int k, int stride, int pad) {
    int num = in + 2 * pad - k;
    if (num < 0 || num % stride != 0)
        throw StructuralError("conv: input size " + std::to_string(in) +
                              " incompatible with kernel geometry");
    return num / stride + 1;
}

// x: [c, h, w] -> col: [c*k*k, oh*ow]
template <typename S>
void im2col(const S* x, int c, int h, int w, int k, int stride, int pad, S* col) {
    const int oh = conv_out_dim(h, k, stride, pad);
    const int ow = conv_out_dim(w, k, stride, pad);
    const int positions = oh * ow;
    for (int ch = 0; ch < c; ++ch)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                S* row = col + (static_cast<size_t>(ch) * k * k + ky * k + kx) * positions;
                for (int oy = 0; oy < oh; ++oy) {
                    int iy = oy * stride - pad + ky;
                    for (int ox = 0; ox < ow; ++ox) {
                        int ix = ox * stride - pad + kx;
                        row[oy * ow + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                                ? x[(static_cast<size_t>(ch) * h + iy) * w + ix]
                                                : S(0);
                    }
                }
            }
}

// col: [c*k*k, oh*ow] accumulated back into x: [c, h, w] (caller zeroes x)
template <typename S>
void col2im(const S* col, int c, int h, int w, int k, int stride, int pad, S* x) {
    const int oh = conv_out_dim(h, k, stride, pad);
    const int ow = conv_out_dim(w, k, stride, pad);
    const int positions = oh * ow;
    for (int ch = 0; ch < c; ++ch)
        for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
                const S* row = col + (static_cast<size_t>(ch) * k * k + ky * k + kx) * positions;
                for (int oy = 0; oy < oh; ++oy) {
                    int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        int ix = ox * stride - pad + kx;
                        if (ix < 0 || ix >= w) continue;
                        x[(static_cast<size_t>(ch) * h + iy) * w + ix] += row[oy * ow + ox];
                    }
                }
            }
}

// ---------------------------------------------------------------------------
// Layers
// ---------------------------------------------------------------------------

template <typename S>
struct Conv2d {
    std::string name;
    int in_c = 0, out_c = 0, k = 4, stride = 2, pad = 1;
    int in_h = 0, in_w = 0;  // fixed per-architecture geometry
    std::vector<S> W, b, dW, db;  // W: [out_c, in_c*k*k]

    int out_h() const { return conv_out_dim(in_h, k, stride, pad); }
    int out_w() const { return conv_out_dim(in_w, k, stride, pad); }
    int col_rows() const { return in_c * k * k; }
    int positions() const { return out_h() * out_w(); }

    void init(std::string layer_name, int ic, int oc, int ih, int iw, Rng& rng) {
        name = std::move(layer_name);
        in_c = ic; out_c = oc; in_h = ih; in_w = iw;
        W.resize(static_cast<size_t>(out_c) * col_rows());
        b.assign(static_cast<size_t>(out_c), S(0));
        dW.assign(W.size(), S(0));
        db.assign(b.size(), S(0));
        double scale = std::sqrt(2.0 / col_rows());  // He init
        for (auto& w : W) w = static_cast<S>(rng.normal() * scale);
    }

    Tensor<S> forward(const Tensor<S>& x, std::vector<S>* col_cache = nullptr) const {
        if (x.shape != std::vector<int>{in_c, in_h, in_w})
            throw StructuralError("conv " + name + ": input shape mismatch");
        std::vector<S> local;
        std::vector<S>& col = col_cache ? *col_cache : local;
        col.resize(static_cast<size_t>(col_rows()) * positions());
        im2col(x.v.data(), in_c, in_h, in_w, k, stride, pad, col.data());

        Tensor<S> y({out_c, out_h(), out_w()});
        Map<S>(y.v.data(), out_c, positions()).noalias() =
            CMap<S>(W.data(), out_c, col_rows()) * CMap<S>(col.data(), col_rows(), positions());
        for (int oc = 0; oc < out_c; ++oc) {
            S* row = y.v.data() + static_cast<size_t>(oc) * positions();
            for (int p = 0; p < positions(); ++p) row[p] += b[oc];
        }
        return y;
    }

    // dx only; never touches gradients
    Tensor<S> backward_data(const Tensor<S>& dy) const {
        std::vector<S> dcol(static_cast<size_t>(col_rows()) * positions());
        Map<S>(dcol.data(), col_rows(), positions()).noalias() =
            CMap<S>(W.data(), out_c, col_rows()).transpose() *
            CMap<S>(dy.v.data(), out_c, positions());
        Tensor<S> dx({in_c, in_h, in_w});
        col2im(dcol.data(), in_c, in_h, in_w, k, stride, pad, dx.v.data());
        return dx;
    }

    void backward_params(const Tensor<S>& dy, const std::vector<S>& col) {
        Map<S>(dW.data(), out_c, col_rows()).noalias() +=
            CMap<S>(dy.v.data(), out_c, positions()) *
            CMap<S>(col.data(), col_rows(), positions()).transpose();
        for (int oc = 0; oc < out_c; ++oc) {
            const S* row = dy.v.data() + static_cast<size_t>(oc) * positions();
            S acc = S(0);
            for (int p = 0; p < positions(); ++p) acc += row[p];
            db[oc] += acc;
        }
    }
};

template <typename S>
struct ConvTranspose2d {
    std::string name;
    int in_c = 0, out_c = 0, k = 4, stride = 2, pad = 1;
    int in_h = 0, in_w = 0;
    std::vector<S> W, b, dW, db;  // W: [in_c, out_c*k*k]

    int out_h() const { return (in_h - 1) * stride - 2 * pad + k; }
    int out_w() const { return (in_w - 1) * stride - 2 * pad + k; }
    int col_rows() const { return out_c * k * k; }
    int positions() const { return in_h * in_w; }

    void init(std::string layer_name, int ic, int oc, int ih, int iw, Rng& rng) {
        name = std::move(layer_name);
        in_c = ic; out_c = oc; in_h = ih; in_w = iw;
        W.resize(static_cast<size_t>(in_c) * col_rows());
        b.assign(static_cast<size_t>(out_c), S(0));
        dW.assign(W.size(), S(0));
        db.assign(b.size(), S(0));
        double scale = std::sqrt(2.0 / (static_cast<double>(in_c) * k * k));
        for (auto& w : W) w = static_cast<S>(rng.normal() * scale);
    }

    Tensor<S> forward(const Tensor<S>& x) const {
        if (x.shape != std::vector<int>{in_c, in_h, in_w})
            throw StructuralError("convT " + name + ": input shape mismatch");
        std::vector<S> col(static_cast<size_t>(col_rows()) * positions());
        Map<S>(col.data(), col_rows(), positions()).noalias() =
            CMap<S>(W.data(), in_c, col_rows()).transpose() *
            CMap<S>(x.v.data(), in_c, positions());
        Tensor<S> y({out_c, out_h(), out_w()});
        col2im(col.data(), out_c, out_h(), out_w(), k, stride, pad, y.v.data());
        const int spatial = out_h() * out_w();
        for (int oc = 0; oc < out_c; ++oc) {
            S* row = y.v.data() + static_cast<size_t>(oc) * spatial;
            for (int p = 0; p < spatial; ++p) row[p] += b[oc];
        }
        return y;
    }

    Tensor<S> backward_data(const Tensor<S>& dy) const {
        std::vector<S> dcol(static_cast<size_t>(col_rows()) * positions());
        im2col(dy.v.data(), out_c, out_h(), out_w(), k, stride, pad, dcol.data());
        Tensor<S> dx({in_c, in_h, in_w});
        Map<S>(dx.v.data(), in_c, positions()).noalias() =
            CMap<S>(W.data(), in_c, col_rows()) * CMap<S>(dcol.data(), col_rows(), positions());
        return dx;
    }

    void backward_params(const Tensor<S>& dy, const Tensor<S>& x_in) {
        std::vector<S> dcol(static_cast<size_t>(col_rows()) * positions());
        im2col(dy.v.data(), out_c, out_h(), out_w(), k, stride, pad, dcol.data());
        Map<S>(dW.data(), in_c, col_rows()).noalias() +=
            CMap<S>(x_in.v.data(), in_c, positions()) *
            CMap<S>(dcol.data(), col_rows(), positions()).transpose();
        const int spatial = out_h() * out_w();
        for (int oc = 0; oc < out_c; ++oc) {
            const S* row = dy.v.data() + static_cast<size_t>(oc) * spatial;
            S acc = S(0);
            for (int p = 0; p < spatial; ++p) acc += row[p];
            db[oc] += acc;
        }
    }
};

template <typename S>
struct Linear {
    std::string name;
    int in_dim = 0, out_dim = 0;
    std::vector<S> W, b, dW, db;  // W: [out, in]

    void init(std::string layer_name, int in, int out, Rng& rng, double scale_override = -1.0) {
        name = std::move(layer_name);
        in_dim = in; out_dim = out;
        W.resize(static_cast<size_t>(out) * in);
        b.assign(static_cast<size_t>(out), S(0));
        dW.assign(W.size(), S(0));
        db.assign(b.size(), S(0));
        double scale = scale_override > 0 ? scale_override : std::sqrt(2.0 / in);
        for (auto& w : W) w = static_cast<S>(rng.normal() * scale);
    }

    std::vector<S> forward(const std::vector<S>& x) const {
        if (static_cast<int>(x.size()) != in_dim)
            throw StructuralError("linear " + name + ": input size mismatch");
        std::vector<S> y(static_cast<size_t>(out_dim));
        Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(y.data(), out_dim).noalias() =
            CMap<S>(W.data(), out_dim, in_dim) *
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(x.data(), in_dim);
        for (int i = 0; i < out_dim; ++i) y[i] += b[i];
        return y;
    }

    std::vector<S> backward_data(const std::vector<S>& dy) const {
        std::vector<S> dx(static_cast<size_t>(in_dim));
        Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(dx.data(), in_dim).noalias() =
            CMap<S>(W.data(), out_dim, in_dim).transpose() *
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(dy.data(), out_dim);
        return dx;
    }

    void backward_params(const std::vector<S>& dy, const std::vector<S>& x) {
        Map<S>(dW.data(), out_dim, in_dim).noalias() +=
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(dy.data(), out_dim) *
            Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(x.data(), in_dim).transpose();
        for (int i = 0; i < out_dim; ++i) db[i] += dy[i];
    }
};

// ---------------------------------------------------------------------------
// Activations
// ---------------------------------------------------------------------------

template <typename S>
void relu_inplace(std::vector<S>& v) {
    for (auto& x : v)
        if (x < S(0)) x = S(0);
}

// grad *= [act > 0], where act is the post-ReLU activation
template <typename S>
void relu_backward_inplace(std::vector<S>& grad, const std::vector<S>& act) {
    for (size_t i = 0; i < grad.size(); ++i)
        if (!(act[i] > S(0))) grad[i] = S(0);
}

template <typename S>
void sigmoid_inplace(std::vector<S>& v) {
    for (auto& x : v) x = S(1) / (S(1) + std::exp(-x));
}

// ---------------------------------------------------------------------------
// Parameter registry + Adam
// ---------------------------------------------------------------------------

template <typename S>
struct ParamRef {
    std::string name;
    std::vector<S>* value;
    std::vector<S>* grad;
};

template <typename S>
void zero_grads(const std::vector<ParamRef<S>>& params) {
    for (const auto& p : params) std::fill(p.grad->begin(), p.grad->end(), S(0));
}

// digest over float32-cast little-endian parameter bytes, in registry order
template <typename S>
std::string param_digest(const std::vector<ParamRef<S>>& params) {
    Digest d;
    for (const auto& p : params) {
        d.update(p.name);
        for (S x : *p.value) d.update_scalar(static_cast<float>(x));
    }
    return d.hex();
}

template <typename S>
class Adam {
public:
    Adam() = default;
    Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void init(const std::vector<ParamRef<S>>& params) {
        m_.clear();
        v_.clear();
        for (const auto& p : params) {
            m_.emplace_back(p.value->size(), S(0));
            v_.emplace_back(p.value->size(), S(0));
        }
        t_ = 0;
    }

    void step(const std::vector<ParamRef<S>>& params, double lr) {
        if (m_.size() != params.size()) throw StructuralError("adam: registry size changed");
        ++t_;
        double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (size_t i = 0; i < params.size(); ++i) {
            auto& value = *params[i].value;
            auto& grad = *params[i].grad;
            auto& m = m_[i];
            auto& v = v_[i];
            for (size_t j = 0; j < value.size(); ++j) {
                double g = static_cast<double>(grad[j]);
                double mj = beta1_ * static_cast<double>(m[j]) + (1.0 - beta1_) * g;
                double vj = beta2_ * static_cast<double>(v[j]) + (1.0 - beta2_) * g * g;
                m[j] = static_cast<S>(mj);
                v[j] = static_cast<S>(vj);
                double update = lr * (mj / bc1) / (std::sqrt(vj / bc2) + eps_);
                value[j] = static_cast<S>(static_cast<double>(value[j]) - update);
            }
        }
    }

    int64_t step_count() const { return t_; }
    void set_step_count(int64_t t) { t_ = t; }
    std::vector<std::vector<S>>& first_moments() { return m_; }
    std::vector<std::vector<S>>& second_moments() { return v_; }

private:
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    int64_t t_ = 0;
    std::vector<std::vector<S>> m_, v_;
};

}  // namespace gla::nn
