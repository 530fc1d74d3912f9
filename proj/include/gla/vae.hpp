#pragma once

// Convolutional VAE over RA frames: strided-conv encoder to a diagonal
// gaussian posterior, reparameterized sampling, transposed-conv decoder with
// sigmoid output, and the two ELBO terms (sum over pixels/dims, mean over
// batch is applied by the caller).

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gla/common.hpp"
#include "gla/nn.hpp"
#include "gla/tensor.hpp"

namespace gla::vae {

constexpr double kLogVarClamp = 10.0;  // log-variance clamped to [-10, 10]
constexpr double kBceEps = 1e-7;

struct VaeArch {
    int input_channels = 3;
    int input_h = 64, input_w = 64;
    std::vector<int> conv_channels = {32, 64, 128, 256};
    int latent_dim = 32;
    // kernel 4, stride 2, pad 1 per block throughout

    int num_blocks() const { return static_cast<int>(conv_channels.size()); }

    void validate() const {
        if (latent_dim < 2) throw ValidationError("arch: latent_dim must be >= 2");
        if (num_blocks() < 2 || num_blocks() > 4)
            throw ValidationError("arch: conv_channels must list 2..4 block widths");
        if (input_channels != 1 && input_channels != 3)
            throw ValidationError("arch: input_channels must be 1 or 3");
        int div = 1 << num_blocks();
        if (input_h % div != 0 || input_w % div != 0)
            throw ValidationError("arch: input size must be divisible by 2^num_blocks");
        if (input_h / div < 1 || input_w / div < 1 || input_h / (div / 2) < 2 || input_w / (div / 2) < 2)
            throw ValidationError("arch: input too small for the block count");
        for (int c : conv_channels)
            if (c < 1) throw ValidationError("arch: conv channel widths must be >= 1");
    }

    int feat_h() const { return input_h >> num_blocks(); }
    int feat_w() const { return input_w >> num_blocks(); }
    int flat_dim() const { return conv_channels.back() * feat_h() * feat_w(); }

    nlohmann::json to_json() const {
        return {{"input_channels", input_channels},
                {"input_hw", {input_h, input_w}},
                {"conv_channels", conv_channels},
                {"latent_dim", latent_dim}};
    }

    static VaeArch from_json(const nlohmann::json& j) {
        VaeArch a;
        a.input_channels = j.at("input_channels").get<int>();
        a.input_h = j.at("input_hw").at(0).get<int>();
        a.input_w = j.at("input_hw").at(1).get<int>();
        a.conv_channels = j.at("conv_channels").get<std::vector<int>>();
        a.latent_dim = j.at("latent_dim").get<int>();
        return a;
    }
};

template <typename S>
struct LatentCode {
    std::vector<S> mu;
    std::vector<S> log_var;            // clamped
    std::optional<std::vector<S>> z;   // present only after sampling
};

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

template <typename S>
struct EncoderActs {
    std::vector<std::vector<S>> col;   // im2col cache per block
    std::vector<Tensor<S>> block_out;  // post-ReLU activations per block
    std::vector<S> mu;
    std::vector<S> log_var_raw;        // pre-clamp
    std::vector<S> log_var;
};

template <typename S>
struct Encoder {
    VaeArch arch;
    std::vector<nn::Conv2d<S>> blocks;
    nn::Linear<S> head_mu, head_log_var;

    void init(const VaeArch& a, Rng& rng) {
        arch = a;
        arch.validate();
        blocks.clear();
        int c = a.input_channels, h = a.input_h, w = a.input_w;
        for (int i = 0; i < a.num_blocks(); ++i) {
            nn::Conv2d<S> conv;
            conv.init("enc.conv" + std::to_string(i), c, a.conv_channels[i], h, w, rng);
            c = a.conv_channels[i];
            h = conv.out_h();
            w = conv.out_w();
            blocks.push_back(std::move(conv));
        }
        head_mu.init("enc.mu", a.flat_dim(), a.latent_dim, rng);
        head_log_var.init("enc.logvar", a.flat_dim(), a.latent_dim, rng);
    }

    // Deterministic; caches every block activation (block 3 feeds Grad-CAM).
    void forward(const Tensor<S>& x, EncoderActs<S>& acts) const {
        if (x.shape != std::vector<int>{arch.input_channels, arch.input_h, arch.input_w})
            throw StructuralError("encoder: frame shape does not match architecture");
        acts.col.assign(blocks.size(), {});
        acts.block_out.clear();
        const Tensor<S>* cur = &x;
        for (size_t i = 0; i < blocks.size(); ++i) {
            Tensor<S> y = blocks[i].forward(*cur, &acts.col[i]);
            nn::relu_inplace(y.v);
            acts.block_out.push_back(std::move(y));
            cur = &acts.block_out.back();
        }
        const std::vector<S>& flat = acts.block_out.back().v;
        acts.mu = head_mu.forward(flat);
        acts.log_var_raw = head_log_var.forward(flat);
        acts.log_var = acts.log_var_raw;
        for (auto& lv : acts.log_var)
            lv = std::clamp(lv, static_cast<S>(-kLogVarClamp), static_cast<S>(kLogVarClamp));
    }

    LatentCode<S> encode(const Tensor<S>& x) const {
        EncoderActs<S> acts;
        forward(x, acts);
        return {acts.mu, acts.log_var, std::nullopt};
    }

    // Shared backward walk. stop_after_block >= 0 returns the gradient w.r.t.
    // that block's post-ReLU activations instead of descending to the input.
    Tensor<S> backward_impl(const EncoderActs<S>& acts, const std::vector<S>& dmu,
                            const std::vector<S>& dlog_var, bool accumulate, int stop_after_block,
                            const Tensor<S>* input) {
        std::vector<S> dlv_raw = dlog_var;
        for (size_t i = 0; i < dlv_raw.size(); ++i) {
            double raw = static_cast<double>(acts.log_var_raw[i]);
            if (raw <= -kLogVarClamp || raw >= kLogVarClamp) dlv_raw[i] = S(0);
        }
        const std::vector<S>& flat = acts.block_out.back().v;
        std::vector<S> dflat = head_mu.backward_data(dmu);
        std::vector<S> dflat_lv = head_log_var.backward_data(dlv_raw);
        for (size_t i = 0; i < dflat.size(); ++i) dflat[i] += dflat_lv[i];
        if (accumulate) {
            head_mu.backward_params(dmu, flat);
            head_log_var.backward_params(dlv_raw, flat);
        }

        Tensor<S> d = acts.block_out.back();
        d.v = std::move(dflat);
        for (int i = static_cast<int>(blocks.size()) - 1; i >= 0; --i) {
            nn::relu_backward_inplace(d.v, acts.block_out[static_cast<size_t>(i)].v);
            if (accumulate) blocks[static_cast<size_t>(i)].backward_params(d, acts.col[static_cast<size_t>(i)]);
            if (i - 1 == stop_after_block) return blocks[static_cast<size_t>(i)].backward_data(d);
            d = blocks[static_cast<size_t>(i)].backward_data(d);
        }
        (void)input;
        return d;  // gradient w.r.t. the input frame
    }

    Tensor<S> backward_train(const EncoderActs<S>& acts, const std::vector<S>& dmu,
                             const std::vector<S>& dlog_var) {
        return backward_impl(acts, dmu, dlog_var, true, -1, nullptr);
    }

    // const path used by Grad-CAM: gradient w.r.t. block `block_index`'s
    // post-ReLU activations, no parameter-gradient side effects.
    Tensor<S> backward_data_to_block(const EncoderActs<S>& acts, const std::vector<S>& dmu,
                                     int block_index) const {
        std::vector<S> zero_dlv(acts.log_var.size(), S(0));
        return const_cast<Encoder<S>*>(this)->backward_impl(acts, dmu, zero_dlv, false, block_index,
                                                            nullptr);
    }
};

// ---------------------------------------------------------------------------
// Reparameterization: z = mu + exp(0.5*log_var) ⊙ eps
// ---------------------------------------------------------------------------

template <typename S>
std::vector<S> reparameterize(const std::vector<S>& mu, const std::vector<S>& log_var,
                              const std::vector<S>& eps) {
    if (mu.size() != log_var.size() || mu.size() != eps.size())
        throw StructuralError("reparameterize: dimension mismatch");
    std::vector<S> z(mu.size());
    for (size_t i = 0; i < z.size(); ++i)
        z[i] = mu[i] + std::exp(S(0.5) * log_var[i]) * eps[i];
    return z;
}

// dz -> (dmu += dz, dlog_var += dz ⊙ eps ⊙ sigma / 2)
template <typename S>
void reparameterize_backward(const std::vector<S>& dz, const std::vector<S>& log_var,
                             const std::vector<S>& eps, std::vector<S>& dmu,
                             std::vector<S>& dlog_var) {
    for (size_t i = 0; i < dz.size(); ++i) {
        dmu[i] += dz[i];
        dlog_var[i] += dz[i] * eps[i] * std::exp(S(0.5) * log_var[i]) * S(0.5);
    }
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

template <typename S>
struct DecoderActs {
    std::vector<S> z;                   // decoder input
    std::vector<S> fc_act;              // post-ReLU fc output (flat)
    std::vector<Tensor<S>> block_in;    // input tensor of each transposed conv
    Tensor<S> xhat;                     // post-sigmoid reconstruction
};

template <typename S>
struct Decoder {
    VaeArch arch;
    nn::Linear<S> fc;
    std::vector<nn::ConvTranspose2d<S>> blocks;  // deepest width down to input_channels

    void init(const VaeArch& a, Rng& rng) {
        arch = a;
        fc.init("dec.fc", a.latent_dim, a.flat_dim(), rng);
        blocks.clear();
        int h = a.feat_h(), w = a.feat_w();
        std::vector<int> widths = a.conv_channels;
        for (int i = a.num_blocks() - 1; i >= 0; --i) {
            int in_c = widths[static_cast<size_t>(i)];
            int out_c = i > 0 ? widths[static_cast<size_t>(i - 1)] : a.input_channels;
            nn::ConvTranspose2d<S> conv;
            conv.init("dec.convt" + std::to_string(a.num_blocks() - 1 - i), in_c, out_c, h, w, rng);
            h = conv.out_h();
            w = conv.out_w();
            blocks.push_back(std::move(conv));
        }
    }

    // xhat strictly inside (0,1) via the final sigmoid
    Tensor<S> forward(const std::vector<S>& z, DecoderActs<S>& acts) const {
        if (static_cast<int>(z.size()) != arch.latent_dim)
            throw StructuralError("decoder: z dimension mismatch");
        acts.z = z;
        acts.fc_act = fc.forward(z);
        nn::relu_inplace(acts.fc_act);
        acts.block_in.clear();
        Tensor<S> cur({arch.conv_channels.back(), arch.feat_h(), arch.feat_w()});
        cur.v = acts.fc_act;
        for (size_t i = 0; i < blocks.size(); ++i) {
            acts.block_in.push_back(cur);
            Tensor<S> y = blocks[i].forward(cur);
            if (i + 1 < blocks.size())
                nn::relu_inplace(y.v);
            else
                nn::sigmoid_inplace(y.v);
            cur = std::move(y);
        }
        acts.xhat = cur;
        return acts.xhat;
    }

    Tensor<S> decode(const std::vector<S>& z) const {
        DecoderActs<S> acts;
        return forward(z, acts);
    }

    // d_pre is the gradient w.r.t. the final pre-sigmoid logits (callers fold
    // the BCE shortcut xhat - x in). Returns dz.
    std::vector<S> backward_train(const DecoderActs<S>& acts, Tensor<S> d_pre) {
        Tensor<S> d = std::move(d_pre);
        for (int i = static_cast<int>(blocks.size()) - 1; i >= 0; --i) {
            blocks[static_cast<size_t>(i)].backward_params(d, acts.block_in[static_cast<size_t>(i)]);
            d = blocks[static_cast<size_t>(i)].backward_data(d);
            if (i > 0) nn::relu_backward_inplace(d.v, acts.block_in[static_cast<size_t>(i)].v);
        }
        nn::relu_backward_inplace(d.v, acts.fc_act);
        fc.backward_params(d.v, /*x=*/last_z_);
        return fc.backward_data(d.v);
    }

    // Training needs z for the fc weight gradient; stash it alongside the acts.
    void remember_z(const std::vector<S>& z) { last_z_ = z; }

private:
    std::vector<S> last_z_;
};

// ---------------------------------------------------------------------------
// Losses (sum reduction; batch averaging is the trainer's job)
// ---------------------------------------------------------------------------

// L = -sum_u [x log xhat + (1-x) log(1-xhat)], xhat clamped to [eps, 1-eps]
template <typename S>
double recon_loss_bce(const Tensor<S>& x, const Tensor<S>& xhat) {
    if (x.shape != xhat.shape) throw StructuralError("bce: shape mismatch");
    double loss = 0.0;
    for (size_t i = 0; i < x.v.size(); ++i) {
        double xi = static_cast<double>(x.v[i]);
        if (xi < 0.0 || xi > 1.0) throw ValidationError("bce: target outside [0,1]");
        double xh = std::clamp(static_cast<double>(xhat.v[i]), kBceEps, 1.0 - kBceEps);
        loss -= xi * std::log(xh) + (1.0 - xi) * std::log(1.0 - xh);
    }
    return loss;
}

// L = -0.5 * sum_j (1 + log_var - mu^2 - exp(log_var)); always >= 0
template <typename S>
double kld_loss(const std::vector<S>& mu, const std::vector<S>& log_var) {
    if (mu.size() != log_var.size()) throw StructuralError("kld: dimension mismatch");
    double loss = 0.0;
    for (size_t i = 0; i < mu.size(); ++i) {
        double m = static_cast<double>(mu[i]);
        double lv = static_cast<double>(log_var[i]);
        if (!std::isfinite(m) || !std::isfinite(lv)) throw ValidationError("kld: non-finite input");
        loss += -0.5 * (1.0 + lv - m * m - std::exp(lv));
    }
    return loss;
}

template <typename S>
double kld_loss(const LatentCode<S>& code) {
    return kld_loss(code.mu, code.log_var);
}

// gradients of the (sum-reduced) KLD: dmu += s*mu, dlog_var += s*(exp(lv)-1)/2
template <typename S>
void kld_backward(const std::vector<S>& mu, const std::vector<S>& log_var, S scale,
                  std::vector<S>& dmu, std::vector<S>& dlog_var) {
    for (size_t i = 0; i < mu.size(); ++i) {
        dmu[i] += scale * mu[i];
        dlog_var[i] += scale * S(0.5) * (std::exp(log_var[i]) - S(1));
    }
}

}  // namespace gla::vae
