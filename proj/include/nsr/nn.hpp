#pragma once

#include "nsr/image.hpp"
#include "nsr/linop.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace nsr::nn {

/// Plain CNN with 3x3 circular-padding convolutions and ReLU between layers:
/// first layer 1 -> width, middle width -> width, last width -> 1.
struct Architecture {
    std::size_t layers = 5;
    std::size_t width = 6;

    std::size_t in_channels(std::size_t layer) const { return layer == 0 ? 1 : width; }
    std::size_t out_channels(std::size_t layer) const { return layer + 1 == layers ? 1 : width; }
    void validate() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

inline constexpr std::size_t kKernelSize = 3;
inline constexpr std::size_t kKernelTaps = kKernelSize * kKernelSize;

/// Channel-major stack of equally sized planes.
struct Tensor {
    std::size_t channels = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::size_t c, std::size_t h, std::size_t w) : channels(c), height(h), width(w), data(c * h * w, 0.0) {}
    static Tensor from_image(const Image& x);
    Image to_image() const;

    std::size_t plane() const { return height * width; }
    double& at(std::size_t c, std::size_t i, std::size_t j) { return data[(c * height + i) * width + j]; }
    double at(std::size_t c, std::size_t i, std::size_t j) const { return data[(c * height + i) * width + j]; }
};

/// All weights in one contiguous buffer, layer by layer: kernel (out x in x 3 x 3) then bias (out).
class NetParams {
public:
    explicit NetParams(Architecture arch);

    const Architecture& arch() const { return arch_; }
    std::size_t size() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    std::span<double> kernel(std::size_t layer);
    std::span<const double> kernel(std::size_t layer) const;
    std::span<double> bias(std::size_t layer);
    std::span<const double> bias(std::size_t layer) const;

    /// Sum of squared parameters.
    double squared_norm() const;
    /// FNV-1a over the raw parameter bytes.
    std::uint64_t fingerprint() const;

    friend bool operator==(const NetParams&, const NetParams&) = default;

private:
    Architecture arch_;
    std::vector<double> values_;
    std::vector<std::size_t> kernel_offset_;
    std::vector<std::size_t> bias_offset_;
};

/// Kernels and biases uniform on +-sqrt(1/fan_in), fan_in = in_channels * 9.
NetParams init_params(const Architecture& arch, std::uint64_t seed);

/// out[o,i,j] = bias[o] + sum_{c,di,dj} k[o,c,di,dj] x[c,(i+di-1) mod H,(j+dj-1) mod W]
Tensor conv2d_circular(const Tensor& x, std::span<const double> kernel, std::span<const double> bias,
                       std::size_t out_channels);

/// Activations recorded by forward() for backward().
struct ForwardCache {
    Image out;
    Image correction;                ///< U(x), the last convolution output
    std::vector<Tensor> inputs;      ///< input to each convolution
    std::vector<Tensor> pre;         ///< output of each convolution before ReLU
    const LinOp* projector = nullptr;
    std::uint64_t fingerprint = 0;
};

/// out = x + U(x), or x + P U(x) when an output projector P is given.
/// The projector must outlive the cache.
ForwardCache forward(const NetParams& params, const Image& x, const LinOp* projector = nullptr);

/// U(x) alone.
Image correction(const NetParams& params, const Image& x);

struct Gradients {
    NetParams params;
    Image input;
};

/// Reverse-mode derivative of forward(); ReLU'(0) is taken as 0.
/// Throws ContractError if the parameters changed since the forward pass.
Gradients backward(const NetParams& params, const ForwardCache& cache, const Image& grad_out);

/// Adam with coupled L2 weight decay (grad += weight_decay * param).
struct AdamState {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;
    std::int64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

AdamState make_adam(const NetParams& params, double lr = 1e-3, double weight_decay = 0.0);
void adam_step(NetParams& params, const NetParams& grads, AdamState& state);

/// Max entrywise relative error of backward() against central differences of
/// |forward(x) - t|^2 over all parameters and the input, for random x, t.
/// Relative error is |a - n| / max(|a|, |n|, 1e-3 * max_k |a_k|); the floor keeps
/// finite-difference round-off on near-zero entries from dominating.
/// Draws where some +-eps perturbation flips a ReLU are discarded and redrawn,
/// since central differences are invalid across a kink.
double grad_check(const Architecture& arch, std::uint64_t seed, double eps, Shape input = {8, 8});

/// Spectral norm of the linear (bias-free) part of one convolution on an H x W grid,
/// by power iteration.
double conv_layer_norm(const NetParams& params, std::size_t layer, Shape grid, int iters = 500,
                       std::uint64_t seed = 7);

/// Versioned text checkpoint: header, architecture, per-layer shapes, %.17g payloads.
void save_checkpoint(const NetParams& params, std::ostream& out);
NetParams load_checkpoint(std::istream& in);
void save_checkpoint(const NetParams& params, const std::string& path);
NetParams load_checkpoint(const std::string& path);

} // namespace nsr::nn
