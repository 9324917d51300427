#include "nsr/nn.hpp"

#include "nsr/error.hpp"
#include "nsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>

namespace nsr::nn {

void Architecture::validate() const
{
    if (layers < 2) throw ParameterError("Architecture: at least 2 layers required");
    if (width < 1) throw ParameterError("Architecture: width must be >= 1");
}

Tensor Tensor::from_image(const Image& x)
{
    Tensor t(1, x.height(), x.width());
    std::copy(x.values().begin(), x.values().end(), t.data.begin());
    return t;
}

Image Tensor::to_image() const
{
    if (channels != 1) throw ContractError("Tensor::to_image: expected a single channel");
    return Image(height, width, data);
}

// ---------------------------------------------------------------------------
// Parameters

NetParams::NetParams(Architecture arch) : arch_(arch)
{
    arch_.validate();
    std::size_t offset = 0;
    for (std::size_t l = 0; l < arch_.layers; ++l) {
        kernel_offset_.push_back(offset);
        offset += arch_.out_channels(l) * arch_.in_channels(l) * kKernelTaps;
        bias_offset_.push_back(offset);
        offset += arch_.out_channels(l);
    }
    values_.assign(offset, 0.0);
}

std::span<double> NetParams::kernel(std::size_t layer)
{
    return std::span<double>(values_).subspan(kernel_offset_.at(layer), bias_offset_[layer] - kernel_offset_[layer]);
}

std::span<const double> NetParams::kernel(std::size_t layer) const
{
    return std::span<const double>(values_).subspan(kernel_offset_.at(layer),
                                                    bias_offset_[layer] - kernel_offset_[layer]);
}

std::span<double> NetParams::bias(std::size_t layer)
{
    return std::span<double>(values_).subspan(bias_offset_.at(layer), arch_.out_channels(layer));
}

std::span<const double> NetParams::bias(std::size_t layer) const
{
    return std::span<const double>(values_).subspan(bias_offset_.at(layer), arch_.out_channels(layer));
}

double NetParams::squared_norm() const
{
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
}

std::uint64_t NetParams::fingerprint() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(values_.data());
    for (std::size_t i = 0; i < values_.size() * sizeof(double); ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

NetParams init_params(const Architecture& arch, std::uint64_t seed)
{
    NetParams params(arch);
    Rng rng(seed);
    for (std::size_t l = 0; l < arch.layers; ++l) {
        const double bound = std::sqrt(1.0 / static_cast<double>(arch.in_channels(l) * kKernelTaps));
        for (double& w : params.kernel(l)) w = rng.uniform(-bound, bound);
        for (double& b : params.bias(l)) b = rng.uniform(-bound, bound);
    }
    return params;
}

// ---------------------------------------------------------------------------
// Convolution and its two adjoint pieces

namespace {

inline std::size_t wrap(std::size_t i, std::size_t delta, std::size_t n)
{
    // (i + delta - 1) mod n for delta in {0,1,2}
    return (i + delta + n - 1) % n;
}

void check_kernel(const Tensor& x, std::span<const double> kernel, std::span<const double> bias,
                  std::size_t out_channels)
{
    if (kernel.size() != out_channels * x.channels * kKernelTaps)
        throw ContractError("conv2d_circular: kernel size does not match channel counts");
    if (!bias.empty() && bias.size() != out_channels) throw ContractError("conv2d_circular: bias size mismatch");
}

/// grad wrt input of the bias-free convolution.
Tensor conv_transpose(const Tensor& g, std::span<const double> kernel, std::size_t in_channels)
{
    Tensor out(in_channels, g.height, g.width);
    const std::size_t h = g.height, w = g.width;
    for (std::size_t o = 0; o < g.channels; ++o)
        for (std::size_t c = 0; c < in_channels; ++c)
            for (std::size_t di = 0; di < kKernelSize; ++di)
                for (std::size_t dj = 0; dj < kKernelSize; ++dj) {
                    const double k = kernel[((o * in_channels + c) * kKernelSize + di) * kKernelSize + dj];
                    if (k == 0.0) continue;
                    for (std::size_t i = 0; i < h; ++i) {
                        const std::size_t si = wrap(i, di, h);
                        for (std::size_t j = 0; j < w; ++j) out.at(c, si, wrap(j, dj, w)) += k * g.at(o, i, j);
                    }
                }
    return out;
}

/// Accumulates kernel and bias gradients for one convolution.
void conv_param_grads(const Tensor& x, const Tensor& g, std::span<double> kernel_grad, std::span<double> bias_grad)
{
    const std::size_t h = x.height, w = x.width;
    for (std::size_t o = 0; o < g.channels; ++o) {
        double bsum = 0.0;
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) bsum += g.at(o, i, j);
        bias_grad[o] += bsum;
        for (std::size_t c = 0; c < x.channels; ++c)
            for (std::size_t di = 0; di < kKernelSize; ++di)
                for (std::size_t dj = 0; dj < kKernelSize; ++dj) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < h; ++i) {
                        const std::size_t si = wrap(i, di, h);
                        for (std::size_t j = 0; j < w; ++j) acc += g.at(o, i, j) * x.at(c, si, wrap(j, dj, w));
                    }
                    kernel_grad[((o * x.channels + c) * kKernelSize + di) * kKernelSize + dj] += acc;
                }
    }
}

} // namespace

Tensor conv2d_circular(const Tensor& x, std::span<const double> kernel, std::span<const double> bias,
                       std::size_t out_channels)
{
    check_kernel(x, kernel, bias, out_channels);
    Tensor out(out_channels, x.height, x.width);
    const std::size_t h = x.height, w = x.width;
    for (std::size_t o = 0; o < out_channels; ++o) {
        if (!bias.empty()) std::fill_n(out.data.begin() + static_cast<std::ptrdiff_t>(o * out.plane()), out.plane(), bias[o]);
        for (std::size_t c = 0; c < x.channels; ++c)
            for (std::size_t di = 0; di < kKernelSize; ++di)
                for (std::size_t dj = 0; dj < kKernelSize; ++dj) {
                    const double k = kernel[((o * x.channels + c) * kKernelSize + di) * kKernelSize + dj];
                    if (k == 0.0) continue;
                    for (std::size_t i = 0; i < h; ++i) {
                        const std::size_t si = wrap(i, di, h);
                        for (std::size_t j = 0; j < w; ++j) out.at(o, i, j) += k * x.at(c, si, wrap(j, dj, w));
                    }
                }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Network

ForwardCache forward(const NetParams& params, const Image& x, const LinOp* projector)
{
    const Architecture& arch = params.arch();
    if (projector && (projector->in_shape() != x.shape() || projector->out_shape() != x.shape()))
        throw ContractError("nn::forward: projector shape differs from input");

    ForwardCache cache;
    cache.projector = projector;
    cache.fingerprint = params.fingerprint();
    Tensor a = Tensor::from_image(x);
    for (std::size_t l = 0; l < arch.layers; ++l) {
        Tensor z = conv2d_circular(a, params.kernel(l), params.bias(l), arch.out_channels(l));
        cache.inputs.push_back(std::move(a));
        if (l + 1 < arch.layers) {
            a = z;
            for (double& v : a.data) v = v > 0.0 ? v : 0.0;
        }
        cache.pre.push_back(std::move(z));
    }
    cache.correction = cache.pre.back().to_image();
    cache.out = projector ? x + projector->apply(cache.correction) : x + cache.correction;
    return cache;
}

Image correction(const NetParams& params, const Image& x)
{
    return forward(params, x).correction;
}

Gradients backward(const NetParams& params, const ForwardCache& cache, const Image& grad_out)
{
    const Architecture& arch = params.arch();
    if (cache.pre.size() != arch.layers || cache.fingerprint != params.fingerprint())
        throw ContractError("nn::backward: cache does not belong to these parameters");
    require_shape(grad_out, cache.out.shape(), "nn::backward");

    Gradients grads{NetParams(arch), grad_out};
    const Image grad_u = cache.projector ? cache.projector->adjoint(grad_out) : grad_out;
    Tensor g = Tensor::from_image(grad_u);
    for (std::size_t l = arch.layers; l-- > 0;) {
        conv_param_grads(cache.inputs[l], g, grads.params.kernel(l), grads.params.bias(l));
        Tensor g_in = conv_transpose(g, params.kernel(l), arch.in_channels(l));
        if (l > 0) {
            const Tensor& z = cache.pre[l - 1];
            for (std::size_t i = 0; i < g_in.data.size(); ++i)
                if (!(z.data[i] > 0.0)) g_in.data[i] = 0.0;
        }
        g = std::move(g_in);
    }
    grads.input += g.to_image();
    return grads;
}

// ---------------------------------------------------------------------------
// Optimizer

AdamState make_adam(const NetParams& params, double lr, double weight_decay)
{
    AdamState s;
    s.lr = lr;
    s.weight_decay = weight_decay;
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
    return s;
}

void adam_step(NetParams& params, const NetParams& grads, AdamState& state)
{
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ContractError("adam_step: parameter, gradient and moment sizes differ");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    auto theta = params.values();
    auto grad = grads.values();
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i] + state.weight_decay * theta[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

std::vector<bool> relu_pattern(const ForwardCache& cache)
{
    std::vector<bool> pattern;
    for (std::size_t l = 0; l + 1 < cache.pre.size(); ++l)
        for (double v : cache.pre[l].data) pattern.push_back(v > 0.0);
    return pattern;
}

} // namespace

double grad_check(const Architecture& arch, std::uint64_t seed, double eps, Shape input)
{
    if (!(eps > 0.0)) throw ParameterError("grad_check: eps must be positive");
    if (input.height > 16 || input.width > 16) throw ParameterError("grad_check: input must be at most 16x16");

    constexpr int kMaxDraws = 50;
    NetParams params = init_params(arch, seed);
    Rng rng(mix_seed(seed, 1));
    for (int draw = 0; draw < kMaxDraws; ++draw) {
        Image x = Image::random_normal(input, rng);
        const Image target = Image::random_normal(input, rng);

        const ForwardCache cache = forward(params, x);
        const std::vector<bool> pattern = relu_pattern(cache);
        const Gradients analytic = backward(params, cache, 2.0 * (cache.out - target));

        // Central difference of the loss; nullopt if the perturbation crossed a ReLU kink.
        auto central = [&](double& coord) -> std::optional<double> {
            const double saved = coord;
            double side[2];
            for (int k = 0; k < 2; ++k) {
                coord = saved + (k == 0 ? eps : -eps);
                const ForwardCache c = forward(params, x);
                if (relu_pattern(c) != pattern) {
                    coord = saved;
                    return std::nullopt;
                }
                const Image r = c.out - target;
                side[k] = dot(r, r);
            }
            coord = saved;
            return (side[0] - side[1]) / (2.0 * eps);
        };

        std::vector<double> a(analytic.params.values().begin(), analytic.params.values().end());
        a.insert(a.end(), analytic.input.values().begin(), analytic.input.values().end());
        std::vector<double> n;
        n.reserve(a.size());
        bool crossed = false;
        for (double& theta : params.values()) {
            const auto d = central(theta);
            if (!d) {
                crossed = true;
                break;
            }
            n.push_back(*d);
        }
        for (std::size_t i = 0; !crossed && i < x.size(); ++i) {
            const auto d = central(x[i]);
            if (!d) crossed = true;
            else n.push_back(*d);
        }
        if (crossed) continue;

        double scale = 0.0;
        for (double v : a) scale = std::max(scale, std::abs(v));
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double denom = std::max({std::abs(a[i]), std::abs(n[i]), 1e-3 * scale});
            if (denom > 0.0) worst = std::max(worst, std::abs(a[i] - n[i]) / denom);
        }
        return worst;
    }
    throw std::runtime_error("grad_check: every draw crossed a ReLU kink; use a smaller eps");
}

double conv_layer_norm(const NetParams& params, std::size_t layer, Shape grid, int iters, std::uint64_t seed)
{
    const Architecture& arch = params.arch();
    if (layer >= arch.layers) throw ContractError("conv_layer_norm: layer out of range");
    const std::size_t cin = arch.in_channels(layer), cout = arch.out_channels(layer);
    Rng rng(seed);
    Tensor v(cin, grid.height, grid.width);
    for (double& e : v.data) e = rng.normal();
    auto tnorm = [](const Tensor& t) {
        double s = 0.0;
        for (double e : t.data) s += e * e;
        return std::sqrt(s);
    };
    double lambda = 0.0;
    for (int k = 0; k < iters; ++k) {
        const double nv = tnorm(v);
        if (nv == 0.0) return 0.0;
        for (double& e : v.data) e /= nv;
        Tensor w = conv_transpose(conv2d_circular(v, params.kernel(layer), {}, cout), params.kernel(layer), cin);
        const double next = tnorm(w);
        v = std::move(w);
        if (std::abs(next - lambda) <= 1e-12 * next) {
            lambda = next;
            break;
        }
        lambda = next;
    }
    return std::sqrt(lambda);
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {
constexpr const char* kCheckpointMagic = "nsr-checkpoint";
constexpr int kCheckpointVersion = 1;

void write_values(std::ostream& out, std::span<const double> values)
{
    char buf[32];
    for (double v : values) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
}

void expect_token(std::istream& in, const std::string& want)
{
    std::string got;
    if (!(in >> got) || got != want) throw InputError("checkpoint: expected '" + want + "', got '" + got + "'");
}

std::size_t read_size(std::istream& in)
{
    std::size_t v;
    if (!(in >> v)) throw InputError("checkpoint: expected an integer");
    return v;
}

void read_values(std::istream& in, std::span<double> values)
{
    std::string tok;
    for (double& v : values) {
        if (!(in >> tok)) throw InputError("checkpoint: truncated payload");
        char* end = nullptr;
        v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0' || !std::isfinite(v))
            throw InputError("checkpoint: bad value '" + tok + "'");
    }
}
} // namespace

void save_checkpoint(const NetParams& params, std::ostream& out)
{
    const Architecture& arch = params.arch();
    out << kCheckpointMagic << " v" << kCheckpointVersion << "\n";
    out << "layers " << arch.layers << "\nwidth " << arch.width << "\n";
    for (std::size_t l = 0; l < arch.layers; ++l) {
        out << "layer " << l << " kernel " << arch.out_channels(l) << " " << arch.in_channels(l) << " "
            << kKernelSize << " " << kKernelSize << "\n";
        write_values(out, params.kernel(l));
        out << "layer " << l << " bias " << arch.out_channels(l) << "\n";
        write_values(out, params.bias(l));
    }
    out << "end\n";
}

NetParams load_checkpoint(std::istream& in)
{
    expect_token(in, kCheckpointMagic);
    expect_token(in, "v" + std::to_string(kCheckpointVersion));
    Architecture arch;
    expect_token(in, "layers");
    arch.layers = read_size(in);
    expect_token(in, "width");
    arch.width = read_size(in);
    NetParams params(arch);
    for (std::size_t l = 0; l < arch.layers; ++l) {
        expect_token(in, "layer");
        if (read_size(in) != l) throw InputError("checkpoint: layers out of order");
        expect_token(in, "kernel");
        const std::size_t o = read_size(in), c = read_size(in), kh = read_size(in), kw = read_size(in);
        if (o != arch.out_channels(l) || c != arch.in_channels(l) || kh != kKernelSize || kw != kKernelSize)
            throw InputError("checkpoint: kernel shape does not match architecture");
        read_values(in, params.kernel(l));
        expect_token(in, "layer");
        if (read_size(in) != l) throw InputError("checkpoint: layers out of order");
        expect_token(in, "bias");
        if (read_size(in) != arch.out_channels(l)) throw InputError("checkpoint: bias shape does not match");
        read_values(in, params.bias(l));
    }
    expect_token(in, "end");
    return params;
}

void save_checkpoint(const NetParams& params, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write checkpoint " + path);
    save_checkpoint(params, out);
}

NetParams load_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read checkpoint " + path);
    return load_checkpoint(in);
}

} // namespace nsr::nn
