#include "nsr/metrics.hpp"

#include "nsr/error.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace nsr {

double mse(const Image& x, const Image& y)
{
    require_shape(y, x.shape(), "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        sum += d * d;
    }
    return sum / static_cast<double>(x.size());
}

double psnr(const Image& x, const Image& y, double data_range)
{
    if (!(data_range > 0.0)) throw ParameterError("psnr: data range must be positive");
    const double e = mse(x, y);
    if (e == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(data_range * data_range / e);
}

double ssim(const Image& x, const Image& y, const SsimConfig& cfg)
{
    require_shape(y, x.shape(), "ssim");
    if (!(cfg.data_range > 0.0)) throw ParameterError("ssim: data range must be positive");
    if (cfg.window == 0 || cfg.window % 2 == 0) throw ParameterError("ssim: window size must be odd");
    if (x.height() < cfg.window || x.width() < cfg.window) throw InputError("ssim: image smaller than window");

    const auto radius = static_cast<std::ptrdiff_t>(cfg.window / 2);
    std::vector<double> g(cfg.window);
    for (std::ptrdiff_t k = -radius; k <= radius; ++k)
        g[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * static_cast<double>(k * k) / (cfg.sigma * cfg.sigma));

    const double c1 = (cfg.k1 * cfg.data_range) * (cfg.k1 * cfg.data_range);
    const double c2 = (cfg.k2 * cfg.data_range) * (cfg.k2 * cfg.data_range);
    const auto h = static_cast<std::ptrdiff_t>(x.height());
    const auto w = static_cast<std::ptrdiff_t>(x.width());

    double total = 0.0;
    for (std::ptrdiff_t i = 0; i < h; ++i) {
        for (std::ptrdiff_t j = 0; j < w; ++j) {
            double wsum = 0.0, mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (std::ptrdiff_t di = -radius; di <= radius; ++di) {
                const std::ptrdiff_t r = i + di;
                if (r < 0 || r >= h) continue;
                for (std::ptrdiff_t dj = -radius; dj <= radius; ++dj) {
                    const std::ptrdiff_t c = j + dj;
                    if (c < 0 || c >= w) continue;
                    const double wt = g[static_cast<std::size_t>(di + radius)] * g[static_cast<std::size_t>(dj + radius)];
                    const double a = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
                    const double b = y(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
                    wsum += wt;
                    mx += wt * a;
                    my += wt * b;
                    sxx += wt * (a * a);
                    syy += wt * (b * b);
                    sxy += wt * (a * b);
                }
            }
            mx /= wsum;
            my /= wsum;
            const double vx = sxx / wsum - mx * mx;
            const double vy = syy / wsum - my * my;
            const double cxy = sxy / wsum - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    }
    return total / static_cast<double>(h * w);
}

} // namespace nsr
