#pragma once

#include "nsr/image.hpp"

namespace nsr {

double mse(const Image& x, const Image& y);

/// 10 log10(L^2 / mse); +infinity for identical images.
double psnr(const Image& x, const Image& y, double data_range = 1.0);

struct SsimConfig {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double data_range = 1.0;
};

/// Mean SSIM over pixel-centred Gaussian windows. Near the border the window
/// is cut to the image and its weights renormalized to sum one.
double ssim(const Image& x, const Image& y, const SsimConfig& cfg = {});

} // namespace nsr
