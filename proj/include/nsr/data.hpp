#pragma once

#include "nsr/image.hpp"
#include "nsr/linop.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace nsr {

/// ID squares carry horizontal 1/0 stripes; OOD squares are constant 0.5.
enum class SampleKind { id, ood };

std::string_view to_string(SampleKind kind);
SampleKind parse_sample_kind(std::string_view name);

struct SampleSpec {
    std::size_t image_size = 64;
    std::size_t patch_size = 20;
    SampleKind kind = SampleKind::id;
    std::uint64_t seed = 0;
};

struct SquareSample {
    Image image;
    std::size_t top = 0;   ///< zero-based row of the patch's first row
    std::size_t left = 0;  ///< zero-based column of the patch's first column
};

/// Zero background with one patch whose top-left corner is drawn uniformly
/// from the even coordinates {0, 2, ..., image_size - patch_size}.
SquareSample gen_square_sample(const SampleSpec& spec);

struct NoiseSpec {
    double sigma = 0.05;
    std::uint64_t seed = 0;
};

struct Measurement {
    Image y;
    double delta = 0.0;  ///< |z|, the realized noise norm
};

/// y = A x + z with z i.i.d. N(0, sigma^2) (Marsaglia polar method on an
/// mt19937_64 stream). With a support mask the noise is restricted to it.
Measurement gen_measurement(const LinOp& op, const Image& x, const NoiseSpec& noise,
                            const std::optional<LinOp>& support = std::nullopt);

struct SamplePair {
    Image x;
    Image y;
    double delta = 0.0;
    std::uint64_t seed = 0;
    std::size_t top = 0;
    std::size_t left = 0;
};

struct DatasetSpec {
    std::size_t n = 1;
    SampleKind kind = SampleKind::id;
    std::uint64_t base_seed = 0;
    std::size_t image_size = 64;
    std::size_t patch_size = 20;
    double sigma = 0.05;
};

/// Sample i uses image seed base_seed + i and noise seed mix_seed(base_seed + i, 1).
std::vector<SamplePair> make_dataset(const DatasetSpec& spec, const LinOp& op,
                                     const std::optional<LinOp>& support = std::nullopt);

/// Writes x_XXXX.pgm / y_XXXX.pgm and manifest.csv (index,kind,seed,top,left,delta) into dir.
void export_dataset(const std::vector<SamplePair>& pairs, SampleKind kind, const std::string& dir,
                    double data_range = 1.0);

} // namespace nsr
