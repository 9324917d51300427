#pragma once

#include "nsr/dense.hpp"
#include "nsr/linop.hpp"

#include <cstdint>
#include <vector>

namespace nsr {

/// Vertical stripe mask: for each k, columns {4k+1, 4k+2} are observed.
/// With one_based set these are read as 1-based column numbers, i.e. the
/// zero-based columns {4k, 4k+1}.
struct StripeMaskSpec {
    std::size_t image_width = 64;
    std::vector<std::size_t> k_range{0, 1, 2, 3};
    bool one_based = true;
};

/// Sorted zero-based observed columns; throws ContractError if any is out of range.
std::vector<std::size_t> stripe_columns(const StripeMaskSpec& spec);

/// Per-column prefix sums (discrete vertical integration).
LinOp make_cumsum(std::size_t height, std::size_t width);

/// Zeroes every column outside the stripe set. Self-adjoint and idempotent.
LinOp make_stripe_mask(const StripeMaskSpec& spec, std::size_t height);

/// outer o inner.
LinOp compose(const LinOp& outer, const LinOp& inner);

/// Orthogonal basis B acting on flattened images, with coefficients outside
/// kept_indices zero-filled: x -> S*S B x.
struct SubsampledUnitarySpec {
    Matrix basis;
    std::vector<std::size_t> kept_indices;
    Shape shape;  ///< image shape; shape.size() must equal basis.rows()
};

LinOp make_subsampled_unitary(const SubsampledUnitarySpec& spec);

/// Seeded n x n orthogonal matrix (Householder QR of a Gaussian matrix).
Matrix random_orthogonal(std::size_t n, std::uint64_t seed);

/// Largest input or output dimension accepted by to_dense.
inline constexpr std::size_t kMaxDenseDim = 4096;

/// Column j is apply(e_j).
Matrix to_dense(const LinOp& op);
/// Wraps a dense matrix; flattening follows the row-major image layout.
LinOp make_dense(Matrix a, Shape in_shape, Shape out_shape);
/// dense_svd(to_dense(op)) with image shapes attached.
SvdFactors svd_of(const LinOp& op);

/// The masked vertical integration A = M K along with its factors.
struct MaskedIntegration {
    LinOp mask;
    LinOp cumsum;
    LinOp forward;
};

MaskedIntegration make_masked_integration(Shape shape, const StripeMaskSpec& spec);

} // namespace nsr
