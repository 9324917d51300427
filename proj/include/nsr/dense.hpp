#pragma once

#include "nsr/image.hpp"

#include <Eigen/Dense>

namespace nsr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest dimension accepted by dense_svd.
inline constexpr Eigen::Index kMaxSvdDim = 1024;

/// Thin SVD A = U diag(s) V^T of a small dense operator.
///
/// in_shape/out_shape record how flattened columns of V and U map back to
/// images; dense_svd on a bare matrix uses column shapes (n x 1).
struct SvdFactors {
    Matrix u;          ///< m x r, orthonormal columns
    Vector s;          ///< r singular values, nonincreasing
    Matrix v;          ///< n x r, orthonormal columns
    double rank_tol = 0.0;
    Shape in_shape;
    Shape out_shape;

    /// Number of singular values strictly above rank_tol.
    Eigen::Index rank() const;
};

/// rank_tol is s_max * 1e-12 * max(rows, cols).
SvdFactors dense_svd(const Matrix& a);
SvdFactors dense_svd(const Matrix& a, Shape in_shape, Shape out_shape);

/// Moore-Penrose solution sum_{s_i > rank_tol} <y,u_i>/s_i v_i.
Image pseudo_inverse_apply(const SvdFactors& svd, const Image& y);

Vector flatten(const Image& x);
Image unflatten(const Vector& v, Shape shape);

} // namespace nsr
