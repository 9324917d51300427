#include "nsr/dense.hpp"

#include "nsr/error.hpp"

#include <algorithm>

namespace nsr {

Eigen::Index SvdFactors::rank() const
{
    return (s.array() > rank_tol).count();
}

SvdFactors dense_svd(const Matrix& a)
{
    return dense_svd(a, Shape{static_cast<std::size_t>(a.cols()), 1},
                     Shape{static_cast<std::size_t>(a.rows()), 1});
}

SvdFactors dense_svd(const Matrix& a, Shape in_shape, Shape out_shape)
{
    if (a.rows() == 0 || a.cols() == 0) throw InputError("dense_svd: empty matrix");
    if (a.rows() > kMaxSvdDim || a.cols() > kMaxSvdDim)
        throw InputError("dense_svd: matrix exceeds the 1024x1024 size guard");
    if (!a.allFinite()) throw InputError("dense_svd: non-finite entries");
    if (static_cast<Eigen::Index>(in_shape.size()) != a.cols() ||
        static_cast<Eigen::Index>(out_shape.size()) != a.rows())
        throw ContractError("dense_svd: image shapes do not match matrix dimensions");

    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors f;
    f.u = svd.matrixU();
    f.s = svd.singularValues();
    f.v = svd.matrixV();
    f.in_shape = in_shape;
    f.out_shape = out_shape;
    const double s_max = f.s.size() > 0 ? f.s(0) : 0.0;
    f.rank_tol = s_max * 1e-12 * static_cast<double>(std::max(a.rows(), a.cols()));
    return f;
}

Image pseudo_inverse_apply(const SvdFactors& svd, const Image& y)
{
    require_shape(y, svd.out_shape, "pseudo_inverse_apply");
    Vector coeff = svd.u.transpose() * flatten(y);
    for (Eigen::Index i = 0; i < coeff.size(); ++i)
        coeff(i) = svd.s(i) > svd.rank_tol ? coeff(i) / svd.s(i) : 0.0;
    return unflatten(svd.v * coeff, svd.in_shape);
}

Vector flatten(const Image& x)
{
    return Eigen::Map<const Vector>(x.values().data(), static_cast<Eigen::Index>(x.size()));
}

Image unflatten(const Vector& v, Shape shape)
{
    if (static_cast<std::size_t>(v.size()) != shape.size()) throw ContractError("unflatten: size mismatch");
    return Image(shape.height, shape.width, std::vector<double>(v.data(), v.data() + v.size()));
}

} // namespace nsr
