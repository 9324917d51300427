#include "nsr/operators.hpp"

#include "nsr/error.hpp"
#include "nsr/rng.hpp"

#include <algorithm>
#include <memory>
#include <string>

namespace nsr {

std::vector<std::size_t> stripe_columns(const StripeMaskSpec& spec)
{
    if (spec.image_width == 0) throw ContractError("stripe mask: image_width must be >= 1");
    std::vector<std::size_t> cols;
    for (std::size_t k : spec.k_range) {
        const std::size_t first = spec.one_based ? 4 * k : 4 * k + 1;
        for (std::size_t c : {first, first + 1}) {
            if (c >= spec.image_width) {
                throw ContractError("stripe mask: column " + std::to_string(c) + " (k=" + std::to_string(k) +
                                    ") outside image width " + std::to_string(spec.image_width));
            }
            cols.push_back(c);
        }
    }
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    return cols;
}

LinOp make_cumsum(std::size_t height, std::size_t width)
{
    if (height == 0 || width == 0) throw ContractError("make_cumsum: empty shape");
    auto forward = [](const Image& x) {
        Image out = x;
        for (std::size_t i = 1; i < out.height(); ++i)
            for (std::size_t j = 0; j < out.width(); ++j) out(i, j) += out(i - 1, j);
        return out;
    };
    auto adjoint = [](const Image& y) {
        Image out = y;
        for (std::size_t i = out.height() - 1; i-- > 0;)
            for (std::size_t j = 0; j < out.width(); ++j) out(i, j) += out(i + 1, j);
        return out;
    };
    const Shape shape{height, width};
    return LinOp(shape, shape, forward, adjoint, "cumsum");
}

LinOp make_stripe_mask(const StripeMaskSpec& spec, std::size_t height)
{
    Image weights(height, spec.image_width, 0.0);
    for (std::size_t c : stripe_columns(spec))
        for (std::size_t i = 0; i < height; ++i) weights(i, c) = 1.0;
    auto w = std::make_shared<const Image>(std::move(weights));
    auto mask = [w](const Image& x) {
        Image out = x;
        for (std::size_t i = 0; i < out.size(); ++i)
            if ((*w)[i] == 0.0) out[i] = 0.0;
        return out;
    };
    const Shape shape{height, spec.image_width};
    return LinOp(shape, shape, mask, mask, "stripe_mask");
}

LinOp compose(const LinOp& outer, const LinOp& inner)
{
    if (inner.out_shape() != outer.in_shape())
        throw ContractError("compose: " + inner.name() + " output does not match " + outer.name() + " input");
    return LinOp(
        inner.in_shape(), outer.out_shape(),
        [outer, inner](const Image& x) { return outer.apply(inner.apply(x)); },
        [outer, inner](const Image& y) { return inner.adjoint(outer.adjoint(y)); },
        outer.name() + "*" + inner.name());
}

LinOp make_subsampled_unitary(const SubsampledUnitarySpec& spec)
{
    const Eigen::Index n = spec.basis.rows();
    if (n == 0 || spec.basis.cols() != n) throw ContractError("subsampled unitary: basis must be square");
    if (spec.shape.size() != static_cast<std::size_t>(n))
        throw ContractError("subsampled unitary: image shape does not match basis size");
    if (!(spec.basis.transpose() * spec.basis).isIdentity(1e-10))
        throw ContractError("subsampled unitary: basis is not orthogonal");
    if (spec.kept_indices.empty()) throw ContractError("subsampled unitary: kept index set is empty");

    Vector keep = Vector::Zero(n);
    for (std::size_t i : spec.kept_indices) {
        if (i >= static_cast<std::size_t>(n)) throw ContractError("subsampled unitary: kept index out of range");
        keep(static_cast<Eigen::Index>(i)) = 1.0;
    }
    auto basis = std::make_shared<const Matrix>(spec.basis);
    auto sel = std::make_shared<const Vector>(std::move(keep));
    const Shape shape = spec.shape;
    auto forward = [basis, sel, shape](const Image& x) {
        Vector c = (*basis) * flatten(x);
        return unflatten(c.cwiseProduct(*sel), shape);
    };
    auto adjoint = [basis, sel, shape](const Image& y) {
        Vector c = flatten(y).cwiseProduct(*sel);
        return unflatten(basis->transpose() * c, shape);
    };
    return LinOp(shape, shape, forward, adjoint, "subsampled_unitary");
}

Matrix random_orthogonal(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    const auto dim = static_cast<Eigen::Index>(n);
    Matrix g(dim, dim);
    for (Eigen::Index j = 0; j < dim; ++j)
        for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    // Fix column signs so the distribution is Haar and the result is deterministic.
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < dim; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

Matrix to_dense(const LinOp& op)
{
    const std::size_t n = op.in_shape().size();
    const std::size_t m = op.out_shape().size();
    if (n > kMaxDenseDim || m > kMaxDenseDim) throw InputError("to_dense: operator exceeds the 4096 size guard");
    Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    Image e(op.in_shape());
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        a.col(static_cast<Eigen::Index>(j)) = flatten(op.apply(e));
        e[j] = 0.0;
    }
    return a;
}

LinOp make_dense(Matrix a, Shape in_shape, Shape out_shape)
{
    if (static_cast<std::size_t>(a.cols()) != in_shape.size() ||
        static_cast<std::size_t>(a.rows()) != out_shape.size())
        throw ContractError("make_dense: matrix dimensions do not match shapes");
    auto mat = std::make_shared<const Matrix>(std::move(a));
    return LinOp(
        in_shape, out_shape, [mat, out_shape](const Image& x) { return unflatten((*mat) * flatten(x), out_shape); },
        [mat, in_shape](const Image& y) { return unflatten(mat->transpose() * flatten(y), in_shape); }, "dense");
}

SvdFactors svd_of(const LinOp& op)
{
    return dense_svd(to_dense(op), op.in_shape(), op.out_shape());
}

MaskedIntegration make_masked_integration(Shape shape, const StripeMaskSpec& spec)
{
    if (spec.image_width != shape.width) throw ContractError("masked integration: mask width differs from image");
    LinOp mask = make_stripe_mask(spec, shape.height);
    LinOp cumsum = make_cumsum(shape.height, shape.width);
    LinOp forward = compose(mask, cumsum);
    return {mask, cumsum, forward};
}

} // namespace nsr
