#include "nsr/linop.hpp"

#include "nsr/error.hpp"

namespace nsr {

LinOp::LinOp(Shape in_shape, Shape out_shape, Map forward, Map adjoint, std::string name)
    : in_(in_shape),
      out_(out_shape),
      forward_(std::make_shared<const Map>(std::move(forward))),
      adjoint_(std::make_shared<const Map>(std::move(adjoint))),
      name_(std::make_shared<const std::string>(std::move(name)))
{
    if (in_.size() == 0 || out_.size() == 0) throw ContractError("LinOp: empty shape");
    if (!*forward_ || !*adjoint_) throw ContractError("LinOp: forward and adjoint must be callable");
}

Image LinOp::apply(const Image& x) const
{
    require_shape(x, in_, name_->c_str());
    Image y = (*forward_)(x);
    require_shape(y, out_, name_->c_str());
    return y;
}

Image LinOp::adjoint(const Image& y) const
{
    require_shape(y, out_, name_->c_str());
    Image x = (*adjoint_)(y);
    require_shape(x, in_, name_->c_str());
    return x;
}

LinOp LinOp::transposed() const
{
    LinOp t = *this;
    std::swap(t.in_, t.out_);
    std::swap(t.forward_, t.adjoint_);
    t.name_ = std::make_shared<const std::string>(*name_ + "^T");
    return t;
}

LinOp make_identity(Shape shape)
{
    auto id = [](const Image& x) { return x; };
    return LinOp(shape, shape, id, id, "identity");
}

LinOp make_scaling(Shape shape, double c)
{
    auto scale = [c](const Image& x) { return c * x; };
    return LinOp(shape, shape, scale, scale, "scaling");
}

LinOp make_diagonal(Image weights)
{
    const Shape shape = weights.shape();
    auto w = std::make_shared<const Image>(std::move(weights));
    auto mul = [w](const Image& x) {
        Image out = x;
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= (*w)[i];
        return out;
    };
    return LinOp(shape, shape, mul, mul, "diagonal");
}

} // namespace nsr
