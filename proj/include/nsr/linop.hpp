#pragma once

#include "nsr/image.hpp"

#include <functional>
#include <memory>
#include <string>

namespace nsr {

/// Immutable matrix-free linear operator X -> Y acting on images.
///
/// Copies share the underlying callables; safe to use from several threads.
/// apply() and adjoint() check shapes on entry and exit.
class LinOp {
public:
    using Map = std::function<Image(const Image&)>;

    LinOp(Shape in_shape, Shape out_shape, Map forward, Map adjoint, std::string name = "linop");

    Shape in_shape() const { return in_; }
    Shape out_shape() const { return out_; }
    const std::string& name() const { return *name_; }

    Image apply(const Image& x) const;
    Image adjoint(const Image& y) const;
    Image operator()(const Image& x) const { return apply(x); }

    /// The operator with forward and adjoint swapped.
    LinOp transposed() const;

private:
    Shape in_;
    Shape out_;
    std::shared_ptr<const Map> forward_;
    std::shared_ptr<const Map> adjoint_;
    std::shared_ptr<const std::string> name_;
};

LinOp make_identity(Shape shape);
/// x -> c * x
LinOp make_scaling(Shape shape, double c);
/// Pointwise multiplication by a fixed weight image (self-adjoint).
LinOp make_diagonal(Image weights);

} // namespace nsr
