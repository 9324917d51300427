#include "nsr/nullspace.hpp"

#include "nsr/error.hpp"

namespace nsr {

NullProjector::NullProjector(ProjectorMethod method, LinOp op, LinOp complement, SolverConfig cfg)
    : method_(method), op_(std::move(op)), projector_(std::move(complement)), solver_(cfg)
{
}

NullProjector NullProjector::closed_mask(LinOp op, LinOp mask)
{
    if (mask.in_shape() != op.in_shape() || mask.out_shape() != op.in_shape())
        throw ContractError("closed_mask projector: mask must act on the operator's input space");
    auto complement = [mask](const Image& z) { return z - mask.apply(z); };
    LinOp p(op.in_shape(), op.in_shape(), complement, complement, "null_projector_mask");
    return NullProjector(ProjectorMethod::closed_mask, std::move(op), std::move(p), {});
}

NullProjector NullProjector::closed_unitary(LinOp op, const SubsampledUnitarySpec& spec)
{
    if (spec.shape != op.in_shape())
        throw ContractError("closed_unitary projector: basis shape differs from operator input");
    // S*S B is exactly the subsampled transform, so P = I - B^T (S*S B).
    const LinOp transform = make_subsampled_unitary(spec);
    auto complement = [transform](const Image& z) { return z - transform.adjoint(transform.apply(z)); };
    LinOp p(op.in_shape(), op.in_shape(), complement, complement, "null_projector_unitary");
    return NullProjector(ProjectorMethod::closed_unitary, std::move(op), std::move(p), {});
}

NullProjector NullProjector::iterative(LinOp op, SolverConfig cfg)
{
    auto complement = [op, cfg](const Image& z) {
        const SolveResult range = cg_regularized_normal(op, op.adjoint(op.apply(z)), 0.0, cfg);
        return z - range.x;
    };
    LinOp p(op.in_shape(), op.in_shape(), complement, complement, "null_projector_iterative");
    return NullProjector(ProjectorMethod::iterative, std::move(op), std::move(p), cfg);
}

SolveResult NullProjector::project(const Image& z) const
{
    require_shape(z, op_.in_shape(), "project_null");
    if (method_ != ProjectorMethod::iterative) return {projector_.apply(z), 0, true, 0.0};
    SolveResult range = cg_regularized_normal(op_, op_.adjoint(op_.apply(z)), 0.0, solver_);
    range.x = z - range.x;
    return range;
}

LinOp NullProjector::as_linop() const { return projector_; }

Image project_null(const NullProjector& proj, const Image& z) { return proj.project(z).x; }

Image nsn_apply(const Correction& u_net, const NullProjector& proj, const Image& x)
{
    require_shape(x, proj.op().in_shape(), "nsn_apply");
    return x + project_null(proj, u_net(x));
}

Image regularizing_nsn(const Correction& u_net, const NullProjector& proj, const Reconstruction& recon,
                       const Image& y)
{
    require_shape(y, proj.op().out_shape(), "regularizing_nsn");
    return nsn_apply(u_net, proj, recon(y));
}

} // namespace nsr
