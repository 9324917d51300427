#pragma once

#include "nsr/linop.hpp"
#include "nsr/operators.hpp"
#include "nsr/solvers.hpp"

#include <functional>
#include <memory>

namespace nsr {

enum class ProjectorMethod { closed_mask, closed_unitary, iterative };

/// Orthogonal projector onto ker(A).
///
///  closed_mask     (I - M) z for a 0/1 diagonal mask M with ker(A) = ran(I - M)
///  closed_unitary  B^T (I - S*S) B z for A = S*S B
///  iterative       z - A^+(A z), with A^+ applied by CG on the normal equations
class NullProjector {
public:
    static NullProjector closed_mask(LinOp op, LinOp mask);
    static NullProjector closed_unitary(LinOp op, const SubsampledUnitarySpec& spec);
    static NullProjector iterative(LinOp op, SolverConfig cfg = {1e-12, 2000, 0.0});

    ProjectorMethod method() const { return method_; }
    const LinOp& op() const { return op_; }
    const SolverConfig& solver() const { return solver_; }

    /// Projection with solver diagnostics (closed forms always report converged).
    SolveResult project(const Image& z) const;
    Image operator()(const Image& z) const { return project(z).x; }

    /// The projector itself as a self-adjoint operator on X.
    LinOp as_linop() const;

private:
    NullProjector(ProjectorMethod method, LinOp op, LinOp complement, SolverConfig cfg);

    ProjectorMethod method_;
    LinOp op_;
    LinOp projector_;
    SolverConfig solver_;
};

Image project_null(const NullProjector& proj, const Image& z);

/// Learned correction U_theta: X -> X.
using Correction = std::function<Image(const Image&)>;
/// Initial reconstruction B: Y -> X.
using Reconstruction = std::function<Image(const Image&)>;

/// x + P_ker(A) U(x)
Image nsn_apply(const Correction& u_net, const NullProjector& proj, const Image& x);

/// nsn_apply(u_net, proj, recon(y))
Image regularizing_nsn(const Correction& u_net, const NullProjector& proj, const Reconstruction& recon,
                       const Image& y);

} // namespace nsr
