#pragma once

#include "nsr/image.hpp"
#include "nsr/linop.hpp"

#include <cstdint>

namespace nsr {

struct SolverConfig {
    double tol = 1e-10;     ///< relative residual target
    int max_iters = 1000;
    double tau = 0.0;       ///< Landweber step; must lie in (0, 2/|A|^2)
};

/// Iterative solve output. Non-convergence is reported, not thrown.
struct SolveResult {
    Image x;
    int iterations = 0;
    bool converged = false;
    double rel_residual = 0.0;
};

struct NormEstimate {
    double sigma_max = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Seed used by operator_norm when none is given.
inline constexpr std::uint64_t kPowerIterationSeed = 0x5eed'0001;

/// Max over random (u, v) of |<Au,v> - <u,A*v>| / (|Au||v| + eps).
double adjoint_check(const LinOp& op, int trials, std::uint64_t seed);

/// Largest singular value via power iteration on A*A.
/// Stops when successive eigenvalue estimates agree to cfg.tol (relative).
NormEstimate operator_norm(const LinOp& op, const SolverConfig& cfg = {1e-6, 5000, 0.0},
                           std::uint64_t seed = kPowerIterationSeed);

/// Conjugate gradients for (A*A + lambda I) x = rhs, with rhs in the input space.
/// Starts from zero, so for lambda = 0 the iterates stay in ran(A*).
SolveResult cg_regularized_normal(const LinOp& op, const Image& rhs, double lambda, const SolverConfig& cfg);

/// Landweber iteration x <- x - tau A*(A x) started at z; converges to the
/// orthogonal projection of z onto ker(A). Stops once |A x| <= tol |A z|.
SolveResult landweber_nullproject(const LinOp& op, const Image& z, const SolverConfig& cfg);

} // namespace nsr
