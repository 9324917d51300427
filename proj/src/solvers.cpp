#include "nsr/solvers.hpp"

#include "nsr/error.hpp"
#include "nsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nsr {

double adjoint_check(const LinOp& op, int trials, std::uint64_t seed)
{
    if (trials < 1) throw ParameterError("adjoint_check: trials must be >= 1");
    Rng rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Image u = Image::random_normal(op.in_shape(), rng);
        const Image v = Image::random_normal(op.out_shape(), rng);
        const Image au = op.apply(u);
        const Image atv = op.adjoint(v);
        const double err = std::abs(dot(au, v) - dot(u, atv)) /
                           (norm(au) * norm(v) + std::numeric_limits<double>::epsilon());
        worst = std::max(worst, err);
    }
    return worst;
}

NormEstimate operator_norm(const LinOp& op, const SolverConfig& cfg, std::uint64_t seed)
{
    Rng rng(seed);
    Image v = Image::random_normal(op.in_shape(), rng);
    v *= 1.0 / norm(v);

    NormEstimate est;
    double lambda_prev = 0.0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        Image w = op.adjoint(op.apply(v));
        const double lambda = norm(w);
        est.iterations = k;
        est.sigma_max = std::sqrt(lambda);
        if (lambda == 0.0) {
            est.converged = true;
            return est;
        }
        v = (1.0 / lambda) * std::move(w);
        if (std::abs(lambda - lambda_prev) <= cfg.tol * lambda) {
            est.converged = true;
            return est;
        }
        lambda_prev = lambda;
    }
    return est;
}

SolveResult cg_regularized_normal(const LinOp& op, const Image& rhs, double lambda, const SolverConfig& cfg)
{
    if (lambda < 0.0) throw ParameterError("cg_regularized_normal: lambda must be >= 0");
    require_shape(rhs, op.in_shape(), "cg_regularized_normal rhs");

    auto normal_op = [&](const Image& p) {
        Image q = op.adjoint(op.apply(p));
        if (lambda != 0.0) q.axpy(lambda, p);
        return q;
    };

    SolveResult res{Image(op.in_shape()), 0, false, 0.0};
    const double rhs_norm = norm(rhs);
    if (rhs_norm == 0.0) {
        res.converged = true;
        return res;
    }

    Image r = rhs;
    Image p = r;
    double rr = dot(r, r);
    const double target = cfg.tol * rhs_norm;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        const Image q = normal_op(p);
        const double pq = dot(p, q);
        if (pq <= 0.0) break;  // breakdown: singular direction
        const double step = rr / pq;
        res.x.axpy(step, p);
        r.axpy(-step, q);
        const double rr_next = dot(r, r);
        res.iterations = k;
        if (std::sqrt(rr_next) <= target) {
            rr = rr_next;
            res.converged = true;
            break;
        }
        p *= rr_next / rr;
        p += r;
        rr = rr_next;
    }
    res.rel_residual = std::sqrt(rr) / rhs_norm;
    return res;
}

SolveResult landweber_nullproject(const LinOp& op, const Image& z, const SolverConfig& cfg)
{
    require_shape(z, op.in_shape(), "landweber_nullproject");
    if (!(cfg.tau > 0.0)) throw ParameterError("landweber_nullproject: tau must be positive");
    const double sigma = operator_norm(op).sigma_max;
    if (cfg.tau * sigma * sigma >= 2.0) {
        throw ParameterError("landweber_nullproject: tau must be below 2/|A|^2 = " +
                             std::to_string(2.0 / (sigma * sigma)));
    }

    SolveResult res{z, 0, false, 1.0};
    Image ax = op.apply(res.x);
    const double az_norm = norm(ax);
    if (az_norm == 0.0) {
        res.converged = true;
        res.rel_residual = 0.0;
        return res;
    }
    const double target = cfg.tol * az_norm;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        res.x.axpy(-cfg.tau, op.adjoint(ax));
        ax = op.apply(res.x);
        res.iterations = k;
        const double an = norm(ax);
        res.rel_residual = an / az_norm;
        if (an <= target) {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace nsr
