#include "nsr/regularize.hpp"

#include "nsr/error.hpp"
#include "nsr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nsr {

std::string_view to_string(FilterKind kind)
{
    switch (kind) {
    case FilterKind::tikhonov: return "tikhonov";
    case FilterKind::tsvd: return "tsvd";
    case FilterKind::landweber: return "landweber";
    }
    return "unknown";
}

FilterKind parse_filter_kind(std::string_view name)
{
    if (name == "tikhonov") return FilterKind::tikhonov;
    if (name == "tsvd") return FilterKind::tsvd;
    if (name == "landweber") return FilterKind::landweber;
    throw ParameterError("unknown filter kind: " + std::string(name));
}

int landweber_steps(double alpha)
{
    return std::max(1, static_cast<int>(std::lround(1.0 / alpha)));
}

double filter_value(const FilterSpec& spec, double lambda)
{
    if (!(spec.alpha > 0.0)) throw ParameterError("filter_value: alpha must be positive");
    if (lambda < 0.0) throw ParameterError("filter_value: lambda must be >= 0");
    switch (spec.kind) {
    case FilterKind::tikhonov:
        return 1.0 / (lambda + spec.alpha);
    case FilterKind::tsvd:
        return lambda >= spec.alpha ? 1.0 / lambda : 0.0;
    case FilterKind::landweber: {
        if (spec.alpha > 1.0) throw ParameterError("filter_value: landweber alpha must be <= 1");
        const int n = landweber_steps(spec.alpha);
        if (lambda == 0.0) return n;
        if (lambda >= 1.0) return (1.0 - std::pow(1.0 - lambda, n)) / lambda;
        // sum_{k<n} (1-lambda)^k, stable for small lambda
        return -std::expm1(n * std::log1p(-lambda)) / lambda;
    }
    }
    return 0.0;
}

FilterConstants filter_constants(FilterKind kind, double mu)
{
    if (!(mu >= 0.0)) throw ParameterError("filter_constants: mu must be >= 0");
    switch (kind) {
    case FilterKind::tikhonov:
        if (mu > 1.0) throw ParameterError("filter_constants: tikhonov qualification is mu <= 1");
        return {1.0, 1.0};
    case FilterKind::tsvd:
        return {1.0, 1.0};
    case FilterKind::landweber:
        if (mu > 1.0) throw ParameterError("filter_constants: landweber constants documented for mu <= 1");
        return {1.5, 1.5};
    }
    return {};
}

Image spectral_reconstruct(const SvdFactors& svd, const Image& y, const FilterSpec& spec)
{
    require_shape(y, svd.out_shape, "spectral_reconstruct");
    Vector coeff = svd.u.transpose() * flatten(y);
    for (Eigen::Index i = 0; i < coeff.size(); ++i) {
        const double s = svd.s(i);
        coeff(i) *= s == 0.0 ? 0.0 : filter_value(spec, s * s) * s;
    }
    return unflatten(svd.v * coeff, svd.in_shape);
}

SolveResult tikhonov_reconstruct(const LinOp& op, const Image& y, double alpha, const SolverConfig& cfg)
{
    if (!(alpha > 0.0)) throw ParameterError("tikhonov_reconstruct: alpha must be positive");
    return cg_regularized_normal(op, op.adjoint(y), alpha, cfg);
}

double param_choice(double delta, const SourceCondition& src, double c)
{
    if (!(delta > 0.0)) throw ParameterError("param_choice: delta must be positive");
    if (!(src.mu > 0.0) || !(src.rho > 0.0)) throw ParameterError("param_choice: mu and rho must be positive");
    return c * std::pow(delta / src.rho, 2.0 / (2.0 * src.mu + 1.0));
}

Image source_element_from(const SvdFactors& svd, double mu, const Image& w)
{
    require_shape(w, svd.in_shape, "source_element_from");
    if (mu < 0.0) throw ParameterError("source_element_from: mu must be >= 0");
    if (mu == 0.0) return w;
    Vector coeff = svd.v.transpose() * flatten(w);
    for (Eigen::Index i = 0; i < coeff.size(); ++i) coeff(i) *= std::pow(svd.s(i), 2.0 * mu);
    return unflatten(svd.v * coeff, svd.in_shape);
}

Image make_source_element(const SvdFactors& svd, const SourceCondition& src, std::uint64_t seed)
{
    if (svd.s.size() == 0 || !(svd.s(0) > 0.0))
        throw ContractError("make_source_element: operator has no positive singular value");
    if (!(src.rho > 0.0)) throw ParameterError("make_source_element: rho must be positive");
    Rng rng(seed);
    Image w = Image::random_normal(svd.in_shape, rng);
    w *= src.rho / norm(w);
    return source_element_from(svd, src.mu, w);
}

} // namespace nsr
