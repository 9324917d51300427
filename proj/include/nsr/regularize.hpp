#pragma once

#include "nsr/dense.hpp"
#include "nsr/linop.hpp"
#include "nsr/solvers.hpp"

#include <cstdint>
#include <string_view>

namespace nsr {

enum class FilterKind { tikhonov, tsvd, landweber };

std::string_view to_string(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);

/// Regularizing filter g_alpha applied to the spectrum of A*A.
///
/// The Landweber filter runs N = max(1, round(1/alpha)) unit steps and is
/// only a valid filter for |A| <= 1 (spectrum in [0, 1]); alpha must be <= 1.
struct FilterSpec {
    FilterKind kind = FilterKind::tikhonov;
    double alpha = 0.01;
};

/// Number of Landweber steps represented by alpha.
int landweber_steps(double alpha);

double filter_value(const FilterSpec& spec, double lambda);

/// Constants of the filter conditions
///   sup_lambda lambda^mu |1 - lambda g(lambda)| <= c1 alpha^mu
///   sup_lambda |g(lambda)|                      <= c2 / alpha
///
///   tikhonov   c1 = 1,   c2 = 1    (mu <= 1 only)
///   tsvd       c1 = 1,   c2 = 1
///   landweber  c1 = 1.5, c2 = 1.5  (mu <= 1, alpha <= 1; the 1.5 absorbs rounding of N)
struct FilterConstants {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Throws ParameterError when mu exceeds the qualification covered above.
FilterConstants filter_constants(FilterKind kind, double mu);

/// sum_i g(s_i^2) s_i <y, u_i> v_i
Image spectral_reconstruct(const SvdFactors& svd, const Image& y, const FilterSpec& spec);

/// Solves (A*A + alpha I) x = A* y with conjugate gradients.
SolveResult tikhonov_reconstruct(const LinOp& op, const Image& y, double alpha, const SolverConfig& cfg);

/// Source set (A*A)^mu applied to the closed rho-ball.
struct SourceCondition {
    double mu = 0.5;
    double rho = 1.0;
};

/// A-priori rule alpha = c (delta/rho)^(2/(2mu+1)).
double param_choice(double delta, const SourceCondition& src, double c = 1.0);

/// x = (A*A)^mu w for a given w.
Image source_element_from(const SvdFactors& svd, double mu, const Image& w);

/// Draws w uniformly on the sphere of radius rho and returns (A*A)^mu w.
Image make_source_element(const SvdFactors& svd, const SourceCondition& src, std::uint64_t seed);

} // namespace nsr
