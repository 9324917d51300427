#include "nsr/error.hpp"
#include "nsr/operators.hpp"
#include "nsr/regularize.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace nsr;
using nsr::test::random_image;

namespace {

std::vector<double> logspace(double lo, double hi, int n)
{
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(std::pow(10.0, lo + (hi - lo) * i / (n - 1)));
    return out;
}

LinOp small_masked_integration()
{
    return make_masked_integration({8, 8}, {8, {0}, true}).forward;
}

} // namespace

TEST(FilterValue, Anchors)
{
    EXPECT_DOUBLE_EQ(filter_value({FilterKind::tikhonov, 0.01}, 1.0), 1.0 / 1.01);
    EXPECT_DOUBLE_EQ(filter_value({FilterKind::tikhonov, 0.5}, 0.0), 2.0);
    EXPECT_EQ(filter_value({FilterKind::tsvd, 0.1}, 0.05), 0.0);
    EXPECT_DOUBLE_EQ(filter_value({FilterKind::tsvd, 0.1}, 0.2), 5.0);
    EXPECT_DOUBLE_EQ(filter_value({FilterKind::tsvd, 0.1}, 0.1), 10.0);
}

TEST(FilterValue, LandweberIsAGeometricSum)
{
    EXPECT_EQ(landweber_steps(0.1), 10);
    EXPECT_EQ(landweber_steps(0.3), 3);
    EXPECT_EQ(landweber_steps(1.0), 1);
    const FilterSpec lw{FilterKind::landweber, 0.1};
    EXPECT_NEAR(filter_value(lw, 0.1), (1.0 - std::pow(0.9, 10)) / 0.1, 1e-13);
    EXPECT_NEAR(filter_value(lw, 0.1), 6.513215599, 1e-9);
    EXPECT_EQ(filter_value(lw, 0.0), 10.0);
    EXPECT_DOUBLE_EQ(filter_value(lw, 1.0), 1.0);
    EXPECT_NEAR(filter_value(lw, 1e-12), 10.0, 1e-9);
    for (double lam : logspace(-10, 0, 41)) {
        double sum = 0.0;
        for (int k = 0; k < 10; ++k) sum += std::pow(1.0 - lam, k);
        EXPECT_NEAR(filter_value(lw, lam), sum, 1e-12 * sum) << lam;
    }
}

TEST(FilterValue, RejectsInvalidArguments)
{
    EXPECT_THROW(filter_value({FilterKind::tikhonov, 0.0}, 1.0), ParameterError);
    EXPECT_THROW(filter_value({FilterKind::tikhonov, 0.1}, -1e-3), ParameterError);
    EXPECT_THROW(filter_value({FilterKind::landweber, 1.5}, 0.5), ParameterError);
    EXPECT_THROW(parse_filter_kind("gauss"), ParameterError);
    EXPECT_EQ(parse_filter_kind(to_string(FilterKind::tsvd)), FilterKind::tsvd);
}

TEST(FilterConstants, BoundsHoldOnGrid)
{
    const auto lambdas = logspace(-8, 0, 1000);
    const auto alphas = logspace(-4, 0, 10);
    for (FilterKind kind : {FilterKind::tikhonov, FilterKind::tsvd, FilterKind::landweber}) {
        for (double mu : {0.25, 0.5, 1.0}) {
            const FilterConstants c = filter_constants(kind, mu);
            for (double alpha : alphas) {
                for (double lam : lambdas) {
                    const double g = filter_value({kind, alpha}, lam);
                    EXPECT_LE(std::pow(lam, mu) * std::abs(1.0 - lam * g), c.c1 * std::pow(alpha, mu) * (1 + 1e-12))
                        << to_string(kind) << " mu=" << mu << " alpha=" << alpha << " lambda=" << lam;
                    EXPECT_LE(std::abs(g), c.c2 / alpha * (1 + 1e-12));
                }
            }
        }
    }
}

TEST(FilterConstants, QualificationLimits)
{
    EXPECT_THROW(filter_constants(FilterKind::tikhonov, 1.5), ParameterError);
    EXPECT_THROW(filter_constants(FilterKind::landweber, 2.0), ParameterError);
    EXPECT_THROW(filter_constants(FilterKind::tsvd, -0.1), ParameterError);
    EXPECT_NO_THROW(filter_constants(FilterKind::tsvd, 3.0));
}

TEST(SpectralReconstruct, TikhonovMatchesConjugateGradients)
{
    const LinOp a = small_masked_integration();
    const SvdFactors svd = svd_of(a);
    for (double alpha : {1e-3, 1e-2, 1.0}) {
        const Image y = random_image(a.out_shape(), 11);
        const Image spectral = spectral_reconstruct(svd, y, {FilterKind::tikhonov, alpha});
        const SolveResult cg = tikhonov_reconstruct(a, y, alpha, {1e-13, 5000, 0.0});
        ASSERT_TRUE(cg.converged);
        EXPECT_LE(max_abs(spectral - cg.x), 1e-8 * std::max(1.0, max_abs(cg.x))) << alpha;
    }
}

TEST(SpectralReconstruct, TsvdWithTinyCutoffIsThePseudoInverse)
{
    const Matrix m = test::random_rank_deficient(12, 10, 6, 3);
    const SvdFactors svd = dense_svd(m, {10, 1}, {12, 1});
    const Image y = random_image({12, 1}, 4);
    const Image x = spectral_reconstruct(svd, y, {FilterKind::tsvd, 1e-9});
    const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m);
    EXPECT_LE((flatten(x) - cod.pseudoInverse() * flatten(y)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(SpectralReconstruct, LandweberMatchesExplicitIterations)
{
    const LinOp a = make_scaling({4, 4}, 0.5);
    const MaskedIntegration mi = make_masked_integration({8, 8}, {8, {0}, true});
    const double scale = 1.0 / svd_of(mi.forward).s(0);
    const LinOp b = compose(make_scaling(mi.forward.out_shape(), scale), mi.forward);
    for (const LinOp* op : {&a, &b}) {
        const SvdFactors svd = svd_of(*op);
        const Image y = random_image(op->out_shape(), 5);
        Image x(op->in_shape());
        for (int k = 0; k < 20; ++k) x += op->adjoint(y - op->apply(x));
        const Image spectral = spectral_reconstruct(svd, y, {FilterKind::landweber, 0.05});
        EXPECT_LE(max_abs(spectral - x), 1e-10 * std::max(1.0, max_abs(x)));
    }
}

TEST(ParamChoice, ClosedForm)
{
    EXPECT_DOUBLE_EQ(param_choice(1e-2, {0.5, 1.0}), 1e-2);
    EXPECT_NEAR(param_choice(1e-2, {1.0, 1.0}), std::pow(1e-2, 2.0 / 3.0), 1e-15);
    EXPECT_NEAR(param_choice(2e-2, {0.5, 2.0}, 3.0), 3e-2, 1e-15);
    EXPECT_THROW(param_choice(0.0, {0.5, 1.0}), ParameterError);
    EXPECT_THROW(param_choice(1e-2, {0.0, 1.0}), ParameterError);
    EXPECT_THROW(param_choice(1e-2, {0.5, -1.0}), ParameterError);
}

TEST(SourceElement, DiagonalOperatorScalesEntries)
{
    Image weights(3, 1, {1.0, 0.5, 0.0});
    const SvdFactors svd = svd_of(make_diagonal(weights));
    const Image w(3, 1, {2.0, 4.0, 7.0});
    EXPECT_EQ(source_element_from(svd, 0.0, w), w);
    const Image x = source_element_from(svd, 0.5, w);
    EXPECT_NEAR(x(0, 0), 2.0, 1e-14);
    EXPECT_NEAR(x(1, 0), 2.0, 1e-14);
    EXPECT_NEAR(x(2, 0), 0.0, 1e-14);
    const Image x1 = source_element_from(svd, 1.0, w);
    EXPECT_NEAR(x1(1, 0), 1.0, 1e-14);
}

TEST(SourceElement, RandomDrawHasRadiusRho)
{
    const SvdFactors svd = svd_of(make_identity({5, 5}));
    for (double rho : {0.1, 1.0, 3.0}) {
        const Image x = make_source_element(svd, {0.5, rho}, 17);
        EXPECT_NEAR(norm(x), rho, 1e-12 * rho);
    }
    EXPECT_EQ(make_source_element(svd, {0.5, 1.0}, 3), make_source_element(svd, {0.5, 1.0}, 3));
    EXPECT_THROW(make_source_element(svd_of(make_scaling({2, 2}, 0.0)), {0.5, 1.0}, 1), ContractError);
}

TEST(SourceElement, LiesInKernelComplement)
{
    const MaskedIntegration mi = make_masked_integration({8, 8}, {8, {0, 1}, true});
    const SvdFactors svd = svd_of(mi.forward);
    const Image x = make_source_element(svd, {0.5, 1.0}, 2);
    EXPECT_LE(max_abs(x - mi.mask.apply(x)), 1e-12);
}
