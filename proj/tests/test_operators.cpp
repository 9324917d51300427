#include "nsr/error.hpp"
#include "nsr/operators.hpp"
#include "nsr/solvers.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace nsr;
using nsr::test::random_image;

TEST(Cumsum, ForwardAndAdjointByHand)
{
    const LinOp k = make_cumsum(3, 1);
    EXPECT_EQ(k.apply(Image(3, 1, {1, 0, 2})), Image(3, 1, {1, 1, 3}));
    EXPECT_EQ(k.adjoint(Image(3, 1, {1, 2, 4})), Image(3, 1, {7, 6, 4}));
}

TEST(Cumsum, AdjointAgainstDenseTranspose)
{
    const LinOp k = make_cumsum(8, 8);
    EXPECT_LT(adjoint_check(k, 50, 1), 1e-12);
    const Matrix fwd = to_dense(k);
    const Matrix adj = test::dense_of([&](const Image& y) { return k.adjoint(y); }, k.out_shape(), k.in_shape());
    EXPECT_EQ((fwd.transpose() - adj).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Cumsum, IsInjectiveWithBoundedSmallestSingularValue)
{
    for (std::size_t n : {1, 2, 3, 8, 17, 32, 64}) {
        const SvdFactors f = svd_of(make_cumsum(n, 1));
        EXPECT_GT(f.s(f.s.size() - 1), 0.49) << "n=" << n;
    }
}

TEST(StripeMask, SingleStripeKeepsFirstTwoColumns)
{
    const StripeMaskSpec spec{8, {0}, true};
    EXPECT_EQ(stripe_columns(spec), (std::vector<std::size_t>{0, 1}));
    const Image out = make_stripe_mask(spec, 3).apply(Image(3, 8, 1.0));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 8; ++j) EXPECT_EQ(out(i, j), j < 2 ? 1.0 : 0.0);
}

TEST(StripeMask, DefaultAndZeroBasedReadings)
{
    EXPECT_EQ(stripe_columns(StripeMaskSpec{}), (std::vector<std::size_t>{0, 1, 4, 5, 8, 9, 12, 13}));
    EXPECT_EQ(stripe_columns({8, {0}, false}), (std::vector<std::size_t>{1, 2}));
    EXPECT_THROW(stripe_columns({8, {2}, true}), ContractError);
    EXPECT_THROW(stripe_columns({8, {2}, false}), ContractError);
}

TEST(StripeMask, IsAnOrthogonalProjection)
{
    const LinOp m = make_stripe_mask({16, {0, 2}, true}, 5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Image x = random_image(m.in_shape(), seed);
        EXPECT_EQ(m.apply(m.apply(x)), m.apply(x));
        EXPECT_EQ(m.adjoint(x), m.apply(x));
    }
    const Matrix d = to_dense(m);
    EXPECT_LE((d - d.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LE((d * d - d).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Compose, IdentityOuterLeavesOperatorUnchanged)
{
    const LinOp k = make_cumsum(5, 4);
    const LinOp c = compose(make_identity({5, 4}), k);
    const Image x = random_image({5, 4}, 3);
    EXPECT_EQ(c.apply(x), k.apply(x));
    EXPECT_EQ(c.adjoint(x), k.adjoint(x));
    EXPECT_THROW(compose(make_identity({4, 5}), k), ContractError);
}

TEST(Compose, MaskCommutesWithIntegration)
{
    const MaskedIntegration a = make_masked_integration({16, 16}, {16, {0, 1, 2, 3}, true});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Image x = random_image({16, 16}, seed);
        EXPECT_EQ(a.forward.apply(x), a.cumsum.apply(a.mask.apply(x)));
    }
}

TEST(Compose, MaskedIntegrationAdjoint)
{
    const MaskedIntegration a = make_masked_integration({16, 16}, {16, {0, 1}, true});
    EXPECT_LT(adjoint_check(a.forward, 50, 9), 1e-12);
    const Matrix fwd = to_dense(a.forward);
    const Matrix adj =
        test::dense_of([&](const Image& y) { return a.forward.adjoint(y); }, a.forward.out_shape(), a.forward.in_shape());
    EXPECT_LE((fwd.transpose() - adj).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Compose, KernelIsTheUnobservedColumns)
{
    const MaskedIntegration a = make_masked_integration({8, 8}, {8, {0}, true});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Image z = random_image({8, 8}, seed);
        EXPECT_LE(norm(a.forward.apply(z - a.mask.apply(z))), 1e-12 * norm(z));
    }
    EXPECT_EQ(svd_of(a.forward).rank(), 2 * 8);
}

TEST(SubsampledUnitary, IdentityBasisKeepsSelectedEntry)
{
    const LinOp s = make_subsampled_unitary({Matrix::Identity(4, 4), {0}, {4, 1}});
    EXPECT_EQ(s.apply(Image(4, 1, {3, 1, 4, 1})), Image(4, 1, {3, 0, 0, 0}));
}

TEST(SubsampledUnitary, FullIndexSetIsTheBasisTransform)
{
    const Matrix b = random_orthogonal(9, 5);
    const LinOp s = make_subsampled_unitary({b, {0, 1, 2, 3, 4, 5, 6, 7, 8}, {3, 3}});
    EXPECT_LE((to_dense(s) - b).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(svd_of(s).rank(), 9);
}

TEST(SubsampledUnitary, RankEqualsKeptCount)
{
    const Matrix b = random_orthogonal(16, 21);
    EXPECT_TRUE((b.transpose() * b).isIdentity(1e-10));
    const LinOp s = make_subsampled_unitary({b, {0, 3, 5, 8, 11, 15}, {4, 4}});
    EXPECT_EQ(svd_of(s).rank(), 6);
    EXPECT_LT(adjoint_check(s, 20, 2), 1e-12);
}

TEST(SubsampledUnitary, RejectsInvalidSpecs)
{
    Matrix notorth = Matrix::Identity(4, 4);
    notorth(0, 1) = 0.5;
    EXPECT_THROW(make_subsampled_unitary({notorth, {0}, {4, 1}}), ContractError);
    EXPECT_THROW(make_subsampled_unitary({Matrix::Identity(4, 4), {}, {4, 1}}), ContractError);
    EXPECT_THROW(make_subsampled_unitary({Matrix::Identity(4, 4), {4}, {4, 1}}), ContractError);
    EXPECT_THROW(make_subsampled_unitary({Matrix::Identity(4, 4), {0}, {2, 3}}), ContractError);
}

TEST(ToDense, SmallOperators)
{
    EXPECT_TRUE(to_dense(make_identity({2, 2})).isIdentity(0.0));
    Matrix k(2, 2);
    k << 1, 0, 1, 1;
    EXPECT_EQ(to_dense(make_cumsum(2, 1)), k);
    EXPECT_THROW(to_dense(make_identity({65, 64})), InputError);
}

TEST(ToDense, MatrixProductMatchesApply)
{
    const LinOp a = compose(make_stripe_mask({8, {0, 1}, true}, 6), make_cumsum(6, 8));
    const Matrix d = to_dense(a);
    const Image x = random_image(a.in_shape(), 4);
    EXPECT_LE((d * flatten(x) - flatten(a.apply(x))).cwiseAbs().maxCoeff(), 1e-14);
    const LinOp back = make_dense(d, a.in_shape(), a.out_shape());
    EXPECT_LE(max_abs(back.apply(x) - a.apply(x)), 1e-14);
}
