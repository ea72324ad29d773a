#include <gtest/gtest.h>

#include <random>

#include "parlshift/align.hpp"
#include "support.hpp"

using namespace parlshift;
using namespace parlshift::align;

namespace {

double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.values().size(); ++i)
        worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    return worst;
}

embed::EmbeddingModel random_model(std::size_t n, std::size_t dim, std::mt19937_64& rng, const std::string& prefix = "w") {
    embed::EmbeddingModel m;
    m.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        m.vocab.push_back(prefix + std::to_string(i));
        m.counts.push_back(n - i);
    }
    m.rebuild_index();
    std::normal_distribution<float> g;
    m.target = Matrix<float>(n, dim);
    m.context = Matrix<float>(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            m.target(i, j) = g(rng);
            m.context(i, j) = g(rng);
        }
    return m;
}

} // namespace

TEST(Svd, ReconstructsInput) {
    std::mt19937_64 rng(1);
    const auto a = support::random_matrix(9, 6, rng);
    const auto svd = jacobi_svd(a);
    EXPECT_TRUE(svd.converged);
    Matrix<double> us = svd.u;
    for (std::size_t i = 0; i < us.rows(); ++i)
        for (std::size_t j = 0; j < us.cols(); ++j)
            us(i, j) *= svd.singular[j];
    EXPECT_LT(max_abs_diff(us * svd.v.transposed(), a), 1e-10);
    EXPECT_LT(orthogonality_defect(svd.u), 1e-10);
    EXPECT_LT(orthogonality_defect(svd.v), 1e-10);
}

TEST(Svd, RankDeficientStillOrthonormal) {
    Matrix<double> a(4, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        a(i, 0) = static_cast<double>(i + 1);
        a(i, 1) = 2.0 * static_cast<double>(i + 1);
    }
    const auto svd = jacobi_svd(a);
    EXPECT_LT(orthogonality_defect(svd.u), 1e-10);
}

TEST(Procrustes, RecoversPlantedRotation) {
    std::mt19937_64 rng(2);
    const std::size_t d = 50, n = 1000;
    const auto x = support::random_matrix(n, d, rng);
    const auto r = support::random_orthogonal(d, rng);
    const auto res = orthogonal_procrustes(x, x * r);
    EXPECT_LT(max_abs_diff(res.rotation, r), 1e-4);
    EXPECT_LE(orthogonality_defect(res.rotation), 1e-6);
    EXPECT_FALSE(res.rank_deficient);
}

TEST(Procrustes, IdenticalInputsGiveIdentity) {
    std::mt19937_64 rng(3);
    const auto x = support::random_matrix(40, 8, rng);
    EXPECT_LT(max_abs_diff(orthogonal_procrustes(x, x).rotation, Matrix<double>::identity(8)), 1e-9);
}

TEST(Procrustes, NoRandomRotationDoesBetter) {
    std::mt19937_64 rng(4);
    const std::size_t d = 5;
    const auto x = support::random_matrix(30, d, rng);
    const auto y = support::random_matrix(30, d, rng);
    const auto res = orthogonal_procrustes(x, y);
    const double best = frobenius_distance(x * res.rotation, y);
    for (int i = 0; i < 500; ++i) {
        const auto q = support::random_orthogonal(d, rng);
        ASSERT_LE(best, frobenius_distance(x * q, y) + 1e-12);
    }
}

TEST(Procrustes, ShapeErrors) {
    EXPECT_THROW(orthogonal_procrustes(Matrix<double>(5, 3), Matrix<double>(5, 4)), InputError);
    EXPECT_THROW(orthogonal_procrustes(Matrix<double>(2, 3), Matrix<double>(2, 3)), InputError);
}

TEST(AlignModels, RecoversRotatedModel) {
    std::mt19937_64 rng(5);
    const auto src = random_model(200, 10, rng);
    const auto q = support::random_orthogonal(10, rng);
    auto ref = src;
    detail::rotate_rows(ref.target, q);
    detail::rotate_rows(ref.context, q);
    const auto aligned = align_models(src, ref);
    EXPECT_EQ(aligned.alignment.shared_words.size(), 200u);
    EXPECT_LT(aligned.alignment.residual, 1e-6);
    EXPECT_LT(max_abs_diff(aligned.alignment.rotation, q), 1e-6);
    for (std::size_t i = 0; i < 200; ++i)
        for (std::size_t j = 0; j < 10; ++j) {
            ASSERT_NEAR(aligned.model.target(i, j), ref.target(i, j), 1e-4);
            ASSERT_NEAR(aligned.model.context(i, j), ref.context(i, j), 1e-4);
        }
}

TEST(AlignModels, PartialOverlapUsesSharedWordsOnly) {
    std::mt19937_64 rng(6);
    auto src = random_model(60, 6, rng);
    auto ref = random_model(60, 6, rng);
    for (std::size_t i = 0; i < 20; ++i)
        ref.vocab[i] = "other" + std::to_string(i);
    ref.rebuild_index();
    const auto a = align_models(src, ref);
    EXPECT_EQ(a.alignment.shared_words.size(), 40u);
    EXPECT_EQ(a.model.vocab, src.vocab);
    EXPECT_LE(a.alignment.residual, a.alignment.unaligned_residual + 1e-12);
}

TEST(AlignModels, DisjointOrTooFewSharedWordsRejected) {
    std::mt19937_64 rng(7);
    const auto a = random_model(30, 5, rng, "a");
    const auto b = random_model(30, 5, rng, "b");
    EXPECT_THROW(align_models(a, b), InputError);
    auto c = random_model(30, 5, rng, "a");
    for (std::size_t i = 4; i < 30; ++i)
        c.vocab[i] = "c" + std::to_string(i);
    c.rebuild_index();
    EXPECT_THROW(align_models(a, c), InputError);
    EXPECT_THROW(align_models(a, random_model(30, 6, rng, "a")), InputError);
}

TEST(AlignModels, ResidualNeverExceedsUnaligned) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_model(40, 4, rng), b = random_model(40, 4, rng);
        for (bool center : {false, true}) {
            const auto r = align_models(a, b, {center, embed::MatrixKind::target});
            EXPECT_LE(r.alignment.residual, r.alignment.unaligned_residual + 1e-12);
            EXPECT_LE(orthogonality_defect(r.alignment.rotation), 1e-9);
        }
    }
}
