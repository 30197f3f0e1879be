#include <gtest/gtest.h>

#include <algorithm>
#include <optional>

#include "support.hpp"

using namespace seqmps;
using namespace testing_support;

namespace {

Matrix jordan_block(Complex lambda, Eigen::Index size) {
    Matrix j = lambda * Matrix::Identity(size, size);
    for (Eigen::Index i = 0; i + 1 < size; ++i)
        j(i, i + 1) = 1.0;
    return j;
}

std::vector<std::pair<Complex, std::size_t>> sorted_blocks(const JordanStructure &s) {
    std::vector<std::pair<Complex, std::size_t>> out;
    for (const auto &b : s.blocks)
        out.emplace_back(b.lambda, b.size);
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) {
        if (std::abs(a.first.real() - b.first.real()) > 1e-9)
            return a.first.real() < b.first.real();
        return a.second < b.second;
    });
    return out;
}

// Coefficient error between two closed forms, matched by lambda / location.
double coefficient_error(const ClosedForm &want, const ClosedForm &got) {
    double worst = 0.0;
    std::vector<bool> used(got.exp_terms.size(), false);
    for (const auto &w : want.exp_terms) {
        std::size_t best = got.exp_terms.size();
        for (std::size_t i = 0; i < got.exp_terms.size(); ++i)
            if (!used[i] && (best == got.exp_terms.size() ||
                             std::abs(got.exp_terms[i].lambda - w.lambda) <
                                 std::abs(got.exp_terms[best].lambda - w.lambda)))
                best = i;
        if (best == got.exp_terms.size())
            return 1e300;
        used[best] = true;
        const auto &g = got.exp_terms[best];
        worst = std::max(worst, std::abs(g.lambda - w.lambda));
        for (std::size_t k = 0; k < std::max(w.poly.size(), g.poly.size()); ++k) {
            const Complex a = k < w.poly.size() ? w.poly[k] : Complex{};
            const Complex b = k < g.poly.size() ? g.poly[k] : Complex{};
            worst = std::max(worst, std::abs(a - b));
        }
    }
    for (std::size_t i = 0; i < got.exp_terms.size(); ++i)
        if (!used[i])
            return 1e300;
    for (std::size_t l = 0; l <= 8; ++l) {
        Complex a{}, b{};
        for (const auto &d : want.delta_terms)
            if (d.location == l)
                a += d.coeff;
        for (const auto &d : got.delta_terms)
            if (d.location == l)
                b += d.coeff;
        worst = std::max(worst, std::abs(a - b));
    }
    return worst;
}

} // namespace

TEST(JordanPower, PaperSpecialization) {
    Matrix want(2, 2);
    want << 1.0, 5.0, 0.0, 1.0;
    EXPECT_LT((jordan_power(1.0, 2, 5) - want).norm(), 1e-12);
}

TEST(JordanPower, Nilpotent) {
    Matrix one(2, 2);
    one << 0.0, 1.0, 0.0, 0.0;
    EXPECT_LT((jordan_power(0.0, 2, 1) - one).norm(), 1e-14);
    EXPECT_LT(jordan_power(0.0, 2, 2).norm(), 1e-14);
    EXPECT_LT((jordan_power(0.0, 3, 0) - Matrix::Identity(3, 3)).norm(), 1e-14);
}

TEST(JordanPower, BinomialEntry) {
    EXPECT_NEAR(std::abs(jordan_power(2.0, 3, 4)(0, 2) - 24.0), 0.0, 1e-12);
}

TEST(JordanPower, MatchesIteratedMultiplication) {
    Rng rng(21);
    for (int trial = 0; trial < 40; ++trial) {
        const Complex lambda = std::polar(uniform(rng, 0.0, 2.0), uniform(rng, -M_PI, M_PI));
        for (Eigen::Index size = 1; size <= 5; ++size) {
            const Matrix j = jordan_block(lambda, size);
            for (std::size_t n = 0; n <= 20; ++n) {
                const Matrix want = matrix_power(j, n);
                EXPECT_LE((jordan_power(lambda, static_cast<std::size_t>(size), n) - want).cwiseAbs().maxCoeff(),
                          1e-10 * std::max(1.0, want.cwiseAbs().maxCoeff()));
            }
        }
    }
}

TEST(JordanDecompose, Diagonal) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 2.0;
    m(1, 1) = 3.0;
    const auto s = jordan_decompose(m);
    const auto blocks = sorted_blocks(s);
    ASSERT_EQ(blocks.size(), 2U);
    EXPECT_NEAR(std::abs(blocks[0].first - 2.0), 0.0, 1e-9);
    EXPECT_EQ(blocks[0].second, 1U);
    EXPECT_NEAR(std::abs(blocks[1].first - 3.0), 0.0, 1e-9);
}

TEST(JordanDecompose, AlreadyJordan) {
    const auto s = jordan_decompose(jordan_block(1.0, 2));
    ASSERT_EQ(s.blocks.size(), 1U);
    EXPECT_EQ(s.blocks[0].size, 2U);
    EXPECT_NEAR(std::abs(s.blocks[0].lambda - 1.0), 0.0, 1e-9);
}

TEST(JordanDecompose, WNormCore) {
    // Full 4x4 W-norm core: one size-2 block at 1 plus two more unit eigenvalues.
    const auto f = norm_sequence(w_state());
    const auto s = jordan_decompose(f.core());
    std::size_t total = 0, largest = 0;
    for (const auto &b : s.blocks) {
        total += b.size;
        largest = std::max(largest, b.size);
        EXPECT_NEAR(std::abs(b.lambda - 1.0), 0.0, 1e-9);
    }
    EXPECT_EQ(total, 4U);
    EXPECT_EQ(largest, 2U);
    EXPECT_LT((s.reconstruct() - f.core()).norm(), 1e-8 * f.core().norm());
}

TEST(JordanDecompose, ReconstructsRandomAndDefective) {
    Rng rng(22);
    for (int trial = 0; trial < 60; ++trial) {
        const auto dim = static_cast<Eigen::Index>(pick(rng, 1, 7));
        Matrix m;
        std::vector<std::size_t> hidden;
        if (trial % 2 == 0) {
            m = random_matrix(rng, dim, dim);
        } else {
            // Hidden Jordan structure behind a well-conditioned similarity.
            Matrix j = Matrix::Zero(dim, dim);
            Eigen::Index at = 0;
            while (at < dim) {
                const Eigen::Index size = std::min<Eigen::Index>(dim - at, static_cast<Eigen::Index>(pick(rng, 1, 3)));
                j.block(at, at, size, size) = jordan_block(static_cast<double>(pick(rng, 0, 2)), size);
                hidden.push_back(static_cast<std::size_t>(size));
                at += size;
            }
            const Matrix s = Matrix::Identity(dim, dim) + 0.3 * random_matrix(rng, dim, dim);
            m = s * j * s.inverse();
        }
        // A size-k block splits by about eps^(1/k) under roundoff, so the
        // default tolerance may refuse; it must then say so, and the
        // escalation ladder used by closed_form must succeed.
        std::optional<JordanStructure> structure;
        for (double rel = 1e-7; rel <= 1.01e-3 && !structure; rel *= 100.0) {
            try {
                structure = jordan_decompose(m, rel * m.norm());
            } catch (const Error &e) {
                EXPECT_EQ(e.kind(), ErrorKind::IllConditionedSimilarity) << "trial " << trial;
            }
        }
        ASSERT_TRUE(structure.has_value()) << "trial " << trial;
        std::size_t total = 0;
        for (const auto &b : structure->blocks)
            total += b.size;
        EXPECT_EQ(total, static_cast<std::size_t>(dim));
        EXPECT_LE((structure->reconstruct() - m).norm(), 1e-8 * std::max(1.0, m.norm())) << "trial " << trial;
        if (!hidden.empty()) {
            std::vector<std::size_t> got;
            for (const auto &b : structure->blocks)
                got.push_back(b.size);
            std::sort(got.begin(), got.end());
            std::sort(hidden.begin(), hidden.end());
            EXPECT_EQ(got, hidden) << "trial " << trial;
        }
    }
}

TEST(ClosedForm, WAndCatNorms) {
    const auto w = closed_form(norm_sequence(w_state()));
    ASSERT_EQ(w.exp_terms.size(), 1U);
    EXPECT_NEAR(std::abs(w.exp_terms[0].lambda - 1.0), 0.0, 1e-9);
    ASSERT_EQ(w.exp_terms[0].poly.size(), 2U);
    EXPECT_NEAR(std::abs(w.exp_terms[0].poly[1] - 1.0), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(w.exp_terms[0].poly[0]), 0.0, 1e-6);
    EXPECT_TRUE(w.delta_terms.empty());

    const auto cat = closed_form(norm_sequence(cat_state()));
    ASSERT_EQ(cat.exp_terms.size(), 1U);
    EXPECT_NEAR(std::abs(cat.exp_terms[0].lambda - 1.0), 0.0, 1e-9);
    ASSERT_EQ(cat.exp_terms[0].poly.size(), 1U);
    EXPECT_NEAR(std::abs(cat.exp_terms[0].poly[0] - 2.0), 0.0, 1e-6);
    // The empty chain contributes (L.R)^2 = 4 at n = 0.
    ASSERT_EQ(cat.delta_terms.size(), 1U);
    EXPECT_EQ(cat.delta_terms[0].location, 0U);
    EXPECT_NEAR(std::abs(cat.delta_terms[0].coeff - 2.0), 0.0, 1e-6);
}

TEST(ClosedForm, RoundTrip) {
    Rng rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const auto cf = random_closed_form(rng);
        const auto got = closed_form(from_closed_form(cf));
        EXPECT_LE(coefficient_error(cf, got), 1e-6) << "trial " << trial;
    }
}

TEST(ClosedForm, RandomElementsMatchEval) {
    Rng rng(24);
    for (int trial = 0; trial < 60; ++trial) {
        const auto f = random_sequence(rng, pick(rng, 1, 8));
        const auto cf = closed_form(f);
        for (std::size_t n = 0; n <= 24; ++n)
            EXPECT_LE(std::abs(cf(n) - f(n)), 1e-6 * (1.0 + std::abs(f(n)))) << "trial " << trial << " n " << n;
        for (const auto &t : cf.exp_terms)
            EXPECT_GT(std::abs(t.lambda), 0.0);
        for (const auto &d : cf.delta_terms)
            EXPECT_LT(d.location, f.dim());
    }
}

TEST(ClosedForm, ViaJordanAgrees) {
    Rng rng(25);
    for (int trial = 0; trial < 30; ++trial) {
        const auto f = random_sequence(rng, pick(rng, 1, 6));
        const auto cf = closed_form_via_jordan(f, jordan_decompose(f.core()));
        for (std::size_t n = 0; n <= 18; ++n)
            EXPECT_LE(std::abs(cf(n) - f(n)), 1e-6 * (1.0 + std::abs(f(n))));
    }
}

TEST(ClosedForm, PerturbedDefectiveBlockStillFits) {
    // A perturbed size-3 block splits far beyond a tiny explicit tolerance.
    Matrix core = jordan_block(1.0, 3);
    core(2, 0) = 1e-10;
    const SequenceElement f(Vector::Unit(3, 0), core, Vector::Unit(3, 2));
    const auto automatic = closed_form(f);
    for (std::size_t n = 0; n <= 9; ++n)
        EXPECT_LE(std::abs(automatic(n) - f(n)), 1e-6 * (1.0 + std::abs(f(n))));
}

TEST(LimitBehavior, Classes) {
    EXPECT_EQ(limit_behavior(closed_form(norm_sequence(w_state()))).kind, GrowthKind::PolynomialGrowth);
    EXPECT_EQ(limit_behavior(closed_form(norm_sequence(w_state()))).degree, 1U);

    ClosedForm deltas;
    deltas.delta_terms = {{0, 1.0}, {3, -2.0}};
    EXPECT_EQ(limit_behavior(deltas).kind, GrowthKind::EventuallyZero);

    ClosedForm growth;
    growth.exp_terms = {{2.0, {1.0}}, {1.0, {0.0, 1.0}}};
    const auto a = limit_behavior(growth);
    EXPECT_EQ(a.kind, GrowthKind::ExponentialGrowth);
    EXPECT_NEAR(a.modulus, 2.0, 1e-12);
    EXPECT_EQ(a.degree, 0U);
    EXPECT_EQ(format_asymptotic(a), "ExponentialGrowth(2, 0)");

    ClosedForm decay;
    decay.exp_terms = {{0.5, {3.0}}};
    EXPECT_EQ(limit_behavior(decay).kind, GrowthKind::Decaying);

    ClosedForm alternating;
    alternating.exp_terms = {{1.0, {1.0}}, {-1.0, {1.0}}};
    const auto b = limit_behavior(alternating);
    EXPECT_EQ(b.kind, GrowthKind::Bounded);
    EXPECT_TRUE(b.oscillatory);
    EXPECT_EQ(b.dominant.size(), 2U);
}

TEST(LimitBehavior, EventuallyZeroMatchesScalarRing) {
    Rng rng(26);
    for (int trial = 0; trial < 60; ++trial) {
        SequenceElement f = random_sequence(rng, pick(rng, 1, 4));
        if (trial % 2 == 0) {
            // Strictly upper-triangular core: nilpotent, so eventually zero.
            Matrix core = f.core().triangularView<Eigen::StrictlyUpper>();
            f = SequenceElement(f.left(), core, f.right());
        }
        const bool via_limit = limit_behavior(closed_form(f)).kind == GrowthKind::EventuallyZero;
        EXPECT_EQ(via_limit, is_eventually_zero(f)) << "trial " << trial;
    }
}

TEST(ClosedFormFormat, CanonicalOrder) {
    ClosedForm cf;
    cf.exp_terms = {{1.0, {0.0, -2.0, 1.0}}, {2.0, {3.0}}};
    cf.delta_terms = {{3, 1.0}, {0, Complex(0.0, 1.0)}};
    EXPECT_EQ(format_closed_form(cf), "3·n^0·(2)^n + 1·n^2·(1)^n + -2·n^1·(1)^n + (0+1i)·δ(n,0) + 1·δ(n,3)");
    EXPECT_EQ(format_closed_form(ClosedForm{}), "0");
}

TEST(ClosedFormFormat, ComplexLiterals) {
    EXPECT_EQ(format_complex({1.5, -2.0}), "1.5-2i");
    EXPECT_EQ(format_complex({-0.0, 0.0}), "0");
    EXPECT_EQ(format_complex({1.0 / 3.0, 1e-20}), "0.333333333333");
}
