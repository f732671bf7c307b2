#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qapswarm/assignment.hpp"

using namespace qapswarm;

TEST(EvaluateCost, HandSum) {
    const auto inst = parse_instance("2  0 1  1 0   0 3  3 0");
    EXPECT_EQ(evaluate_cost(inst, Assignment::identity(2)), 6);
    EXPECT_EQ(evaluate_cost_exact(inst, Assignment::identity(2).perm()), 6);
}

TEST(EvaluateCost, DimensionMismatch) {
    const auto inst = parse_instance("2  0 1  1 0   0 3  3 0");
    EXPECT_THROW(evaluate_cost(inst, Assignment::identity(3)), std::invalid_argument);
}

TEST(EvaluateCost, MatchesQuadrupleSumOracle) {
    std::mt19937 gen(11);
    for (std::uint32_t s = 0; s < 40; ++s) {
        const auto inst = oracle::random_instance(2 + s % 7, 100 + s, 50);
        for (int k = 0; k < 10; ++k) {
            const auto perm = oracle::random_perm(inst.n, gen);
            ASSERT_EQ(evaluate_cost_exact(inst, perm), oracle::quadruple_sum(inst, perm));
            ASSERT_EQ(evaluate_cost(inst, perm), static_cast<double>(oracle::quadruple_sum(inst, perm)));
        }
    }
}

TEST(EvaluateCost, BruteForceMinimumOverAllPermutationsOfSix) {
    const auto inst = oracle::random_instance(6, 4242, 20);
    std::vector<Location> perm{0, 1, 2, 3, 4, 5};
    std::int64_t lib_min = std::numeric_limits<std::int64_t>::max();
    std::int64_t oracle_min = lib_min;
    do {
        lib_min = std::min(lib_min, evaluate_cost_exact(inst, perm));
        oracle_min = std::min(oracle_min, oracle::quadruple_sum(inst, perm));
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_EQ(lib_min, oracle_min);
}

// Relabeling facilities by sigma in the flow matrix and in perm leaves the cost unchanged.
TEST(EvaluateCost, FacilityRelabelingInvariance) {
    std::mt19937 gen(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 3 + trial % 6;
        const auto inst = oracle::random_instance(n, 900 + trial, 30);
        const auto perm = oracle::random_perm(n, gen);
        const auto sigma = oracle::random_perm(n, gen);
        SquareMatrix<double> flow(n);
        std::vector<Location> relabeled(n);
        for (std::size_t i = 0; i < n; ++i) {
            relabeled[sigma[i]] = perm[i];
            for (std::size_t j = 0; j < n; ++j) flow(sigma[i], sigma[j]) = inst.flow(i, j);
        }
        const auto other = make_instance(flow, inst.distance);
        EXPECT_EQ(evaluate_cost(inst, perm), evaluate_cost(other, relabeled));
    }
}

TEST(EvaluateCost, RealValuedFallback) {
    const auto inst = parse_instance("2 0 0.5 0.25 0 0 2 4 0");
    EXPECT_FALSE(inst.integral);
    EXPECT_DOUBLE_EQ(evaluate_cost(inst, Assignment::identity(2)), 0.5 * 2 + 0.25 * 4);
    EXPECT_THROW(evaluate_cost_exact(inst, Assignment::identity(2).perm()), std::invalid_argument);
}

TEST(EvaluateCost, LargeIntegerCostsStayExact) {
    // 3e9-scale costs exceed 32 bits.
    const auto inst = parse_instance("2 0 60000 50000 0 0 30000 40000 0");
    EXPECT_EQ(evaluate_cost_exact(inst, Assignment::identity(2).perm()), 60000LL * 30000 + 50000LL * 40000);
}

TEST(MatrixToAssignment, Identity) {
    SquareMatrix<Bit> x{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    EXPECT_EQ(matrix_to_assignment(x), Assignment::identity(3));
}

TEST(MatrixToAssignment, WorkedExampleMatrix) {
    SquareMatrix<Bit> x{{1, 0, 0}, {0, 0, 1}, {0, 1, 0}};
    EXPECT_EQ(matrix_to_assignment(x).perm()[1], 2);
    EXPECT_EQ(matrix_to_assignment(x), Assignment({0, 2, 1}));
}

TEST(MatrixToAssignment, RejectsInvalidMatrices) {
    EXPECT_THROW(matrix_to_assignment(SquareMatrix<Bit>{{1, 0}, {1, 0}}), std::invalid_argument);
    EXPECT_THROW(matrix_to_assignment(SquareMatrix<Bit>{{1, 1}, {0, 0}}), std::invalid_argument);
    EXPECT_THROW(matrix_to_assignment(SquareMatrix<double>{{1, 0}, {0, 0.5}}), std::invalid_argument);
}

TEST(MatrixToAssignment, InverseOfMatrixView) {
    std::mt19937 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Assignment a(oracle::random_perm(1 + trial % 12, gen));
        const auto x = a.matrix();
        EXPECT_EQ(matrix_to_assignment(x), a);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(x(a[i], i), 1);
    }
}

TEST(AssignmentType, RejectsNonBijection) {
    EXPECT_THROW(Assignment({0, 0}), std::invalid_argument);
    EXPECT_THROW(Assignment({0, 2}), std::invalid_argument);
}

TEST(Gap, TableValues) {
    EXPECT_DOUBLE_EQ(gap(9552, 9552), 0.0);
    EXPECT_NEAR(gap(5429693, 5426670), 0.000557, 5e-7);
    EXPECT_NEAR(gap(530816224, 498896643), 0.0640, 5e-5);
    EXPECT_THROW(gap(1, 0), std::invalid_argument);
    EXPECT_THROW(gap(1, -3), std::invalid_argument);
}
