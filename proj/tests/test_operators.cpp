#include "oracles.hpp"

#include "ule/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace ule;

namespace {

Matrix sigma_x() {
    Matrix x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    return x;
}

Matrix diag(std::initializer_list<double> v) {
    Matrix m = Matrix::Zero(static_cast<Index>(v.size()), static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) m(i, i) = x, ++i;
    return m;
}

} // namespace

TEST(HermitianOperator, RejectsNonHermitianInput) {
    Matrix m(2, 2);
    m << 0.0, 1.0, 0.5, 0.0;
    try {
        HermitianOperator h(m);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos) << e.what();
    }
}

TEST(HermitianOperator, AcceptsRoundoffAsymmetry) {
    Matrix m = sigma_x();
    m(0, 1) += 1e-15;
    EXPECT_NO_THROW(HermitianOperator{m});
}

TEST(DensityMatrix, ValidatesTraceAndPositivity) {
    EXPECT_THROW(DensityMatrix(diag({0.5, 0.6})), ValidationError);
    EXPECT_THROW(DensityMatrix(diag({1.2, -0.2})), ValidationError);
    EXPECT_NO_THROW(DensityMatrix(diag({1.0, 0.0})));
    Matrix coh = 0.5 * Matrix::Ones(2, 2);
    EXPECT_NEAR(DensityMatrix(coh).min_eigenvalue(), 0.0, 1e-15);
}

TEST(TraceDistance, OrthogonalPureStatesAreAtDistanceOne) {
    EXPECT_NEAR(trace_distance(diag({1.0, 0.0}), diag({0.0, 1.0})), 1.0, 1e-15);
    EXPECT_NEAR(trace_distance(diag({0.3, 0.7}), diag({0.3, 0.7})), 0.0, 1e-15);
}

TEST(Eigendecompose, MatchesJacobiOracleOnRandomMatrices) {
    std::mt19937_64 rng(11);
    for (Index d = 2; d <= 8; ++d) {
        const Matrix h = oracle::random_hermitian(d, rng);
        const EigenDecomposition eig = eigendecompose(HermitianOperator(h));
        const auto ref = oracle::hermitian_eigenvalues(h);
        for (Index i = 0; i < d; ++i) EXPECT_NEAR(eig.energies(i), ref[i], 1e-12) << "d=" << d;
        EXPECT_LE((eig.reconstruct() - h).norm(), 1e-12 * std::max(1.0, h.norm()));
        EXPECT_LE((eig.basis.adjoint() * eig.basis - Matrix::Identity(d, d)).norm(), 1e-12);
    }
}

TEST(Eigendecompose, PhaseConventionMakesPivotRealPositive) {
    std::mt19937_64 rng(5);
    const EigenDecomposition eig = eigendecompose(HermitianOperator(oracle::random_hermitian(5, rng)));
    for (Index c = 0; c < 5; ++c) {
        Index best = 0;
        for (Index r = 1; r < 5; ++r) {
            if (std::abs(eig.basis(r, c)) > std::abs(eig.basis(best, c))) best = r;
        }
        EXPECT_GT(eig.basis(best, c).real(), 0.0);
        EXPECT_EQ(eig.basis(best, c).imag(), 0.0);
    }
}

TEST(BohrDecompose, QubitSigmaXHasThreeBins) {
    const EigenDecomposition eig = eigendecompose(HermitianOperator(diag({0.0, 1.5})));
    const BohrDecomposition bohr = bohr_decompose(HermitianOperator(sigma_x()), eig);
    ASSERT_EQ(bohr.size(), 3u);
    EXPECT_DOUBLE_EQ(bohr.frequency(0), -1.5);
    EXPECT_EQ(bohr.frequency(1), 0.0);
    EXPECT_DOUBLE_EQ(bohr.frequency(2), 1.5);
    EXPECT_EQ(bohr.mirror(0), 2u);
    // A(1.5) = P_0 X P_1 lowers the energy
    Matrix lower = Matrix::Zero(2, 2);
    lower(0, 1) = 1.0;
    EXPECT_LE((bohr.component(2) - lower).norm(), 1e-15);
    EXPECT_LE(bohr.component(1).norm(), 1e-15);
}

TEST(BohrDecompose, ComponentsSumToCouplingOperator) {
    std::mt19937_64 rng(3);
    for (Index d = 2; d <= 6; ++d) {
        const Matrix h = oracle::random_hermitian(d, rng);
        const Matrix x = oracle::random_hermitian(d, rng);
        const EigenDecomposition eig = eigendecompose(HermitianOperator(h));
        const BohrDecomposition bohr = bohr_decompose(HermitianOperator(x), eig);
        Matrix sum = Matrix::Zero(d, d);
        for (std::size_t k = 0; k < bohr.size(); ++k) {
            sum += bohr.component(k);
            // A(w)^+ = A(-w)
            EXPECT_LE((bohr.component(k).adjoint() - bohr.component(bohr.mirror(k))).norm(), 1e-12);
            EXPECT_EQ(bohr.frequency(k), -bohr.frequency(bohr.mirror(k)));
        }
        EXPECT_LE((sum - x).norm(), 1e-12 * x.norm());
        EXPECT_EQ(bohr.size(), static_cast<std::size_t>(d * (d - 1) + 1));  // generic spectrum
    }
}

TEST(BohrDecompose, DegenerateGapsShareOneBin) {
    // equally spaced ladder: gaps 1 and 2 each appear more than once
    const EigenDecomposition eig = eigendecompose(HermitianOperator(diag({0.0, 1.0, 2.0})));
    const BohrDecomposition bohr = bohr_decompose(HermitianOperator(Matrix::Ones(3, 3)), eig);
    ASSERT_EQ(bohr.size(), 5u);
    const auto k = bohr.find(1.0);
    ASSERT_TRUE(k.has_value());
    EXPECT_EQ(bohr.transitions(*k).size(), 2u);
}

TEST(BohrDecompose, NearDegeneracyWithinToleranceIsMerged) {
    const EigenDecomposition eig = eigendecompose(HermitianOperator(diag({0.0, 1.0, 2.0 + 1e-12})));
    const BohrDecomposition bohr = bohr_decompose(HermitianOperator(Matrix::Ones(3, 3)), eig);
    EXPECT_EQ(bohr.size(), 5u);
}

TEST(BohrDecompose, ChainedGapsAreRejectedAsAmbiguous) {
    // gaps 1, 1 + 0.6 tol, 1 + 1.2 tol chain into one cluster wider than tol
    const double tol = 1e-3;
    const EigenDecomposition eig =
        eigendecompose(HermitianOperator(diag({0.0, 1.0, 2.0 + 0.6 * tol, 3.0 + 1.8 * tol})));
    EXPECT_THROW(bohr_decompose(HermitianOperator(Matrix::Ones(4, 4)), eig, tol), ValidationError);
}

TEST(GibbsState, InfiniteTemperatureIsMaximallyMixed) {
    std::mt19937_64 rng(2);
    const EigenDecomposition eig = eigendecompose(HermitianOperator(oracle::random_hermitian(4, rng)));
    EXPECT_LE((gibbs_state(eig, 0.0).matrix() - 0.25 * Matrix::Identity(4, 4)).norm(), 1e-14);
    EXPECT_THROW(gibbs_state(eig, -1.0), ValidationError);
}

TEST(GibbsState, MatchesOracleAndSurvivesLargeBeta) {
    std::mt19937_64 rng(8);
    const Matrix h = oracle::random_hermitian(5, rng, 10.0);
    const EigenDecomposition eig = eigendecompose(HermitianOperator(h));
    std::vector<double> e(eig.energies.data(), eig.energies.data() + 5);
    for (double beta : {0.1, 1.0, 50.0, 1e4}) {
        const Matrix ref = oracle::gibbs(eig.basis, e, beta);
        EXPECT_LE((gibbs_state(eig, beta).matrix() - ref).norm(), 1e-12) << beta;
    }
}

TEST(GibbsState, ThermalShiftIdentityHoldsForEveryBohrComponent) {
    std::mt19937_64 rng(21);
    for (Index d = 2; d <= 6; ++d) {
        const Matrix h = oracle::random_hermitian(d, rng);
        const Matrix x = oracle::random_hermitian(d, rng);
        const EigenDecomposition eig = eigendecompose(HermitianOperator(h));
        const BohrDecomposition bohr = bohr_decompose(HermitianOperator(x), eig);
        const double beta = 0.7;
        const DensityMatrix rho = gibbs_state(eig, beta);
        for (std::size_t k = 0; k < bohr.size(); ++k) {
            const Matrix a = bohr.component(k);
            const double scale = std::max(1.0, std::exp(beta * bohr.frequency(k))) * a.norm();
            EXPECT_LE(thermal_shift_residual(rho, a, bohr.frequency(k), beta), 1e-13 * std::max(scale, 1e-300));
        }
    }
}
