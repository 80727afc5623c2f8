#include "oracles.hpp"

#include "ule/dynamics.hpp"
#include "ule/generator.hpp"
#include "ule/systems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace ule;

namespace {

Superoperator qubit_liouvillian(double temperature, double gamma, bool lamb = true) {
    const HermitianOperator h = qubit_hamiltonian(1.0);
    const EigenDecomposition eig = eigendecompose(h);
    const NoiseChannel ch{qubit_coupling(), BathSpec::make(temperature, gamma, 100.0)};
    return build_liouvillian(make_ule_generator(h, eig, ch, {}, lamb), lamb);
}

Superoperator three_level_liouvillian(double temperature, double gamma, bool lamb = true) {
    const HermitianOperator h = three_level_hamiltonian();
    const EigenDecomposition eig = eigendecompose(h);
    const NoiseChannel ch{three_level_coupling(), BathSpec::make(temperature, gamma, 100.0)};
    return build_liouvillian(make_ule_generator(h, eig, ch, {}, lamb), lamb);
}

DensityMatrix excited_qubit() {
    Matrix rho = Matrix::Zero(2, 2);
    rho(1, 1) = 1.0;
    return DensityMatrix(rho);
}

std::vector<double> uniform(double t_end, int n) {
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i) ts[i] = t_end * i / (n - 1);
    return ts;
}

} // namespace

TEST(Expectation, RejectsNonHermitianProducts) {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    Matrix o = Matrix::Zero(2, 2);
    o(0, 0) = Complex(0.0, 1.0);
    EXPECT_THROW(expectation(rho, o), NumericalError);
    EXPECT_DOUBLE_EQ(expectation(rho, Matrix::Identity(2, 2)), 1.0);
}

TEST(Propagate, QubitPopulationFollowsRateEquation) {
    // Diagonal states stay diagonal; the excited population relaxes with rate
    // G = c^2 (g(1)^2 + g(-1)^2) towards the Boltzmann value.
    const double t = 1.0, gamma = 0.1;
    const Superoperator s = qubit_liouvillian(t, gamma);
    const double c2 = 4.0 * std::numbers::pi * std::numbers::pi * gamma;
    const double down = c2 * std::pow(oracle::g(1.0, t, 100.0), 2);
    const double up = c2 * std::pow(oracle::g(-1.0, t, 100.0), 2);
    const double p_eq = up / (up + down);

    const auto ts = uniform(40.0, 41);
    const Trajectory traj = propagate(s, excited_qubit(), 40.0, ts, 1e-10);
    ASSERT_EQ(traj.states.size(), ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double exact = p_eq + (1.0 - p_eq) * std::exp(-(up + down) * ts[i]);
        EXPECT_NEAR(traj.states[i].matrix()(1, 1).real(), exact, 1e-8) << ts[i];
    }
    EXPECT_LE(traj.max_trace_drift, 1e-10);
    EXPECT_GE(traj.min_eigenvalue, -1e-8);
}

TEST(Propagate, DenseAndEigenbasisPathsAgree) {
    const Superoperator s = three_level_liouvillian(2.0, 0.1);
    Superoperator dense = s;
    dense.form.reset();
    std::mt19937_64 rng(1);
    const DensityMatrix rho0(oracle::random_density(3, rng));
    const auto ts = uniform(20.0, 11);
    const Trajectory a = propagate(s, rho0, 20.0, ts, 1e-11);
    const Trajectory b = propagate(dense, rho0, 20.0, ts, 1e-11);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        EXPECT_LE(trace_distance(a.states[i], b.states[i]), 1e-8) << ts[i];
    }
}

TEST(Propagate, RecordsObservablesAndContracts) {
    const Superoperator s = three_level_liouvillian(2.0, 0.1);
    const Matrix rho0 = Matrix::Identity(3, 3) / 3.0;
    const std::vector<Observable> obs{{"H", three_level_hamiltonian()}};
    const auto ts = uniform(50.0, 26);
    const Trajectory traj = propagate(s, DensityMatrix(rho0), 50.0, ts, 1e-9, obs);
    ASSERT_EQ(traj.observables.at("H").size(), ts.size());
    EXPECT_NEAR(traj.observables.at("H").front(), 4.0 / 3.0, 1e-14);
    EXPECT_LE(traj.max_trace_drift, 1e-10);
    EXPECT_GE(traj.min_eigenvalue, -1e-8);
    EXPECT_GT(traj.steps_accepted, 0);
}

TEST(Propagate, ValidatesArguments) {
    const Superoperator s = qubit_liouvillian(1.0, 0.1);
    const std::vector<double> unsorted{0.0, 2.0, 1.0};
    EXPECT_THROW(propagate(s, excited_qubit(), 3.0, unsorted, 1e-8), ValidationError);
    const std::vector<double> beyond{0.0, 5.0};
    EXPECT_THROW(propagate(s, excited_qubit(), 3.0, beyond, 1e-8), ValidationError);
    EXPECT_THROW(propagate(s, excited_qubit(), 0.0, {}, 1e-8), ValidationError);
    EXPECT_THROW(propagate(s, DensityMatrix(Matrix::Identity(3, 3) / 3.0), 1.0, {}, 1e-8), ValidationError);
}

TEST(Propagate, ZeroCouplingIsUnitary) {
    const Superoperator s = qubit_liouvillian(1.0, 0.0);
    Matrix plus = 0.5 * Matrix::Ones(2, 2);
    const Trajectory traj = propagate(s, DensityMatrix(plus), 2.0, std::vector<double>{2.0}, 1e-12);
    // rho_01(t) = e^{i t} / 2 for H = diag(0, 1)
    EXPECT_NEAR(std::abs(traj.states.back().matrix()(0, 1) - 0.5 * std::exp(Complex(0.0, 2.0))), 0.0, 1e-9);
}

TEST(SteadyState, QubitSigmaXRelaxesToGibbs) {
    const Superoperator s = qubit_liouvillian(1.0, 0.1);
    const SteadyStateReport rep = steady_state(s);
    const DensityMatrix th = gibbs_state(eigendecompose(qubit_hamiltonian(1.0)), 1.0);
    EXPECT_EQ(rep.kernel_dimension, 1);
    EXPECT_LE(trace_distance(rep.state, th), 1e-9);
    EXPECT_LE(rep.residual, 1e-12 * rep.operator_norm);
}

TEST(SteadyState, RealRepresentationPreservesSingularValues) {
    const Superoperator s = three_level_liouvillian(2.0, 0.1);
    const Eigen::VectorXd complex_sv = Eigen::JacobiSVD<Matrix>(s.matrix).singularValues();
    const Eigen::VectorXd real_sv = Eigen::JacobiSVD<Eigen::MatrixXd>(detail::real_representation(s)).singularValues();
    EXPECT_LE((complex_sv - real_sv).norm(), 1e-12 * complex_sv(0));
}

TEST(SteadyState, DecoupledLevelGivesDegenerateKernel) {
    // level 3 is untouched by the coupling, so populations there are conserved
    Matrix x = Matrix::Zero(3, 3);
    x(0, 1) = x(1, 0) = 1.0;
    x(2, 2) = 1.0;
    const HermitianOperator h = three_level_hamiltonian();
    const NoiseChannel ch{HermitianOperator(x), BathSpec::make(2.0, 0.1, 100.0)};
    const Superoperator s = build_liouvillian(make_ule_generator(h, eigendecompose(h), ch));
    try {
        steady_state(s);
        FAIL() << "expected KernelMultiplicityError";
    } catch (const KernelMultiplicityError& e) {
        EXPECT_EQ(e.report.kernel_dimension, 2);
    }
}

TEST(SteadyState, AgreesWithLongTimePropagation) {
    for (const Superoperator& s : {qubit_liouvillian(1.0, 0.1), three_level_liouvillian(2.0, 0.1)}) {
        const double gap = spectral_gap(s);
        ASSERT_GT(gap, 0.0);
        const Index d = s.dim;
        Matrix top = Matrix::Zero(d, d);
        top(d - 1, d - 1) = 1.0;
        EXPECT_LE(steady_state_consistency(s, DensityMatrix(top), 40.0 / gap, 1e-10), 1e-6) << d;
    }
}
