#include "oracles.hpp"

#include "ule/spinchain.hpp"
#include "ule/systems.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ule;

namespace {

SpinChainSpec chain(int n, double eta, double bz) {
    SpinChainSpec s;
    s.N = n;
    s.eta = eta;
    s.B_z = bz;
    s.couple_sites = {1, n};
    return s;
}

} // namespace

TEST(ChainHamiltonian, TwoSpinSingletTriplet) {
    const EigenDecomposition eig = eigendecompose(build_chain_hamiltonian(chain(2, 1.0, 0.0)));
    EXPECT_NEAR(eig.energies(0), -0.75, 1e-14);
    for (Index i = 1; i < 4; ++i) EXPECT_NEAR(eig.energies(i), 0.25, 1e-14);
}

TEST(ChainHamiltonian, FreeSpinsInField) {
    const EigenDecomposition eig = eigendecompose(build_chain_hamiltonian(chain(2, 0.0, 8.0)));
    EXPECT_NEAR(eig.energies(0), -8.0, 1e-14);
    EXPECT_NEAR(eig.energies(1), 0.0, 1e-14);
    EXPECT_NEAR(eig.energies(2), 0.0, 1e-14);
    EXPECT_NEAR(eig.energies(3), 8.0, 1e-14);
}

TEST(ChainHamiltonian, ConservesTotalSz) {
    for (int n : {2, 4, 6}) {
        const Matrix h = build_chain_hamiltonian(chain(n, 1.0, 8.0)).matrix();
        EXPECT_EQ(h.rows(), Index{1} << n);
        const Matrix sz = magnetization(n).matrix() * static_cast<double>(n);
        EXPECT_LE((h * sz - sz * h).norm(), 1e-12);
        // Eigenvalues agree with the independent Jacobi solver.
        if (n <= 4) {
            const auto ref = oracle::hermitian_eigenvalues(h);
            const EigenDecomposition eig = eigendecompose(HermitianOperator(h));
            for (Index i = 0; i < h.rows(); ++i) EXPECT_NEAR(eig.energies(i), ref[i], 1e-12);
        }
    }
}

TEST(ChainHamiltonian, RejectsOutOfRangeLength) {
    EXPECT_THROW(build_chain_hamiltonian(chain(1, 1.0, 1.0)), ValidationError);
    EXPECT_THROW(build_chain_hamiltonian(chain(11, 1.0, 1.0)), ValidationError);
}

TEST(Magnetization, SingleSiteAndAllUp) {
    const EigenDecomposition eig = eigendecompose(magnetization(1));
    EXPECT_DOUBLE_EQ(eig.energies(0), -0.5);
    EXPECT_DOUBLE_EQ(eig.energies(1), 0.5);
    EXPECT_DOUBLE_EQ(expectation(all_up_state(5), magnetization(5)), 0.5);
}

TEST(Magnetization, MatchesPerSiteSum) {
    std::mt19937_64 rng(12);
    const int n = 4;
    const Matrix rho = oracle::random_density(16, rng);
    double sum = 0.0;
    for (int site = 1; site <= n; ++site) {
        // S^z_site is diagonal: +1/2 when the site's bit (most significant first) is 0
        for (Index b = 0; b < 16; ++b) {
            const bool up = ((b >> (n - site)) & 1) == 0;
            sum += (up ? 0.5 : -0.5) * rho(b, b).real();
        }
    }
    EXPECT_NEAR(expectation(rho, magnetization(n).matrix()), sum / n, 1e-13);

    const EigenDecomposition eig = eigendecompose(build_chain_hamiltonian(chain(n, 1.0, 8.0)));
    const DensityMatrix th = gibbs_state(eig, 0.5);
    double direct = 0.0;
    for (int site = 1; site <= n; ++site) direct += expectation(th, spin_operator('z', site, n));
    EXPECT_NEAR(expectation(th, magnetization(n)), direct / n, 1e-12);
}

TEST(RunRelaxation, ShortChainContracts) {
    SpinChainSpec spec = chain(3, 1.0, 8.0);
    RunSettings run;
    run.t_end = 100.0;
    run.samples = 51;
    const ExperimentResult r = run_relaxation(spec, run);
    ASSERT_EQ(r.magnetization.size(), 51u);
    EXPECT_EQ(r.magnetization.front(), 0.5);
    for (double m : r.magnetization) {
        EXPECT_LE(m, 0.5 + 1e-12);
        EXPECT_GE(m, -0.5 - 1e-12);
    }
    EXPECT_LE(r.max_trace_drift, 1e-10);
    EXPECT_GE(r.min_eigenvalue, -1e-8);
    EXPECT_EQ(r.steady.kernel_dimension, 1);
    EXPECT_LT(r.magnetization.back(), 0.0);  // relaxes towards the field
}

TEST(RunRelaxation, DefaultHorizonIsFiftyOverGamma) {
    RunSettings run;
    EXPECT_DOUBLE_EQ(run.resolved_t_end(chain(4, 1.0, 8.0)), 500.0);
    SpinChainSpec cold = chain(4, 1.0, 8.0);
    cold.gamma1 = 0.0;
    EXPECT_THROW(run.resolved_t_end(cold), ValidationError);
}

TEST(Config, MissingKeyIsNamed) {
    const io::Config cfg = io::Config::parse("N = 4\nB_z = 8\ngamma1 = 0.1\nLambda_c = 100\n");
    try {
        spec_from_config(cfg);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("'T1'"), std::string::npos) << e.what();
    }
}

TEST(Config, ParsesChainAndOverrides) {
    io::Config cfg = io::Config::parse(
        "# comment\nN = 4\nB_z = 8  # trailing\nT1 = 2\ngamma1 = 0.1\nLambda_c = 100\ncouple_sites = 1,3\n");
    cfg.set_assignment("B_z=4");
    const SpinChainSpec s = spec_from_config(cfg);
    EXPECT_EQ(s.N, 4);
    EXPECT_EQ(s.B_z, 4.0);
    EXPECT_EQ(s.T2, 2.0);
    EXPECT_EQ(s.couple_sites, std::make_pair(1, 3));
    EXPECT_TRUE(s.ignore_lamb_shift);
    EXPECT_THROW(io::Config::parse("a = 1\na = 2\n"), ValidationError);
    EXPECT_THROW(io::Config::parse("novalue\n"), ValidationError);
}

TEST(Config, SystemFactory) {
    EXPECT_THROW(system_from_config(io::Config::parse("system = pendulum\n")), ValidationError);
    EXPECT_THROW(system_from_config(io::Config::parse("system = qubit\ntemperature = 1\ncoupling = 0.1\nbogus = 1\n")),
                 ValidationError);
    const SystemModel q = system_from_config(io::Config::parse("system = qubit\ntemperature = 1\ncoupling = 0.1\n"));
    EXPECT_EQ(q.hamiltonian.dim(), 2);
    EXPECT_EQ(q.initial.matrix()(1, 1), Complex(1.0));
}
