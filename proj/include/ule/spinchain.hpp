// spinchain.hpp — Heisenberg spin-1/2 chain in a longitudinal field, coupled
// to one bath at each end through S^x, and the magnetization relaxation run.

#pragma once

#include "ule/analyzer.hpp"
#include "ule/bath.hpp"
#include "ule/dynamics.hpp"
#include "ule/errors.hpp"
#include "ule/generator.hpp"
#include "ule/io.hpp"
#include "ule/operators.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace ule {

inline constexpr const char* version = "0.1.0";

struct SpinChainSpec {
    int N{6};
    double eta{1.0};
    double B_z{8.0};
    double T1{2.0};
    double T2{2.0};
    double gamma1{0.1};
    double gamma2{0.0};
    double Lambda_c{100.0};
    double omega0{2.0};  // carried along for the record; enters no formula
    std::pair<int, int> couple_sites{1, 6};
    bool ignore_lamb_shift{true};

    void validate() const {
        if (N < 2 || N > 10) throw ValidationError("SpinChainSpec: N must be in [2, 10]");
        for (double v : {eta, B_z, T1, T2, gamma1, gamma2, Lambda_c, omega0}) {
            if (!std::isfinite(v)) throw ValidationError("SpinChainSpec: parameters must be finite");
        }
        if (!(T1 > 0.0) || !(T2 > 0.0)) throw ValidationError("SpinChainSpec: temperatures must be positive");
        if (gamma1 < 0.0 || gamma2 < 0.0) throw ValidationError("SpinChainSpec: couplings must be >= 0");
        if (!(Lambda_c > 0.0)) throw ValidationError("SpinChainSpec: Lambda_c must be positive");
        for (int s : {couple_sites.first, couple_sites.second}) {
            if (s < 1 || s > N) throw ValidationError("SpinChainSpec: couple_sites outside the chain");
        }
    }
};

namespace detail {

// S^a_site (1-based) on N spins; site 1 is the most significant tensor factor,
// |up> is basis index 0.
inline Matrix site_operator(const Matrix& s, int site, int n) {
    Matrix out = Matrix::Identity(1, 1);
    for (int k = 1; k <= n; ++k) {
        const Matrix f = k == site ? s : Matrix::Identity(2, 2);
        Matrix next(out.rows() * 2, out.cols() * 2);
        for (Index i = 0; i < out.rows(); ++i) {
            for (Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
        }
        out = std::move(next);
    }
    return out;
}

inline Matrix spin_x() {
    Matrix s(2, 2);
    s << 0.0, 0.5, 0.5, 0.0;
    return s;
}

inline Matrix spin_y() {
    Matrix s(2, 2);
    s << 0.0, Complex(0.0, -0.5), Complex(0.0, 0.5), 0.0;
    return s;
}

inline Matrix spin_z() {
    Matrix s(2, 2);
    s << 0.5, 0.0, 0.0, -0.5;
    return s;
}

} // namespace detail

inline HermitianOperator spin_operator(char axis, int site, int n) {
    if (n < 1 || n > 10 || site < 1 || site > n) throw ValidationError("spin_operator: site out of range");
    switch (axis) {
    case 'x': return HermitianOperator(detail::site_operator(detail::spin_x(), site, n));
    case 'y': return HermitianOperator(detail::site_operator(detail::spin_y(), site, n));
    case 'z': return HermitianOperator(detail::site_operator(detail::spin_z(), site, n));
    default: throw ValidationError("spin_operator: axis must be x, y or z");
    }
}

// eta sum_n S_n . S_{n+1} + B_z sum_n S^z_n
inline HermitianOperator build_chain_hamiltonian(const SpinChainSpec& spec) {
    if (spec.N < 2 || spec.N > 10) throw ValidationError("build_chain_hamiltonian: N must be in [2, 10]");
    const int n = spec.N;
    std::vector<Matrix> sx, sy, sz;
    for (int k = 1; k <= n; ++k) {
        sx.push_back(detail::site_operator(detail::spin_x(), k, n));
        sy.push_back(detail::site_operator(detail::spin_y(), k, n));
        sz.push_back(detail::site_operator(detail::spin_z(), k, n));
    }
    const Index d = Index{1} << n;
    Matrix h = Matrix::Zero(d, d);
    for (int k = 0; k + 1 < n; ++k) {
        h += spec.eta * (sx[k] * sx[k + 1] + sy[k] * sy[k + 1] + sz[k] * sz[k + 1]);
    }
    for (int k = 0; k < n; ++k) h += spec.B_z * sz[k];
    return HermitianOperator(hermitian_part(h));
}

// (1/N) sum_n S^z_n
inline HermitianOperator magnetization(int n) {
    if (n < 1 || n > 10) throw ValidationError("magnetization: N must be in [1, 10]");
    const Index d = Index{1} << n;
    Matrix m = Matrix::Zero(d, d);
    for (int k = 1; k <= n; ++k) m += detail::site_operator(detail::spin_z(), k, n);
    return HermitianOperator(m / static_cast<double>(n));
}

inline DensityMatrix all_up_state(int n) {
    const Index d = Index{1} << n;
    Matrix rho = Matrix::Zero(d, d);
    rho(0, 0) = 1.0;
    return DensityMatrix(std::move(rho));
}

inline std::vector<NoiseChannel> chain_channels(const SpinChainSpec& spec) {
    spec.validate();
    return {
        NoiseChannel{spin_operator('x', spec.couple_sites.first, spec.N),
                     BathSpec::make(spec.T1, spec.gamma1, spec.Lambda_c)},
        NoiseChannel{spin_operator('x', spec.couple_sites.second, spec.N),
                     BathSpec::make(spec.T2, spec.gamma2, spec.Lambda_c)},
    };
}

// Full generator of the chain; channels with zero coupling contribute nothing.
inline UleGenerator build_chain_generator(const SpinChainSpec& spec, const EigenDecomposition& eig,
                                          const QuadratureSpec& quad = {}) {
    const HermitianOperator h = build_chain_hamiltonian(spec);
    std::vector<UleGenerator> gens;
    for (const auto& ch : chain_channels(spec)) {
        if (ch.bath.coupling == 0.0) continue;
        gens.push_back(make_ule_generator(h, eig, ch, quad, !spec.ignore_lamb_shift));
    }
    if (gens.empty()) return UleGenerator{h, HermitianOperator::zero(h.dim()), {}};
    return channels_compose(gens);
}

struct RunSettings {
    double t_end{0.0};  // 0 selects 50 / gamma1
    int samples{200};
    double tol{1e-8};

    double resolved_t_end(const SpinChainSpec& spec) const {
        if (t_end > 0.0) return t_end;
        if (!(spec.gamma1 > 0.0)) throw ValidationError("run_relaxation: t_end is required when gamma1 = 0");
        return 50.0 / spec.gamma1;
    }
};

struct ExperimentResult {
    std::vector<double> times;
    std::vector<double> magnetization;
    double magnetization_ss{0.0};
    double magnetization_th{0.0};
    DeviationReport deviation;
    SteadyStateReport steady;

    // run metadata (deterministic; no wall-clock fields)
    double t_end{0.0};
    long steps_accepted{0};
    long steps_rejected{0};
    long evaluations{0};
    double max_trace_drift{0.0};
    double min_eigenvalue{0.0};
};

// Relaxation of |up...up><up...up| under the chain generator. Steady values
// come from the null-space solve, not from the trajectory endpoint.
inline ExperimentResult run_relaxation(const SpinChainSpec& spec, const RunSettings& run = {},
                                       const QuadratureSpec& quad = {}) {
    spec.validate();
    if (run.samples < 2) throw ValidationError("run_relaxation: samples must be >= 2");
    if (!(run.tol > 0.0)) throw ValidationError("run_relaxation: tol must be positive");
    const double t_end = run.resolved_t_end(spec);

    const HermitianOperator h = build_chain_hamiltonian(spec);
    const EigenDecomposition eig = eigendecompose(h);
    const UleGenerator gen = build_chain_generator(spec, eig, quad);
    const Superoperator liou = build_liouvillian(gen, !spec.ignore_lamb_shift);
    const HermitianOperator m = magnetization(spec.N);

    std::vector<double> samples(static_cast<std::size_t>(run.samples));
    for (int i = 0; i < run.samples; ++i) samples[i] = t_end * i / (run.samples - 1);
    const std::vector<Observable> obs{{"M", m}};

    ExperimentResult r;
    r.t_end = t_end;
    Trajectory traj;
    try {
        traj = propagate(liou, all_up_state(spec.N), t_end, samples, run.tol, obs);
    } catch (const PropagationError& e) {
        throw PropagationError(std::string("spin chain relaxation: ") + e.what(), e.time_reached);
    }
    r.times = traj.times;
    r.magnetization = traj.observables.at("M");
    r.steps_accepted = traj.steps_accepted;
    r.steps_rejected = traj.steps_rejected;
    r.evaluations = traj.evaluations;
    r.max_trace_drift = traj.max_trace_drift;
    r.min_eigenvalue = traj.min_eigenvalue;

    r.steady = steady_state(liou);
    r.deviation = gibbs_deviation(r.steady.state, eig, 1.0 / spec.T1, m);
    r.magnetization_ss = *r.deviation.observable_ss;
    r.magnetization_th = *r.deviation.observable_th;
    return r;
}

// ------------------------------ config mapping -----------------------------

inline SpinChainSpec spec_from_config(const io::Config& cfg) {
    SpinChainSpec s;
    s.N = cfg.get_int("N");
    s.eta = cfg.get_double("eta", 1.0);
    s.B_z = cfg.get_double("B_z");
    s.T1 = cfg.get_double("T1");
    s.T2 = cfg.get_double("T2", s.T1);
    s.gamma1 = cfg.get_double("gamma1");
    s.gamma2 = cfg.get_double("gamma2", 0.0);
    s.Lambda_c = cfg.get_double("Lambda_c");
    s.omega0 = cfg.get_double("omega0", 0.0);
    s.couple_sites = {1, s.N};
    if (cfg.has("couple_sites")) {
        const auto sites = io::parse_list("couple_sites", cfg.get_string("couple_sites"));
        if (sites.size() != 2 || sites[0] != std::floor(sites[0]) || sites[1] != std::floor(sites[1])) {
            throw ValidationError("config key 'couple_sites': expected two site indices 'a,b'");
        }
        s.couple_sites = {static_cast<int>(sites[0]), static_cast<int>(sites[1])};
    }
    s.ignore_lamb_shift = cfg.get_bool("ignore_lamb_shift", true);
    s.validate();
    return s;
}

inline QuadratureSpec quadrature_from_config(const io::Config& cfg) {
    QuadratureSpec q;
    q.rel_tol = cfg.get_double("rel_tol", q.rel_tol);
    q.abs_tol = cfg.get_double("abs_tol", q.abs_tol);
    q.cutoff_multiple = cfg.get_double("cutoff_multiple", q.cutoff_multiple);
    q.omega_max_scale = cfg.get_double("omega_max_scale", q.omega_max_scale);
    q.max_depth = cfg.get_int("max_depth", q.max_depth);
    q.validate();
    return q;
}

inline RunSettings run_settings_from_config(const io::Config& cfg) {
    RunSettings r;
    r.t_end = cfg.get_double("t_end", r.t_end);
    r.samples = cfg.get_int("samples", r.samples);
    r.tol = cfg.get_double("tol", r.tol);
    if (r.t_end < 0.0) throw ValidationError("config key 't_end': must be >= 0");
    if (r.samples < 2) throw ValidationError("config key 'samples': must be >= 2");
    if (!(r.tol > 0.0)) throw ValidationError("config key 'tol': must be positive");
    return r;
}

} // namespace ule
