// dynamics.hpp — Time evolution, null-space steady states and expectation values.

#pragma once

#include "ule/errors.hpp"
#include "ule/generator.hpp"
#include "ule/operators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace ule {

// Real part of tr(rho O); the imaginary part must vanish to 1e-10.
inline double expectation(const Matrix& rho, const Matrix& o) {
    if (rho.rows() != o.rows() || rho.cols() != o.cols()) {
        throw ValidationError("expectation: dimension mismatch");
    }
    const Complex v = (rho.transpose().cwiseProduct(o)).sum();
    if (std::abs(v.imag()) > 1e-10) {
        std::ostringstream os;
        os << "expectation: imaginary part " << v.imag() << " exceeds 1e-10";
        throw NumericalError(os.str());
    }
    return v.real();
}

inline double expectation(const DensityMatrix& rho, const HermitianOperator& o) {
    return expectation(rho.matrix(), o.matrix());
}

// ------------------------------ propagation --------------------------------

struct Observable {
    std::string name;
    HermitianOperator op;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::map<std::string, std::vector<double>> observables;

    long steps_accepted{0};
    long steps_rejected{0};
    long evaluations{0};
    double max_trace_drift{0.0};     // max |tr rho - 1| over accepted steps
    double max_asymmetry{0.0};       // largest Hermiticity defect before re-symmetrizing
    double min_eigenvalue{0.0};      // over samples
    double error_estimate{0.0};      // sum of accepted local error estimates (max-norm)
};

namespace detail {

// Right-hand side of the master equation acting on d x d matrices.
class MasterEquationRhs {
public:
    explicit MasterEquationRhs(const Superoperator& s) : d_(s.dim) {
        if (!s.form) {
            dense_ = &s.matrix;
            return;
        }
        // Work in the eigenbasis of the effective Hamiltonian, where the
        // commutator is elementwise.
        Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(s.form->hamiltonian));
        basis_ = es.eigenvectors();
        phase_ = Matrix(d_, d_);
        for (Index n = 0; n < d_; ++n) {
            for (Index m = 0; m < d_; ++m) {
                phase_(m, n) = Complex(0.0, -(es.eigenvalues()(m) - es.eigenvalues()(n)));
            }
        }
        anticomm_ = Matrix::Zero(d_, d_);
        for (const auto& l : s.form->jumps) {
            jumps_.push_back(basis_.adjoint() * l * basis_);
            jumps_adj_.push_back(jumps_.back().adjoint());
            anticomm_ += jumps_adj_.back() * jumps_.back();
        }
        anticomm_ *= 0.5;
    }

    Matrix to_work(const Matrix& lab) const {
        return dense_ ? lab : Matrix(basis_.adjoint() * lab * basis_);
    }
    Matrix to_lab(const Matrix& work) const {
        return dense_ ? work : Matrix(basis_ * work * basis_.adjoint());
    }

    // Assumes a Hermitian argument.
    void operator()(const Matrix& rho, Matrix& out) const {
        if (dense_) {
            out = unvectorize(*dense_ * vectorize(rho), d_);
            return;
        }
        out = phase_.cwiseProduct(rho);
        tmp_.noalias() = anticomm_ * rho;
        out -= tmp_;
        out -= tmp_.adjoint();
        for (std::size_t j = 0; j < jumps_.size(); ++j) {
            tmp_.noalias() = jumps_[j] * rho;
            out.noalias() += tmp_ * jumps_adj_[j];
        }
    }

private:
    Index d_;
    const Matrix* dense_{nullptr};
    Matrix basis_;
    Matrix phase_;
    Matrix anticomm_;
    std::vector<Matrix> jumps_;
    std::vector<Matrix> jumps_adj_;
    mutable Matrix tmp_;
};

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

// RMS of |e_i| / (tol (1 + max(|y_i|, |z_i|))).
inline double scaled_error(const Matrix& e, const Matrix& y, const Matrix& z, double tol) {
    const Eigen::ArrayXXd scale = tol * (1.0 + y.cwiseAbs().array().max(z.cwiseAbs().array()));
    const Eigen::ArrayXXd r = e.cwiseAbs().array() / scale;
    return std::sqrt(r.square().mean());
}

inline double scaled_norm(const Matrix& v, const Matrix& y, double tol) {
    return scaled_error(v, y, y, tol);
}

} // namespace detail

// Adaptive Dormand-Prince 5(4) integration of the master equation. Each
// accepted state is re-symmetrized; the trace is never renormalized. Samples
// come from cubic Hermite interpolation across accepted steps.
inline Trajectory propagate(const Superoperator& superop, const DensityMatrix& rho0, double t_end,
                            std::span<const double> sample_times, double tol,
                            std::span<const Observable> observables = {}) {
    using detail::Dopri5;
    const Index d = superop.dim;
    if (rho0.dim() != d) throw ValidationError("propagate: initial state dimension mismatch");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ValidationError("propagate: t_end must be positive and finite");
    }
    if (!(tol > 0.0)) throw ValidationError("propagate: tolerance must be positive");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < 0.0 || sample_times[i] > t_end ||
            (i > 0 && sample_times[i] < sample_times[i - 1])) {
            throw ValidationError("propagate: sample times must be sorted and within [0, t_end]");
        }
    }
    for (const auto& o : observables) {
        if (o.op.dim() != d) throw ValidationError("propagate: observable dimension mismatch");
    }

    const detail::MasterEquationRhs rhs(superop);
    Trajectory traj;
    traj.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (const auto& o : observables) traj.observables[o.name] = {};

    std::size_t next_sample = 0;
    auto record = [&](const Matrix& work, double t) {
        const Matrix lab = hermitian_part(rhs.to_lab(work));
        DensityMatrix state(lab, DensityMatrix::Unchecked{});
        const double lmin = state.min_eigenvalue();
        traj.min_eigenvalue = std::min(traj.min_eigenvalue, lmin);
        if (lmin < -1e-6) {
            std::ostringstream os;
            os << "propagate: positivity violated at t = " << t << " (min eigenvalue " << lmin
               << "); the generator is not completely positive";
            throw PropagationError(os.str(), t);
        }
        const double drift = std::abs(lab.trace().real() - 1.0);
        if (drift > 1e-10) {
            std::ostringstream os;
            os << "propagate: trace drift " << drift << " at t = " << t;
            throw PropagationError(os.str(), t);
        }
        for (const auto& o : observables) {
            traj.observables[o.name].push_back(expectation(lab, o.op.matrix()));
        }
        traj.times.push_back(t);
        traj.states.emplace_back(lab, 1e-6);
    };

    Matrix y = rhs.to_work(rho0.matrix());
    double t = 0.0;
    while (next_sample < sample_times.size() && sample_times[next_sample] == 0.0) {
        record(y, 0.0);
        ++next_sample;
    }

    Matrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), k5(d, d), k6(d, d), k7(d, d);
    Matrix stage(d, d), y_new(d, d), err(d, d);
    rhs(y, k1);
    traj.evaluations = 1;

    // Starting step (Hairer, Norsett & Wanner, II.4).
    double h;
    {
        const double d0 = detail::scaled_norm(y, y, tol);
        const double d1 = detail::scaled_norm(k1, y, tol);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, t_end);
        stage = y + h0 * k1;
        rhs(stage, k2);
        ++traj.evaluations;
        const double d2 = detail::scaled_norm(k2 - k1, y, tol) / h0;
        const double dm = std::max(d1, d2);
        const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
        h = std::min({100.0 * h0, h1, t_end});
    }

    bool last_rejected = false;
    constexpr long kMaxSteps = 50'000'000;
    while (t < t_end) {
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            std::ostringstream os;
            os << "propagate: step size underflow at t = " << t;
            throw PropagationError(os.str(), t);
        }
        if (traj.steps_accepted + traj.steps_rejected > kMaxSteps) {
            throw PropagationError("propagate: step budget exhausted", t);
        }
        const bool final_step = t + h >= t_end;
        if (final_step) h = t_end - t;

        stage = y + h * Dopri5::a21 * k1;
        rhs(stage, k2);
        stage = y + h * (Dopri5::a31 * k1 + Dopri5::a32 * k2);
        rhs(stage, k3);
        stage = y + h * (Dopri5::a41 * k1 + Dopri5::a42 * k2 + Dopri5::a43 * k3);
        rhs(stage, k4);
        stage = y + h * (Dopri5::a51 * k1 + Dopri5::a52 * k2 + Dopri5::a53 * k3 + Dopri5::a54 * k4);
        rhs(stage, k5);
        stage = y + h * (Dopri5::a61 * k1 + Dopri5::a62 * k2 + Dopri5::a63 * k3 +
                         Dopri5::a64 * k4 + Dopri5::a65 * k5);
        rhs(stage, k6);
        y_new = y + h * (Dopri5::b1 * k1 + Dopri5::b3 * k3 + Dopri5::b4 * k4 + Dopri5::b5 * k5 +
                         Dopri5::b6 * k6);
        rhs(y_new, k7);
        traj.evaluations += 6;
        err = h * (Dopri5::e1 * k1 + Dopri5::e3 * k3 + Dopri5::e4 * k4 + Dopri5::e5 * k5 +
                   Dopri5::e6 * k6 + Dopri5::e7 * k7);

        const double e = detail::scaled_error(err, y, y_new, tol);
        if (!(e <= 1.0)) {
            ++traj.steps_rejected;
            const double fac = std::isfinite(e) ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2;
            h *= std::min(1.0, fac);
            last_rejected = true;
            continue;
        }

        ++traj.steps_accepted;
        traj.error_estimate += max_abs(err);
        traj.max_asymmetry = std::max(traj.max_asymmetry, hermitian_asymmetry(y_new));
        y_new = hermitian_part(y_new);
        const double t_new = final_step ? t_end : t + h;
        traj.max_trace_drift =
            std::max(traj.max_trace_drift, std::abs(y_new.trace().real() - 1.0));

        while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
            const double theta = (sample_times[next_sample] - t) / (t_new - t);
            const double th2 = theta * theta;
            const double th3 = th2 * theta;
            const Matrix interp = (2 * th3 - 3 * th2 + 1) * y + (th3 - 2 * th2 + theta) * h * k1 +
                                  (-2 * th3 + 3 * th2) * y_new + (th3 - th2) * h * k7;
            record(interp, sample_times[next_sample]);
            ++next_sample;
        }

        y.swap(y_new);
        k1.swap(k7);
        t = t_new;

        double fac = e == 0.0 ? 5.0 : 0.9 * std::pow(e, -0.2);
        fac = std::clamp(fac, 0.2, 5.0);
        if (last_rejected) fac = std::min(fac, 1.0);
        h *= fac;
        last_rejected = false;
    }
    if (traj.times.empty()) traj.min_eigenvalue = DensityMatrix(rhs.to_lab(y), DensityMatrix::Unchecked{}).min_eigenvalue();
    return traj;
}

// State at t_end only.
inline DensityMatrix propagate_to(const Superoperator& superop, const DensityMatrix& rho0,
                                  double t_end, double tol) {
    const double ts[] = {t_end};
    return propagate(superop, rho0, t_end, ts, tol).states.back();
}

// ------------------------------ steady state ------------------------------

namespace detail {

// Orthonormal Hermitian basis {E_ii, (E_ij + E_ji)/sqrt2, i(E_ij - E_ji)/sqrt2}.
// Basis element a = i + d j contributes coeff to vec index p; calls fn(a, p, coeff).
template <class Fn>
void for_each_hermitian_basis_entry(Index d, Fn&& fn) {
    const double s = std::numbers::sqrt2 / 2.0;
    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            const Index a = i + d * j;
            const Index p = i + d * j;  // (i, j)
            const Index q = j + d * i;  // (j, i)
            if (i == j) {
                fn(a, p, Complex(1.0, 0.0));
            } else if (i < j) {
                fn(a, p, Complex(s, 0.0));
                fn(a, q, Complex(s, 0.0));
            } else {
                fn(a, p, Complex(0.0, s));
                fn(a, q, Complex(0.0, -s));
            }
        }
    }
}

// Real matrix of the superoperator in the orthonormal Hermitian basis. It is
// unitarily similar to the complex matrix, so singular values agree.
inline Eigen::MatrixXd real_representation(const Superoperator& s) {
    const Index d = s.dim;
    const Index n = d * d;
    std::vector<std::vector<std::pair<Index, Complex>>> cols(static_cast<std::size_t>(n));
    for_each_hermitian_basis_entry(d, [&](Index a, Index p, Complex c) {
        cols[static_cast<std::size_t>(a)].emplace_back(p, c);
    });
    Eigen::MatrixXd r(n, n);
    Eigen::VectorXcd image(n);
    for (Index b = 0; b < n; ++b) {
        image.setZero();
        for (const auto& [p, c] : cols[static_cast<std::size_t>(b)]) image += c * s.matrix.col(p);
        for (Index a = 0; a < n; ++a) {
            Complex acc(0.0, 0.0);
            for (const auto& [p, c] : cols[static_cast<std::size_t>(a)]) acc += std::conj(c) * image(p);
            r(a, b) = acc.real();
        }
    }
    return r;
}

inline Matrix from_hermitian_coordinates(const Eigen::VectorXd& coords, Index d) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    for_each_hermitian_basis_entry(d, [&](Index a, Index p, Complex c) { v(p) += c * coords(a); });
    return unvectorize(v, d);
}

} // namespace detail

struct SteadyStateReport {
    DensityMatrix state;
    double residual{0.0};          // ||L vec(rho_ss)||_2
    double operator_norm{0.0};     // largest singular value of L
    Index kernel_dimension{0};
    std::string method{"null-space"};
    std::vector<double> smallest_singular_values;  // ascending, up to 4
};

struct KernelMultiplicityError : NumericalError {
    SteadyStateReport report;

    KernelMultiplicityError(const std::string& what, SteadyStateReport r)
        : NumericalError(what), report(std::move(r)) {}
};

// Kernel of the superoperator from an SVD of its real Hermitian-basis
// representation; singular values below 1e-10 sigma_max count as zero.
inline SteadyStateReport steady_state(const Superoperator& superop) {
    const Index d = superop.dim;
    const Index n = d * d;
    SteadyStateReport rep;

    Eigen::VectorXd coords;
    {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(detail::real_representation(superop), Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();  // descending
        rep.operator_norm = sv(0);
        const double threshold = 1e-10 * sv(0);
        for (Index i = 0; i < n; ++i) {
            if (sv(i) < threshold) ++rep.kernel_dimension;
        }
        for (Index i = n - 1; i >= std::max<Index>(0, n - 4); --i) {
            rep.smallest_singular_values.push_back(sv(i));
        }
        if (rep.kernel_dimension == 0) {
            std::ostringstream os;
            os << "steady_state: no numerical kernel (smallest singular value " << sv(n - 1)
               << ", threshold " << threshold << ")";
            throw NumericalError(os.str());
        }
        // Project the trace functional onto the kernel; for a one-dimensional
        // kernel this is the null vector itself.
        Eigen::VectorXd trace_fn = Eigen::VectorXd::Zero(n);
        for (Index i = 0; i < d; ++i) trace_fn(i + d * i) = 1.0;
        coords = Eigen::VectorXd::Zero(n);
        for (Index k = n - rep.kernel_dimension; k < n; ++k) {
            const auto vk = svd.matrixV().col(k);
            coords += vk.dot(trace_fn) * vk;
        }
    }

    Matrix rho = hermitian_part(detail::from_hermitian_coordinates(coords, d));
    const double tr = rho.trace().real();
    if (!(std::abs(tr) > 0.0)) throw NumericalError("steady_state: kernel vector has zero trace");
    rho /= tr;
    rep.residual = (superop.matrix * vectorize(rho)).norm();

    if (rep.kernel_dimension > 1) {
        rep.state = DensityMatrix(rho, DensityMatrix::Unchecked{});
        std::ostringstream os;
        os << "steady_state: kernel dimension " << rep.kernel_dimension
           << " (steady state not unique)";
        throw KernelMultiplicityError(os.str(), std::move(rep));
    }
    rep.state = DensityMatrix(std::move(rho));
    return rep;
}

// Smallest nonzero |Re lambda| over the spectrum of the superoperator. Dense
// non-Hermitian eigensolve; intended for small systems.
inline double spectral_gap(const Superoperator& superop) {
    Eigen::ComplexEigenSolver<Matrix> es(superop.matrix, false);
    const auto& ev = es.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) {
        const double re = std::abs(ev(i).real());
        if (re > 1e-9 * scale) gap = std::min(gap, re);
    }
    return gap;
}

// Trace distance between the long-time propagated state and the null-space
// steady state.
inline double steady_state_consistency(const Superoperator& superop, const DensityMatrix& rho0,
                                       double t_long, double tol = 1e-10) {
    const SteadyStateReport ss = steady_state(superop);
    if (t_long == 0.0) return trace_distance(rho0, ss.state);
    return trace_distance(propagate_to(superop, rho0, t_long, tol), ss.state);
}

} // namespace ule
