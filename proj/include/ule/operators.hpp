// operators.hpp — Hermitian operators, eigensystems, Bohr-frequency decomposition
// and Gibbs states.
//
// Energies are in units of the exchange scale eta, with hbar = k_B = 1.
// The Bohr component convention is
//     A(w) = sum_{E_n - E_m = w} P_m X P_n,
// so A(w) lowers the energy by w and A(-w) = A(w)^dagger for Hermitian X.

#pragma once

#include "ule/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace ule {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

// max_ij |m_ij - conj(m_ji)|
inline double hermitian_asymmetry(const Matrix& m) {
    return max_abs(m - m.adjoint());
}

inline Matrix hermitian_part(const Matrix& m) {
    return 0.5 * (m + m.adjoint());
}

// --------------------------------------------------------------------------

class HermitianOperator {
public:
    HermitianOperator() = default;

    // Rejects matrices whose asymmetry exceeds rel_tol * max|entry|.
    explicit HermitianOperator(Matrix m, double rel_tol = 1e-12) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) {
            throw ValidationError("HermitianOperator: matrix must be square");
        }
        if (m_.rows() < 1) {
            throw ValidationError("HermitianOperator: dimension must be >= 1");
        }
        const double asym = hermitian_asymmetry(m_);
        if (asym > rel_tol * max_abs(m_)) {
            std::ostringstream os;
            os << "HermitianOperator: matrix is not Hermitian (max asymmetry " << asym
               << ", tolerance " << rel_tol * max_abs(m_) << ")";
            throw ValidationError(os.str());
        }
    }

    static HermitianOperator zero(Index dim) {
        return HermitianOperator(Matrix::Zero(dim, dim));
    }

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

private:
    Matrix m_;
};

// --------------------------------------------------------------------------

class DensityMatrix {
public:
    struct Unchecked {};

    DensityMatrix() = default;

    // Hermitian to 1e-12, unit trace to 1e-10, min eigenvalue >= -positivity_tol.
    explicit DensityMatrix(Matrix m, double positivity_tol = 1e-10) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 1) {
            throw ValidationError("DensityMatrix: matrix must be square and non-empty");
        }
        const double asym = hermitian_asymmetry(m_);
        if (asym > 1e-12) {
            std::ostringstream os;
            os << "DensityMatrix: not Hermitian (max asymmetry " << asym << ")";
            throw ValidationError(os.str());
        }
        const Complex tr = m_.trace();
        if (std::abs(tr - 1.0) > 1e-10) {
            std::ostringstream os;
            os << "DensityMatrix: trace " << tr.real() << " differs from 1";
            throw ValidationError(os.str());
        }
        const double lmin = min_eigenvalue();
        if (lmin < -positivity_tol) {
            std::ostringstream os;
            os << "DensityMatrix: minimum eigenvalue " << lmin << " below -" << positivity_tol;
            throw ValidationError(os.str());
        }
    }

    DensityMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

    Index dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    }

private:
    Matrix m_;
};

// Half the trace norm of the difference.
inline double trace_distance(const Matrix& a, const Matrix& b) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
    return trace_distance(a.matrix(), b.matrix());
}

// --------------------------------------------------------------------------

struct EigenDecomposition {
    RealVector energies;  // ascending
    Matrix basis;         // columns are eigenvectors |m>

    Index dim() const { return energies.size(); }

    Matrix to_eigen(const Matrix& lab) const { return basis.adjoint() * lab * basis; }
    Matrix to_lab(const Matrix& eig) const { return basis * eig * basis.adjoint(); }

    Matrix projector(Index m) const { return basis.col(m) * basis.col(m).adjoint(); }

    // Spectral norm of the decomposed operator.
    double norm() const {
        return std::max(std::abs(energies(0)), std::abs(energies(dim() - 1)));
    }

    Matrix reconstruct() const { return to_lab(energies.cast<Complex>().asDiagonal().toDenseMatrix()); }
};

// Eigenvectors are phase-fixed: the largest-magnitude component of each column
// (lowest row index on ties) is made real and positive.
inline EigenDecomposition eigendecompose(const HermitianOperator& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.matrix());
    if (es.info() != Eigen::Success) {
        throw NumericalError("eigendecompose: eigensolver did not converge");
    }
    EigenDecomposition out{es.eigenvalues(), es.eigenvectors()};
    for (Index c = 0; c < out.basis.cols(); ++c) {
        Index best = 0;
        double best_mag = -1.0;
        for (Index r = 0; r < out.basis.rows(); ++r) {
            const double mag = std::abs(out.basis(r, c));
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        const Complex pivot = out.basis(best, c);
        out.basis.col(c) *= std::conj(pivot) / std::abs(pivot);
        out.basis(best, c) = Complex(std::abs(out.basis(best, c)), 0.0);
    }
    return out;
}

inline double default_gap_tolerance(const EigenDecomposition& eig) {
    return 1e-9 * std::max(1.0, eig.norm());
}

// --------------------------------------------------------------------------

struct Transition {
    Index row;  // m in P_m X P_n
    Index col;  // n
};

class BohrDecomposition {
public:
    BohrDecomposition() = default;

    const EigenDecomposition& eigensystem() const { return eig_; }
    const Matrix& operator_eigen() const { return x_eig_; }
    Index dim() const { return eig_.dim(); }
    double gap_tolerance() const { return gap_tol_; }

    const std::vector<double>& frequencies() const { return freqs_; }
    std::size_t size() const { return freqs_.size(); }
    double frequency(std::size_t k) const { return freqs_[k]; }
    const std::vector<Transition>& transitions(std::size_t k) const { return trans_[k]; }

    // Index of the component with frequency -w(k).
    std::size_t mirror(std::size_t k) const { return freqs_.size() - 1 - k; }

    // Bin holding the gap E_n - E_m.
    std::size_t bin(Index m, Index n) const { return static_cast<std::size_t>(bin_(m, n)); }

    std::optional<std::size_t> find(double omega) const {
        auto it = std::lower_bound(freqs_.begin(), freqs_.end(), omega);
        if (it == freqs_.end() || *it != omega) return std::nullopt;
        return static_cast<std::size_t>(it - freqs_.begin());
    }

    Matrix component_eigen(std::size_t k) const {
        Matrix a = Matrix::Zero(dim(), dim());
        for (const auto& t : trans_[k]) a(t.row, t.col) = x_eig_(t.row, t.col);
        return a;
    }

    // A(w_k) in the basis of the decomposed operator.
    Matrix component(std::size_t k) const { return eig_.to_lab(component_eigen(k)); }

private:
    friend BohrDecomposition bohr_decompose(const HermitianOperator&, const EigenDecomposition&,
                                            double);

    EigenDecomposition eig_;
    Matrix x_eig_;
    double gap_tol_{0.0};
    std::vector<double> freqs_;
    std::vector<std::vector<Transition>> trans_;
    Eigen::MatrixXi bin_;
};

// Single-linkage clustering of all d^2 gaps: consecutive sorted gaps closer
// than gap_tol share a bin. A bin whose spread exceeds gap_tol means the
// tolerance bridges distinct gaps and is rejected.
inline BohrDecomposition bohr_decompose(const HermitianOperator& x, const EigenDecomposition& eig,
                                        double gap_tol) {
    const Index d = eig.dim();
    if (x.dim() != d) {
        throw ValidationError("bohr_decompose: operator and eigensystem dimensions differ");
    }
    if (!(gap_tol > 0.0)) {
        throw ValidationError("bohr_decompose: gap tolerance must be positive");
    }

    std::vector<std::tuple<double, Index, Index>> gaps;
    gaps.reserve(static_cast<std::size_t>(d * d));
    for (Index m = 0; m < d; ++m) {
        for (Index n = 0; n < d; ++n) {
            gaps.emplace_back(eig.energies(n) - eig.energies(m), m, n);
        }
    }
    std::sort(gaps.begin(), gaps.end());

    std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [begin, end)
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= gaps.size(); ++i) {
        if (i == gaps.size() || std::get<0>(gaps[i]) - std::get<0>(gaps[i - 1]) > gap_tol) {
            const double spread = std::get<0>(gaps[i - 1]) - std::get<0>(gaps[begin]);
            if (spread > gap_tol) {
                std::ostringstream os;
                os << "bohr_decompose: gap tolerance " << gap_tol
                   << " chains distinct gaps into one bin of spread " << spread
                   << " (ambiguous binning)";
                throw ValidationError(os.str());
            }
            clusters.emplace_back(begin, i);
            begin = i;
        }
    }

    BohrDecomposition out;
    out.eig_ = eig;
    out.x_eig_ = eig.to_eigen(x.matrix());
    out.gap_tol_ = gap_tol;
    out.bin_.resize(d, d);

    // The gap multiset is exactly symmetric, so cluster k mirrors K-1-k and
    // the middle cluster holds the zero gaps.
    const std::size_t nbins = clusters.size();
    out.freqs_.assign(nbins, 0.0);
    for (std::size_t k = 0; k < nbins / 2; ++k) {
        double sum = 0.0;
        for (std::size_t i = clusters[k].first; i < clusters[k].second; ++i) {
            sum += std::get<0>(gaps[i]);
        }
        const double rep = sum / static_cast<double>(clusters[k].second - clusters[k].first);
        out.freqs_[k] = rep;
        out.freqs_[nbins - 1 - k] = -rep;
    }

    out.trans_.assign(nbins, {});
    for (std::size_t k = 0; k < nbins; ++k) {
        for (std::size_t i = clusters[k].first; i < clusters[k].second; ++i) {
            const auto [w, m, n] = gaps[i];
            out.trans_[k].push_back({m, n});
            out.bin_(m, n) = static_cast<int>(k);
        }
    }
    return out;
}

inline BohrDecomposition bohr_decompose(const HermitianOperator& x, const EigenDecomposition& eig) {
    return bohr_decompose(x, eig, default_gap_tolerance(eig));
}

// --------------------------------------------------------------------------

// Populations proportional to exp(-beta (E_m - E_min)).
inline DensityMatrix gibbs_state(const EigenDecomposition& eig, double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw ValidationError("gibbs_state: beta must be finite and non-negative");
    }
    const double e0 = eig.energies(0);
    RealVector p(eig.dim());
    for (Index m = 0; m < eig.dim(); ++m) p(m) = std::exp(-beta * (eig.energies(m) - e0));
    p /= p.sum();
    Matrix rho = hermitian_part(eig.to_lab(p.cast<Complex>().asDiagonal().toDenseMatrix()));
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho));
}

inline double thermal_shift_residual(const DensityMatrix& rho_th, const Matrix& a, double omega,
                                     double beta) {
    return (rho_th.matrix() * a - std::exp(beta * omega) * (a * rho_th.matrix())).norm();
}

} // namespace ule
