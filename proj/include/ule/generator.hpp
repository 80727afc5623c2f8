// generator.hpp — Assembly of the universal Lindblad generator
//
//   d rho / dt = -i [H_s + Lambda, rho] + sum_c ( L_c rho L_c^+ - 1/2 {L_c^+ L_c, rho} )
//
// with, per noise channel (X, bath),
//   L      = 2 pi sqrt(gamma) sum_mn g(E_n - E_m) X_mn |m><n|
//   Lambda = sum_lmn f(E_l - E_m, E_n - E_l) X_ml X_ln |m><n|
// and the secular (Davies) truncation that keeps only equal-frequency terms.
//
// Superoperators act on column-stacked vec(rho): vec(A rho B) = (B^T (x) A) vec(rho),
// i.e. rho(i, j) sits at index i + d j.

#pragma once

#include "ule/bath.hpp"
#include "ule/errors.hpp"
#include "ule/operators.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

namespace ule {

struct NoiseChannel {
    HermitianOperator coupling;  // X
    BathSpec bath;
};

struct UleGenerator {
    HermitianOperator hamiltonian;  // H_s
    HermitianOperator lamb_shift;   // zero when disabled
    std::vector<Matrix> jumps;      // one per channel

    Index dim() const { return hamiltonian.dim(); }
};

// Hamiltonian + jump operators; enough to apply the generator matrix-free.
struct LindbladForm {
    Matrix hamiltonian;
    std::vector<Matrix> jumps;

    // -i[H, rho] + sum_j (L rho L^+ - 1/2 {L^+ L, rho})
    Matrix apply(const Matrix& rho) const {
        Matrix out = Complex(0.0, -1.0) * (hamiltonian * rho - rho * hamiltonian);
        for (const auto& l : jumps) {
            const Matrix k = l.adjoint() * l;
            out += l * rho * l.adjoint() - 0.5 * (k * rho + rho * k);
        }
        return out;
    }
};

struct Superoperator {
    Index dim{0};   // d; the matrix is d^2 x d^2
    Matrix matrix;
    std::optional<LindbladForm> form;

    Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const { return matrix * v; }

    // max over columns of |<<I| L |q>>|
    double trace_preservation_error() const {
        Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(matrix.cols());
        for (Index i = 0; i < dim; ++i) row += matrix.row(i + dim * i);
        return row.size() == 0 ? 0.0 : row.cwiseAbs().maxCoeff();
    }
};

inline Eigen::VectorXcd vectorize(const Matrix& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

inline Matrix unvectorize(const Eigen::VectorXcd& v, Index d) {
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

// ------------------------------ jump operator ------------------------------

inline double jump_prefactor(const BathSpec& bath) {
    return 2.0 * std::numbers::pi * std::sqrt(bath.coupling);
}

// Elementwise in the eigenbasis, rotated back to the input basis.
inline Matrix build_jump_operator(const EigenDecomposition& eig, const NoiseChannel& ch) {
    const Index d = eig.dim();
    if (ch.coupling.dim() != d) {
        throw ValidationError("build_jump_operator: coupling and Hamiltonian dimensions differ");
    }
    const double c = jump_prefactor(ch.bath);
    Matrix l = eig.to_eigen(ch.coupling.matrix());
    for (Index n = 0; n < d; ++n) {
        for (Index m = 0; m < d; ++m) {
            l(m, n) *= c * jump_spectral(ch.bath, eig.energies(n) - eig.energies(m));
        }
    }
    return eig.to_lab(l);
}

// Bohr-sum form: 2 pi sqrt(gamma) sum_w g(w) A(w).
inline Matrix build_jump_operator_bohr(const BohrDecomposition& bohr, const NoiseChannel& ch) {
    const double c = jump_prefactor(ch.bath);
    Matrix l = Matrix::Zero(bohr.dim(), bohr.dim());
    for (std::size_t k = 0; k < bohr.size(); ++k) {
        l += (c * jump_spectral(ch.bath, bohr.frequency(k))) * bohr.component(k);
    }
    return l;
}

// ------------------------------ Lamb shift --------------------------------

namespace detail {

// Eigenbasis elements below this fraction of max|X| are structural zeros left
// by the basis rotation; products involving them are skipped.
inline double significance_floor(const Matrix& x_eig) { return 1e-14 * max_abs(x_eig); }

} // namespace detail

// Binned (w1, w2) = (E_l - E_m, E_n - E_l) pairs with X_ml X_ln not negligible.
inline std::vector<GapPair> lamb_shift_gap_pairs(const BohrDecomposition& bohr) {
    const Matrix& x = bohr.operator_eigen();
    const double floor = detail::significance_floor(x);
    const Index d = bohr.dim();
    const std::size_t nb = bohr.size();
    std::vector<char> seen(nb * nb, 0);
    std::vector<GapPair> pairs;
    for (Index m = 0; m < d; ++m) {
        for (Index l = 0; l < d; ++l) {
            if (std::abs(x(m, l)) <= floor) continue;
            for (Index n = 0; n < d; ++n) {
                if (std::abs(x(l, n)) <= floor) continue;
                const std::size_t k1 = bohr.bin(m, l);
                const std::size_t k2 = bohr.bin(l, n);
                if (seen[k1 * nb + k2]) continue;
                seen[k1 * nb + k2] = 1;
                pairs.emplace_back(bohr.frequency(k1), bohr.frequency(k2));
            }
        }
    }
    return pairs;
}

inline FTable lamb_shift_table(const BohrDecomposition& bohr, const BathSpec& bath,
                               const QuadratureSpec& quad) {
    const auto pairs = lamb_shift_gap_pairs(bohr);
    return f_table(bath, pairs, quad);
}

// Triple sum in the eigenbasis with f read from a table keyed on binned gaps.
inline HermitianOperator build_lamb_shift(const BohrDecomposition& bohr, const FTable& table) {
    const Matrix& x = bohr.operator_eigen();
    const double floor = detail::significance_floor(x);
    const Index d = bohr.dim();
    Matrix lam = Matrix::Zero(d, d);
    for (Index n = 0; n < d; ++n) {
        for (Index m = 0; m < d; ++m) {
            Complex acc(0.0, 0.0);
            for (Index l = 0; l < d; ++l) {
                if (std::abs(x(m, l)) <= floor || std::abs(x(l, n)) <= floor) continue;
                const double f =
                    table.at(bohr.frequency(bohr.bin(m, l)), bohr.frequency(bohr.bin(l, n)));
                acc += f * x(m, l) * x(l, n);
            }
            lam(m, n) = acc;
        }
    }
    lam = bohr.eigensystem().to_lab(lam);
    const double scale = max_abs(lam);
    const double asym = hermitian_asymmetry(lam);
    if (asym > 1e-8 * scale) {
        std::ostringstream os;
        os << "build_lamb_shift: Lamb shift not Hermitian (asymmetry " << asym << ", scale "
           << scale << ")";
        throw NumericalError(os.str());
    }
    return HermitianOperator(hermitian_part(lam));
}

inline HermitianOperator build_lamb_shift(const BohrDecomposition& bohr, const NoiseChannel& ch,
                                          const QuadratureSpec& quad = {}) {
    if (ch.bath.coupling == 0.0) return HermitianOperator::zero(bohr.dim());
    return build_lamb_shift(bohr, lamb_shift_table(bohr, ch.bath, quad));
}

inline HermitianOperator build_lamb_shift(const EigenDecomposition& eig, const NoiseChannel& ch,
                                          const QuadratureSpec& quad = {}) {
    if (ch.coupling.dim() != eig.dim()) {
        throw ValidationError("build_lamb_shift: coupling and Hamiltonian dimensions differ");
    }
    if (ch.bath.coupling == 0.0) return HermitianOperator::zero(eig.dim());
    return build_lamb_shift(bohr_decompose(ch.coupling, eig), ch, quad);
}

// Double Bohr sum sum_{w1,w2} f(w1, w2) A(w1) A(w2) with dense components.
// O(#bins^2 d^3); meant as a cross-check for small systems.
inline Matrix build_lamb_shift_bohr(const BohrDecomposition& bohr, const FTable& table) {
    const Index d = bohr.dim();
    std::vector<Matrix> comps;
    comps.reserve(bohr.size());
    for (std::size_t k = 0; k < bohr.size(); ++k) comps.push_back(bohr.component(k));
    Matrix lam = Matrix::Zero(d, d);
    for (std::size_t k1 = 0; k1 < bohr.size(); ++k1) {
        for (std::size_t k2 = 0; k2 < bohr.size(); ++k2) {
            const double w1 = bohr.frequency(k1);
            const double w2 = bohr.frequency(k2);
            if (!table.contains(w1, w2)) continue;
            lam.noalias() += table.at(w1, w2) * (comps[k1] * comps[k2]);
        }
    }
    return lam;
}

// ------------------------------ generators --------------------------------

inline UleGenerator make_ule_generator(const HermitianOperator& h, const EigenDecomposition& eig,
                                       const NoiseChannel& ch, const QuadratureSpec& quad = {},
                                       bool with_lamb_shift = true) {
    if (h.dim() != eig.dim() || ch.coupling.dim() != eig.dim()) {
        throw ValidationError("make_ule_generator: dimension mismatch");
    }
    UleGenerator gen;
    gen.hamiltonian = h;
    gen.lamb_shift = with_lamb_shift ? build_lamb_shift(eig, ch, quad) : HermitianOperator::zero(h.dim());
    gen.jumps.push_back(build_jump_operator(eig, ch));
    return gen;
}

// Channel-additive: jumps concatenated, Lamb shifts summed.
inline UleGenerator channels_compose(std::span<const UleGenerator> gens) {
    if (gens.empty()) throw ValidationError("channels_compose: no generators given");
    const Matrix& h = gens.front().hamiltonian.matrix();
    UleGenerator out = gens.front();
    for (std::size_t i = 1; i < gens.size(); ++i) {
        const Matrix& hi = gens[i].hamiltonian.matrix();
        if (hi.rows() != h.rows() || max_abs(hi - h) > 1e-12 * std::max(1.0, max_abs(h))) {
            throw ValidationError("channels_compose: generators have different system Hamiltonians");
        }
        out.lamb_shift = HermitianOperator(out.lamb_shift.matrix() + gens[i].lamb_shift.matrix());
        out.jumps.insert(out.jumps.end(), gens[i].jumps.begin(), gens[i].jumps.end());
    }
    return out;
}

// Dense d^2 x d^2 matrix of the Lindblad generator with Hamiltonian h and the
// given jumps. Jumps that are exactly zero are dropped.
inline Superoperator lindblad_superoperator(const Matrix& h, const std::vector<Matrix>& jumps) {
    const Index d = h.rows();
    const Index n = d * d;
    const Complex minus_i(0.0, -1.0);
    Superoperator s;
    s.dim = d;
    s.matrix = Matrix::Zero(n, n);
    Matrix& mat = s.matrix;

    // -i (I (x) H - H^T (x) I)
    for (Index j = 0; j < d; ++j) {
        for (Index k = 0; k < d; ++k) {
            for (Index i = 0; i < d; ++i) mat(i + d * j, k + d * j) += minus_i * h(i, k);
        }
    }
    for (Index l = 0; l < d; ++l) {
        for (Index j = 0; j < d; ++j) {
            const Complex hlj = h(l, j);
            for (Index i = 0; i < d; ++i) mat(i + d * j, i + d * l) -= minus_i * hlj;
        }
    }

    LindbladForm form{h, {}};
    for (const auto& l : jumps) {
        if (l.rows() != d || l.cols() != d) {
            throw ValidationError("lindblad_superoperator: jump dimension mismatch");
        }
        if (max_abs(l) == 0.0) continue;
        form.jumps.push_back(l);
        const Matrix k = l.adjoint() * l;
        // conj(L) (x) L
        for (Index cl = 0; cl < d; ++cl) {
            for (Index ck = 0; ck < d; ++ck) {
                const Index col = ck + d * cl;
                for (Index rj = 0; rj < d; ++rj) {
                    const Complex a = std::conj(l(rj, cl));
                    if (a == Complex(0.0, 0.0)) continue;
                    for (Index ri = 0; ri < d; ++ri) mat(ri + d * rj, col) += a * l(ri, ck);
                }
            }
        }
        // -1/2 I (x) K - 1/2 K^T (x) I
        for (Index j = 0; j < d; ++j) {
            for (Index kk = 0; kk < d; ++kk) {
                for (Index i = 0; i < d; ++i) mat(i + d * j, kk + d * j) -= 0.5 * k(i, kk);
            }
        }
        for (Index l2 = 0; l2 < d; ++l2) {
            for (Index j = 0; j < d; ++j) {
                const Complex klj = k(l2, j);
                for (Index i = 0; i < d; ++i) mat(i + d * j, i + d * l2) -= 0.5 * klj;
            }
        }
    }
    s.form = std::move(form);
    return s;
}

inline Superoperator dissipator_superoperator(const std::vector<Matrix>& jumps) {
    const Index d = jumps.empty() ? 0 : jumps.front().rows();
    return lindblad_superoperator(Matrix::Zero(d, d), jumps);
}

inline Superoperator build_liouvillian(const UleGenerator& gen, bool include_lamb_shift = true) {
    Matrix h = gen.hamiltonian.matrix();
    if (include_lamb_shift) h += gen.lamb_shift.matrix();
    return lindblad_superoperator(h, gen.jumps);
}

// Jump operators of the secular generator: 2 pi sqrt(gamma) g(w) A(w), one per
// Bohr frequency.
inline std::vector<Matrix> secular_jumps(const BohrDecomposition& bohr, const NoiseChannel& ch) {
    const double c = jump_prefactor(ch.bath);
    std::vector<Matrix> jumps;
    for (std::size_t k = 0; k < bohr.size(); ++k) {
        Matrix a = bohr.component(k);
        if (max_abs(a) == 0.0) continue;
        jumps.push_back((c * jump_spectral(ch.bath, bohr.frequency(k))) * a);
    }
    return jumps;
}

// sum_w f(w, -w) A(w) A(-w)
inline HermitianOperator secular_lamb_shift(const BohrDecomposition& bohr, const NoiseChannel& ch,
                                            const QuadratureSpec& quad = {}) {
    const Index d = bohr.dim();
    if (ch.bath.coupling == 0.0) return HermitianOperator::zero(d);
    std::vector<GapPair> pairs;
    for (std::size_t k = 0; k < bohr.size(); ++k) {
        pairs.emplace_back(bohr.frequency(k), -bohr.frequency(k));
    }
    const FTable table = f_table(ch.bath, pairs, quad);
    Matrix lam = Matrix::Zero(d, d);
    for (std::size_t k = 0; k < bohr.size(); ++k) {
        const double w = bohr.frequency(k);
        lam += table.at(w, -w) * (bohr.component(k) * bohr.component(bohr.mirror(k)));
    }
    return HermitianOperator(hermitian_part(lam));
}

inline Superoperator build_secular_generator(const BohrDecomposition& bohr,
                                             const NoiseChannel& ch,
                                             const QuadratureSpec& quad = {},
                                             bool include_lamb_shift = true) {
    if (ch.coupling.dim() != bohr.dim()) {
        throw ValidationError("build_secular_generator: dimension mismatch");
    }
    Matrix h = bohr.eigensystem().reconstruct();
    h = hermitian_part(h);
    if (include_lamb_shift) h += secular_lamb_shift(bohr, ch, quad).matrix();
    return lindblad_superoperator(h, secular_jumps(bohr, ch));
}

} // namespace ule
