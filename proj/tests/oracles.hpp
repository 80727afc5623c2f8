// oracles.hpp — Reference computations for the tests, written without the
// library's numerical kernels (no Eigen solvers, no adaptive quadrature).

#pragma once

#include "ule/operators.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using ule::Complex;
using ule::Index;
using ule::Matrix;

inline Matrix random_hermitian(Index d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix a(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) a(i, j) = Complex(n(rng), n(rng));
    }
    return scale * 0.5 * (a + a.adjoint());
}

inline Matrix random_density(Index d, std::mt19937_64& rng) {
    const Matrix a = random_hermitian(d, rng);
    Matrix rho = a * a.adjoint();
    return rho / rho.trace().real();
}

// Cyclic Jacobi rotations on a dense real symmetric matrix (row-major vector).
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, int n) {
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        }
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(at(p, q)) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = at(k, p);
                    const double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = at(p, k);
                    const double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Eigenvalues of a complex Hermitian matrix through its real embedding
// [[Re, -Im], [Im, Re]], whose spectrum is the original one doubled.
inline std::vector<double> hermitian_eigenvalues(const Matrix& h) {
    const int d = static_cast<int>(h.rows());
    const int n = 2 * d;
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            a[i * n + j] = h(i, j).real();
            a[i * n + j + d] = -h(i, j).imag();
            a[(i + d) * n + j] = h(i, j).imag();
            a[(i + d) * n + j + d] = h(i, j).real();
        }
    }
    const std::vector<double> all = jacobi_eigenvalues(a, n);
    std::vector<double> ev(d);
    for (int i = 0; i < d; ++i) ev[i] = 0.5 * (all[2 * i] + all[2 * i + 1]);
    return ev;
}

// g(w) from its closed form, written out independently.
inline double g(double omega, double temperature, double cutoff) {
    if (omega == 0.0) return std::sqrt(temperature) / (2.0 * std::numbers::pi);
    const double j = omega * std::exp(-omega * omega / (2.0 * cutoff * cutoff)) /
                     (1.0 - std::exp(-omega / temperature));
    return std::sqrt(j) / (2.0 * std::numbers::pi);
}

// -2 pi gamma PV int h(w)/w with h(w) = g(w - e1) g(w + e2), via singularity
// subtraction: int_{-W}^{W} [h(w) - h(0)] / w dw by an even-count midpoint rule.
inline double f_principal_value(double e1, double e2, double temperature, double gamma, double cutoff,
                                long points = 1000000) {
    const double w_max = std::abs(e1) + std::abs(e2) + 8.0 * cutoff;
    auto h = [&](double w) { return g(w - e1, temperature, cutoff) * g(w + e2, temperature, cutoff); };
    const double h0 = h(0.0);
    const double dw = 2.0 * w_max / points;
    double sum = 0.0;
    for (long i = 0; i < points; ++i) {
        const double w = -w_max + (i + 0.5) * dw;
        sum += (h(w) - h0) / w;
    }
    return -2.0 * std::numbers::pi * gamma * sum * dw;
}

// Generator applied element by element:
// -i[H, rho] + sum_j L_j rho L_j^+ - 1/2 {L_j^+ L_j, rho}
inline Matrix apply_lindblad(const Matrix& h, const std::vector<Matrix>& jumps, const Matrix& rho) {
    const Index d = rho.rows();
    Matrix out = Matrix::Zero(d, d);
    for (Index i = 0; i < d; ++i) {
        for (Index j = 0; j < d; ++j) {
            Complex acc(0.0, 0.0);
            for (Index k = 0; k < d; ++k) acc += -Complex(0.0, 1.0) * (h(i, k) * rho(k, j) - rho(i, k) * h(k, j));
            for (const auto& l : jumps) {
                for (Index a = 0; a < d; ++a) {
                    for (Index b = 0; b < d; ++b) {
                        acc += l(i, a) * rho(a, b) * std::conj(l(j, b));
                        // (L^+ L)_{ib} rho_bj and rho_ia (L^+ L)_{aj}
                        acc -= 0.5 * std::conj(l(a, i)) * l(a, b) * rho(b, j);
                        acc -= 0.5 * rho(i, a) * std::conj(l(b, a)) * l(b, j);
                    }
                }
            }
            out(i, j) = acc;
        }
    }
    return out;
}

// Lab-basis jump operator: 2 pi sqrt(gamma) sum_{m,n} g(E_n - E_m) |m><m| X |n><n|,
// built from explicit eigenvectors.
inline Matrix jump_operator(const Matrix& x, const std::vector<double>& energies, const Matrix& basis,
                            double temperature, double gamma, double cutoff) {
    const Index d = x.rows();
    Matrix out = Matrix::Zero(d, d);
    for (Index m = 0; m < d; ++m) {
        for (Index n = 0; n < d; ++n) {
            const Complex xmn = basis.col(m).adjoint() * x * basis.col(n);
            out += g(energies[n] - energies[m], temperature, cutoff) * xmn * basis.col(m) * basis.col(n).adjoint();
        }
    }
    return 2.0 * std::numbers::pi * std::sqrt(gamma) * out;
}

inline Matrix gibbs(const Matrix& h_diag_basis, const std::vector<double>& energies, double beta) {
    const Index d = h_diag_basis.rows();
    Matrix rho = Matrix::Zero(d, d);
    double z = 0.0;
    for (Index n = 0; n < d; ++n) {
        const double w = std::exp(-beta * (energies[n] - energies[0]));
        z += w;
        rho += w * h_diag_basis.col(n) * h_diag_basis.col(n).adjoint();
    }
    return rho / z;
}

} // namespace oracle
