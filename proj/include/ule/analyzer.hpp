// analyzer.hpp — Stationarity tests of the Gibbs state under the universal
// Lindblad generator.
//
// For rho_th = exp(-beta H)/Z the thermal shift rho_th A(w) = exp(beta w) A(w) rho_th
// and the KMS relation g(-w) = exp(-beta w/2) g(w) reduce the generator's
// action on rho_th to double sums over Bohr frequencies:
//
//   D[rho_th]        = -2 pi^2 gamma sum_{w1,w2} (1 - exp(beta (w2 - w1)/2))^2
//                         g(w1) g(w2) A^+(w1) A(w2) rho_th
//   [Lambda, rho_th] = sum_{w1,w2} f(w1, w2) (1 - exp(beta (w1 + w2))) A(w1) A(w2) rho_th
//
// The equal-frequency terms (w1 = w2, resp. w1 = -w2) are the secular ones and
// vanish identically; everything else is what keeps rho_th from being stationary.

#pragma once

#include "ule/bath.hpp"
#include "ule/dynamics.hpp"
#include "ule/errors.hpp"
#include "ule/generator.hpp"
#include "ule/io.hpp"
#include "ule/operators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ule {

// L rho L^+ - 1/2 {L^+ L, rho}
inline Matrix dissipator_on_gibbs_direct(const Matrix& l, const DensityMatrix& rho_th) {
    const Matrix& rho = rho_th.matrix();
    if (l.rows() != rho.rows()) throw ValidationError("dissipator_on_gibbs_direct: dimension mismatch");
    const Matrix k = l.adjoint() * l;
    return l * rho * l.adjoint() - 0.5 * (k * rho + rho * k);
}

// [Lambda, rho]
inline Matrix lambshift_on_gibbs_direct(const HermitianOperator& lamb, const DensityMatrix& rho_th) {
    const Matrix& rho = rho_th.matrix();
    if (lamb.dim() != rho.rows()) throw ValidationError("lambshift_on_gibbs_direct: dimension mismatch");
    return lamb.matrix() * rho - rho * lamb.matrix();
}

namespace detail {

enum class FrequencyPairs { all, secular };

// sum_{w1,w2} c(w1,w2) [A^+(w1) A(w2)] in the eigenbasis; [A^+(w1) A(w2)]_mn
// = sum_l conj(X_lm) X_ln with w1 = E_m - E_l and w2 = E_n - E_l.
template <class Coeff>
Matrix adjoint_product_sum(const BohrDecomposition& bohr, Coeff&& coeff, FrequencyPairs which) {
    const Matrix& x = bohr.operator_eigen();
    const Index d = bohr.dim();
    Matrix s = Matrix::Zero(d, d);
    for (Index n = 0; n < d; ++n) {
        for (Index m = 0; m < d; ++m) {
            Complex acc(0.0, 0.0);
            for (Index l = 0; l < d; ++l) {
                const std::size_t k1 = bohr.bin(l, m);
                const std::size_t k2 = bohr.bin(l, n);
                if (which == FrequencyPairs::secular && k1 != k2) continue;
                acc += coeff(k1, k2) * std::conj(x(l, m)) * x(l, n);
            }
            s(m, n) = acc;
        }
    }
    return s;
}

// sum_{w1,w2} c(w1,w2) [A(w1) A(w2)] in the eigenbasis; [A(w1) A(w2)]_mn
// = sum_l X_ml X_ln with w1 = E_l - E_m and w2 = E_n - E_l.
template <class Coeff>
Matrix product_sum(const BohrDecomposition& bohr, Coeff&& coeff, FrequencyPairs which) {
    const Matrix& x = bohr.operator_eigen();
    const double floor = significance_floor(x);
    const Index d = bohr.dim();
    Matrix s = Matrix::Zero(d, d);
    for (Index n = 0; n < d; ++n) {
        for (Index m = 0; m < d; ++m) {
            Complex acc(0.0, 0.0);
            for (Index l = 0; l < d; ++l) {
                if (std::abs(x(m, l)) <= floor || std::abs(x(l, n)) <= floor) continue;
                const std::size_t k1 = bohr.bin(m, l);
                const std::size_t k2 = bohr.bin(l, n);
                if (which == FrequencyPairs::secular && k1 != bohr.mirror(k2)) continue;
                acc += coeff(k1, k2) * x(m, l) * x(l, n);
            }
            s(m, n) = acc;
        }
    }
    return s;
}

inline Matrix dissipator_formula_sum(const BohrDecomposition& bohr, const BathSpec& bath,
                                     double beta, FrequencyPairs which) {
    std::vector<double> g(bohr.size());
    for (std::size_t k = 0; k < bohr.size(); ++k) g[k] = jump_spectral(bath, bohr.frequency(k));
    const double pref = -2.0 * std::numbers::pi * std::numbers::pi * bath.coupling;
    auto coeff = [&](std::size_t k1, std::size_t k2) {
        const double shift = 1.0 - std::exp(0.5 * beta * (bohr.frequency(k2) - bohr.frequency(k1)));
        return pref * shift * shift * g[k1] * g[k2];
    };
    return adjoint_product_sum(bohr, coeff, which);
}

inline Matrix lambshift_formula_sum(const BohrDecomposition& bohr, const FTable& table,
                                    double beta, FrequencyPairs which) {
    auto coeff = [&](std::size_t k1, std::size_t k2) {
        const double w1 = bohr.frequency(k1);
        const double w2 = bohr.frequency(k2);
        return table.at(w1, w2) * (1.0 - std::exp(beta * (w1 + w2)));
    };
    return product_sum(bohr, coeff, which);
}

} // namespace detail

// Right side of the dissipator identity, summed over the binned Bohr grid.
inline Matrix dissipator_on_gibbs_formula(const BohrDecomposition& bohr, const BathSpec& bath,
                                          double beta, const DensityMatrix& rho_th) {
    const Matrix s = detail::dissipator_formula_sum(bohr, bath, beta, detail::FrequencyPairs::all);
    return bohr.eigensystem().to_lab(s) * rho_th.matrix();
}

inline Matrix lambshift_on_gibbs_formula(const BohrDecomposition& bohr, const FTable& table,
                                         double beta, const DensityMatrix& rho_th) {
    const Matrix s = detail::lambshift_formula_sum(bohr, table, beta, detail::FrequencyPairs::all);
    return bohr.eigensystem().to_lab(s) * rho_th.matrix();
}

inline Matrix lambshift_on_gibbs_formula(const BohrDecomposition& bohr, const BathSpec& bath,
                                         const QuadratureSpec& quad, double beta,
                                         const DensityMatrix& rho_th) {
    if (bath.coupling == 0.0) return Matrix::Zero(bohr.dim(), bohr.dim());
    return lambshift_on_gibbs_formula(bohr, lamb_shift_table(bohr, bath, quad), beta, rho_th);
}

struct SecularResiduals {
    double dissipator{0.0};
    double lamb_shift{0.0};
};

// Frobenius norms of the equal-frequency restrictions of the two identities.
inline SecularResiduals secular_residuals(const BohrDecomposition& bohr, const BathSpec& bath,
                                          const FTable& table, double beta,
                                          const DensityMatrix& rho_th) {
    const Matrix& u = bohr.eigensystem().basis;
    const Matrix sd = detail::dissipator_formula_sum(bohr, bath, beta, detail::FrequencyPairs::secular);
    SecularResiduals out;
    out.dissipator = (u * sd * u.adjoint() * rho_th.matrix()).norm();
    if (table.size() > 0) {
        const Matrix sl = detail::lambshift_formula_sum(bohr, table, beta, detail::FrequencyPairs::secular);
        out.lamb_shift = (u * sl * u.adjoint() * rho_th.matrix()).norm();
    }
    return out;
}

inline SecularResiduals secular_residuals(const BohrDecomposition& bohr, const BathSpec& bath,
                                          const QuadratureSpec& quad, double beta,
                                          const DensityMatrix& rho_th) {
    const FTable table = bath.coupling == 0.0 ? FTable{} : lamb_shift_table(bohr, bath, quad);
    return secular_residuals(bohr, bath, table, beta, rho_th);
}

// ------------------------------ residual report ----------------------------

// Norms are divided by gamma (units of gamma * eta) whenever gamma > 0.
struct ResidualReport {
    double coupling{0.0};
    bool lamb_shift_evaluated{false};

    double dissipator_direct_norm{0.0};
    double dissipator_formula_norm{0.0};
    double dissipator_mismatch{0.0};
    double dissipator_mismatch_tolerance{0.0};  // 1e-10 * direct

    double lambshift_direct_norm{0.0};
    double lambshift_formula_norm{0.0};
    double lambshift_mismatch{0.0};
    double lambshift_mismatch_tolerance{0.0};   // 1e-6 * direct

    double secular_dissipator_norm{0.0};
    double secular_lambshift_norm{0.0};

    bool dissipator_routes_agree() const { return dissipator_mismatch <= dissipator_mismatch_tolerance; }
    bool lambshift_routes_agree() const { return lambshift_mismatch <= lambshift_mismatch_tolerance; }
};

inline ResidualReport analyze_gibbs_residuals(const HermitianOperator& h, const NoiseChannel& ch,
                                              const QuadratureSpec& quad = {},
                                              bool include_lamb_shift = true) {
    if (h.dim() != ch.coupling.dim()) throw ValidationError("analyze_gibbs_residuals: dimension mismatch");
    const EigenDecomposition eig = eigendecompose(h);
    const BohrDecomposition bohr = bohr_decompose(ch.coupling, eig);
    const double beta = ch.bath.beta;
    const DensityMatrix rho_th = gibbs_state(eig, beta);
    const double unit = ch.bath.coupling > 0.0 ? ch.bath.coupling : 1.0;

    ResidualReport rep;
    rep.coupling = ch.bath.coupling;

    const Matrix d_direct = dissipator_on_gibbs_direct(build_jump_operator(eig, ch), rho_th);
    const Matrix d_formula = dissipator_on_gibbs_formula(bohr, ch.bath, beta, rho_th);
    rep.dissipator_direct_norm = d_direct.norm() / unit;
    rep.dissipator_formula_norm = d_formula.norm() / unit;
    rep.dissipator_mismatch = (d_direct - d_formula).norm() / unit;
    rep.dissipator_mismatch_tolerance = 1e-10 * rep.dissipator_direct_norm;

    FTable table;
    if (include_lamb_shift && ch.bath.coupling > 0.0) {
        table = lamb_shift_table(bohr, ch.bath, quad);
        const Matrix l_direct = lambshift_on_gibbs_direct(build_lamb_shift(bohr, table), rho_th);
        const Matrix l_formula = lambshift_on_gibbs_formula(bohr, table, beta, rho_th);
        rep.lamb_shift_evaluated = true;
        rep.lambshift_direct_norm = l_direct.norm() / unit;
        rep.lambshift_formula_norm = l_formula.norm() / unit;
        rep.lambshift_mismatch = (l_direct - l_formula).norm() / unit;
        rep.lambshift_mismatch_tolerance = 1e-6 * rep.lambshift_direct_norm;
    }

    const SecularResiduals sec = secular_residuals(bohr, ch.bath, table, beta, rho_th);
    rep.secular_dissipator_norm = sec.dissipator / unit;
    rep.secular_lambshift_norm = sec.lamb_shift / unit;
    return rep;
}

inline std::string residual_csv(const ResidualReport& r) {
    io::CsvWriter csv({"quantity", "norm"});
    csv.row("dissipator_direct", r.dissipator_direct_norm)
        .row("dissipator_formula", r.dissipator_formula_norm)
        .row("dissipator_mismatch", r.dissipator_mismatch)
        .row("lambshift_direct", r.lambshift_direct_norm)
        .row("lambshift_formula", r.lambshift_formula_norm)
        .row("lambshift_mismatch", r.lambshift_mismatch)
        .row("secular_dissipator", r.secular_dissipator_norm)
        .row("secular_lambshift", r.secular_lambshift_norm);
    return csv.str();
}

// ------------------------------ deviation report ---------------------------

struct LevelPopulation {
    Index n;        // 1-based, ascending energy
    double energy;
    double rho;     // <n| rho_ss |n>
    double rho_th;  // <n| rho_th |n>
};

struct DeviationReport {
    std::vector<LevelPopulation> levels;
    double max_abs_diag_deviation{0.0};
    double trace_distance{0.0};
    double rho11_gap{0.0};
    std::optional<double> observable_ss;
    std::optional<double> observable_th;
    std::optional<double> observable_gap;
};

// Populations are read in the eigenbasis of H_s.
inline DeviationReport gibbs_deviation(const DensityMatrix& rho_ss, const EigenDecomposition& eig,
                                       double beta,
                                       const std::optional<HermitianOperator>& observable = std::nullopt) {
    if (rho_ss.dim() != eig.dim()) throw ValidationError("gibbs_deviation: dimension mismatch");
    const DensityMatrix rho_th = gibbs_state(eig, beta);
    const Matrix ss_eig = eig.to_eigen(rho_ss.matrix());
    const Matrix th_eig = eig.to_eigen(rho_th.matrix());

    DeviationReport rep;
    for (Index n = 0; n < eig.dim(); ++n) {
        LevelPopulation p{n + 1, eig.energies(n), ss_eig(n, n).real(), th_eig(n, n).real()};
        rep.max_abs_diag_deviation = std::max(rep.max_abs_diag_deviation, std::abs(p.rho - p.rho_th));
        rep.levels.push_back(p);
    }
    rep.rho11_gap = std::abs(rep.levels.front().rho - rep.levels.front().rho_th);
    rep.trace_distance = trace_distance(rho_ss, rho_th);
    if (observable) {
        rep.observable_ss = expectation(rho_ss, *observable);
        rep.observable_th = expectation(rho_th, *observable);
        rep.observable_gap = std::abs(*rep.observable_ss - *rep.observable_th);
    }
    return rep;
}

inline std::string deviation_csv(const DeviationReport& r) {
    io::CsvWriter csv({"n", "E_n", "rho_nn", "rho_nn_th"});
    for (const auto& p : r.levels) csv.row(p.n, p.energy, p.rho, p.rho_th);
    return csv.str();
}

// ------------------------------ trend sweep --------------------------------

struct SweepSystem {
    HermitianOperator hamiltonian;
    HermitianOperator coupling;
    double cutoff{100.0};
    bool include_lamb_shift{false};
    std::optional<HermitianOperator> observable;
    QuadratureSpec quad{};
};

struct SweepCell {
    double temperature{0.0};
    double coupling{0.0};
    std::optional<DeviationReport> report;
    std::string error;  // set when the cell failed
};

// Steady state deviation from Gibbs on the T x gamma grid, T outer.
// Failing cells record their error and the sweep continues.
inline std::vector<SweepCell> trend_sweep(const SweepSystem& sys, std::span<const double> temperatures,
                                          std::span<const double> couplings) {
    if (temperatures.empty() || couplings.empty()) throw ValidationError("trend_sweep: empty parameter list");
    for (double t : temperatures) {
        if (!(t > 0.0)) throw ValidationError("trend_sweep: temperatures must be positive");
    }
    for (double g : couplings) {
        if (!(g > 0.0)) throw ValidationError("trend_sweep: couplings must be positive");
    }
    const EigenDecomposition eig = eigendecompose(sys.hamiltonian);
    std::vector<SweepCell> cells;
    for (double t : temperatures) {
        for (double g : couplings) {
            SweepCell cell{t, g, std::nullopt, {}};
            try {
                const NoiseChannel ch{sys.coupling, BathSpec::make(t, g, sys.cutoff)};
                const UleGenerator gen =
                    make_ule_generator(sys.hamiltonian, eig, ch, sys.quad, sys.include_lamb_shift);
                const SteadyStateReport ss = steady_state(build_liouvillian(gen, sys.include_lamb_shift));
                cell.report = gibbs_deviation(ss.state, eig, 1.0 / t, sys.observable);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

struct TrendCheck {
    bool monotone{true};
    std::vector<std::string> violations;
};

namespace detail {

inline const SweepCell* find_cell(std::span<const SweepCell> cells, double t, double g) {
    for (const auto& c : cells) {
        if (c.temperature == t && c.coupling == g) return &c;
    }
    return nullptr;
}

// Values along one line must not increase; differences within tol count as
// soft (ties or sub-tolerance inversions), at most allowed_soft per line.
inline void check_line(const std::vector<double>& values, const std::string& label, double tol,
                       int allowed_soft, TrendCheck& out) {
    int soft = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        const double delta = values[i] - values[i - 1];
        if (delta > tol) {
            out.monotone = false;
            out.violations.push_back(label + ": increase of " + io::format_double(delta));
        } else if (std::abs(delta) <= tol) {
            ++soft;
        }
    }
    if (soft > allowed_soft) {
        out.monotone = false;
        out.violations.push_back(label + ": " + std::to_string(soft) + " ties");
    }
}

} // namespace detail

// Trace distance non-increasing in T at fixed gamma, and non-increasing as
// gamma decreases at fixed T.
inline TrendCheck check_trend(std::span<const SweepCell> cells, double tol = 1e-10, int allowed_soft = 1) {
    std::vector<double> ts;
    std::vector<double> gs;
    for (const auto& c : cells) {
        if (std::find(ts.begin(), ts.end(), c.temperature) == ts.end()) ts.push_back(c.temperature);
        if (std::find(gs.begin(), gs.end(), c.coupling) == gs.end()) gs.push_back(c.coupling);
    }
    std::sort(ts.begin(), ts.end());
    std::sort(gs.begin(), gs.end(), std::greater<>());

    TrendCheck out;
    auto value = [&](double t, double g) -> std::optional<double> {
        const SweepCell* c = detail::find_cell(cells, t, g);
        if (!c || !c->report) {
            out.monotone = false;
            out.violations.push_back("cell (T=" + io::format_double(t) + ", gamma=" + io::format_double(g) +
                                     ") has no result");
            return std::nullopt;
        }
        return c->report->trace_distance;
    };
    for (double g : gs) {
        std::vector<double> line;
        for (double t : ts) {
            if (auto v = value(t, g)) line.push_back(*v);
        }
        detail::check_line(line, "gamma=" + io::format_double(g), tol, allowed_soft, out);
    }
    for (double t : ts) {
        std::vector<double> line;
        for (double g : gs) {
            if (auto v = value(t, g)) line.push_back(*v);
        }
        detail::check_line(line, "T=" + io::format_double(t), tol, allowed_soft, out);
    }
    return out;
}

inline std::string sweep_csv(std::span<const SweepCell> cells) {
    io::CsvWriter csv({"T", "gamma", "trace_distance", "max_diag_dev", "obs_gap"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& c : cells) {
        if (c.report) {
            csv.row(c.temperature, c.coupling, c.report->trace_distance, c.report->max_abs_diag_deviation,
                    c.report->observable_gap.value_or(nan));
        } else {
            csv.row(c.temperature, c.coupling, nan, nan, nan);
        }
    }
    return csv.str();
}

} // namespace ule
