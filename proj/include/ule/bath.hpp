// bath.hpp — Bath spectral data: the jump correlation function g(w) and the
// principal-value kernel f(E1, E2) that feeds the Lamb shift.
//
// g(w) = sqrt(J(w)) / (2 pi) with the Ohmic, Gaussian-cutoff, Bose-weighted
//     J(w) = w exp(-w^2 / (2 Lc^2)) / (1 - exp(-beta w)),   J(0) = T.
// J(-w) = exp(-beta w) J(w), so g obeys the KMS relation g(-w) = exp(-beta w / 2) g(w).
//
// f(E1, E2) = -2 pi gamma PV int dw g(w - E1) g(w + E2) / w.

#pragma once

#include "ule/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <span>
#include <utility>
#include <vector>

namespace ule {

struct BathSpec {
    double temperature{1.0};
    double beta{1.0};
    double coupling{0.0};  // gamma
    double cutoff{1.0};    // Lc

    static BathSpec make(double temperature, double coupling, double cutoff) {
        if (!(temperature > 0.0) || !std::isfinite(temperature)) {
            throw ValidationError("BathSpec: temperature must be positive and finite");
        }
        if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
            throw ValidationError("BathSpec: coupling must be non-negative and finite");
        }
        if (!(cutoff > 0.0) || !std::isfinite(cutoff)) {
            throw ValidationError("BathSpec: cutoff must be positive and finite");
        }
        return BathSpec{temperature, 1.0 / temperature, coupling, cutoff};
    }
};

struct QuadratureSpec {
    double rel_tol{1e-8};
    double abs_tol{1e-12};
    double cutoff_multiple{8.0};  // Omega_max = |E1| + |E2| + cutoff_multiple * Lc
    double omega_max_scale{1.0};  // extra factor on Omega_max (tail-control checks)
    int max_depth{50};

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
            throw ValidationError("QuadratureSpec: tolerances must be positive");
        }
        if (!(cutoff_multiple > 0.0) || !(omega_max_scale > 0.0)) {
            throw ValidationError("QuadratureSpec: integration ceiling must be positive");
        }
        if (max_depth < 1) throw ValidationError("QuadratureSpec: max_depth must be >= 1");
    }

    double omega_max(const BathSpec& bath, double e1, double e2) const {
        return (std::abs(e1) + std::abs(e2) + cutoff_multiple * bath.cutoff) * omega_max_scale;
    }
};

// g(w) >= 0. Negative frequencies are evaluated through the KMS factor, which
// is the analytic value of sqrt(J(-w)) and stays finite for large beta |w|.
inline double jump_spectral(const BathSpec& bath, double omega) {
    constexpr double inv_two_pi = 0.5 * std::numbers::inv_pi;
    const double w = std::abs(omega);
    double j;
    if (w == 0.0) {
        j = bath.temperature;
    } else {
        const double bose = w / -std::expm1(-bath.beta * w);
        j = bose * std::exp(-w * w / (2.0 * bath.cutoff * bath.cutoff));
    }
    double g = inv_two_pi * std::sqrt(j);
    if (omega < 0.0) g *= std::exp(-0.5 * bath.beta * w);
    return g;
}

// max |g(-w) - exp(-beta w / 2) g(w)| / max(g(w), floor) over the samples.
template <class SpectralFn>
double kms_check(SpectralFn&& g, double beta, std::span<const double> samples) {
    double worst = 0.0;
    for (double w : samples) {
        const double gp = g(w);
        const double dev = std::abs(g(-w) - std::exp(-0.5 * beta * w) * gp);
        worst = std::max(worst, dev / std::max(gp, std::numeric_limits<double>::min()));
    }
    return worst;
}

inline double kms_check(const BathSpec& bath, std::span<const double> samples) {
    return kms_check([&](double w) { return jump_spectral(bath, w); }, bath.beta, samples);
}

// ------------------------------ quadrature --------------------------------

struct QuadratureResult {
    double value{0.0};
    double error{0.0};
    long evaluations{0};
    bool converged{true};
};

namespace detail {

// 15-point Kronrod rule with embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kGkNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double kronrod;
    double gauss;
    double kronrod_abs;
};

template <class F>
Panel gauss_kronrod15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = kKronrodWeights[7] * fc;
    double ka = kKronrodWeights[7] * std::abs(fc);
    double g = kGaussWeights[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = h * kGkNodes[i];
        const double f1 = f(c - dx);
        const double f2 = f(c + dx);
        k += kKronrodWeights[i] * (f1 + f2);
        ka += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) g += kGaussWeights[i / 2] * (f1 + f2);
    }
    return {k * h, g * h, ka * std::abs(h)};
}

template <class F>
void adapt(F& f, double a, double b, const Panel& p, int depth, double tol_density,
           int max_depth, QuadratureResult& acc) {
    const double err = std::abs(p.kronrod - p.gauss);
    if (err <= tol_density * (b - a) || depth >= max_depth) {
        if (err > tol_density * (b - a)) acc.converged = false;
        acc.value += p.kronrod;
        acc.error += err;
        return;
    }
    const double m = 0.5 * (a + b);
    const Panel left = gauss_kronrod15(f, a, m);
    const Panel right = gauss_kronrod15(f, m, b);
    acc.evaluations += 30;
    adapt(f, a, m, left, depth + 1, tol_density, max_depth, acc);
    adapt(f, m, b, right, depth + 1, tol_density, max_depth, acc);
}

} // namespace detail

// Adaptive interval halving of a 16-panel Gauss-Kronrod start. A panel is
// accepted once its |K15 - G7| falls under its share of
// max(abs_tol, rel_tol * int|f|); panels still failing at max_depth are kept
// and the result is flagged unconverged.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_tol,
                                    int max_depth) {
    constexpr int kPanels = 16;
    QuadratureResult acc;
    if (b == a) return acc;
    std::array<detail::Panel, kPanels> panels{};
    const double width = (b - a) / kPanels;
    double total_abs = 0.0;
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == kPanels) ? b : a + (i + 1) * width;
        panels[i] = detail::gauss_kronrod15(f, lo, hi);
        total_abs += panels[i].kronrod_abs;
    }
    acc.evaluations = 15L * kPanels;
    const double tol_density = std::max(abs_tol, rel_tol * total_abs) / (b - a);
    for (int i = 0; i < kPanels; ++i) {
        const double lo = a + i * width;
        const double hi = (i + 1 == kPanels) ? b : a + (i + 1) * width;
        detail::adapt(f, lo, hi, panels[i], 0, tol_density, max_depth, acc);
    }
    return acc;
}

// Principal value folded onto [0, Omega_max]:
//   PV int h(w)/w dw = int_0^Omega [h(w) - h(-w)] / w dw,  h(w) = g(w - E1) g(w + E2),
// whose integrand tends to 2 h'(0) at w = 0.
inline QuadratureResult f_integral_detailed(const BathSpec& bath, double e1, double e2,
                                            const QuadratureSpec& quad = {}) {
    quad.validate();
    if (!std::isfinite(e1) || !std::isfinite(e2)) {
        throw ValidationError("f_integral: gap arguments must be finite");
    }
    if (bath.coupling == 0.0) return {};

    auto h = [&](double w) { return jump_spectral(bath, w - e1) * jump_spectral(bath, w + e2); };
    auto folded = [&](double w) {
        if (w == 0.0) {
            constexpr double dw = 1e-6;
            return (h(dw) - h(-dw)) / dw;
        }
        return (h(w) - h(-w)) / w;
    };

    const double omega_max = quad.omega_max(bath, e1, e2);
    QuadratureResult r =
        integrate_adaptive(folded, 0.0, omega_max, quad.rel_tol, quad.abs_tol, quad.max_depth);
    const double prefactor = -2.0 * std::numbers::pi * bath.coupling;
    r.value *= prefactor;
    r.error *= std::abs(prefactor);
    if (!r.converged) {
        std::ostringstream os;
        os.precision(17);
        os << "f_integral(" << e1 << ", " << e2 << "): depth " << quad.max_depth
           << " exceeded; estimate " << r.value << " +/- " << r.error;
        throw QuadratureError(os.str(), r.value, r.error);
    }
    return r;
}

inline double f_integral(const BathSpec& bath, double e1, double e2,
                         const QuadratureSpec& quad = {}) {
    return f_integral_detailed(bath, e1, e2, quad).value;
}

// ------------------------------ f table -----------------------------------

using GapPair = std::pair<double, double>;

struct FTable {
    std::map<GapPair, double> values;
    std::size_t evaluations{0};

    double at(double w1, double w2) const {
        auto it = values.find({w1, w2});
        if (it == values.end()) {
            std::ostringstream os;
            os << "FTable: pair (" << w1 << ", " << w2 << ") was not tabulated";
            throw std::out_of_range(os.str());
        }
        return it->second;
    }
    bool contains(double w1, double w2) const { return values.count({w1, w2}) != 0; }
    std::size_t size() const { return values.size(); }
};

// (E1, E2) and (-E2, -E1) have bit-identical integrands, so one quadrature
// serves both keys.
inline FTable f_table(const BathSpec& bath, std::span<const GapPair> pairs,
                      const QuadratureSpec& quad = {}) {
    FTable table;
    for (const auto& p : pairs) {
        if (table.contains(p.first, p.second)) continue;
        const GapPair swapped{-p.second, -p.first};
        double value;
        try {
            value = f_integral(bath, std::min(p, swapped).first, std::min(p, swapped).second, quad);
        } catch (const QuadratureError& e) {
            std::ostringstream os;
            os.precision(17);
            os << "f_table: pair (" << p.first << ", " << p.second << "): " << e.what();
            throw QuadratureError(os.str(), e.estimate, e.error_bound);
        }
        ++table.evaluations;
        table.values[p] = value;
        table.values[swapped] = value;
    }
    return table;
}

} // namespace ule
