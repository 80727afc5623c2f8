// systems.hpp — Small reference systems and the config-driven system factory.
//
//   qubit        H = diag(0, delta), X = sigma_x
//   three_level  H = diag(0, 1, 3),  X = [[0,1,0],[1,0,1],[0,1,1]]
//   spinchain    see spinchain.hpp; the first end-site channel is the primary one

#pragma once

#include "ule/bath.hpp"
#include "ule/errors.hpp"
#include "ule/generator.hpp"
#include "ule/io.hpp"
#include "ule/operators.hpp"
#include "ule/spinchain.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ule {

inline HermitianOperator qubit_hamiltonian(double delta = 1.0) {
    Matrix h = Matrix::Zero(2, 2);
    h(1, 1) = delta;
    return HermitianOperator(h);
}

inline HermitianOperator qubit_coupling() {
    Matrix x(2, 2);
    x << 0.0, 1.0, 1.0, 0.0;
    return HermitianOperator(x);
}

inline HermitianOperator three_level_hamiltonian() {
    Matrix h = Matrix::Zero(3, 3);
    h(1, 1) = 1.0;
    h(2, 2) = 3.0;
    return HermitianOperator(h);
}

// sigma_x on (1,2), sigma_x on (2,3), and a diagonal weight on level 3.
inline HermitianOperator three_level_coupling() {
    Matrix x(3, 3);
    x << 0.0, 1.0, 0.0,
         1.0, 0.0, 1.0,
         0.0, 1.0, 1.0;
    return HermitianOperator(x);
}

struct SystemModel {
    std::string name;
    HermitianOperator hamiltonian;
    std::vector<NoiseChannel> channels;  // channels[0] is the primary one
    bool include_lamb_shift{true};
    std::optional<HermitianOperator> observable;
    DensityMatrix initial;
    QuadratureSpec quad{};
    std::optional<SpinChainSpec> chain;

    double cutoff() const { return channels.front().bath.cutoff; }
};

// Highest eigenstate of H.
inline DensityMatrix top_eigenstate(const HermitianOperator& h) {
    const EigenDecomposition eig = eigendecompose(h);
    const Index top = eig.dim() - 1;
    return DensityMatrix(hermitian_part(eig.projector(top)));
}

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys{
        "system", "N", "eta", "B_z", "T1", "T2", "gamma1", "gamma2", "Lambda_c", "omega0",
        "couple_sites", "ignore_lamb_shift",
        "temperature", "coupling", "cutoff", "delta", "include_lamb_shift",
        "rel_tol", "abs_tol", "cutoff_multiple", "omega_max_scale", "max_depth",
        "t_end", "samples", "tol",
        "omega_min", "omega_max", "omega_points",
        "T_list", "gamma_list"};
    return keys;
}

inline SystemModel system_from_config(const io::Config& cfg) {
    cfg.require_known(known_config_keys());
    const std::string kind = cfg.get_string("system", "spinchain");
    const QuadratureSpec quad = quadrature_from_config(cfg);

    if (kind == "spinchain") {
        const SpinChainSpec spec = spec_from_config(cfg);
        const HermitianOperator h = build_chain_hamiltonian(spec);
        std::vector<NoiseChannel> channels;
        for (const auto& ch : chain_channels(spec)) {
            if (ch.bath.coupling > 0.0 || channels.empty()) channels.push_back(ch);
        }
        return SystemModel{kind, h, channels, !spec.ignore_lamb_shift, magnetization(spec.N),
                           all_up_state(spec.N), quad, spec};
    }
    if (kind == "qubit" || kind == "three_level") {
        const BathSpec bath = BathSpec::make(cfg.get_double("temperature"), cfg.get_double("coupling"),
                                             cfg.get_double("cutoff", 100.0));
        const HermitianOperator h = kind == "qubit" ? qubit_hamiltonian(cfg.get_double("delta", 1.0))
                                                    : three_level_hamiltonian();
        const HermitianOperator x = kind == "qubit" ? qubit_coupling() : three_level_coupling();
        return SystemModel{kind, h, {NoiseChannel{x, bath}}, cfg.get_bool("include_lamb_shift", true),
                           std::nullopt, top_eigenstate(h), quad, std::nullopt};
    }
    throw ValidationError("config key 'system': unknown system '" + kind +
                          "' (expected spinchain, qubit or three_level)");
}

// Generator of every active channel of the model.
inline Superoperator model_liouvillian(const SystemModel& model, const EigenDecomposition& eig) {
    std::vector<UleGenerator> gens;
    for (const auto& ch : model.channels) {
        if (ch.bath.coupling == 0.0) continue;
        gens.push_back(make_ule_generator(model.hamiltonian, eig, ch, model.quad, model.include_lamb_shift));
    }
    if (gens.empty()) {
        return build_liouvillian(
            UleGenerator{model.hamiltonian, HermitianOperator::zero(model.hamiltonian.dim()), {}}, false);
    }
    return build_liouvillian(channels_compose(gens), model.include_lamb_shift);
}

} // namespace ule
