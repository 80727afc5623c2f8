// ule_cli — command-line front end: spin-chain relaxation, Gibbs residuals,
// steady states, trajectories, bath tables and trend sweeps.
//
// Exit codes: 0 success, 2 configuration / validation error, 3 numerical failure.

#include "ule/analyzer.hpp"
#include "ule/bath.hpp"
#include "ule/dynamics.hpp"
#include "ule/errors.hpp"
#include "ule/generator.hpp"
#include "ule/io.hpp"
#include "ule/operators.hpp"
#include "ule/spinchain.hpp"
#include "ule/systems.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ule;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitOther = 1;

const char* kConfigHelp = R"(Config file: flat `key = value` lines, '#' starts a comment.
Keys:
  system              spinchain | qubit | three_level (default spinchain)
  spin chain          N, eta, B_z, T1, T2, gamma1, gamma2, Lambda_c, omega0,
                      couple_sites (e.g. 1,6), ignore_lamb_shift
  qubit, three_level  temperature, coupling, cutoff, delta (qubit gap), include_lamb_shift
  quadrature          rel_tol, abs_tol, cutoff_multiple, omega_max_scale, max_depth
  propagation         t_end (0: 50/gamma1 for the chain, 50/coupling otherwise), samples, tol
  bath tables         omega_min, omega_max, omega_points
  sweep               T_list, gamma_list (comma separated)
--set key=value overrides the file.)";

struct Common {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";

    io::Config load() const {
        io::Config cfg = config_path.empty() ? io::Config{} : io::Config::load(config_path);
        for (const auto& o : overrides) cfg.set_assignment(o);
        return cfg;
    }

    fs::path out(const std::string& name) const {
        fs::create_directories(out_dir);
        return fs::path(out_dir) / name;
    }
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config_path, "config file");
    sub->add_option("-s,--set", c.overrides, "override a config value (key=value), repeatable");
    sub->add_option("-o,--out", c.out_dir, "output directory")->capture_default_str();
}

void write(const fs::path& path, const std::string& content) {
    io::write_file_atomic(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

io::JsonObject config_echo(const io::Config& cfg) {
    io::JsonObject o;
    for (const auto& [k, v] : cfg.values()) o.add(k, v);
    return o;
}

double default_t_end(const SystemModel& model, const RunSettings& run) {
    if (run.t_end > 0.0) return run.t_end;
    const double g = model.channels.front().bath.coupling;
    if (!(g > 0.0)) throw ValidationError("t_end is required when the primary coupling is 0");
    return 50.0 / g;
}

// ------------------------------ subcommands --------------------------------

int cmd_spinchain(const Common& c) {
    const io::Config cfg = c.load();
    cfg.require_known(known_config_keys());
    if (cfg.get_string("system", "spinchain") != "spinchain") {
        throw ValidationError("spinchain: config key 'system' must be spinchain");
    }
    const SpinChainSpec spec = spec_from_config(cfg);
    const QuadratureSpec quad = quadrature_from_config(cfg);
    const RunSettings run = run_settings_from_config(cfg);
    const ExperimentResult r = run_relaxation(spec, run, quad);

    io::CsvWriter a({"t", "M"});
    for (std::size_t i = 0; i < r.times.size(); ++i) a.row(r.times[i], r.magnetization[i]);
    write(c.out("fig1a.csv"), a.str());
    write(c.out("fig1b.csv"), deviation_csv(r.deviation));

    io::JsonObject sp;
    sp.add("N", spec.N).add("eta", spec.eta).add("B_z", spec.B_z).add("T1", spec.T1).add("T2", spec.T2)
        .add("gamma1", spec.gamma1).add("gamma2", spec.gamma2).add("Lambda_c", spec.Lambda_c)
        .add("omega0", spec.omega0).add("couple_sites",
                                        std::to_string(spec.couple_sites.first) + "," +
                                            std::to_string(spec.couple_sites.second))
        .add("ignore_lamb_shift", spec.ignore_lamb_shift);
    io::JsonObject rs;
    rs.add("t_end", r.t_end).add("samples", run.samples).add("tol", run.tol);
    io::JsonObject res;
    res.add("magnetization_ss", r.magnetization_ss)
        .add("magnetization_th", r.magnetization_th)
        .add("magnetization_gap", std::abs(r.magnetization_ss - r.magnetization_th))
        .add("magnetization_final", r.magnetization.back())
        .add("trace_distance", r.deviation.trace_distance)
        .add("max_abs_diag_deviation", r.deviation.max_abs_diag_deviation)
        .add("rho11_gap", r.deviation.rho11_gap)
        .add("steady_residual", r.steady.residual)
        .add("kernel_dimension", static_cast<long>(r.steady.kernel_dimension))
        .add("steady_method", r.steady.method);
    io::JsonObject meta;
    meta.add("steps_accepted", r.steps_accepted).add("steps_rejected", r.steps_rejected)
        .add("evaluations", r.evaluations).add("max_trace_drift", r.max_trace_drift)
        .add("min_eigenvalue", r.min_eigenvalue);
    io::JsonObject summary;
    summary.add("version", version).add("config", config_echo(cfg)).add("spec", sp).add("run", rs)
        .add("result", res).add("metadata", meta);
    write(c.out("summary.json"), summary.str() + "\n");

    std::cout << "<M>_ss = " << io::format_double(r.magnetization_ss)
              << "  <M>_th = " << io::format_double(r.magnetization_th)
              << "  trace distance = " << io::format_double(r.deviation.trace_distance) << "\n";
    return kExitOk;
}

int cmd_residual(const Common& c) {
    const io::Config cfg = c.load();
    const SystemModel model = system_from_config(cfg);
    const ResidualReport rep =
        analyze_gibbs_residuals(model.hamiltonian, model.channels.front(), model.quad, model.include_lamb_shift);
    write(c.out("residuals.csv"), residual_csv(rep));
    return kExitOk;
}

int cmd_steady(const Common& c) {
    const io::Config cfg = c.load();
    const SystemModel model = system_from_config(cfg);
    const EigenDecomposition eig = eigendecompose(model.hamiltonian);
    const SteadyStateReport ss = steady_state(model_liouvillian(model, eig));
    const DeviationReport dev =
        gibbs_deviation(ss.state, eig, model.channels.front().bath.beta, model.observable);
    write(c.out("steady.csv"), deviation_csv(dev));
    std::cout << "trace distance = " << io::format_double(dev.trace_distance)
              << "  residual = " << io::format_double(ss.residual) << "\n";
    return kExitOk;
}

int cmd_evolve(const Common& c) {
    const io::Config cfg = c.load();
    const SystemModel model = system_from_config(cfg);
    const RunSettings run = run_settings_from_config(cfg);
    const double t_end = default_t_end(model, run);
    const EigenDecomposition eig = eigendecompose(model.hamiltonian);
    const Superoperator liou = model_liouvillian(model, eig);

    std::vector<double> samples(static_cast<std::size_t>(run.samples));
    for (int i = 0; i < run.samples; ++i) samples[i] = t_end * i / (run.samples - 1);
    std::vector<Observable> obs;
    if (model.observable) obs.push_back({"M", *model.observable});
    const Trajectory traj = propagate(liou, model.initial, t_end, samples, run.tol, obs);

    std::vector<std::string> header{"t"};
    if (model.observable) header.push_back("M");
    for (Index n = 0; n < eig.dim(); ++n) header.push_back("p" + std::to_string(n + 1));
    io::CsvWriter csv(header);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::vector<std::string> cells{io::format_double(traj.times[i])};
        if (model.observable) cells.push_back(io::format_double(traj.observables.at("M")[i]));
        const Matrix pe = eig.to_eigen(traj.states[i].matrix());
        for (Index n = 0; n < eig.dim(); ++n) cells.push_back(io::format_double(pe(n, n).real()));
        csv.row_cells(cells);
    }
    write(c.out("trajectory.csv"), csv.str());
    return kExitOk;
}

int cmd_bath(const Common& c) {
    const io::Config cfg = c.load();
    const SystemModel model = system_from_config(cfg);
    const NoiseChannel& ch = model.channels.front();
    const double cutoff = ch.bath.cutoff;
    const double lo = cfg.get_double("omega_min", -0.2 * cutoff);
    const double hi = cfg.get_double("omega_max", 0.2 * cutoff);
    const int points = cfg.get_int("omega_points", 401);
    if (!(hi > lo) || points < 2) throw ValidationError("bath: need omega_min < omega_max and omega_points >= 2");

    io::CsvWriter g({"omega", "g"});
    for (int i = 0; i < points; ++i) {
        const double w = lo + (hi - lo) * i / (points - 1);
        g.row(w, jump_spectral(ch.bath, w));
    }
    write(c.out("g.csv"), g.str());

    const BohrDecomposition bohr = bohr_decompose(ch.coupling, eigendecompose(model.hamiltonian));
    const FTable table = lamb_shift_table(bohr, ch.bath, model.quad);
    io::CsvWriter f({"e1", "e2", "f"});
    for (const auto& [key, value] : table.values) f.row(key.first, key.second, value);
    write(c.out("f.csv"), f.str());
    return kExitOk;
}

int cmd_sweep(const Common& c, const std::string& t_list, const std::string& g_list) {
    const io::Config cfg = c.load();
    const SystemModel model = system_from_config(cfg);
    const std::string ts = !t_list.empty() ? t_list : cfg.get_string("T_list");
    const std::string gs = !g_list.empty() ? g_list : cfg.get_string("gamma_list");
    const std::vector<double> temps = io::parse_list("T_list", ts);
    const std::vector<double> gammas = io::parse_list("gamma_list", gs);

    const SweepSystem sys{model.hamiltonian, model.channels.front().coupling, model.cutoff(),
                          model.include_lamb_shift, model.observable, model.quad};
    const std::vector<SweepCell> cells = trend_sweep(sys, temps, gammas);
    write(c.out("sweep.csv"), sweep_csv(cells));
    for (const auto& cell : cells) {
        if (!cell.error.empty()) {
            std::cerr << "cell T=" << io::format_double(cell.temperature)
                      << " gamma=" << io::format_double(cell.coupling) << ": " << cell.error << "\n";
        }
    }
    const TrendCheck trend = check_trend(cells);
    std::cout << (trend.monotone ? "trend: monotone" : "trend: not monotone") << "\n";
    for (const auto& v : trend.violations) std::cout << "  " << v << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Universal Lindblad equation toolkit"};
    app.footer(kConfigHelp);
    app.set_version_flag("--version", std::string(ule::version));
    app.require_subcommand(1);

    Common common;
    std::string t_list, g_list;
    auto* spin = app.add_subcommand("spinchain", "spin-chain relaxation: fig1a.csv, fig1b.csv, summary.json");
    auto* resid = app.add_subcommand("residual", "Gibbs-state residuals of the generator: residuals.csv");
    auto* steady = app.add_subcommand("steady", "null-space steady state and its Gibbs deviation: steady.csv");
    auto* evolve = app.add_subcommand("evolve", "trajectory from the system's initial state: trajectory.csv");
    auto* bath = app.add_subcommand("bath", "bath tables: g.csv and f.csv");
    auto* sweep = app.add_subcommand("sweep", "steady-state deviation over a T x gamma grid: sweep.csv");
    for (auto* s : {spin, resid, steady, evolve, bath, sweep}) add_common(s, common);
    sweep->add_option("--T-list", t_list, "temperatures, comma separated");
    sweep->add_option("--gamma-list", g_list, "couplings, comma separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (spin->parsed()) return cmd_spinchain(common);
        if (resid->parsed()) return cmd_residual(common);
        if (steady->parsed()) return cmd_steady(common);
        if (evolve->parsed()) return cmd_evolve(common);
        if (bath->parsed()) return cmd_bath(common);
        if (sweep->parsed()) return cmd_sweep(common, t_list, g_list);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
    return kExitOther;
}
