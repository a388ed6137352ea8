#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "bpmhd/analysis.hpp"
#include "bpmhd/config.hpp"
#include "bpmhd/dynamics.hpp"
#include "bpmhd/tangent.hpp"

namespace fs = std::filesystem;
using namespace bpmhd;

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.config_path, "run configuration file")->required();
    cmd->add_option("--set", args.overrides,
                    "override a config value, section.key=value (repeatable)");
}

RunConfig load(const CommonArgs& args) {
    RunConfig cfg = load_config_file(args.config_path);
    for (const auto& o : args.overrides) apply_override(cfg, o);
    finalize_constants(cfg);
    return cfg;
}

void require_valid(const RunConfig& cfg) {
    const ValidationReport rep = validate(cfg.physics, cfg.domain);
    if (!rep.ok()) {
        for (const auto& v : rep.violations) std::cerr << "invalid config: " << v << "\n";
        throw std::runtime_error("configuration failed validation");
    }
}

State run_transient(State s, const SpectralField& f, const RunConfig& cfg, double t_transient) {
    if (t_transient <= 0.0) return s;
    const double t_target = s.t + t_transient;
    std::vector<Observer> none;
    return integrate(std::move(s), f, cfg.physics, cfg.stepper, t_target, none);
}

int cmd_simulate(const CommonArgs& args) {
    RunConfig cfg = load(args);
    SpectralField f = build_forcing(cfg);
    require_valid(cfg);
    fs::create_directories(cfg.output_dir);

    State s = build_initial_state(cfg);
    std::ofstream csv(fs::path(cfg.output_dir) / "energy.csv");
    if (!csv) throw std::runtime_error("cannot write energy.csv in " + cfg.output_dir);
    write_energy_csv_header(csv);

    std::vector<EnergyRecord> series;
    std::vector<Observer> observers;
    observers.push_back({cfg.energy_stride, [&](const State& st, long) {
                             const EnergyRecord r = record_energy(st, f, cfg.physics);
                             series.push_back(r);
                             write_energy_csv_row(csv, r);
                         }});
    if (cfg.checkpoint_stride > 0) {
        observers.push_back({cfg.checkpoint_stride, [&](const State& st, long i) {
                                 const fs::path p = fs::path(cfg.output_dir) /
                                                    ("ckpt_" + std::to_string(i) + ".bin");
                                 write_checkpoint_file(p.string(), st, cfg.physics);
                             }});
    }

    s = integrate(std::move(s), f, cfg.physics, cfg.stepper, cfg.t_end, observers);
    write_checkpoint_file((fs::path(cfg.output_dir) / "final.ckpt").string(), s, cfg.physics);

    const AbsorbingReport rep = absorbing_check(series, cfg.physics, cfg.constants);
    {
        std::ofstream nd(fs::path(cfg.output_dir) / "absorbing.ndjson");
        nd << to_ndjson(rep) << "\n";
    }
    std::cout << "simulate: " << series.size() << " energy records to " << cfg.output_dir
              << "/energy.csv\n";
    std::cout << "absorbing ball radius^2 = " << rep.radius_sq
              << (rep.absorbed ? " entered at t = " + std::to_string(rep.t_enter)
                               : " not yet absorbed")
              << ", envelope violations = " << rep.envelope_violations << "\n";
    return 0;
}

int cmd_bound(const CommonArgs& args) {
    RunConfig cfg = load(args);
    require_valid(cfg);
    const DimensionBoundReport r =
        dimension_bound(cfg.physics, cfg.constants, cfg.domain.dim, cfg.kappa_r);
    std::cout << to_ndjson(r) << "\n";
    std::cout << "attractor dimension bound\n"
              << "  branch        : " << (r.alpha_zero_branch ? "alpha-zero" : "general") << "\n"
              << "  delta'        : " << r.delta_prime << "\n"
              << "  gamma'        : " << r.gamma_prime << "\n"
              << "  Lambda        : " << r.lambda_big << "\n"
              << "  nu0           : " << r.nu0 << "\n"
              << "  rho1^2        : " << r.rho1_sq << "\n"
              << "  kappa0..3     : " << r.kappa0 << ", " << r.kappa1 << ", " << r.kappa2
              << ", " << r.kappa3 << (r.kappa_chain_diverged ? " (chain diverged)" : "") << "\n"
              << "  rho2          : " << r.rho2 << "\n"
              << "  bracket       : " << r.bracket << "\n"
              << "  m_bound       : " << r.m_bound << "\n";
    return 0;
}

int cmd_tangent(const CommonArgs& args) {
    RunConfig cfg = load(args);
    SpectralField f = build_forcing(cfg);
    require_valid(cfg);
    if (cfg.tangent_h_list.empty()) throw std::runtime_error("tangent: empty h_list");

    State base = build_initial_state(cfg);
    base = run_transient(std::move(base), f, cfg, cfg.tangent_transient);

    const Grid g(cfg.domain);
    TangentState dir;
    dir.t = base.t;
    dir.xi = random_band_field(g, cfg.tangent_seed * 2, 1, 3, 1.0);
    dir.eta = random_band_field(g, cfg.tangent_seed * 2 + 1, 1, 3, 1.0);

    const ConsistencyReport rep =
        fd_consistency(base, dir, cfg.tangent_h_list, base.t + cfg.tangent_T, f, cfg.physics,
                       cfg.stepper);
    for (const auto& e : rep.entries) std::cout << to_ndjson(e) << "\n";
    std::cout << to_ndjson(rep) << "\n";
    if (rep.entries.size() < 2)
        std::cerr << "warning: single h probe, no slope fit\n";
    else if (rep.slope_valid)
        std::cout << "remainder order in h: " << rep.slope << "\n";
    return 0;
}

int cmd_lyapunov(const CommonArgs& args) {
    RunConfig cfg = load(args);
    SpectralField f = build_forcing(cfg);
    require_valid(cfg);

    State base = build_initial_state(cfg);
    base = run_transient(std::move(base), f, cfg, cfg.trace_transient);

    TraceOptions opt;
    opt.m = cfg.trace_m;
    opt.reortho_stride = cfg.trace_reortho_stride;
    opt.t_span = cfg.trace_t_span;
    opt.seed = cfg.trace_seed;
    if (cfg.trace_init_modes)
        opt.initial_ensemble = symbol_ordered_ensemble(Grid(cfg.domain), cfg.physics, opt.m);

    const TraceEstimate est = trace_qm(base, f, cfg.physics, cfg.stepper, opt);
    std::cout << to_ndjson(est) << "\n";

    // analytic components of the trace lower bound at this m
    const double gp = gamma_prime(cfg.physics, cfg.constants);
    const double lb = lambda_big(cfg.physics, cfg.constants);
    const double n = cfg.domain.dim;
    const double decay = 0.5 * gp * cfg.constants.stokes_c * cfg.constants.lambda1 *
                         std::pow(static_cast<double>(est.m), 1.0 + 2.0 / n);
    const double forcing = (cfg.constants.embed * cfg.constants.embed *
                                (1.0 / cfg.physics.s_diff + 2.0 * cfg.physics.mu * cfg.physics.mu / gp) +
                            8.0 * cfg.physics.mu * cfg.physics.mu / cfg.physics.s_diff) *
                           lb / (cfg.physics.mu1 * cfg.constants.korn);
    std::cout << "numeric q_m = " << est.q_m
              << " (single-trajectory finite-time average; lyap_sum proxy " << est.lyap_sum
              << ") vs analytic bound components: decay term " << decay << ", forcing term "
              << forcing << " (-q_m <= forcing - decay = " << forcing - decay << ")\n";
    return 0;
}

int cmd_kappa(const CommonArgs& args) {
    RunConfig cfg = load(args);
    require_valid(cfg);
    const KappaReport k = kappa_chain(cfg.physics, cfg.constants, cfg.kappa_r);
    std::cout << to_ndjson(k) << "\n";
    std::cout << "kappa chain at r = " << k.r << "\n"
              << "  kappa0 = " << k.kappa0 << "\n"
              << "  kappa1 = " << k.kappa1 << "\n"
              << "  kappa2 = " << k.kappa2 << "\n"
              << "  kappa3 = " << k.kappa3 << "\n"
              << "  rho2   = " << k.rho2 << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pseudo-spectral shear-thinning MHD simulator and attractor analysis"};
    app.require_subcommand(1);

    CommonArgs sim_args, bound_args, tan_args, lyap_args, kappa_args;
    auto* sim = app.add_subcommand("simulate", "integrate the flow, emit energy CSV and checkpoints");
    add_common(sim, sim_args);
    auto* bound = app.add_subcommand("bound", "evaluate the attractor dimension bound");
    add_common(bound, bound_args);
    auto* tan = app.add_subcommand("tangent", "finite-difference differentiability experiment");
    add_common(tan, tan_args);
    auto* lyap = app.add_subcommand("lyapunov", "trace estimate with an orthonormal tangent ensemble");
    add_common(lyap, lyap_args);
    auto* kappa = app.add_subcommand("kappa", "evaluate the sliding-window estimate chain");
    add_common(kappa, kappa_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (bound->parsed()) return cmd_bound(bound_args);
        if (tan->parsed()) return cmd_tangent(tan_args);
        if (lyap->parsed()) return cmd_lyapunov(lyap_args);
        if (kappa->parsed()) return cmd_kappa(kappa_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
