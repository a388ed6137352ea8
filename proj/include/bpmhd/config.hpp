#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bpmhd/analysis.hpp"
#include "bpmhd/dynamics.hpp"
#include "bpmhd/params.hpp"

namespace bpmhd {

/// Forcing specification: a steady mean-zero divergence-free field.
struct ForcingSpec {
    enum class Type { None, SingleMode, RandomBand };
    Type type = Type::None;
    double amplitude = 0.0;          ///< L2 norm of the built field
    std::array<int, 3> mode = {1, 0, 0};
    std::array<double, 3> polarization = {0.0, 1.0, 0.0};
    double phase = 0.0;
    uint64_t seed = 7;
    int band_lo = 1;
    int band_hi = 2;
};

/// Initial condition specification.
struct InitialSpec {
    enum class Type { Zero, SingleMode, RandomBand, Checkpoint };
    Type type = Type::RandomBand;
    double amplitude = 1.0;          ///< L2 norm of (u0, b0) split evenly; b share below
    double b_fraction = 0.5;         ///< fraction of amplitude^2 placed in b
    std::array<int, 3> mode = {1, 0, 0};
    std::array<double, 3> polarization = {0.0, 1.0, 0.0};
    uint64_t seed = 1;
    int band_lo = 1;
    int band_hi = 3;
    std::string checkpoint_path;
};

/// Full run configuration; mirrors the documented config-file schema with
/// sections [physics], [domain], [constants], [stepper], [forcing],
/// [initial], [output], [tangent], [trace], [kappa].
struct RunConfig {
    PhysicalParams physics;
    DomainSpec domain;
    DomainConstants constants;
    StepperConfig stepper;
    ForcingSpec forcing;
    InitialSpec initial;

    // [output]
    std::string output_dir = "out";
    int energy_stride = 1;
    int checkpoint_stride = 0;  ///< 0 = only final checkpoint
    double t_end = 1.0;

    // [tangent]
    std::vector<double> tangent_h_list = {1e-2, 1e-3, 1e-4, 1e-5};
    double tangent_T = 0.5;
    uint64_t tangent_seed = 11;
    double tangent_transient = 0.0;

    // [trace]
    int trace_m = 1;
    int trace_reortho_stride = 10;
    double trace_t_span = 1.0;
    double trace_transient = 0.0;
    uint64_t trace_seed = 3;
    bool trace_init_modes = false;  ///< seed the ensemble with symbol-ordered modes

    // [kappa]
    double kappa_r = 1.0;

    bool constants_explicit_korn = false;     ///< config supplied korn directly
    bool constants_explicit_lambda1 = false;  ///< config supplied lambda1 directly
    bool stepper_dt_explicit = false;         ///< config supplied dt directly
};

/// Parses the UTF-8 key-value config text ("[section]" lines, "key = value",
/// "#" comments).  Unknown keys throw std::invalid_argument naming the key.
RunConfig parse_config_text(const std::string& text);

/// Loads and parses a config file; throws std::runtime_error "config not
/// found: <path>" when missing.
RunConfig load_config_file(const std::string& path);

/// Applies one "section.key=value" override (the CLI --set syntax).
void apply_override(RunConfig& cfg, const std::string& dotted_assignment);

/// Auto-derivable constants (korn, lambda1, gronwall_rate_b) resolved against
/// the domain unless the config pinned them explicitly.
void finalize_constants(RunConfig& cfg);

/// Builds the forcing field (dealiased, projected, normalized to the
/// configured amplitude) and records its L2 norm into physics.f_amp.
/// Type::None returns a zero field and leaves physics.f_amp as configured.
SpectralField build_forcing(RunConfig& cfg);

/// Builds the initial state per [initial] (checkpoint type also returns the
/// stored time; other types start at t = 0).
State build_initial_state(const RunConfig& cfg);

}  // namespace bpmhd
