#pragma once

#include <functional>
#include <iosfwd>
#include <string>

#include "bpmhd/params.hpp"
#include "bpmhd/spectral.hpp"

namespace bpmhd {

/// Solver state: velocity u and magnetic field b at time t.  Both fields are
/// divergence-free, mean-zero, reality-symmetric and band-limited; the
/// stepper preserves all four properties.
struct State {
    SpectralField u;
    SpectralField b;
    double t = 0.0;
};

enum class Scheme { ImexEuler, ImexCnab2 };

struct StepperConfig {
    double dt = 1e-3;
    Scheme scheme = Scheme::ImexEuler;
    double cfl_limit = 0.5;
};

/// Suggested dt for a domain: advective CFL 0.5 at unit velocity; the stiff
/// constant-coefficient symbols are integrated implicitly and do not bind.
double default_dt(const PhysicalParams& p, const DomainSpec& dom);

/// Explicit (non-stiff) parts of the tendencies, projected:
///   du = P[ f - (u.grad)u + mu (b.grad)b + Div(Gamma(u) E(u)) ]
///   db = P[ -mu ( (u.grad)b - (b.grad)u ) ]
/// The stiff symbols (mu1/2)|k|^4 for u and S|k|^2 for b are applied
/// separately by the integrator (or added by the full-tendency accessors).
struct Tendencies {
    SpectralField du;
    SpectralField db;
    double max_abs_u = 0.0;  // collocation max |u|, reused for the CFL check
};

Tendencies explicit_tendencies(const State& s, const SpectralField& f,
                               const PhysicalParams& p);

enum class StiffPart { Include, Exclude };

/// Full (or explicit-only) projected velocity tendency.
SpectralField rhs_velocity(const State& s, const SpectralField& f, const PhysicalParams& p,
                           StiffPart stiff = StiffPart::Include);

/// Full (or explicit-only) projected magnetic tendency.
SpectralField rhs_magnetic(const State& s, const PhysicalParams& p,
                           StiffPart stiff = StiffPart::Include);

/// Collocation quadrature of Gamma(|E(u)|^2) |E(u)|^2 — the algebraic
/// dissipation term of the energy balance.
double gamma_dissipation(const SpectralField& u, const PhysicalParams& p);

/// Advances one step of dt.  ImexEuler: exact integrating factor on the
/// stiff symbols, forward Euler on the explicit terms.  ImexCnab2:
/// Crank-Nicolson on the stiff symbols, Adams-Bashforth 2 on the explicit
/// terms (Euler bootstrap on the first step).  Output is re-projected and
/// reality-enforced.  Throws on CFL violation (names the offending ratio)
/// and on NaN.
class Stepper {
public:
    Stepper(const PhysicalParams& p, StepperConfig cfg);

    State step(const State& s, const SpectralField& f);
    void reset_history();  ///< forget the AB2 history (e.g. after a resume)

    const StepperConfig& config() const { return cfg_; }
    const PhysicalParams& params() const { return params_; }

private:
    PhysicalParams params_;
    StepperConfig cfg_;
    bool have_history_ = false;
    SpectralField prev_du_, prev_db_;
};

/// One-shot convenience wrapper around Stepper.
State step(const State& s, const SpectralField& f, const PhysicalParams& p,
           const StepperConfig& cfg);

/// Observer invoked every `stride` steps (and on the initial state).
struct Observer {
    int stride = 1;
    std::function<void(const State&, long step_index)> fn;
};

/// Integrates to t_end with fixed dt; deterministic given (state, f, cfg).
/// Step errors are rethrown with the step index attached.
State integrate(State s, const SpectralField& f, const PhysicalParams& p,
                const StepperConfig& cfg, double t_end, std::vector<Observer>& observers);

// -- checkpoints ------------------------------------------------------------

/// Binary checkpoint: magic, version, dim, N, L, t, physical constants,
/// little-endian complex coefficient arrays for u then b.  Round-trips
/// bit-exactly.
void write_checkpoint(std::ostream& os, const State& s, const PhysicalParams& p);
void write_checkpoint_file(const std::string& path, const State& s, const PhysicalParams& p);

struct CheckpointData {
    State state;
    PhysicalParams params;
};

CheckpointData read_checkpoint(std::istream& is);
CheckpointData read_checkpoint_file(const std::string& path);

}  // namespace bpmhd
