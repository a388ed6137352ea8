#pragma once

#include <vector>

#include "bpmhd/dynamics.hpp"

namespace bpmhd {

/// Linearized state (velocity perturbation xi, magnetic perturbation eta)
/// propagated along a base trajectory.
struct TangentState {
    SpectralField xi;
    SpectralField eta;
    double t = 0.0;
};

/// Explicit parts of the linearized tendencies about `base` (the exact
/// Frechet derivative of the nonlinear explicit tendencies):
///   dxi  = P[ -(u.grad)xi - (xi.grad)u + mu((eta.grad)b + (b.grad)eta)
///             + Div(Gamma(u) E(xi) - alpha A(u):E(xi)) ]
///   deta = P[ -mu( (u.grad)eta + (xi.grad)b - (eta.grad)u - (b.grad)xi ) ]
/// Stiff symbols are shared with the base system.
struct TangentTendencies {
    SpectralField dxi;
    SpectralField deta;
};

TangentTendencies tangent_explicit_tendencies(const State& base, const TangentState& tan,
                                              const PhysicalParams& p);

/// Full linearized tendencies (stiff symbols included); throws on grid or
/// time mismatch between base and tangent.
TangentTendencies tangent_rhs(const State& base, const TangentState& tan,
                              const PhysicalParams& p, StiffPart stiff = StiffPart::Include);

/// Quadratic form -(L Phi, Phi) of the linearized generator at unit-norm
/// Phi = (xi, eta); nonnegative-dominated by the dissipation terms.
double minus_generator_form(const State& base, const TangentState& tan,
                            const PhysicalParams& p);

/// Advances a tangent state by one step against a frozen pre-step base,
/// with the same IMEX scheme as the base integrator.
class TangentStepper {
public:
    TangentStepper(const PhysicalParams& p, StepperConfig cfg);

    TangentState step(const State& frozen_base, const TangentState& tan);
    void reset_history();

private:
    PhysicalParams params_;
    StepperConfig cfg_;
    bool have_history_ = false;
    SpectralField prev_dxi_, prev_deta_;
};

/// Co-evolves base and tangent by one step; the tangent sees the frozen base
/// of the same substep and the base advance is bitwise identical to
/// Stepper::step.
class PairStepper {
public:
    PairStepper(const PhysicalParams& p, StepperConfig cfg);

    std::pair<State, TangentState> step(const State& base, const TangentState& tan,
                                        const SpectralField& f);
    void reset_history();

private:
    Stepper base_stepper_;
    TangentStepper tangent_stepper_;
};

std::pair<State, TangentState> step_pair(const State& base, const TangentState& tan,
                                         const SpectralField& f, const PhysicalParams& p,
                                         const StepperConfig& cfg);

/// Pair inner product (Phi, Psi) = (u, v) + (b, c) in discrete L2.
double pair_inner_product(const TangentState& a, const TangentState& b);
double pair_norm(const TangentState& a);

// -- differentiability experiment -------------------------------------------

/// One probe of the remainder r(h) = |S(T)(x0 + h d) - S(T)x0 - h L(T)d|.
struct ConsistencyEntry {
    double h = 0.0;
    double remainder = 0.0;       ///< r(h), root-sum-square pair norm
    double quotient_add = 0.0;    ///< r(h) / (h (|xi| + |eta|))
    double quotient_rss = 0.0;    ///< r(h) / (h sqrt(|xi|^2 + |eta|^2))
    bool failed = false;
    std::string error;
};

struct ConsistencyReport {
    std::vector<ConsistencyEntry> entries;
    double slope = 0.0;      ///< log-log fit of r(h) vs h over successful entries
    bool slope_valid = false;
    double dir_norm_add = 0.0;
    double dir_norm_rss = 0.0;
};

/// Evolves base0 and base0 + h*dir to time T for each h, evolves the tangent
/// once, and reports remainders and quotients.  `dir` is normalized so that
/// |xi| + |eta| = 1 before use.  Branches for distinct h run concurrently
/// when BPMHD_THREADS > 1; a failed branch yields a marked partial entry.
ConsistencyReport fd_consistency(const State& base0, const TangentState& dir,
                                 const std::vector<double>& h_list, double T,
                                 const SpectralField& f, const PhysicalParams& p,
                                 const StepperConfig& cfg);

// -- Lipschitz experiment -----------------------------------------------------

struct EnvelopePoint {
    double t = 0.0;
    double phi = 0.0;  ///< |w(t)|^2 + |m(t)|^2
};

struct EnvelopeReport {
    std::vector<EnvelopePoint> series;
    double eta1_hat = 0.0;  ///< max slope of log phi between strides
};

/// Evolves two full nonlinear trajectories from base0 and base0 + pert0 and
/// records the squared separation Phi(t); throws std::invalid_argument when
/// pert0 is zero.
EnvelopeReport lipschitz_envelope(const State& base0, const TangentState& pert0, double T,
                                  const SpectralField& f, const PhysicalParams& p,
                                  const StepperConfig& cfg, int stride = 1);

}  // namespace bpmhd
