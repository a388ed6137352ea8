#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "bpmhd/dynamics.hpp"
#include "bpmhd/tangent.hpp"

namespace bpmhd {

/// One row of the energy budget; every term is one summand of the discrete
/// energy identity d/dt [ (|u|^2+|b|^2)/2 ] = work − diss_bipolar −
/// diss_gamma − diss_mag.
struct EnergyRecord {
    double t = 0.0;
    double y = 0.0;             ///< |u|^2 + |b|^2 (L2 squared norms)
    double h2_u = 0.0;          ///< ||u||_2^2 (H2 symbol sum)
    double v2_b = 0.0;          ///< ||b||_1^2 (curl norm squared)
    double diss_bipolar = 0.0;  ///< mu1 * V1Diss(u)
    double diss_gamma = 0.0;    ///< (Gamma E, E), collocation quadrature
    double diss_mag = 0.0;      ///< S * V2Curl(b)
    double work = 0.0;          ///< (f, u)
};

EnergyRecord record_energy(const State& s, const SpectralField& f, const PhysicalParams& p);

/// CSV with a versioned header comment line; fixed column order
/// t,y,h2_u,v2_b,diss_bipolar,diss_gamma,diss_mag,work at full precision.
void write_energy_csv_header(std::ostream& os);
void write_energy_csv_row(std::ostream& os, const EnergyRecord& r);
std::vector<EnergyRecord> read_energy_csv(std::istream& is);

/// Gronwall upper envelope for y(t) = |u|^2 + |b|^2:
///   y0 exp(-rate t) + (nu1 |f|^2 / rate)(1 - exp(-rate t)),  rate = nu0 lambda1.
double gronwall_envelope(double y0, const PhysicalParams& p, const DomainConstants& c,
                         double t);

struct AbsorbingReport {
    bool absorbed = false;
    double t_enter = 0.0;          ///< first time after which y stays inside the ball
    double radius_sq = 0.0;        ///< rho1^2 from the config constants
    long envelope_violations = 0;  ///< strides with y(t) > envelope(y0, t)
    long samples = 0;
};

/// Scans an energy series for entry into the absorbing ball of radius^2
/// rho1^2 (with a tiny absolute slack for the unforced rho1 = 0 case) and
/// counts pointwise violations of the Gronwall envelope.
AbsorbingReport absorbing_check(const std::vector<EnergyRecord>& series,
                                const PhysicalParams& p, const DomainConstants& c);

// -- dimension-bound chain ---------------------------------------------------

/// delta' = 2 (2 - alpha) / (4 + alpha); in (0, 1] for alpha in [0, 1).
double delta_prime(double alpha);

/// gamma' of the trace lower bound.  For alpha in (0,1):
///   gamma' = (Kt / (delta' d)) (mu1 K delta' / (Kt (1 - delta')))^(1/(1-delta'))
/// with Kt = 2 (1 - alpha) Ct^((p-2)/p), p = 2 - alpha.  The alpha = 0 branch
/// avoids the singular exponent: gamma' = Kt / d = 2 / d.
double gamma_prime(const PhysicalParams& p, const DomainConstants& c);

/// Lambda = 4 lambda1 |f|^2 / (mu1 K); degree 2 homogeneous in |f|.
double lambda_big(const PhysicalParams& p, const DomainConstants& c);

/// Everything the attractor-dimension bound evaluates, plus the minimal
/// integer m with bracket < m.
struct DimensionBoundReport {
    double delta_prime = 0.0;
    double gamma_prime = 0.0;
    double lambda_big = 0.0;
    double nu0 = 0.0;
    double rho1_sq = 0.0;
    double kappa0 = 0.0, kappa1 = 0.0, kappa2 = 0.0, kappa3 = 0.0;
    double rho2 = 0.0;
    double bracket = 0.0;  ///< the value B with m - 1 < B^(n/(n+2))... already exponentiated
    int m_bound = 1;
    bool alpha_zero_branch = false;
    bool kappa_chain_diverged = false;  ///< exp factors overflowed; kappas reported as inf
};

/// Evaluates the full chain at window r (for the kappa block); throws
/// std::invalid_argument naming any nonpositive constant.
DimensionBoundReport dimension_bound(const PhysicalParams& p, const DomainConstants& c,
                                     int dim, double kappa_window_r = 1.0);

// -- trace / Lyapunov machinery ----------------------------------------------

struct TraceEstimate {
    int m = 0;
    double q_m = 0.0;     ///< time-averaged sum_i -(L Phi_i, Phi_i)
    long samples = 0;
    double t_span = 0.0;
    double lyap_sum = 0.0;  ///< Benettin log-volume proxy for Lambda_1+...+Lambda_m
};

struct TraceOptions {
    int m = 1;
    int reortho_stride = 10;
    double t_span = 1.0;
    uint64_t seed = 1;
    /// Optional explicit initial ensemble (pairs are orthonormalized before
    /// use); random band-limited pairs otherwise.
    std::vector<TangentState> initial_ensemble;
};

/// Advances the base trajectory with m co-evolving tangent pairs,
/// re-orthonormalizing (modified Gram-Schmidt in the pair L2 inner product)
/// every reortho_stride steps and accumulating the time average of
/// sum_i -(L Phi_i, Phi_i) at the barriers.  Throws on rank deficiency
/// (message carries the step index) and when m exceeds the pair-space
/// dimension.
TraceEstimate trace_qm(const State& base0, const SpectralField& f, const PhysicalParams& p,
                       const StepperConfig& cfg, const TraceOptions& opt);

/// Sorted list of the analytic dissipation symbols of the linearized
/// generator at the zero state (velocity: (mu1 |k|^4 + Gamma(0) |k|^2)/2,
/// magnetic: S |k|^2), with multiplicities, truncated to the dealias band.
/// Oracle for trace_qm at the zero state.
std::vector<double> zero_state_symbols(const Grid& g, const PhysicalParams& p);

/// Deterministic initial ensemble: m orthonormal single-mode pairs ordered by
/// the zero-state dissipation symbol (least-damped directions first).  At the
/// zero state these are exact invariant directions, so trace_qm reproduces
/// the symbol sums; on a general base they are a reproducible seed frame.
std::vector<TangentState> symbol_ordered_ensemble(const Grid& g, const PhysicalParams& p,
                                                  int m);

// -- long-run averages ---------------------------------------------------------

struct NormAverages {
    double avg_h2_u = 0.0;
    double avg_v2_b = 0.0;
};

/// Trapezoidal running time averages of ||u||_2^2 and ||b||_1^2 over an
/// energy series (the whole series; callers slice for windows).
NormAverages time_average_norms(const std::vector<EnergyRecord>& series);

// -- NDJSON records (one-line JSON; non-finite values serialize as null) -------

std::string to_ndjson(const DimensionBoundReport& r);
std::string to_ndjson(const TraceEstimate& r);
std::string to_ndjson(const KappaReport& r);
std::string to_ndjson(const AbsorbingReport& r);
std::string to_ndjson(const ConsistencyEntry& e);
std::string to_ndjson(const ConsistencyReport& r);  ///< summary record (slope, norms)
std::string to_ndjson(const EnvelopePoint& p);      ///< one record per time stride
std::string to_ndjson(const EnvelopeReport& r);     ///< summary record (eta1_hat)

}  // namespace bpmhd
