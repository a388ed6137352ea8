#include "bpmhd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bpmhd {

EnergyRecord record_energy(const State& s, const SpectralField& f, const PhysicalParams& p) {
    EnergyRecord r;
    r.t = s.t;
    r.y = sobolev_norm_sq(s.u, NormKind::L2) + sobolev_norm_sq(s.b, NormKind::L2);
    r.h2_u = sobolev_norm_sq(s.u, NormKind::H2);
    r.v2_b = sobolev_norm_sq(s.b, NormKind::V2Curl);
    r.diss_bipolar = p.mu1 * sobolev_norm_sq(s.u, NormKind::V1Diss);
    r.diss_gamma = gamma_dissipation(s.u, p);
    r.diss_mag = p.s_diff * r.v2_b;
    r.work = inner_product_l2(f, s.u);
    return r;
}

void write_energy_csv_header(std::ostream& os) {
    os << "# bpmhd-energy-v1\n";
    os << "t,y,h2_u,v2_b,diss_bipolar,diss_gamma,diss_mag,work\n";
}

void write_energy_csv_row(std::ostream& os, const EnergyRecord& r) {
    char buf[320];
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.y, r.h2_u,
                  r.v2_b, r.diss_bipolar, r.diss_gamma, r.diss_mag, r.work);
    os << buf;
}

std::vector<EnergyRecord> read_energy_csv(std::istream& is) {
    std::vector<EnergyRecord> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 't') continue;
        EnergyRecord r;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r.t, &r.y, &r.h2_u,
                        &r.v2_b, &r.diss_bipolar, &r.diss_gamma, &r.diss_mag, &r.work) == 8)
            out.push_back(r);
    }
    return out;
}

double gronwall_envelope(double y0, const PhysicalParams& p, const DomainConstants& c,
                         double t) {
    const double rate = nu0(p, c) * c.lambda1;
    const double source = nu1(p, c) * p.f_amp * p.f_amp;
    const double e = std::exp(-rate * t);
    return y0 * e + (source / rate) * (1.0 - e);
}

AbsorbingReport absorbing_check(const std::vector<EnergyRecord>& series,
                                const PhysicalParams& p, const DomainConstants& c) {
    if (series.empty()) throw std::invalid_argument("absorbing_check: empty series");
    AbsorbingReport rep;
    rep.radius_sq = absorbing_radius_sq(p, c);
    rep.samples = static_cast<long>(series.size());
    const double y0 = series.front().y;
    const double t0 = series.front().t;
    const double tol = 1e-12 * std::max(y0, 1.0);

    // first index after which y stays inside the ball
    long last_outside = -1;
    for (long i = 0; i < rep.samples; ++i)
        if (series[static_cast<size_t>(i)].y > rep.radius_sq + tol) last_outside = i;
    if (last_outside + 1 < rep.samples) {
        rep.absorbed = true;
        rep.t_enter = series[static_cast<size_t>(last_outside + 1)].t;
    }

    for (const auto& r : series) {
        const double env = gronwall_envelope(y0, p, c, r.t - t0);
        if (r.y > env + tol) ++rep.envelope_violations;
    }
    return rep;
}

// -- dimension-bound chain ------------------------------------------------------

double delta_prime(double alpha) { return 2.0 * (2.0 - alpha) / (4.0 + alpha); }

double gamma_prime(const PhysicalParams& p, const DomainConstants& c) {
    const double alpha = p.alpha;
    if (alpha == 0.0) return 2.0 / c.d_const;  // Kt = 2 (1-0) Ct^0 = 2
    const double dp = delta_prime(alpha);
    const double pp = 2.0 - alpha;
    const double kt = 2.0 * (1.0 - alpha) * std::pow(c.c_tilde, (pp - 2.0) / pp);
    const double base = p.mu1 * c.korn * dp / (kt * (1.0 - dp));
    return (kt / (dp * c.d_const)) * std::pow(base, 1.0 / (1.0 - dp));
}

double lambda_big(const PhysicalParams& p, const DomainConstants& c) {
    return 4.0 * c.lambda1 * p.f_amp * p.f_amp / (p.mu1 * c.korn);
}

DimensionBoundReport dimension_bound(const PhysicalParams& p, const DomainConstants& c,
                                     int dim, double kappa_window_r) {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) throw std::invalid_argument(std::string("nonpositive constant: ") + name);
    };
    positive(p.eps, "eps");
    positive(p.mu0, "mu0");
    positive(p.mu1, "mu1");
    positive(p.mu, "mu");
    positive(p.s_diff, "s_diff");
    positive(c.korn, "korn");
    positive(c.embed, "embed");
    positive(c.d_const, "d_const");
    positive(c.stokes_c, "stokes_c");
    positive(c.lambda1, "lambda1");
    positive(c.c_tilde, "c_tilde");
    if (p.f_amp < 0.0) throw std::invalid_argument("nonpositive constant: f_amp");
    if (dim != 2 && dim != 3) throw std::invalid_argument("dimension_bound: dim must be 2 or 3");

    DimensionBoundReport r;
    r.delta_prime = delta_prime(p.alpha);
    r.alpha_zero_branch = (p.alpha == 0.0);
    r.gamma_prime = gamma_prime(p, c);
    r.lambda_big = lambda_big(p, c);
    r.nu0 = nu0(p, c);
    r.rho1_sq = absorbing_radius_sq(p, c);

    try {
        const KappaReport k = kappa_chain(p, c, kappa_window_r);
        r.kappa0 = k.kappa0;
        r.kappa1 = k.kappa1;
        r.kappa2 = k.kappa2;
        r.kappa3 = k.kappa3;
        r.rho2 = k.rho2;
    } catch (const std::overflow_error&) {
        r.kappa_chain_diverged = true;
        const double inf = std::numeric_limits<double>::infinity();
        r.kappa0 = (r.rho1_sq + 2.0 * p.f_amp * std::sqrt(r.rho1_sq) * kappa_window_r) /
                   (2.0 * r.nu0);
        r.kappa1 = inf;
        r.kappa2 = inf;
        r.kappa3 = inf;
        r.rho2 = inf;
    }

    const double inner = (2.0 * r.lambda_big /
                          (r.gamma_prime * c.stokes_c * c.lambda1 * p.mu1 * c.korn)) *
                         (c.embed * c.embed * (1.0 / p.s_diff + 2.0 * p.mu * p.mu / r.gamma_prime) +
                          8.0 * p.mu * p.mu / p.s_diff);
    r.bracket = std::pow(inner, static_cast<double>(dim) / (dim + 2));
    r.m_bound = static_cast<int>(std::floor(r.bracket)) + 1;  // smallest integer > bracket
    return r;
}

// -- trace / Lyapunov machinery ---------------------------------------------------

namespace {

/// Modified Gram-Schmidt in the pair inner product; returns the diagonal
/// norms (growth factors since the previous orthonormalization).
std::vector<double> orthonormalize(std::vector<TangentState>& ens, long step_index) {
    std::vector<double> diag;
    diag.reserve(ens.size());
    for (size_t i = 0; i < ens.size(); ++i) {
        for (size_t j = 0; j < i; ++j) {
            const double c = pair_inner_product(ens[i], ens[j]);
            for (size_t k = 0; k < ens[i].xi.data.size(); ++k)
                ens[i].xi.data[k] -= c * ens[j].xi.data[k];
            for (size_t k = 0; k < ens[i].eta.data.size(); ++k)
                ens[i].eta.data[k] -= c * ens[j].eta.data[k];
        }
        const double r = pair_norm(ens[i]);
        if (!(r > 1e-150)) {
            std::ostringstream msg;
            msg << "rank deficiency in tangent ensemble (member " << i << ", step "
                << step_index << ")";
            throw std::runtime_error(msg.str());
        }
        const double inv = 1.0 / r;
        ens[i].xi *= inv;
        ens[i].eta *= inv;
        diag.push_back(r);
    }
    return diag;
}

int band_for_dimension(const Grid& g, int m) {
    // smallest band [1, hi] whose divergence-free pair space holds m members
    for (int hi = 2; hi <= g.dealias_kmax(); ++hi) {
        long count = 0;
        for (size_t idx = 0; idx < g.n_modes(); ++idx) {
            auto mv = g.wavevector(idx);
            long m2 = 0;
            bool in_band_axes = true;
            for (int d = 0; d < g.dim(); ++d) {
                m2 += static_cast<long>(mv[d]) * mv[d];
                if (std::abs(mv[d]) > g.dealias_kmax()) in_band_axes = false;
            }
            if (in_band_axes && m2 >= 1 && m2 <= static_cast<long>(hi) * hi) ++count;
        }
        if (count * (g.dim() - 1) * 2 >= m) return hi;  // both fields populated
    }
    return g.dealias_kmax();
}

}  // namespace

TraceEstimate trace_qm(const State& base0, const SpectralField& f, const PhysicalParams& p,
                       const StepperConfig& cfg, const TraceOptions& opt) {
    if (opt.m < 1) throw std::invalid_argument("trace_qm: m must be >= 1");
    const Grid& g = base0.u.grid;
    if (static_cast<size_t>(opt.m) > divfree_pair_dimension(g))
        throw std::invalid_argument("ensemble larger than space");
    if (opt.reortho_stride < 1)
        throw std::invalid_argument("trace_qm: reortho_stride must be >= 1");

    std::vector<TangentState> ens;
    if (!opt.initial_ensemble.empty()) {
        if (opt.initial_ensemble.size() != static_cast<size_t>(opt.m))
            throw std::invalid_argument("trace_qm: initial ensemble size != m");
        ens = opt.initial_ensemble;
        for (auto& e : ens) e.t = base0.t;
    } else {
        const int hi = band_for_dimension(g, opt.m);
        for (int i = 0; i < opt.m; ++i) {
            TangentState ts;
            ts.t = base0.t;
            ts.xi = random_band_field(g, opt.seed * 1000 + 2 * static_cast<uint64_t>(i), 1, hi, 1.0);
            ts.eta =
                random_band_field(g, opt.seed * 1000 + 2 * static_cast<uint64_t>(i) + 1, 1, hi, 1.0);
            ens.push_back(std::move(ts));
        }
    }

    Stepper base_stepper(p, cfg);
    std::vector<TangentStepper> tan_steppers(static_cast<size_t>(opt.m),
                                             TangentStepper(p, cfg));

    State base = base0;
    const long n_steps = std::max<long>(1, std::lround(opt.t_span / cfg.dt));

    orthonormalize(ens, 0);
    auto form_sum = [&](const State& b) {
        double s = 0.0;
        for (const auto& e : ens) s += minus_generator_form(b, e, p);
        return s;
    };

    TraceEstimate est;
    est.m = opt.m;
    double q_prev = form_sum(base);
    double t_prev = 0.0;
    double integral = 0.0;
    double log_sum = 0.0;
    est.samples = 1;

    for (long i = 1; i <= n_steps; ++i) {
        for (int k = 0; k < opt.m; ++k)
            ens[static_cast<size_t>(k)] = tan_steppers[static_cast<size_t>(k)].step(
                base, ens[static_cast<size_t>(k)]);
        base = base_stepper.step(base, f);

        if (i % opt.reortho_stride == 0 || i == n_steps) {
            const auto diag = orthonormalize(ens, i);
            for (double d : diag) log_sum += std::log(d);
            const double t_now = static_cast<double>(i) * cfg.dt;
            const double q_now = form_sum(base);
            integral += 0.5 * (q_prev + q_now) * (t_now - t_prev);
            q_prev = q_now;
            t_prev = t_now;
            ++est.samples;
        }
    }

    est.t_span = t_prev;
    est.q_m = t_prev > 0.0 ? integral / t_prev : q_prev;
    est.lyap_sum = t_prev > 0.0 ? log_sum / t_prev : 0.0;
    return est;
}

std::vector<double> zero_state_symbols(const Grid& g, const PhysicalParams& p) {
    const double gamma0 = p.mu0 * std::pow(p.eps, -p.alpha / 2.0);
    const double ku2 = g.k_unit() * g.k_unit();
    const int kmax = g.dealias_kmax();
    std::vector<double> symbols;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        const size_t cdx = g.conjugate_index(idx);
        if (cdx <= idx) continue;  // one entry per +-k pair
        auto m = g.wavevector(idx);
        double m2 = 0.0;
        bool keep = true;
        for (int d = 0; d < g.dim(); ++d) {
            if (std::abs(m[d]) > kmax) keep = false;
            m2 += static_cast<double>(m[d]) * m[d];
        }
        if (!keep || m2 == 0.0) continue;
        const double k2 = ku2 * m2;
        const double vel = 0.5 * (p.mu1 * k2 * k2 + gamma0 * k2);
        const double mag = p.s_diff * k2;
        // each pair carries 2*(dim-1) real directions per field
        for (int c = 0; c < 2 * (g.dim() - 1); ++c) {
            symbols.push_back(vel);
            symbols.push_back(mag);
        }
    }
    std::sort(symbols.begin(), symbols.end());
    return symbols;
}

std::vector<TangentState> symbol_ordered_ensemble(const Grid& g, const PhysicalParams& p,
                                                  int m) {
    struct Dir {
        double symbol;
        bool magnetic;
        std::array<int, 3> mode;
        int pol_index;  // polarization slot (3D has two), doubled by cos/sin phase
        double phase;
    };
    const double gamma0 = p.mu0 * std::pow(p.eps, -p.alpha / 2.0);
    const double ku2 = g.k_unit() * g.k_unit();
    std::vector<Dir> dirs;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        const size_t cdx = g.conjugate_index(idx);
        if (cdx <= idx) continue;
        auto mv = g.wavevector(idx);
        double m2 = 0.0;
        bool keep = true;
        for (int d = 0; d < g.dim(); ++d) {
            if (std::abs(mv[d]) > g.dealias_kmax()) keep = false;
            m2 += static_cast<double>(mv[d]) * mv[d];
        }
        if (!keep || m2 == 0.0) continue;
        const double k2 = ku2 * m2;
        for (int pol = 0; pol < g.dim() - 1; ++pol)
            for (double phase : {0.0, -1.5707963267948966}) {
                dirs.push_back({0.5 * (p.mu1 * k2 * k2 + gamma0 * k2), false, mv, pol, phase});
                dirs.push_back({p.s_diff * k2, true, mv, pol, phase});
            }
    }
    std::stable_sort(dirs.begin(), dirs.end(),
                     [](const Dir& a, const Dir& b) { return a.symbol < b.symbol; });
    if (static_cast<size_t>(m) > dirs.size())
        throw std::invalid_argument("ensemble larger than space");

    auto polarization = [&](const std::array<int, 3>& mode, int pol) -> std::array<double, 3> {
        if (g.dim() == 2)
            return {-static_cast<double>(mode[1]), static_cast<double>(mode[0]), 0.0};
        // 3D: two directions spanning the plane orthogonal to the mode
        std::array<double, 3> a{-static_cast<double>(mode[1]), static_cast<double>(mode[0]),
                                0.0};
        if (mode[0] == 0 && mode[1] == 0) a = {1.0, 0.0, 0.0};
        if (pol == 0) return a;
        // second leg: mode x a
        return {static_cast<double>(mode[1]) * a[2] - mode[2] * a[1],
                static_cast<double>(mode[2]) * a[0] - mode[0] * a[2],
                static_cast<double>(mode[0]) * a[1] - mode[1] * a[0]};
    };

    std::vector<TangentState> ens;
    ens.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        const Dir& d = dirs[static_cast<size_t>(i)];
        TangentState t;
        SpectralField mode_field =
            single_mode_field(g, d.mode, polarization(d.mode, d.pol_index), 1.0, d.phase);
        const double nrm = std::sqrt(sobolev_norm_sq(mode_field, NormKind::L2));
        if (nrm > 0.0) mode_field *= 1.0 / nrm;
        if (d.magnetic) {
            t.xi = zero_vector_field(g);
            t.eta = std::move(mode_field);
        } else {
            t.xi = std::move(mode_field);
            t.eta = zero_vector_field(g);
        }
        ens.push_back(std::move(t));
    }
    return ens;
}

NormAverages time_average_norms(const std::vector<EnergyRecord>& series) {
    if (series.empty()) throw std::invalid_argument("time_average_norms: empty series");
    if (series.size() == 1) return {series[0].h2_u, series[0].v2_b};
    double span = series.back().t - series.front().t;
    if (span <= 0.0) return {series.back().h2_u, series.back().v2_b};
    double ih = 0.0, iv = 0.0;
    for (size_t i = 1; i < series.size(); ++i) {
        const double dt = series[i].t - series[i - 1].t;
        ih += 0.5 * (series[i].h2_u + series[i - 1].h2_u) * dt;
        iv += 0.5 * (series[i].v2_b + series[i - 1].v2_b) * dt;
    }
    return {ih / span, iv / span};
}

// -- NDJSON -------------------------------------------------------------------

namespace {
nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}
}  // namespace

std::string to_ndjson(const DimensionBoundReport& r) {
    nlohmann::json j{{"record", "dimension_bound"},
                     {"delta_prime", r.delta_prime},
                     {"gamma_prime", finite_or_null(r.gamma_prime)},
                     {"lambda_big", r.lambda_big},
                     {"nu0", r.nu0},
                     {"rho1_sq", r.rho1_sq},
                     {"kappa0", finite_or_null(r.kappa0)},
                     {"kappa1", finite_or_null(r.kappa1)},
                     {"kappa2", finite_or_null(r.kappa2)},
                     {"kappa3", finite_or_null(r.kappa3)},
                     {"rho2", finite_or_null(r.rho2)},
                     {"bracket", r.bracket},
                     {"m_bound", r.m_bound},
                     {"alpha_zero_branch", r.alpha_zero_branch},
                     {"kappa_chain_diverged", r.kappa_chain_diverged}};
    return j.dump();
}

std::string to_ndjson(const TraceEstimate& r) {
    nlohmann::json j{{"record", "trace_estimate"},
                     {"m", r.m},
                     {"q_m", finite_or_null(r.q_m)},
                     {"samples", r.samples},
                     {"t_span", r.t_span},
                     {"lyap_sum", finite_or_null(r.lyap_sum)}};
    return j.dump();
}

std::string to_ndjson(const KappaReport& r) {
    nlohmann::json j{{"record", "kappa_chain"},
                     {"r", r.r},
                     {"kappa0", finite_or_null(r.kappa0)},
                     {"kappa1", finite_or_null(r.kappa1)},
                     {"kappa2", finite_or_null(r.kappa2)},
                     {"kappa3", finite_or_null(r.kappa3)},
                     {"rho2", finite_or_null(r.rho2)}};
    return j.dump();
}

std::string to_ndjson(const AbsorbingReport& r) {
    nlohmann::json j{{"record", "absorbing"},
                     {"absorbed", r.absorbed},
                     {"t_enter", r.t_enter},
                     {"radius_sq", r.radius_sq},
                     {"envelope_violations", r.envelope_violations},
                     {"samples", r.samples}};
    return j.dump();
}

std::string to_ndjson(const ConsistencyEntry& e) {
    nlohmann::json j{{"record", "fd_probe"},
                     {"h", e.h},
                     {"remainder", finite_or_null(e.remainder)},
                     {"quotient_add", finite_or_null(e.quotient_add)},
                     {"quotient_rss", finite_or_null(e.quotient_rss)},
                     {"failed", e.failed}};
    if (e.failed) j["error"] = e.error;
    return j.dump();
}

std::string to_ndjson(const ConsistencyReport& r) {
    nlohmann::json j{{"record", "fd_summary"},
                     {"slope", finite_or_null(r.slope)},
                     {"slope_valid", r.slope_valid},
                     {"dir_norm_add", r.dir_norm_add},
                     {"dir_norm_rss", r.dir_norm_rss},
                     {"probes", r.entries.size()}};
    return j.dump();
}

std::string to_ndjson(const EnvelopePoint& p) {
    nlohmann::json j{{"record", "lipschitz_point"}, {"t", p.t}, {"phi", finite_or_null(p.phi)}};
    return j.dump();
}

std::string to_ndjson(const EnvelopeReport& r) {
    nlohmann::json j{{"record", "lipschitz_envelope"},
                     {"eta1_hat", finite_or_null(r.eta1_hat)},
                     {"samples", r.series.size()},
                     {"phi0", r.series.empty() ? 0.0 : r.series.front().phi},
                     {"phi_end", r.series.empty() ? 0.0 : r.series.back().phi}};
    return j.dump();
}

}  // namespace bpmhd
