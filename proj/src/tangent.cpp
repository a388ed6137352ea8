#include "bpmhd/tangent.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stress_detail.hpp"

namespace bpmhd {

namespace {

void finalize(SpectralField& v) {
    leray_project_inplace(v);
    enforce_reality_inplace(v);
}

void check_pair(const State& base, const TangentState& tan) {
    if (!(base.u.grid == tan.xi.grid))
        throw std::invalid_argument("tangent: base and tangent grids differ");
    if (std::abs(base.t - tan.t) > 1e-12 * (1.0 + std::abs(base.t)))
        throw std::invalid_argument("tangent: base and tangent times differ");
}

double l2_norm(const SpectralField& v) { return std::sqrt(sobolev_norm_sq(v, NormKind::L2)); }

}  // namespace

TangentTendencies tangent_explicit_tendencies(const State& base, const TangentState& tan,
                                              const PhysicalParams& p) {
    const SpectralField& u = base.u;
    const SpectralField& b = base.b;
    const SpectralField& xi = tan.xi;
    const SpectralField& eta = tan.eta;

    SpectralField dxi = detail::linearized_stress_divergence(u, xi, p);
    dxi -= advect(u, xi);
    dxi -= advect(xi, u);
    SpectralField lor = advect(eta, b);
    lor += advect(b, eta);
    lor *= p.mu;
    dxi += lor;
    finalize(dxi);

    SpectralField deta = advect(eta, u);
    deta += advect(b, xi);
    deta -= advect(u, eta);
    deta -= advect(xi, b);
    deta *= p.mu;
    finalize(deta);

    return TangentTendencies{std::move(dxi), std::move(deta)};
}

TangentTendencies tangent_rhs(const State& base, const TangentState& tan,
                              const PhysicalParams& p, StiffPart stiff) {
    check_pair(base, tan);
    TangentTendencies t = tangent_explicit_tendencies(base, tan, p);
    if (stiff == StiffPart::Include) {
        const detail::StiffSymbols sym(base.u.grid, p);
        const size_t nm = base.u.grid.n_modes();
        for (int c = 0; c < t.dxi.n_comp; ++c)
            for (size_t idx = 0; idx < nm; ++idx) {
                t.dxi.at(c, idx) -= sym.lam_u[idx] * tan.xi.at(c, idx);
                t.deta.at(c, idx) -= sym.lam_b[idx] * tan.eta.at(c, idx);
            }
    }
    return t;
}

double minus_generator_form(const State& base, const TangentState& tan,
                            const PhysicalParams& p) {
    TangentTendencies t = tangent_rhs(base, tan, p, StiffPart::Include);
    return -(inner_product_l2(t.dxi, tan.xi) + inner_product_l2(t.deta, tan.eta));
}

TangentStepper::TangentStepper(const PhysicalParams& p, StepperConfig cfg)
    : params_(p), cfg_(cfg) {
    if (!(cfg_.dt > 0.0)) throw std::invalid_argument("TangentStepper: dt must be > 0");
}

void TangentStepper::reset_history() { have_history_ = false; }

TangentState TangentStepper::step(const State& base, const TangentState& tan) {
    check_pair(base, tan);
    const Grid& g = base.u.grid;
    const double dt = cfg_.dt;
    TangentTendencies ten = tangent_explicit_tendencies(base, tan, params_);

    const detail::StiffSymbols sym(g, params_);
    TangentState out;
    out.t = tan.t + dt;
    const size_t nm = g.n_modes();

    if (cfg_.scheme == Scheme::ImexEuler) {
        SpectralField xi = tan.xi;
        SpectralField eta = tan.eta;
        for (size_t i = 0; i < xi.data.size(); ++i) xi.data[i] += dt * ten.dxi.data[i];
        for (size_t i = 0; i < eta.data.size(); ++i) eta.data[i] += dt * ten.deta.data[i];
        for (int c = 0; c < xi.n_comp; ++c)
            for (size_t idx = 0; idx < nm; ++idx) {
                xi.at(c, idx) *= std::exp(-sym.lam_u[idx] * dt);
                eta.at(c, idx) *= std::exp(-sym.lam_b[idx] * dt);
            }
        out.xi = std::move(xi);
        out.eta = std::move(eta);
    } else {
        const double w0 = have_history_ ? 1.5 : 1.0;
        const double w1 = have_history_ ? -0.5 : 0.0;
        SpectralField xi = tan.xi;
        SpectralField eta = tan.eta;
        for (int c = 0; c < xi.n_comp; ++c) {
            for (size_t idx = 0; idx < nm; ++idx) {
                const cplx dxi1 = have_history_ ? prev_dxi_.at(c, idx) : ten.dxi.at(c, idx);
                const cplx deta1 = have_history_ ? prev_deta_.at(c, idx) : ten.deta.at(c, idx);
                const double zu = 0.5 * dt * sym.lam_u[idx];
                xi.at(c, idx) = ((1.0 - zu) * tan.xi.at(c, idx) +
                                 dt * (w0 * ten.dxi.at(c, idx) + w1 * dxi1)) /
                                (1.0 + zu);
                const double zb = 0.5 * dt * sym.lam_b[idx];
                eta.at(c, idx) = ((1.0 - zb) * tan.eta.at(c, idx) +
                                  dt * (w0 * ten.deta.at(c, idx) + w1 * deta1)) /
                                 (1.0 + zb);
            }
        }
        prev_dxi_ = std::move(ten.dxi);
        prev_deta_ = std::move(ten.deta);
        have_history_ = true;
        out.xi = std::move(xi);
        out.eta = std::move(eta);
    }

    finalize(out.xi);
    finalize(out.eta);
    if (has_nan(out.xi) || has_nan(out.eta))
        throw std::runtime_error("NaN detected in tangent state");
    return out;
}

PairStepper::PairStepper(const PhysicalParams& p, StepperConfig cfg)
    : base_stepper_(p, cfg), tangent_stepper_(p, cfg) {}

void PairStepper::reset_history() {
    base_stepper_.reset_history();
    tangent_stepper_.reset_history();
}

std::pair<State, TangentState> PairStepper::step(const State& base, const TangentState& tan,
                                                 const SpectralField& f) {
    // tangent first, against the frozen pre-step base
    TangentState tan_next = tangent_stepper_.step(base, tan);
    State base_next = base_stepper_.step(base, f);
    return {std::move(base_next), std::move(tan_next)};
}

std::pair<State, TangentState> step_pair(const State& base, const TangentState& tan,
                                         const SpectralField& f, const PhysicalParams& p,
                                         const StepperConfig& cfg) {
    PairStepper ps(p, cfg);
    return ps.step(base, tan, f);
}

// -- differentiability experiment ---------------------------------------------

namespace {

long step_count(double t0, double T, double dt) {
    if (T <= t0) return 0;
    return static_cast<long>(std::ceil((T - t0) / dt - 1e-9));
}

State evolve_state(State s, const SpectralField& f, const PhysicalParams& p,
                   const StepperConfig& cfg, double T) {
    Stepper st(p, cfg);
    const long n = step_count(s.t, T, cfg.dt);
    for (long i = 0; i < n; ++i) s = st.step(s, f);
    return s;
}

}  // namespace

ConsistencyReport fd_consistency(const State& base0, const TangentState& dir,
                                 const std::vector<double>& h_list, double T,
                                 const SpectralField& f, const PhysicalParams& p,
                                 const StepperConfig& cfg) {
    ConsistencyReport rep;
    const double nxi = l2_norm(dir.xi);
    const double neta = l2_norm(dir.eta);
    const double add_norm = nxi + neta;
    if (add_norm <= 0.0) throw std::invalid_argument("fd_consistency: zero direction");
    TangentState d;
    d.t = base0.t;
    d.xi = (1.0 / add_norm) * dir.xi;
    d.eta = (1.0 / add_norm) * dir.eta;
    rep.dir_norm_add = 1.0;
    rep.dir_norm_rss = std::sqrt(std::pow(nxi / add_norm, 2) + std::pow(neta / add_norm, 2));

    // shared base + tangent evolution
    State baseT = base0;
    TangentState tanT = d;
    {
        PairStepper ps(p, cfg);
        const long n = step_count(base0.t, T, cfg.dt);
        for (long i = 0; i < n; ++i) {
            auto [b2, t2] = ps.step(baseT, tanT, f);
            baseT = std::move(b2);
            tanT = std::move(t2);
        }
    }

    auto run_branch = [&](double h) {
        ConsistencyEntry e;
        e.h = h;
        try {
            State pert = base0;
            pert.u += h * d.xi;
            pert.b += h * d.eta;
            const State pertT = evolve_state(pert, f, p, cfg, T);
            SpectralField ru = pertT.u;
            ru -= baseT.u;
            SpectralField rb = pertT.b;
            rb -= baseT.b;
            for (size_t i = 0; i < ru.data.size(); ++i) ru.data[i] -= h * tanT.xi.data[i];
            for (size_t i = 0; i < rb.data.size(); ++i) rb.data[i] -= h * tanT.eta.data[i];
            e.remainder = std::sqrt(sobolev_norm_sq(ru, NormKind::L2) +
                                    sobolev_norm_sq(rb, NormKind::L2));
            e.quotient_add = e.remainder / (h * rep.dir_norm_add);
            e.quotient_rss = e.remainder / (h * rep.dir_norm_rss);
        } catch (const std::exception& ex) {
            e.failed = true;
            e.error = ex.what();
        }
        return e;
    };

    const int max_threads = configured_threads();
    rep.entries.resize(h_list.size());
    if (max_threads > 1 && h_list.size() > 1) {
        std::vector<std::future<ConsistencyEntry>> futures;
        futures.reserve(h_list.size());
        for (double h : h_list)
            futures.push_back(std::async(std::launch::async, run_branch, h));
        for (size_t i = 0; i < futures.size(); ++i) rep.entries[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < h_list.size(); ++i) rep.entries[i] = run_branch(h_list[i]);
    }

    // least-squares slope of log r vs log h over successful entries
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& e : rep.entries) {
        if (e.failed || !(e.remainder > 0.0)) continue;
        const double x = std::log(e.h), y = std::log(e.remainder);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) {
        rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        rep.slope_valid = true;
    }
    return rep;
}

EnvelopeReport lipschitz_envelope(const State& base0, const TangentState& pert0, double T,
                                  const SpectralField& f, const PhysicalParams& p,
                                  const StepperConfig& cfg, int stride) {
    if (pair_norm(pert0) <= 0.0)
        throw std::invalid_argument("lipschitz_envelope: zero perturbation");
    State a = base0;
    State b = base0;
    b.u += pert0.xi;
    b.b += pert0.eta;

    EnvelopeReport rep;
    auto record = [&](double t) {
        SpectralField w = b.u;
        w -= a.u;
        SpectralField m = b.b;
        m -= a.b;
        rep.series.push_back(
            {t, sobolev_norm_sq(w, NormKind::L2) + sobolev_norm_sq(m, NormKind::L2)});
    };

    Stepper sa(p, cfg), sb(p, cfg);
    const long n = step_count(base0.t, T, cfg.dt);
    record(base0.t);
    for (long i = 1; i <= n; ++i) {
        a = sa.step(a, f);
        b = sb.step(b, f);
        if (i % stride == 0 || i == n) record(base0.t + static_cast<double>(i) * cfg.dt);
    }

    double max_slope = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < rep.series.size(); ++i) {
        const auto& p0 = rep.series[i - 1];
        const auto& p1 = rep.series[i];
        if (p0.phi > 0.0 && p1.phi > 0.0)
            max_slope = std::max(max_slope, (std::log(p1.phi) - std::log(p0.phi)) / (p1.t - p0.t));
    }
    rep.eta1_hat = max_slope;
    return rep;
}

double pair_inner_product(const TangentState& a, const TangentState& b) {
    return inner_product_l2(a.xi, b.xi) + inner_product_l2(a.eta, b.eta);
}

double pair_norm(const TangentState& a) { return std::sqrt(pair_inner_product(a, a)); }

}  // namespace bpmhd
