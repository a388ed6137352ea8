#include "bpmhd/dynamics.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "bpmhd/rheology.hpp"
#include "stress_detail.hpp"

namespace bpmhd {

namespace {

void apply_decay(SpectralField& v, const std::vector<double>& lam, double dt) {
    const size_t nm = v.grid.n_modes();
    for (int c = 0; c < v.n_comp; ++c)
        for (size_t idx = 0; idx < nm; ++idx) v.at(c, idx) *= std::exp(-lam[idx] * dt);
}

void finalize_state_field(SpectralField& v) {
    leray_project_inplace(v);
    enforce_reality_inplace(v);
}

}  // namespace

double default_dt(const PhysicalParams& p, const DomainSpec& dom) {
    const Grid g(dom);
    const double cfl_dt = 0.5 * g.dx();  // unit-velocity advective CFL
    // explicit stability of the Gamma stress: symbol ~ Gamma(0) |k|^2 / 2 at the band edge
    const double gamma0 = p.mu0 * std::pow(p.eps, -p.alpha / 2.0);
    const double kmax = g.k_unit() * g.dealias_kmax();
    const double visc_dt = 4.0 / (gamma0 * kmax * kmax + 1e-300);
    return std::min(cfl_dt, 0.5 * visc_dt);
}

Tendencies explicit_tendencies(const State& s, const SpectralField& f,
                               const PhysicalParams& p) {
    SpectralField du = f;
    du -= advect(s.u, s.u);
    SpectralField lorentz = advect(s.b, s.b);
    lorentz *= p.mu;
    du += lorentz;
    du += detail::gamma_stress_divergence(s.u, p);
    leray_project_inplace(du);
    enforce_reality_inplace(du);

    SpectralField db = advect(s.b, s.u);  // (b.grad)u
    db -= advect(s.u, s.b);
    db *= p.mu;
    leray_project_inplace(db);
    enforce_reality_inplace(db);

    return Tendencies{std::move(du), std::move(db), max_abs_value(s.u)};
}

SpectralField rhs_velocity(const State& s, const SpectralField& f, const PhysicalParams& p,
                           StiffPart stiff) {
    Tendencies t = explicit_tendencies(s, f, p);
    if (stiff == StiffPart::Include) {
        const detail::StiffSymbols sym(s.u.grid, p);
        for (int c = 0; c < t.du.n_comp; ++c)
            for (size_t idx = 0; idx < s.u.grid.n_modes(); ++idx)
                t.du.at(c, idx) -= sym.lam_u[idx] * s.u.at(c, idx);
    }
    return t.du;
}

SpectralField rhs_magnetic(const State& s, const PhysicalParams& p, StiffPart stiff) {
    const SpectralField f = zero_vector_field(s.u.grid);
    Tendencies t = explicit_tendencies(s, f, p);
    if (stiff == StiffPart::Include) {
        const detail::StiffSymbols sym(s.b.grid, p);
        for (int c = 0; c < t.db.n_comp; ++c)
            for (size_t idx = 0; idx < s.b.grid.n_modes(); ++idx)
                t.db.at(c, idx) -= sym.lam_b[idx] * s.b.at(c, idx);
    }
    return t.db;
}

double gamma_dissipation(const SpectralField& u, const PhysicalParams& p) {
    const RealField er = detail::strain_real(u);
    const std::vector<double> s = detail::strain_sq(er, u.grid.dim());
    double acc = 0.0;
    for (const double sx : s) acc += gamma_visc(sx, p) * sx;
    return acc * u.grid.cell_volume();
}

Stepper::Stepper(const PhysicalParams& p, StepperConfig cfg) : params_(p), cfg_(cfg) {
    if (!(cfg_.dt > 0.0)) throw std::invalid_argument("Stepper: dt must be > 0");
}

void Stepper::reset_history() { have_history_ = false; }

State Stepper::step(const State& s, const SpectralField& f) {
    const Grid& g = s.u.grid;
    const double dt = cfg_.dt;
    Tendencies ten = explicit_tendencies(s, f, params_);

    const double cfl = ten.max_abs_u * dt / g.dx();
    if (cfl > cfg_.cfl_limit) {
        std::ostringstream msg;
        msg << "CFL violation: max|u| dt / dx = " << cfl << " > limit " << cfg_.cfl_limit;
        throw std::runtime_error(msg.str());
    }

    const detail::StiffSymbols sym(g, params_);
    State out;
    out.t = s.t + dt;

    if (cfg_.scheme == Scheme::ImexEuler) {
        // integrating factor: y+ = exp(-lam dt) (y + dt N(y))
        SpectralField u = s.u;
        SpectralField b = s.b;
        for (size_t i = 0; i < u.data.size(); ++i) u.data[i] += dt * ten.du.data[i];
        for (size_t i = 0; i < b.data.size(); ++i) b.data[i] += dt * ten.db.data[i];
        apply_decay(u, sym.lam_u, dt);
        apply_decay(b, sym.lam_b, dt);
        out.u = std::move(u);
        out.b = std::move(b);
    } else {
        // Crank-Nicolson on the stiff symbols, AB2 on the explicit terms
        const double w0 = have_history_ ? 1.5 : 1.0;
        const double w1 = have_history_ ? -0.5 : 0.0;
        SpectralField u = s.u;
        SpectralField b = s.b;
        const size_t nm = g.n_modes();
        for (int c = 0; c < u.n_comp; ++c) {
            for (size_t idx = 0; idx < nm; ++idx) {
                const cplx du1 = have_history_ ? prev_du_.at(c, idx) : ten.du.at(c, idx);
                const cplx db1 = have_history_ ? prev_db_.at(c, idx) : ten.db.at(c, idx);
                const double zu = 0.5 * dt * sym.lam_u[idx];
                u.at(c, idx) = ((1.0 - zu) * s.u.at(c, idx) +
                                dt * (w0 * ten.du.at(c, idx) + w1 * du1)) /
                               (1.0 + zu);
                const double zb = 0.5 * dt * sym.lam_b[idx];
                b.at(c, idx) = ((1.0 - zb) * s.b.at(c, idx) +
                                dt * (w0 * ten.db.at(c, idx) + w1 * db1)) /
                               (1.0 + zb);
            }
        }
        prev_du_ = std::move(ten.du);
        prev_db_ = std::move(ten.db);
        have_history_ = true;
        out.u = std::move(u);
        out.b = std::move(b);
    }

    finalize_state_field(out.u);
    finalize_state_field(out.b);
    if (has_nan(out.u) || has_nan(out.b)) throw std::runtime_error("NaN detected in state");
    return out;
}

State step(const State& s, const SpectralField& f, const PhysicalParams& p,
           const StepperConfig& cfg) {
    Stepper st(p, cfg);
    return st.step(s, f);
}

State integrate(State s, const SpectralField& f, const PhysicalParams& p,
                const StepperConfig& cfg, double t_end, std::vector<Observer>& observers) {
    Stepper stepper(p, cfg);
    const double t0 = s.t;
    long n_steps = 0;
    if (t_end > t0) n_steps = static_cast<long>(std::ceil((t_end - t0) / cfg.dt - 1e-9));

    auto notify = [&](const State& st, long i) {
        for (auto& obs : observers)
            if (obs.stride > 0 && (i % obs.stride == 0 || i == n_steps)) obs.fn(st, i);
    };
    notify(s, 0);
    for (long i = 1; i <= n_steps; ++i) {
        try {
            s = stepper.step(s, f);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << e.what() << " (at step " << i << ", t = " << s.t << ")";
            throw std::runtime_error(msg.str());
        }
        s.t = t0 + static_cast<double>(i) * cfg.dt;
        notify(s, i);
    }
    return s;
}

// -- checkpoint i/o -----------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'B', 'P', 'M', 'H', 'D', 'C', 'K', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
    uint64_t v;
    std::memcpy(&v, &d, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

void put_field(std::ostream& os, const SpectralField& f) {
    for (const auto& z : f.data) {
        put_f64(os, z.real());
        put_f64(os, z.imag());
    }
}

void get_field(std::istream& is, SpectralField& f) {
    for (auto& z : f.data) {
        const double re = get_f64(is);
        const double im = get_f64(is);
        z = cplx(re, im);
    }
}

}  // namespace

void write_checkpoint(std::ostream& os, const State& s, const PhysicalParams& p) {
    os.write(kMagic, 8);
    put_u32(os, 1);  // version
    put_u32(os, static_cast<uint32_t>(s.u.grid.dim()));
    put_u32(os, static_cast<uint32_t>(s.u.grid.n()));
    put_f64(os, s.u.grid.length());
    put_f64(os, s.t);
    put_f64(os, p.eps);
    put_f64(os, p.mu0);
    put_f64(os, p.mu1);
    put_f64(os, p.alpha);
    put_f64(os, p.mu);
    put_f64(os, p.s_diff);
    put_f64(os, p.f_amp);
    put_field(os, s.u);
    put_field(os, s.b);
    if (!os) throw std::runtime_error("checkpoint write failed");
}

void write_checkpoint_file(const std::string& path, const State& s, const PhysicalParams& p) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    write_checkpoint(os, s, p);
}

CheckpointData read_checkpoint(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("not a checkpoint file (bad magic)");
    const uint32_t version = get_u32(is);
    if (version != 1) throw std::runtime_error("unsupported checkpoint version");
    DomainSpec dom;
    dom.dim = static_cast<int>(get_u32(is));
    dom.resolution = static_cast<int>(get_u32(is));
    dom.length = get_f64(is);
    CheckpointData out;
    out.state.t = get_f64(is);
    out.params.eps = get_f64(is);
    out.params.mu0 = get_f64(is);
    out.params.mu1 = get_f64(is);
    out.params.alpha = get_f64(is);
    out.params.mu = get_f64(is);
    out.params.s_diff = get_f64(is);
    out.params.f_amp = get_f64(is);
    const Grid g(dom);
    out.state.u = SpectralField(g, g.dim());
    out.state.b = SpectralField(g, g.dim());
    get_field(is, out.state.u);
    get_field(is, out.state.b);
    if (!is) throw std::runtime_error("checkpoint truncated");
    return out;
}

CheckpointData read_checkpoint_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    return read_checkpoint(is);
}

}  // namespace bpmhd
