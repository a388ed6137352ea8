#include "bpmhd/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bpmhd {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    }
}

long to_long(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::array<int, 3> to_ivec3(const std::string& key, const std::string& v) {
    const auto parts = split_list(v);
    if (parts.empty() || parts.size() > 3)
        throw std::invalid_argument("config: " + key + " wants 1-3 integers");
    std::array<int, 3> out{0, 0, 0};
    for (size_t i = 0; i < parts.size(); ++i)
        out[i] = static_cast<int>(to_long(key, parts[i]));
    return out;
}

std::array<double, 3> to_dvec3(const std::string& key, const std::string& v) {
    const auto parts = split_list(v);
    if (parts.empty() || parts.size() > 3)
        throw std::invalid_argument("config: " + key + " wants 1-3 numbers");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (size_t i = 0; i < parts.size(); ++i) out[i] = to_double(key, parts[i]);
    return out;
}

void set_key(RunConfig& cfg, const std::string& section, const std::string& key,
             const std::string& value) {
    const std::string full = section + "." + key;
    auto is_auto = [&value] { return value == "auto"; };

    if (section == "physics") {
        if (key == "eps") cfg.physics.eps = to_double(full, value);
        else if (key == "mu0") cfg.physics.mu0 = to_double(full, value);
        else if (key == "mu1") cfg.physics.mu1 = to_double(full, value);
        else if (key == "alpha") cfg.physics.alpha = to_double(full, value);
        else if (key == "mu") cfg.physics.mu = to_double(full, value);
        else if (key == "s_diff") cfg.physics.s_diff = to_double(full, value);
        else if (key == "f_amp") cfg.physics.f_amp = to_double(full, value);
        else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "domain") {
        if (key == "dim") cfg.domain.dim = static_cast<int>(to_long(full, value));
        else if (key == "length") cfg.domain.length = to_double(full, value);
        else if (key == "resolution") cfg.domain.resolution = static_cast<int>(to_long(full, value));
        else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "constants") {
        if (key == "korn") {
            if (!is_auto()) { cfg.constants.korn = to_double(full, value); cfg.constants_explicit_korn = true; }
        } else if (key == "embed") cfg.constants.embed = to_double(full, value);
        else if (key == "d_const") cfg.constants.d_const = to_double(full, value);
        else if (key == "stokes_c") cfg.constants.stokes_c = to_double(full, value);
        else if (key == "lambda1") {
            if (!is_auto()) { cfg.constants.lambda1 = to_double(full, value); cfg.constants_explicit_lambda1 = true; }
        } else if (key == "c_tilde") cfg.constants.c_tilde = to_double(full, value);
        else if (key == "gronwall_rate_b") {
            if (!is_auto()) cfg.constants.gronwall_rate_b = to_double(full, value);
        } else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "stepper") {
        if (key == "dt") {
            if (!is_auto()) {
                cfg.stepper.dt = to_double(full, value);
                cfg.stepper_dt_explicit = true;
            }
        } else if (key == "cfl_limit") cfg.stepper.cfl_limit = to_double(full, value);
        else if (key == "scheme") {
            if (value == "imex_euler") cfg.stepper.scheme = Scheme::ImexEuler;
            else if (value == "imex_cnab2") cfg.stepper.scheme = Scheme::ImexCnab2;
            else throw std::invalid_argument("config: unknown scheme '" + value + "'");
        } else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "forcing") {
        if (key == "type") {
            if (value == "none") cfg.forcing.type = ForcingSpec::Type::None;
            else if (value == "single_mode") cfg.forcing.type = ForcingSpec::Type::SingleMode;
            else if (value == "random_band") cfg.forcing.type = ForcingSpec::Type::RandomBand;
            else throw std::invalid_argument("config: unknown forcing type '" + value + "'");
        } else if (key == "amplitude") cfg.forcing.amplitude = to_double(full, value);
        else if (key == "mode") cfg.forcing.mode = to_ivec3(full, value);
        else if (key == "polarization") cfg.forcing.polarization = to_dvec3(full, value);
        else if (key == "phase") cfg.forcing.phase = to_double(full, value);
        else if (key == "seed") cfg.forcing.seed = static_cast<uint64_t>(to_long(full, value));
        else if (key == "band_lo") cfg.forcing.band_lo = static_cast<int>(to_long(full, value));
        else if (key == "band_hi") cfg.forcing.band_hi = static_cast<int>(to_long(full, value));
        else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "initial") {
        if (key == "type") {
            if (value == "zero") cfg.initial.type = InitialSpec::Type::Zero;
            else if (value == "single_mode") cfg.initial.type = InitialSpec::Type::SingleMode;
            else if (value == "random_band") cfg.initial.type = InitialSpec::Type::RandomBand;
            else if (value == "checkpoint") cfg.initial.type = InitialSpec::Type::Checkpoint;
            else throw std::invalid_argument("config: unknown initial type '" + value + "'");
        } else if (key == "amplitude") cfg.initial.amplitude = to_double(full, value);
        else if (key == "b_fraction") cfg.initial.b_fraction = to_double(full, value);
        else if (key == "mode") cfg.initial.mode = to_ivec3(full, value);
        else if (key == "polarization") cfg.initial.polarization = to_dvec3(full, value);
        else if (key == "seed") cfg.initial.seed = static_cast<uint64_t>(to_long(full, value));
        else if (key == "band_lo") cfg.initial.band_lo = static_cast<int>(to_long(full, value));
        else if (key == "band_hi") cfg.initial.band_hi = static_cast<int>(to_long(full, value));
        else if (key == "checkpoint_path") cfg.initial.checkpoint_path = value;
        else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "output") {
        if (key == "dir") cfg.output_dir = value;
        else if (key == "energy_stride") cfg.energy_stride = static_cast<int>(to_long(full, value));
        else if (key == "checkpoint_stride") cfg.checkpoint_stride = static_cast<int>(to_long(full, value));
        else if (key == "t_end") cfg.t_end = to_double(full, value);
        else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "tangent") {
        if (key == "h_list") {
            cfg.tangent_h_list.clear();
            for (const auto& s : split_list(value)) cfg.tangent_h_list.push_back(to_double(full, s));
        } else if (key == "T") cfg.tangent_T = to_double(full, value);
        else if (key == "seed") cfg.tangent_seed = static_cast<uint64_t>(to_long(full, value));
        else if (key == "transient") cfg.tangent_transient = to_double(full, value);
        else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "trace") {
        if (key == "m") cfg.trace_m = static_cast<int>(to_long(full, value));
        else if (key == "reortho_stride") cfg.trace_reortho_stride = static_cast<int>(to_long(full, value));
        else if (key == "t_span") cfg.trace_t_span = to_double(full, value);
        else if (key == "transient") cfg.trace_transient = to_double(full, value);
        else if (key == "seed") cfg.trace_seed = static_cast<uint64_t>(to_long(full, value));
        else if (key == "init") {
            if (value == "modes") cfg.trace_init_modes = true;
            else if (value == "random") cfg.trace_init_modes = false;
            else throw std::invalid_argument("config: unknown trace init '" + value + "'");
        } else throw std::invalid_argument("config: unknown key " + full);
    } else if (section == "kappa") {
        if (key == "r") cfg.kappa_r = to_double(full, value);
        else throw std::invalid_argument("config: unknown key " + full);
    } else {
        throw std::invalid_argument("config: unknown section [" + section + "]");
    }
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: bad section header at line " +
                                            std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value at line " +
                                        std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty())
            throw std::invalid_argument("config: key outside any section at line " +
                                        std::to_string(lineno));
        set_key(cfg, section, key, value);
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config not found: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--set expects section.key=value, got '" + assignment + "'");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const auto dot = path.find('.');
    if (dot == std::string::npos)
        throw std::invalid_argument("--set expects section.key=value, got '" + assignment + "'");
    set_key(cfg, path.substr(0, dot), path.substr(dot + 1), value);
}

void finalize_constants(RunConfig& cfg) {
    if (!cfg.constants_explicit_korn) cfg.constants.korn = discrete_korn(cfg.domain);
    if (!cfg.constants_explicit_lambda1) cfg.constants.lambda1 = lambda1(cfg.domain);
    if (!cfg.stepper_dt_explicit) cfg.stepper.dt = default_dt(cfg.physics, cfg.domain);
}

SpectralField build_forcing(RunConfig& cfg) {
    const Grid g(cfg.domain);
    SpectralField f = zero_vector_field(g);
    switch (cfg.forcing.type) {
        case ForcingSpec::Type::None:
            return f;
        case ForcingSpec::Type::SingleMode:
            f = single_mode_field(g, cfg.forcing.mode, cfg.forcing.polarization, 1.0,
                                  cfg.forcing.phase);
            break;
        case ForcingSpec::Type::RandomBand:
            f = random_band_field(g, cfg.forcing.seed, cfg.forcing.band_lo, cfg.forcing.band_hi,
                                  1.0);
            break;
    }
    leray_project_inplace(f);
    dealias_inplace(f);
    const double norm = std::sqrt(sobolev_norm_sq(f, NormKind::L2));
    if (norm > 0.0 && cfg.forcing.amplitude > 0.0) f *= cfg.forcing.amplitude / norm;
    cfg.physics.f_amp = std::sqrt(sobolev_norm_sq(f, NormKind::L2));
    return f;
}

State build_initial_state(const RunConfig& cfg) {
    const Grid g(cfg.domain);
    State s;
    s.t = 0.0;
    const double amp = cfg.initial.amplitude;
    const double bf = std::min(std::max(cfg.initial.b_fraction, 0.0), 1.0);
    const double amp_b = amp * std::sqrt(bf);
    const double amp_u = amp * std::sqrt(1.0 - bf);

    switch (cfg.initial.type) {
        case InitialSpec::Type::Zero:
            s.u = zero_vector_field(g);
            s.b = zero_vector_field(g);
            break;
        case InitialSpec::Type::SingleMode: {
            s.u = single_mode_field(g, cfg.initial.mode, cfg.initial.polarization, 1.0);
            const double nu = std::sqrt(sobolev_norm_sq(s.u, NormKind::L2));
            if (nu > 0.0) s.u *= amp_u / nu;
            s.b = single_mode_field(g, cfg.initial.mode, cfg.initial.polarization, 1.0);
            const double nb = std::sqrt(sobolev_norm_sq(s.b, NormKind::L2));
            if (nb > 0.0) s.b *= amp_b / nb;
            break;
        }
        case InitialSpec::Type::RandomBand:
            s.u = random_band_field(g, cfg.initial.seed * 2, cfg.initial.band_lo,
                                    cfg.initial.band_hi, amp_u);
            s.b = random_band_field(g, cfg.initial.seed * 2 + 1, cfg.initial.band_lo,
                                    cfg.initial.band_hi, amp_b);
            break;
        case InitialSpec::Type::Checkpoint: {
            CheckpointData ck = read_checkpoint_file(cfg.initial.checkpoint_path);
            if (!(ck.state.u.grid == g))
                throw std::runtime_error("checkpoint grid does not match [domain]");
            return ck.state;
        }
    }
    leray_project_inplace(s.u);
    enforce_reality_inplace(s.u);
    dealias_inplace(s.u);
    leray_project_inplace(s.b);
    enforce_reality_inplace(s.b);
    dealias_inplace(s.b);
    return s;
}

}  // namespace bpmhd
