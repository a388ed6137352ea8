#include "bpmhd/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>

namespace bpmhd {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void check_same_grid(const SpectralField& a, const SpectralField& b, const char* op) {
    if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(op) + ": grid mismatch");
}

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

/// In-place c2c plans on an internal FFTW-aligned buffer.  Plan creation is
/// serialized (FFTW's planner is not thread-safe); execution through the
/// internal buffer keeps alignment fixed so ESTIMATE plans are deterministic
/// run to run.
class Fft {
public:
    Fft(int dim, int n) : n_modes_(1) {
        for (int d = 0; d < dim; ++d) n_modes_ *= static_cast<size_t>(n);
        buf_ = fftw_alloc_complex(n_modes_);
        if (!buf_) throw std::bad_alloc();
        int sizes[3] = {n, n, n};
        std::lock_guard<std::mutex> lock(planner_mutex());
        fwd_ = fftw_plan_dft(dim, sizes, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft(dim, sizes, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
    }
    ~Fft() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    /// values -> normalized coefficients
    void analyze(const cplx* in, cplx* out) {
        auto* b = reinterpret_cast<cplx*>(buf_);
        std::copy(in, in + n_modes_, b);
        fftw_execute(fwd_);
        const double scale = 1.0 / static_cast<double>(n_modes_);
        for (size_t i = 0; i < n_modes_; ++i) out[i] = b[i] * scale;
    }
    /// normalized coefficients -> values
    void synthesize(const cplx* in, cplx* out) {
        auto* b = reinterpret_cast<cplx*>(buf_);
        std::copy(in, in + n_modes_, b);
        fftw_execute(bwd_);
        std::copy(b, b + n_modes_, out);
    }

private:
    size_t n_modes_;
    fftw_complex* buf_;
    fftw_plan fwd_, bwd_;
};

Fft& fft_for(const Grid& g) {
    thread_local std::map<std::pair<int, int>, std::unique_ptr<Fft>> cache;
    auto key = std::make_pair(g.dim(), g.n());
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<Fft>(g.dim(), g.n())).first;
    return *it->second;
}

}  // namespace

Grid::Grid(const DomainSpec& dom)
    : dim_(dom.dim), n_(dom.resolution), length_(dom.length),
      k_unit_(2.0 * kPi / dom.length) {
    n_modes_ = 1;
    for (int d = 0; d < dim_; ++d) n_modes_ *= static_cast<size_t>(n_);
    dealias_kmax_ = (n_ - 1) / 3;  // 3*kmax < N: quadratic aliases land outside the band
}

double Grid::cell_volume() const { return std::pow(length_ / n_, dim_); }
double Grid::volume() const { return std::pow(length_, dim_); }

std::array<int, 3> Grid::axis_indices(size_t flat_idx) const {
    std::array<int, 3> ix{0, 0, 0};
    if (dim_ == 2) {
        ix[1] = static_cast<int>(flat_idx % n_);
        ix[0] = static_cast<int>(flat_idx / n_);
    } else {
        ix[2] = static_cast<int>(flat_idx % n_);
        flat_idx /= n_;
        ix[1] = static_cast<int>(flat_idx % n_);
        ix[0] = static_cast<int>(flat_idx / n_);
    }
    return ix;
}

std::array<int, 3> Grid::wavevector(size_t flat_idx) const {
    auto ix = axis_indices(flat_idx);
    std::array<int, 3> m{0, 0, 0};
    for (int d = 0; d < dim_; ++d) m[d] = mode_of(ix[d]);
    return m;
}

size_t Grid::conjugate_index(size_t flat_idx) const {
    auto ix = axis_indices(flat_idx);
    int cx = (n_ - ix[0]) % n_;
    int cy = (n_ - ix[1]) % n_;
    int cz = (n_ - ix[2]) % n_;
    return flat(cx, cy, cz);
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    check_same_grid(*this, o, "+=");
    for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    return *this;
}
SpectralField& SpectralField::operator-=(const SpectralField& o) {
    check_same_grid(*this, o, "-=");
    for (size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
    return *this;
}
SpectralField& SpectralField::operator*=(double s) {
    for (auto& v : data) v *= s;
    return *this;
}
SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

RealField to_real(const SpectralField& f) {
    RealField r;
    r.grid = f.grid;
    r.n_comp = f.n_comp;
    const size_t nm = f.grid.n_modes();
    r.values.resize(static_cast<size_t>(f.n_comp) * nm);
    Fft& fft = fft_for(f.grid);
    std::vector<cplx> scratch(nm);
    for (int c = 0; c < f.n_comp; ++c) {
        fft.synthesize(f.data.data() + static_cast<size_t>(c) * nm, scratch.data());
        double* out = r.values.data() + static_cast<size_t>(c) * nm;
        for (size_t i = 0; i < nm; ++i) out[i] = scratch[i].real();
    }
    return r;
}

SpectralField from_real(const RealField& r) {
    SpectralField f(r.grid, r.n_comp);
    const size_t nm = r.grid.n_modes();
    Fft& fft = fft_for(r.grid);
    std::vector<cplx> scratch(nm);
    for (int c = 0; c < r.n_comp; ++c) {
        const double* in = r.values.data() + static_cast<size_t>(c) * nm;
        for (size_t i = 0; i < nm; ++i) scratch[i] = cplx(in[i], 0.0);
        fft.analyze(scratch.data(), f.data.data() + static_cast<size_t>(c) * nm);
    }
    return f;
}

SpectralField zero_field(const Grid& g, int n_comp) { return SpectralField(g, n_comp); }
SpectralField zero_vector_field(const Grid& g) { return SpectralField(g, g.dim()); }

SpectralField single_mode_field(const Grid& g, const std::array<int, 3>& m,
                                const std::array<double, 3>& pol, double amp, double phase) {
    SpectralField f(g, g.dim());
    double m2 = 0.0, me = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
        m2 += static_cast<double>(m[d]) * m[d];
        me += m[d] * pol[d];
    }
    if (m2 == 0.0) throw std::invalid_argument("single_mode_field: zero wavevector");
    std::array<double, 3> e{};
    double e2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
        e[d] = pol[d] - m[d] * me / m2;
        e2 += e[d] * e[d];
    }
    if (e2 < 1e-24)
        throw std::invalid_argument("single_mode_field: polarization parallel to wavevector");
    const double inv = 1.0 / std::sqrt(e2);

    std::array<int, 3> ix{0, 0, 0};
    for (int d = 0; d < g.dim(); ++d) {
        if (std::abs(m[d]) >= g.n() / 2)
            throw std::invalid_argument("single_mode_field: mode outside lattice");
        ix[d] = g.index_of(m[d]);
    }
    const size_t idx = g.flat(ix[0], ix[1], ix[2]);
    const size_t cdx = g.conjugate_index(idx);
    const cplx half = 0.5 * amp * std::exp(cplx(0.0, phase));
    for (int d = 0; d < g.dim(); ++d) {
        f.at(d, idx) = half * (e[d] * inv);
        f.at(d, cdx) = std::conj(f.at(d, idx));
    }
    return f;
}

SpectralField random_band_field(const Grid& g, uint64_t seed, int band_lo, int band_hi,
                                double amplitude) {
    if (band_lo < 1) throw std::invalid_argument("random_band_field: band_lo must be >= 1");
    SpectralField f(g, g.dim());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const long lo2 = static_cast<long>(band_lo) * band_lo;
    const long hi2 = static_cast<long>(band_hi) * band_hi;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        const size_t cdx = g.conjugate_index(idx);
        if (cdx <= idx) continue;  // partner fills it; self-conjugate modes stay zero
        auto m = g.wavevector(idx);
        long m2 = 0;
        for (int d = 0; d < g.dim(); ++d) m2 += static_cast<long>(m[d]) * m[d];
        if (m2 < lo2 || m2 > hi2) continue;
        for (int d = 0; d < g.dim(); ++d) {
            const cplx v(gauss(rng), gauss(rng));
            f.at(d, idx) = v;
            f.at(d, cdx) = std::conj(v);
        }
    }
    leray_project_inplace(f);
    dealias_inplace(f);
    if (amplitude > 0.0) {
        const double norm = std::sqrt(sobolev_norm_sq(f, NormKind::L2));
        if (norm > 0.0) f *= amplitude / norm;
    }
    return f;
}

void leray_project_inplace(SpectralField& v) {
    const Grid& g = v.grid;
    const int n = g.dim();
    if (v.n_comp != n) throw std::invalid_argument("leray_project: field is not a vector field");
    const size_t nm = g.n_modes();
    for (size_t idx = 0; idx < nm; ++idx) {
        auto m = g.wavevector(idx);
        double m2 = 0.0;
        for (int d = 0; d < n; ++d) m2 += static_cast<double>(m[d]) * m[d];
        if (m2 == 0.0) {
            for (int d = 0; d < n; ++d) v.at(d, idx) = 0.0;  // mean-zero
            continue;
        }
        cplx kc(0.0, 0.0);
        for (int d = 0; d < n; ++d) kc += static_cast<double>(m[d]) * v.at(d, idx);
        kc /= m2;
        for (int d = 0; d < n; ++d) v.at(d, idx) -= static_cast<double>(m[d]) * kc;
    }
}

SpectralField leray_project(SpectralField v) {
    leray_project_inplace(v);
    return v;
}

void enforce_reality_inplace(SpectralField& v) {
    const Grid& g = v.grid;
    const size_t nm = g.n_modes();
    for (size_t idx = 0; idx < nm; ++idx) {
        const size_t cdx = g.conjugate_index(idx);
        if (cdx < idx) continue;
        for (int c = 0; c < v.n_comp; ++c) {
            if (cdx == idx) {
                v.at(c, idx) = cplx(v.at(c, idx).real(), 0.0);
            } else {
                const cplx mean = 0.5 * (v.at(c, idx) + std::conj(v.at(c, cdx)));
                v.at(c, idx) = mean;
                v.at(c, cdx) = std::conj(mean);
            }
        }
    }
}

void dealias_inplace(SpectralField& v) {
    const Grid& g = v.grid;
    const int kmax = g.dealias_kmax();
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        bool cut = false;
        for (int d = 0; d < g.dim(); ++d)
            if (std::abs(m[d]) > kmax) cut = true;
        if (cut)
            for (int c = 0; c < v.n_comp; ++c) v.at(c, idx) = 0.0;
    }
}

SpectralField dealias(SpectralField v) {
    dealias_inplace(v);
    return v;
}

SpectralField derivative(const SpectralField& v, int axis) {
    SpectralField r(v.grid, v.n_comp);
    const double ku = v.grid.k_unit();
    for (size_t idx = 0; idx < v.grid.n_modes(); ++idx) {
        const double k = ku * v.grid.wavevector(idx)[static_cast<size_t>(axis)];
        const cplx ik(0.0, k);
        for (int c = 0; c < v.n_comp; ++c) r.at(c, idx) = ik * v.at(c, idx);
    }
    return r;
}

SpectralField minus_laplacian(const SpectralField& v) {
    SpectralField r(v.grid, v.n_comp);
    const double ku2 = v.grid.k_unit() * v.grid.k_unit();
    for (size_t idx = 0; idx < v.grid.n_modes(); ++idx) {
        auto m = v.grid.wavevector(idx);
        double m2 = 0.0;
        for (int d = 0; d < v.grid.dim(); ++d) m2 += static_cast<double>(m[d]) * m[d];
        for (int c = 0; c < v.n_comp; ++c) r.at(c, idx) = ku2 * m2 * v.at(c, idx);
    }
    return r;
}

SpectralField curl(const SpectralField& v) {
    const Grid& g = v.grid;
    if (v.n_comp != g.dim()) throw std::invalid_argument("curl: expects a vector field");
    const double ku = g.k_unit();
    if (g.dim() == 3) {
        SpectralField r(g, 3);
        for (size_t idx = 0; idx < g.n_modes(); ++idx) {
            auto m = g.wavevector(idx);
            const cplx i(0.0, 1.0);
            const double k0 = ku * m[0], k1 = ku * m[1], k2 = ku * m[2];
            r.at(0, idx) = i * (k1 * v.at(2, idx) - k2 * v.at(1, idx));
            r.at(1, idx) = i * (k2 * v.at(0, idx) - k0 * v.at(2, idx));
            r.at(2, idx) = i * (k0 * v.at(1, idx) - k1 * v.at(0, idx));
        }
        return r;
    }
    SpectralField r(g, 1);
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        r.at(0, idx) = cplx(0.0, ku * m[0]) * v.at(1, idx) - cplx(0.0, ku * m[1]) * v.at(0, idx);
    }
    return r;
}

SpectralField curl_of_scalar(const SpectralField& s) {
    const Grid& g = s.grid;
    if (g.dim() != 2 || s.n_comp != 1)
        throw std::invalid_argument("curl_of_scalar: 2D scalar field expected");
    SpectralField r(g, 2);
    const double ku = g.k_unit();
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        r.at(0, idx) = cplx(0.0, ku * m[1]) * s.at(0, idx);
        r.at(1, idx) = cplx(0.0, -ku * m[0]) * s.at(0, idx);
    }
    return r;
}

namespace {

/// All first derivatives of all components as one (n_comp*dim)-component
/// field, comp-major: [i * dim + j] = d v_i / d x_j.
SpectralField gradient_field(const SpectralField& v) {
    const Grid& g = v.grid;
    SpectralField grad(g, v.n_comp * g.dim());
    const double ku = g.k_unit();
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        for (int i = 0; i < v.n_comp; ++i)
            for (int j = 0; j < g.dim(); ++j)
                grad.at(i * g.dim() + j, idx) = cplx(0.0, ku * m[j]) * v.at(i, idx);
    }
    return grad;
}

}  // namespace

SpectralField advect(const SpectralField& u, const SpectralField& v) {
    check_same_grid(u, v, "advect");
    const Grid& g = u.grid;
    const int n = g.dim();
    if (u.n_comp != n || v.n_comp != n)
        throw std::invalid_argument("advect: vector fields expected");
    const RealField ur = to_real(u);
    const RealField gr = to_real(gradient_field(v));
    RealField w;
    w.grid = g;
    w.n_comp = n;
    const size_t nm = g.n_modes();
    w.values.assign(static_cast<size_t>(n) * nm, 0.0);
    for (int i = 0; i < n; ++i) {
        double* wi = w.values.data() + static_cast<size_t>(i) * nm;
        for (int j = 0; j < n; ++j) {
            const double* uj = ur.values.data() + static_cast<size_t>(j) * nm;
            const double* gij = gr.values.data() + static_cast<size_t>(i * n + j) * nm;
            for (size_t x = 0; x < nm; ++x) wi[x] += uj[x] * gij[x];
        }
    }
    SpectralField out = from_real(w);
    dealias_inplace(out);
    enforce_reality_inplace(out);
    return out;
}

double sobolev_norm_sq(const SpectralField& v, NormKind kind) {
    const Grid& g = v.grid;
    const double ku2 = g.k_unit() * g.k_unit();
    double sum = 0.0;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        double m2 = 0.0;
        for (int d = 0; d < g.dim(); ++d) m2 += static_cast<double>(m[d]) * m[d];
        const double k2 = ku2 * m2;
        double w = 0.0;
        switch (kind) {
            case NormKind::L2: w = 1.0; break;
            case NormKind::H1: w = 1.0 + k2; break;
            case NormKind::H2: w = 1.0 + k2 + k2 * k2; break;
            case NormKind::V1Diss: w = 0.5 * k2 * k2; break;
            case NormKind::V2Curl: w = k2; break;
        }
        if (w == 0.0) continue;
        double a2 = 0.0;
        for (int c = 0; c < v.n_comp; ++c) a2 += std::norm(v.at(c, idx));
        sum += w * a2;
    }
    return sum * g.volume();
}

double w1p_norm_sq(const SpectralField& v, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("w1p_norm_sq: p must be > 1");
    const Grid& g = v.grid;
    const RealField vr = to_real(v);
    const RealField gr = to_real(gradient_field(v));
    const size_t nm = g.n_modes();
    double q = 0.0;
    for (size_t x = 0; x < nm; ++x) {
        double v2 = 0.0;
        for (int c = 0; c < v.n_comp; ++c) {
            const double val = vr.values[static_cast<size_t>(c) * nm + x];
            v2 += val * val;
        }
        double g2 = 0.0;
        for (int c = 0; c < v.n_comp * g.dim(); ++c) {
            const double val = gr.values[static_cast<size_t>(c) * nm + x];
            g2 += val * val;
        }
        q += std::pow(v2, p / 2.0) + std::pow(g2, p / 2.0);
    }
    q *= g.cell_volume();
    return std::pow(q, 2.0 / p);
}

NormKind norm_kind_from_name(std::string_view name) {
    if (name == "L2") return NormKind::L2;
    if (name == "H1") return NormKind::H1;
    if (name == "H2") return NormKind::H2;
    if (name == "V1diss") return NormKind::V1Diss;
    if (name == "V2curl") return NormKind::V2Curl;
    throw std::invalid_argument("unsupported norm tag: " + std::string(name));
}

double inner_product_l2(const SpectralField& u, const SpectralField& v) {
    check_same_grid(u, v, "inner_product_l2");
    if (u.n_comp != v.n_comp) throw std::invalid_argument("inner_product_l2: component mismatch");
    double s = 0.0;
    for (size_t i = 0; i < u.data.size(); ++i)
        s += u.data[i].real() * v.data[i].real() + u.data[i].imag() * v.data[i].imag();
    return s * u.grid.volume();
}

double discrete_korn(const DomainSpec& dom) {
    const double k2 = lambda1(dom);
    const double k4 = k2 * k2;
    return 0.5 * k4 / (1.0 + k2 + k4);
}

double max_abs_value(const SpectralField& v) {
    const RealField r = to_real(v);
    const size_t nm = v.grid.n_modes();
    double mx = 0.0;
    for (size_t x = 0; x < nm; ++x) {
        double a2 = 0.0;
        for (int c = 0; c < v.n_comp; ++c) {
            const double val = r.values[static_cast<size_t>(c) * nm + x];
            a2 += val * val;
        }
        mx = std::max(mx, a2);
    }
    return std::sqrt(mx);
}

double max_divergence(const SpectralField& v) {
    const Grid& g = v.grid;
    const double ku = g.k_unit();
    double mx = 0.0;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        cplx kc(0.0, 0.0);
        for (int d = 0; d < g.dim(); ++d) kc += ku * m[d] * v.at(d, idx);
        mx = std::max(mx, std::abs(kc));
    }
    return mx;
}

double max_reality_defect(const SpectralField& v) {
    const Grid& g = v.grid;
    double mx = 0.0;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        const size_t cdx = g.conjugate_index(idx);
        for (int c = 0; c < v.n_comp; ++c)
            mx = std::max(mx, std::abs(v.at(c, idx) - std::conj(v.at(c, cdx))));
    }
    return mx;
}

bool has_nan(const SpectralField& v) {
    for (const auto& z : v.data)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return true;
    return false;
}

size_t divfree_pair_dimension(const Grid& g) {
    const int kmax = g.dealias_kmax();
    size_t in_band = 0;
    for (size_t idx = 0; idx < g.n_modes(); ++idx) {
        auto m = g.wavevector(idx);
        bool keep = true, zero = true;
        for (int d = 0; d < g.dim(); ++d) {
            if (std::abs(m[d]) > kmax) keep = false;
            if (m[d] != 0) zero = false;
        }
        if (keep && !zero) ++in_band;
    }
    // each +-k pair carries 2*(dim-1) real div-free directions per field
    return 2 * in_band * static_cast<size_t>(g.dim() - 1);
}

int configured_threads() {
    const char* env = std::getenv("BPMHD_THREADS");
    if (!env) return 1;
    const int v = std::atoi(env);
    return v >= 1 ? v : 1;
}

}  // namespace bpmhd
