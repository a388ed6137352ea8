#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>
#include <vector>

#include "bpmhd/params.hpp"

namespace bpmhd {

using cplx = std::complex<double>;

/// Index arithmetic for the N^dim Fourier lattice of a periodic box.
/// Axis index i in [0,N) carries integer wavenumber m = i for i < N/2 and
/// m = i - N otherwise (standard FFT ordering).
class Grid {
public:
    Grid() = default;
    explicit Grid(const DomainSpec& dom);

    int dim() const { return dim_; }
    int n() const { return n_; }
    double length() const { return length_; }
    size_t n_modes() const { return n_modes_; }
    double dx() const { return length_ / n_; }
    double k_unit() const { return k_unit_; }  ///< 2*pi / L
    double cell_volume() const;                ///< (L/N)^dim
    double volume() const;                     ///< L^dim

    /// Largest retained integer wavenumber of the 2/3-rule truncation.
    /// Chosen as the largest K with 3K < N so that quadratic products of
    /// band-limited fields alias only onto removed modes.
    int dealias_kmax() const { return dealias_kmax_; }

    int mode_of(int axis_index) const { return axis_index < n_ / 2 ? axis_index : axis_index - n_; }
    int index_of(int mode) const { return mode >= 0 ? mode : mode + n_; }

    size_t flat(int ix, int iy, int iz = 0) const {
        return dim_ == 2 ? static_cast<size_t>(ix) * n_ + iy
                         : (static_cast<size_t>(ix) * n_ + iy) * n_ + iz;
    }
    std::array<int, 3> axis_indices(size_t flat_idx) const;
    /// Integer wavevector of a flat mode index (third entry 0 in 2D).
    std::array<int, 3> wavevector(size_t flat_idx) const;
    /// Flat index of the conjugate lattice point -m.
    size_t conjugate_index(size_t flat_idx) const;

    bool operator==(const Grid& o) const {
        return dim_ == o.dim_ && n_ == o.n_ && length_ == o.length_;
    }

private:
    int dim_ = 2;
    int n_ = 0;
    double length_ = 0.0;
    double k_unit_ = 0.0;
    size_t n_modes_ = 0;
    int dealias_kmax_ = 0;
};

/// Vector (or scalar, n_comp = 1) field stored as normalized Fourier
/// coefficients: v(x) = sum_k coeff(k) exp(i k.x).  Real-valued fields
/// satisfy coeff(-k) = conj(coeff(k)); solver states are additionally
/// mean-zero and divergence-free.
struct SpectralField {
    Grid grid;
    int n_comp = 0;
    std::vector<cplx> data;  // component-major: data[c * n_modes + mode]

    SpectralField() = default;
    SpectralField(const Grid& g, int ncomp)
        : grid(g), n_comp(ncomp), data(static_cast<size_t>(ncomp) * g.n_modes()) {}

    cplx& at(int comp, size_t mode) { return data[static_cast<size_t>(comp) * grid.n_modes() + mode]; }
    cplx at(int comp, size_t mode) const { return data[static_cast<size_t>(comp) * grid.n_modes() + mode]; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Collocation values, component-major, n_comp * N^dim reals.
struct RealField {
    Grid grid;
    int n_comp = 0;
    std::vector<double> values;
};

// -- transforms ---------------------------------------------------------

RealField to_real(const SpectralField& f);
SpectralField from_real(const RealField& r);

// -- constructors -------------------------------------------------------

SpectralField zero_field(const Grid& g, int n_comp);
SpectralField zero_vector_field(const Grid& g);

/// amp * cos(k.x + phase) * e with k = k_unit * m; the polarization e is
/// projected orthogonal to k, so the result is divergence-free.
SpectralField single_mode_field(const Grid& g, const std::array<int, 3>& m,
                                const std::array<double, 3>& polarization, double amp,
                                double phase = 0.0);

/// Divergence-free random field supported on the integer-wavenumber band
/// band_lo <= |m| <= band_hi, normalized so the L2 norm equals `amplitude`
/// (when amplitude > 0).  Deterministic in `seed`.
SpectralField random_band_field(const Grid& g, uint64_t seed, int band_lo, int band_hi,
                                double amplitude);

// -- pointwise / per-mode operators --------------------------------------

/// Removes the gradient part per mode: c -= k (k.c)/|k|^2; zeroes the mean.
/// Idempotent and self-adjoint in the discrete L2 inner product.
SpectralField leray_project(SpectralField v);
void leray_project_inplace(SpectralField& v);

/// Symmetrizes coefficients so the field is exactly real-valued.
void enforce_reality_inplace(SpectralField& v);

/// Zeroes all modes with any |m_i| > dealias_kmax.
SpectralField dealias(SpectralField v);
void dealias_inplace(SpectralField& v);

/// i k x v.  Returns a 3-component field in 3D, a scalar field in 2D.
SpectralField curl(const SpectralField& v);
/// 2D only: curl of a scalar stream-type field, (d2 s, -d1 s).
SpectralField curl_of_scalar(const SpectralField& s);

/// Per-mode spectral derivative along `axis`.
SpectralField derivative(const SpectralField& v, int axis);

/// Minus Laplacian: |k|^2 multiplier.
SpectralField minus_laplacian(const SpectralField& v);

// -- nonlinear term -------------------------------------------------------

/// Dealiased pseudo-spectral (u . grad) v, reality-enforced, NOT projected.
/// Operands are expected band-limited to the dealias band (the integrator
/// maintains this); exact conservation identities hold in that case.
SpectralField advect(const SpectralField& u, const SpectralField& v);

// -- norms / inner products ----------------------------------------------

enum class NormKind { L2, H1, H2, V1Diss, V2Curl };

/// Parseval symbol sums, all times L^dim:
///   L2: sum |v|^2            H1: sum (1+|k|^2)|v|^2
///   H2: sum (1+|k|^2+|k|^4)|v|^2
///   V1Diss: sum |k|^4 |v|^2 / 2   (equals (dE/dx_k, dE/dx_k) on div-free fields)
///   V2Curl: sum |k|^2 |v|^2       (equals |curl v|^2 on div-free fields)
double sobolev_norm_sq(const SpectralField& v, NormKind kind);

/// Collocation quadrature of ( integral |v|^p + |grad v|^p )^(2/p), p > 1.
double w1p_norm_sq(const SpectralField& v, double p);

/// Resolves "L2", "H1", "H2", "V1diss", "V2curl"; throws std::invalid_argument
/// on an unsupported tag.  "W1p" is reached through w1p_norm_sq.
NormKind norm_kind_from_name(std::string_view name);

/// Discrete L2 inner product (u, v) = L^dim sum_k u(k) . conj(v(k)), real part.
double inner_product_l2(const SpectralField& u, const SpectralField& v);

/// Discrete Korn constant of the box: min over the lattice of V1Diss/H2 on
/// mean-zero divergence-free fields, attained at |k| = k_min:
///   K = (1/2) k_min^4 / (1 + k_min^2 + k_min^4).
double discrete_korn(const DomainSpec& dom);

// -- diagnostics -----------------------------------------------------------

double max_abs_value(const SpectralField& v);       ///< max over grid of |v(x)|
double max_divergence(const SpectralField& v);      ///< max_k |k . v(k)|
double max_reality_defect(const SpectralField& v);  ///< max_k |v(k) - conj(v(-k))|
bool has_nan(const SpectralField& v);

/// Number of real degrees of freedom of the divergence-free, mean-zero,
/// band-limited pair space (velocity + magnetic); bounds the ensemble size m.
size_t divfree_pair_dimension(const Grid& g);

/// Branch-parallelism cap read from BPMHD_THREADS (default 1).
int configured_threads();

}  // namespace bpmhd
