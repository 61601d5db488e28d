#pragma once

#include <array>
#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "momray/symtensor.hpp"

namespace momray {

using cplx = std::complex<double>;

struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Uniform grid centred at the origin: node j on each axis sits at (j - N/2) h.
struct GridSpec {
    int n = 2;
    int N = 256;      // samples per axis, even
    double h = 0.125;
    int pad = 2;      // FFT grid is M = pad * N per axis

    void validate() const;
    int M() const { return pad * N; }
    double L() const { return N * h / 2; }  // half-width
    std::size_t nodes() const;
    std::size_t padded_nodes() const;
    std::size_t half_nodes() const;  // r2c output: M^(n-1) (M/2+1)
    double coord(int j) const { return (j - N / 2) * h; }
    double dy() const;               // frequency step 2 pi / (M h)
    bool operator==(const GridSpec& o) const { return n == o.n && N == o.N && h == o.h && pad == o.pad; }
    bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

// Position of grid node lin (row major, axis 0 slowest).
void node_coords(const GridSpec& s, std::size_t lin, double* x);

class GridTensorField {
public:
    GridTensorField() = default;
    GridTensorField(const GridSpec& s, int m);

    const GridSpec& spec() const { return spec_; }
    int rank() const { return m_; }
    int n() const { return spec_.n; }
    std::size_t ncomp() const { return c_.size(); }
    const IndexTable& table() const { return index_table(spec_.n, m_); }
    std::vector<double>& comp(std::size_t i) { return c_[i]; }
    const std::vector<double>& comp(std::size_t i) const { return c_[i]; }
    std::vector<double>& comp(const std::vector<int>& idx) { return c_[table().find_entries(idx)]; }

    SymTensor<double> at(std::size_t lin) const;
    void set(std::size_t lin, const SymTensor<double>& t);

    GridTensorField& operator+=(const GridTensorField& o);
    GridTensorField& operator-=(const GridTensorField& o);
    GridTensorField& operator*=(double s);
    friend GridTensorField operator+(GridTensorField a, const GridTensorField& b) { return a += b; }
    friend GridTensorField operator-(GridTensorField a, const GridTensorField& b) { return a -= b; }
    friend GridTensorField operator*(GridTensorField a, double s) { return a *= s; }
    friend GridTensorField operator*(double s, GridTensorField a) { return a *= s; }
    // pointwise product with a scalar array
    GridTensorField& scale_by(const std::vector<double>& w);

    void check_same(const GridTensorField& o) const;

private:
    GridSpec spec_;
    int m_ = 0;
    std::vector<std::vector<double>> c_;
};

// Continuum Fourier transform samples on the half spectrum of the padded grid.
struct FourierField {
    GridSpec spec;
    int m = 0;
    std::vector<std::vector<cplx>> c;
    std::size_t ncomp() const { return c.size(); }
};

// Padded FFT plumbing for one grid.  Plans are cached per (n, M).
class Spectral {
public:
    explicit Spectral(const GridSpec& s);
    ~Spectral();
    Spectral(const Spectral&) = delete;
    Spectral& operator=(const Spectral&) = delete;

    const GridSpec& spec() const { return spec_; }
    std::size_t half() const { return half_; }
    // wavenumber component a at half-spectrum index i
    double k(int a, std::size_t i) const;
    double kabs(std::size_t i) const;
    // Raw DFT of the zero-padded field, origin at index 0.
    void forward(const std::vector<double>& a, std::vector<cplx>& out) const;
    // Inverse of forward followed by a crop back to the N grid.
    void inverse(const std::vector<cplx>& in, std::vector<double>& out) const;
    // DFT of a full padded array (M^n, row major, no embedding).
    void forward_padded(const std::vector<double>& a, std::vector<cplx>& out) const;

private:
    GridSpec spec_;
    std::size_t half_;
    std::vector<int> embed_idx_;  // per axis: N index -> M index
    std::vector<double> kax_;     // per-axis wavenumbers, full axis
    double* rbuf_;
    void* cbuf_;
    void* plan_f_;
    void* plan_b_;
    void half_index(std::size_t i, int* j) const;
};

// Shared engine for a grid.  Not safe for concurrent FFT calls on one grid.
Spectral& spectral_engine(const GridSpec& s);
// |y| and y_a on the half spectrum, cached per grid.
const std::vector<double>& wave_abs(const GridSpec& s);
const std::vector<double>& wave_axis(const GridSpec& s, int a);

struct GaussianBlob {
    std::vector<double> center;
    double width = 1;
    SymTensor<double> tensor;
};

// Throws invalid_input if a blob is too wide (6 w > L) or reaches the box edge.
GridTensorField gaussian_phantom(const GridSpec& s, int m, const std::vector<GaussianBlob>& blobs);
std::vector<GaussianBlob> default_blobs(int n, int m, double scale = 1.0);

FourierField fft_field(const GridTensorField& f);
GridTensorField ifft_field(const FourierField& F);

GridTensorField frac_laplacian(const GridTensorField& f);
GridTensorField spectral_d(const GridTensorField& f);
GridTensorField spectral_div(const GridTensorField& f);
GridTensorField spectral_d_pow(GridTensorField f, int k);
GridTensorField spectral_div_pow(GridTensorField f, int k);

GridTensorField contract_x(const GridTensorField& f);  // j_x
GridTensorField contract_x_pow(GridTensorField f, int k);
GridTensorField delta_mul(const GridTensorField& f);   // i
GridTensorField trace(const GridTensorField& f);       // j
GridTensorField delta_mul_pow(GridTensorField f, int k);
GridTensorField trace_pow(GridTensorField f, int k);
// sym(x^k f) pointwise
GridTensorField mul_xpow(const GridTensorField& f, int k);
// Pointwise j_v for a constant tensor v.
GridTensorField contract_const(const GridTensorField& f, const SymTensor<double>& v);

// c^k sum_p (n+2m-2p-3)!! sum_q (-1)^q / (2^q q! (m-p-q)! (p-k-q)!) d^(p-q) i^q j^q j_x^(p-k-q) div^k
GridTensorField apply_D(const GridTensorField& f, int m, int k);

// Multiplicity-weighted L2 norm over the box |x_i| <= frac * L.
double l2_norm(const GridTensorField& f, double frac = 0.5);
double inner(const GridTensorField& f, const GridTensorField& g, double frac = 1.0);
// ||f - g|| / ||g|| over the central box.  Throws if ||g|| = 0.
double rel_error(const GridTensorField& f, const GridTensorField& g, double frac = 0.5);

// prod_i erfc((|x_i| - c) / w) / 2 with w = width_cells * h and c = L - offset * w.
std::vector<double> edge_taper(const GridSpec& s, double width_cells = 3.0, double offset = 4.0);

// Container: one JSON header line, then little-endian float64 components.
void write_field(const GridTensorField& f, const std::string& path);
GridTensorField read_field(const std::string& path);
// x1,x2,component... through the plane x_3 = 0 (n = 3) or the whole grid (n = 2).
void write_slice_csv(const GridTensorField& f, const std::string& path);
// Profile along axis 0 through the origin.
void write_profile_csv(const GridTensorField& f, const std::string& path);

}  // namespace momray
