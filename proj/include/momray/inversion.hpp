#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "momray/gridfield.hpp"
#include "momray/raytransform.hpp"

namespace momray {

struct InversionOptions {
    bool taper = true;          // erfc edge taper on the data before D
    double taper_width = 3.0;   // cells
    double taper_offset = 4.0;  // widths from the box edge
    double roi = 0.5;           // error box |x_i| <= roi * L
};

// Mid-band annulus |y| in [lo * dy, hi * y_Nyquist].
struct Annulus {
    double lo_cells = 4.0;
    double hi_frac = 0.5;
};

// N_m^k f for k = 0..m, either by kernel convolution or by line quadrature.
std::vector<GridTensorField> normal_data(const GridTensorField& f, const std::string& source,
                                         const LineConfig& lines = {}, int threads = 1);

// Data after the optional taper; shared by all inversion paths.
GridTensorField prepared(const GridTensorField& d, const InversionOptions& opt);

struct ReconReport {
    int m = 0;
    int n = 0;
    std::vector<double> op_norms;          // ||D^k N^k|| over the roi
    double rel_error = -1;                 // vs ground truth when known
    std::vector<double> consistency;       // ||j_y^(k+1) N^k^|| / || |y|^(k+1) N^k^ ||
    std::vector<double> consistency_F;     // ||j_y F^(m,k)|| / || |y| F^(m,k) ||
    std::vector<double> fourier_residual;  // A/(d^k g) against F^(m,k), when truth known
    double runtime_s = 0;
    nlohmann::json to_json() const;
};

GridTensorField invert_full(const std::vector<GridTensorField>& data, const InversionOptions& opt = {},
                            ReconReport* rep = nullptr);
// Direct transcriptions of the rank 1 and rank 2 formulas.
GridTensorField invert_m1(const std::vector<GridTensorField>& data, const InversionOptions& opt = {});
GridTensorField invert_m2(const std::vector<GridTensorField>& data, const InversionOptions& opt = {});

// The Fourier-side residuals below see the datum through a smooth window on the
// central roi box; see the notes in the source.
// Relative size of j_y^(k+1) of the transformed datum over the annulus; 0 for k = m.
double consistency_residual(const GridTensorField& Nk, int m, int k, const InversionOptions& opt = {},
                            const Annulus& band = {});
// Same test applied to F^(m,k); 0 for k = m.
double consistency_residual_F(const GridTensorField& Nk, int m, int k, const InversionOptions& opt = {},
                              const Annulus& band = {});

// Mismatch of A^(m,0)/(d^k f^) against F^(m,k) from the datum.
double fourier_system_residual(const GridTensorField& f, const GridTensorField& Nk, int k,
                               const InversionOptions& opt = {}, const Annulus& band = {}, int lhs_pad = 8);

// Random smooth rank m field from a few Gaussian bumps, for perturbation runs.
GridTensorField smooth_noise(const GridSpec& s, int m, double amplitude, std::uint64_t seed);

// Constant c with f^ ~ c |y| N_0^0 f^, fitted over the annulus (m = 0 data).
double measured_inversion_constant(const GridTensorField& f, const GridTensorField& N0, const Annulus& band = {});

// Full round trip on a phantom: data, inversion, report.
struct RoundTrip {
    GridTensorField truth;
    GridTensorField recon;
    std::vector<GridTensorField> data;
    ReconReport report;
};
RoundTrip round_trip(const GridTensorField& f, const std::string& source, const InversionOptions& opt = {},
                     const LineConfig& lines = {}, int threads = 1, bool diagnostics = true);

}  // namespace momray
