#pragma once

#include <vector>

#include "momray/gridfield.hpp"

namespace momray {

// Regularised lattice sum: the integral of x^c/|x|^e over R^n minus its sum over
// the nonzero integer lattice, both defined by analytic continuation.  Cached.
double lattice_zeta(const Counts& c, int e);

struct StencilWeight {
    std::vector<int> offset;  // lattice offset in cells
    double w;
};

// Weights on the (order+1)^n box around the origin that restore the moments
// |beta| <= order of x^c/|x|^e lost by dropping the singular origin sample.
const std::vector<StencilWeight>& origin_correction(const Counts& c, int e, int order = 4);

// Kernel component x^c/|x|^e sampled on the padded grid (wrapped offsets), with
// the origin correction folded in.
std::vector<double> kernel_samples(const GridSpec& s, const Counts& c, int e, int order = 4);

// Normal operator of the momentum ray transform as a sum of FFT convolutions
// with homogeneous kernels.
GridTensorField normal_kernel(const GridTensorField& f, int k, int order = 4);

}  // namespace momray
