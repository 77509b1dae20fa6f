#pragma once

#include <complex>
#include <vector>

namespace ltlab::fft {

using cplx = std::complex<double>;

// Unnormalized d-dimensional DFT over M^d row-major samples.
std::vector<cplx> forward(const std::vector<cplx>& in, int d, int M);
std::vector<cplx> backward(const std::vector<cplx>& in, int d, int M);

// angular wavenumber per index on a torus of side L; the Nyquist index maps to +M/2
std::vector<double> wavenumbers(int M, double L);

}  // namespace ltlab::fft
