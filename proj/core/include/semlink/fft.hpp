#pragma once

#include <complex>
#include <vector>

namespace semlink {

using cplx = std::complex<double>;

// Mixed-radix Cooley-Tukey DFT for arbitrary lengths (prime factors handled
// by a direct DFT at the leaves). Twiddle tables are cached per length.
//
// Unnormalized transforms:
//   dft(x)[k]  = sum_n x[n] exp(-2*pi*i*n*k/N)
//   idft(x)[n] = sum_k x[k] exp(+2*pi*i*n*k/N)
std::vector<cplx> dft(const std::vector<cplx>& x);
std::vector<cplx> idft(const std::vector<cplx>& x);

// Symmetric (orthonormal) convention, 1/sqrt(N) in both directions.
// Preserves total energy between the two domains.
std::vector<cplx> fft_forward(const std::vector<cplx>& x);
std::vector<cplx> fft_inverse(const std::vector<cplx>& x);

} // namespace semlink
