#pragma once

#include <vector>

#include "oscq/linalg.hpp"

namespace oscq {

/// Parlett-Reinsch balancing with radix-2 scaling. Returns the diagonal
/// similarity D with balanced = D^{-1} A D; eigenvalues are unchanged.
Vector balance(Matrix& a);

/// Householder reduction to upper Hessenberg form, in place.
void reduce_to_hessenberg(Matrix& a);

/// Full spectrum of a real square matrix: balancing, Hessenberg reduction and
/// Francis double-shift QR. Sorted by descending modulus; ties (relative
/// 1e-12) broken by descending real part, then descending imaginary part.
/// Throws EigenError after 100*n QR sweeps without convergence.
std::vector<Complex> eigen_spectrum(const Matrix& a);

/// Ordering used by eigen_spectrum.
void sort_spectrum(std::vector<Complex>& values);

/// Unit eigenvector for an (approximate) eigenvalue by complex inverse iteration.
ComplexVector eigenvector(const Matrix& a, Complex lambda);

} // namespace oscq
