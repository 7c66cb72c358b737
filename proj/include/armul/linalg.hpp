#pragma once

#include "armul/core.hpp"

namespace armul::linalg {

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration, relative tolerance `tol` on successive Rayleigh quotients.
double max_eigenvalue_psd(const Mat& a, double tol = 1e-8, int max_iters = 10000);

/// Top-k eigenvectors of a symmetric PSD matrix by power iteration with
/// deflation. Columns are orthonormal; eigenvalues returned in `values`.
Mat top_eigenvectors(const Mat& a, int k, Vec* values = nullptr, double tol = 1e-13,
                     int max_iters = 20000);

/// Top-k left singular vectors of `x` (columns orthonormal).
Mat top_left_singular_vectors(const Mat& x, int k);

/// Orthonormal basis Q and upper-triangular R with m = Q R (thin QR).
void thin_qr(const Mat& m, Mat& q, Mat& r);

}  // namespace armul::linalg
