#include "armul/linalg.hpp"

#include <cmath>

namespace armul::linalg {

namespace {

// Deterministic, non-degenerate starting vector.
Vec start_vector(Eigen::Index d, int salt) {
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * std::sin(1.7 * static_cast<double>(i + 1) + salt);
  return v.normalized();
}

void orthogonalize(Vec& v, const Mat& basis, Eigen::Index cols) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index c = 0; c < cols; ++c) v -= basis.col(c).dot(v) * basis.col(c);
  }
}

}  // namespace

double max_eigenvalue_psd(const Mat& a, double tol, int max_iters) {
  const Eigen::Index d = a.rows();
  if (d == 0) return 0.0;
  if (d == 1) return std::max(a(0, 0), 0.0);
  Vec v = start_vector(d, 0);
  double prev = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vec w = a * v;
    double rq = v.dot(w);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 0 && std::abs(rq - prev) <= tol * std::abs(rq)) {
      // Both estimates approach from below.
      return std::max(rq, nw) * (1.0 + 10.0 * tol);
    }
    prev = rq;
  }
  return (a * v).norm() * (1.0 + 10.0 * tol);
}

Mat top_eigenvectors(const Mat& a, int k, Vec* values, double tol, int max_iters) {
  const Eigen::Index d = a.rows();
  Mat vecs = Mat::Zero(d, k);
  Vec vals = Vec::Zero(k);
  for (int c = 0; c < k; ++c) {
    Vec v = start_vector(d, c + 1);
    orthogonalize(v, vecs, c);
    if (v.norm() < 1e-12) {
      v = Vec::Unit(d, c % d);
      orthogonalize(v, vecs, c);
    }
    v.normalize();
    for (int it = 0; it < max_iters; ++it) {
      Vec w = a * v;
      orthogonalize(w, vecs, c);
      double nw = w.norm();
      if (nw < 1e-300) {
        // Remaining spectrum is zero; any orthonormal completion works.
        break;
      }
      w /= nw;
      double change = std::min((w - v).norm(), (w + v).norm());
      v = w;
      if (change <= tol) break;
    }
    orthogonalize(v, vecs, c);
    v.normalize();
    vecs.col(c) = v;
    vals[c] = v.dot(a * v);
  }
  if (values) *values = vals;
  return vecs;
}

Mat top_left_singular_vectors(const Mat& x, int k) {
  Mat gram = x * x.transpose();
  return top_eigenvectors(gram, k);
}

void thin_qr(const Mat& m, Mat& q, Mat& r) {
  Eigen::HouseholderQR<Mat> qr(m);
  const Eigen::Index k = std::min(m.rows(), m.cols());
  q = qr.householderQ() * Mat::Identity(m.rows(), k);
  r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
}

}  // namespace armul::linalg
