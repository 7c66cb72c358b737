#include "armul/prox.hpp"

#include <cmath>

namespace armul {

Vec group_soft_threshold(const Vec& x, double c) {
  if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold must be non-negative");
  const double norm = x.norm();
  if (norm <= c) return Vec::Zero(x.size());
  return (1.0 - c / norm) * x;
}

double scalar_soft_threshold(double x, double c) {
  if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "threshold must be non-negative");
  const double mag = std::abs(x) - c;
  if (mag <= 0.0) return 0.0;
  return x > 0.0 ? mag : -mag;
}

double huber_value(double x, double lam) {
  if (!(lam > 0.0)) throw Error(ErrorCode::InvalidArgument, "Huber parameter must be positive");
  const double a = std::abs(x);
  return a <= lam ? 0.5 * x * x : lam * (a - 0.5 * lam);
}

double huber_grad(double x, double lam) {
  if (!(lam > 0.0)) throw Error(ErrorCode::InvalidArgument, "Huber parameter must be positive");
  if (x > lam) return lam;
  if (x < -lam) return -lam;
  return x;
}

}  // namespace armul
