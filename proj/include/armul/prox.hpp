#pragma once

#include "armul/core.hpp"

namespace armul {

/// Proximal map of c * ||.||_2: (1 - c / ||x||)_+ x. Returns exact zero when
/// ||x|| <= c.
Vec group_soft_threshold(const Vec& x, double c);

/// sgn(x) (|x| - c)_+
double scalar_soft_threshold(double x, double c);

/// Huber loss: x^2 / 2 for |x| <= lam, lam (|x| - lam / 2) otherwise.
double huber_value(double x, double lam);
double huber_grad(double x, double lam);

}  // namespace armul
