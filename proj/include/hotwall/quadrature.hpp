#pragma once

// Log-space quadrature on subsets of (0, inf) with finiteness certification.

#include <functional>

namespace hotwall::quad {

using Fn = std::function<double(double)>;

enum class Status { converged, divergent, inconclusive };

struct LogIntegral {
  double log_value;
  Status status;
};

/// log of the integral of exp(lf) over [a, b], 0 < a < b < inf. Intervals with
/// b/a > 2 are split into dyadic pieces, each scaled by its own maximum.
double log_integrate_finite(const Fn& lf, double a, double b);

/// log of the integral of exp(ly) over [y0, inf). The integral is carried out
/// on pieces [y0 2^k, y0 2^(k+1)] up to 1e300; the trend of the piece sizes at
/// the far end decides between convergence and divergence.
LogIntegral log_integrate_tail(const Fn& ly, double y0, double tol);

/// log of the integral of exp(lf) over (a, b) with 0 <= a < b <= inf. A zero
/// lower end is handled by substituting u = 1/x.
LogIntegral log_integrate_range(const Fn& lf, double a, double b, double tol);

/// Integral of a signed integrable f over (a, b), 0 <= a < b <= inf.
double integrate_range(const Fn& f, double a, double b, double tol);

/// Integral over [a, b] with 20-point Gauss-Legendre.
double gauss_legendre(const Fn& f, double a, double b);

}  // namespace hotwall::quad
