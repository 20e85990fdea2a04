#pragma once

// Scalar building blocks of the chain constructions.  Orders 0..2 are exact;
// order 3 is provided for Lipschitz-constant measurements only.

namespace sosp {

// exp(1 - 1/(2x-1)^2) for x > 1/2, zero otherwise.
double psi(double x, int order = 0);

// sqrt(e) * integral_{-inf}^{x} exp(-t^2/2) dt.
double phi(double x, int order = 0);

// 8 (exp(-x^2/2) - 1).
double lambda_fn(double x, int order = 0);

}  // namespace sosp
