#pragma once

#include "sosp/linalg.hpp"

namespace sosp {

// <g, s> + 1/2 <s, H s> + (M/6)|s|^3 over the ball |s| <= radius.
struct CubicModel {
  Vec g;
  Mat H;
  double M = 1.0;
  double radius = 1.0;
  double value(const Vec& s) const;
};

struct CubicSolution {
  Vec s;
  double multiplier = 0.0;  // ball multiplier mu >= 0
  double residual = 0.0;    // |g + H s + (M/2)|s| s + mu s|
  bool hard_case = false;
  bool on_boundary = false;
  bool converged = false;  // residual <= tol (|g| + 1)
  double model_value = 0.0;
};

CubicSolution solve_cubic_tr(const CubicModel& model, double tol = 1e-10, bool assume_tridiagonal = false);

// |s(theta)| with s(theta) = -(H + theta I)^{-1} g, evaluated in the eigenbasis.
// Non-increasing for theta > max(0, -lambda_min).
double secular_norm(const SymEig& eig, const Vec& g_eigen, double theta);

}  // namespace sosp
