#pragma once

#include "sosp/rng.hpp"

namespace sosp {

struct SymEig {
  Vec values;   // ascending
  Mat vectors;  // columns match values
};

// Dense symmetric eigendecomposition; rejects non-symmetric input.
SymEig sym_eig(const Mat& H);
// Eigendecomposition of a symmetric tridiagonal matrix given its bands.
SymEig tridiag_eig(const Vec& diag, const Vec& offdiag);
// Chooses the banded path when H has no entries off the three central bands.
SymEig sym_eig_auto(const Mat& H, bool assume_tridiagonal);

double lambda_min(const Mat& H, bool assume_tridiagonal = false);
bool is_symmetric(const Mat& H, double rel_tol = 0.0);

}  // namespace sosp
