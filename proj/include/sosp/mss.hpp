#pragma once

#include <vector>

#include "sosp/oracle.hpp"

namespace sosp {

// (g(x + delta u, z) - g(x, z)) / delta under one shared draw.  Needs an
// n-point oracle with n >= 2; costs one gradient query.
Vec finite_diff_hvp(StochasticOracle& oracle, const Vec& x, const Vec& u, double delta);

struct MssProbe {
  double separation;  // |x - y|
  double ratio;       // E|g(x,z) - g(y,z) - (grad F(x) - grad F(y))|^2 / |x - y|^2
  bool antipodal;     // pair symmetric about the origin
};

struct MssReport {
  double max_ratio = 0.0;
  double bound = 0.0;  // sigma2^2
  bool within_bound = false;
  bool diverging = false;  // ratio grows without bound as pairs shrink
  std::vector<MssProbe> probes;
};

struct MssOptions {
  int samples = 2000;
  double tolerance = 0.1;
  uint64_t seed = 7;
  // Skip the Jacobian-consistency precondition (for counterexamples).
  bool diagnostic = false;
};

// Monte Carlo estimate of the mean-squared smoothness quotient over pairs at
// separations 1 .. 1e-4, half random, half symmetric about the origin.
MssReport verify_mss_equivalence(StochasticOracle& oracle, const MssOptions& opt = {});

}  // namespace sosp
