#include "sosp/cubic.hpp"

#include <cmath>
#include <limits>

#include "sosp/errors.hpp"

namespace sosp {

double CubicModel::value(const Vec& s) const {
  const double n = s.norm();
  return g.dot(s) + 0.5 * s.dot(H * s) + M / 6.0 * n * n * n;
}

double secular_norm(const SymEig& eig, const Vec& ghat, double theta) {
  double acc = 0.0;
  for (int i = 0; i < ghat.size(); ++i) {
    if (ghat[i] == 0.0) continue;
    const double den = eig.values[i] + theta;
    if (den <= 0.0) return std::numeric_limits<double>::infinity();
    const double c = ghat[i] / den;
    acc += c * c;
  }
  return std::sqrt(acc);
}

namespace {

struct Frame {
  SymEig eig;
  Vec ghat;
  Vec shift;  // lambda_i + theta_lo, exactly zero for the bottom index when theta_lo = -lambda_1
  double lo = 0.0;
  double M = 1.0;
  double radius = 1.0;

  double target(double t) const { return std::min(2.0 * (lo + t) / M, radius); }

  // Step in the eigenbasis at theta = lo + t, skipping indices in `skip`.
  Vec coords(double t, int skip_below = 0) const {
    Vec c = Vec::Zero(ghat.size());
    for (int i = skip_below; i < ghat.size(); ++i) {
      if (ghat[i] == 0.0) continue;
      c[i] = -ghat[i] / (shift[i] + t);
    }
    return c;
  }
};

CubicSolution finish(const CubicModel& m, const Frame& fr, Vec c, bool hard, double tol) {
  CubicSolution sol;
  sol.hard_case = hard;
  sol.s = fr.eig.vectors * c;
  double n = sol.s.norm();
  if (n > m.radius) {
    sol.s *= m.radius / n;
    n = m.radius;
  }
  sol.on_boundary = n >= m.radius * (1.0 - 1e-12);
  // Choose mu to minimize the residual along s: the gradient equation holds
  // with theta, so the best mu is theta - (M/2)|s| clipped at zero.
  const Vec base = m.g + m.H * sol.s + (0.5 * m.M * n) * sol.s;
  double mu = 0.0;
  if (sol.on_boundary && n > 0.0) mu = std::max(0.0, -base.dot(sol.s) / (n * n));
  sol.multiplier = mu;
  sol.residual = (base + mu * sol.s).norm();
  sol.converged = sol.residual <= tol * (m.g.norm() + 1.0);
  sol.model_value = m.value(sol.s);
  return sol;
}

bool better(const CubicSolution& a, const CubicSolution& b) {
  if (a.converged != b.converged) return a.converged;
  if (a.converged) return a.model_value < b.model_value - 1e-15 * (1.0 + std::fabs(b.model_value));
  return a.residual < b.residual;
}

}  // namespace

CubicSolution solve_cubic_tr(const CubicModel& model, double tol, bool assume_tridiagonal) {
  const int d = int(model.g.size());
  if (model.H.rows() != d || model.H.cols() != d) throw InputError("cubic: shape mismatch");
  if (!is_symmetric(model.H, 1e-12)) throw InputError("cubic: H must be symmetric");
  if (!(model.M > 0.0) || !(model.radius > 0.0) || !(tol > 0.0)) throw InputError("cubic: M, radius, tol must be > 0");

  Frame fr;
  fr.eig = sym_eig_auto(model.H, assume_tridiagonal);
  fr.M = model.M;
  fr.radius = model.radius;
  // Fix the sign of each eigenvector: largest-magnitude entry positive.
  for (int j = 0; j < d; ++j) {
    Eigen::Index k;
    fr.eig.vectors.col(j).cwiseAbs().maxCoeff(&k);
    if (fr.eig.vectors(k, j) < 0.0) fr.eig.vectors.col(j) *= -1.0;
  }
  fr.ghat = fr.eig.vectors.transpose() * model.g;
  const double l1 = fr.eig.values[0];
  fr.lo = std::max(0.0, -l1);
  fr.shift.resize(d);
  for (int i = 0; i < d; ++i) fr.shift[i] = fr.lo == -l1 ? fr.eig.values[i] - l1 : fr.eig.values[i];

  const double scale = std::max(1.0, fr.eig.values.cwiseAbs().maxCoeff());
  int cluster = 0;
  while (cluster < d && fr.shift[cluster] <= 1e-12 * scale) ++cluster;
  const double gnorm = model.g.norm();

  CubicSolution best;
  bool have = false;
  auto consider = [&](CubicSolution s) {
    if (!have || better(s, best)) {
      best = std::move(s);
      have = true;
    }
  };

  // Hard-case construction: drop the bottom cluster and top up along q_1.
  if (cluster > 0) {
    const Vec c = fr.coords(0.0, cluster);
    const double np = c.norm(), tgt = fr.target(0.0);
    if (np <= tgt) {
      Vec ch = c;
      ch[0] = std::sqrt(std::max(0.0, tgt * tgt - np * np));
      consider(finish(model, fr, ch, true, tol));
    }
  }

  // Secular bisection on t = theta - lo: phi(t) = |s| - target is decreasing.
  auto phi = [&](double t) { return fr.coords(t).norm() - fr.target(t); };
  if (gnorm > 0.0 || fr.lo == 0.0) {
    double a = 0.0;
    double b = std::max(1e-300, 0.5 * model.M * model.radius + gnorm / std::max(model.radius, 1e-300));
    while (phi(b) > 0.0) b *= 2.0;
    if (phi(a) > 0.0) {
      for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        (phi(mid) > 0.0 ? a : b) = mid;
      }
      for (double t : {a, b}) {
        const Vec c = fr.coords(t);
        if (c.allFinite()) consider(finish(model, fr, c, false, tol));
      }
    } else {
      consider(finish(model, fr, fr.coords(0.0), false, tol));
    }
  }
  if (!have) consider(finish(model, fr, Vec::Zero(d), false, tol));
  return best;
}

}  // namespace sosp
