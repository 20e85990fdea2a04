#include "sosp/chain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>

#include "sosp/components.hpp"
#include "sosp/errors.hpp"
#include "sosp/linalg.hpp"

namespace sosp {

std::string to_string(ChainKind k) { return k == ChainKind::eps_chain ? "eps_chain" : "gamma_chain"; }

int prog(const Vec& x, double threshold) {
  for (int i = int(x.size()); i >= 1; --i)
    if (std::fabs(x[i - 1]) > threshold) return i;
  return 0;
}

namespace {

double xi(ChainKind k, double v, int order) { return k == ChainKind::eps_chain ? phi(v, order) : lambda_fn(v, order); }
double link_sign(ChainKind k) { return k == ChainKind::eps_chain ? -1.0 : 1.0; }

}  // namespace

ChainFunction::ChainFunction(ChainKind kind, int T, double alpha, double beta)
    : kind_(kind), T_(T), alpha_(alpha), beta_(beta) {
  if (T < 1) throw ConfigError("chain: T must be >= 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("chain: alpha and beta must be > 0");
}

double ChainFunction::link(double p, double q, int m, int n) const {
  const double s = ((m + n) % 2 == 0) ? 1.0 : -1.0;
  return s * psi(-p, m) * xi(kind_, -q, n) + link_sign(kind_) * psi(p, m) * xi(kind_, q, n);
}

double ChainFunction::raw_value(const Vec& y) const {
  double v = 0.0, prev = 1.0;
  for (int t = 0; t < T_; ++t) {
    v += link(prev, y[t], 0, 0);
    prev = y[t];
  }
  return v;
}

Vec ChainFunction::raw_gradient(const Vec& y) const {
  Vec g(T_);
  for (int j = 0; j < T_; ++j) {
    const double p = j == 0 ? 1.0 : y[j - 1];
    g[j] = link(p, y[j], 0, 1);
    if (j + 1 < T_) g[j] += link(y[j], y[j + 1], 1, 0);
  }
  return g;
}

Mat ChainFunction::raw_hessian(const Vec& y) const {
  Mat H = Mat::Zero(T_, T_);
  for (int j = 0; j < T_; ++j) {
    const double p = j == 0 ? 1.0 : y[j - 1];
    H(j, j) = link(p, y[j], 0, 2);
    if (j + 1 < T_) {
      H(j, j) += link(y[j], y[j + 1], 2, 0);
      const double off = link(y[j], y[j + 1], 1, 1);
      H(j, j + 1) = off;
      H(j + 1, j) = off;
    }
  }
  return H;
}

double ChainFunction::value(const Vec& x) const { return alpha_ * raw_value(beta_ * x); }
Vec ChainFunction::gradient(const Vec& x) const { return (alpha_ * beta_) * raw_gradient(beta_ * x); }
Mat ChainFunction::hessian(const Vec& x) const { return (alpha_ * beta_ * beta_) * raw_hessian(beta_ * x); }

Vec ChainFunction::hvp(const Vec& x, const Vec& v) const {
  const Vec y = beta_ * x;
  Vec out(T_);
  const double s = alpha_ * beta_ * beta_;
  for (int j = 0; j < T_; ++j) {
    const double p = j == 0 ? 1.0 : y[j - 1];
    double d = link(p, y[j], 0, 2);
    double acc = 0.0;
    if (j + 1 < T_) {
      d += link(y[j], y[j + 1], 2, 0);
      acc += link(y[j], y[j + 1], 1, 1) * v[j + 1];
    }
    if (j > 0) acc += link(y[j - 1], y[j], 1, 1) * v[j - 1];
    out[j] = s * (d * v[j] + acc);
  }
  return out;
}

// ---------------------------------------------------------------- constants

namespace {

struct TripleMetrics {
  double g = 0.0, row = 0.0, third = 0.0;
};

// Metrics of coordinate j given (x_{j-1}, x_j, x_{j+1}); `tail` says whether
// the link to x_{j+1} exists.  L(p, q, m, n) is the link-derivative callback.
template <class L>
TripleMetrics triple_metrics(const L& link, bool tail) {
  TripleMetrics r;
  auto R = [&](int m, int n) { return tail ? link(1, m, n) : 0.0; };
  auto A = [&](int m, int n) { return link(0, m, n); };
  r.g = std::fabs(A(0, 1) + R(1, 0));
  r.row = std::fabs(A(1, 1)) + std::fabs(A(0, 2) + R(2, 0)) + std::fabs(R(1, 1));
  r.third = std::hypot(A(2, 1), A(1, 2)) +
            std::sqrt(A(1, 2) * A(1, 2) + std::pow(A(0, 3) + R(3, 0), 2) + R(2, 1) * R(2, 1)) +
            std::hypot(R(2, 1), R(1, 2));
  return r;
}

}  // namespace

ChainConstants measure_chain_constants(ChainKind kind, double margin) {
  constexpr int N = 81;
  constexpr double lo = -4.0, step = 0.1;
  // Tables of Psi^(m)(+-v) and Xi^(n)(+-v) on the grid.
  std::array<std::array<std::array<double, N>, 2>, 4> P{}, X{};
  for (int i = 0; i < N; ++i) {
    const double v = lo + step * i;
    for (int m = 0; m < 4; ++m)
      for (int s = 0; s < 2; ++s) {
        P[m][s][i] = psi(s == 0 ? v : -v, m);
        X[m][s][i] = xi(kind, s == 0 ? v : -v, m);
      }
  }
  const double c = link_sign(kind);
  auto tab = [&](int ip, int iq, int m, int n) {
    const double sg = ((m + n) % 2 == 0) ? 1.0 : -1.0;
    return sg * P[m][1][ip] * X[n][1][iq] + c * P[m][0][ip] * X[n][0][iq];
  };

  struct Best {
    double val;
    double a, b, cc;
    bool tail;
  };
  std::array<std::vector<Best>, 3> tops;
  auto push = [&](int which, Best b) {
    auto& v = tops[which];
    v.push_back(b);
    std::sort(v.begin(), v.end(), [](const Best& x, const Best& y) { return x.val > y.val; });
    if (v.size() > 6) v.pop_back();
  };
  std::array<double, 3> thresh{0.0, 0.0, 0.0};

  for (int ia = 0; ia < N; ++ia)
    for (int ib = 0; ib < N; ++ib)
      for (int ic = 0; ic < N; ++ic)
        for (bool tail : {true, false}) {
          if (!tail && ic > 0) continue;
          auto L = [&](int which, int m, int n) { return which == 0 ? tab(ia, ib, m, n) : tab(ib, ic, m, n); };
          const TripleMetrics t = triple_metrics(L, tail);
          const double vals[3] = {t.g, t.row, t.third};
          for (int w = 0; w < 3; ++w)
            if (vals[w] > thresh[w] || tops[w].size() < 6) {
              push(w, {vals[w], lo + step * ia, lo + step * ib, lo + step * ic, tail});
              thresh[w] = tops[w].back().val;
            }
        }

  ChainConstants out;
  double* slots[3] = {&out.l0, &out.l1, &out.l2};
  ChainFunction f(kind, 2);
  for (int w = 0; w < 3; ++w) {
    double best = tops[w].front().val;
    for (const Best& b0 : tops[w]) {
      // Coordinate-wise pattern search around the grid maximum.
      double x[3] = {b0.a, b0.b, b0.cc};
      double cur = b0.val;
      for (double h = 0.05; h > 1e-5; h *= 0.5) {
        bool moved = true;
        for (int sweep = 0; moved && sweep < 50; ++sweep) {
          moved = false;
          for (int k = 0; k < 3; ++k)
            for (double dir : {-1.0, 1.0}) {
              double y[3] = {x[0], x[1], x[2]};
              y[k] = std::clamp(y[k] + dir * h, -4.5, 4.5);
              auto L = [&](int which, int m, int n) {
                const double p = which == 0 ? y[0] : y[1], q = which == 0 ? y[1] : y[2];
                const double sg = ((m + n) % 2 == 0) ? 1.0 : -1.0;
                return sg * psi(-p, m) * xi(kind, -q, n) + c * psi(p, m) * xi(kind, q, n);
              };
              const TripleMetrics t = triple_metrics(L, b0.tail);
              const double v = w == 0 ? t.g : (w == 1 ? t.row : t.third);
              if (v > cur) {
                cur = v;
                x[0] = y[0];
                x[1] = y[1];
                x[2] = y[2];
                moved = true;
              }
            }
        }
      }
      best = std::max(best, cur);
    }
    *slots[w] = best * margin;
  }
  return out;
}

const ChainConstants& chain_constants(ChainKind kind) {
  static std::once_flag f0, f1;
  static ChainConstants c0, c1;
  if (kind == ChainKind::eps_chain) {
    std::call_once(f0, [] { c0 = measure_chain_constants(ChainKind::eps_chain); });
    return c0;
  }
  std::call_once(f1, [] { c1 = measure_chain_constants(ChainKind::gamma_chain); });
  return c1;
}

// ---------------------------------------------------------------- recipes

ChainInstance build_eps_hard_instance(double eps, double l1_target, double l2_target, double sigma1, double sigma2,
                                      double delta) {
  if (!(eps > 0.0) || !(l1_target > 0.0) || !(l2_target > 0.0) || !(sigma1 >= 0.0) || !(sigma2 >= 0.0) ||
      !(delta > 0.0))
    throw ConfigError("eps hard instance: invalid parameters");
  const ChainConstants& k = chain_constants(ChainKind::eps_chain);
  ScalingRecipe r;
  r.kind = ChainKind::eps_chain;
  r.target = eps;
  r.constants = k;
  r.rho = sigma1 > 0.0 ? std::min(std::pow(2.0 * eps * k.l0 / sigma1, 2), 1.0) : 1.0;
  double beta = l1_target / (2.0 * eps * k.l1);
  r.binding = "L1";
  const double b2 = std::sqrt(l2_target / (2.0 * eps * k.l2));
  if (b2 < beta) {
    beta = b2;
    r.binding = "L2";
  }
  if (r.rho < 1.0) {
    const double bs = k.l0 * sigma2 / (k.l1 * sigma1);
    if (bs < beta) {
      beta = bs;
      r.binding = "sigma2";
    }
  }
  r.beta = beta;
  r.alpha = 2.0 * eps / beta;
  const double Tf = std::floor(delta * beta / (2.0 * 12.0 * eps));
  if (!(Tf >= 3.0)) throw ConfigError("eps hard instance: chain length below 3 (delta too small for eps)");
  if (Tf > 1e6) throw ConfigError("eps hard instance: chain length above 1e6");
  r.T = int(Tf);
  r.gap_bound = r.alpha * 12.0 * r.T;
  r.l1_bound = r.alpha * beta * beta * k.l1;
  r.l2_bound = r.alpha * beta * beta * beta * k.l2;
  r.sigma_bound = r.alpha * beta * k.l0 * std::sqrt((1.0 - r.rho) / r.rho);

  ChainInstance inst;
  inst.chain = std::make_shared<ChainFunction>(ChainKind::eps_chain, r.T, r.alpha, r.beta);
  inst.recipe = r;
  inst.rho = r.rho;
  inst.noiseless_gradient = false;
  inst.threshold = 0.25;
  inst.regularity = Regularity{r.gap_bound, r.l1_bound, r.l2_bound};
  return inst;
}

ChainInstance build_gamma_hard_instance(double gamma, double l1_target, double l2_target, double sigma2,
                                        double delta) {
  if (!(gamma > 0.0) || !(l1_target > 0.0) || !(l2_target > 0.0) || !(sigma2 >= 0.0) || !(delta > 0.0))
    throw ConfigError("gamma hard instance: invalid parameters");
  const ChainConstants& k = chain_constants(ChainKind::gamma_chain);
  if (gamma > l1_target / (5.0 * k.l1))
    throw ConfigError("gamma hard instance: gamma exceeds L1 / (5 l1)");
  ScalingRecipe r;
  r.kind = ChainKind::gamma_chain;
  r.target = gamma;
  r.constants = k;
  r.binding = "L2";
  r.beta = l2_target / (5.0 * gamma * k.l2);
  r.alpha = 5.0 * gamma / (r.beta * r.beta);
  r.rho = sigma2 > 0.0 ? std::min(std::pow(5.0 * k.l1 * gamma / sigma2, 2), 1.0) : 1.0;
  const double Tf = std::floor(delta * r.beta * r.beta / (5.0 * 40.0 * gamma));
  if (!(Tf >= 3.0)) throw ConfigError("gamma hard instance: chain length below 3 (delta too small for gamma)");
  if (Tf > 1e6) throw ConfigError("gamma hard instance: chain length above 1e6");
  r.T = int(Tf);
  r.gap_bound = r.alpha * 40.0 * r.T;
  r.l1_bound = r.alpha * r.beta * r.beta * k.l1;
  r.l2_bound = r.alpha * r.beta * r.beta * r.beta * k.l2;
  r.sigma_bound = r.l1_bound * std::sqrt((1.0 - r.rho) / r.rho);

  ChainInstance inst;
  inst.chain = std::make_shared<ChainFunction>(ChainKind::gamma_chain, r.T, r.alpha, r.beta);
  inst.recipe = r;
  inst.rho = r.rho;
  inst.noiseless_gradient = true;
  inst.threshold = 0.0;
  inst.regularity = Regularity{r.gap_bound, r.l1_bound, r.l2_bound};
  return inst;
}

ChainInstance make_unscaled_chain_instance(ChainKind kind, int T, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("chain instance: rho must be in (0, 1]");
  ChainInstance inst;
  inst.chain = std::make_shared<ChainFunction>(kind, T);
  inst.recipe.kind = kind;
  inst.recipe.alpha = inst.recipe.beta = 1.0;
  inst.recipe.rho = rho;
  inst.recipe.T = T;
  inst.recipe.constants = chain_constants(kind);
  inst.recipe.binding = "none";
  inst.recipe.gap_bound = inst.chain->gap_per_link() * T;
  inst.recipe.l1_bound = inst.recipe.constants.l1;
  inst.recipe.l2_bound = inst.recipe.constants.l2;
  inst.rho = rho;
  inst.noiseless_gradient = kind == ChainKind::gamma_chain;
  inst.threshold = kind == ChainKind::gamma_chain ? 0.0 : 0.25;
  inst.regularity = Regularity{inst.recipe.gap_bound, inst.recipe.l1_bound, inst.recipe.l2_bound};
  return inst;
}

// ---------------------------------------------------------------- audits

namespace {

// Coordinates 1..level drawn with |y| in (big, top]; the rest in [-small, small].
Vec structured_probe(int T, int level, double big, double top, double small, CounterRng& rng) {
  Vec y(T);
  for (int i = 0; i < T; ++i) {
    if (i < level) {
      const double mag = big + (top - big) * rng.uniform_open();
      y[i] = rng.rademacher() * mag;
    } else {
      // Mix interior draws with values on the threshold itself.
      const double u = rng.uniform();
      y[i] = u < 0.1 ? rng.rademacher() * small : (2.0 * rng.uniform() - 1.0) * small;
    }
  }
  return y;
}

}  // namespace

AuditResult audit_large_gradient(int T, int probes, uint64_t seed) {
  AuditResult a{"large_gradient"};
  a.worst_margin = std::numeric_limits<double>::infinity();
  ChainFunction f(ChainKind::eps_chain, T);
  CounterRng rng(seed);
  for (int k = 0; k < probes; ++k) {
    Vec y;
    if (k % 4 == 0) {
      y = Vec(T);
      for (int i = 0; i < T; ++i) y[i] = 4.0 * rng.uniform() - 2.0;
    } else {
      y = structured_probe(T, int(rng.below(T)), 1.0, 2.0, 1.0, rng);
    }
    const int p = prog(y, 1.0);
    if (p >= T) continue;
    ++a.probes;
    const double g = std::fabs(f.raw_gradient(y)[p]);
    a.worst_margin = std::min(a.worst_margin, g - 1.0);
    if (!(g > 1.0)) ++a.failures;
  }
  return a;
}

AuditResult audit_gamma_eigenvalue(int T, int probes, uint64_t seed) {
  AuditResult a{"gamma_eigenvalue"};
  a.worst_margin = std::numeric_limits<double>::infinity();
  if (T < 2) throw ConfigError("gamma eigenvalue audit: T must be >= 2");
  ChainFunction f(ChainKind::gamma_chain, T);
  CounterRng rng(seed);
  for (int k = 0; k < probes; ++k) {
    const bool restricted = k % 2 == 0;
    Vec y;
    if (restricted) {
      // Keep |y| strictly below 0.9 from the chosen level on.
      y = structured_probe(T, int(rng.below(T - 1)), 0.9, 2.0, 0.9 * (1.0 - 1e-12), rng);
    } else {
      y = Vec(T);
      for (int i = 0; i < T; ++i) y[i] = 4.0 * rng.uniform() - 2.0;
    }
    const double lm = lambda_min(f.raw_hessian(y), true);
    ++a.probes;
    if (prog(y, 0.9) < T - 1) {
      a.worst_margin = std::min(a.worst_margin, -0.5 - lm);
      if (!(lm <= -0.5)) ++a.failures;
    } else {
      a.worst_margin = std::min(a.worst_margin, 700.0 - lm);
      if (!(lm <= 700.0)) ++a.failures;
    }
  }
  return a;
}

AuditResult audit_tridiagonal(ChainKind kind, int T, int probes, uint64_t seed) {
  AuditResult a{"tridiagonal_" + to_string(kind)};
  ChainFunction f(kind, T);
  CounterRng rng(seed);
  a.worst_margin = 0.0;
  for (int k = 0; k < probes; ++k) {
    Vec y(T);
    for (int i = 0; i < T; ++i) y[i] = 4.0 * rng.uniform() - 2.0;
    const Mat H = f.raw_hessian(y);
    ++a.probes;
    bool bad = !is_symmetric(H);
    for (int i = 0; i < T; ++i)
      for (int j = 0; j < T; ++j)
        if (std::abs(i - j) > 1 && H(i, j) != 0.0) bad = true;
    if (bad) ++a.failures;
  }
  return a;
}

AuditResult audit_component_bounds(int probes, uint64_t seed) {
  AuditResult a{"component_bounds"};
  a.worst_margin = std::numeric_limits<double>::infinity();
  CounterRng rng(seed);
  const double e = std::numbers::e;
  const double psi1_max = std::sqrt(54.0 / e);
  for (int k = 0; k < probes; ++k) {
    const double x = 12.0 * rng.uniform() - 6.0;
    const double m[] = {
        psi(x, 0), e - psi(x, 0),                    // 0 <= Psi <= e
        psi(x, 1), psi1_max - psi(x, 1),             // 0 <= Psi' <= sqrt(54/e)
        40.0 - std::fabs(psi(x, 2)),                 // |Psi''| <= 40
        -lambda_fn(x, 0), 8.0 + lambda_fn(x, 0),     // -8 <= Lambda <= 0
        6.0 - std::fabs(lambda_fn(x, 1)),            // |Lambda'| <= 6
        8.0 + lambda_fn(x, 2), 4.0 - lambda_fn(x, 2) // -8 <= Lambda'' <= 4
    };
    ++a.probes;
    bool bad = false;
    for (double v : m) {
      a.worst_margin = std::min(a.worst_margin, v);
      if (v < 0.0) bad = true;
    }
    if (bad) ++a.failures;
  }
  return a;
}

AuditResult audit_scaled_instance(const ChainInstance& inst, int probes, uint64_t seed) {
  const ChainFunction& f = *inst.chain;
  const ScalingRecipe& r = inst.recipe;
  const int T = f.length();
  AuditResult a{"scaled_" + to_string(r.kind)};
  a.worst_margin = std::numeric_limits<double>::infinity();
  CounterRng rng(seed);
  for (int k = 0; k < probes; ++k) {
    ++a.probes;
    bool bad = false;
    if (r.kind == ChainKind::eps_chain) {
      const Vec y = structured_probe(T, int(rng.below(T)), 1.0, 2.0, 1.0, rng);
      const Vec x = y / f.beta();
      const double gn = f.gradient(x).norm();
      if (prog(y, 1.0) < T) {
        a.worst_margin = std::min(a.worst_margin, gn / r.target - 1.0);
        if (!(gn >= r.target)) bad = true;
      }
    } else {
      const Vec y = structured_probe(T, int(rng.below(T - 1)), 0.9, 2.0, 0.9 * (1.0 - 1e-12), rng);
      const Vec x = y / f.beta();
      const double lm = lambda_min(f.hessian(x), true);
      if (prog(y, 0.9) < T - 1) {
        a.worst_margin = std::min(a.worst_margin, -lm / r.target - 1.0);
        if (!(lm <= -r.target)) bad = true;
      }
    }
    // Hessian-Lipschitz quotient on a nearby pair.
    Vec y(T);
    for (int i = 0; i < T; ++i) y[i] = 4.0 * rng.uniform() - 2.0;
    const Vec x = y / f.beta();
    const Vec x2 = x + (0.05 / f.beta()) * rng.unit_vector(T);
    const Mat D = f.hessian(x) - f.hessian(x2);
    const Eigen::SelfAdjointEigenSolver<Mat> es(D, Eigen::EigenvaluesOnly);
    const double q = es.eigenvalues().cwiseAbs().maxCoeff() / (x - x2).norm();
    const double l2 = inst.regularity.l2;
    a.worst_margin = std::min(a.worst_margin, 1.0 - q / l2);
    if (q > l2 * (1.0 + 1e-3)) bad = true;
    if (bad) ++a.failures;
  }
  return a;
}

}  // namespace sosp
