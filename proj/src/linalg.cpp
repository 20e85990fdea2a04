#include "sosp/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "sosp/errors.hpp"

namespace sosp {

bool is_symmetric(const Mat& H, double rel_tol) {
  if (H.rows() != H.cols()) return false;
  const double scale = rel_tol > 0.0 ? rel_tol * std::max(1.0, H.cwiseAbs().maxCoeff()) : 0.0;
  for (Eigen::Index i = 0; i < H.rows(); ++i)
    for (Eigen::Index j = i + 1; j < H.cols(); ++j)
      if (std::abs(H(i, j) - H(j, i)) > scale) return false;
  return true;
}

SymEig sym_eig(const Mat& H) {
  if (!is_symmetric(H, 1e-12)) throw InputError("sym_eig: matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  if (es.info() != Eigen::Success) throw std::runtime_error("sym_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

SymEig tridiag_eig(const Vec& diag, const Vec& offdiag) {
  Eigen::SelfAdjointEigenSolver<Mat> es;
  es.computeFromTridiagonal(diag, offdiag, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw std::runtime_error("tridiag_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

SymEig sym_eig_auto(const Mat& H, bool assume_tridiagonal) {
  const Eigen::Index n = H.rows();
  if (!assume_tridiagonal || n < 3) return sym_eig(H);
  if (!is_symmetric(H, 1e-12)) throw InputError("sym_eig: matrix is not symmetric");
  Vec off = n > 1 ? Vec(H.diagonal(1)) : Vec();
  return tridiag_eig(H.diagonal(), off);
}

double lambda_min(const Mat& H, bool assume_tridiagonal) {
  if (H.rows() == 1) return H(0, 0);
  const Eigen::Index n = H.rows();
  if (assume_tridiagonal && n >= 3) {
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(H.diagonal(), Vec(H.diagonal(1)), Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace sosp
