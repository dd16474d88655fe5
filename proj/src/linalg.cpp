#include "hdc/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace hdc {

void require_finite(const Matrix& m, const std::string& name) {
  if (!m.allFinite()) {
    throw std::invalid_argument(name + " contains NaN or Inf entries");
  }
}

double spectral_radius(const Matrix& p) {
  if (p.rows() != p.cols()) {
    throw std::invalid_argument("spectral_radius: matrix must be square");
  }
  if (p.rows() == 0) return 0.0;
  require_finite(p, "spectral_radius input");
  Eigen::EigenSolver<Matrix> es(p, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectral_radius: QR iteration did not converge");
  }
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double induced_norm(const Matrix& m, NormKind kind) {
  if (m.size() == 0) return 0.0;
  switch (kind) {
    case NormKind::Infinity:
      return m.cwiseAbs().rowwise().sum().maxCoeff();
    case NormKind::One:
      return m.cwiseAbs().colwise().sum().maxCoeff();
  }
  throw std::invalid_argument("induced_norm: unknown norm kind");
}

Matrix limit_map(const Matrix& p, const Matrix& b) {
  if (p.rows() != p.cols()) {
    throw std::invalid_argument("limit_map: P must be square");
  }
  if (b.rows() != p.rows()) {
    throw std::invalid_argument("limit_map: B row count must match P");
  }
  const double rho = spectral_radius(p);
  if (rho >= 1.0) {
    throw DivergentSystemError(
        "limit_map: divergent system, spectral radius " + std::to_string(rho) +
            " >= 1",
        rho);
  }
  const Matrix a = Matrix::Identity(p.rows(), p.cols()) - p;
  Eigen::PartialPivLU<Matrix> lu(a);
  Matrix x = lu.solve(b);
  // One or two refinement passes keep the residual at the 1e-10 * ||B||
  // contract even for rho close to 1.
  const double b_norm = induced_norm(b, NormKind::Infinity);
  for (int pass = 0; pass < 2; ++pass) {
    Matrix r = b - a * x;
    if (induced_norm(r, NormKind::Infinity) <= 1e-10 * b_norm) break;
    x += lu.solve(r);
  }
  return x;
}

int numerical_rank(const Matrix& m, double tol) {
  if (tol <= 0.0) {
    throw std::invalid_argument("numerical_rank: tol must be positive");
  }
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  if (smax == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * smax) ++rank;
  }
  return rank;
}

}  // namespace hdc
