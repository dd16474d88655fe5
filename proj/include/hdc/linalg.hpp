#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hdc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Thrown when an iteration matrix has spectral radius >= 1.
class DivergentSystemError : public std::runtime_error {
public:
  DivergentSystemError(const std::string& msg, double rho)
      : std::runtime_error(msg), rho_(rho) {}
  double rho() const { return rho_; }

private:
  double rho_;
};

/// Throws std::invalid_argument if the matrix contains NaN or Inf.
void require_finite(const Matrix& m, const std::string& name);

/// Largest eigenvalue magnitude of a square matrix, via dense
/// Hessenberg/QR iteration (Eigen's real eigensolver).
double spectral_radius(const Matrix& p);

enum class NormKind { One, Infinity };

/// Induced matrix norm: Infinity = max absolute row sum,
/// One = max absolute column sum.
double induced_norm(const Matrix& m, NormKind kind);

/// Solves (I - P) X = B. Requires spectral_radius(p) < 1; throws
/// DivergentSystemError otherwise. The result satisfies
/// ||(I-P) X - B||_inf <= 1e-10 ||B||_inf (iterative refinement).
Matrix limit_map(const Matrix& p, const Matrix& b);

/// Number of singular values exceeding tol * (largest singular value).
int numerical_rank(const Matrix& m, double tol = 1e-10);

}  // namespace hdc
