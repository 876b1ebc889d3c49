#pragma once

#include <memory>

#include <Eigen/Sparse>

#include "msw/assembly.hpp"

namespace msw {

/// Conjugate gradients with Jacobi preconditioning for SPD systems.
Eigen::VectorXd cg_solve(const SparseMatrix& a, const Eigen::VectorXd& b, double rel_tol = 1e-12);

/// Cached sparse Cholesky factorisation (CHOLMOD) of an SPD matrix.
class SpdSolver {
 public:
  explicit SpdSolver(const SparseMatrix& a);
  ~SpdSolver();
  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// BiCGSTAB for a general matrix, preconditioned by an SPD factorisation.
Eigen::VectorXd bicgstab_solve(const SparseMatrix& a, const Eigen::VectorXd& b, const SpdSolver& precond,
                               const Eigen::VectorXd& guess, double rel_tol, int* iterations = nullptr);

}  // namespace msw
