#include "msw/linear_solvers.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/IterativeLinearSolvers>
#include <fmt/format.h>

#include "msw/errors.hpp"

namespace msw {

namespace {

// Adapter so Eigen's iterative solvers can use a cached factorisation.
class FactorPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  FactorPreconditioner() = default;
  template <typename M>
  explicit FactorPreconditioner(const M&) {}

  void set(const SpdSolver* solver) { solver_ = solver; }
  template <typename M>
  FactorPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  FactorPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  FactorPreconditioner& compute(const M&) { return *this; }
  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const { return solver_->solve(b); }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

 private:
  const SpdSolver* solver_ = nullptr;
};

}  // namespace

Eigen::VectorXd cg_solve(const SparseMatrix& a, const Eigen::VectorXd& b, double rel_tol) {
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(rel_tol);
  cg.setMaxIterations(std::max<int>(1000, static_cast<int>(b.size())));
  cg.compute(a);
  Eigen::VectorXd x = cg.solve(b);
  if (cg.info() != Eigen::Success) {
    throw SolverError(fmt::format("conjugate gradients did not converge (error {:.3e} after {} iterations)",
                                  cg.error(), cg.iterations()));
  }
  return x;
}

struct SpdSolver::Impl {
  Eigen::CholmodSupernodalLLT<SparseColMatrix> llt;
};

SpdSolver::SpdSolver(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  const SparseColMatrix col = a;
  impl_->llt.compute(col);
  if (impl_->llt.info() != Eigen::Success) throw SolverError("Cholesky factorisation failed (matrix not SPD?)");
}

SpdSolver::~SpdSolver() = default;

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd x = impl_->llt.solve(b);
  if (impl_->llt.info() != Eigen::Success) throw SolverError("Cholesky solve failed");
  return x;
}

Eigen::VectorXd bicgstab_solve(const SparseMatrix& a, const Eigen::VectorXd& b, const SpdSolver& precond,
                               const Eigen::VectorXd& guess, double rel_tol, int* iterations) {
  Eigen::BiCGSTAB<SparseMatrix, FactorPreconditioner> solver;
  solver.setTolerance(rel_tol);
  solver.setMaxIterations(500);
  solver.compute(a);
  solver.preconditioner().set(&precond);
  Eigen::VectorXd x = solver.solveWithGuess(b, guess);
  if (iterations) *iterations = static_cast<int>(solver.iterations());
  if (solver.info() != Eigen::Success || !x.allFinite()) {
    throw SolverError(fmt::format("BiCGSTAB did not converge (error {:.3e} after {} iterations)", solver.error(),
                                  solver.iterations()));
  }
  return x;
}

}  // namespace msw
