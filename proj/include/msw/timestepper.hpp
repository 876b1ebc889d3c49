#pragma once

#include <memory>
#include <vector>

#include "msw/dynamics.hpp"
#include "msw/linear_solvers.hpp"
#include "msw/physics.hpp"

namespace msw {

struct SolverConfig {
  double dt = 0.0;  // s
  int outer_iterations = 2;
  int inner_iterations = 1;
  double linear_tolerance = 1e-10;
  bool limiter = true;
  double H = 0.0;  // reference depth (m)
  Field b_ref;     // reference buoyancy, fixed for the run (thermal frameworks)
};

/// Throws ConfigError.
void validate(const SolverConfig& s, const FrameworkConfig& cfg);

/// Vertex-based limiter on a DG1 field: each cell's deviation from its mean is
/// scaled so that vertex values stay within the range of the means of all
/// cells sharing that vertex.
void vertex_limiter(const Discretisation& disc, Field& q);

/// Three-stage SSP Runge-Kutta transport with a prepared operator, limiting
/// after every stage when requested. Throws InstabilityError on non-finite values.
Field ssprk3_transport(const Discretisation& disc, const TransportOperator& op, const Field& q, double dt,
                       TransportForm form, bool limit);
Field ssprk3_transport(const Discretisation& disc, const Field& q, const Field& ubar, double dt, TransportForm form,
                       bool limit);

/// Implicit midpoint for M du/dt = -A(ubar) u with a prepared operator:
/// (M + dt/2 A) u^{n+1} = (M - dt/2 A) u^n, BiCGSTAB preconditioned by the mass factorisation.
Field implicit_midpoint_u(const VectorInvariantOperator& op, const SparseMatrix& mass, const SpdSolver& mass_solver,
                          const Field& u, double dt, double tol, int* iterations = nullptr);
Field implicit_midpoint_u(const Discretisation& disc, const Field& u, const Field& ubar, double dt,
                          double tol = 1e-10);

/// Approximate Jacobian of the implicit forcing residual, linearised about
/// (u = 0, D = H, b = b_ref) without topography. tau = dt/2. The buoyancy
/// increment is eliminated through db = Mdg^{-1}(r_b - tau T du) and the depth
/// increment through the block-diagonal DG mass, leaving a velocity-only
/// Schur system that is solved by BiCGSTAB preconditioned with a Cholesky
/// factorisation of its symmetric gravity-wave part. Assembled once.
class QuasiNewtonOperator {
 public:
  /// b_ref is ignored (and may be null) for moist convective runs.
  QuasiNewtonOperator(const Discretisation& disc, const FrameworkConfig& cfg, double H, const Field* b_ref, double dt,
                      double tol = 1e-10);
  ~QuasiNewtonOperator();

  struct Vectors {
    Eigen::VectorXd u, D, b;  // b empty without prognostic buoyancy
  };

  /// Solves S dx = r for weak residuals r.
  Vectors solve(const Vectors& residual, int* iterations = nullptr) const;
  /// Full (uneliminated) operator applied to an increment.
  Vectors apply(const Vectors& increment) const;
  /// Velocity Schur complement after eliminating db and dD.
  const SparseMatrix& schur_matrix() const { return schur_; }
  bool thermal() const { return thermal_; }

 private:
  Eigen::VectorXd dg_mass_solve(const Eigen::VectorXd& r) const;

  const Discretisation* disc_;
  bool thermal_;
  double tau_, H_, tol_;
  SparseMatrix mass_u_, mass_dg_, mass_dg_inv_, coriolis_, div_, pressure_, buoyancy_, coupling_ud_;
  SparseMatrix schur_;
  std::unique_ptr<SpdSolver> preconditioner_;
};

struct StepReport {
  std::vector<double> residual_norms;  // per inner iteration, in order
  int transport_iterations = 0;        // BiCGSTAB iterations for u transport, summed
  int linear_iterations = 0;           // BiCGSTAB iterations of the quasi-Newton solves, summed
  double limiter_excess = 0.0;         // largest overshoot of limited tracers past their pre-transport range
  int monotonicity_warnings = 0;
  PhysicsReport physics;
};

/// Algorithm of the semi-implicit quasi-Newton scheme. Owns the mass
/// factorisations and the fixed linear operator.
class Stepper {
 public:
  Stepper(const Discretisation& disc, FrameworkConfig cfg, PhysicsParams physics, SolverConfig solver,
          const Field* theta);

  /// Advances s by one step in place. Errors carry the time and iteration indices.
  StepReport step(State& s);

  /// chi_fe = chi^n + dt/2 M^{-1} F(chi^n); only u changes.
  State explicit_forcing_half_step(const State& s) const;

  const SolverConfig& solver() const { return solver_; }
  const FrameworkConfig& framework() const { return cfg_; }
  const PhysicsParams& physics() const { return physics_; }
  const QuasiNewtonOperator& linear_operator() const { return *qn_; }
  const SparseMatrix& hdiv_mass() const { return mass_u_; }
  const SparseMatrix& dg_mass() const { return mass_dg_; }

 private:
  StepReport step_impl(State& s, int& outer, int& inner);

  const Discretisation* disc_;
  FrameworkConfig cfg_;
  PhysicsParams physics_;
  SolverConfig solver_;
  const Field* theta_;
  SparseMatrix mass_u_, mass_dg_;
  std::unique_ptr<SpdSolver> mass_solver_;
  std::unique_ptr<QuasiNewtonOperator> qn_;
  TransportOperator transport_;
  VectorInvariantOperator vector_transport_;
};

}  // namespace msw
