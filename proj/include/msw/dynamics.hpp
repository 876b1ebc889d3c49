#pragma once

#include "msw/assembly.hpp"
#include "msw/framework.hpp"

namespace msw {

/// Velocity forcing tested against every H(div) basis function:
///   -(psi, f k x u) + (B+D, div(b psi)) - <<B+D>, [[b psi]]>
///   + 1/2 (b, div(D psi)) - 1/2 <<b>, [[D psi]]>
/// Uses the b field as given.
Eigen::VectorXd forcing_residual(const Discretisation& disc, const State& s, const FrameworkConfig& cfg);

/// Same residual for constant buoyancy b = g; ignores the b field.
Eigen::VectorXd forcing_residual_constant_b(const Discretisation& disc, const State& s, const FrameworkConfig& cfg);

/// Only the Coriolis part, -(psi, f k x u).
Eigen::VectorXd coriolis_residual(const Discretisation& disc, const Field& u, const FrameworkConfig& cfg);

/// Dispatches on cfg.thermal().
Eigen::VectorXd velocity_forcing(const Discretisation& disc, const State& s, const FrameworkConfig& cfg);

/// Facet value from the upwind side of ubar.n (n points out of the "+" side);
/// the average when ubar.n = 0.
inline double upwind_value(double plus, double minus, double un) {
  if (un > 0.0) return plus;
  if (un < 0.0) return minus;
  return 0.5 * (plus + minus);
}

enum class TransportForm {
  Conservative,  // d/dt q + div(q ubar) = 0, used for D
  Advective,     // d/dt q + ubar.grad q = 0, used for b and moisture
};

/// Weak rate of change of q under transport by ubar, tested against every DG
/// basis function (conservative form: (q ubar, grad phi) - <q~ ubar.n, [[phi]]>).
Eigen::VectorXd scalar_transport_tendency(const Discretisation& disc, const Field& q, const Field& ubar,
                                          TransportForm form);

/// Weak rate of change of u under vector-invariant transport by a fixed
/// ubar, i.e. -A(ubar) u with the operator of VectorInvariantOperator.
Eigen::VectorXd vector_invariant_tendency(const Discretisation& disc, const Field& u, const Field& ubar);

/// Mass-inverted DG transport matrices for a fixed ubar: the rate is
/// dq/dt = K q. Pattern is built once; update() reassembles values.
class TransportOperator {
 public:
  explicit TransportOperator(const Discretisation& disc);
  void update(const Field& ubar);
  const SparseMatrix& matrix(TransportForm form) const;
  Eigen::VectorXd rate(const Eigen::VectorXd& q, TransportForm form) const { return matrix(form) * q; }

 private:
  const Discretisation* disc_;
  BlockAssembler conservative_;
  BlockAssembler advective_;
};

/// Vector-invariant transport operator A(ubar), linear in the transported u:
///   A(u; psi) = sum_K (u, grad(w) x k) + sum_facets sum_sides w_s t_s . u~
///               - 1/2 (div psi, u . ubar),   w = psi . (k x ubar),
/// where u~ is upwinded with respect to ubar. The velocity rate is M du/dt = -A u.
class VectorInvariantOperator {
 public:
  explicit VectorInvariantOperator(const Discretisation& disc);
  void update(const Field& ubar);
  const SparseMatrix& matrix() const { return assembler_.matrix(); }

 private:
  const Discretisation* disc_;
  BlockAssembler assembler_;
};

}  // namespace msw
