#pragma once

// Sparse recovery: equality-constrained basis pursuit
//
//     minimize ||theta||_1  subject to  A theta = y,
//
// Orthogonal Matching Pursuit, and a brute-force l0 search used as a test
// oracle.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>

#include "lscs/tensor_core.hpp"

namespace lscs {

struct SolverConfig {
  // Basis pursuit. Dense systems use an exact active-set method and
  // bp_max_iter caps its pivots. Operator-form systems use ADMM, which stops
  // when primal and dual residuals both fall below bp_abs_tol * max(1, ||y||).
  double bp_abs_tol = 1e-6;
  int bp_max_iter = 2000;
  double bp_rho = 1.0;
  // Residual balancing: rescale rho when one residual dominates the other
  // by more than a factor 10.
  bool bp_adaptive_rho = true;

  // OMP. Unset means: max atoms = rows(A) / 2, residual tol = 1e-6 * ||y||.
  std::optional<std::size_t> omp_max_atoms;
  std::optional<double> omp_res_tol;

  // Conjugate gradient on A A^T for operator-form systems.
  double cg_tol = 1e-12;
  int cg_max_iter = 500;

  void validate() const;
};

struct SparseSolution {
  Vector theta;
  int iterations_used = 0;
  double residual_norm = 0.0;  // ||A theta - y||_2
  bool converged = false;
  // OMP: atoms in selection order. Dense basis pursuit: final active set.
  std::vector<Index> support;
  // OMP residual norm after each step, starting with ||y||.
  std::vector<double> residual_history;
};

// Basis pursuit for a dense matrix A with full row rank, solved exactly by
// an active-set (simplex) method on the dual linear program. One instance
// can be reused for many right-hand sides. If the pivot cap is hit the
// returned theta is made feasible by a minimum-norm correction and
// `converged` is false.
class DenseBasisPursuit {
 public:
  explicit DenseBasisPursuit(Matrix a);

  SparseSolution solve(const Vector& y, const SolverConfig& cfg) const;

  const Matrix& matrix() const { return a_; }
  Index rows() const { return a_.rows(); }
  Index cols() const { return a_.cols(); }

 private:
  Matrix a_;
  Eigen::LLT<Matrix> gram_;
};

SparseSolution basis_pursuit(const Matrix& a, const Vector& y, const SolverConfig& cfg);

// Operator form: (A A^T)^{-1} is applied by conjugate gradient. Dense
// operators are routed to DenseBasisPursuit.
SparseSolution basis_pursuit(const LinearOperator& a, const Vector& y, const SolverConfig& cfg);

// Greedy recovery: pick the column most correlated with the residual
// (lowest index on ties), refit by least squares on the active set, stop
// when ||r|| <= omp_res_tol or omp_max_atoms atoms are in use.
// Columns of operator-form A are obtained by applying it to unit vectors.
SparseSolution omp(const LinearOperator& a, const Vector& y, const SolverConfig& cfg);
SparseSolution omp(const Matrix& a, const Vector& y, const SolverConfig& cfg);

// Exhaustive l0 search over supports of size 0..k_max, smallest size first
// and lexicographic within a size. Returns the least-squares fit on the
// first support whose residual is <= 1e-9. Requires cols(A) <= 20 and
// k_max <= 4; throws Infeasible if no support qualifies.
SparseSolution l0_oracle(const Matrix& a, const Vector& y, std::size_t k_max);

// Conjugate gradient for a symmetric positive definite operator given as a
// callable out = G * in. Starts from `x` and returns the iteration count.
template <typename Apply>
int conjugate_gradient(const Apply& gram, const Vector& b, Vector& x, double tol, int max_iter) {
  Vector r = b;
  Vector gx(b.size());
  gram(x, gx);
  r -= gx;
  const double stop = tol * std::max(1.0, b.norm());
  double rr = r.squaredNorm();
  if (std::sqrt(rr) <= stop) return 0;
  Vector p = r;
  Vector gp(b.size());
  for (int k = 1; k <= max_iter; ++k) {
    gram(p, gp);
    const double alpha = rr / p.dot(gp);
    x.noalias() += alpha * p;
    r.noalias() -= alpha * gp;
    const double rr_next = r.squaredNorm();
    if (std::sqrt(rr_next) <= stop) return k;
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  return max_iter;
}

}  // namespace lscs
