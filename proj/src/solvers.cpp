#include "lscs/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Jacobi>
#include <Eigen/QR>

#include "lscs/error.hpp"

namespace lscs {

void SolverConfig::validate() const {
  require(bp_abs_tol > 0.0 && bp_rho > 0.0 && cg_tol > 0.0, ErrorKind::InvalidArgument,
          "solver tolerances and rho must be positive");
  require(bp_max_iter >= 1 && cg_max_iter >= 1, ErrorKind::InvalidArgument,
          "solver iteration caps must be at least 1");
  require(!omp_max_atoms || *omp_max_atoms >= 1, ErrorKind::InvalidArgument,
          "omp_max_atoms must be at least 1");
  require(!omp_res_tol || *omp_res_tol > 0.0, ErrorKind::InvalidArgument,
          "omp_res_tol must be positive");
}

namespace {

inline double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Matrix gather_columns(const Matrix& a, const std::vector<Index>& support) {
  Matrix sub(a.rows(), static_cast<Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) sub.col(static_cast<Index>(k)) = a.col(support[k]);
  return sub;
}

// Thin QR factorisation A_W = Q R of a growing and shrinking set of columns,
// together with Q^T y and the residual y - Q Q^T y for a fixed y. Columns
// are appended by Gram-Schmidt (re-orthogonalised when cancellation is
// detected) and removed with Givens rotations, both O(m k).
class ActiveQr {
 public:
  ActiveQr(Index m, const Vector& y)
      : q_(m, m), r_(Matrix::Zero(m, m)), qty_(Vector::Zero(m)), y_(y), resid_(y) {}

  Index size() const { return k_; }
  const Vector& residual() const { return resid_; }

  // Returns false, leaving the factorisation unchanged, when `a` is
  // numerically in the span of the current columns.
  bool append(const Eigen::Ref<const Vector>& a) {
    if (k_ == q_.rows()) return false;
    Vector v = a;
    Vector c = Vector::Zero(k_);
    double before = v.norm();
    for (int pass = 0; pass < 2 && k_ > 0; ++pass) {
      const Vector proj = q_.leftCols(k_).transpose() * v;
      v.noalias() -= q_.leftCols(k_) * proj;
      c += proj;
      const double after = v.norm();
      if (after > 0.7 * before) break;
      before = after;
    }
    const double rem = v.norm();
    if (!(rem > 1e-10 * a.norm())) return false;
    q_.col(k_) = v / rem;
    r_.col(k_).head(k_) = c;
    r_(k_, k_) = rem;
    qty_[k_] = q_.col(k_).dot(resid_);
    resid_.noalias() -= qty_[k_] * q_.col(k_);
    ++k_;
    return true;
  }

  void remove(Index p) {
    for (Index c = p; c + 1 < k_; ++c) r_.col(c).head(k_) = r_.col(c + 1).head(k_);
    r_.col(k_ - 1).setZero();
    // Columns p.. are now upper Hessenberg; rotate the subdiagonal away.
    for (Index c = p; c + 1 < k_; ++c) {
      Eigen::JacobiRotation<double> g;
      g.makeGivens(r_(c, c), r_(c + 1, c));
      r_.topLeftCorner(k_, k_ - 1).applyOnTheLeft(c, c + 1, g.adjoint());
      qty_.head(k_).applyOnTheLeft(c, c + 1, g.adjoint());
      q_.leftCols(k_).applyOnTheRight(c, c + 1, g);
      r_(c + 1, c) = 0.0;
    }
    // The last column of Q leaves the span; its share of y returns to the
    // residual.
    resid_.noalias() += qty_[k_ - 1] * q_.col(k_ - 1);
    qty_[k_ - 1] = 0.0;
    r_.row(k_ - 1).setZero();
    --k_;
  }

  // Recomputes Q^T y and the residual from scratch.
  void refresh() {
    qty_.head(k_).noalias() = q_.leftCols(k_).transpose() * y_;
    resid_ = y_;
    resid_.noalias() -= q_.leftCols(k_) * qty_.head(k_);
  }

  // Least-squares coefficients on the active columns.
  Vector coefficients() const {
    return r_.topLeftCorner(k_, k_).triangularView<Eigen::Upper>().solve(qty_.head(k_));
  }

 private:
  Matrix q_;
  Matrix r_;
  Vector qty_;
  Vector y_;
  Vector resid_;
  Index k_ = 0;
};

// Scaled-form ADMM for min ||z||_1 s.t. x in {A x = y}, x = z.
// `project(v, x)` writes the Euclidean projection of v onto the affine set.
// Returns the feasible iterate x.
template <typename Project>
SparseSolution run_admm(Index n, double y_norm, const SolverConfig& cfg, Project&& project) {
  const double tol = cfg.bp_abs_tol * std::max(1.0, y_norm);
  double rho = cfg.bp_rho;
  int rho_changes = 0;
  Vector x(n);
  Vector z = Vector::Zero(n);
  Vector u = Vector::Zero(n);
  Vector z_old(n);
  Vector v(n);

  SparseSolution sol;
  for (int k = 1; k <= cfg.bp_max_iter; ++k) {
    v = z - u;
    project(v, x);
    z_old = z;
    const double t = 1.0 / rho;
    for (Index j = 0; j < n; ++j) z[j] = soft_threshold(x[j] + u[j], t);
    u += x - z;

    const double primal = (x - z).norm();
    const double dual = rho * (z - z_old).norm();
    sol.iterations_used = k;
    if (primal <= tol && dual <= tol) {
      sol.converged = true;
      break;
    }
    // Rebalancing rho too often keeps ADMM from settling, so it is checked
    // every 16 iterations and frozen after a bounded number of changes.
    if (cfg.bp_adaptive_rho && k % 16 == 0 && rho_changes < 20) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u *= 0.5;
        ++rho_changes;
      } else if (dual > 10.0 * primal) {
        rho *= 0.5;
        u *= 2.0;
        ++rho_changes;
      }
    }
  }
  sol.theta = std::move(x);
  return sol;
}

}  // namespace

// ---------------------------------------------------------------------------

DenseBasisPursuit::DenseBasisPursuit(Matrix a) : a_(std::move(a)) {
  require(a_.rows() >= 1 && a_.cols() >= a_.rows(), ErrorKind::InvalidArgument,
          "basis pursuit needs a wide matrix (rows <= cols)");
  gram_.compute(a_ * a_.transpose());
  // Cholesky can succeed on a numerically singular Gram matrix; compare the
  // pivots as well.
  const Vector pivots = gram_.matrixLLT().diagonal().cwiseAbs2();
  require(gram_.info() == Eigen::Success && pivots.minCoeff() > 1e-12 * pivots.maxCoeff(),
          ErrorKind::InvalidArgument, "basis pursuit needs a matrix with full row rank");
}

// Primal simplex on the dual program
//
//     maximize y^T nu  subject to  -1 <= a_j^T nu <= 1 for every column j,
//
// starting from the interior point nu = 0. W is the set of tight
// constraints (column j with side s_j). While y is not in span(A_W), nu
// moves along the component of y orthogonal to span(A_W) until the next
// constraint becomes tight. Once y is in the span, the least-squares
// coefficients theta_W solve A theta = y; they are optimal when
// s_j theta_j >= 0 throughout, otherwise the most negative one leaves W.
SparseSolution DenseBasisPursuit::solve(const Vector& y, const SolverConfig& cfg) const {
  cfg.validate();
  require(y.size() == a_.rows(), ErrorKind::DimensionMismatch,
          "basis pursuit: measurement vector has " + std::to_string(y.size()) +
              " entries, matrix has " + std::to_string(a_.rows()) + " rows");

  const Index m = a_.rows();
  const Index n = a_.cols();
  const double span_tol = 1e-11 * std::max(1.0, y.norm());

  ActiveQr qr(m, y);
  std::vector<Index> active;
  std::vector<double> side;
  std::vector<char> in_set(static_cast<std::size_t>(n), 0);
  Vector nu = Vector::Zero(m);
  Vector g = Vector::Zero(n);  // A^T nu
  Vector h(n);
  Vector coef;

  SparseSolution sol;
  int steps = 0;
  for (;;) {
    if (steps > 0 && steps % 32 == 0) qr.refresh();
    const Vector& resid = qr.residual();
    const bool spans = qr.size() == m || resid.norm() <= span_tol;
    if (spans) {
      coef = qr.coefficients();
      Index drop = -1;
      double worst = -1e-12 * std::max(1.0, coef.size() ? coef.lpNorm<Eigen::Infinity>() : 0.0);
      for (Index t = 0; t < qr.size(); ++t) {
        const double multiplier = side[static_cast<std::size_t>(t)] * coef[t];
        if (multiplier < worst) {
          worst = multiplier;
          drop = t;
        }
      }
      if (drop < 0) {
        sol.converged = true;
        break;
      }
      if (steps >= cfg.bp_max_iter) break;
      ++steps;
      in_set[static_cast<std::size_t>(active[static_cast<std::size_t>(drop)])] = 0;
      active.erase(active.begin() + drop);
      side.erase(side.begin() + drop);
      qr.remove(drop);
      continue;
    }
    if (steps >= cfg.bp_max_iter) {
      coef = qr.coefficients();
      break;
    }
    ++steps;

    // Ascent direction d = resid; a_j^T d = 0 on W and y^T d = ||d||^2 > 0.
    h.noalias() = a_.transpose() * resid;
    const double h_tiny = 1e-13 * h.lpNorm<Eigen::Infinity>();
    double step = std::numeric_limits<double>::infinity();
    Index enter = -1;
    double enter_side = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (in_set[static_cast<std::size_t>(j)]) continue;
      if (h[j] > h_tiny) {
        const double t = std::max(0.0, 1.0 - g[j]) / h[j];
        if (t < step) {
          step = t;
          enter = j;
          enter_side = 1.0;
        }
      } else if (h[j] < -h_tiny) {
        const double t = std::max(0.0, 1.0 + g[j]) / -h[j];
        if (t < step) {
          step = t;
          enter = j;
          enter_side = -1.0;
        }
      }
    }
    if (enter < 0) {
      coef = qr.coefficients();
      break;
    }
    nu.noalias() += step * resid;
    g.noalias() += step * h;
    if (steps % 64 == 0) g.noalias() = a_.transpose() * nu;
    if (!qr.append(a_.col(enter))) {
      coef = qr.coefficients();
      break;
    }
    active.push_back(enter);
    side.push_back(enter_side);
    in_set[static_cast<std::size_t>(enter)] = 1;
  }

  sol.theta = Vector::Zero(n);
  for (std::size_t t = 0; t < active.size(); ++t) sol.theta[active[t]] = coef[static_cast<Index>(t)];
  if (!sol.converged) {
    // Best effort: restore feasibility with the minimum-norm correction.
    const Vector r = y - a_ * sol.theta;
    sol.theta.noalias() += a_.transpose() * gram_.solve(r);
  }
  sol.support = active;
  sol.iterations_used = steps;
  sol.residual_norm = (a_ * sol.theta - y).norm();
  return sol;
}

SparseSolution basis_pursuit(const Matrix& a, const Vector& y, const SolverConfig& cfg) {
  return DenseBasisPursuit(a).solve(y, cfg);
}

SparseSolution basis_pursuit(const LinearOperator& a, const Vector& y, const SolverConfig& cfg) {
  if (const auto* dense = dynamic_cast<const DenseOperator*>(&a)) {
    return basis_pursuit(dense->matrix(), y, cfg);
  }
  cfg.validate();
  require(y.size() == a.rows(), ErrorKind::DimensionMismatch,
          "basis pursuit: measurement vector has " + std::to_string(y.size()) +
              " entries, operator has " + std::to_string(a.rows()) + " rows");

  const Index n = a.cols();
  Vector resid(a.rows());
  Vector w = Vector::Zero(a.rows());  // warm start across projections
  auto gram = [&](const Vector& in, Vector& out) { a.apply_gram(in, out); };
  auto project = [&](const Vector& v, Vector& x) {
    a.apply(v, resid);
    resid -= y;
    conjugate_gradient(gram, resid, w, cfg.cg_tol, cfg.cg_max_iter);
    a.apply_adjoint(w, x);
    x = v - x;
  };

  SparseSolution sol = run_admm(n, y.norm(), cfg, project);
  sol.residual_norm = (a.apply(sol.theta) - y).norm();
  return sol;
}

// ---------------------------------------------------------------------------

namespace {

template <typename ColumnFn, typename CorrelateFn>
SparseSolution run_omp(Index rows, Index cols, const Vector& y, const SolverConfig& cfg,
                       ColumnFn&& column, CorrelateFn&& correlate) {
  cfg.validate();
  require(y.size() == rows, ErrorKind::DimensionMismatch,
          "omp: measurement vector has " + std::to_string(y.size()) + " entries, operator has " +
              std::to_string(rows) + " rows");
  const Index max_atoms = std::min<Index>(
      {static_cast<Index>(cfg.omp_max_atoms.value_or(static_cast<std::size_t>(std::max<Index>(1, rows / 2)))),
       rows, cols});
  const double res_tol = cfg.omp_res_tol.value_or(1e-6 * y.norm());

  SparseSolution sol;
  sol.theta = Vector::Zero(cols);
  Vector r = y;
  double r_norm = r.norm();
  sol.residual_history.push_back(r_norm);

  Matrix q(rows, max_atoms);  // orthonormal basis of the active columns
  Matrix rfac = Matrix::Zero(max_atoms, max_atoms);
  std::vector<char> active(static_cast<std::size_t>(cols), 0);
  Vector corr(cols);
  Vector atom(rows);
  Index k = 0;
  bool degenerate = false;

  while (r_norm > res_tol && k < max_atoms) {
    correlate(r, corr);
    Index best = 0;
    double best_abs = -1.0;
    for (Index j = 0; j < cols; ++j) {
      const double c = std::abs(corr[j]);
      if (c > best_abs) {
        best_abs = c;
        best = j;
      }
    }
    if (active[static_cast<std::size_t>(best)]) {
      degenerate = true;
      break;
    }
    column(best, atom);
    const double atom_norm = atom.norm();
    // Modified Gram-Schmidt with one re-orthogonalisation pass.
    Vector coef = Vector::Zero(k);
    for (int pass = 0; pass < 2; ++pass) {
      if (k == 0) break;
      const Vector c = q.leftCols(k).transpose() * atom;
      atom.noalias() -= q.leftCols(k) * c;
      coef += c;
    }
    const double rem = atom.norm();
    if (!(rem > 1e-12 * std::max(1.0, atom_norm))) {
      degenerate = true;
      break;
    }
    q.col(k) = atom / rem;
    rfac.block(0, k, k, 1) = coef;
    rfac(k, k) = rem;
    active[static_cast<std::size_t>(best)] = 1;
    sol.support.push_back(best);
    r.noalias() -= q.col(k) * q.col(k).dot(r);
    ++k;
    r_norm = r.norm();
    sol.residual_history.push_back(r_norm);
  }

  if (k > 0) {
    const Vector qty = q.leftCols(k).transpose() * y;
    const Vector coef = rfac.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(qty);
    for (Index t = 0; t < k; ++t) sol.theta[sol.support[static_cast<std::size_t>(t)]] = coef[t];
  }
  sol.iterations_used = static_cast<int>(k);
  sol.converged = !degenerate && r_norm <= res_tol;
  return sol;
}

}  // namespace

SparseSolution omp(const LinearOperator& a, const Vector& y, const SolverConfig& cfg) {
  if (const auto* dense = dynamic_cast<const DenseOperator*>(&a)) return omp(dense->matrix(), y, cfg);
  Vector unit = Vector::Zero(a.cols());
  auto column = [&](Index j, Vector& out) {
    unit[j] = 1.0;
    a.apply(unit, out);
    unit[j] = 0.0;
  };
  auto correlate = [&](const Vector& r, Vector& out) { a.apply_adjoint(r, out); };
  SparseSolution sol = run_omp(a.rows(), a.cols(), y, cfg, column, correlate);
  sol.residual_norm = (a.apply(sol.theta) - y).norm();
  return sol;
}

SparseSolution omp(const Matrix& a, const Vector& y, const SolverConfig& cfg) {
  auto column = [&](Index j, Vector& out) { out = a.col(j); };
  auto correlate = [&](const Vector& r, Vector& out) { out.noalias() = a.transpose() * r; };
  SparseSolution sol = run_omp(a.rows(), a.cols(), y, cfg, column, correlate);
  sol.residual_norm = (a * sol.theta - y).norm();
  return sol;
}

// ---------------------------------------------------------------------------

SparseSolution l0_oracle(const Matrix& a, const Vector& y, std::size_t k_max) {
  require(a.cols() <= 20 && k_max <= 4, ErrorKind::InvalidArgument,
          "l0 oracle is limited to N <= 20 and k_max <= 4");
  require(y.size() == a.rows(), ErrorKind::DimensionMismatch,
          "l0 oracle: measurement vector does not match matrix rows");
  constexpr double kFeasible = 1e-9;
  const Index n = a.cols();

  SparseSolution sol;
  sol.theta = Vector::Zero(n);
  if (y.norm() <= kFeasible) {
    sol.converged = true;
    sol.residual_norm = y.norm();
    return sol;
  }

  std::vector<Index> support;
  for (std::size_t size = 1; size <= k_max && static_cast<Index>(size) <= n; ++size) {
    support.resize(size);
    for (std::size_t t = 0; t < size; ++t) support[t] = static_cast<Index>(t);
    while (true) {
      const Matrix sub = gather_columns(a, support);
      const Vector coef = sub.colPivHouseholderQr().solve(y);
      const double res = (sub * coef - y).norm();
      if (res <= kFeasible) {
        for (std::size_t t = 0; t < size; ++t) sol.theta[support[t]] = coef[static_cast<Index>(t)];
        sol.support = support;
        sol.residual_norm = res;
        sol.converged = true;
        return sol;
      }
      // Next combination in lexicographic order.
      std::size_t pos = size;
      while (pos > 0 && support[pos - 1] == n - static_cast<Index>(size - pos) - 1) --pos;
      if (pos == 0) break;
      ++support[pos - 1];
      for (std::size_t t = pos; t < size; ++t) support[t] = support[t - 1] + 1;
    }
  }
  fail(ErrorKind::Infeasible, "l0 oracle: no support of size <= " + std::to_string(k_max) +
                                  " reproduces the measurements");
}

}  // namespace lscs
