#pragma once

// Random sensing matrices, sparsity bases and matrix-free linear operators.
//
// Conventions used throughout the library:
//  * rows are indexed from 0;
//  * a basis matrix Psi is the synthesis matrix, x = Psi * theta, so
//    Psi^T * x gives the coefficients (for the DCT: orthonormal type-II
//    forward transform, type-III inverse);
//  * an image X of size n_row x n_col is vectorised row by row, which is
//    vec(X^T) in column-stacking notation.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace lscs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Everything needed to regenerate every per-row sensing matrix.
struct SensingEnsemble {
  std::uint64_t master_seed = 0;
  std::size_t m = 0;      // measurements per row
  std::size_t n_col = 0;  // row length
  std::size_t n_row = 0;

  // Throws InvalidArgument unless 0 < m < n_col and n_row >= 1.
  void validate() const;

  friend bool operator==(const SensingEnsemble&, const SensingEnsemble&) = default;
};

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t z) noexcept;

// Seed for row `row`: splitmix64(master_seed ^ splitmix64(row + 1)).
// Each row's stream is independent of the others, so rows can be
// regenerated out of order.
std::uint64_t row_seed(std::uint64_t master_seed, std::size_t row) noexcept;

// Standard normal deviates from a 64-bit Mersenne Twister using the
// Box-Muller transform on 53-bit uniforms. Both deviates of a pair are
// used, cosine branch first. Unlike std::normal_distribution the output
// sequence is fixed by this implementation, not by the standard library.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed);
  double next();

 private:
  double uniform_open();  // (0, 1]

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// M x N_COL matrix with i.i.d. N(0, 1/M) entries for row `row` (0-based),
// filled in row-major order from GaussianStream(row_seed(...)).
Matrix gaussian_row_matrix(const SensingEnsemble& ensemble, std::size_t row);

enum class BasisKind { Identity, Dct };

struct SparsityBasis {
  BasisKind kind = BasisKind::Dct;
  std::size_t n = 0;

  // Dense n x n synthesis matrix.
  Matrix matrix() const;
};

// Orthonormal DCT synthesis matrix: column k is the k-th type-II cosine
// atom, so Psi^T x is the orthonormal DCT-II of x.
Matrix dct_synthesis(std::size_t n);

const char* basis_name(BasisKind kind) noexcept;

// Abstract real linear map R^cols -> R^rows with its adjoint.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  // out = A * in. `out` must already have rows() entries.
  virtual void apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const = 0;
  // out = A^T * in. `out` must already have cols() entries.
  virtual void apply_adjoint(const Eigen::Ref<const Vector>& in,
                             Eigen::Ref<Vector> out) const = 0;

  // out = A * A^T * in. Overridden where structure makes it cheaper.
  virtual void apply_gram(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const;
  // True when A * A^T = I (orthonormal rows).
  virtual bool row_orthonormal() const { return false; }

  Vector apply(const Vector& in) const;
  Vector apply_adjoint(const Vector& in) const;

  // Dense copy, one column per unit vector. Test scale only.
  Matrix materialize() const;

 protected:
  void check_apply(Index in_size, Index out_size) const;
  void check_adjoint(Index in_size, Index out_size) const;
};

class DenseOperator final : public LinearOperator {
 public:
  explicit DenseOperator(Matrix a) : a_(std::move(a)) {}

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  void apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  void apply_adjoint(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
};

// Block-diagonal sensing operator diag(Phi^0, ..., Phi^{n_row-1}) acting on
// a row-stacked image. Only the n_row blocks are stored.
class BlockDiagOperator final : public LinearOperator {
 public:
  explicit BlockDiagOperator(std::vector<Matrix> blocks);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  void apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  void apply_adjoint(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

  const std::vector<Matrix>& blocks() const { return blocks_; }

 private:
  std::vector<Matrix> blocks_;
  Index rows_ = 0;
  Index cols_ = 0;
};

BlockDiagOperator block_diag_operator(const SensingEnsemble& ensemble);

// Separable 2D synthesis: coefficients Theta (n_row x n_col, row-stacked)
// map to X = Psi_row * Theta * Psi_col^T (row-stacked), i.e. the Kronecker
// matrix Psi_row (x) Psi_col applied without forming it.
class KronSynthesisOperator final : public LinearOperator {
 public:
  KronSynthesisOperator(const SparsityBasis& psi_row, const SparsityBasis& psi_col);

  Index rows() const override { return n_row_ * n_col_; }
  Index cols() const override { return n_row_ * n_col_; }
  void apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  void apply_adjoint(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

  void apply_gram(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  bool row_orthonormal() const override { return true; }

  Index n_row() const { return n_row_; }
  Index n_col() const { return n_col_; }

 private:
  Index n_row_;
  Index n_col_;
  bool row_identity_;
  bool col_identity_;
  Matrix psi_row_;
  Matrix psi_col_;
};

KronSynthesisOperator kron_synthesis_operator(const SparsityBasis& psi_row,
                                              const SparsityBasis& psi_col);

// outer * inner.
class ComposedOperator final : public LinearOperator {
 public:
  ComposedOperator(std::shared_ptr<const LinearOperator> outer,
                   std::shared_ptr<const LinearOperator> inner);

  Index rows() const override { return outer_->rows(); }
  Index cols() const override { return inner_->cols(); }
  void apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  void apply_adjoint(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  // (B C)(B C)^T = B B^T when C has orthonormal rows.
  void apply_gram(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const override;
  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;

 private:
  std::shared_ptr<const LinearOperator> outer_;
  std::shared_ptr<const LinearOperator> inner_;
};

}  // namespace lscs
