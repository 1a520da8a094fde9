#include "lscs/tensor_core.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lscs/error.hpp"

namespace lscs {

void SensingEnsemble::validate() const {
  require(n_row >= 1, ErrorKind::InvalidArgument, "ensemble needs at least one row");
  require(m > 0 && m < n_col, ErrorKind::InvalidArgument,
          "measurements per row must satisfy 0 < M < N_COL (M=" + std::to_string(m) +
              ", N_COL=" + std::to_string(n_col) + ")");
}

std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t row_seed(std::uint64_t master_seed, std::size_t row) noexcept {
  return splitmix64(master_seed ^ splitmix64(static_cast<std::uint64_t>(row) + 1));
}

GaussianStream::GaussianStream(std::uint64_t seed) : engine_(seed) {}

double GaussianStream::uniform_open() {
  // 53 random bits, shifted by one ulp so 0 is excluded and 1 included.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double GaussianStream::next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Matrix gaussian_row_matrix(const SensingEnsemble& ensemble, std::size_t row) {
  ensemble.validate();
  require(row < ensemble.n_row, ErrorKind::InvalidArgument,
          "row index " + std::to_string(row) + " out of range [0, " +
              std::to_string(ensemble.n_row) + ")");
  const auto m = static_cast<Index>(ensemble.m);
  const auto n = static_cast<Index>(ensemble.n_col);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ensemble.m));
  GaussianStream gauss(row_seed(ensemble.master_seed, row));
  Matrix phi(m, n);
  for (Index k = 0; k < m; ++k) {
    for (Index j = 0; j < n; ++j) phi(k, j) = scale * gauss.next();
  }
  return phi;
}

Matrix dct_synthesis(std::size_t n) {
  require(n >= 1, ErrorKind::InvalidArgument, "DCT dimension must be positive");
  const auto size = static_cast<Index>(n);
  const double dn = static_cast<double>(n);
  Matrix psi(size, size);
  for (Index k = 0; k < size; ++k) {
    const double norm = (k == 0) ? std::sqrt(1.0 / dn) : std::sqrt(2.0 / dn);
    for (Index j = 0; j < size; ++j) {
      psi(j, k) = norm * std::cos(std::numbers::pi * (2.0 * static_cast<double>(j) + 1.0) *
                                  static_cast<double>(k) / (2.0 * dn));
    }
  }
  return psi;
}

Matrix SparsityBasis::matrix() const {
  require(n >= 1, ErrorKind::InvalidArgument, "basis dimension must be positive");
  if (kind == BasisKind::Identity) return Matrix::Identity(static_cast<Index>(n), static_cast<Index>(n));
  return dct_synthesis(n);
}

const char* basis_name(BasisKind kind) noexcept {
  return kind == BasisKind::Identity ? "identity" : "dct";
}

// ---------------------------------------------------------------------------

Vector LinearOperator::apply(const Vector& in) const {
  Vector out(rows());
  apply(in, out);
  return out;
}

Vector LinearOperator::apply_adjoint(const Vector& in) const {
  Vector out(cols());
  apply_adjoint(in, out);
  return out;
}

void LinearOperator::apply_gram(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const {
  check_apply(cols(), out.size());
  check_adjoint(in.size(), cols());
  Vector mid(cols());
  apply_adjoint(in, mid);
  apply(mid, out);
}

Matrix LinearOperator::materialize() const {
  Matrix dense(rows(), cols());
  Vector unit = Vector::Zero(cols());
  Vector column(rows());
  for (Index j = 0; j < cols(); ++j) {
    unit[j] = 1.0;
    apply(unit, column);
    dense.col(j) = column;
    unit[j] = 0.0;
  }
  return dense;
}

void LinearOperator::check_apply(Index in_size, Index out_size) const {
  require(in_size == cols() && out_size == rows(), ErrorKind::DimensionMismatch,
          "operator apply: expected input " + std::to_string(cols()) + " / output " +
              std::to_string(rows()) + ", got " + std::to_string(in_size) + " / " +
              std::to_string(out_size));
}

void LinearOperator::check_adjoint(Index in_size, Index out_size) const {
  require(in_size == rows() && out_size == cols(), ErrorKind::DimensionMismatch,
          "operator adjoint: expected input " + std::to_string(rows()) + " / output " +
              std::to_string(cols()) + ", got " + std::to_string(in_size) + " / " +
              std::to_string(out_size));
}

void DenseOperator::apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const {
  check_apply(in.size(), out.size());
  out.noalias() = a_ * in;
}

void DenseOperator::apply_adjoint(const Eigen::Ref<const Vector>& in,
                                  Eigen::Ref<Vector> out) const {
  check_adjoint(in.size(), out.size());
  out.noalias() = a_.transpose() * in;
}

BlockDiagOperator::BlockDiagOperator(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  for (const Matrix& b : blocks_) {
    rows_ += b.rows();
    cols_ += b.cols();
  }
}

void BlockDiagOperator::apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const {
  check_apply(in.size(), out.size());
  Index r = 0;
  Index c = 0;
  for (const Matrix& b : blocks_) {
    out.segment(r, b.rows()).noalias() = b * in.segment(c, b.cols());
    r += b.rows();
    c += b.cols();
  }
}

void BlockDiagOperator::apply_adjoint(const Eigen::Ref<const Vector>& in,
                                      Eigen::Ref<Vector> out) const {
  check_adjoint(in.size(), out.size());
  Index r = 0;
  Index c = 0;
  for (const Matrix& b : blocks_) {
    out.segment(c, b.cols()).noalias() = b.transpose() * in.segment(r, b.rows());
    r += b.rows();
    c += b.cols();
  }
}

BlockDiagOperator block_diag_operator(const SensingEnsemble& ensemble) {
  ensemble.validate();
  std::vector<Matrix> blocks;
  blocks.reserve(ensemble.n_row);
  for (std::size_t i = 0; i < ensemble.n_row; ++i) blocks.push_back(gaussian_row_matrix(ensemble, i));
  return BlockDiagOperator(std::move(blocks));
}

KronSynthesisOperator::KronSynthesisOperator(const SparsityBasis& psi_row,
                                             const SparsityBasis& psi_col)
    : n_row_(static_cast<Index>(psi_row.n)),
      n_col_(static_cast<Index>(psi_col.n)),
      row_identity_(psi_row.kind == BasisKind::Identity),
      col_identity_(psi_col.kind == BasisKind::Identity) {
  if (!row_identity_) psi_row_ = psi_row.matrix();
  if (!col_identity_) psi_col_ = psi_col.matrix();
  require(n_row_ >= 1 && n_col_ >= 1, ErrorKind::InvalidArgument,
          "Kronecker synthesis needs non-empty bases");
}

void KronSynthesisOperator::apply(const Eigen::Ref<const Vector>& in,
                                  Eigen::Ref<Vector> out) const {
  check_apply(in.size(), out.size());
  Eigen::Map<const RowMatrix> theta(in.data(), n_row_, n_col_);
  Eigen::Map<RowMatrix> x(out.data(), n_row_, n_col_);
  RowMatrix tmp = row_identity_ ? RowMatrix(theta) : RowMatrix(psi_row_ * theta);
  if (col_identity_) {
    x = tmp;
  } else {
    x.noalias() = tmp * psi_col_.transpose();
  }
}

void KronSynthesisOperator::apply_adjoint(const Eigen::Ref<const Vector>& in,
                                          Eigen::Ref<Vector> out) const {
  check_adjoint(in.size(), out.size());
  Eigen::Map<const RowMatrix> x(in.data(), n_row_, n_col_);
  Eigen::Map<RowMatrix> theta(out.data(), n_row_, n_col_);
  RowMatrix tmp = row_identity_ ? RowMatrix(x) : RowMatrix(psi_row_.transpose() * x);
  if (col_identity_) {
    theta = tmp;
  } else {
    theta.noalias() = tmp * psi_col_;
  }
}

void KronSynthesisOperator::apply_gram(const Eigen::Ref<const Vector>& in,
                                       Eigen::Ref<Vector> out) const {
  check_adjoint(in.size(), cols());
  check_apply(cols(), out.size());
  out = in;
}

KronSynthesisOperator kron_synthesis_operator(const SparsityBasis& psi_row,
                                              const SparsityBasis& psi_col) {
  return KronSynthesisOperator(psi_row, psi_col);
}

ComposedOperator::ComposedOperator(std::shared_ptr<const LinearOperator> outer,
                                   std::shared_ptr<const LinearOperator> inner)
    : outer_(std::move(outer)), inner_(std::move(inner)) {
  require(outer_ && inner_, ErrorKind::InvalidArgument, "composed operator needs two operands");
  require(outer_->cols() == inner_->rows(), ErrorKind::DimensionMismatch,
          "composed operator: inner output size does not match outer input size");
}

void ComposedOperator::apply(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const {
  check_apply(in.size(), out.size());
  Vector mid(inner_->rows());
  inner_->apply(in, mid);
  outer_->apply(mid, out);
}

void ComposedOperator::apply_adjoint(const Eigen::Ref<const Vector>& in,
                                     Eigen::Ref<Vector> out) const {
  check_adjoint(in.size(), out.size());
  Vector mid(outer_->cols());
  outer_->apply_adjoint(in, mid);
  inner_->apply_adjoint(mid, out);
}

void ComposedOperator::apply_gram(const Eigen::Ref<const Vector>& in, Eigen::Ref<Vector> out) const {
  if (inner_->row_orthonormal()) {
    outer_->apply_gram(in, out);
  } else {
    LinearOperator::apply_gram(in, out);
  }
}


}  // namespace lscs
