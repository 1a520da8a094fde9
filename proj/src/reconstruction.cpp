#include "lscs/reconstruction.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "lscs/error.hpp"
#include "lscs/metrics.hpp"

namespace lscs {

namespace {

// Runs body(k) for k in [0, count) on up to `threads` workers with a static
// interleaved partition. Exceptions are rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += workers) body(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<std::size_t> collect_failed(const std::vector<char>& flags) {
  std::vector<std::size_t> failed;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) failed.push_back(i);
  }
  return failed;
}

}  // namespace

std::string_view init_name(InitKind kind) noexcept {
  return kind == InitKind::Kcs ? "kcs" : "srr";
}

void ReconstructionConfig::validate() const {
  require(max_iterations >= 0, ErrorKind::InvalidArgument, "max_iterations must be non-negative");
  require(conv_tol > 0.0, ErrorKind::InvalidArgument, "conv_tol must be positive");
  solver.validate();
}

// ---------------------------------------------------------------------------

RowDecoder::RowDecoder(const MeasurementSet& ms, const ReconstructionConfig& cfg)
    : ms_(ms), cfg_(cfg) {
  ms_.validate();
  cfg_.validate();
  const std::size_t n_row = ms_.ensemble.n_row;
  if (cfg_.basis == BasisKind::Dct) psi_ = dct_synthesis(ms_.ensemble.n_col);

  std::vector<std::optional<DenseBasisPursuit>> built(n_row);
  parallel_for(n_row, cfg_.threads, [&](std::size_t i) {
    Matrix phi = gaussian_row_matrix(ms_.ensemble, i);
    if (psi_.size() > 0) phi = phi * psi_;
    built[i].emplace(std::move(phi));
  });
  rows_.reserve(n_row);
  for (auto& b : built) rows_.push_back(std::move(*b));
}

Vector RowDecoder::row_measure(std::size_t row, const Vector& x) const {
  // Phi^i x = (Phi^i Psi)(Psi^T x) for orthonormal Psi.
  const Matrix& a = rows_[row].matrix();
  if (psi_.size() == 0) return a * x;
  return a * (psi_.transpose() * x);
}

Vector RowDecoder::synthesize(const Vector& theta) const {
  if (psi_.size() == 0) return theta;
  return psi_ * theta;
}

Estimate RowDecoder::init_separate_rows() const {
  const std::size_t n_row = ms_.ensemble.n_row;
  Estimate est{Image(static_cast<Index>(n_row), static_cast<Index>(ms_.ensemble.n_col)), {}};
  std::vector<char> failed(n_row, 0);
  parallel_for(n_row, cfg_.threads, [&](std::size_t i) {
    const Vector y = ms_.y.row(static_cast<Index>(i)).transpose();
    const SparseSolution sol = rows_[i].solve(y, cfg_.solver);
    est.x.row(static_cast<Index>(i)) = synthesize(sol.theta).transpose();
    failed[i] = sol.converged ? 0 : 1;
  });
  est.failed_rows = collect_failed(failed);
  return est;
}

Estimate RowDecoder::iterate_once(const Image& prev) const {
  std::vector<std::size_t> order(ms_.ensemble.n_row);
  std::iota(order.begin(), order.end(), std::size_t{0});
  return iterate_once(prev, order);
}

Estimate RowDecoder::iterate_once(const Image& prev, std::span<const std::size_t> order) const {
  const std::size_t n_row = ms_.ensemble.n_row;
  require(static_cast<std::size_t>(prev.rows()) == n_row &&
              static_cast<std::size_t>(prev.cols()) == ms_.ensemble.n_col,
          ErrorKind::DimensionMismatch, "iterate: estimate shape does not match the measurements");
  require(order.size() == n_row, ErrorKind::InvalidArgument,
          "iterate: row order must list every row once");
  std::vector<char> seen(n_row, 0);
  for (std::size_t i : order) {
    require(i < n_row && !seen[i], ErrorKind::InvalidArgument,
            "iterate: row order must be a permutation");
    seen[i] = 1;
  }

  Estimate next{Image(prev.rows(), prev.cols()), {}};
  std::vector<char> failed(n_row, 0);
  parallel_for(n_row, cfg_.threads, [&](std::size_t k) {
    const std::size_t i = order[k];
    const auto row = static_cast<Index>(i);
    Vector x_pred;
    if (i == 0 || i + 1 == n_row) {
      x_pred = prev.row(row).transpose();
    } else {
      x_pred = predict(cfg_.predictor, prev.row(row - 1).transpose(), prev.row(row + 1).transpose());
    }
    const Vector e_y = ms_.y.row(row).transpose() - row_measure(i, x_pred);
    const SparseSolution sol = rows_[i].solve(e_y, cfg_.solver);
    next.x.row(row) = (x_pred + synthesize(sol.theta)).transpose();
    failed[i] = sol.converged ? 0 : 1;
  });
  next.failed_rows = collect_failed(failed);
  return next;
}

Vector RowDecoder::measurement_residuals(const Image& x) const {
  const std::size_t n_row = ms_.ensemble.n_row;
  require(static_cast<std::size_t>(x.rows()) == n_row &&
              static_cast<std::size_t>(x.cols()) == ms_.ensemble.n_col,
          ErrorKind::DimensionMismatch, "residuals: estimate shape does not match the measurements");
  Vector out(static_cast<Index>(n_row));
  for (std::size_t i = 0; i < n_row; ++i) {
    const auto row = static_cast<Index>(i);
    out[row] = (row_measure(i, x.row(row).transpose()) - ms_.y.row(row).transpose()).norm();
  }
  return out;
}

// ---------------------------------------------------------------------------

Estimate init_separate_rows(const MeasurementSet& ms, const ReconstructionConfig& cfg) {
  return RowDecoder(ms, cfg).init_separate_rows();
}

Estimate init_kcs(const MeasurementSet& ms, const ReconstructionConfig& cfg) {
  ms.validate();
  cfg.validate();
  const auto& ens = ms.ensemble;
  auto sensing = std::make_shared<BlockDiagOperator>(block_diag_operator(ens));
  auto synthesis = std::make_shared<KronSynthesisOperator>(
      SparsityBasis{cfg.basis, ens.n_row}, SparsityBasis{cfg.basis, ens.n_col});
  const ComposedOperator a(sensing, synthesis);

  const Vector y = Eigen::Map<const Vector>(ms.y.data(), ms.y.size());
  const SparseSolution sol = basis_pursuit(a, y, cfg.solver);

  Estimate est{Image(static_cast<Index>(ens.n_row), static_cast<Index>(ens.n_col)), {}};
  Eigen::Map<Vector>(est.x.data(), est.x.size()) = synthesis->apply(sol.theta);
  if (!sol.converged) {
    est.failed_rows.resize(ens.n_row);
    std::iota(est.failed_rows.begin(), est.failed_rows.end(), std::size_t{0});
  }
  return est;
}

Estimate iterate_once(const Image& prev, const MeasurementSet& ms, const ReconstructionConfig& cfg) {
  return RowDecoder(ms, cfg).iterate_once(prev);
}

double max_row_change(const Image& prev, const Image& next) {
  require(prev.rows() == next.rows() && prev.cols() == next.cols(), ErrorKind::DimensionMismatch,
          "row change: estimates differ in shape");
  double worst = 0.0;
  for (Index i = 0; i < next.rows(); ++i) {
    const double change = (next.row(i) - prev.row(i)).norm() / std::max(1e-12, next.row(i).norm());
    worst = std::max(worst, change);
  }
  return worst;
}

ReconstructionResult reconstruct(const MeasurementSet& ms, const ReconstructionConfig& cfg,
                                 const Image* reference, const IterationObserver& observer) {
  ms.validate();
  cfg.validate();
  if (reference) {
    require(static_cast<std::size_t>(reference->rows()) == ms.ensemble.n_row &&
                static_cast<std::size_t>(reference->cols()) == ms.ensemble.n_col,
            ErrorKind::DimensionMismatch, "reference image does not match the measurement dimensions");
  }
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
  const double nan = std::numeric_limits<double>::quiet_NaN();

  std::optional<RowDecoder> decoder;
  if (cfg.init == InitKind::SeparateRows || cfg.max_iterations > 0) decoder.emplace(ms, cfg);

  Estimate current =
      cfg.init == InitKind::Kcs ? init_kcs(ms, cfg) : decoder->init_separate_rows();

  ReconstructionResult result;
  result.trace.entries.push_back(
      {0, reference ? mse(*reference, current.x) : nan, nan, elapsed(), current.failed_rows.size()});
  if (observer) observer(0, current);

  for (int n = 1; n <= cfg.max_iterations; ++n) {
    Estimate next = decoder->iterate_once(current.x);
    const double change = max_row_change(current.x, next.x);
    current = std::move(next);
    result.trace.entries.push_back({n, reference ? mse(*reference, current.x) : nan, change,
                                    elapsed(), current.failed_rows.size()});
    if (observer) observer(n, current);
    if (change < cfg.conv_tol) {
      result.trace.converged_at = n;
      break;
    }
  }
  result.trace.failed_rows = current.failed_rows;
  result.x = std::move(current.x);
  return result;
}

}  // namespace lscs
