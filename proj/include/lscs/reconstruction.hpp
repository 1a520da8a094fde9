#pragma once

// Joint decoder for line-by-line measurements.
//
// Every row is first recovered on its own (or the whole image at once with
// the Kronecker formulation). Each following iteration predicts row i from
// rows i-1 and i+1 of the previous estimate, measures the prediction with
// Phi^i, and adds the basis-pursuit reconstruction of the measurement-domain
// prediction error. Rows 0 and n_row-1 use their own previous estimate as
// the prediction. All rows of iteration n read only iteration n-1.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "lscs/acquisition.hpp"
#include "lscs/predictors.hpp"
#include "lscs/solvers.hpp"

namespace lscs {

enum class InitKind { SeparateRows, Kcs };

std::string_view init_name(InitKind kind) noexcept;

struct ReconstructionConfig {
  PredictorKind predictor = PredictorKind::P3;
  InitKind init = InitKind::SeparateRows;
  int max_iterations = 30;
  // Stop once max_i ||x_i^(n) - x_i^(n-1)|| / ||x_i^(n)|| < conv_tol.
  double conv_tol = 1e-4;
  SolverConfig solver;
  BasisKind basis = BasisKind::Dct;
  // Worker threads for per-row solves. Results do not depend on it.
  unsigned threads = 1;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double mse = 0.0;             // NaN without a reference image
  double max_row_change = 0.0;  // NaN for the initialisation
  double seconds = 0.0;         // cumulative wall time
  std::size_t failed_rows = 0;  // rows whose solver did not converge
};

struct ReconstructionTrace {
  std::vector<TraceEntry> entries;  // entries[0] is the initialisation
  std::optional<int> converged_at;
  // Rows flagged in the last produced estimate.
  std::vector<std::size_t> failed_rows;
};

// An estimate together with the rows whose solve did not converge. Flagged
// rows still hold the solver's best effort.
struct Estimate {
  Image x;
  std::vector<std::size_t> failed_rows;
};

// Holds the per-row systems A_i = Phi^i Psi (and their Gram factors) so that
// repeated iterations do not rebuild them.
class RowDecoder {
 public:
  RowDecoder(const MeasurementSet& ms, const ReconstructionConfig& cfg);

  Estimate init_separate_rows() const;
  Estimate iterate_once(const Image& prev) const;
  // Same update, visiting rows in `order` (a permutation of 0..n_row-1).
  Estimate iterate_once(const Image& prev, std::span<const std::size_t> order) const;

  // ||Phi^i x_i - y_i||_2 for every row.
  Vector measurement_residuals(const Image& x) const;

  const MeasurementSet& measurements() const { return ms_; }
  const ReconstructionConfig& config() const { return cfg_; }

 private:
  Vector row_measure(std::size_t row, const Vector& x) const;
  Vector synthesize(const Vector& theta) const;

  MeasurementSet ms_;
  ReconstructionConfig cfg_;
  Matrix psi_;  // empty for the identity basis
  std::vector<DenseBasisPursuit> rows_;
};

Estimate init_separate_rows(const MeasurementSet& ms, const ReconstructionConfig& cfg);

// One basis-pursuit solve over the whole image with the block-diagonal
// sensing operator composed with the separable 2D synthesis operator.
Estimate init_kcs(const MeasurementSet& ms, const ReconstructionConfig& cfg);

Estimate iterate_once(const Image& prev, const MeasurementSet& ms, const ReconstructionConfig& cfg);

// Largest per-row relative l2 change between two estimates.
double max_row_change(const Image& prev, const Image& next);

struct ReconstructionResult {
  Image x;
  ReconstructionTrace trace;
};

// Called after the initialisation (iteration 0) and after every iteration.
using IterationObserver = std::function<void(int iteration, const Estimate&)>;

ReconstructionResult reconstruct(const MeasurementSet& ms, const ReconstructionConfig& cfg,
                                 const Image* reference = nullptr,
                                 const IterationObserver& observer = {});

}  // namespace lscs
