#pragma once

// Benchmark harness: runs every (method, M, seed) combination on one image
// and writes one CSV record per run, a per-iteration trace CSV per run and
// seed-averaged plot data.
//
// CSV numbers use scientific notation with 6 significant digits. The
// wall_seconds column is the only non-deterministic output and is always
// the last column of the records file.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lscs/reconstruction.hpp"

namespace lscs {

// SRR / KCS are the initialisations alone, ISRR / IKCS add the iterative
// correction. OMP is the greedy baseline on the whole image with the same
// total budget M * n_row.
enum class Method { Srr, Isrr, Kcs, Ikcs, Omp };

std::string_view method_name(Method method) noexcept;
std::optional<Method> parse_method(std::string_view name) noexcept;

struct BenchmarkSpec {
  std::filesystem::path image;
  std::vector<std::size_t> m_values;
  std::vector<Method> methods;
  std::vector<std::uint64_t> seeds{1};
  PredictorKind predictor = PredictorKind::P3;
  BasisKind basis = BasisKind::Dct;
  // Records CSV. Traces go next to it as <stem>_<method>_m<M>_s<seed>_trace.csv
  // and plot data as <stem>_plot.csv. Empty: nothing is written.
  std::filesystem::path output;
  int max_iterations = 30;
  double conv_tol = 1e-4;
  SolverConfig solver;
  unsigned threads = 1;

  // Throws InvalidArgument on empty lists or an M outside (0, n_col).
  void validate(std::size_t n_col) const;
};

struct BenchmarkRecord {
  Method method = Method::Srr;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  double init_mse = 0.0;
  double final_mse = 0.0;
  double gain_db = 0.0;
  int iterations = 0;  // iterations performed after the initialisation
  bool converged = false;
  std::size_t failed_rows = 0;
  double wall_seconds = 0.0;
};

struct RunTrace {
  Method method = Method::Srr;
  std::size_t m = 0;
  std::uint64_t seed = 0;
  std::vector<TraceEntry> entries;
};

struct BenchmarkResult {
  std::vector<BenchmarkRecord> records;
  std::vector<RunTrace> traces;
};

// The image is loaded and the spec validated before anything is written.
// Solver failures are recorded (failed_rows, converged) rather than thrown.
BenchmarkResult run_benchmark(const BenchmarkSpec& spec);

std::string records_csv(const std::vector<BenchmarkRecord>& records);
std::string trace_csv(const RunTrace& trace);

// Columns method,M,iteration,mse; MSE averaged over the seeds of each
// (method, M). A run that stopped early contributes its final MSE to later
// iterations. Ordered by method (enum order), M, iteration.
std::string plot_csv(const std::vector<RunTrace>& traces);
void emit_plot_data(const std::vector<RunTrace>& traces, const std::filesystem::path& path);

std::filesystem::path trace_path(const std::filesystem::path& output, const RunTrace& trace);
std::filesystem::path plot_path(const std::filesystem::path& output);

}  // namespace lscs
