#include "lscs/bench.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <tuple>

#include "lscs/error.hpp"
#include "lscs/metrics.hpp"

namespace lscs {

namespace {

constexpr std::array<std::string_view, 5> kMethodNames{"srr", "isrr", "kcs", "ikcs", "omp"};

std::string sci(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

bool has(const std::vector<Method>& methods, Method m) {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

BenchmarkRecord record_from(Method method, std::size_t m, std::uint64_t seed,
                            const std::vector<TraceEntry>& entries, bool converged,
                            std::size_t failed, double seconds) {
  BenchmarkRecord r;
  r.method = method;
  r.m = m;
  r.seed = seed;
  r.init_mse = entries.front().mse;
  r.final_mse = entries.back().mse;
  r.gain_db = (r.init_mse > 0.0 && r.final_mse > 0.0) ? gain_db(r.init_mse, r.final_mse) : 0.0;
  r.iterations = entries.back().iteration;
  r.converged = converged;
  r.failed_rows = failed;
  r.wall_seconds = seconds;
  return r;
}

// One initialisation shared by the plain and the iterated method.
void run_pair(const Image& image, const MeasurementSet& ms, const BenchmarkSpec& spec, InitKind init,
              Method plain, Method iterated, BenchmarkResult& out) {
  const bool want_plain = has(spec.methods, plain);
  const bool want_iter = has(spec.methods, iterated);
  if (!want_plain && !want_iter) return;
  ReconstructionConfig cfg;
  cfg.predictor = spec.predictor;
  cfg.init = init;
  cfg.max_iterations = want_iter ? spec.max_iterations : 0;
  cfg.conv_tol = spec.conv_tol;
  cfg.solver = spec.solver;
  cfg.basis = spec.basis;
  cfg.threads = spec.threads;

  const auto start = std::chrono::steady_clock::now();
  const ReconstructionResult res = reconstruct(ms, cfg, &image);
  const double total = seconds_since(start);
  const auto& entries = res.trace.entries;
  const std::size_t m = ms.ensemble.m;
  const std::uint64_t seed = ms.ensemble.master_seed;

  if (want_plain) {
    std::vector<TraceEntry> init_only{entries.front()};
    out.records.push_back(record_from(plain, m, seed, init_only, entries.front().failed_rows == 0,
                                      entries.front().failed_rows, entries.front().seconds));
    out.traces.push_back({plain, m, seed, init_only});
  }
  if (want_iter) {
    out.records.push_back(record_from(iterated, m, seed, entries, res.trace.converged_at.has_value(),
                                      res.trace.failed_rows.size(), total));
    out.traces.push_back({iterated, m, seed, entries});
  }
}

void run_omp_baseline(const Image& image, const MeasurementSet& ms, const BenchmarkSpec& spec,
                      BenchmarkResult& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto& ens = ms.ensemble;
  auto sensing = std::make_shared<BlockDiagOperator>(block_diag_operator(ens));
  auto synthesis = std::make_shared<KronSynthesisOperator>(SparsityBasis{spec.basis, ens.n_row},
                                                           SparsityBasis{spec.basis, ens.n_col});
  const ComposedOperator a(sensing, synthesis);
  const Vector y = Eigen::Map<const Vector>(ms.y.data(), ms.y.size());
  const SparseSolution sol = omp(a, y, spec.solver);

  Image x(image.rows(), image.cols());
  Eigen::Map<Vector>(x.data(), x.size()) = synthesis->apply(sol.theta);
  const double seconds = seconds_since(start);
  // Stopping at the atom cap is OMP's normal exit; it shows up as
  // converged = 0 but is not counted as failed rows.
  TraceEntry e{0, mse(image, x), std::numeric_limits<double>::quiet_NaN(), seconds, 0};
  out.records.push_back(record_from(Method::Omp, ens.m, ens.master_seed, {e}, sol.converged,
                                    e.failed_rows, seconds));
  out.traces.push_back({Method::Omp, ens.m, ens.master_seed, {e}});
}

}  // namespace

std::string_view method_name(Method method) noexcept {
  return kMethodNames[static_cast<std::size_t>(method)];
}

std::optional<Method> parse_method(std::string_view name) noexcept {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (std::size_t k = 0; k < kMethodNames.size(); ++k) {
    if (lower == kMethodNames[k]) return static_cast<Method>(k);
  }
  return std::nullopt;
}

void BenchmarkSpec::validate(std::size_t n_col) const {
  require(!m_values.empty(), ErrorKind::InvalidArgument, "benchmark needs at least one M value");
  require(!methods.empty(), ErrorKind::InvalidArgument, "benchmark needs at least one method");
  require(!seeds.empty(), ErrorKind::InvalidArgument, "benchmark needs at least one seed");
  for (std::size_t m : m_values) {
    require(m > 0 && m < n_col, ErrorKind::InvalidArgument,
            "benchmark M=" + std::to_string(m) + " violates 0 < M < N_COL=" + std::to_string(n_col));
  }
  require(max_iterations >= 0, ErrorKind::InvalidArgument, "max_iterations must be non-negative");
  require(conv_tol > 0.0, ErrorKind::InvalidArgument, "conv_tol must be positive");
  solver.validate();
}

BenchmarkResult run_benchmark(const BenchmarkSpec& spec) {
  const Image image = load_pgm(spec.image);
  spec.validate(static_cast<std::size_t>(image.cols()));

  // Duplicates in the lists would only repeat runs.
  std::vector<std::size_t> ms_list = spec.m_values;
  std::sort(ms_list.begin(), ms_list.end());
  ms_list.erase(std::unique(ms_list.begin(), ms_list.end()), ms_list.end());

  BenchmarkResult out;
  for (std::size_t m : ms_list) {
    for (std::uint64_t seed : spec.seeds) {
      const MeasurementSet ms = acquire(image, m, seed);
      run_pair(image, ms, spec, InitKind::SeparateRows, Method::Srr, Method::Isrr, out);
      run_pair(image, ms, spec, InitKind::Kcs, Method::Kcs, Method::Ikcs, out);
      if (has(spec.methods, Method::Omp)) run_omp_baseline(image, ms, spec, out);
    }
  }
  auto key = [](Method method, std::size_t m, std::size_t seed_pos) {
    return std::make_tuple(static_cast<int>(method), m, seed_pos);
  };
  auto seed_pos = [&](std::uint64_t s) {
    return static_cast<std::size_t>(std::find(spec.seeds.begin(), spec.seeds.end(), s) - spec.seeds.begin());
  };
  std::stable_sort(out.records.begin(), out.records.end(), [&](const auto& a, const auto& b) {
    return key(a.method, a.m, seed_pos(a.seed)) < key(b.method, b.m, seed_pos(b.seed));
  });
  std::stable_sort(out.traces.begin(), out.traces.end(), [&](const auto& a, const auto& b) {
    return key(a.method, a.m, seed_pos(a.seed)) < key(b.method, b.m, seed_pos(b.seed));
  });

  if (!spec.output.empty()) {
    for (const RunTrace& t : out.traces) write_file_atomic(trace_path(spec.output, t), trace_csv(t));
    emit_plot_data(out.traces, plot_path(spec.output));
    write_file_atomic(spec.output, records_csv(out.records));
  }
  return out;
}

std::string records_csv(const std::vector<BenchmarkRecord>& records) {
  std::string csv =
      "method,M,seed,init_mse,final_mse,gain_db,iterations,converged,failed_rows,wall_seconds\n";
  for (const BenchmarkRecord& r : records) {
    csv += std::string(method_name(r.method)) + ',' + std::to_string(r.m) + ',' + std::to_string(r.seed) +
           ',' + sci(r.init_mse) + ',' + sci(r.final_mse) + ',' + sci(r.gain_db) + ',' +
           std::to_string(r.iterations) + ',' + (r.converged ? "1" : "0") + ',' +
           std::to_string(r.failed_rows) + ',' + sci(r.wall_seconds) + '\n';
  }
  return csv;
}

std::string trace_csv(const RunTrace& trace) {
  std::string csv = "iteration,mse,max_row_change,failed_rows,seconds\n";
  for (const TraceEntry& e : trace.entries) {
    csv += std::to_string(e.iteration) + ',' + sci(e.mse) + ',' + sci(e.max_row_change) + ',' +
           std::to_string(e.failed_rows) + ',' + sci(e.seconds) + '\n';
  }
  return csv;
}

std::string plot_csv(const std::vector<RunTrace>& traces) {
  std::map<std::pair<int, std::size_t>, std::vector<const RunTrace*>> groups;
  for (const RunTrace& t : traces) {
    if (!t.entries.empty()) groups[{static_cast<int>(t.method), t.m}].push_back(&t);
  }
  std::string csv = "method,M,iteration,mse\n";
  for (const auto& [k, runs] : groups) {
    int last = 0;
    for (const RunTrace* t : runs) last = std::max(last, t->entries.back().iteration);
    for (int n = 0; n <= last; ++n) {
      double sum = 0.0;
      for (const RunTrace* t : runs) {
        const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(n), t->entries.size() - 1);
        sum += t->entries[idx].mse;
      }
      csv += std::string(method_name(static_cast<Method>(k.first))) + ',' + std::to_string(k.second) +
             ',' + std::to_string(n) + ',' + sci(sum / static_cast<double>(runs.size())) + '\n';
    }
  }
  return csv;
}

void emit_plot_data(const std::vector<RunTrace>& traces, const std::filesystem::path& path) {
  write_file_atomic(path, plot_csv(traces));
}

std::filesystem::path trace_path(const std::filesystem::path& output, const RunTrace& trace) {
  const std::string name = output.stem().string() + "_" + std::string(method_name(trace.method)) + "_m" +
                           std::to_string(trace.m) + "_s" + std::to_string(trace.seed) + "_trace.csv";
  return output.parent_path() / name;
}

std::filesystem::path plot_path(const std::filesystem::path& output) {
  return output.parent_path() / (output.stem().string() + "_plot.csv");
}

}  // namespace lscs
