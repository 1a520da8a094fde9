// lscs: line-by-line compressed sensing from the command line.
//
//   lscs acquire     --input img.pgm --m 64 --seed 1 --output img.lscs
//   lscs reconstruct --input img.lscs --output rec.pgm [--reference img.pgm --trace t.csv]
//   lscs bench       --spec bench.json | --image img.pgm --m 32,64 --methods srr,isrr ...
//   lscs info        --input img.lscs
//
// Exit codes: 0 success, 2 usage, 3 I/O or malformed file, 4 domain error.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lscs/bench.hpp"
#include "lscs/error.hpp"
#include "lscs/metrics.hpp"
#include "lscs/reconstruction.hpp"

namespace {

using namespace lscs;

constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDomain = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io:
    case ErrorKind::Format:
      return kExitIo;
    default:
      return kExitDomain;
  }
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return buf;
}

BasisKind parse_basis(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dct") return BasisKind::Dct;
  if (lower == "identity") return BasisKind::Identity;
  fail(ErrorKind::InvalidArgument, "unknown basis '" + name + "' (expected dct or identity)");
}

PredictorKind predictor_or_throw(const std::string& name) {
  auto p = parse_predictor(name);
  if (!p) fail(ErrorKind::InvalidArgument, "unknown predictor '" + name + "' (expected p1, p2 or p3)");
  return *p;
}

Method method_or_throw(const std::string& name) {
  auto m = parse_method(name);
  if (!m) fail(ErrorKind::InvalidArgument, "unknown method '" + name + "' (expected srr, isrr, kcs, ikcs or omp)");
  return *m;
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// --- acquire -------------------------------------------------------------

struct AcquireArgs {
  std::string input, output;
  std::size_t m = 0;
  std::uint64_t seed = 1;
};

void run_acquire(const AcquireArgs& a) {
  const Image x = load_pgm(a.input);
  require(a.m > 0 && a.m < static_cast<std::size_t>(x.cols()), ErrorKind::InvalidArgument,
          "--m must satisfy 0 < M < N_COL (M=" + std::to_string(a.m) +
              ", N_COL=" + std::to_string(x.cols()) + ")");
  const MeasurementSet ms = acquire(x, a.m, a.seed);
  write_measurements(ms, a.output);
  std::cout << "rows " << x.rows() << ", columns " << x.cols() << ", M " << a.m << " per row, seed "
            << a.seed << "\n"
            << "compression ratio " << fixed(static_cast<double>(x.cols()) / static_cast<double>(a.m), 2)
            << "\n"
            << "wrote " << a.output << "\n";
}

// --- reconstruct ---------------------------------------------------------

struct ReconstructArgs {
  std::string input, output, reference, trace;
  std::string init = "srr", predictor = "p3", basis = "dct";
  int max_iter = 30;
  double tol = 1e-4;
  unsigned threads = default_threads();
};

void run_reconstruct(const ReconstructArgs& a) {
  const MeasurementSet ms = read_measurements(a.input);
  ReconstructionConfig cfg;
  cfg.predictor = predictor_or_throw(a.predictor);
  cfg.basis = parse_basis(a.basis);
  if (a.init == "srr") {
    cfg.init = InitKind::SeparateRows;
  } else if (a.init == "kcs") {
    cfg.init = InitKind::Kcs;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown init '" + a.init + "' (expected srr or kcs)");
  }
  cfg.max_iterations = a.max_iter;
  cfg.conv_tol = a.tol;
  cfg.threads = a.threads;

  std::optional<Image> reference;
  if (!a.reference.empty()) reference = load_pgm(a.reference);

  const ReconstructionResult res = reconstruct(ms, cfg, reference ? &*reference : nullptr);
  const auto& entries = res.trace.entries;
  if (!a.trace.empty()) {
    RunTrace t{cfg.init == InitKind::Kcs ? Method::Ikcs : Method::Isrr, ms.ensemble.m,
               ms.ensemble.master_seed, entries};
    write_file_atomic(a.trace, trace_csv(t));
  }
  write_pgm(res.x, a.output);

  for (const TraceEntry& e : entries) {
    if (e.failed_rows > 0) {
      std::cerr << "warning: iteration " << e.iteration << ": solver did not converge on "
                << e.failed_rows << " row(s)\n";
    }
  }
  if (!res.trace.failed_rows.empty()) {
    std::cerr << "warning: rows without a converged solve in the final estimate:";
    for (std::size_t r : res.trace.failed_rows) std::cerr << ' ' << r;
    std::cerr << "\n";
  }

  const int steps = entries.back().iteration;
  if (reference) {
    const double init = entries.front().mse;
    const double last = entries.back().mse;
    std::cout << "init MSE " << sci(init) << "\n"
              << "final MSE " << sci(last) << "\n"
              << "gain dB " << ((init > 0.0 && last > 0.0) ? fixed(gain_db(init, last), 2) : "n/a") << "\n";
  }
  std::cout << "steps " << steps << (res.trace.converged_at ? " (converged)" : " (iteration cap)") << "\n"
            << "wrote " << a.output << "\n";
}

// --- bench ---------------------------------------------------------------

struct BenchArgs {
  std::string spec, image, output, predictor, basis;
  std::vector<std::size_t> m_values;
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  std::optional<int> max_iter;
  std::optional<double> tol;
  unsigned threads = default_threads();
};

BenchmarkSpec load_spec(const std::string& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, "bench spec " + path + ": " + e.what());
  }
  BenchmarkSpec s;
  try {
    if (j.contains("image")) s.image = j.at("image").get<std::string>();
    if (j.contains("output")) s.output = j.at("output").get<std::string>();
    if (j.contains("m_values")) s.m_values = j.at("m_values").get<std::vector<std::size_t>>();
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) s.methods.push_back(method_or_throw(m.get<std::string>()));
    }
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("predictor")) s.predictor = predictor_or_throw(j.at("predictor").get<std::string>());
    if (j.contains("basis")) s.basis = parse_basis(j.at("basis").get<std::string>());
    if (j.contains("max_iterations")) s.max_iterations = j.at("max_iterations").get<int>();
    if (j.contains("conv_tol")) s.conv_tol = j.at("conv_tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, "bench spec " + path + ": " + e.what());
  }
  return s;
}

void run_bench(const BenchArgs& a) {
  BenchmarkSpec s = a.spec.empty() ? BenchmarkSpec{} : load_spec(a.spec);
  if (!a.image.empty()) s.image = a.image;
  if (!a.output.empty()) s.output = a.output;
  if (!a.m_values.empty()) s.m_values = a.m_values;
  if (!a.methods.empty()) {
    s.methods.clear();
    for (const auto& m : a.methods) s.methods.push_back(method_or_throw(m));
  }
  if (!a.seeds.empty()) s.seeds = a.seeds;
  if (!a.predictor.empty()) s.predictor = predictor_or_throw(a.predictor);
  if (!a.basis.empty()) s.basis = parse_basis(a.basis);
  if (a.max_iter) s.max_iterations = *a.max_iter;
  if (a.tol) s.conv_tol = *a.tol;
  s.threads = a.threads;
  require(!s.image.empty(), ErrorKind::InvalidArgument, "bench: no image given (--image or spec \"image\")");
  require(!s.output.empty(), ErrorKind::InvalidArgument, "bench: no output given (--output or spec \"output\")");

  const BenchmarkResult res = run_benchmark(s);
  std::cout << "method      M   seed   init_mse     final_mse    gain_dB  steps\n";
  for (const BenchmarkRecord& r : res.records) {
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %6zu %6llu   %.5e  %.5e  %7.2f  %5d%s\n",
                  std::string(method_name(r.method)).c_str(), r.m, static_cast<unsigned long long>(r.seed),
                  r.init_mse, r.final_mse, r.gain_db, r.iterations,
                  r.failed_rows > 0 ? "  (solver failures)" : "");
    std::cout << line;
  }
  std::cout << "wrote " << s.output.string() << " and " << plot_path(s.output).string() << "\n";
}

// --- info ----------------------------------------------------------------

void run_info(const std::string& input) {
  const MeasurementSet ms = read_measurements(input);
  std::cout << "magic ok (" << kMeasurementMagic << " v" << kMeasurementVersion << ")\n"
            << "seed " << ms.ensemble.master_seed << "\n"
            << "n_row " << ms.ensemble.n_row << "\n"
            << "n_col " << ms.ensemble.n_col << "\n"
            << "m " << ms.ensemble.m << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line-by-line compressed sensing: acquisition, reconstruction, benchmarks"};
  app.require_subcommand(1);

  AcquireArgs acq;
  auto* c_acq = app.add_subcommand("acquire", "Measure every row of a PGM image");
  c_acq->add_option("--input", acq.input, "Input PGM image")->required();
  c_acq->add_option("--m", acq.m, "Measurements per row")->required();
  c_acq->add_option("--seed", acq.seed, "Master seed")->capture_default_str();
  c_acq->add_option("--output", acq.output, "Measurement file to write")->required();

  ReconstructArgs rec;
  auto* c_rec = app.add_subcommand("reconstruct", "Reconstruct an image from a measurement file");
  c_rec->add_option("--input", rec.input, "Measurement file")->required();
  c_rec->add_option("--output", rec.output, "Output PGM image")->required();
  c_rec->add_option("--init", rec.init, "Initialisation: srr or kcs")->capture_default_str();
  c_rec->add_option("--predictor", rec.predictor, "Row predictor: p1, p2 or p3")->capture_default_str();
  c_rec->add_option("--basis", rec.basis, "Sparsity basis: dct or identity")->capture_default_str();
  c_rec->add_option("--max-iter", rec.max_iter, "Maximum iterations after the initialisation")
      ->capture_default_str();
  c_rec->add_option("--tol", rec.tol, "Stop when the largest relative row change is below this")
      ->capture_default_str();
  c_rec->add_option("--reference", rec.reference, "Original PGM image, enables MSE reporting");
  c_rec->add_option("--trace", rec.trace, "Per-iteration trace CSV to write");
  c_rec->add_option("--threads", rec.threads, "Worker threads")->capture_default_str();

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Run a benchmark over methods, M values and seeds");
  c_bench->add_option("--spec", bench.spec, "JSON benchmark spec; flags override its fields");
  c_bench->add_option("--image", bench.image, "Input PGM image");
  c_bench->add_option("--m", bench.m_values, "Measurements per row")->delimiter(',');
  c_bench->add_option("--methods", bench.methods, "srr, isrr, kcs, ikcs, omp")->delimiter(',');
  c_bench->add_option("--seeds", bench.seeds, "Master seeds")->delimiter(',');
  c_bench->add_option("--predictor", bench.predictor, "Row predictor: p1, p2 or p3");
  c_bench->add_option("--basis", bench.basis, "Sparsity basis: dct or identity");
  c_bench->add_option("--max-iter", bench.max_iter, "Maximum iterations");
  c_bench->add_option("--tol", bench.tol, "Convergence tolerance");
  c_bench->add_option("--output", bench.output, "Records CSV to write");
  c_bench->add_option("--threads", bench.threads, "Worker threads")->capture_default_str();

  std::string info_input;
  auto* c_info = app.add_subcommand("info", "Print the header of a measurement file");
  c_info->add_option("--input", info_input, "Measurement file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*c_acq) run_acquire(acq);
    if (*c_rec) run_reconstruct(rec);
    if (*c_bench) run_bench(bench);
    if (*c_info) run_info(info_input);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
