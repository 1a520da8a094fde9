#include <doctest.h>

#include <filesystem>
#include <iterator>
#include <fstream>
#include <sstream>
#include <string>

#include "../support.hpp"
#include "lscs/bench.hpp"
#include "lscs/error.hpp"
#include "lscs/metrics.hpp"

using namespace lscs;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lscs_unit" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// A small vertically smooth test image on disk.
std::filesystem::path write_test_image(const std::filesystem::path& dir) {
  const Image x = lscs::testing::smooth_dct_image(12, 32, {2, 5, 9}, 0.15);
  const auto path = dir / "img.pgm";
  write_pgm(x, path);
  return path;
}

}  // namespace

TEST_CASE("mse") {
  CHECK(mse(Image::Constant(3, 4, 0.2), Image::Constant(3, 4, 0.2)) == 0.0);
  CHECK(mse(Image::Zero(5, 2), Image::Ones(5, 2)) == 1.0);
  Image a = Image::Zero(1, 2);
  Image b(1, 2);
  b << 0.3, 0.4;
  CHECK(mse(a, b) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK_THROWS_AS(mse(Image::Zero(2, 2), Image::Zero(2, 3)), Error);
}

TEST_CASE("gain in decibels") {
  CHECK(std::abs(gain_db(4.16e-2, 3.96e-3) - 10.2) <= 0.05);
  CHECK(std::abs(gain_db(2.17e-2, 1.56e-3) - 11.4) <= 0.05);
  CHECK(gain_db(0.3, 0.3) == 0.0);
  CHECK(gain_db(1e-2, 1e-3) == doctest::Approx(-gain_db(1e-3, 1e-2)).epsilon(1e-15));
  CHECK(gain_db(1.0, 0.1) == doctest::Approx(10.0).epsilon(1e-15));
  CHECK_THROWS_AS(gain_db(0.0, 1.0), Error);
  CHECK_THROWS_AS(gain_db(1.0, -1.0), Error);
}

TEST_CASE("method names") {
  for (Method m : {Method::Srr, Method::Isrr, Method::Kcs, Method::Ikcs, Method::Omp})
    CHECK(parse_method(method_name(m)) == m);
  CHECK(parse_method("IKCS") == Method::Ikcs);
  CHECK_FALSE(parse_method("bp").has_value());
}

TEST_CASE("benchmark spec validation") {
  BenchmarkSpec spec;
  spec.m_values = {8};
  spec.methods = {Method::Srr};
  CHECK_NOTHROW(spec.validate(32));
  CHECK_THROWS_AS(spec.validate(8), Error);
  spec.m_values.clear();
  CHECK_THROWS_AS(spec.validate(32), Error);
  spec.m_values = {8};
  spec.methods.clear();
  CHECK_THROWS_AS(spec.validate(32), Error);
  spec.methods = {Method::Srr};
  spec.seeds.clear();
  CHECK_THROWS_AS(spec.validate(32), Error);
}

TEST_CASE("plot data") {
  CHECK(plot_csv({}) == "method,M,iteration,mse\n");

  auto entry = [](int n, double v) { return TraceEntry{n, v, 0.0, 0.0, 0}; };
  const RunTrace three{Method::Isrr, 16, 1, {entry(0, 4.0), entry(1, 3.0), entry(2, 2.0), entry(3, 1.0)}};
  CHECK(lines(plot_csv({three})).size() == 5);

  // Grouped by method (enum order), then M, then iteration; seeds averaged,
  // and a run that stopped early keeps contributing its last value.
  const RunTrace a1{Method::Isrr, 16, 1, {entry(0, 1.0), entry(1, 0.5)}};
  const RunTrace a2{Method::Isrr, 16, 2, {entry(0, 3.0)}};
  const RunTrace b{Method::Srr, 16, 1, {entry(0, 2.0)}};
  const RunTrace c{Method::Isrr, 8, 1, {entry(0, 7.0)}};
  const auto rows = lines(plot_csv({a1, b, a2, c}));
  REQUIRE(rows.size() == 5);
  CHECK(rows[1] == "srr,16,0,2.00000e+00");
  CHECK(rows[2] == "isrr,8,0,7.00000e+00");
  CHECK(rows[3] == "isrr,16,0,2.00000e+00");
  CHECK(rows[4] == "isrr,16,1,1.75000e+00");
}

TEST_CASE("records csv") {
  BenchmarkRecord r;
  r.method = Method::Ikcs;
  r.m = 8;
  r.seed = 3;
  r.init_mse = 4.6e-3;
  r.final_mse = 3.8e-3;
  r.gain_db = gain_db(r.init_mse, r.final_mse);
  r.iterations = 7;
  r.converged = true;
  r.wall_seconds = 1.5;
  const auto rows = lines(records_csv({r}));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "method,M,seed,init_mse,final_mse,gain_db,iterations,converged,failed_rows,wall_seconds");
  CHECK(rows[1] == "ikcs,8,3,4.60000e-03,3.80000e-03,8.29742e-01,7,1,0,1.50000e+00");
}

TEST_CASE("run_benchmark on a small image") {
  const auto dir = scratch_dir("bench");
  BenchmarkSpec spec;
  spec.image = write_test_image(dir);
  spec.m_values = {12, 8};
  spec.methods = {Method::Isrr, Method::Srr};
  spec.seeds = {1, 2};
  spec.max_iterations = 5;
  spec.output = dir / "records.csv";
  const BenchmarkResult res = run_benchmark(spec);

  REQUIRE(res.records.size() == 2 * 2 * 2);
  // Ordered by method, then M, then seed position.
  CHECK(res.records[0].method == Method::Srr);
  CHECK(res.records[0].m == 8);
  CHECK(res.records[0].seed == 1);
  CHECK(res.records[1].seed == 2);
  CHECK(res.records[4].method == Method::Isrr);
  for (const BenchmarkRecord& r : res.records) {
    if (r.method == Method::Srr) {
      CHECK(r.init_mse == r.final_mse);
      CHECK(r.gain_db == 0.0);
      CHECK(r.iterations == 0);
    } else if (r.init_mse > 0.0 && r.final_mse > 0.0) {
      CHECK(r.gain_db == doctest::Approx(gain_db(r.init_mse, r.final_mse)).epsilon(1e-12));
    }
  }
  // SRR is the initialisation of the matching ISRR run.
  CHECK(res.records[0].init_mse == res.records[4].init_mse);

  const std::string csv = read_file(spec.output);
  CHECK(lines(csv).size() == 9);
  CHECK(std::filesystem::exists(plot_path(spec.output)));
  for (const RunTrace& t : res.traces) {
    const auto trace = lines(read_file(trace_path(spec.output, t)));
    CHECK(trace.size() == t.entries.size() + 1);
    CHECK(trace[0] == "iteration,mse,max_row_change,failed_rows,seconds");
  }
  CHECK(std::filesystem::exists(dir / "records_isrr_m8_s2_trace.csv"));
}

TEST_CASE("run_benchmark writes nothing when the image is missing") {
  const auto dir = scratch_dir("bench_missing");
  BenchmarkSpec spec;
  spec.image = dir / "missing.pgm";
  spec.m_values = {8};
  spec.methods = {Method::Srr};
  spec.output = dir / "records.csv";
  try {
    run_benchmark(spec);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  CHECK(std::filesystem::is_empty(dir));
}

TEST_CASE("run_benchmark with the Kronecker and greedy methods") {
  const auto dir = scratch_dir("bench_kcs");
  BenchmarkSpec spec;
  spec.image = write_test_image(dir);
  spec.m_values = {8};
  spec.methods = {Method::Omp, Method::Kcs, Method::Ikcs};
  spec.max_iterations = 3;
  const BenchmarkResult res = run_benchmark(spec);
  REQUIRE(res.records.size() == 3);
  CHECK(res.records[0].method == Method::Kcs);
  CHECK(res.records[1].method == Method::Ikcs);
  CHECK(res.records[2].method == Method::Omp);
  CHECK(res.records[0].init_mse == res.records[1].init_mse);
  CHECK(res.records[2].iterations == 0);
  CHECK(res.records[2].final_mse > 0.0);
  // No output path: nothing but the input image in the directory.
  CHECK(std::distance(std::filesystem::directory_iterator(dir), std::filesystem::directory_iterator{}) == 1);
}
