#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <string>

#include "../support.hpp"
#include "lscs/acquisition.hpp"
#include "lscs/error.hpp"

using namespace lscs;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "lscs_unit";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Image random_image(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image x(rows, cols);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

std::string error_text(const std::string& bytes) {
  try {
    decode_measurements(bytes);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("acquire measures every row with its own matrix") {
  const Image x = random_image(6, 20, 1);
  const MeasurementSet ms = acquire(x, 5, 42);
  CHECK(ms.ensemble == SensingEnsemble{42, 5, 20, 6});
  REQUIRE(ms.y.rows() == 6);
  REQUIRE(ms.y.cols() == 5);
  for (Index i = 0; i < 6; ++i) {
    const Vector expected = gaussian_row_matrix(ms.ensemble, static_cast<std::size_t>(i)) * x.row(i).transpose();
    CHECK((ms.y.row(i).transpose() - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  const MeasurementSet again = acquire(x, 5, 42);
  CHECK((again.y.array() == ms.y.array()).all());
}

TEST_CASE("acquire is linear") {
  const Image a = random_image(4, 16, 2);
  const Image b = random_image(4, 16, 3);
  CHECK(acquire(Image::Zero(4, 16), 4, 9).y.isZero(0.0));
  const RowMatrix sum = acquire(a, 4, 9).y + acquire(b, 4, 9).y;
  CHECK((acquire(a + b, 4, 9).y - sum).cwiseAbs().maxCoeff() < 1e-12);
  const RowMatrix comb = 0.3 * acquire(a, 4, 9).y - 1.7 * acquire(b, 4, 9).y;
  CHECK((acquire(0.3 * a - 1.7 * b, 4, 9).y - comb).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("acquire dimension accounting and preconditions") {
  const Image x = Image::Constant(512, 512, 0.5);
  const MeasurementSet ms = acquire(x, 64, 1);
  CHECK(ms.y.size() == 512 * 64);
  CHECK(x.size() / ms.y.size() == 8);
  CHECK_THROWS_AS(acquire(Image::Zero(3, 8), 8, 1), Error);
  CHECK_THROWS_AS(acquire(Image::Zero(3, 8), 0, 1), Error);
}

TEST_CASE("pgm parsing") {
  SUBCASE("plain 2x2") {
    const Image x = parse_pgm("P2\n# corner test\n2 2\n255\n0 255\n255 0\n");
    REQUIRE(x.rows() == 2);
    REQUIRE(x.cols() == 2);
    CHECK(x(0, 0) == 0.0);
    CHECK(x(0, 1) == 1.0);
    CHECK(x(1, 0) == 1.0);
    CHECK(x(1, 1) == 0.0);
  }
  SUBCASE("maxval scaling") {
    const Image x = parse_pgm("P2 3 1 4 0 2 4");
    CHECK(x(0, 1) == 0.5);
    CHECK(x(0, 2) == 1.0);
  }
  SUBCASE("raw and plain encodings agree") {
    const Image x = random_image(7, 5, 4);
    const Image raw = parse_pgm(encode_pgm(x));
    const Image plain = parse_pgm(encode_pgm_plain(x));
    CHECK((raw.array() == plain.array()).all());
  }
  SUBCASE("malformed input") {
    CHECK_THROWS_AS(parse_pgm(""), Error);
    CHECK_THROWS_AS(parse_pgm("P3\n1 1\n255\n0 0 0\n"), Error);
    CHECK_THROWS_AS(parse_pgm("P6\n1 1\n255\n\x01\x02\x03"), Error);
    CHECK_THROWS_AS(parse_pgm("P5\n2 2\n65535\n"), Error);
    CHECK_THROWS_AS(parse_pgm("P5\n2 2\n255\n\x01\x02\x03"), Error);
    CHECK_THROWS_AS(parse_pgm("P2\n2 2\n255\n1 2 3"), Error);
    CHECK_THROWS_AS(parse_pgm("P2\n2 1\n10\n1 11"), Error);
    CHECK_THROWS_AS(parse_pgm("P2\n0 2\n255\n"), Error);
    CHECK_THROWS_AS(parse_pgm("P2\nx 2\n255\n"), Error);
    try {
      parse_pgm("P5\n2 2\n255\n\x01");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Format);
      CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    }
  }
}

TEST_CASE("pgm write and load") {
  const Image x = random_image(9, 13, 5);
  const auto path = scratch("roundtrip.pgm");
  write_pgm(x, path);
  const Image back = load_pgm(path);
  REQUIRE(back.rows() == 9);
  REQUIRE(back.cols() == 13);
  CHECK((back - x).cwiseAbs().maxCoeff() <= 1.0 / (2.0 * 255.0) + 1e-15);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));

  // Out-of-range estimates are clamped when written.
  Image wild(1, 3);
  wild << -0.4, 0.5, 1.8;
  const Image clamped = parse_pgm(encode_pgm(wild));
  CHECK(clamped(0, 0) == 0.0);
  CHECK(clamped(0, 1) == 128.0 / 255.0);
  CHECK(clamped(0, 2) == 1.0);

  try {
    load_pgm(scratch("does_not_exist.pgm"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("measurement file format") {
  const Image x = random_image(5, 11, 6);
  const MeasurementSet ms = acquire(x, 3, 0xDEADBEEFCAFEULL);
  const std::string bytes = encode_measurements(ms);
  REQUIRE(bytes.size() == kMeasurementHeaderBytes + 5 * 3 * sizeof(double));
  CHECK(bytes.substr(0, 4) == "LSCS");

  SUBCASE("header layout") {
    std::uint16_t version = 0;
    std::uint64_t seed = 0;
    std::uint32_t dims[3] = {};
    std::memcpy(&version, bytes.data() + 4, 2);
    std::memcpy(&seed, bytes.data() + 8, 8);
    std::memcpy(dims, bytes.data() + 16, 12);
    CHECK(version == 1);
    CHECK(seed == 0xDEADBEEFCAFEULL);
    CHECK(dims[0] == 5);
    CHECK(dims[1] == 11);
    CHECK(dims[2] == 3);
  }
  SUBCASE("round trip is bit identical") {
    const auto path = scratch("roundtrip.lscs");
    write_measurements(ms, path);
    const MeasurementSet back = read_measurements(path);
    CHECK(back.ensemble == ms.ensemble);
    CHECK(std::memcmp(back.y.data(), ms.y.data(), sizeof(double) * 15) == 0);
    CHECK(encode_measurements(back) == bytes);
  }
  SUBCASE("errors") {
    CHECK(error_text(bytes.substr(0, bytes.size() - 8)).find("payload-length mismatch") != std::string::npos);
    CHECK(error_text(bytes + "x").find("payload-length mismatch") != std::string::npos);
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK(error_text(magic).find("bad magic") != std::string::npos);
    std::string version = bytes;
    version[4] = 2;
    CHECK(error_text(version).find("version mismatch") != std::string::npos);
    std::string nan = bytes;
    const double q = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(nan.data() + kMeasurementHeaderBytes + 8, &q, 8);
    CHECK(error_text(nan).find("NaN") != std::string::npos);
    std::string dims = bytes;
    const std::uint32_t m_too_big = 11;
    std::memcpy(dims.data() + 24, &m_too_big, 4);
    CHECK_FALSE(error_text(dims).empty());
    CHECK_FALSE(error_text(bytes.substr(0, 10)).empty());
  }
}
