#include "lscs/acquisition.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "lscs/error.hpp"

namespace lscs {

namespace {

static_assert(std::endian::native == std::endian::little,
              "measurement I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.append(raw, sizeof(T));
}

template <typename T>
T get(std::string_view bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

// Minimal tokenizer for PGM headers (whitespace and '#' comments).
class PgmReader {
 public:
  explicit PgmReader(std::string_view bytes) : bytes_(bytes) {}

  unsigned long next_number(const char* what) {
    skip_space_and_comments();
    require(pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_])),
            ErrorKind::Format, std::string("PGM: expected ") + what);
    unsigned long value = 0;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      value = value * 10 + static_cast<unsigned long>(bytes_[pos_] - '0');
      require(value <= 1'000'000'000UL, ErrorKind::Format, std::string("PGM: ") + what + " too large");
      ++pos_;
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from raster data.
  void skip_single_space() {
    require(pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_])),
            ErrorKind::Format, "PGM: missing whitespace after header");
    ++pos_;
  }

  std::size_t pos() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

unsigned char quantize(double v) {
  if (!(v > 0.0)) return 0;  // also maps NaN to 0
  const double scaled = std::round(v * 255.0);
  return static_cast<unsigned char>(std::min(scaled, 255.0));
}

}  // namespace

void MeasurementSet::validate() const {
  ensemble.validate();
  require(static_cast<std::size_t>(y.rows()) == ensemble.n_row &&
              static_cast<std::size_t>(y.cols()) == ensemble.m,
          ErrorKind::DimensionMismatch, "measurement matrix shape does not match its ensemble");
  require(y.allFinite(), ErrorKind::Format, "measurement payload contains NaN or infinity");
}

MeasurementSet acquire(const Image& x, std::size_t m, std::uint64_t master_seed) {
  SensingEnsemble ensemble{master_seed, m, static_cast<std::size_t>(x.cols()),
                           static_cast<std::size_t>(x.rows())};
  ensemble.validate();
  MeasurementSet ms{ensemble, RowMatrix(x.rows(), static_cast<Index>(m))};
  for (Index i = 0; i < x.rows(); ++i) {
    const Matrix phi = gaussian_row_matrix(ensemble, static_cast<std::size_t>(i));
    ms.y.row(i).noalias() = (phi * x.row(i).transpose()).transpose();
  }
  return ms;
}

// ---------------------------------------------------------------------------
// PGM

Image parse_pgm(std::string_view bytes) {
  require(bytes.size() >= 2 && bytes[0] == 'P', ErrorKind::Format, "PGM: missing magic number");
  const bool plain = bytes[1] == '2';
  const bool raw = bytes[1] == '5';
  require(bytes[1] != '3' && bytes[1] != '6', ErrorKind::Format,
          "PGM: colour (PPM) images are not supported");
  require(plain || raw, ErrorKind::Format, "PGM: unsupported magic, expected P2 or P5");

  PgmReader reader(bytes.substr(2));
  const unsigned long width = reader.next_number("width");
  const unsigned long height = reader.next_number("height");
  const unsigned long maxval = reader.next_number("maxval");
  require(width > 0 && height > 0, ErrorKind::Format, "PGM: empty image");
  require(maxval >= 1, ErrorKind::Format, "PGM: maxval must be positive");
  require(maxval <= 255, ErrorKind::Format, "PGM: maxval > 255 is not supported");

  Image image(static_cast<Index>(height), static_cast<Index>(width));
  const double scale = 1.0 / static_cast<double>(maxval);
  const std::size_t count = width * height;

  if (raw) {
    reader.skip_single_space();
    const std::size_t start = 2 + reader.pos();
    require(bytes.size() - start >= count, ErrorKind::Format, "PGM: truncated raster data");
    for (std::size_t k = 0; k < count; ++k) {
      const auto v = static_cast<unsigned char>(bytes[start + k]);
      require(v <= maxval, ErrorKind::Format, "PGM: sample exceeds maxval");
      image.data()[k] = static_cast<double>(v) * scale;
    }
    return image;
  }

  for (std::size_t k = 0; k < count; ++k) {
    unsigned long v = 0;
    try {
      v = reader.next_number("sample");
    } catch (const Error&) {
      fail(ErrorKind::Format, "PGM: truncated raster data");
    }
    require(v <= maxval, ErrorKind::Format, "PGM: sample exceeds maxval");
    image.data()[k] = static_cast<double>(v) * scale;
  }
  return image;
}

Image load_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }

std::string encode_pgm(const Image& image) {
  require(image.size() > 0, ErrorKind::InvalidArgument, "cannot encode an empty image");
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) +
                    "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(image.size()));
  for (Index k = 0; k < image.size(); ++k) out.push_back(static_cast<char>(quantize(image.data()[k])));
  return out;
}

std::string encode_pgm_plain(const Image& image) {
  require(image.size() > 0, ErrorKind::InvalidArgument, "cannot encode an empty image");
  std::ostringstream out;
  out << "P2\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Index i = 0; i < image.rows(); ++i) {
    for (Index j = 0; j < image.cols(); ++j) {
      out << static_cast<unsigned>(quantize(image(i, j))) << (j + 1 == image.cols() ? '\n' : ' ');
    }
  }
  return out.str();
}

void write_pgm(const Image& image, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pgm(image));
}

// ---------------------------------------------------------------------------
// Measurement files

std::string encode_measurements(const MeasurementSet& ms) {
  ms.validate();
  std::string out;
  out.reserve(kMeasurementHeaderBytes + static_cast<std::size_t>(ms.y.size()) * sizeof(double));
  out.append(kMeasurementMagic);
  put<std::uint16_t>(out, kMeasurementVersion);
  put<std::uint16_t>(out, 0);
  put<std::uint64_t>(out, ms.ensemble.master_seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.ensemble.n_row));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.ensemble.n_col));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ms.ensemble.m));
  for (Index k = 0; k < ms.y.size(); ++k) put<double>(out, ms.y.data()[k]);
  return out;
}

MeasurementSet decode_measurements(std::string_view bytes) {
  require(bytes.size() >= kMeasurementMagic.size() &&
              bytes.substr(0, kMeasurementMagic.size()) == kMeasurementMagic,
          ErrorKind::Format, "measurement file: bad magic");
  require(bytes.size() >= kMeasurementHeaderBytes, ErrorKind::Format,
          "measurement file: truncated header");
  const auto version = get<std::uint16_t>(bytes, 4);
  require(version == kMeasurementVersion, ErrorKind::Format,
          "measurement file: version mismatch (found " + std::to_string(version) + ", expected " +
              std::to_string(kMeasurementVersion) + ")");
  require(get<std::uint16_t>(bytes, 6) == 0, ErrorKind::Format,
          "measurement file: reserved field is not zero");

  MeasurementSet ms;
  ms.ensemble.master_seed = get<std::uint64_t>(bytes, 8);
  ms.ensemble.n_row = get<std::uint32_t>(bytes, 16);
  ms.ensemble.n_col = get<std::uint32_t>(bytes, 20);
  ms.ensemble.m = get<std::uint32_t>(bytes, 24);
  try {
    ms.ensemble.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Format, std::string("measurement file: invalid dimensions: ") + e.what());
  }

  const std::size_t expected = ms.ensemble.n_row * ms.ensemble.m * sizeof(double);
  require(bytes.size() - kMeasurementHeaderBytes == expected, ErrorKind::Format,
          "measurement file: payload-length mismatch (expected " + std::to_string(expected) +
              " bytes, found " + std::to_string(bytes.size() - kMeasurementHeaderBytes) + ")");

  ms.y.resize(static_cast<Index>(ms.ensemble.n_row), static_cast<Index>(ms.ensemble.m));
  std::memcpy(ms.y.data(), bytes.data() + kMeasurementHeaderBytes, expected);
  require(ms.y.allFinite(), ErrorKind::Format, "measurement file: NaN or infinity in payload");
  return ms;
}

void write_measurements(const MeasurementSet& ms, const std::filesystem::path& path) {
  write_file_atomic(path, encode_measurements(ms));
}

MeasurementSet read_measurements(const std::filesystem::path& path) {
  return decode_measurements(read_file(path));
}

// ---------------------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), ErrorKind::Io, "error reading " + path.string());
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      fail(ErrorKind::Io, "error writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    std::filesystem::remove(tmp, ignored);
    fail(ErrorKind::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

}  // namespace lscs
