#include "lscs/metrics.hpp"

#include <cmath>

#include "lscs/error.hpp"

namespace lscs {

double mse(const Image& a, const Image& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::DimensionMismatch,
          "mse: images differ in shape");
  require(a.size() > 0, ErrorKind::InvalidArgument, "mse: empty images");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

double gain_db(double mse_init, double mse_final) {
  require(mse_init > 0.0 && mse_final > 0.0, ErrorKind::InvalidArgument,
          "gain_db: both MSE values must be positive");
  return 10.0 * std::log10(mse_init / mse_final);
}

}  // namespace lscs
