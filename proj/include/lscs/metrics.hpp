#pragma once

#include "lscs/acquisition.hpp"

namespace lscs {

// Mean squared pixel difference on the [0, 1] scale.
double mse(const Image& a, const Image& b);

// 10 log10(mse_init / mse_final). Both arguments must be positive.
double gain_db(double mse_init, double mse_final);

}  // namespace lscs
