#pragma once

// Shared fixtures: seeded random instances and small synthetic images.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "lscs/acquisition.hpp"
#include "lscs/tensor_core.hpp"

namespace lscs::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) a(i, j) = g(rng);
  return a;
}

inline Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

// Distinct sorted indices drawn uniformly from [0, n).
inline std::vector<Index> random_support(Index n, Index k, std::mt19937_64& rng) {
  std::vector<Index> all(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Index> s(all.begin(), all.begin() + k);
  std::sort(s.begin(), s.end());
  return s;
}

// K random +-1 spikes.
inline Vector sparse_spikes(Index n, Index k, std::mt19937_64& rng) {
  Vector x = Vector::Zero(n);
  std::bernoulli_distribution coin(0.5);
  for (Index j : random_support(n, k, rng)) x[j] = coin(rng) ? 1.0 : -1.0;
  return x;
}

// Rows are combinations of the same few DCT atoms whose weights vary
// slowly down the image, plus a DC offset that keeps pixels in [0, 1].
inline Image smooth_dct_image(Index n_row, Index n_col, const std::vector<Index>& atoms, double phase) {
  const Matrix psi = dct_synthesis(static_cast<std::size_t>(n_col));
  Image x(n_row, n_col);
  for (Index i = 0; i < n_row; ++i) {
    Vector row = 0.5 * std::sqrt(static_cast<double>(n_col)) * psi.col(0);
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const double t = static_cast<double>(i) / static_cast<double>(n_row);
      const double w = 0.6 / static_cast<double>(k + 1) *
                       std::cos(2.0 * std::numbers::pi * (t + phase * static_cast<double>(k + 1)));
      row += w * psi.col(atoms[k]);
    }
    x.row(i) = row.transpose();
  }
  return x;
}

// Every row is K-sparse in the identity basis with values in [0.2, 1].
inline Image sparse_row_image(Index n_row, Index n_col, Index k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 1.0);
  Image x = Image::Zero(n_row, n_col);
  for (Index i = 0; i < n_row; ++i)
    for (Index j : random_support(n_col, k, rng)) x(i, j) = u(rng);
  return x;
}

}  // namespace lscs::testing
