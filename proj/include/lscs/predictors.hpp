#pragma once

// Inter-row linear predictors: estimate a row from the rows directly above
// and below it.
//
//   P1  (u_j + l_j) / 2
//   P2  mean of the six pixels u_{j-1..j+1}, l_{j-1..j+1}
//   P3  a * (u_{j-1} + u_{j+1} + l_{j-1} + l_{j+1}) + b * (u_j + l_j)
//       with a = (2 - sqrt2) / 4 and b = (sqrt2 - 1) / 2, so 4a + 2b = 1.
//
// Column indices outside the row are clamped to the nearest edge pixel, so
// every stencil keeps unit weight sum at the borders as well.

#include <cstddef>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace lscs {

enum class PredictorKind { P1, P2, P3 };

// Diagonal (a) and vertical (b) weights of the symmetric 2x3 stencil.
struct StencilWeights {
  double diagonal;
  double vertical;
};

inline constexpr double kP3Diagonal = 0.1464466094067262377995778189475754803;  // (2 - sqrt2) / 4
inline constexpr double kP3Vertical = 0.2071067811865475244008443621048490393;  // (sqrt2 - 1) / 2

StencilWeights stencil_weights(PredictorKind kind) noexcept;

// Clamped column index; the single place that decides border handling.
inline Eigen::Index clamp_column(Eigen::Index j, Eigen::Index n) noexcept {
  return j < 0 ? 0 : (j >= n ? n - 1 : j);
}

Eigen::VectorXd predict_stencil(const StencilWeights& w, const Eigen::Ref<const Eigen::VectorXd>& upper,
                                const Eigen::Ref<const Eigen::VectorXd>& lower);

Eigen::VectorXd predict(PredictorKind kind, const Eigen::Ref<const Eigen::VectorXd>& upper,
                        const Eigen::Ref<const Eigen::VectorXd>& lower);

std::string_view predictor_name(PredictorKind kind) noexcept;
std::optional<PredictorKind> parse_predictor(std::string_view name) noexcept;

}  // namespace lscs
