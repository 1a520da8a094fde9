#include "lscs/predictors.hpp"

#include <cctype>
#include <string>

#include "lscs/error.hpp"

namespace lscs {

StencilWeights stencil_weights(PredictorKind kind) noexcept {
  switch (kind) {
    case PredictorKind::P1:
      return {0.0, 0.5};
    case PredictorKind::P2:
      return {1.0 / 6.0, 1.0 / 6.0};
    case PredictorKind::P3:
      break;
  }
  return {kP3Diagonal, kP3Vertical};
}

Eigen::VectorXd predict_stencil(const StencilWeights& w, const Eigen::Ref<const Eigen::VectorXd>& upper,
                                const Eigen::Ref<const Eigen::VectorXd>& lower) {
  require(upper.size() == lower.size(), ErrorKind::DimensionMismatch,
          "predictor: neighbour rows differ in length (" + std::to_string(upper.size()) + " vs " +
              std::to_string(lower.size()) + ")");
  require(upper.size() >= 1, ErrorKind::InvalidArgument, "predictor: empty rows");
  const Eigen::Index n = upper.size();
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index left = clamp_column(j - 1, n);
    const Eigen::Index right = clamp_column(j + 1, n);
    const double vertical = upper[j] + lower[j];
    if (w.diagonal == 0.0) {
      out[j] = w.vertical * vertical;
    } else {
      const double diagonal = (upper[left] + lower[left]) + (upper[right] + lower[right]);
      out[j] = w.diagonal * diagonal + w.vertical * vertical;
    }
  }
  return out;
}

Eigen::VectorXd predict(PredictorKind kind, const Eigen::Ref<const Eigen::VectorXd>& upper,
                        const Eigen::Ref<const Eigen::VectorXd>& lower) {
  return predict_stencil(stencil_weights(kind), upper, lower);
}

std::string_view predictor_name(PredictorKind kind) noexcept {
  switch (kind) {
    case PredictorKind::P1:
      return "p1";
    case PredictorKind::P2:
      return "p2";
    case PredictorKind::P3:
      break;
  }
  return "p3";
}

std::optional<PredictorKind> parse_predictor(std::string_view name) noexcept {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "p1") return PredictorKind::P1;
  if (lower == "p2") return PredictorKind::P2;
  if (lower == "p3") return PredictorKind::P3;
  return std::nullopt;
}

}  // namespace lscs
