#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "feature_matrix.hpp"

namespace sddmon {

/// Covariance PCA truncated to the leading components that explain at least
/// `target` of the total variance.
struct PcaModel {
  std::vector<double> mean;                     // d
  std::vector<double> scale;                    // d, all ones unless standardised
  std::vector<std::vector<double>> components;  // k rows of length d, orthonormal
  std::vector<double> explained_ratio;          // k, non-increasing
  double target = 0.85;
  bool standardize = false;

  std::size_t input_dim() const noexcept { return mean.size(); }
  std::size_t output_dim() const noexcept { return components.size(); }
  bool operator==(const PcaModel&) const = default;
};

/// Fits PCA on `x`. k is the smallest count whose cumulative explained ratio
/// reaches `target`; each component's largest-magnitude coordinate is made
/// positive (first such coordinate on ties). With `standardize` columns are
/// z-scored before the decomposition.
inline PcaModel fit_pca(const FeatureMatrix& x, double target, bool standardize = false) {
  if (!(target > 0.0 && target <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "fit_pca: target must lie in (0,1]");
  if (x.rows() < 2) throw Error(ErrorCode::kInsufficientSamples, "fit_pca: need at least 2 rows");
  if (x.cols() < 1) throw Error(ErrorCode::kDimensionMismatch, "fit_pca: need at least 1 column");

  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd data(n, d);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      data(r, c) = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c));

  PcaModel model;
  model.target = target;
  model.standardize = standardize;
  const Eigen::RowVectorXd mean = data.colwise().mean();
  data.rowwise() -= mean;
  Eigen::RowVectorXd scale = Eigen::RowVectorXd::Ones(d);
  if (standardize) {
    for (Eigen::Index c = 0; c < d; ++c) {
      const double sd = std::sqrt(data.col(c).squaredNorm() / static_cast<double>(n - 1));
      scale[c] = sd > 0.0 ? sd : 1.0;
    }
    data.array().rowwise() /= scale.array();
  }
  const Eigen::MatrixXd cov = (data.transpose() * data) / static_cast<double>(n - 1);
  const double total = cov.trace();
  if (!(total > 0.0)) throw Error(ErrorCode::kDegenerateData, "fit_pca: zero total variance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorCode::kDegenerateData, "fit_pca: eigen-decomposition failed");

  struct Component {
    double value;
    std::vector<double> vec;
  };
  std::vector<Component> comps;
  for (Eigen::Index k = 0; k < d; ++k) {
    Component c{std::max(0.0, eig.eigenvalues()[k]), std::vector<double>(static_cast<std::size_t>(d))};
    std::size_t arg = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      c.vec[static_cast<std::size_t>(i)] = eig.eigenvectors()(i, k);
      if (std::abs(c.vec[static_cast<std::size_t>(i)]) > std::abs(c.vec[arg]))
        arg = static_cast<std::size_t>(i);
    }
    if (c.vec[arg] < 0.0)
      for (auto& v : c.vec) v = -v;
    comps.push_back(std::move(c));
  }
  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.value != b.value) return a.value > b.value;
    return std::lexicographical_compare(b.vec.begin(), b.vec.end(), a.vec.begin(), a.vec.end());
  });

  // Cumulative ratios within rounding of 1.0 count as full retention.
  constexpr double kSlack = 1e-12;
  double cumulative = 0.0;
  for (const auto& c : comps) {
    const double ratio = c.value / total;
    model.components.push_back(c.vec);
    model.explained_ratio.push_back(ratio);
    cumulative += ratio;
    if (cumulative >= target - kSlack) break;
  }
  model.mean.assign(mean.data(), mean.data() + d);
  model.scale.assign(scale.data(), scale.data() + d);
  return model;
}

/// Projects rows of `x` onto the model's components; labels are carried over.
inline FeatureMatrix pca_transform(const PcaModel& model, const FeatureMatrix& x) {
  if (x.cols() != model.input_dim())
    throw Error(ErrorCode::kDimensionMismatch,
                "pca_transform: model expects " + std::to_string(model.input_dim()) +
                    " features, got " + std::to_string(x.cols()));
  const std::size_t k = model.output_dim();
  const std::size_t d = model.input_dim();
  std::vector<double> out(x.rows() * k);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) centered[c] = (x(r, c) - model.mean[c]) / model.scale[c];
    for (std::size_t j = 0; j < k; ++j)
      out[r * k + j] = std::inner_product(centered.begin(), centered.end(),
                                          model.components[j].begin(), 0.0);
  }
  return FeatureMatrix(x.rows(), k, std::move(out), x.labels());
}

/// mean + components^T z (undoing any standardisation).
inline std::vector<double> pca_reconstruct(const PcaModel& model, std::span<const double> z) {
  std::vector<double> out(model.input_dim(), 0.0);
  for (std::size_t j = 0; j < model.output_dim(); ++j)
    for (std::size_t c = 0; c < out.size(); ++c) out[c] += model.components[j][c] * z[j];
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = out[c] * model.scale[c] + model.mean[c];
  return out;
}

}  // namespace sddmon
