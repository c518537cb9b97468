#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mfddm/tensor_grid.hpp"

namespace mfddm {

/// Weak-form metric pair at one point: K = g^{-1} sqrt(det g) (row-major
/// d x d) and w = sqrt(det g).
struct MetricCoefficients {
  std::size_t dim = 0;
  std::vector<double> K;
  double w = 0.0;

  double k(std::size_t row, std::size_t col) const { return K[row * dim + col]; }
};

/// A coordinate chart: the parameter rectangle plus the metric expressed
/// in its coordinates. The optional embedding maps into ambient
/// coordinates and is used for cross-chart checks only.
class Chart {
 public:
  /// Writes K into `k_out` (d*d, row-major) and returns w.
  using CoefficientFn = std::function<double(std::span<const double> x, std::span<double> k_out)>;
  using EmbedFn = std::function<std::vector<double>(std::span<const double> x)>;

  Chart(Rect rect, CoefficientFn coefficients, EmbedFn embed = {});

  const Rect& rect() const { return rect_; }
  std::size_t dim() const { return rect_.dim(); }

  double coefficients(std::span<const double> x, std::span<double> k_out) const {
    return coefficients_(x, k_out);
  }
  MetricCoefficients coefficients(std::span<const double> x) const;
  const CoefficientFn& coefficient_fn() const { return coefficients_; }

  bool has_embedding() const { return static_cast<bool>(embed_); }
  std::vector<double> embed(std::span<const double> x) const;
  const EmbedFn& embed_fn() const { return embed_; }

 private:
  Rect rect_;
  CoefficientFn coefficients_;
  EmbedFn embed_;
};

/// Ordered chart list with the coordinate changes between them.
class Atlas {
 public:
  /// transition(i, j, x) = phi_j^{-1}(phi_i(x)), or nullopt where undefined.
  using TransitionFn = std::function<std::optional<Point>(std::size_t from, std::size_t to, std::span<const double> x)>;

  Atlas(std::vector<Chart> charts, TransitionFn transition);

  std::size_t size() const { return charts_.size(); }
  std::size_t dim() const { return charts_.front().dim(); }
  const Chart& chart(std::size_t i) const { return charts_.at(i); }
  const std::vector<Chart>& charts() const { return charts_; }

  std::optional<Point> transition(std::size_t from, std::size_t to, std::span<const double> x) const;

  /// True when phi_i(x) lies in M_j: the transition is defined and lands in
  /// the closed rectangle D_j up to the point-location tolerance.
  bool membership(std::size_t i, std::span<const double> x, std::size_t j) const;

  /// Same atlas with charts relabelled: new chart k is old chart order[k].
  Atlas reordered(const std::vector<std::size_t>& order) const;

 private:
  std::vector<Chart> charts_;
  TransitionFn transition_;
};

/// Two stereographic charts of the unit sphere S^d on [-r, r]^d, projected
/// from the south pole (chart 0) and the north pole (chart 1).
Atlas sphere_atlas(std::size_t dim, double r);

/// Three affine charts of CP^2 on [-r, r]^4. Chart j fixes w_j = 1; its
/// coordinates are the remaining two complex numbers in increasing index
/// order, each stored as (re, im).
Atlas cp2_atlas(double r);

/// Product atlas with charts ordered (i, i') -> i * a2.size() + i'.
Atlas product_atlas(const Atlas& a1, const Atlas& a2);

}  // namespace mfddm
