#include "mfddm/atlas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace mfddm {

Chart::Chart(Rect rect, CoefficientFn coefficients, EmbedFn embed)
    : rect_(std::move(rect)), coefficients_(std::move(coefficients)), embed_(std::move(embed)) {
  if (!coefficients_) throw std::invalid_argument("Chart: coefficient provider required");
}

MetricCoefficients Chart::coefficients(std::span<const double> x) const {
  MetricCoefficients m;
  m.dim = dim();
  m.K.assign(m.dim * m.dim, 0.0);
  m.w = coefficients_(x, m.K);
  return m;
}

std::vector<double> Chart::embed(std::span<const double> x) const {
  if (!embed_) throw std::logic_error("Chart::embed: chart has no embedding");
  return embed_(x);
}

Atlas::Atlas(std::vector<Chart> charts, TransitionFn transition)
    : charts_(std::move(charts)), transition_(std::move(transition)) {
  if (charts_.empty()) throw std::invalid_argument("Atlas: at least one chart required");
  for (const auto& c : charts_)
    if (c.dim() != charts_.front().dim()) throw std::invalid_argument("Atlas: charts differ in dimension");
  if (!transition_) throw std::invalid_argument("Atlas: transition map required");
}

std::optional<Point> Atlas::transition(std::size_t from, std::size_t to, std::span<const double> x) const {
  if (from >= size() || to >= size()) throw std::out_of_range("Atlas::transition: chart index out of range");
  if (from == to) return Point(x.begin(), x.end());
  return transition_(from, to, x);
}

bool Atlas::membership(std::size_t i, std::span<const double> x, std::size_t j) const {
  const auto y = transition(i, j, x);
  return y && charts_[j].rect().contains(*y);
}

Atlas Atlas::reordered(const std::vector<std::size_t>& order) const {
  if (order.size() != size()) throw std::invalid_argument("Atlas::reordered: permutation size mismatch");
  std::vector<bool> seen(size(), false);
  for (auto k : order) {
    if (k >= size() || seen[k]) throw std::invalid_argument("Atlas::reordered: not a permutation");
    seen[k] = true;
  }
  std::vector<Chart> charts;
  for (auto k : order) charts.push_back(charts_[k]);
  return Atlas(std::move(charts), [order, inner = transition_](std::size_t from, std::size_t to,
                                                               std::span<const double> x) {
    return inner(order[from], order[to], x);
  });
}

namespace {

void require_overlap(double r) {
  if (!(r > 1.0)) {
    std::ostringstream msg;
    msg << "chart half-width r must exceed 1 for the charts to cover the manifold (got r = " << r << ")";
    throw std::invalid_argument(msg.str());
  }
}

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

Atlas sphere_atlas(std::size_t dim, double r) {
  require_overlap(r);
  if (dim == 0) throw std::invalid_argument("sphere_atlas: dimension must be >= 1");
  const Rect rect = Rect::cube(dim, -r, r);

  // Conformal factor 2/(1+|x|^2): g = c^2 I, so w = c^d and K = c^{d-2} I.
  auto coefficients = [dim](std::span<const double> x, std::span<double> k) {
    const double c = 2.0 / (1.0 + squared_norm(x));
    const double kd = std::pow(c, static_cast<double>(dim) - 2.0);
    std::fill(k.begin(), k.end(), 0.0);
    for (std::size_t a = 0; a < dim; ++a) k[a * dim + a] = kd;
    return std::pow(c, static_cast<double>(dim));
  };
  auto embedding = [](double pole) {
    return [pole](std::span<const double> x) {
      const double s = squared_norm(x);
      std::vector<double> y(x.size() + 1);
      for (std::size_t a = 0; a < x.size(); ++a) y[a] = 2.0 * x[a] / (1.0 + s);
      y.back() = pole * (1.0 - s) / (1.0 + s);
      return y;
    };
  };

  std::vector<Chart> charts;
  charts.emplace_back(rect, coefficients, embedding(1.0));
  charts.emplace_back(rect, coefficients, embedding(-1.0));

  // Both directions are the inversion x / |x|^2.
  auto transition = [](std::size_t, std::size_t, std::span<const double> x) -> std::optional<Point> {
    const double s = squared_norm(x);
    if (s == 0.0) return std::nullopt;
    Point y(x.begin(), x.end());
    for (auto& v : y) v /= s;
    return y;
  };
  return Atlas(std::move(charts), transition);
}

namespace {

// Homogeneous coordinates (w0, w1, w2) as interleaved (re, im) pairs.
using Homogeneous = std::array<double, 6>;

Homogeneous cp2_lift(std::size_t chart, std::span<const double> x) {
  Homogeneous w{};
  std::size_t slot = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    if (j == chart) {
      w[2 * j] = 1.0;
      w[2 * j + 1] = 0.0;
    } else {
      w[2 * j] = x[2 * slot];
      w[2 * j + 1] = x[2 * slot + 1];
      ++slot;
    }
  }
  return w;
}

}  // namespace

Atlas cp2_atlas(double r) {
  require_overlap(r);
  const Rect rect = Rect::cube(4, -r, r);

  // K = (1+|z|^2)^{-2} (I + p p^T + q q^T), w = (1+|z|^2)^{-3}, where p holds
  // the chart coordinates (x_a, y_a) and q the rotated pairs (y_a, -x_a).
  auto coefficients = [](std::span<const double> x, std::span<double> k) {
    const double s = squared_norm(x);
    const double p[4] = {x[0], x[1], x[2], x[3]};
    const double q[4] = {x[1], -x[0], x[3], -x[2]};
    const double scale = 1.0 / ((1.0 + s) * (1.0 + s));
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b)
        k[a * 4 + b] = scale * ((a == b ? 1.0 : 0.0) + p[a] * p[b] + q[a] * q[b]);
    return 1.0 / ((1.0 + s) * (1.0 + s) * (1.0 + s));
  };

  std::vector<Chart> charts;
  for (std::size_t j = 0; j < 3; ++j) {
    auto embed = [j](std::span<const double> x) {
      const auto w = cp2_lift(j, x);
      const double n = std::sqrt(squared_norm(w));
      std::vector<double> out(w.begin(), w.end());
      for (auto& v : out) v /= n;
      return out;
    };
    charts.emplace_back(rect, coefficients, embed);
  }

  // Lift to homogeneous coordinates, then divide by w_to: z_k = w_k / w_to.
  auto transition = [](std::size_t from, std::size_t to, std::span<const double> x) -> std::optional<Point> {
    const auto w = cp2_lift(from, x);
    const double dre = w[2 * to];
    const double dim = w[2 * to + 1];
    const double den = dre * dre + dim * dim;
    if (den == 0.0) return std::nullopt;
    Point y;
    y.reserve(4);
    for (std::size_t k = 0; k < 3; ++k) {
      if (k == to) continue;
      const double re = w[2 * k];
      const double im = w[2 * k + 1];
      // (re + i im) * conj(dre + i dim) / den
      y.push_back((re * dre + im * dim) / den);
      y.push_back((im * dre - re * dim) / den);
    }
    return y;
  };
  return Atlas(std::move(charts), transition);
}

Atlas product_atlas(const Atlas& a1, const Atlas& a2) {
  const std::size_t d1 = a1.dim();
  const std::size_t d2 = a2.dim();
  const std::size_t m2 = a2.size();
  const std::size_t d = d1 + d2;

  std::vector<Chart> charts;
  for (std::size_t i = 0; i < a1.size(); ++i) {
    for (std::size_t ip = 0; ip < m2; ++ip) {
      const Chart& c1 = a1.chart(i);
      const Chart& c2 = a2.chart(ip);
      auto coefficients = [f1 = c1.coefficient_fn(), f2 = c2.coefficient_fn(), d1, d2, d](
                              std::span<const double> x, std::span<double> k) {
        thread_local std::vector<double> k1, k2;
        k1.assign(d1 * d1, 0.0);
        k2.assign(d2 * d2, 0.0);
        const double w1 = f1(x.first(d1), k1);
        const double w2 = f2(x.subspan(d1, d2), k2);
        std::fill(k.begin(), k.end(), 0.0);
        for (std::size_t a = 0; a < d1; ++a)
          for (std::size_t b = 0; b < d1; ++b) k[a * d + b] = k1[a * d1 + b] * w2;
        for (std::size_t a = 0; a < d2; ++a)
          for (std::size_t b = 0; b < d2; ++b) k[(d1 + a) * d + d1 + b] = k2[a * d2 + b] * w1;
        return w1 * w2;
      };
      Chart::EmbedFn embed;
      if (c1.has_embedding() && c2.has_embedding()) {
        embed = [e1 = c1.embed_fn(), e2 = c2.embed_fn(), d1, d2](std::span<const double> x) {
          auto y = e1(x.first(d1));
          const auto y2 = e2(x.subspan(d1, d2));
          y.insert(y.end(), y2.begin(), y2.end());
          return y;
        };
      }
      charts.emplace_back(c1.rect().times(c2.rect()), coefficients, embed);
    }
  }

  auto transition = [a1, a2, d1, d2, m2](std::size_t from, std::size_t to,
                                         std::span<const double> x) -> std::optional<Point> {
    const auto y1 = a1.transition(from / m2, to / m2, x.first(d1));
    if (!y1) return std::nullopt;
    const auto y2 = a2.transition(from % m2, to % m2, x.subspan(d1, d2));
    if (!y2) return std::nullopt;
    Point y = *y1;
    y.insert(y.end(), y2->begin(), y2->end());
    return y;
  };
  return Atlas(std::move(charts), transition);
}

}  // namespace mfddm
