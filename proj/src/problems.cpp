#include "mfddm/problems.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace mfddm {

namespace {

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

// Height coordinate of the stereographic chart: +1 at the origin of the
// north chart, -1 at the origin of the south chart.
double height(std::span<const double> x, double pole) {
  const double s = squared_norm(x);
  return pole * (1.0 - s) / (1.0 + s);
}

}  // namespace

Problem Problem::reordered(const std::vector<std::size_t>& order) const {
  Problem p = *this;
  p.atlas = std::make_shared<const Atlas>(atlas->reordered(order));
  p.f = [order, f = f](std::size_t i, std::span<const double> x) { return f(order.at(i), x); };
  if (exact) p.exact = [order, u = exact](std::size_t i, std::span<const double> x) { return u(order.at(i), x); };
  return p;
}

Problem s4_problem(double r, double b) {
  Problem p;
  p.name = "s4";
  p.atlas = std::make_shared<const Atlas>(sphere_atlas(4, r));
  p.b = b;
  p.exact = [](std::size_t i, std::span<const double> x) { return height(x, i == 0 ? 1.0 : -1.0); };
  p.f = [b, u = p.exact](std::size_t i, std::span<const double> x) { return (4.0 + b) * u(i, x); };
  return p;
}

Problem cp2_problem(double r, double b, std::array<double, 3> a) {
  Problem p;
  p.name = "cp2";
  p.atlas = std::make_shared<const Atlas>(cp2_atlas(r));
  p.b = b;
  // Chart j: (a_j + sum_{k != j} a_k |z_k|^2) / (1 + |z|^2).
  p.exact = [a](std::size_t j, std::span<const double> x) {
    double num = a.at(j);
    double den = 1.0;
    std::size_t slot = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      if (k == j) continue;
      const double mod2 = x[2 * slot] * x[2 * slot] + x[2 * slot + 1] * x[2 * slot + 1];
      num += a[k] * mod2;
      den += mod2;
      ++slot;
    }
    return num / den;
  };
  const double a_sum = a[0] + a[1] + a[2];
  p.f = [b, a_sum, u = p.exact](std::size_t j, std::span<const double> x) {
    return (12.0 + b) * u(j, x) - 4.0 * a_sum;
  };
  return p;
}

Problem s2xs2_problem(double r, double b) {
  Problem p;
  p.name = "s2xs2";
  auto s2 = sphere_atlas(2, r);
  p.atlas = std::make_shared<const Atlas>(product_atlas(s2, s2));
  p.b = b;
  // Chart i = 2 * (first factor chart) + (second factor chart).
  p.exact = [](std::size_t i, std::span<const double> x) {
    const double first = height(x.first(2), i / 2 == 0 ? 1.0 : -1.0);
    const double second = height(x.subspan(2, 2), i % 2 == 0 ? 1.0 : -1.0);
    return first + second;
  };
  p.f = [b, u = p.exact](std::size_t i, std::span<const double> x) { return (2.0 + b) * u(i, x); };
  return p;
}

double strong_residual_check(const Problem& problem, std::size_t chart, std::span<const double> x, double step) {
  if (!problem.has_exact()) throw std::invalid_argument("strong_residual_check: problem has no exact solution");
  const Chart& c = problem.atlas->chart(chart);
  const std::size_t d = c.dim();
  if (x.size() != d) throw std::invalid_argument("strong_residual_check: point dimension mismatch");
  for (std::size_t k = 0; k < d; ++k) {
    if (x[k] - 2.0 * step < c.rect().lo()[k] || x[k] + 2.0 * step > c.rect().hi()[k])
      throw std::invalid_argument("strong_residual_check: point too close to the chart boundary");
  }

  const auto& u = problem.exact;
  Point y(x.begin(), x.end());
  Point z(d);
  std::vector<double> k_at(d * d);

  // Flux component F_a(y) = sum_c K_ac(y) D_c u(y).
  auto flux = [&](const Point& at, std::size_t a) {
    c.coefficients(at, k_at);
    double total = 0.0;
    for (std::size_t cc = 0; cc < d; ++cc) {
      z = at;
      z[cc] += step;
      const double up = u(chart, z);
      z[cc] -= 2.0 * step;
      const double down = u(chart, z);
      total += k_at[a * d + cc] * (up - down) / (2.0 * step);
    }
    return total;
  };

  double divergence = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    Point up = y;
    up[a] += step;
    Point down = y;
    down[a] -= step;
    divergence += (flux(up, a) - flux(down, a)) / (2.0 * step);
  }
  const double w = c.coefficients(y, k_at);
  const double laplacian = divergence / w;
  return std::abs(-laplacian + problem.b * u(chart, y) - problem.f(chart, y));
}

}  // namespace mfddm
