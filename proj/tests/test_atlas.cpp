#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <optional>

#include "mfddm/atlas.hpp"
#include "mfddm/quadrature.hpp"
#include "support/test_support.hpp"

using namespace mfddm;
using testsupport::make_rng;
using testsupport::uniform;

namespace {

using Mat = Eigen::MatrixXd;

Mat coefficient_matrix(const Chart& c, std::span<const double> x, double* w) {
  const std::size_t d = c.dim();
  std::vector<double> k(d * d);
  *w = c.coefficients(x, k);
  Mat m(d, d);
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = 0; b < d; ++b) m(a, b) = k[a * d + b];
  return m;
}

/// Central-difference Jacobian of transition(i, j) at x.
Mat transition_jacobian(const Atlas& atlas, std::size_t i, std::size_t j, const Point& x, double step = 1e-6) {
  const std::size_t d = x.size();
  Mat jac(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    Point xp = x, xm = x;
    xp[c] += step;
    xm[c] -= step;
    const auto yp = atlas.transition(i, j, xp);
    const auto ym = atlas.transition(i, j, xm);
    for (std::size_t a = 0; a < d; ++a) jac(a, c) = ((*yp)[a] - (*ym)[a]) / (2.0 * step);
  }
  return jac;
}

/// Random point of D_i whose image lies in D_j, keeping away from the
/// degenerate set where the transition blows up.
std::optional<Point> overlap_point(testsupport::Rng& rng, const Atlas& atlas, std::size_t i, std::size_t j) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Point x = testsupport::random_point(rng, atlas.chart(i).rect());
    if (atlas.membership(i, x, j)) return x;
  }
  return std::nullopt;
}

struct NamedAtlas {
  const char* name;
  Atlas atlas;
};

std::vector<NamedAtlas> shipped_atlases(double r) {
  std::vector<NamedAtlas> out;
  out.push_back({"s4", sphere_atlas(4, r)});
  out.push_back({"cp2", cp2_atlas(r)});
  out.push_back({"s2xs2", product_atlas(sphere_atlas(2, r), sphere_atlas(2, r))});
  out.push_back({"s2", sphere_atlas(2, r)});
  return out;
}

using Complex = std::complex<double>;

/// Transition maps of CP^2 written out term by term in complex arithmetic.
std::array<Complex, 2> cp2_transition_oracle(std::size_t from, std::size_t to, Complex a, Complex b) {
  // Chart coordinates: chart 0 -> (z1, z2), chart 1 -> (z0, z2), chart 2 -> (z0, z1).
  const Complex one(1.0, 0.0);
  if (from == 0 && to == 1) return {one / a, b / a};
  if (from == 1 && to == 0) return {one / a, b / a};
  if (from == 0 && to == 2) return {one / b, a / b};
  if (from == 2 && to == 0) return {b / a, one / a};
  if (from == 1 && to == 2) return {a / b, one / b};
  if (from == 2 && to == 1) return {a / b, one / b};
  return {a, b};
}

}  // namespace

TEST_SUITE("atlas") {
  TEST_CASE("constructors reject r <= 1") {
    for (double r : {1.0, 0.5, -2.0}) {
      CHECK_THROWS_AS(sphere_atlas(4, r), std::invalid_argument);
      CHECK_THROWS_AS(cp2_atlas(r), std::invalid_argument);
    }
    try {
      (void)sphere_atlas(4, 0.5);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("cover") != std::string::npos);
    }
  }

  TEST_CASE("sphere examples") {
    const Atlas s4 = sphere_atlas(4, 1.2);
    REQUIRE(s4.size() == 2);
    const std::vector<double> origin(4, 0.0);
    const auto y = s4.chart(0).embed(origin);
    REQUIRE(y.size() == 5);
    CHECK(y[4] == 1.0);
    for (int a = 0; a < 4; ++a) CHECK(y[a] == 0.0);

    const auto t = s4.transition(0, 1, std::vector<double>{0.5, 0.0, 0.0, 0.0});
    REQUIRE(t);
    CHECK((*t)[0] == doctest::Approx(2.0));
    CHECK((*t)[1] == 0.0);

    const auto mc = s4.chart(0).coefficients(origin);
    CHECK(mc.w == doctest::Approx(16.0));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(mc.k(a, b) == doctest::Approx(a == b ? 4.0 : 0.0));

    // K = 4 (1+|x|^2)^{-2} I and w = 16 (1+|x|^2)^{-4} at a generic point.
    const std::vector<double> x{0.3, -0.2, 0.5, 0.1};
    const double s = 0.09 + 0.04 + 0.25 + 0.01;
    const auto mx = s4.chart(1).coefficients(x);
    CHECK(mx.k(2, 2) == doctest::Approx(4.0 / ((1 + s) * (1 + s))).epsilon(1e-14));
    CHECK(mx.w == doctest::Approx(16.0 / std::pow(1 + s, 4)).epsilon(1e-14));
  }

  TEST_CASE("sphere membership examples") {
    const Atlas s4 = sphere_atlas(4, 1.2);
    CHECK_FALSE(s4.membership(0, std::vector<double>(4, 0.0), 1));
    CHECK(s4.membership(0, std::vector<double>{1.2, 0.0, 0.0, 0.0}, 1));
    CHECK(s4.membership(1, std::vector<double>{1.2, 0.0, 0.0, 0.0}, 0));
    // Identity on the diagonal.
    CHECK(s4.membership(0, std::vector<double>{0.1, 0.0, 0.0, 0.0}, 0));
  }

  TEST_CASE("cp2 examples") {
    const Atlas cp2 = cp2_atlas(1.2);
    REQUIRE(cp2.size() == 3);
    auto t = cp2.transition(0, 1, std::vector<double>{1.0, 0.0, 0.0, 0.0});
    REQUIRE(t);
    CHECK((*t)[0] == doctest::Approx(1.0));
    CHECK((*t)[1] == doctest::Approx(0.0));
    CHECK((*t)[2] == doctest::Approx(0.0));
    CHECK((*t)[3] == doctest::Approx(0.0));

    t = cp2.transition(0, 2, std::vector<double>{0.0, 0.0, 2.0, 0.0});
    REQUIRE(t);
    const auto oracle = cp2_transition_oracle(0, 2, Complex(0.0, 0.0), Complex(2.0, 0.0));
    CHECK((*t)[0] == doctest::Approx(oracle[0].real()));
    CHECK((*t)[1] == doctest::Approx(oracle[0].imag()));
    CHECK((*t)[2] == doctest::Approx(oracle[1].real()));
    CHECK((*t)[3] == doctest::Approx(oracle[1].imag()));
    CHECK((*t)[0] == doctest::Approx(0.5));

    const auto mc = cp2.chart(0).coefficients(std::vector<double>(4, 0.0));
    CHECK(mc.w == 1.0);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(mc.k(a, b) == (a == b ? 1.0 : 0.0));

    const std::vector<double> origin(4, 0.0);
    CHECK_FALSE(cp2.membership(0, origin, 1));
    CHECK_FALSE(cp2.membership(0, origin, 2));
    CHECK_FALSE(cp2.transition(0, 1, origin).has_value());
  }

  TEST_CASE("cp2 transitions agree with complex arithmetic") {
    const Atlas cp2 = cp2_atlas(2.0);
    auto rng = make_rng(11);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (i == j) continue;
        for (int trial = 0; trial < 200; ++trial) {
          const Point x = testsupport::random_point(rng, cp2.chart(i).rect());
          const auto t = cp2.transition(i, j, x);
          REQUIRE(t);
          const auto o = cp2_transition_oracle(i, j, Complex(x[0], x[1]), Complex(x[2], x[3]));
          CHECK((*t)[0] == doctest::Approx(o[0].real()).epsilon(1e-12));
          CHECK((*t)[1] == doctest::Approx(o[0].imag()).epsilon(1e-12));
          CHECK((*t)[2] == doctest::Approx(o[1].real()).epsilon(1e-12));
          CHECK((*t)[3] == doctest::Approx(o[1].imag()).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("cp2 coefficients reproduce the weak-form integrand") {
    // gu^T K gv against the three displayed gradient terms and the volume weight.
    const Atlas cp2 = cp2_atlas(1.2);
    auto rng = make_rng(12);
    for (int trial = 0; trial < 500; ++trial) {
      const Point x = testsupport::random_point(rng, cp2.chart(0).rect());
      const auto gu = testsupport::random_vector(rng, 4);
      const auto gv = testsupport::random_vector(rng, 4);
      const double s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
      double flat = 0.0, radial_u = 0.0, radial_v = 0.0, rot_u = 0.0, rot_v = 0.0;
      for (int a = 0; a < 2; ++a) {
        const double xa = x[2 * a], ya = x[2 * a + 1];
        flat += gu[2 * a] * gv[2 * a] + gu[2 * a + 1] * gv[2 * a + 1];
        radial_u += xa * gu[2 * a] + ya * gu[2 * a + 1];
        radial_v += xa * gv[2 * a] + ya * gv[2 * a + 1];
        rot_u += ya * gu[2 * a] - xa * gu[2 * a + 1];
        rot_v += ya * gv[2 * a] - xa * gv[2 * a + 1];
      }
      const double expected = (flat + radial_u * radial_v + rot_u * rot_v) / ((1 + s) * (1 + s));
      double w = 0.0;
      const Mat k = coefficient_matrix(cp2.chart(0), x, &w);
      Eigen::Map<const Eigen::VectorXd> u(gu.data(), 4), v(gv.data(), 4);
      CHECK(u.dot(k * v) == doctest::Approx(expected).epsilon(1e-13));
      CHECK(w == doctest::Approx(std::pow(1 + s, -3.0)).epsilon(1e-14));
    }
  }

  TEST_CASE("product atlas of flat factors is flat") {
    std::vector<Chart> c1{testsupport::flat_chart(Rect::cube(2, 0.0, 1.0))};
    std::vector<Chart> c2{testsupport::flat_chart(Rect::cube(1, 0.0, 1.0))};
    auto ident = [](std::size_t, std::size_t, std::span<const double> x) -> std::optional<Point> {
      return Point(x.begin(), x.end());
    };
    const Atlas a(c1, ident), b(c2, ident);
    const Atlas p = product_atlas(a, b);
    REQUIRE(p.size() == 1);
    REQUIRE(p.dim() == 3);
    const auto mc = p.chart(0).coefficients(std::vector<double>{0.3, 0.4, 0.5});
    CHECK(mc.w == 1.0);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) CHECK(mc.k(r, c) == (r == c ? 1.0 : 0.0));
  }

  TEST_CASE("s2xs2 transitions follow the product table") {
    const Atlas p = product_atlas(sphere_atlas(2, 2.0), sphere_atlas(2, 2.0));
    REQUIRE(p.size() == 4);
    // (from, to, invert first factor, invert second factor); charts numbered from 0.
    struct Row {
      std::size_t from, to;
      bool inv1, inv2;
    };
    const Row table[] = {{0, 1, false, true}, {0, 2, true, false}, {0, 3, true, true},
                         {1, 2, true, true},  {1, 3, true, false}, {2, 3, false, true}};
    auto rng = make_rng(13);
    for (const auto& row : table) {
      for (int trial = 0; trial < 50; ++trial) {
        const Point x = testsupport::random_point(rng, p.chart(row.from).rect());
        const double s1 = x[0] * x[0] + x[1] * x[1];
        const double s2 = x[2] * x[2] + x[3] * x[3];
        const Point expected{row.inv1 ? x[0] / s1 : x[0], row.inv1 ? x[1] / s1 : x[1],
                             row.inv2 ? x[2] / s2 : x[2], row.inv2 ? x[3] / s2 : x[3]};
        for (auto [from, to] : {std::pair{row.from, row.to}, std::pair{row.to, row.from}}) {
          const auto t = p.transition(from, to, x);
          REQUIRE(t);
          for (int a = 0; a < 4; ++a) CHECK((*t)[a] == doctest::Approx(expected[a]).epsilon(1e-14));
        }
      }
    }
  }

  TEST_CASE("s2xs2 coefficients match the product weak form") {
    const Atlas p = product_atlas(sphere_atlas(2, 1.2), sphere_atlas(2, 1.2));
    auto check_at = [&](const Point& x) {
      const double s1 = x[0] * x[0] + x[1] * x[1];
      const double s2 = x[2] * x[2] + x[3] * x[3];
      const double k1 = 4.0 / ((1 + s2) * (1 + s2));
      const double k2 = 4.0 / ((1 + s1) * (1 + s1));
      const double w = 16.0 / ((1 + s1) * (1 + s1) * (1 + s2) * (1 + s2));
      for (std::size_t c = 0; c < 4; ++c) {
        const auto mc = p.chart(c).coefficients(x);
        CHECK(mc.w == doctest::Approx(w).epsilon(1e-14));
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            CHECK(mc.k(a, b) == doctest::Approx(a != b ? 0.0 : (a < 2 ? k1 : k2)).epsilon(1e-14));
      }
    };
    check_at(Point{0.0, 0.0, 0.0, 0.0});
    const auto mc0 = p.chart(0).coefficients(std::vector<double>(4, 0.0));
    CHECK(mc0.w == doctest::Approx(16.0));
    CHECK(mc0.k(0, 0) == doctest::Approx(4.0));
    CHECK(mc0.k(3, 3) == doctest::Approx(4.0));
    auto rng = make_rng(14);
    for (int trial = 0; trial < 100; ++trial) check_at(testsupport::random_point(rng, p.chart(0).rect()));
  }

  TEST_CASE("reordered atlas relabels charts") {
    const Atlas cp2 = cp2_atlas(1.5);
    const Atlas re = cp2.reordered({2, 0, 1});
    const Point x{0.3, -0.4, 0.7, 0.2};
    const auto a = re.transition(0, 1, x);
    const auto b = cp2.transition(2, 0, x);
    REQUIRE(a);
    REQUIRE(b);
    for (int k = 0; k < 4; ++k) CHECK((*a)[k] == (*b)[k]);
    CHECK_THROWS_AS(cp2.reordered({0, 0, 1}), std::invalid_argument);
  }
}

TEST_SUITE("properties") {
  TEST_CASE("atlas: transition involution") {
    auto rng = make_rng(21);
    for (double r : {1.2, 2.0}) {
      for (const auto& [name, atlas] : shipped_atlases(r)) {
        double worst = 0.0;
        for (std::size_t i = 0; i < atlas.size(); ++i) {
          for (std::size_t j = 0; j < atlas.size(); ++j) {
            if (i == j) continue;
            for (int trial = 0; trial < 1000; ++trial) {
              const auto x = overlap_point(rng, atlas, i, j);
              REQUIRE(x);
              const auto y = atlas.transition(i, j, *x);
              const auto back = atlas.transition(j, i, *y);
              REQUIRE(back);
              worst = std::max(worst, testsupport::distance(*back, *x));
            }
          }
        }
        INFO(name << " r=" << r);
        CHECK(worst <= 1e-10);
      }
    }
  }

  TEST_CASE("atlas: embedding consistency") {
    auto rng = make_rng(22);
    for (double r : {1.2, 2.0}) {
      for (const auto& [name, atlas] : shipped_atlases(r)) {
        const bool projective = std::string(name) == "cp2";
        double worst = 0.0;
        for (std::size_t i = 0; i < atlas.size(); ++i) {
          for (std::size_t j = 0; j < atlas.size(); ++j) {
            if (i == j) continue;
            for (int trial = 0; trial < 300; ++trial) {
              const auto x = overlap_point(rng, atlas, i, j);
              REQUIRE(x);
              const auto y = atlas.transition(i, j, *x);
              const auto ei = atlas.chart(i).embed(*x);
              const auto ej = atlas.chart(j).embed(*y);
              REQUIRE(ei.size() == ej.size());
              if (!projective) {
                worst = std::max(worst, testsupport::distance(ei, ej));
                continue;
              }
              // Compare the projectors w w^* entry by entry.
              for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b) {
                  const Complex pi = Complex(ei[2 * a], ei[2 * a + 1]) * std::conj(Complex(ei[2 * b], ei[2 * b + 1]));
                  const Complex pj = Complex(ej[2 * a], ej[2 * a + 1]) * std::conj(Complex(ej[2 * b], ej[2 * b + 1]));
                  worst = std::max(worst, std::abs(pi - pj));
                }
              }
            }
          }
        }
        INFO(name << " r=" << r);
        CHECK(worst <= 1e-10);
      }
    }
    // Unit norm of sphere embeddings.
    const Atlas s4 = sphere_atlas(4, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
      const auto e = s4.chart(trial % 2).embed(testsupport::random_point(rng, s4.chart(0).rect()));
      double n = 0.0;
      for (double v : e) n += v * v;
      CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("atlas: metric pullback invariance") {
    // Under y = T(x): K_j(y) = J K_i(x) J^T / |det J| and w_j(y) = w_i(x) / |det J|,
    // the pointwise form of a_i(u, v) = a_j(u o T^{-1}, v o T^{-1}).
    auto rng = make_rng(23);
    for (double r : {1.2, 2.0}) {
      for (const auto& [name, atlas] : shipped_atlases(r)) {
        double worst = 0.0;
        for (std::size_t i = 0; i < atlas.size(); ++i) {
          for (std::size_t j = 0; j < atlas.size(); ++j) {
            if (i == j) continue;
            for (int trial = 0; trial < 200; ++trial) {
              const auto x = overlap_point(rng, atlas, i, j);
              REQUIRE(x);
              const auto y = atlas.transition(i, j, *x);
              const Mat jac = transition_jacobian(atlas, i, j, *x);
              const double det = std::abs(jac.determinant());
              double wi = 0.0, wj = 0.0;
              const Mat ki = coefficient_matrix(atlas.chart(i), *x, &wi);
              const Mat kj = coefficient_matrix(atlas.chart(j), *y, &wj);
              const Mat pushed = jac * ki * jac.transpose() / det;
              worst = std::max(worst, (pushed - kj).norm() / kj.norm());
              worst = std::max(worst, std::abs(wi / det - wj) / wj);
            }
          }
        }
        INFO(name << " r=" << r);
        CHECK(worst <= 1e-6);
      }
    }
  }

  TEST_CASE("atlas: weak form agrees between overlapping charts on S^2") {
    // a(u, v) = int grad u . K grad v + b u v w for Gaussian bumps centred in the
    // overlap, integrated once in each chart.
    const Atlas s2 = sphere_atlas(2, 2.0);
    const double b = 1.0, sigma = 0.1;
    const Point cu{0.7, 0.5}, cv{0.75, 0.47};
    auto bump = [sigma](const Point& c, std::span<const double> x, double* grad) {
      const double dx = x[0] - c[0], dy = x[1] - c[1];
      const double v = std::exp(-(dx * dx + dy * dy) / (sigma * sigma));
      grad[0] = -2.0 * dx / (sigma * sigma) * v;
      grad[1] = -2.0 * dy / (sigma * sigma) * v;
      return v;
    };
    const QuadratureRule q = quadrature_rule(1, 5);

    // chart: where to integrate; pull: map from that chart to chart 0 (nullptr = identity).
    auto integrate = [&](std::size_t chart, double lo0, double hi0, double lo1, double hi1, std::size_t cells) {
      double total = 0.0;
      const double h0 = (hi0 - lo0) / cells, h1 = (hi1 - lo1) / cells;
      for (std::size_t c0 = 0; c0 < cells; ++c0)
        for (std::size_t c1 = 0; c1 < cells; ++c1)
          for (std::size_t a = 0; a < q.size(); ++a)
            for (std::size_t bq = 0; bq < q.size(); ++bq) {
              const Point y{lo0 + h0 * (c0 + q.nodes_1d[a]), lo1 + h1 * (c1 + q.nodes_1d[bq])};
              const double weight = q.weights_1d[a] * q.weights_1d[bq] * h0 * h1;
              Point x = y;
              Mat jac = Mat::Identity(2, 2);
              if (chart != 0) {
                x = *s2.transition(chart, 0, y);
                jac = transition_jacobian(s2, chart, 0, y, 1e-7);
              }
              double gu[2], gv[2];
              const double u = bump(cu, x, gu);
              const double v = bump(cv, x, gv);
              const Eigen::Vector2d du = jac.transpose() * Eigen::Vector2d(gu[0], gu[1]);
              const Eigen::Vector2d dv = jac.transpose() * Eigen::Vector2d(gv[0], gv[1]);
              double w = 0.0;
              const Mat k = coefficient_matrix(s2.chart(chart), y, &w);
              total += weight * (du.dot(k * dv) + b * u * v * w);
            }
      return total;
    };

    const double in0 = integrate(0, 0.0, 1.45, -0.25, 1.2, 48);
    // Image of the disc of radius 5 sigma about the centres under x / |x|^2.
    double lo0 = 1e9, hi0 = -1e9, lo1 = 1e9, hi1 = -1e9;
    for (int k = 0; k < 720; ++k) {
      const double t = 2.0 * M_PI * k / 720.0;
      for (const auto& c : {cu, cv}) {
        const Point x{c[0] + 0.5 * std::cos(t), c[1] + 0.5 * std::sin(t)};
        const auto y = *s2.transition(0, 1, x);
        lo0 = std::min(lo0, y[0]);
        hi0 = std::max(hi0, y[0]);
        lo1 = std::min(lo1, y[1]);
        hi1 = std::max(hi1, y[1]);
      }
    }
    const double in1 = integrate(1, lo0, hi0, lo1, hi1, 96);
    CHECK(std::abs(in0) > 1e-3);
    CHECK(in1 == doctest::Approx(in0).epsilon(1e-6));
  }

  TEST_CASE("atlas: coefficients are symmetric positive definite") {
    auto rng = make_rng(24);
    for (double r : {1.2, 2.0}) {
      for (const auto& [name, atlas] : shipped_atlases(r)) {
        double min_eig = 1e300, min_w = 1e300, asym = 0.0;
        for (std::size_t i = 0; i < atlas.size(); ++i) {
          for (int trial = 0; trial < 10000; ++trial) {
            const Point x = testsupport::random_point(rng, atlas.chart(i).rect());
            double w = 0.0;
            const Mat k = coefficient_matrix(atlas.chart(i), x, &w);
            asym = std::max(asym, (k - k.transpose()).cwiseAbs().maxCoeff());
            Eigen::SelfAdjointEigenSolver<Mat> eig(k, Eigen::EigenvaluesOnly);
            min_eig = std::min(min_eig, eig.eigenvalues().minCoeff());
            min_w = std::min(min_w, w);
          }
        }
        INFO(name << " r=" << r);
        CHECK(asym == 0.0);
        CHECK(min_eig > 0.0);
        CHECK(min_w > 0.0);
      }
    }
  }

  TEST_CASE("atlas: cover property on uniform grids") {
    for (double r : {1.2, 2.0}) {
      for (const auto& [name, atlas] : shipped_atlases(r)) {
        for (std::size_t n : {2, 3, 4, 5, 10}) {
          std::size_t uncovered = 0;
          for (std::size_t i = 0; i < atlas.size(); ++i) {
            const auto g = TensorGrid::uniform(atlas.chart(i).rect(), n);
            for (auto f : g.boundary_flat()) {
              const Point xi = g.node_coords(f);
              bool covered = false;
              for (std::size_t j = 0; j < atlas.size() && !covered; ++j) covered = j != i && atlas.membership(i, xi, j);
              uncovered += covered ? 0 : 1;
            }
          }
          INFO(name << " r=" << r << " N=" << n);
          CHECK(uncovered == 0);
        }
      }
    }
  }
}
