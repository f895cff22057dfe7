#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "weakmzi/distribution.hpp"
#include "weakmzi/errors.hpp"
#include "weakmzi/numerics.hpp"

using namespace weakmzi;

TEST_CASE("grid endpoints and spacing") {
  Grid1D g(-1.0, 3.0, 5);
  CHECK(g.size() == 5);
  CHECK(g.spacing() == doctest::Approx(1.0));
  CHECK(g[0] == -1.0);
  CHECK(g[4] == 3.0);
  CHECK(g.nodes().size() == 5);
  CHECK_THROWS(Grid1D(0.0, 1.0, 1));
  CHECK_THROWS(Grid1D(1.0, 0.0, 10));
}

TEST_CASE("adaptive simpson on textbook integrals") {
  CHECK(integrate([](double x) { return std::sin(x); }, {0.0, M_PI}) ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(x); }, {0.0, 1.0},
                  QuadratureSpec::simpson(1e-13)) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return x * x; }, {2.0, 2.0}) == 0.0);
}

TEST_CASE("whole-line integrals by both methods") {
  const double sigma = 0.7;
  auto gauss = [sigma](double x) { return std::exp(-x * x / (2 * sigma * sigma)); };
  const double exact = std::sqrt(2 * M_PI) * sigma;
  CHECK(integrate_whole_line(gauss, QuadratureSpec::simpson(1e-12), 0.0, sigma) ==
        doctest::Approx(exact).epsilon(1e-11));
  CHECK(integrate_whole_line(gauss, QuadratureSpec::hermite(64), 0.0, 1.0) ==
        doctest::Approx(exact).epsilon(1e-12));
  auto shifted = [](double x) { return std::exp(-(x - 3) * (x - 3)) * (1 + x); };
  CHECK(integrate_whole_line(shifted, QuadratureSpec::hermite(40), 3.0, 1.0) ==
        doctest::Approx(4.0 * std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("gauss-hermite rule against tabulated n = 5") {
  const auto& r = gauss_hermite_rule(5);
  std::vector<double> nodes(r.nodes.data(), r.nodes.data() + 5);
  std::sort(nodes.begin(), nodes.end());
  CHECK(nodes[0] == doctest::Approx(-2.0201828704560856).epsilon(1e-14));
  CHECK(nodes[1] == doctest::Approx(-0.9585724646138185).epsilon(1e-14));
  CHECK(std::abs(nodes[2]) < 1e-14);
  CHECK(r.weights.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
  for (int i = 0; i < 5; ++i) {
    if (std::abs(r.nodes[i]) < 1e-10) {
      CHECK(r.weights[i] == doctest::Approx(0.9453087204829419).epsilon(1e-13));
    }
  }
  // Exact for polynomials up to degree 9.
  double m8 = (r.weights * r.nodes.pow(8)).sum();
  CHECK(m8 == doctest::Approx(105.0 / 16.0 * std::sqrt(M_PI)).epsilon(1e-13));
}

TEST_CASE("gauss-hermite log weights stay finite for large n") {
  const auto& r = gauss_hermite_rule(200);
  CHECK(r.log_scaled_weights.allFinite());
  CHECK((r.log_scaled_weights - r.nodes.square()).exp().sum() ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("quadrature failure reports partial value") {
  QuadratureSpec spec = QuadratureSpec::simpson(1e-14);
  spec.max_subdivisions = 6;
  try {
    integrate([](double x) { return 1.0 / std::sqrt(x); }, {1e-300, 1.0}, spec);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(std::isfinite(e.partial_value()));
    CHECK(e.partial_value() > 0.0);
  }
}

TEST_CASE("find_root and bracket errors") {
  auto f = [](double x) { return std::cos(x); };
  CHECK(find_root(f, {0.0, 2.0}, 1e-14) == doctest::Approx(M_PI / 2).epsilon(1e-13));
  CHECK(find_root([](double x) { return x * x * x - 2; }, {0.0, 2.0}, 1e-14) ==
        doctest::Approx(std::cbrt(2.0)).epsilon(1e-13));
  CHECK_THROWS_AS(find_root(f, {0.0, 1.0}, 1e-12), BracketError);
}

TEST_CASE("rng streams are deterministic and independent") {
  RngStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool differ_c = false, differ_d = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    CHECK(va == b.next_u64());
    differ_c |= va != c.next_u64();
    differ_d |= va != d.next_u64();
  }
  CHECK(differ_c);
  CHECK(differ_d);

  RngStream u(7, 3);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = u.uniform();
    sum += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("inverse-cdf sampler matches the normal cdf") {
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); };
  InverseCdfSampler s(phi, Grid1D(-9.0, 9.0, 2048), 1.0);
  CHECK(s.grid_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-10));

  RngStream rng(5, 0);
  const std::size_t n = 50000;
  std::vector<double> v(n);
  for (auto& x : v) x = s.draw(rng);
  std::sort(v.begin(), v.end());
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = 0.5 * std::erfc(-v[i] / std::sqrt(2.0));
    dmax = std::max({dmax, f - double(i) / n, double(i + 1) / n - f});
  }
  // 1% critical value of the one-sample statistic.
  CHECK(dmax < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("sampler refuses a grid that misses the mass") {
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); };
  CHECK_THROWS_AS(InverseCdfSampler(phi, Grid1D(-1.0, 1.0, 256), 1.0), DomainCoverageError);
}

TEST_CASE("basis labels parse back") {
  for (const auto& b : {MeasurementBasis::position(), MeasurementBasis::wavenumber(),
                        MeasurementBasis::quadrature(0.1, 1.0),
                        MeasurementBasis::quadrature(1.0, 1.0)}) {
    CHECK(parse_basis(b.label()) == b);
  }
  CHECK(parse_basis("eta(0.1, 1)") == MeasurementBasis::quadrature(0.1, 1.0));
  CHECK_THROWS(parse_basis("p"));
  CHECK_THROWS(MeasurementBasis::quadrature(0.0, 0.0));
}

TEST_CASE("normalized copy has unit mass") {
  Distribution d;
  d.eval = [](double x) { return 0.25 * std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI); };
  d.mass = 0.25;
  const auto n = d.normalized_copy();
  CHECK(n.normalized);
  CHECK(n(0.3) == doctest::Approx(4.0 * d(0.3)));
}
