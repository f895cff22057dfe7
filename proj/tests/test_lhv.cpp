#include <doctest.h>

#include <cmath>

#include "weakmzi/errors.hpp"
#include "weakmzi/lhv.hpp"

using namespace weakmzi;

namespace {

const ExperimentConfig kFig = ExperimentConfig::make(M_PI / 2, 1.0, 1.0);

double phi_n(double v, double mean, double sd) {
  const double z = (v - mean) / sd;
  return std::exp(-0.5 * z * z) / (std::sqrt(2 * M_PI) * sd);
}

// Convex weight straight from its definition Phi_i / P_i = w_A Phi_A + w_B Phi_B.
double convex_oracle(const ExperimentConfig& c, Detector d, double x) {
  const double pa = phi_n(x, c.g, c.sigma);
  const double pb = phi_n(x, 0.0, c.sigma);
  const double pi = density(c, d, MeasurementBasis::position())(x);
  return (pi / click_probability(c, d) - pb) / (pa - pb);
}

}  // namespace

TEST_CASE("mixture before B2 has the right mass") {
  for (double phi : {0.0, 1.0, M_PI}) {
    const auto c = ExperimentConfig::make(phi);
    for (const auto& b : {MeasurementBasis::position(), MeasurementBasis::wavenumber()}) {
      const auto m = mixture_before_B2(c, b);
      const auto g = default_grid(c, b);
      CHECK(integrate(m.eval, g.interval(), QuadratureSpec::simpson(1e-13)) ==
            doctest::Approx(prob_plus(phi)).epsilon(1e-11));
      // Phi_+ = Phi_1 + Phi_2
      for (double v : {-1.0, 0.3, 2.0}) {
        CHECK(m(v) == doctest::Approx(density(c, Detector::D1, b)(v) +
                                      density(c, Detector::D2, b)(v))
                          .epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("convex weights match their definition") {
  for (double phi : {0.5, M_PI / 2, 2.5}) {
    const auto c = ExperimentConfig::make(phi, 1.0, 1.0);
    for (Detector d : {Detector::D1, Detector::D2}) {
      const auto w = convex_weights(c, d, MeasurementBasis::position());
      for (double x : {-3.0, -1.0, 0.0, 0.3, 0.7, 1.0, 2.0, 4.0}) {
        CHECK(w.w_A(x) == doctest::Approx(convex_oracle(c, d, x)).epsilon(1e-9));
        CHECK(w.w_A(x) + w.w_B(x) == doctest::Approx(1.0));
      }
      CHECK(std::isnan(w.w_A(0.5)));
    }
  }
}

TEST_CASE("convex weights leave [0, 1] at phi = pi / 2") {
  const auto w1 = convex_weights(kFig, Detector::D1, MeasurementBasis::position());
  const auto w2 = convex_weights(kFig, Detector::D2, MeasurementBasis::position());
  const auto r1 = classify(w1, default_x_grid(kFig));
  const auto r2 = classify(w2, default_x_grid(kFig));
  CHECK(r1.min_value < 0.0);
  CHECK(r2.min_value < 0.0);
  CHECK(!r1.below_zero.empty());
  CHECK(min_convex_weight(kFig, Detector::D1) < 0.0);
}

TEST_CASE("convex weights undefined in k and at g = 0") {
  CHECK_THROWS_AS(convex_weights(kFig, Detector::D1, MeasurementBasis::wavenumber()),
                  UndefinedWeightsError);
  CHECK_THROWS_AS(
      convex_weights(ExperimentConfig::make(1.0, 0.0), Detector::D1, MeasurementBasis::position()),
      UndefinedWeightsError);
}

TEST_CASE("negative region width agrees with a dense scan") {
  for (double phi : {0.3, M_PI / 2, 2.0}) {
    const auto c = ExperimentConfig::make(phi, 1.0, 1.0);
    for (Detector d : {Detector::D1, Detector::D2}) {
      const double width = negative_region_width(c, d);
      if (!std::isfinite(width)) continue;
      const Grid1D g(-1.5, 2.5, 400001);
      std::size_t neg = 0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double v = convex_oracle(c, d, g[i]);
        if (std::isfinite(v) && v < 0.0) ++neg;
      }
      CHECK(std::abs(double(neg) * g.spacing() - width) <= 3.0 * g.spacing());
    }
  }
  CHECK(negative_region_width(ExperimentConfig::make(0.0), Detector::D1) == 0.0);
}

TEST_CASE("split weights sum to one and have the expected bounds") {
  for (const auto& b : {MeasurementBasis::position(), MeasurementBasis::wavenumber(),
                        MeasurementBasis::quadrature(1.0, 1.0),
                        MeasurementBasis::quadrature(0.1, 1.0)}) {
    const auto w1 = split_weights(kFig, Detector::D1, b);
    const auto w2 = split_weights(kFig, Detector::D2, b);
    const auto g = default_grid(kFig, b, 257);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(w1(g[i]) + w2(g[i]) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  const auto bx = weight_bounds(split_weights(kFig, Detector::D1, MeasurementBasis::position()));
  CHECK(bx.lo == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(bx.hi == doctest::Approx(0.854).epsilon(1e-3));
  const auto bk = weight_bounds(split_weights(kFig, Detector::D1, MeasurementBasis::wavenumber()));
  CHECK(std::abs(bk.lo - 0.029) <= 1e-3);
  CHECK(std::abs(bk.hi - 0.971) <= 1e-3);
  // w_1(k) = 1/2 + sqrt(2) sin(k + pi/4) / 3 here.
  CHECK(bk.hi == doctest::Approx(0.5 + std::sqrt(2.0) / 3.0).epsilon(1e-7));
  CHECK_THROWS(split_weights(kFig, Detector::D3, MeasurementBasis::position()));
}

TEST_CASE("histogram masses") {
  for (int bins : {10, 100, 1000}) {
    for (const auto& b : {MeasurementBasis::position(), MeasurementBasis::wavenumber()}) {
      double total_p = 0.0;
      for (Detector d : {Detector::D1, Detector::D2}) {
        const auto h = weight_histogram(kFig, d, b, bins);
        CHECK(h.total_q() == doctest::Approx(click_probability(kFig, d)).epsilon(1e-6));
        total_p = h.total_p();
        CHECK(total_p == doctest::Approx(prob_plus(kFig.phi)).epsilon(1e-6));
      }
      const auto hd = weight_histogram(kFig, Detector::D1, b, bins, HistogramMode::Density);
      CHECK(hd.total_p() == doctest::Approx(prob_plus(kFig.phi)).epsilon(1e-6));
    }
  }
}

TEST_CASE("histograms of w_1 and w_2 are bin reversals") {
  for (const auto& b : {MeasurementBasis::position(), MeasurementBasis::wavenumber()}) {
    const auto h1 = weight_histogram(kFig, Detector::D1, b, 100);
    const auto h2 = weight_histogram(kFig, Detector::D2, b, 100);
    for (int n = 0; n < 100; ++n) {
      CHECK(std::abs(h1.p[std::size_t(n)] - h2.p[std::size_t(99 - n)]) <= 1e-9);
    }
  }
}

TEST_CASE("histogram supports sit inside the weight bounds") {
  const auto hx = weight_histogram(kFig, Detector::D1, MeasurementBasis::position(), 1000);
  for (int n = 0; n < 1000; ++n) {
    if (hx.p[std::size_t(n)] > 0.0) {
      CHECK((n + 1) * hx.bin_width > 0.5);
      CHECK(n * hx.bin_width < 0.854);
    }
  }
}

TEST_CASE("overlap remainders") {
  const auto hx = weight_histogram(kFig, Detector::D1, MeasurementBasis::position(), 100);
  const auto hk = weight_histogram(kFig, Detector::D1, MeasurementBasis::wavenumber(), 100);
  const auto o = histogram_overlap(hx, hk);
  CHECK(o.cond_pass);
  CHECK(o.remainder_masses_equal);
  CHECK(o.remainder_mass_x > 0.1);
  const auto same = histogram_overlap(hx, hx);
  for (double r : same.remainder_x) CHECK(r == 0.0);
  const auto h2 = weight_histogram(kFig, Detector::D2, MeasurementBasis::position(), 100);
  CHECK_THROWS(histogram_overlap(hx, h2));
}

TEST_CASE("Wigner model: marginals hold, weights do not") {
  const auto v = verify_bivariate_constraints(wigner_model(kFig), kFig, 1e-6);
  CHECK(v.check("marginal_A_x").pass);
  CHECK(v.check("marginal_B_k").pass);
  CHECK(v.check("nonnegative_f_A").pass);
  CHECK(v.check("reproduce_D1_x").pass);
  CHECK(v.check("reproduce_D2_k").pass);
  CHECK(!v.all_pass());
  CHECK(!v.check("weight_range_A").pass);
}

TEST_CASE("factorized solutions solve the integral equations") {
  for (auto which : {FactorizedWhich::Solution1, FactorizedWhich::Solution2}) {
    const auto s = factorized_solutions(kFig, which);
    CHECK(s.integral_equations_pass);
    CHECK(s.integral_residual <= 1e-6);
    CHECK(!s.weights_admissible);
  }
}

TEST_CASE("regression: phi scan violations") {
  // Violating index ranges frozen from an independent numpy evaluation on
  // the default grids: j in [122, 597] and [82, 637].
  for (auto [which, lo, hi] : {std::tuple{FactorizedWhich::Solution1, 122, 597},
                               std::tuple{FactorizedWhich::Solution2, 82, 637}}) {
    const auto scan = factorized_phi_scan(kFig, which);
    REQUIRE(scan.size() == 720);
    for (int j = 0; j < 720; ++j) {
      CHECK(scan[std::size_t(j)].admissible == (j < lo || j > hi));
    }
  }
}
