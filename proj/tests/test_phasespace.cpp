#include <doctest.h>

#include <cmath>

#include "weakmzi/phasespace.hpp"

using namespace weakmzi;

TEST_CASE("labels") {
  CHECK(parse_wigner_label("W+") == WignerLabel::WPlus);
  CHECK(parse_wigner_label("W_1") == WignerLabel::W1);
  CHECK(parse_wigner_label("wb") == WignerLabel::WB);
  CHECK_THROWS(parse_wigner_label("W3"));
  CHECK_THROWS(wigner_closed_form(WignerLabel::Custom, ExperimentConfig{}));
}

TEST_CASE("closed forms match the Wigner transform of the wavefunction") {
  for (double phi : {0.4, M_PI / 2}) {
    const auto c = ExperimentConfig::make(phi, 1.5, 0.8);
    const auto grids = default_scan_grids(c, 64);
    for (Detector d : {Detector::D1, Detector::D2}) {
      const auto num = wigner_from_wavefunction(final_meter_x(c, d), grids.x, grids.k);
      const auto cf = wigner_closed_form(d == Detector::D1 ? WignerLabel::W1 : WignerLabel::W2, c);
      CHECK(num.mass == doctest::Approx(cf.mass).epsilon(1e-10));
      for (double x : {-1.0, 0.0, 0.75, 1.6, 3.0}) {
        for (double k : {-1.2, -0.3, 0.0, 0.5, 2.0}) {
          CHECK(std::abs(num(x, k) - cf(x, k)) <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("W_1 + W_2 = W_+ pointwise") {
  const auto c = ExperimentConfig::make(2.1, 3.0, 1.0);
  const auto w1 = wigner_closed_form(WignerLabel::W1, c);
  const auto w2 = wigner_closed_form(WignerLabel::W2, c);
  const auto wp = wigner_closed_form(WignerLabel::WPlus, c);
  const auto grids = default_scan_grids(c, 64);
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      const double x = grids.x[i], k = grids.k[j];
      CHECK(std::abs(w1(x, k) + w2(x, k) - wp(x, k)) <= 1e-12);
    }
  }
}

TEST_CASE("marginals are the pointer densities") {
  const auto c = ExperimentConfig::make(M_PI / 2, 1.0, 1.0);
  for (auto [label, det] : {std::pair{WignerLabel::W1, Detector::D1},
                            std::pair{WignerLabel::W2, Detector::D2}}) {
    const auto f = wigner_closed_form(label, c);
    const auto mx = marginal(f, PhaseAxis::X);
    const auto mk = marginal(f, PhaseAxis::K);
    const auto px = density(c, det, MeasurementBasis::position());
    const auto pk = density(c, det, MeasurementBasis::wavenumber());
    for (double v : {-2.0, -0.5, 0.0, 0.5, 1.0, 2.5}) {
      CHECK(std::abs(mx(v) - px(v)) <= 1e-8);
      CHECK(std::abs(mk(v / 2) - pk(v / 2)) <= 1e-8);
    }
  }
}

TEST_CASE("Radon tomograms reproduce the densities") {
  const auto c = ExperimentConfig::make(M_PI / 2, 1.0, 1.0);
  const auto f = wigner_closed_form(WignerLabel::W1, c);
  for (auto [a, b] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{1.0, 1.0}}) {
    const auto basis = MeasurementBasis::quadrature(a, b);
    const auto grid = default_grid(c, basis, 41);
    const auto t = radon_tomogram(f, {a, b}, grid);
    const auto p = density(c, Detector::D1, basis);
    for (std::size_t i = 5; i < 36; ++i) {
      CHECK(std::abs(t(grid[i]) - p(grid[i])) <= 1e-6);
    }
  }
}

TEST_CASE("field masses") {
  const auto c = ExperimentConfig::make(1.0, 1.0, 1.0);
  CHECK(field_mass(wigner_closed_form(WignerLabel::WA, c)) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(field_mass(wigner_closed_form(WignerLabel::W2, c)) ==
        doctest::Approx(click_probability(c, Detector::D2)).epsilon(1e-9));
}

TEST_CASE("negativity appears at g = 10 and vanishes at phi = 0") {
  const auto c = ExperimentConfig::make(M_PI / 2, 10.0, 1.0);
  const auto g = default_scan_grids(c, 512);
  for (auto label : {WignerLabel::W1, WignerLabel::W2}) {
    const auto r = negativity_scan(wigner_closed_form(label, c), g.x, g.k);
    CHECK(r.min_value < 0.0);
    CHECK(r.negative_mass > 0.0);
    CHECK(r.argmin_x == doctest::Approx(5.0).epsilon(0.05));
  }
  const auto c0 = ExperimentConfig::make(0.0, 10.0, 1.0);
  for (auto label : {WignerLabel::W1, WignerLabel::W2, WignerLabel::WPlus}) {
    const auto r = negativity_scan(wigner_closed_form(label, c0), g.x, g.k);
    CHECK(r.min_value >= -1e-12);
  }
}

TEST_CASE("regression: min W_2 at g = 10 on the 2048^2 grid") {
  // Frozen from an independent numpy evaluation of the same grid.
  const auto c = ExperimentConfig::make(M_PI / 2, 10.0, 1.0);
  const auto g = default_scan_grids(c, 2048);
  const auto r = negativity_scan(wigner_closed_form(WignerLabel::W2, c), g.x, g.k);
  CHECK(r.min_value == doctest::Approx(-0.11120688650154517).epsilon(1e-12));
  CHECK(r.argmin_x == doctest::Approx(4.9946262823644361).epsilon(1e-12));
  CHECK(r.argmin_k == doctest::Approx(0.074743527112847818).epsilon(1e-12));
}

TEST_CASE("reference Wigner functions are positive Gaussians") {
  const auto c = ExperimentConfig::make(0.7, 2.0, 1.0);
  const auto wa = wigner_closed_form(WignerLabel::WA, c);
  CHECK(wa(2.0, 0.0) == doctest::Approx(1.0 / M_PI));
  const auto g = default_scan_grids(c, 128);
  CHECK(negativity_scan(wa, g.x, g.k).min_value >= 0.0);
}
