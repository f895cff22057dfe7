#include <doctest.h>

#include <cmath>

#include "weakmzi/errors.hpp"
#include "weakmzi/interferometer.hpp"

using namespace weakmzi;

namespace {

double sweep_phi(int j) { return -M_PI + 2.0 * M_PI * j / 720.0; }

}  // namespace

TEST_CASE("phase wrapping") {
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_phase(3 * M_PI / 2) == doctest::Approx(-M_PI / 2));
  CHECK(wrap_phase(4 * M_PI + 0.1) == doctest::Approx(0.1));
  CHECK_THROWS(wrap_phase(NAN));
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.sigma = 0.0;
  CHECK_THROWS_AS(c.validated(), std::invalid_argument);
  c = {};
  c.particle_speed = 1.5;
  CHECK_THROWS_AS(c.validated(), std::invalid_argument);
  CHECK(ExperimentConfig::make(7.0).phi == doctest::Approx(7.0 - 2 * M_PI));
}

TEST_CASE("known weak values") {
  const auto d1 = weak_value(Detector::D1, M_PI / 2);
  CHECK(d1.re == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(d1.im == doctest::Approx(0.2).epsilon(1e-15));
  const auto d2 = weak_value(Detector::D2, M_PI / 2);
  CHECK(d2.re == 1.0);
  CHECK(d2.im == doctest::Approx(-1.0).epsilon(1e-15));
  const auto d3 = weak_value(Detector::D3, 1.234);
  CHECK(d3.re == 0.0);
  CHECK(d3.im == 0.0);
  const auto z = weak_value(Detector::D1, 0.0);
  CHECK(z.re == 1.0);
  CHECK(z.im == 0.0);
}

TEST_CASE("D2 weak value is singular at pi") {
  CHECK_THROWS_AS(weak_value(Detector::D2, M_PI), SingularWeakValueError);
  CHECK_THROWS_AS(path_sum_weak_value(Detector::D2, M_PI), SingularWeakValueError);
  CHECK_THROWS_AS(oracle_weak_value(Detector::D2, M_PI), SingularWeakValueError);
  CHECK_NOTHROW(weak_value(Detector::D2, M_PI - 1e-6));
}

TEST_CASE("closed forms agree with path sums and the unitary network") {
  for (int j = 0; j <= 720; ++j) {
    const double phi = sweep_phi(j);
    for (Detector d : kDetectors) {
      if (d == Detector::D2 && std::abs(std::cos(phi / 2)) < 1e-12) continue;
      const auto a = weak_value(d, phi);
      const auto b = path_sum_weak_value(d, phi);
      const auto c = oracle_weak_value(d, phi);
      const double scale = std::max(1.0, std::abs(a.value()));
      CHECK(std::abs(a.value() - b.value()) <= 1e-12 * scale);
      CHECK(std::abs(a.value() - c.value()) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("D2 real part stays 1") {
  for (int j = 0; j < 720; ++j) {
    const double phi = 2.0 * M_PI * (j + 0.5) / 720.0;
    CHECK(weak_value(Detector::D2, phi).re == 1.0);
  }
}

TEST_CASE("bare probabilities are the network's Born weights") {
  for (int j = 0; j <= 720; ++j) {
    const double phi = sweep_phi(j);
    const Eigen::Matrix3cd u = network::back() * network::front(phi);
    double sum = 0.0;
    for (Detector d : kDetectors) {
      const double born = std::norm(u(network::kDetectorMode[index_of(d)], 0));
      CHECK(bare_probability(d, phi) == doctest::Approx(born).epsilon(1e-13));
      CHECK(std::norm(history_amplitudes(d, phi).total()) ==
            doctest::Approx(born).epsilon(1e-13));
      sum += bare_probability(d, phi);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("network elements are unitary") {
  const Eigen::Matrix3cd id = Eigen::Matrix3cd::Identity();
  for (double phi : {0.0, 0.3, M_PI}) {
    const Eigen::Matrix3cd f = network::front(phi);
    CHECK((f.adjoint() * f - id).norm() < 1e-14);
  }
  const Eigen::Matrix3cd b = network::back();
  CHECK((b.adjoint() * b - id).norm() < 1e-14);
}

TEST_CASE("history amplitudes match the network per arm") {
  for (double phi : {0.0, 0.7, 2.0, -1.1}) {
    for (Detector d : kDetectors) {
      const auto h = history_amplitudes(d, phi);
      for (int arm = 0; arm < 3; ++arm) {
        CHECK(std::abs(h[arm] - network::history_amplitude(d, arm, phi)) < 1e-15);
      }
    }
  }
}

TEST_CASE("spacelike margin") {
  CHECK(spacelike_margin(1.0, 1.0) == doctest::Approx(std::sqrt(2.0) - 1.0));
  CHECK(spacelike_margin(2.0, 1.0 / std::sqrt(2.0)) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(spacelike_margin(1.0, 0.5) < 0.0);
  CHECK_THROWS(spacelike_margin(1.0, 0.0));
  CHECK_THROWS(spacelike_margin(-1.0, 1.0));
}

TEST_CASE("detector names") {
  CHECK(parse_detector("D2") == Detector::D2);
  CHECK(parse_detector("3") == Detector::D3);
  CHECK(to_string(Detector::D1) == "D1");
  CHECK_THROWS(parse_detector("D4"));
}
