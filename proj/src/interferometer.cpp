#include "weakmzi/interferometer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace weakmzi {

namespace {

constexpr Complex kI{0.0, 1.0};

// |1 + e^{i phi}| below this is treated as the D2 null post-selection.
constexpr double kSingularTol = 1e-14;

WeakValue ratio(Complex psi1, Complex total, Detector d, double phi) {
  if (psi1 == Complex(0.0, 0.0)) return {0.0, 0.0};
  if (std::abs(total) < kSingularTol * std::abs(psi1)) {
    throw SingularWeakValueError("weak value of " + std::string(to_string(d)) +
                                 " undefined at phi = " + std::to_string(phi) +
                                 ": post-selection amplitude vanishes");
  }
  const Complex w = psi1 / total;
  return {w.real(), w.imag()};
}

}  // namespace

std::string_view to_string(Detector d) {
  switch (d) {
    case Detector::D1:
      return "D1";
    case Detector::D2:
      return "D2";
    case Detector::D3:
      return "D3";
  }
  return "?";
}

Detector parse_detector(std::string_view text) {
  if (text == "D1" || text == "1") return Detector::D1;
  if (text == "D2" || text == "2") return Detector::D2;
  if (text == "D3" || text == "3") return Detector::D3;
  throw std::invalid_argument("unknown detector '" + std::string(text) + "'");
}

double wrap_phase(double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("phi must be finite");
  double r = std::remainder(phi, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

ExperimentConfig ExperimentConfig::validated() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("sigma must be > 0");
  }
  if (!std::isfinite(g)) throw std::invalid_argument("g must be finite");
  if (!(arm_length >= 0.0)) throw std::invalid_argument("arm length must be >= 0");
  if (!(particle_speed > 0.0 && particle_speed <= 1.0)) {
    throw std::invalid_argument("particle speed must lie in (0, 1]");
  }
  ExperimentConfig out = *this;
  out.phi = wrap_phase(phi);
  return out;
}

HistoryAmplitudes history_amplitudes(Detector detector, double phi) {
  const Complex e = std::polar(1.0, phi);
  switch (detector) {
    case Detector::D1:
      return {0.5 * kI, 0.25 * kI, -0.25 * kI * e};
    case Detector::D2:
      return {-0.5, 0.25, -0.25 * e};
    case Detector::D3: {
      const double s = 0.5 * M_SQRT1_2;
      return {0.0, s * kI, s * kI * e};
    }
  }
  return {};
}

WeakValue weak_value(Detector detector, double phi) {
  phi = wrap_phase(phi);
  const double c = std::cos(phi);
  const double s = std::sin(phi);
  switch (detector) {
    case Detector::D1: {
      const double den = 5.0 - 3.0 * c;
      return {(3.0 - c) / den, s / den};
    }
    case Detector::D2: {
      if (2.0 * std::abs(std::cos(0.5 * phi)) < kSingularTol) {
        throw SingularWeakValueError(
            "weak value of D2 undefined at phi = pi: post-selection "
            "probability is zero");
      }
      return {1.0, -std::tan(0.5 * phi)};
    }
    case Detector::D3:
      return {0.0, 0.0};
  }
  return {};
}

WeakValue path_sum_weak_value(Detector detector, double phi) {
  phi = wrap_phase(phi);
  const auto h = history_amplitudes(detector, phi);
  return ratio(h.psi1, h.total(), detector, phi);
}

double bare_probability(Detector detector, double phi) {
  const double c = std::cos(phi);
  switch (detector) {
    case Detector::D1:
      return (5.0 - 3.0 * c) / 8.0;
    case Detector::D2:
      return (1.0 + c) / 8.0;
    case Detector::D3:
      return (1.0 + c) / 4.0;
  }
  return 0.0;
}

double spacelike_margin(double arm_length, double speed) {
  if (!(speed > 0.0 && speed <= 1.0)) {
    throw std::invalid_argument("particle speed must lie in (0, 1]");
  }
  if (!(arm_length >= 0.0)) throw std::invalid_argument("arm length must be >= 0");
  return (M_SQRT2 - 1.0 / speed) * arm_length;
}

namespace network {

Eigen::Matrix3cd beam_splitter(int p, int q) {
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
  u(p, p) = u(q, q) = M_SQRT1_2;
  u(p, q) = u(q, p) = M_SQRT1_2 * kI;
  return u;
}

Eigen::Matrix3cd phase_shifter(int mode, double phi) {
  Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
  u(mode, mode) = std::polar(1.0, phi);
  return u;
}

Eigen::Matrix3cd front(double phi) {
  return phase_shifter(2, phi) * beam_splitter(0, 2) * beam_splitter(0, 1);
}

Eigen::Matrix3cd back() { return beam_splitter(1, 0) * beam_splitter(0, 2); }

Complex history_amplitude(Detector detector, int arm, double phi) {
  const int m = kArmMode[arm];
  const Eigen::Vector3cd inside = front(phi).col(0);
  Eigen::Vector3cd projected = Eigen::Vector3cd::Zero();
  projected(m) = inside(m);
  return (back() * projected)(kDetectorMode[index_of(detector)]);
}

}  // namespace network

WeakValue oracle_weak_value(Detector detector, double phi) {
  phi = wrap_phase(phi);
  const Complex psi1 = network::history_amplitude(detector, 0, phi);
  const Complex total =
      (network::back() * network::front(phi))(network::kDetectorMode[index_of(detector)], 0);
  return ratio(psi1, total, detector, phi);
}

}  // namespace weakmzi
