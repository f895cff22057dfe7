#pragma once

#include <array>
#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "weakmzi/errors.hpp"

namespace weakmzi {

using Complex = std::complex<double>;

enum class Detector { D1, D2, D3 };

inline constexpr std::array<Detector, 3> kDetectors{Detector::D1, Detector::D2,
                                                    Detector::D3};

std::string_view to_string(Detector d);
Detector parse_detector(std::string_view text);
inline int index_of(Detector d) { return static_cast<int>(d); }

// Wraps into (-pi, pi].
double wrap_phase(double phi);

struct ExperimentConfig {
  double phi = M_PI / 2;
  double g = 1.0;
  double sigma = 1.0;
  double arm_length = 1.0;
  double particle_speed = 1.0;

  // Wraps phi and checks sigma > 0, L >= 0, 0 < v <= 1.
  ExperimentConfig validated() const;

  static ExperimentConfig make(double phi, double g = 1.0, double sigma = 1.0) {
    ExperimentConfig c;
    c.phi = phi;
    c.g = g;
    c.sigma = sigma;
    return c.validated();
  }
};

struct HistoryAmplitudes {
  Complex psi1;
  Complex psi2;
  Complex psi3;

  Complex total() const { return psi1 + psi2 + psi3; }
  Complex operator[](int j) const { return j == 0 ? psi1 : j == 1 ? psi2 : psi3; }
};

struct WeakValue {
  double re = 0.0;
  double im = 0.0;

  double modulus_squared() const { return re * re + im * im; }
  Complex value() const { return {re, im}; }
};

HistoryAmplitudes history_amplitudes(Detector detector, double phi);

// Closed forms 2/(3 - e^{i phi}), 2/(1 + e^{i phi}) and 0.
WeakValue weak_value(Detector detector, double phi);

// psi1 / (psi1 + psi2 + psi3) from history_amplitudes.
WeakValue path_sum_weak_value(Detector detector, double phi);

// Same ratio evaluated on the explicit beam-splitter network.
WeakValue oracle_weak_value(Detector detector, double phi);

double bare_probability(Detector detector, double phi);

// (sqrt(2) - 1/v) L, in units where c = 1.
double spacelike_margin(double arm_length, double speed);

namespace network {

// Mode 0 carries the source. After the first splitter mode 1 is arm x1 and
// mode 0 is Bob's side, which splits into arm x2 (mode 0) and x3 (mode 2).
inline constexpr int kArmMode[3] = {1, 0, 2};
// Output ports: D1 = mode 1, D2 = mode 0, D3 = mode 2.
inline constexpr int kDetectorMode[3] = {1, 0, 2};

Eigen::Matrix3cd beam_splitter(int p, int q);
Eigen::Matrix3cd phase_shifter(int mode, double phi);

// Source to the arms (B1, Bob's splitter, phase shifter).
Eigen::Matrix3cd front(double phi);
// Arms to the detectors (Bob's recombiner, B2).
Eigen::Matrix3cd back();

Complex history_amplitude(Detector detector, int arm, double phi);

}  // namespace network

}  // namespace weakmzi
