#pragma once

#include <functional>

#include <Eigen/Dense>

#include "weakmzi/distribution.hpp"
#include "weakmzi/interferometer.hpp"
#include "weakmzi/numerics.hpp"

namespace weakmzi {

struct MeterWavefunction {
  BasisKind basis = BasisKind::Position;
  std::function<Complex(double)> eval;
  // Bare transition amplitude N = psi1 + psi2 + psi3 (1 for the initial meter).
  Complex postselection_amplitude{1.0, 0.0};
  // Outside this interval |eval| is below ~1e-15 of its peak.
  Interval support{0.0, 0.0};

  Complex operator()(double v) const { return eval(v); }
};

MeterWavefunction initial_meter(double sigma);
MeterWavefunction final_meter_x(const ExperimentConfig& config, Detector detector);
MeterWavefunction final_meter_k(const ExperimentConfig& config, Detector detector);

// Unnormalized density of the meter after the given detector clicked; its
// mass is click_probability(config, detector).
Distribution density(const ExperimentConfig& config, Detector detector,
                     const MeasurementBasis& basis);

// Normalized Gaussian of the unshifted (B) or shifted (A) initial meter in
// the given basis.
Distribution reference_gaussian(const ExperimentConfig& config, bool shifted,
                                const MeasurementBasis& basis);

double click_probability(const ExperimentConfig& config, Detector detector);

Grid1D default_grid(const ExperimentConfig& config, const MeasurementBasis& basis,
                    std::size_t points = 2048);
inline Grid1D default_x_grid(const ExperimentConfig& c) {
  return default_grid(c, MeasurementBasis::position());
}
inline Grid1D default_k_grid(const ExperimentConfig& c) {
  return default_grid(c, MeasurementBasis::wavenumber());
}

// exp(-i g Pi_1 k) applied to the sampled initial meter in Fourier space,
// with the exponential of the diagonal generator summed as a truncated
// power series, then contracted with the history amplitudes.
Eigen::VectorXcd operator_exponential_oracle(const ExperimentConfig& config,
                                             Detector detector,
                                             const Grid1D& grid);

// Direct sum (h / sqrt(2 pi)) sum_j f(x_j) exp(-i k x_j) with trapezoid weights.
Eigen::VectorXcd discrete_fourier_transform(const MeterWavefunction& wavefunction,
                                            const Grid1D& x_grid,
                                            const Grid1D& k_grid);

}  // namespace weakmzi
