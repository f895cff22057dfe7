#pragma once

#include <functional>
#include <string_view>

#include "weakmzi/distribution.hpp"
#include "weakmzi/interferometer.hpp"
#include "weakmzi/pointer.hpp"

namespace weakmzi {

enum class WignerLabel { WA, WB, WPlus, W1, W2, Custom };

std::string_view to_string(WignerLabel label);
WignerLabel parse_wigner_label(std::string_view text);

struct PhaseSpaceField {
  std::function<double(double, double)> eval;
  WignerLabel label = WignerLabel::Custom;
  ExperimentConfig params;
  double mass = 1.0;
  // Box holding all but a negligible part of the field.
  Interval x_support{0.0, 0.0};
  Interval k_support{0.0, 0.0};

  double operator()(double x, double k) const { return eval(x, k); }
};

PhaseSpaceField wigner_closed_form(WignerLabel label, const ExperimentConfig& config);

// (1/pi) int conj(f(x+z)) f(x-z) exp(2ikz) dz by adaptive quadrature over the
// overlap of the wavefunction's support with its reflection.
PhaseSpaceField wigner_from_wavefunction(const MeterWavefunction& wavefunction,
                                         const Grid1D& grid_x, const Grid1D& grid_k);

enum class PhaseAxis { X, K };

// Integrates out the other variable over the field's support.
Distribution marginal(const PhaseSpaceField& field, PhaseAxis axis);

// Line integral of the field along a x + b k = eta.
Distribution radon_tomogram(const PhaseSpaceField& field, QuadratureAxis axis,
                            const Grid1D& eta_grid);

// Double integral over the support box.
double field_mass(const PhaseSpaceField& field, double abs_tol = 1e-10);

struct NegativityReport {
  double min_value;
  double argmin_x;
  double argmin_k;
  double negative_mass;
  Grid1D grid_x;
  Grid1D grid_k;
};

NegativityReport negativity_scan(const PhaseSpaceField& field, const Grid1D& grid_x,
                                 const Grid1D& grid_k);

struct ScanGrids {
  Grid1D x;
  Grid1D k;
};

// x in [min(0,g) - 6 sigma, max(0,g) + 6 sigma], k in [-3/sigma, 3/sigma].
ScanGrids default_scan_grids(const ExperimentConfig& config, std::size_t points = 512);

}  // namespace weakmzi
