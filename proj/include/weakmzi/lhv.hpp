#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weakmzi/distribution.hpp"
#include "weakmzi/interferometer.hpp"
#include "weakmzi/phasespace.hpp"
#include "weakmzi/pointer.hpp"

namespace weakmzi {

struct DefaultDistributions {
  Distribution phi_A_x;
  Distribution phi_B_x;
  Distribution phi_A_k;
  Distribution phi_B_k;
};

DefaultDistributions default_distributions(const ExperimentConfig& config);

// 1/2 Phi_A + 1/4 (1 - cos phi) Phi_B, mass (3 - cos phi) / 4.
Distribution mixture_before_B2(const ExperimentConfig& config,
                               const MeasurementBasis& basis);

inline double prob_plus(double phi) { return (3.0 - std::cos(phi)) / 4.0; }

struct ConvexWeightFunction {
  // w_A; NaN at the excluded point where Phi_A = Phi_B.
  RealFunction eval;
  Detector detector;
  MeasurementBasis basis;
  ExperimentConfig config;
  double excluded_point;

  double w_A(double x) const { return eval(x); }
  double w_B(double x) const { return 1.0 - eval(x); }
};

ConvexWeightFunction convex_weights(const ExperimentConfig& config, Detector detector,
                                    const MeasurementBasis& basis);

struct WeightRegions {
  double min_value;
  double max_value;
  std::vector<Interval> below_zero;
  std::vector<Interval> above_one;
};

// Grid scan of w_A, skipping the excluded point.
WeightRegions classify(const ConvexWeightFunction& w, const Grid1D& grid);

// min of w_A over the default x grid.
double min_convex_weight(const ExperimentConfig& config, Detector detector);

// Exact width of the interval next to x = g/2 on which w_A < 0.
double negative_region_width(const ExperimentConfig& config, Detector detector);

struct SplitWeightFunction {
  // w_i = Phi_i / Phi_+; NaN where Phi_+ <= 1e-300 (clamped domain).
  RealFunction eval;
  Detector detector;
  MeasurementBasis basis;
  ExperimentConfig config;

  double operator()(double v) const { return eval(v); }
  bool defined_at(double v) const { return !std::isnan(eval(v)); }
};

SplitWeightFunction split_weights(const ExperimentConfig& config, Detector detector,
                                  const MeasurementBasis& basis);

// min / max over the grid points where the weight is defined.
Interval weight_range(const SplitWeightFunction& w, const Grid1D& grid);

// inf / sup over the line: the default grid plus a five-fold widened one,
// stopping where Phi_+ underflows.
Interval weight_bounds(const SplitWeightFunction& w, std::size_t points = 16385);

using PhaseFunction = std::function<double(double, double)>;

struct HiddenBivariateModel {
  std::string name;
  PhaseSpaceField f_A;
  PhaseSpaceField f_B;
  // Probability of routing towards D1 for a hidden pair (x, k); the D2
  // weights are the complements.
  PhaseFunction w1_A;
  PhaseFunction w1_B;
};

// f_A = W_A, f_B = W_B and both weights W_1 / W_+.
HiddenBivariateModel wigner_model(const ExperimentConfig& config);

struct ConstraintCheck {
  std::string name;
  bool pass;
  double worst_residual;
  double at_x;
  double at_k;
};

struct BivariateVerdict {
  std::vector<ConstraintCheck> checks;

  bool all_pass() const;
  const ConstraintCheck& check(const std::string& name) const;
};

struct BivariateCheckOptions {
  std::size_t sample_points = 41;
  std::size_t scan_points = 256;
};

BivariateVerdict verify_bivariate_constraints(const HiddenBivariateModel& model,
                                              const ExperimentConfig& config, double tol,
                                              const BivariateCheckOptions& options = {});

enum class FactorizedWhich { Solution1, Solution2 };

struct FactorizedSolution {
  FactorizedWhich which;
  ExperimentConfig config;
  // f_+ = Phi_+(x) Phi_+(k) / Prob(D_+)
  PhaseSpaceField f_plus;
  PhaseFunction w1_plus;
  // Worst residual of the two integral equations for D1 and D2.
  double integral_residual;
  bool integral_equations_pass;
  double w_min;
  double w_max;
  bool weights_admissible;
};

FactorizedSolution factorized_solutions(const ExperimentConfig& config,
                                        FactorizedWhich which, double tol = 1e-6,
                                        std::size_t sample_points = 41);

// Extremes of w_1^+ over the default x and k grids, from the separable form.
Interval factorized_weight_range(const ExperimentConfig& config, FactorizedWhich which);

struct PhiScanPoint {
  double phi;
  double w_min;
  double w_max;
  bool admissible;
};

// phi_j = 2 pi (j + 1/2) / points.
std::vector<PhiScanPoint> factorized_phi_scan(const ExperimentConfig& config,
                                              FactorizedWhich which,
                                              std::size_t points = 720);

enum class HistogramMode { Discrete, Density };

struct WeightHistogram {
  MeasurementBasis basis;
  Detector detector;
  ExperimentConfig config;
  int bins;
  double bin_width;
  HistogramMode mode;
  // Phi_+ mass of the outcomes whose weight falls in the bin.
  std::vector<double> p;
  // Phi_i mass of the same outcomes.
  std::vector<double> q;
  double weight_min;
  double weight_max;

  double total_p() const;
  double total_q() const;
};

WeightHistogram weight_histogram(const ExperimentConfig& config, Detector detector,
                                 const MeasurementBasis& basis, int bins,
                                 HistogramMode mode = HistogramMode::Discrete);

struct HistogramOverlap {
  std::vector<double> ovl;
  std::vector<double> remainder_x;
  std::vector<double> remainder_k;
  double remainder_mass_x;
  double remainder_mass_k;
  // |int Phi_i(x) dx - int Phi_i(k) dk|
  double cond_residual;
  bool cond_pass;
  bool remainder_masses_equal;
};

HistogramOverlap histogram_overlap(const WeightHistogram& h_x, const WeightHistogram& h_k);

}  // namespace weakmzi
