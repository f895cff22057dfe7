#include "weakmzi/lhv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace weakmzi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kUnderflowGuard = 1e-300;

double detector_sign(Detector d) {
  if (d == Detector::D3) throw std::invalid_argument("D3 does not split at B2");
  return d == Detector::D1 ? 1.0 : -1.0;
}

// Half the log of Phi_A(x) / Phi_B(x).
double half_log_ratio(const ExperimentConfig& c, double x) {
  return (x * c.g - 0.5 * c.g * c.g) / (2.0 * c.sigma * c.sigma);
}

double product_or_zero(double f, double w) {
  if (f == 0.0 || std::isnan(w)) return 0.0;
  return f * w;
}

double gauss7(const RealFunction& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 7>::integrate(f, a, b);
}

Grid1D sample_grid(const ExperimentConfig& c, PhaseAxis axis, std::size_t n) {
  if (axis == PhaseAxis::X) {
    return Grid1D(std::min(0.0, c.g) - 4.0 * c.sigma, std::max(0.0, c.g) + 4.0 * c.sigma,
                  n);
  }
  return Grid1D(-2.0 / c.sigma, 2.0 / c.sigma, n);
}

}  // namespace

DefaultDistributions default_distributions(const ExperimentConfig& config) {
  const ExperimentConfig c = config.validated();
  return {reference_gaussian(c, true, MeasurementBasis::position()),
          reference_gaussian(c, false, MeasurementBasis::position()),
          reference_gaussian(c, true, MeasurementBasis::wavenumber()),
          reference_gaussian(c, false, MeasurementBasis::wavenumber())};
}

Distribution mixture_before_B2(const ExperimentConfig& config,
                               const MeasurementBasis& basis) {
  const ExperimentConfig c = config.validated();
  const double u = 1.0 - std::cos(c.phi);
  const auto fa = reference_gaussian(c, true, basis).eval;
  const auto fb = reference_gaussian(c, false, basis).eval;
  Distribution d;
  d.basis = basis;
  d.eval = [=](double v) { return 0.5 * fa(v) + 0.25 * u * fb(v); };
  d.mass = prob_plus(c.phi);
  d.normalized = false;
  d.support = default_grid(c, basis).interval();
  return d;
}

ConvexWeightFunction convex_weights(const ExperimentConfig& config, Detector detector,
                                    const MeasurementBasis& basis) {
  const ExperimentConfig c = config.validated();
  if (basis.kind != BasisKind::Position) {
    throw UndefinedWeightsError(
        "convex weights are undefined outside the x basis: Phi_A - Phi_B vanishes "
        "identically for k");
  }
  if (c.g == 0.0) {
    throw UndefinedWeightsError("convex weights are undefined for g = 0 (Phi_A = Phi_B)");
  }
  ConvexWeightFunction w;
  w.detector = detector;
  w.basis = basis;
  w.config = c;
  w.excluded_point = 0.5 * c.g;

  if (detector == Detector::D3) {
    const double pole = w.excluded_point;
    w.eval = [pole](double x) { return x == pole ? kNaN : 0.0; };
    return w;
  }
  const double s = detector_sign(detector);
  const double u = 1.0 - std::cos(c.phi);
  const double p = click_probability(c, detector);
  const double pole = w.excluded_point;
  w.eval = [=](double x) {
    if (x == pole) return kNaN;
    const double lr = half_log_ratio(c, x);
    double num, den;
    if (lr <= 0.0) {
      const double r = std::exp(lr);
      num = (0.25 * r * r + 0.125 * u + s * 0.25 * u * r) / p - 1.0;
      den = std::expm1(2.0 * lr);
    } else {
      const double q = std::exp(-lr);
      num = (0.25 + 0.125 * u * q * q + s * 0.25 * u * q) / p - q * q;
      den = -std::expm1(-2.0 * lr);
    }
    if (den == 0.0) return kNaN;
    return num / den;
  };
  return w;
}

WeightRegions classify(const ConvexWeightFunction& w, const Grid1D& grid) {
  WeightRegions out{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity(),
                    {},
                    {}};
  bool in_low = false, in_high = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double v = w.eval(x);
    if (std::isnan(v)) continue;
    out.min_value = std::min(out.min_value, v);
    out.max_value = std::max(out.max_value, v);
    const bool low = v < 0.0;
    const bool high = v > 1.0;
    if (low && !in_low) out.below_zero.push_back({x, x});
    if (high && !in_high) out.above_one.push_back({x, x});
    if (low) out.below_zero.back().hi = x;
    if (high) out.above_one.back().hi = x;
    in_low = low;
    in_high = high;
  }
  return out;
}

double min_convex_weight(const ExperimentConfig& config, Detector detector) {
  const auto w = convex_weights(config, detector, MeasurementBasis::position());
  return classify(w, default_x_grid(w.config)).min_value;
}

double negative_region_width(const ExperimentConfig& config, Detector detector) {
  const ExperimentConfig c = config.validated();
  const double s = detector_sign(detector);
  const double u = 1.0 - std::cos(c.phi);
  const double p = click_probability(c, detector);
  // Numerator of w_A as a function of r = sqrt(Phi_A / Phi_B).
  auto numerator = [&](double r) {
    return (0.25 * r * r + s * 0.25 * u * r + 0.125 * u) / p - 1.0;
  };
  const double at_pole = numerator(1.0);
  if (at_pole == 0.0) return 0.0;
  // 1/4 r^2 + s u/4 r + (u/8 - p) = 0
  const double disc = u * u / 16.0 - (0.125 * u - p);
  std::vector<double> roots;
  if (disc >= 0.0) {
    const double sq = 2.0 * std::sqrt(disc);
    for (double r : {-0.5 * s * u - sq, -0.5 * s * u + sq}) {
      if (r > 0.0) roots.push_back(r);
    }
  }
  double bound = kNaN;
  if (at_pole > 0.0) {
    // negative for r in (root, 1)
    for (double r : roots) {
      if (r < 1.0 && (std::isnan(bound) || r > bound)) bound = r;
    }
  } else {
    for (double r : roots) {
      if (r > 1.0 && (std::isnan(bound) || r < bound)) bound = r;
    }
  }
  if (std::isnan(bound)) return std::numeric_limits<double>::infinity();
  return 2.0 * c.sigma * c.sigma * std::abs(std::log(bound)) / std::abs(c.g);
}

SplitWeightFunction split_weights(const ExperimentConfig& config, Detector detector,
                                  const MeasurementBasis& basis) {
  const ExperimentConfig c = config.validated();
  const double s = detector_sign(detector);
  const double cs = std::cos(c.phi);
  const double u = 1.0 - cs;
  const auto plus = mixture_before_B2(c, basis).eval;

  SplitWeightFunction w;
  w.detector = detector;
  w.basis = basis;
  w.config = c;

  switch (basis.kind) {
    case BasisKind::Position:
      w.eval = [=](double x) {
        if (!(plus(x) > kUnderflowGuard)) return kNaN;
        const double lr = half_log_ratio(c, x);
        if (lr <= 0.0) {
          const double r = std::exp(lr);
          return (0.25 * r * r + 0.125 * u + s * 0.25 * u * r) / (0.5 * r * r + 0.25 * u);
        }
        const double q = std::exp(-lr);
        return (0.25 + 0.125 * u * q * q + s * 0.25 * u * q) / (0.5 + 0.25 * u * q * q);
      };
      break;
    case BasisKind::Wavenumber: {
      const double g = c.g;
      const double phi = c.phi;
      w.eval = [=](double k) {
        if (!(plus(k) > kUnderflowGuard)) return kNaN;
        return (3.0 - cs + 2.0 * s * (std::cos(g * k) - std::cos(phi + g * k))) /
               (2.0 * (3.0 - cs));
      };
      break;
    }
    case BasisKind::Quadrature: {
      const auto part = density(c, detector, basis).eval;
      w.eval = [=](double eta) {
        const double den = plus(eta);
        if (!(den > kUnderflowGuard)) return kNaN;
        return part(eta) / den;
      };
      break;
    }
  }
  return w;
}

Interval weight_range(const SplitWeightFunction& w, const Grid1D& grid) {
  Interval r{std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = w(grid[i]);
    if (std::isnan(v)) continue;
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  return r;
}

Interval weight_bounds(const SplitWeightFunction& w, std::size_t points) {
  const Grid1D base = default_grid(w.config, w.basis);
  const double mid = 0.5 * (base.min() + base.max());
  const double half = 2.5 * (base.max() - base.min());
  const Interval wide = weight_range(w, Grid1D(mid - half, mid + half, points));
  const Interval fine = weight_range(w, base);
  return {std::min(wide.lo, fine.lo), std::max(wide.hi, fine.hi)};
}

HiddenBivariateModel wigner_model(const ExperimentConfig& config) {
  const ExperimentConfig c = config.validated();
  HiddenBivariateModel m;
  m.name = "wigner";
  m.f_A = wigner_closed_form(WignerLabel::WA, c);
  m.f_B = wigner_closed_form(WignerLabel::WB, c);
  const auto w1 = wigner_closed_form(WignerLabel::W1, c).eval;
  const auto wp = wigner_closed_form(WignerLabel::WPlus, c).eval;
  auto ratio = [w1, wp](double x, double k) {
    const double den = wp(x, k);
    return den > kUnderflowGuard ? w1(x, k) / den : 0.5;
  };
  m.w1_A = ratio;
  m.w1_B = ratio;
  return m;
}

bool BivariateVerdict::all_pass() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConstraintCheck& c) { return c.pass; });
}

const ConstraintCheck& BivariateVerdict::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no constraint named " + name);
}

BivariateVerdict verify_bivariate_constraints(const HiddenBivariateModel& model,
                                              const ExperimentConfig& config, double tol,
                                              const BivariateCheckOptions& options) {
  const ExperimentConfig c = config.validated();
  const double u = 1.0 - std::cos(c.phi);
  const auto defaults = default_distributions(c);
  const Grid1D xs = sample_grid(c, PhaseAxis::X, options.sample_points);
  const Grid1D ks = sample_grid(c, PhaseAxis::K, options.sample_points);
  const QuadratureSpec spec = QuadratureSpec::simpson(1e-12);
  const Interval x_dom = model.f_A.x_support;
  const Interval k_dom = model.f_A.k_support;

  BivariateVerdict verdict;

  auto marginal_check = [&](const std::string& name, const PhaseSpaceField& f,
                            PhaseAxis axis, const Distribution& target) {
    ConstraintCheck chk{name, true, 0.0, kNaN, kNaN};
    const Grid1D& grid = axis == PhaseAxis::X ? xs : ks;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double v = grid[i];
      const double got =
          axis == PhaseAxis::X
              ? integrate([&](double k) { return f(v, k); }, f.k_support, spec)
              : integrate([&](double x) { return f(x, v); }, f.x_support, spec);
      const double r = std::abs(got - target(v));
      if (r > chk.worst_residual) {
        chk.worst_residual = r;
        (axis == PhaseAxis::X ? chk.at_x : chk.at_k) = v;
      }
    }
    chk.pass = chk.worst_residual <= tol;
    verdict.checks.push_back(chk);
  };
  marginal_check("marginal_A_k", model.f_A, PhaseAxis::K, defaults.phi_A_k);
  marginal_check("marginal_A_x", model.f_A, PhaseAxis::X, defaults.phi_A_x);
  marginal_check("marginal_B_k", model.f_B, PhaseAxis::K, defaults.phi_B_k);
  marginal_check("marginal_B_x", model.f_B, PhaseAxis::X, defaults.phi_B_x);

  const ScanGrids scan = default_scan_grids(c, options.scan_points);
  auto nonneg_check = [&](const std::string& name, const PhaseSpaceField& f) {
    const auto rep = negativity_scan(f, scan.x, scan.k);
    const double worst = std::max(0.0, -rep.min_value);
    verdict.checks.push_back({name, worst <= tol, worst, rep.argmin_x, rep.argmin_k});
  };
  nonneg_check("nonnegative_f_A", model.f_A);
  nonneg_check("nonnegative_f_B", model.f_B);

  auto weight_check = [&](const std::string& name, const PhaseFunction& w) {
    ConstraintCheck chk{name, true, 0.0, kNaN, kNaN};
    for (std::size_t i = 0; i < scan.x.size(); ++i) {
      for (std::size_t j = 0; j < scan.k.size(); ++j) {
        const double v = w(scan.x[i], scan.k[j]);
        const double excess = std::max(-v, v - 1.0);
        if (excess > chk.worst_residual) {
          chk.worst_residual = excess;
          chk.at_x = scan.x[i];
          chk.at_k = scan.k[j];
        }
      }
    }
    chk.pass = chk.worst_residual <= tol;
    verdict.checks.push_back(chk);
  };
  weight_check("weight_range_A", model.w1_A);
  weight_check("weight_range_B", model.w1_B);

  for (Detector d : {Detector::D1, Detector::D2}) {
    const bool first = d == Detector::D1;
    auto hidden = [&](double x, double k) {
      const double wa = first ? model.w1_A(x, k) : 1.0 - model.w1_A(x, k);
      const double wb = first ? model.w1_B(x, k) : 1.0 - model.w1_B(x, k);
      return product_or_zero(0.5 * model.f_A(x, k), wa) +
             product_or_zero(0.25 * u * model.f_B(x, k), wb);
    };
    const std::string tag = first ? "D1" : "D2";
    const auto phi_x = density(c, d, MeasurementBasis::position());
    const auto phi_k = density(c, d, MeasurementBasis::wavenumber());
    ConstraintCheck cx{"reproduce_" + tag + "_x", true, 0.0, kNaN, kNaN};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double got = integrate([&](double k) { return hidden(x, k); }, k_dom, spec);
      const double r = std::abs(got - phi_x(x));
      if (r > cx.worst_residual) {
        cx.worst_residual = r;
        cx.at_x = x;
      }
    }
    cx.pass = cx.worst_residual <= tol;
    verdict.checks.push_back(cx);
    ConstraintCheck ck{"reproduce_" + tag + "_k", true, 0.0, kNaN, kNaN};
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const double k = ks[j];
      const double got = integrate([&](double x) { return hidden(x, k); }, x_dom, spec);
      const double r = std::abs(got - phi_k(k));
      if (r > ck.worst_residual) {
        ck.worst_residual = r;
        ck.at_k = k;
      }
    }
    ck.pass = ck.worst_residual <= tol;
    verdict.checks.push_back(ck);
  }
  return verdict;
}

namespace {

struct SeparableParts {
  SplitWeightFunction wx;
  SplitWeightFunction wk;
  double scale;
};

SeparableParts separable_parts(const ExperimentConfig& c, FactorizedWhich which) {
  const Detector d = which == FactorizedWhich::Solution1 ? Detector::D1 : Detector::D2;
  const double p = click_probability(c, d);
  if (!(p > 0.0)) {
    throw std::domain_error("factorized solution needs Prob(D_i) > 0");
  }
  return {split_weights(c, d, MeasurementBasis::position()),
          split_weights(c, d, MeasurementBasis::wavenumber()), prob_plus(c.phi) / p};
}

}  // namespace

Interval factorized_weight_range(const ExperimentConfig& config, FactorizedWhich which) {
  const ExperimentConfig c = config.validated();
  const auto parts = separable_parts(c, which);
  const Interval rx = weight_range(parts.wx, default_x_grid(c));
  const Interval rk = weight_range(parts.wk, default_k_grid(c));
  // Both factors are non-negative, so the product's extremes are the
  // products of the extremes.
  const double lo = parts.scale * rx.lo * rk.lo;
  const double hi = parts.scale * rx.hi * rk.hi;
  if (which == FactorizedWhich::Solution1) return {lo, hi};
  return {1.0 - hi, 1.0 - lo};
}

FactorizedSolution factorized_solutions(const ExperimentConfig& config,
                                        FactorizedWhich which, double tol,
                                        std::size_t sample_points) {
  const ExperimentConfig c = config.validated();
  const auto parts = separable_parts(c, which);
  const double pp = prob_plus(c.phi);
  const auto plus_x = mixture_before_B2(c, MeasurementBasis::position());
  const auto plus_k = mixture_before_B2(c, MeasurementBasis::wavenumber());
  const auto wx = parts.wx.eval;
  const auto wk = parts.wk.eval;
  const double scale = parts.scale;
  const bool first = which == FactorizedWhich::Solution1;

  FactorizedSolution sol;
  sol.which = which;
  sol.config = c;
  sol.f_plus.label = WignerLabel::Custom;
  sol.f_plus.params = c;
  sol.f_plus.mass = pp;
  sol.f_plus.x_support = default_x_grid(c).interval();
  sol.f_plus.k_support = default_k_grid(c).interval();
  const auto fx = plus_x.eval;
  const auto fk = plus_k.eval;
  sol.f_plus.eval = [fx, fk, pp](double x, double k) { return fx(x) * fk(k) / pp; };
  sol.w1_plus = [=](double x, double k) {
    const double prod = scale * wx(x) * wk(k);
    return first ? prod : 1.0 - prod;
  };

  // w_i(x) = (1/P+) int Phi_+(k) w_i^+(x, k) dk and the k counterpart.
  const QuadratureSpec spec = QuadratureSpec::simpson(1e-12);
  const Grid1D xs = sample_grid(c, PhaseAxis::X, sample_points);
  const Grid1D ks = sample_grid(c, PhaseAxis::K, sample_points);
  double worst = 0.0;
  for (Detector d : {Detector::D1, Detector::D2}) {
    const bool one = d == Detector::D1;
    auto wplus = [&](double x, double k) {
      const double w1 = sol.w1_plus(x, k);
      return one ? w1 : 1.0 - w1;
    };
    const auto target_x = split_weights(c, d, MeasurementBasis::position());
    const auto target_k = split_weights(c, d, MeasurementBasis::wavenumber());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      const double got =
          integrate([&](double k) { return product_or_zero(fk(k), wplus(x, k)); },
                    sol.f_plus.k_support, spec) /
          pp;
      worst = std::max(worst, std::abs(got - target_x(x)));
    }
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const double k = ks[j];
      const double got =
          integrate([&](double x) { return product_or_zero(fx(x), wplus(x, k)); },
                    sol.f_plus.x_support, spec) /
          pp;
      worst = std::max(worst, std::abs(got - target_k(k)));
    }
  }
  sol.integral_residual = worst;
  sol.integral_equations_pass = worst <= tol;
  const Interval r = factorized_weight_range(c, which);
  sol.w_min = r.lo;
  sol.w_max = r.hi;
  sol.weights_admissible = r.lo >= 0.0 && r.hi <= 1.0;
  return sol;
}

std::vector<PhiScanPoint> factorized_phi_scan(const ExperimentConfig& config,
                                              FactorizedWhich which, std::size_t points) {
  std::vector<PhiScanPoint> out;
  out.reserve(points);
  for (std::size_t j = 0; j < points; ++j) {
    ExperimentConfig c = config;
    const double phi = 2.0 * M_PI * (double(j) + 0.5) / double(points);
    c.phi = phi;
    const Interval r = factorized_weight_range(c, which);
    out.push_back({phi, r.lo, r.hi, r.lo >= 0.0 && r.hi <= 1.0});
  }
  return out;
}

double WeightHistogram::total_p() const {
  double s = 0.0;
  for (double v : p) s += v;
  return mode == HistogramMode::Density ? s * bin_width : s;
}

double WeightHistogram::total_q() const {
  double s = 0.0;
  for (double v : q) s += v;
  return s;
}

WeightHistogram weight_histogram(const ExperimentConfig& config, Detector detector,
                                 const MeasurementBasis& basis, int bins,
                                 HistogramMode mode) {
  if (bins < 2) throw std::invalid_argument("weight histogram needs >= 2 bins");
  const ExperimentConfig c = config.validated();
  const auto w = split_weights(c, detector, basis);
  const auto plus = mixture_before_B2(c, basis).eval;
  const auto part = density(c, detector, basis).eval;
  const double dw = 1.0 / bins;

  WeightHistogram h;
  h.basis = basis;
  h.detector = detector;
  h.config = c;
  h.bins = bins;
  h.bin_width = dw;
  h.mode = mode;
  h.p.assign(std::size_t(bins), 0.0);
  h.q.assign(std::size_t(bins), 0.0);
  h.weight_min = std::numeric_limits<double>::infinity();
  h.weight_max = -std::numeric_limits<double>::infinity();

  auto bin_of = [&](double v) {
    int n = int(std::floor(v / dw));
    return std::clamp(n, 0, bins - 1);
  };
  auto deposit = [&](int n, double a, double b) {
    if (!(b > a)) return;
    h.p[std::size_t(n)] += gauss7(plus, a, b);
    h.q[std::size_t(n)] += gauss7(part, a, b);
  };

  const Grid1D fine = default_grid(c, basis, 4097);
  double a = fine[0];
  double wa = w(a);
  for (std::size_t i = 1; i < fine.size(); ++i) {
    const double b = fine[i];
    const double wb = w(b);
    if (std::isnan(wa) || std::isnan(wb)) {
      a = b;
      wa = wb;
      continue;
    }
    h.weight_min = std::min({h.weight_min, wa, wb});
    h.weight_max = std::max({h.weight_max, wa, wb});
    int na = bin_of(wa);
    const int nb = bin_of(wb);
    double left = a;
    // Walk the bin edges crossed inside the cell, locating each by bisection.
    while (na != nb) {
      const int step = nb > na ? 1 : -1;
      const double edge = (step > 0 ? na + 1 : na) * dw;
      double lo = left, hi = b;
      const bool rising = step > 0;
      for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double wm = w(mid);
        if ((wm >= edge) == rising) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      const double cross = 0.5 * (lo + hi);
      deposit(na, left, cross);
      left = cross;
      na += step;
    }
    deposit(nb, left, b);
    a = b;
    wa = wb;
  }
  if (mode == HistogramMode::Density) {
    for (auto& v : h.p) v /= dw;
  }
  return h;
}

HistogramOverlap histogram_overlap(const WeightHistogram& h_x, const WeightHistogram& h_k) {
  if (h_x.bins != h_k.bins || h_x.mode != h_k.mode || h_x.detector != h_k.detector) {
    throw std::invalid_argument("histogram overlap needs identical binning and detector");
  }
  HistogramOverlap o;
  const std::size_t n = std::size_t(h_x.bins);
  o.ovl.resize(n);
  o.remainder_x.resize(n);
  o.remainder_k.resize(n);
  double rx = 0.0, rk = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double px = h_x.p[i];
    const double pk = h_k.p[i];
    o.ovl[i] = (pk + px - std::abs(pk - px)) / 2.0;
    o.remainder_x[i] = px - o.ovl[i];
    o.remainder_k[i] = pk - o.ovl[i];
    rx += o.remainder_x[i];
    rk += o.remainder_k[i];
  }
  const double scale = h_x.mode == HistogramMode::Density ? h_x.bin_width : 1.0;
  o.remainder_mass_x = rx * scale;
  o.remainder_mass_k = rk * scale;
  o.cond_residual = std::abs(h_x.total_q() - h_k.total_q());
  o.cond_pass = o.cond_residual <= 1e-8;
  o.remainder_masses_equal = std::abs(o.remainder_mass_x - o.remainder_mass_k) <= 1e-6;
  return o;
}

}  // namespace weakmzi
