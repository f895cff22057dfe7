#include "weakmzi/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace weakmzi {

namespace {

Interval field_x_support(const ExperimentConfig& c) {
  return {std::min(0.0, c.g) - 10.0 * c.sigma, std::max(0.0, c.g) + 10.0 * c.sigma};
}

Interval field_k_support(const ExperimentConfig& c) {
  return {-5.0 / c.sigma, 5.0 / c.sigma};
}

}  // namespace

std::string_view to_string(WignerLabel label) {
  switch (label) {
    case WignerLabel::WA:
      return "W_A";
    case WignerLabel::WB:
      return "W_B";
    case WignerLabel::WPlus:
      return "W_plus";
    case WignerLabel::W1:
      return "W_1";
    case WignerLabel::W2:
      return "W_2";
    case WignerLabel::Custom:
      return "custom";
  }
  return "?";
}

WignerLabel parse_wigner_label(std::string_view text) {
  std::string t;
  for (char ch : text) {
    if (ch != '_') t.push_back(char(std::toupper(static_cast<unsigned char>(ch))));
  }
  if (t == "WA") return WignerLabel::WA;
  if (t == "WB") return WignerLabel::WB;
  if (t == "WPLUS" || t == "W+") return WignerLabel::WPlus;
  if (t == "W1") return WignerLabel::W1;
  if (t == "W2") return WignerLabel::W2;
  throw std::invalid_argument("unknown Wigner function '" + std::string(text) + "'");
}

PhaseSpaceField wigner_closed_form(WignerLabel label, const ExperimentConfig& config) {
  const ExperimentConfig c = config.validated();
  const double s2 = c.sigma * c.sigma;
  const double g = c.g;
  const double phi = c.phi;
  const double u = 1.0 - std::cos(phi);

  PhaseSpaceField f;
  f.label = label;
  f.params = c;
  f.x_support = field_x_support(c);
  f.k_support = field_k_support(c);

  auto wa = [=](double x, double k) {
    const double d = x - g;
    return std::exp(-d * d / (2.0 * s2) - 2.0 * k * k * s2) / M_PI;
  };
  auto wb = [=](double x, double k) {
    return std::exp(-x * x / (2.0 * s2) - 2.0 * k * k * s2) / M_PI;
  };
  auto w_pm = [=](double sign) {
    return [=](double x, double k) {
      const double env = std::exp(-2.0 * k * k * s2);
      const double d = x - g;
      const double m = 2.0 * x - g;
      const double diag =
          env * (std::exp(-x * x / (2.0 * s2)) * u + 2.0 * std::exp(-d * d / (2.0 * s2))) /
          (8.0 * M_PI);
      const double inter = env * std::exp(-m * m / (8.0 * s2)) *
                           (std::cos(g * k) - std::cos(g * k + phi)) / (4.0 * M_PI);
      return diag + sign * inter;
    };
  };

  switch (label) {
    case WignerLabel::WA:
      f.eval = wa;
      f.mass = 1.0;
      break;
    case WignerLabel::WB:
      f.eval = wb;
      f.mass = 1.0;
      break;
    case WignerLabel::WPlus:
      f.eval = [=](double x, double k) { return 0.5 * wa(x, k) + 0.25 * u * wb(x, k); };
      f.mass = (3.0 - std::cos(phi)) / 4.0;
      break;
    case WignerLabel::W1:
      f.eval = w_pm(1.0);
      f.mass = click_probability(c, Detector::D1);
      break;
    case WignerLabel::W2:
      f.eval = w_pm(-1.0);
      f.mass = click_probability(c, Detector::D2);
      break;
    case WignerLabel::Custom:
      throw std::invalid_argument("no closed form for a custom field");
  }
  return f;
}

PhaseSpaceField wigner_from_wavefunction(const MeterWavefunction& wavefunction,
                                         const Grid1D& grid_x, const Grid1D& grid_k) {
  if (wavefunction.basis != BasisKind::Position) {
    throw std::invalid_argument("Wigner transform needs a position wavefunction");
  }
  const Interval s = wavefunction.support;
  const auto psi = wavefunction.eval;
  PhaseSpaceField f;
  f.label = WignerLabel::Custom;
  f.x_support = grid_x.interval();
  f.k_support = grid_k.interval();
  f.eval = [s, psi](double x, double k) {
    const double zlo = std::max(s.lo - x, x - s.hi);
    const double zhi = std::min(s.hi - x, x - s.lo);
    if (!(zlo < zhi)) return 0.0;
    auto integrand = [&](double z) {
      const Complex v = std::conj(psi(x + z)) * psi(x - z) * std::polar(1.0, 2.0 * k * z);
      return v.real();
    };
    return integrate(integrand, {zlo, zhi}, QuadratureSpec::simpson(1e-13)) / M_PI;
  };
  f.mass = integrate([psi](double x) { return std::norm(psi(x)); }, s,
                     QuadratureSpec::simpson(1e-13));
  return f;
}

Distribution marginal(const PhaseSpaceField& field, PhaseAxis axis) {
  Distribution d;
  d.mass = field.mass;
  d.normalized = false;
  const auto w = field.eval;
  const QuadratureSpec spec = QuadratureSpec::simpson(1e-13);
  if (axis == PhaseAxis::X) {
    const Interval ks = field.k_support;
    d.basis = MeasurementBasis::position();
    d.support = field.x_support;
    d.eval = [w, ks, spec](double x) {
      return integrate([&](double k) { return w(x, k); }, ks, spec);
    };
  } else {
    const Interval xs = field.x_support;
    d.basis = MeasurementBasis::wavenumber();
    d.support = field.k_support;
    d.eval = [w, xs, spec](double k) {
      return integrate([&](double x) { return w(x, k); }, xs, spec);
    };
  }
  return d;
}

Distribution radon_tomogram(const PhaseSpaceField& field, QuadratureAxis axis,
                            const Grid1D& eta_grid) {
  const double a = axis.a;
  const double b = axis.b;
  const double r = std::hypot(a, b);
  if (!(r > 0.0)) throw std::invalid_argument("Radon axis (0, 0)");
  const Interval xs = field.x_support;
  const Interval ks = field.k_support;
  const auto w = field.eval;

  Distribution d;
  d.basis = (b == 0.0 && a == 1.0)   ? MeasurementBasis::position()
            : (a == 0.0 && b == 1.0) ? MeasurementBasis::wavenumber()
                                     : MeasurementBasis::quadrature(a, b);
  d.mass = field.mass;
  d.normalized = false;
  d.support = eta_grid.interval();
  d.eval = [=](double eta) {
    // Foot of the line and unit direction along it.
    const double x0 = eta * a / (r * r);
    const double k0 = eta * b / (r * r);
    const double dx = -b / r;
    const double dk = a / r;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    auto clip = [&](double p0, double dp, Interval box) {
      if (dp == 0.0) {
        if (!box.contains(p0)) {
          lo = 1.0;
          hi = 0.0;
        }
        return;
      }
      double t1 = (box.lo - p0) / dp;
      double t2 = (box.hi - p0) / dp;
      if (t1 > t2) std::swap(t1, t2);
      lo = std::max(lo, t1);
      hi = std::min(hi, t2);
    };
    clip(x0, dx, xs);
    clip(k0, dk, ks);
    if (!(lo < hi)) return 0.0;
    auto along = [&](double s) { return w(x0 + s * dx, k0 + s * dk); };
    return integrate(along, {lo, hi}, QuadratureSpec::simpson(1e-13)) / r;
  };
  return d;
}

double field_mass(const PhaseSpaceField& field, double abs_tol) {
  const auto w = field.eval;
  const Interval ks = field.k_support;
  const double inner_tol = abs_tol / (4.0 * std::max(1.0, field.x_support.width()));
  return integrate(
      [&](double x) {
        return integrate([&](double k) { return w(x, k); }, ks,
                         QuadratureSpec::simpson(inner_tol));
      },
      field.x_support, QuadratureSpec::simpson(abs_tol));
}

NegativityReport negativity_scan(const PhaseSpaceField& field, const Grid1D& grid_x,
                                 const Grid1D& grid_k) {
  double min_value = std::numeric_limits<double>::infinity();
  double ax = grid_x[0];
  double ak = grid_k[0];
  double neg = 0.0;
  for (std::size_t i = 0; i < grid_x.size(); ++i) {
    const double x = grid_x[i];
    for (std::size_t j = 0; j < grid_k.size(); ++j) {
      const double k = grid_k[j];
      const double v = field(x, k);
      if (v < min_value) {
        min_value = v;
        ax = x;
        ak = k;
      }
      if (v < 0.0) neg -= v;
    }
  }
  return {min_value, ax, ak, neg * grid_x.spacing() * grid_k.spacing(), grid_x, grid_k};
}

ScanGrids default_scan_grids(const ExperimentConfig& config, std::size_t points) {
  const ExperimentConfig c = config.validated();
  return {Grid1D(std::min(0.0, c.g) - 6.0 * c.sigma, std::max(0.0, c.g) + 6.0 * c.sigma,
                 points),
          Grid1D(-3.0 / c.sigma, 3.0 / c.sigma, points)};
}

}  // namespace weakmzi
