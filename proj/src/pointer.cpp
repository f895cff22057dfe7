#include "weakmzi/pointer.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace weakmzi {

namespace {

constexpr Complex kI{0.0, 1.0};

double gaussian(double v, double mean, double sd) {
  const double z = (v - mean) / sd;
  return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * M_PI) * sd);
}

double eta_sd(const ExperimentConfig& c, QuadratureAxis ax) {
  const double s2 = c.sigma * c.sigma;
  return std::sqrt(ax.b * ax.b + 4.0 * ax.a * ax.a * s2 * s2) / (2.0 * c.sigma);
}

// Quadrature axes along a coordinate are served by the x and k forms.
MeasurementBasis canonical(const MeasurementBasis& basis) {
  if (basis.kind != BasisKind::Quadrature) return basis;
  if (basis.axis.b == 0.0) return MeasurementBasis::position();
  if (basis.axis.a == 0.0) return MeasurementBasis::wavenumber();
  return basis;
}

// Divides out the Jacobian of eta = a x (or b k) when rerouted.
double axis_scale(const MeasurementBasis& basis) {
  if (basis.kind != BasisKind::Quadrature) return 1.0;
  if (basis.axis.b == 0.0) return basis.axis.a;
  if (basis.axis.a == 0.0) return basis.axis.b;
  return 1.0;
}

Interval amplitude_support_x(const ExperimentConfig& c) {
  return {-12.0 * c.sigma + std::min(0.0, c.g), 12.0 * c.sigma + std::max(0.0, c.g)};
}

}  // namespace

MeterWavefunction initial_meter(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  const double norm = std::pow(2.0 * M_PI * sigma * sigma, -0.25);
  MeterWavefunction m;
  m.basis = BasisKind::Position;
  m.eval = [norm, sigma](double x) {
    return Complex(norm * std::exp(-x * x / (4.0 * sigma * sigma)), 0.0);
  };
  m.support = {-12.0 * sigma, 12.0 * sigma};
  return m;
}

MeterWavefunction final_meter_x(const ExperimentConfig& config, Detector detector) {
  const ExperimentConfig c = config.validated();
  const auto h = history_amplitudes(detector, c.phi);
  const Complex rest = h.psi2 + h.psi3;
  const Complex shifted = h.psi1;
  const double norm = std::pow(2.0 * M_PI * c.sigma * c.sigma, -0.25);
  const double q = 1.0 / (4.0 * c.sigma * c.sigma);
  const double g = c.g;
  MeterWavefunction m;
  m.basis = BasisKind::Position;
  m.eval = [=](double x) {
    const double u = x - g;
    return norm * (rest * std::exp(-q * x * x) + shifted * std::exp(-q * u * u));
  };
  m.postselection_amplitude = h.total();
  m.support = amplitude_support_x(c);
  return m;
}

MeterWavefunction final_meter_k(const ExperimentConfig& config, Detector detector) {
  const ExperimentConfig c = config.validated();
  const auto h = history_amplitudes(detector, c.phi);
  const Complex rest = h.psi2 + h.psi3;
  const Complex shifted = h.psi1;
  const double s = c.sigma;
  const double norm = std::pow(2.0 * s * s / M_PI, 0.25);
  const double g = c.g;
  MeterWavefunction m;
  m.basis = BasisKind::Wavenumber;
  m.eval = [=](double k) {
    return norm * std::exp(-k * k * s * s) *
           (rest + shifted * std::polar(1.0, -g * k));
  };
  m.postselection_amplitude = h.total();
  m.support = {-6.0 / s, 6.0 / s};
  return m;
}

double click_probability(const ExperimentConfig& config, Detector detector) {
  const ExperimentConfig c = config.validated();
  const double cs = std::cos(c.phi);
  const double e = std::exp(-c.g * c.g / (8.0 * c.sigma * c.sigma));
  switch (detector) {
    case Detector::D1:
      return (3.0 - cs + 2.0 * e * (1.0 - cs)) / 8.0;
    case Detector::D2:
      return (3.0 - cs - 2.0 * e * (1.0 - cs)) / 8.0;
    case Detector::D3:
      return (1.0 + cs) / 4.0;
  }
  return 0.0;
}

Grid1D default_grid(const ExperimentConfig& config, const MeasurementBasis& basis,
                    std::size_t points) {
  const ExperimentConfig c = config.validated();
  const QuadratureAxis ax = basis.axis;
  const double sd = eta_sd(c, ax);
  const double shift = ax.a * c.g;
  return Grid1D(std::min(0.0, shift) - 8.0 * sd, std::max(0.0, shift) + 8.0 * sd,
                points);
}

Distribution reference_gaussian(const ExperimentConfig& config, bool shifted,
                                const MeasurementBasis& basis) {
  const ExperimentConfig c = config.validated();
  const double mean = shifted ? basis.axis.a * c.g : 0.0;
  const double sd = eta_sd(c, basis.axis);
  Distribution d;
  d.basis = basis;
  d.eval = [mean, sd](double v) { return gaussian(v, mean, sd); };
  d.mass = 1.0;
  d.normalized = true;
  d.support = default_grid(c, basis).interval();
  return d;
}

Distribution density(const ExperimentConfig& config, Detector detector,
                     const MeasurementBasis& basis) {
  const ExperimentConfig c = config.validated();
  Distribution d;
  d.basis = basis;
  d.mass = click_probability(c, detector);
  d.normalized = false;
  d.support = default_grid(c, basis).interval();

  const double cs = std::cos(c.phi);
  const double u = 1.0 - cs;
  const double sigma = c.sigma;
  const double g = c.g;
  const double phi = c.phi;

  if (detector == Detector::D3) {
    const double p3 = d.mass;
    const Distribution b = reference_gaussian(c, false, basis);
    auto f = b.eval;
    d.eval = [p3, f](double v) { return p3 * f(v); };
    return d;
  }

  const double sign = detector == Detector::D1 ? 1.0 : -1.0;
  const MeasurementBasis route = canonical(basis);
  const double scale = axis_scale(basis);
  const double jac = 1.0 / std::abs(scale);

  switch (route.kind) {
    case BasisKind::Position: {
      const double e = std::exp(-g * g / (8.0 * sigma * sigma));
      d.eval = [=](double eta) {
        const double x = eta / scale;
        return jac * (0.25 * gaussian(x, g, sigma) + 0.125 * u * gaussian(x, 0.0, sigma) +
                      sign * 0.25 * u * e * gaussian(x, 0.5 * g, sigma));
      };
      break;
    }
    case BasisKind::Wavenumber: {
      const double pre = 0.125 * sigma * std::sqrt(2.0 / M_PI);
      d.eval = [=](double eta) {
        const double k = eta / scale;
        const double inter = std::cos(g * k) - std::cos(phi + g * k);
        return jac * pre * std::exp(-2.0 * k * k * sigma * sigma) *
               (3.0 - cs + 2.0 * sign * inter);
      };
      break;
    }
    case BasisKind::Quadrature: {
      const double a = basis.axis.a;
      const double b = basis.axis.b;
      const double s2 = sigma * sigma;
      const double D = b * b + 4.0 * a * a * s2 * s2;
      const double ag = a * g;
      const double pre = sigma / (4.0 * std::sqrt(2.0 * M_PI * D));
      const double pre_int = sigma / std::sqrt(8.0 * M_PI * D);
      d.eval = [=](double eta) {
        const double da = eta - ag;
        const double diag = 2.0 * std::exp(-2.0 * da * da * s2 / D) +
                            std::exp(-2.0 * eta * eta * s2 / D) * u;
        const double theta = b * g * (2.0 * eta - ag) / (2.0 * D);
        const double inter = std::exp(-(eta * eta + da * da) * s2 / D) *
                             (std::cos(theta) - std::cos(theta + phi));
        return pre * diag + sign * pre_int * inter;
      };
      break;
    }
  }
  return d;
}

Eigen::VectorXcd operator_exponential_oracle(const ExperimentConfig& config,
                                             Detector detector,
                                             const Grid1D& grid) {
  const ExperimentConfig c = config.validated();
  const Interval wide = amplitude_support_x(c);
  const double h_target = c.sigma / 4.0;
  std::size_t n = 64;
  while (double(n) * h_target < wide.width()) n *= 2;
  const double h = wide.width() / double(n);
  const double x0 = wide.lo;

  const MeterWavefunction phi0 = initial_meter(c.sigma);
  std::vector<Complex> samples(n), spectrum(n), shifted_spectrum(n);
  for (std::size_t j = 0; j < n; ++j) samples[j] = phi0(x0 + double(j) * h);

  Eigen::FFT<double> fft;
  fft.fwd(spectrum, samples);

  // Diagonal generator -i g k; exp by scaling and squaring of a Taylor sum.
  const double dk = 2.0 * M_PI / (double(n) * h);
  for (std::size_t m = 0; m < n; ++m) {
    const double k = (m < n / 2 ? double(m) : double(m) - double(n)) * dk;
    const Complex z = -kI * c.g * k;
    int squarings = 0;
    Complex zs = z;
    while (std::abs(zs) > 0.5) {
      zs *= 0.5;
      ++squarings;
    }
    Complex term = 1.0;
    Complex sum = 1.0;
    int order = 0;
    while (std::abs(term) > 1e-18) {
      ++order;
      if (order > 64) {
        throw std::runtime_error("operator exponential: series needs > 64 terms");
      }
      term *= zs / double(order);
      sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum *= sum;
    shifted_spectrum[m] = spectrum[m] * sum;
  }

  // Trigonometric interpolation of the translated meter onto the grid.
  const Complex h1 = network::history_amplitude(detector, 0, c.phi);
  const Complex rest = network::history_amplitude(detector, 1, c.phi) +
                       network::history_amplitude(detector, 2, c.phi);
  Eigen::VectorXcd out(Eigen::Index(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    const double t = x - x0;
    Complex acc = 0.0;
    const Complex step = std::polar(1.0, dk * t);
    Complex rot = 1.0;
    for (std::size_t m = 0; m < n / 2; ++m) {
      acc += shifted_spectrum[m] * rot;
      rot *= step;
    }
    rot = std::polar(1.0, -dk * t * double(n / 2));
    for (std::size_t m = n / 2; m < n; ++m) {
      acc += shifted_spectrum[m] * rot;
      rot *= step;
    }
    const Complex translated = acc / double(n);
    out[Eigen::Index(i)] = h1 * translated + rest * phi0(x);
  }
  return out;
}

Eigen::VectorXcd discrete_fourier_transform(const MeterWavefunction& wavefunction,
                                            const Grid1D& x_grid,
                                            const Grid1D& k_grid) {
  const std::size_t nx = x_grid.size();
  const double h = x_grid.spacing();
  std::vector<Complex> f(nx);
  for (std::size_t j = 0; j < nx; ++j) {
    f[j] = wavefunction(x_grid[j]) * ((j == 0 || j + 1 == nx) ? 0.5 : 1.0);
  }
  Eigen::VectorXcd out(Eigen::Index(k_grid.size()));
  const double pre = h / std::sqrt(2.0 * M_PI);
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const double k = k_grid[i];
    const Complex step = std::polar(1.0, -k * h);
    Complex rot = std::polar(1.0, -k * x_grid.min());
    Complex acc = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
      acc += f[j] * rot;
      rot *= step;
    }
    out[Eigen::Index(i)] = pre * acc;
  }
  return out;
}

}  // namespace weakmzi
