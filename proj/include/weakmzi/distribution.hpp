#pragma once

#include <string>

#include "weakmzi/numerics.hpp"

namespace weakmzi {

enum class BasisKind { Position, Wavenumber, Quadrature };

// eta = a*x + b*k
struct QuadratureAxis {
  double a = 1.0;
  double b = 0.0;
};

struct MeasurementBasis {
  BasisKind kind = BasisKind::Position;
  QuadratureAxis axis{1.0, 0.0};

  static MeasurementBasis position() { return {BasisKind::Position, {1.0, 0.0}}; }
  static MeasurementBasis wavenumber() {
    return {BasisKind::Wavenumber, {0.0, 1.0}};
  }
  static MeasurementBasis quadrature(double a, double b);

  std::string label() const;
  bool operator==(const MeasurementBasis& o) const {
    return kind == o.kind && axis.a == o.axis.a && axis.b == o.axis.b;
  }
};

// Parses "x", "k" or "eta(a,b)".
MeasurementBasis parse_basis(const std::string& text);

struct Distribution {
  MeasurementBasis basis;
  RealFunction eval;
  double mass = 1.0;
  bool normalized = false;
  Interval support{0.0, 0.0};

  double operator()(double v) const { return eval(v); }
  Distribution normalized_copy() const;
};

double sample_inverse_cdf(const Distribution& density, const Grid1D& grid,
                          RngStream& rng);

}  // namespace weakmzi
