#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "weakmzi/errors.hpp"

namespace weakmzi {

using RealFunction = std::function<double(double)>;

struct Interval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
};

class Grid1D {
 public:
  Grid1D(double min, double max, std::size_t points);

  double min() const { return min_; }
  double max() const { return max_; }
  std::size_t size() const { return points_; }
  double spacing() const { return (max_ - min_) / double(points_ - 1); }
  double operator[](std::size_t i) const;
  Interval interval() const { return {min_, max_}; }
  Eigen::ArrayXd nodes() const;

 private:
  double min_;
  double max_;
  std::size_t points_;
};

enum class QuadratureMethod { AdaptiveSimpson, GaussHermite };

struct QuadratureSpec {
  QuadratureMethod method = QuadratureMethod::AdaptiveSimpson;
  double abs_tol = 1e-10;
  // Adaptive Simpson: maximum bisection depth below the initial panels.
  int max_subdivisions = 48;
  // Gauss-Hermite: number of nodes.
  int node_count = 128;

  static QuadratureSpec simpson(double tol) {
    QuadratureSpec s;
    s.abs_tol = tol;
    return s;
  }
  static QuadratureSpec hermite(int nodes = 128) {
    QuadratureSpec s;
    s.method = QuadratureMethod::GaussHermite;
    s.node_count = nodes;
    return s;
  }
};

double integrate(const RealFunction& f, Interval domain,
                 const QuadratureSpec& spec = {});

// Integral over the real line. center/scale describe where the integrand's
// mass sits; Gauss-Hermite uses them to place nodes, Simpson to map the line
// onto (-1, 1).
double integrate_whole_line(const RealFunction& f,
                            const QuadratureSpec& spec = {},
                            double center = 0.0, double scale = 1.0);

struct GaussHermiteRule {
  Eigen::ArrayXd nodes;
  // Weights for the weight function exp(-t^2).
  Eigen::ArrayXd weights;
  // log(weights) + t^2, so that sum exp(log_scaled) f(t) approximates the
  // plain integral of f.
  Eigen::ArrayXd log_scaled_weights;
};

const GaussHermiteRule& gauss_hermite_rule(int n);

double find_root(const RealFunction& f, Interval bracket, double tol);

class RngStream {
 public:
  static constexpr std::string_view kAlgorithm =
      "mt19937_64 seeded by seed_seq{seed_lo,seed_hi,stream_lo,stream_hi}; "
      "uniform = (u >> 11) * 2^-53";

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

// Tabulated inverse-CDF sampler. The cumulative table is built once on the
// grid; draws interpolate linearly inside a cell.
class InverseCdfSampler {
 public:
  InverseCdfSampler(const RealFunction& density, const Grid1D& grid,
                    double declared_mass);

  double draw(RngStream& rng) const;
  double grid_mass() const { return cdf_.back(); }
  // Tabulated CDF, normalized to 1 at the right grid edge.
  double cdf(double v) const;

 private:
  std::vector<double> nodes_;
  std::vector<double> cdf_;
};

}  // namespace weakmzi
