#include "weakmzi/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <regex>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "weakmzi/distribution.hpp"

namespace weakmzi {

Grid1D::Grid1D(double min, double max, std::size_t points)
    : min_(min), max_(max), points_(points) {
  if (!(min < max)) throw std::invalid_argument("Grid1D: min must be < max");
  if (points < 2) throw std::invalid_argument("Grid1D: need at least 2 points");
}

double Grid1D::operator[](std::size_t i) const {
  if (i + 1 == points_) return max_;
  return min_ + double(i) * spacing();
}

Eigen::ArrayXd Grid1D::nodes() const {
  Eigen::ArrayXd out(points_);
  for (std::size_t i = 0; i < points_; ++i) out[Eigen::Index(i)] = (*this)[i];
  return out;
}

namespace {

struct SimpsonState {
  const RealFunction& f;
  int max_depth;
  bool exhausted = false;
};

double simpson_step(SimpsonState& st, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = st.f(lm);
  const double frm = st.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol || lm <= a || rm >= b) {
    return left + right + delta / 15.0;
  }
  if (depth >= st.max_depth) {
    st.exhausted = true;
    return left + right + delta / 15.0;
  }
  return simpson_step(st, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth + 1) +
         simpson_step(st, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth + 1);
}

double adaptive_simpson(const RealFunction& f, double a, double b, double tol,
                        int max_depth, int panels) {
  SimpsonState st{f, max_depth};
  const double h = (b - a) / panels;
  double total = 0.0;
  double fa = f(a);
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    const double hi = p + 1 == panels ? b : a + (p + 1) * h;
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    const double fb = f(hi);
    const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
    total += simpson_step(st, lo, fa, hi, fb, mid, fm, whole, tol / panels, 0);
    fa = fb;
  }
  if (st.exhausted || !std::isfinite(total)) {
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "adaptive Simpson did not converge on [%g, %g]", a, b);
    throw QuadratureError(buf, total);
  }
  return total;
}

double hermite_sum(const RealFunction& f, int n, double center, double scale) {
  const auto& rule = gauss_hermite_rule(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    total += std::exp(rule.log_scaled_weights[i]) *
             f(center + scale * rule.nodes[i]);
  }
  return scale * total;
}

GaussHermiteRule build_hermite_rule(int n) {
  // Golub-Welsch for starting nodes, then Newton on the orthonormal
  // Hermite recurrence; weights from 1 / (n h_{n-1}(t)^2).
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    jacobi(i, i - 1) = jacobi(i - 1, i) = std::sqrt(0.5 * i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi,
                                                        Eigen::EigenvaluesOnly);
  Eigen::ArrayXd t = solver.eigenvalues().array();

  auto recurrence = [n](double x, double& hn, double& hn1) {
    double prev = 0.0;
    double cur = std::pow(M_PI, -0.25);
    for (int k = 0; k < n; ++k) {
      const double next =
          std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
      prev = cur;
      cur = next;
    }
    hn = cur;
    hn1 = prev;
  };

  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.log_scaled_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = t[i];
    double hn = 0.0, hn1 = 0.0;
    for (int it = 0; it < 8; ++it) {
      recurrence(x, hn, hn1);
      const double step = hn / (std::sqrt(2.0 * n) * hn1);
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    recurrence(x, hn, hn1);
    const double log_w = -std::log(double(n)) - 2.0 * std::log(std::abs(hn1));
    rule.nodes[i] = x;
    rule.weights[i] = std::exp(log_w);
    rule.log_scaled_weights[i] = log_w + x * x;
  }
  return rule;
}

}  // namespace

const GaussHermiteRule& gauss_hermite_rule(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Hermite: node_count < 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussHermiteRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussHermiteRule>(build_hermite_rule(n));
  return *slot;
}

double integrate(const RealFunction& f, Interval domain,
                 const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0)) throw std::invalid_argument("abs_tol must be > 0");
  if (domain.lo == domain.hi) return 0.0;
  if (domain.lo > domain.hi) return -integrate(f, {domain.hi, domain.lo}, spec);
  if (spec.method == QuadratureMethod::GaussHermite) {
    const double c = 0.5 * (domain.lo + domain.hi);
    const double s = 0.125 * domain.width();
    return hermite_sum(
        [&](double x) { return domain.contains(x) ? f(x) : 0.0; },
        spec.node_count, c, s);
  }
  return adaptive_simpson(f, domain.lo, domain.hi, spec.abs_tol,
                          spec.max_subdivisions, 8);
}

double integrate_whole_line(const RealFunction& f, const QuadratureSpec& spec,
                            double center, double scale) {
  if (!(spec.abs_tol > 0)) throw std::invalid_argument("abs_tol must be > 0");
  if (!(scale > 0)) throw std::invalid_argument("scale must be > 0");
  if (spec.method == QuadratureMethod::GaussHermite) {
    return hermite_sum(f, spec.node_count, center, scale);
  }
  auto mapped = [&](double t) {
    const double d = 1.0 - t * t;
    if (d <= 0.0) return 0.0;
    const double x = center + scale * t / d;
    if (!std::isfinite(x)) return 0.0;
    const double v = f(x) * scale * (1.0 + t * t) / (d * d);
    return std::isfinite(v) ? v : 0.0;
  };
  return adaptive_simpson(mapped, -1.0, 1.0, spec.abs_tol,
                          spec.max_subdivisions, 32);
}

double find_root(const RealFunction& f, Interval bracket, double tol) {
  if (!(tol > 0)) throw std::invalid_argument("find_root: tol must be > 0");
  const double flo = f(bracket.lo);
  const double fhi = f(bracket.hi);
  if (flo == 0.0) return bracket.lo;
  if (fhi == 0.0) return bracket.hi;
  if (!(flo * fhi < 0.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "find_root: no sign change on [%g, %g] (f = %g, %g)",
                  bracket.lo, bracket.hi, flo, fhi);
    throw BracketError(buf);
  }
  std::uintmax_t max_iter = 200;
  auto done = [tol](double a, double b) { return std::abs(b - a) <= tol; };
  auto r = boost::math::tools::toms748_solve(f, bracket.lo, bracket.hi, flo,
                                             fhi, done, max_iter);
  return 0.5 * (r.first + r.second);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32),
                    std::uint32_t(stream_id), std::uint32_t(stream_id >> 32)};
  engine_.seed(seq);
}

InverseCdfSampler::InverseCdfSampler(const RealFunction& density,
                                     const Grid1D& grid, double declared_mass) {
  const std::size_t n = grid.size();
  nodes_.resize(n);
  cdf_.resize(n);
  nodes_[0] = grid[0];
  cdf_[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    nodes_[i] = grid[i];
    const double cell = boost::math::quadrature::gauss<double, 7>::integrate(
        density, nodes_[i - 1], nodes_[i]);
    if (cell < 0.0 || !std::isfinite(cell)) {
      throw std::invalid_argument("inverse-CDF sampler: density must be >= 0");
    }
    cdf_[i] = cdf_[i - 1] + cell;
  }
  const double total = cdf_.back();
  if (!(total > 0.0) || total < (1.0 - 1e-6) * declared_mass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "grid [%g, %g] holds mass %.12g of declared %.12g",
                  grid.min(), grid.max(), total, declared_mass);
    throw DomainCoverageError(buf);
  }
  for (auto& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

double InverseCdfSampler::draw(RngStream& rng) const {
  const double u = rng.uniform();
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  std::size_t i = std::size_t(it - cdf_.begin());
  if (i == 0) i = 1;
  if (i >= cdf_.size()) i = cdf_.size() - 1;
  const double c0 = cdf_[i - 1];
  const double c1 = cdf_[i];
  const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.5;
  return nodes_[i - 1] + frac * (nodes_[i] - nodes_[i - 1]);
}

double InverseCdfSampler::cdf(double v) const {
  if (v <= nodes_.front()) return 0.0;
  if (v >= nodes_.back()) return 1.0;
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), v);
  const std::size_t i = std::size_t(it - nodes_.begin());
  const double frac = (v - nodes_[i - 1]) / (nodes_[i] - nodes_[i - 1]);
  return cdf_[i - 1] + frac * (cdf_[i] - cdf_[i - 1]);
}

MeasurementBasis MeasurementBasis::quadrature(double a, double b) {
  if (a == 0.0 && b == 0.0) {
    throw std::invalid_argument("quadrature axis (0, 0) is not a basis");
  }
  return {BasisKind::Quadrature, {a, b}};
}

std::string MeasurementBasis::label() const {
  switch (kind) {
    case BasisKind::Position:
      return "x";
    case BasisKind::Wavenumber:
      return "k";
    case BasisKind::Quadrature: {
      char a[32], b[32];
      *std::to_chars(a, a + sizeof a - 1, axis.a).ptr = '\0';
      *std::to_chars(b, b + sizeof b - 1, axis.b).ptr = '\0';
      return std::string("eta(") + a + "," + b + ")";
    }
  }
  return "?";
}

MeasurementBasis parse_basis(const std::string& text) {
  if (text == "x") return MeasurementBasis::position();
  if (text == "k") return MeasurementBasis::wavenumber();
  static const std::regex eta(
      R"(\s*eta\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s*)");
  std::smatch m;
  if (std::regex_match(text, m, eta)) {
    return MeasurementBasis::quadrature(std::stod(m[1]), std::stod(m[2]));
  }
  throw std::invalid_argument("unknown basis '" + text +
                              "' (expected x, k or eta(a,b))");
}

Distribution Distribution::normalized_copy() const {
  if (!(mass > 0.0)) {
    throw std::domain_error("cannot normalize a distribution with zero mass");
  }
  Distribution out = *this;
  const double m = mass;
  auto f = eval;
  out.eval = [f, m](double v) { return f(v) / m; };
  out.mass = 1.0;
  out.normalized = true;
  return out;
}

double sample_inverse_cdf(const Distribution& density, const Grid1D& grid,
                          RngStream& rng) {
  return InverseCdfSampler(density.eval, grid, density.mass).draw(rng);
}

}  // namespace weakmzi
