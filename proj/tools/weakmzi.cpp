#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "weakmzi/envelope.hpp"
#include "weakmzi/errors.hpp"
#include "weakmzi/interferometer.hpp"
#include "weakmzi/lhv.hpp"
#include "weakmzi/phasespace.hpp"
#include "weakmzi/pointer.hpp"
#include "weakmzi/simulate.hpp"

using namespace weakmzi;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitStatFail = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  double phi = M_PI / 2.0;
  std::optional<double> phi_degrees;
  double g = 1.0;
  double sigma = 1.0;
  double arm_length = 1.0;
  double speed = 1.0;
  std::string format = "csv";
  std::string output;
  CLI::Option* phi_opt = nullptr;
  CLI::Option* g_opt = nullptr;

  ExperimentConfig config() const {
    ExperimentConfig c;
    c.phi = phi_degrees ? *phi_degrees * M_PI / 180.0 : phi;
    c.g = g;
    c.sigma = sigma;
    c.arm_length = arm_length;
    c.particle_speed = speed;
    return c.validated();
  }
  OutputFormat fmt() const { return parse_format(format); }
};

void add_common(CLI::App* app, Common& c) {
  c.phi_opt = app->add_option("--phi", c.phi, "Bob's phase in radians")->capture_default_str();
  app->add_option("--phi-degrees", c.phi_degrees, "Bob's phase in degrees")
      ->excludes(c.phi_opt);
  c.g_opt = app->add_option("--g", c.g, "meter coupling")->capture_default_str();
  app->add_option("--sigma", c.sigma, "meter width")->capture_default_str();
  app->add_option("--arm-length", c.arm_length, "arm length L")->capture_default_str();
  app->add_option("--speed", c.speed, "particle speed in units of c")->capture_default_str();
  app->add_option("--format", c.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app->add_option("--output", c.output, "output path (default stdout)");
}

void write(const OutputEnvelope& e, const Common& c) {
  const std::string text = emit(e);
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw UsageError("cannot open " + c.output);
  out << text;
}

void grid_meta(OutputEnvelope& e, const std::string& prefix, const Grid1D& g) {
  e.set_meta(prefix + "_min", g.min());
  e.set_meta(prefix + "_max", g.max());
  e.set_meta(prefix + "_points", std::to_string(g.size()));
}

std::vector<Detector> detectors_of(const std::string& text) {
  if (text == "all") return {kDetectors.begin(), kDetectors.end()};
  return {parse_detector(text)};
}

// ---- weakvalue

struct WeakValueArgs {
  Common common;
  std::string sweep;
  std::string detector = "D1";
};

int cmd_weakvalue(const WeakValueArgs& a) {
  ExperimentConfig c = a.common.config();
  std::vector<double> phis;
  bool sweeping = !a.sweep.empty();
  if (sweeping) {
    double lo, hi;
    long n;
    char c1, c2, tail;
    if (std::sscanf(a.sweep.c_str(), "%lf%c%lf%c%ld%c", &lo, &c1, &hi, &c2, &n, &tail) != 5 ||
        c1 != ':' || c2 != ':' || n < 1) {
      throw UsageError("--sweep-phi expects a:b:n with n >= 1");
    }
    for (long j = 0; j < n; ++j) {
      phis.push_back(n == 1 ? lo : lo + (hi - lo) * double(j) / double(n - 1));
    }
  } else {
    phis.push_back(c.phi);
  }
  auto e = make_envelope("weakvalue", c, a.common.fmt());
  if (sweeping) e.set_meta("sweep_phi", a.sweep);
  e.add_column("phi", ColumnType::Real);
  e.add_column("detector", ColumnType::Text);
  e.add_column("re", ColumnType::Real);
  e.add_column("im", ColumnType::Real);
  e.add_column("modulus_squared", ColumnType::Real);
  e.add_column("bare_probability", ColumnType::Real);
  for (Detector d : detectors_of(a.detector)) {
    for (double phi : phis) {
      double re = NAN, im = NAN, m2 = NAN;
      try {
        const WeakValue w = weak_value(d, phi);
        re = w.re;
        im = w.im;
        m2 = w.modulus_squared();
      } catch (const SingularWeakValueError& err) {
        if (!sweeping) throw;
      }
      e.add_row({phi, std::string(to_string(d)), re, im, m2, bare_probability(d, phi)});
    }
  }
  write(e, a.common);
  return kExitOk;
}

// ---- distributions

struct DistributionArgs {
  Common common;
  std::string detector = "all";
  std::string basis = "x";
  std::size_t points = 2048;
};

int cmd_distributions(const DistributionArgs& a) {
  const ExperimentConfig c = a.common.config();
  const MeasurementBasis basis = parse_basis(a.basis);
  const Grid1D grid = default_grid(c, basis, a.points);
  auto e = make_envelope("distributions", c, a.common.fmt());
  e.set_meta("basis", basis.label());
  grid_meta(e, "grid", grid);
  e.add_column("detector", ColumnType::Text);
  e.add_column("eta", ColumnType::Real);
  e.add_column("density", ColumnType::Real);
  for (Detector d : detectors_of(a.detector)) {
    const Distribution dist = density(c, d, basis);
    e.set_meta(std::string("mass_") + std::string(to_string(d)), dist.mass);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      e.add_row({std::string(to_string(d)), grid[i], dist(grid[i])});
    }
  }
  write(e, a.common);
  return kExitOk;
}

// ---- wigner

struct WignerArgs {
  Common common;
  std::string which = "W1";
  std::string report = "grid";
  std::size_t points = 512;
};

int cmd_wigner(const WignerArgs& a) {
  const ExperimentConfig c = a.common.config();
  const PhaseSpaceField field = wigner_closed_form(parse_wigner_label(a.which), c);
  const ScanGrids grids = default_scan_grids(c, a.points);
  auto e = make_envelope("wigner", c, a.common.fmt());
  e.set_meta("which", std::string(to_string(field.label)));
  e.set_meta("mass", field.mass);
  grid_meta(e, "grid_x", grids.x);
  grid_meta(e, "grid_k", grids.k);
  if (a.report == "negativity") {
    const NegativityReport r = negativity_scan(field, grids.x, grids.k);
    e.add_column("min_value", ColumnType::Real);
    e.add_column("argmin_x", ColumnType::Real);
    e.add_column("argmin_k", ColumnType::Real);
    e.add_column("negative_mass", ColumnType::Real);
    e.add_row({r.min_value, r.argmin_x, r.argmin_k, r.negative_mass});
  } else {
    e.add_column("x", ColumnType::Real);
    e.add_column("k", ColumnType::Real);
    e.add_column("w", ColumnType::Real);
    for (std::size_t i = 0; i < grids.x.size(); ++i) {
      for (std::size_t j = 0; j < grids.k.size(); ++j) {
        e.add_row({grids.x[i], grids.k[j], field(grids.x[i], grids.k[j])});
      }
    }
  }
  write(e, a.common);
  return kExitOk;
}

// ---- lhv

struct LhvArgs {
  Common common;
  std::string report = "convex";
  std::string detector = "D1";
  std::string basis = "x";
  int bins = 100;
  int solution = 1;
  std::size_t scan_points = 720;
};

void add_convex(OutputEnvelope& e, const ExperimentConfig& c, Detector d,
                const MeasurementBasis& basis) {
  e.add_column("eta", ColumnType::Real);
  e.add_column("w_A", ColumnType::Real);
  e.add_column("w_B", ColumnType::Real);
  ConvexWeightFunction w;
  try {
    w = convex_weights(c, d, basis);
  } catch (const UndefinedWeightsError& err) {
    e.set_meta("defined", "false");
    e.set_meta("reason", err.what());
    return;
  }
  e.set_meta("defined", "true");
  const Grid1D grid = default_grid(c, basis);
  grid_meta(e, "grid", grid);
  const WeightRegions r = classify(w, grid);
  e.set_meta("min_w_A", r.min_value);
  e.set_meta("max_w_A", r.max_value);
  e.set_meta("negative_region_width", negative_region_width(c, d));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    e.add_row({grid[i], w.w_A(grid[i]), w.w_B(grid[i])});
  }
}

void add_histograms(OutputEnvelope& e, const ExperimentConfig& c,
                    const std::vector<MeasurementBasis>& bases, int bins) {
  e.set_meta("bins", std::to_string(bins));
  e.add_column("basis", ColumnType::Text);
  e.add_column("detector", ColumnType::Text);
  e.add_column("bin", ColumnType::Integer);
  e.add_column("w_lo", ColumnType::Real);
  e.add_column("w_hi", ColumnType::Real);
  e.add_column("p", ColumnType::Real);
  e.add_column("q", ColumnType::Real);
  for (const auto& basis : bases) {
    for (Detector d : {Detector::D1, Detector::D2}) {
      const WeightHistogram h = weight_histogram(c, d, basis, bins);
      const std::string tag = basis.label() + "_" + std::string(to_string(d));
      e.set_meta("weight_min_" + tag, h.weight_min);
      e.set_meta("weight_max_" + tag, h.weight_max);
      for (int n = 0; n < bins; ++n) {
        e.add_row({basis.label(), std::string(to_string(d)), std::int64_t(n),
                   n * h.bin_width, (n + 1) * h.bin_width, h.p[std::size_t(n)],
                   h.q[std::size_t(n)]});
      }
    }
  }
}

int cmd_lhv(const LhvArgs& a) {
  const ExperimentConfig c = a.common.config();
  auto e = make_envelope("lhv", c, a.common.fmt());
  e.set_meta("report", a.report);
  if (a.report == "convex") {
    const Detector d = parse_detector(a.detector);
    e.set_meta("detector", std::string(to_string(d)));
    e.set_meta("basis", parse_basis(a.basis).label());
    add_convex(e, c, d, parse_basis(a.basis));
  } else if (a.report == "split") {
    const Detector d = parse_detector(a.detector);
    const MeasurementBasis basis = parse_basis(a.basis);
    const SplitWeightFunction w = split_weights(c, d, basis);
    const Grid1D grid = default_grid(c, basis);
    grid_meta(e, "grid", grid);
    const Interval r = weight_range(w, grid);
    const Interval bounds = weight_bounds(w);
    e.set_meta("detector", std::string(to_string(d)));
    e.set_meta("basis", basis.label());
    e.set_meta("w_min_grid", r.lo);
    e.set_meta("w_max_grid", r.hi);
    e.set_meta("w_inf", bounds.lo);
    e.set_meta("w_sup", bounds.hi);
    e.add_column("eta", ColumnType::Real);
    e.add_column("w", ColumnType::Real);
    for (std::size_t i = 0; i < grid.size(); ++i) e.add_row({grid[i], w(grid[i])});
  } else if (a.report == "histogram") {
    add_histograms(e, c, {parse_basis(a.basis)}, a.bins);
  } else if (a.report == "factorized") {
    const FactorizedWhich which =
        a.solution == 1 ? FactorizedWhich::Solution1 : FactorizedWhich::Solution2;
    const FactorizedSolution s = factorized_solutions(c, which);
    e.set_meta("solution", std::to_string(a.solution));
    e.set_meta("integral_residual", s.integral_residual);
    e.set_meta("w_min", s.w_min);
    e.set_meta("w_max", s.w_max);
    e.add_column("phi", ColumnType::Real);
    e.add_column("w_min", ColumnType::Real);
    e.add_column("w_max", ColumnType::Real);
    e.add_column("admissible", ColumnType::Integer);
    for (const auto& p : factorized_phi_scan(c, which, a.scan_points)) {
      e.add_row({p.phi, p.w_min, p.w_max, std::int64_t(p.admissible)});
    }
  } else {
    throw UsageError("unknown lhv report '" + a.report + "'");
  }
  write(e, a.common);
  return kExitOk;
}

// ---- figures

struct FigureArgs {
  Common common;
  std::string which;
  std::size_t points = 512;
  int bins = 100;
};

int cmd_figures(FigureArgs& a) {
  if (a.which == "fig4" && a.common.g_opt->count() == 0) a.common.g = 10.0;
  const ExperimentConfig c = a.common.config();
  auto e = make_envelope("figures", c, a.common.fmt());
  e.set_meta("figure", a.which);
  if (a.which == "fig2") {
    const Grid1D grid = default_x_grid(c);
    grid_meta(e, "grid", grid);
    const auto w1 = convex_weights(c, Detector::D1, MeasurementBasis::position());
    const auto w2 = convex_weights(c, Detector::D2, MeasurementBasis::position());
    e.add_column("x", ColumnType::Real);
    e.add_column("w_B1", ColumnType::Real);
    e.add_column("w_B2", ColumnType::Real);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      e.add_row({grid[i], w1.w_B(grid[i]), w2.w_B(grid[i])});
    }
  } else if (a.which == "fig3") {
    e.add_column("basis", ColumnType::Text);
    e.add_column("eta", ColumnType::Real);
    e.add_column("w1", ColumnType::Real);
    e.add_column("w2", ColumnType::Real);
    for (const auto& basis :
         {MeasurementBasis::position(), MeasurementBasis::wavenumber(),
          MeasurementBasis::quadrature(1.0, 1.0), MeasurementBasis::quadrature(0.1, 1.0)}) {
      const Grid1D grid = default_grid(c, basis);
      grid_meta(e, "grid_" + basis.label(), grid);
      const auto w1 = split_weights(c, Detector::D1, basis);
      const auto w2 = split_weights(c, Detector::D2, basis);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        e.add_row({basis.label(), grid[i], w1(grid[i]), w2(grid[i])});
      }
    }
  } else if (a.which == "fig4") {
    const ScanGrids grids = default_scan_grids(c, a.points);
    grid_meta(e, "grid_x", grids.x);
    grid_meta(e, "grid_k", grids.k);
    const auto w1 = wigner_closed_form(WignerLabel::W1, c);
    const auto w2 = wigner_closed_form(WignerLabel::W2, c);
    e.add_column("x", ColumnType::Real);
    e.add_column("k", ColumnType::Real);
    e.add_column("W1", ColumnType::Real);
    e.add_column("W2", ColumnType::Real);
    for (std::size_t i = 0; i < grids.x.size(); ++i) {
      for (std::size_t j = 0; j < grids.k.size(); ++j) {
        const double x = grids.x[i], k = grids.k[j];
        e.add_row({x, k, w1(x, k), w2(x, k)});
      }
    }
  } else if (a.which == "fig7") {
    add_histograms(e, c, {MeasurementBasis::position(), MeasurementBasis::wavenumber()},
                   a.bins);
  } else {
    throw UsageError("unknown figure '" + a.which + "'");
  }
  write(e, a.common);
  return kExitOk;
}

// ---- simulate

struct SimulateArgs {
  Common common;
  std::string strategy = "quantum";
  std::size_t runs = 1000000;
  std::optional<std::uint64_t> seed;
  std::string policy = "random";
  std::string emit_what = "verdict";
  double alpha = 0.01;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("WEAKMZI_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError("WEAKMZI_SEED is not an unsigned integer");
  }
  return 0;
}

BasisPolicy make_policy(const std::string& text) {
  if (text == "random") return BasisPolicy::random_xk();
  if (text == "alternating") {
    BasisPolicy p;
    p.kind = BasisPolicyKind::Alternating;
    return p;
  }
  return BasisPolicy::fixed(parse_basis(text));
}

int cmd_simulate(const SimulateArgs& a) {
  const ExperimentConfig c = a.common.config();
  const std::uint64_t seed = resolve_seed(a.seed);
  const BasisPolicy policy = make_policy(a.policy);
  if (a.runs < 1) throw UsageError("--runs must be >= 1");

  RunStream stream;
  if (a.strategy == "quantum") {
    stream = quantum_sampler(c, a.runs, policy, seed);
  } else {
    std::unique_ptr<LhvStrategy> s;
    if (a.strategy == "phi-zero") {
      s = phi_zero_strategy(c);
    } else if (a.strategy == "committed-distribution") {
      s = committed_distribution_strategy(c);
    } else if (a.strategy == "committed-outcome-x") {
      s = committed_outcome_strategy(c, MeasurementBasis::position());
    } else if (a.strategy == "committed-outcome-k") {
      s = committed_outcome_strategy(c, MeasurementBasis::wavenumber());
    } else {
      throw UsageError("unknown strategy '" + a.strategy + "'");
    }
    stream = run_strategy(*s, c, a.runs, EventTimeline::square_mzi(c), policy, seed);
  }

  auto e = make_envelope("simulate", c, a.common.fmt());
  e.set_meta("strategy", stream.strategy);
  e.set_meta("runs", std::to_string(a.runs));
  e.set_meta("rng_algorithm", std::string(RngStream::kAlgorithm));
  e.set_meta("seed", std::to_string(seed));
  e.set_meta("basis_policy", a.policy);
  e.set_meta("sampler_grid_points", "2048");

  if (a.emit_what == "records") {
    e.add_column("run_id", ColumnType::Integer);
    e.add_column("arm", ColumnType::Text);
    e.add_column("phi", ColumnType::Real);
    e.add_column("basis", ColumnType::Text);
    e.add_column("detector", ColumnType::Text);
    e.add_column("clicks", ColumnType::Integer);
    e.add_column("pointer", ColumnType::Real);
    for (const auto& r : stream.records) {
      e.add_row({std::int64_t(r.run_id), std::string(to_string(r.arm)), r.phi,
                 r.basis.label(), std::string(to_string(r.detector)),
                 std::int64_t(r.clicks), r.pointer ? *r.pointer : NAN});
    }
    write(e, a.common);
    return kExitOk;
  }

  CompareOptions opts;
  opts.alpha = a.alpha;
  const ComparisonVerdict v = compare(stream, c, opts);
  e.set_meta("alpha", v.alpha);
  e.set_meta("per_test_alpha", v.per_test_alpha);
  e.set_meta("verdict", v.pass ? "pass" : "fail");
  for (std::size_t i = 0; i < v.warnings.size(); ++i) {
    e.set_meta("warning_" + std::to_string(i), v.warnings[i]);
  }
  e.add_column("test", ColumnType::Text);
  e.add_column("detector", ColumnType::Text);
  e.add_column("basis", ColumnType::Text);
  e.add_column("n", ColumnType::Integer);
  e.add_column("statistic", ColumnType::Real);
  e.add_column("p_value", ColumnType::Real);
  e.add_column("pass", ColumnType::Integer);
  e.add_row({std::string("chi_square"), std::string("all"), std::string("-"),
             std::int64_t(stream.records.size()), v.chi_square.statistic,
             v.chi_square.p_value, std::int64_t(v.chi_square.pass)});
  for (const auto& k : v.ks) {
    e.add_row({std::string("ks"), std::string(to_string(k.detector)), k.basis.label(),
               std::int64_t(k.n), k.statistic, k.p_value, std::int64_t(k.pass)});
  }
  write(e, a.common);
  std::cerr << "verdict: " << (v.pass ? "pass" : "fail") << "\n";
  return v.pass ? kExitOk : kExitStatFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak measurement in a nested Mach-Zehnder interferometer"};
  app.require_subcommand(1);

  WeakValueArgs wv;
  auto* s_wv = app.add_subcommand("weakvalue", "weak values of the arm projector");
  add_common(s_wv, wv.common);
  s_wv->add_option("--sweep-phi", wv.sweep, "a:b:n evenly spaced phases")
      ->excludes(wv.common.phi_opt);
  s_wv->add_option("--detector", wv.detector, "D1, D2, D3 or all")->capture_default_str();

  FigureArgs fig;
  auto* s_fig = app.add_subcommand("figures", "figure data (fig2, fig3, fig4, fig7)");
  add_common(s_fig, fig.common);
  s_fig->add_option("--which", fig.which, "fig2, fig3, fig4 or fig7")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig7"}));
  s_fig->add_option("--points", fig.points, "phase-space grid points")->capture_default_str();
  s_fig->add_option("--bins", fig.bins, "histogram bins")->capture_default_str();

  DistributionArgs dist;
  auto* s_dist = app.add_subcommand("distributions", "pointer densities per detector");
  add_common(s_dist, dist.common);
  s_dist->add_option("--detector", dist.detector, "D1, D2, D3 or all")->capture_default_str();
  s_dist->add_option("--basis", dist.basis, "x, k or eta(a,b)")->capture_default_str();
  s_dist->add_option("--points", dist.points, "grid points")->capture_default_str();

  WignerArgs wig;
  auto* s_wig = app.add_subcommand("wigner", "Wigner functions of the meter");
  add_common(s_wig, wig.common);
  s_wig->add_option("--which", wig.which, "WA, WB, W+, W1 or W2")->capture_default_str();
  s_wig->add_option("--report", wig.report, "grid or negativity")
      ->check(CLI::IsMember({"grid", "negativity"}))
      ->capture_default_str();
  s_wig->add_option("--points", wig.points, "grid points per axis")->capture_default_str();

  LhvArgs lhv;
  auto* s_lhv = app.add_subcommand("lhv", "hidden-variable weights and histograms");
  add_common(s_lhv, lhv.common);
  s_lhv->add_option("--report", lhv.report, "convex, split, histogram or factorized")
      ->check(CLI::IsMember({"convex", "split", "histogram", "factorized"}))
      ->capture_default_str();
  s_lhv->add_option("--detector", lhv.detector, "D1 or D2")->capture_default_str();
  s_lhv->add_option("--basis", lhv.basis, "x, k or eta(a,b)")->capture_default_str();
  s_lhv->add_option("--bins", lhv.bins, "histogram bins")->capture_default_str();
  s_lhv->add_option("--solution", lhv.solution, "factorized solution 1 or 2")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  s_lhv->add_option("--scan-points", lhv.scan_points, "phi scan points")
      ->capture_default_str();

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Monte Carlo runs and statistical verdict");
  add_common(s_sim, sim.common);
  s_sim->add_option("--strategy", sim.strategy,
                    "quantum, phi-zero, committed-distribution, committed-outcome-x or "
                    "committed-outcome-k")
      ->check(CLI::IsMember({"quantum", "phi-zero", "committed-distribution",
                             "committed-outcome-x", "committed-outcome-k"}))
      ->capture_default_str();
  s_sim->add_option("--runs", sim.runs, "number of runs")->capture_default_str();
  s_sim->add_option("--seed", sim.seed, "RNG seed (falls back to WEAKMZI_SEED)");
  s_sim->add_option("--basis-policy", sim.policy, "random, alternating, x, k or eta(a,b)")
      ->capture_default_str();
  s_sim->add_option("--emit", sim.emit_what, "verdict or records")
      ->check(CLI::IsMember({"verdict", "records"}))
      ->capture_default_str();
  s_sim->add_option("--alpha", sim.alpha, "family-wise significance")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*s_wv) return cmd_weakvalue(wv);
    if (*s_fig) return cmd_figures(fig);
    if (*s_dist) return cmd_distributions(dist);
    if (*s_wig) return cmd_wigner(wig);
    if (*s_lhv) return cmd_lhv(lhv);
    if (*s_sim) return cmd_simulate(sim);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
