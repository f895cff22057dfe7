#include "weakmzi/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss.hpp>

#include "weakmzi/lhv.hpp"

namespace weakmzi {

std::string_view to_string(Event e) {
  switch (e) {
    case Event::Emission:
      return "emission";
    case Event::B1Passage:
      return "B1-passage";
    case Event::MeterCommit:
      return "meter-commit";
    case Event::BobPhaseChoice:
      return "Bob-phase-choice";
    case Event::BobArmPassage:
      return "Bob-arm-passage";
    case Event::B2Passage:
      return "B2-passage";
    case Event::AliceBasisChoice:
      return "Alice-basis-choice";
    case Event::MeterReadout:
      return "meter-readout";
    case Event::DetectorClick:
      return "detector-click";
  }
  return "?";
}

Event event_of(Decision d) {
  switch (d) {
    case Decision::AtB1:
      return Event::B1Passage;
    case Decision::CommitAtM:
      return Event::MeterCommit;
    case Decision::AtBobArm:
      return Event::BobArmPassage;
    case Decision::AtB2:
      return Event::B2Passage;
    case Decision::Readout:
      return Event::MeterReadout;
  }
  return Event::Emission;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::AtB1:
      return "at_B1";
    case Decision::CommitAtM:
      return "commit_at_M";
    case Decision::AtBobArm:
      return "at_Bob_arm";
    case Decision::AtB2:
      return "at_B2";
    case Decision::Readout:
      return "readout";
  }
  return "?";
}

Event source_of(Input in) {
  switch (in) {
    case Input::Arm:
      return Event::B1Passage;
    case Input::Phi:
      return Event::BobPhaseChoice;
    case Input::Commitment:
      return Event::MeterCommit;
    case Input::Routing:
      return Event::B2Passage;
    case Input::AliceBasis:
      return Event::AliceBasisChoice;
  }
  return Event::Emission;
}

std::string_view to_string(Input in) {
  switch (in) {
    case Input::Arm:
      return "arm";
    case Input::Phi:
      return "phi";
    case Input::Commitment:
      return "commitment";
    case Input::Routing:
      return "routing";
    case Input::AliceBasis:
      return "alice_basis";
  }
  return "?";
}

std::string_view to_string(Side s) {
  switch (s) {
    case Side::None:
      return "none";
    case Side::Alice:
      return "alice";
    case Side::Bob:
      return "bob";
  }
  return "?";
}

EventTimeline EventTimeline::square_mzi(double arm_length, double speed) {
  if (!(arm_length > 0.0)) throw std::invalid_argument("timeline needs L > 0");
  if (!(speed > 0.0 && speed <= 1.0)) {
    throw std::invalid_argument("particle speed must lie in (0, 1]");
  }
  const double L = arm_length;
  const double T = L / speed;
  const double eps = 1e-3 * L;
  const double r = L * M_SQRT1_2;
  const double t_b2 = T * M_SQRT1_2;
  EventTimeline tl;
  tl.arm_length_ = L;
  tl.speed_ = speed;
  auto set = [&](Event e, SpacetimePoint p) { tl.points_[std::size_t(e)] = p; };
  set(Event::Emission, {-T - eps, r, -r});
  set(Event::B1Passage, {-T, r, -r});
  set(Event::MeterCommit, {0.0, 0.0, 0.0});
  set(Event::BobPhaseChoice, {0.0, M_SQRT2 * L, 0.0});
  set(Event::BobArmPassage, {0.0, M_SQRT2 * L, 0.0});
  set(Event::B2Passage, {t_b2, r, 0.0});
  set(Event::DetectorClick, {t_b2 + eps, r, 0.0});
  set(Event::AliceBasisChoice, {T - eps, 0.0, 0.0});
  set(Event::MeterReadout, {T, 0.0, 0.0});
  return tl;
}

bool EventTimeline::reaches(Event a, Event b) const {
  const auto& p = at(a);
  const auto& q = at(b);
  const double dt = q.t - p.t;
  const double dx = std::hypot(q.x - p.x, q.y - p.y);
  // Relative slack for rounding in the coordinates.
  return dt >= dx * (1.0 - 1e-12) - 1e-15 * arm_length_ && dt >= 0.0;
}

std::vector<Event> EventTimeline::ordered() const {
  std::vector<Event> out;
  for (int i = 0; i < kEventCount; ++i) out.push_back(Event(i));
  std::stable_sort(out.begin(), out.end(),
                   [this](Event a, Event b) { return at(a).t < at(b).t; });
  return out;
}

AccessibilityMatrix::AccessibilityMatrix(const EventTimeline& timeline) {
  for (int d = 0; d < kDecisionCount; ++d) {
    for (int i = 0; i < kInputCount; ++i) {
      granted_[std::size_t(d)][std::size_t(i)] =
          timeline.reaches(source_of(Input(i)), event_of(Decision(d)));
    }
  }
}

DecisionContext::DecisionContext(Decision decision, const AccessibilityMatrix& access,
                                 const EventTimeline& timeline, RngStream& rng)
    : decision_(decision), access_(&access), timeline_(&timeline), rng_(&rng) {}

void DecisionContext::require(Input in) const {
  if (!access_->granted(decision_, in)) {
    throw LocalityViolation(std::string(to_string(decision_)) + " may not read " +
                            std::string(to_string(in)) + ": " +
                            std::string(to_string(source_of(in))) +
                            " is outside its past light cone");
  }
}

Side DecisionContext::arm() const {
  require(Input::Arm);
  return arm_;
}

double DecisionContext::phi() const {
  require(Input::Phi);
  return phi_;
}

const Commitment& DecisionContext::commitment() const {
  require(Input::Commitment);
  if (!commitment_) throw std::logic_error("commitment not made yet");
  return *commitment_;
}

Detector DecisionContext::routing() const {
  require(Input::Routing);
  if (!routing_) throw std::logic_error("routing not decided yet");
  return *routing_;
}

const MeasurementBasis& DecisionContext::alice_basis() const {
  require(Input::AliceBasis);
  if (!basis_) throw std::logic_error("basis not chosen yet");
  return *basis_;
}

void DecisionContext::remember(const std::string& key, double value) {
  if (!memory_) throw std::logic_error("no run memory attached");
  (*memory_)[key] = {event_of(decision_), value};
}

double DecisionContext::recall(const std::string& key) const {
  if (!memory_) throw std::logic_error("no run memory attached");
  auto it = memory_->find(key);
  if (it == memory_->end()) throw std::out_of_range("nothing remembered as " + key);
  if (!timeline_->reaches(it->second.first, event_of(decision_))) {
    throw LocalityViolation(std::string(to_string(decision_)) + " cannot recall '" + key +
                            "' written at " + std::string(to_string(it->second.first)));
  }
  return it->second.second;
}

const MeasurementBasis& BasisPolicy::choose(std::uint64_t run_id, RngStream& rng) const {
  if (bases.empty()) throw std::invalid_argument("basis policy without bases");
  switch (kind) {
    case BasisPolicyKind::Fixed:
      return bases.front();
    case BasisPolicyKind::Alternating:
      return bases[run_id % bases.size()];
    case BasisPolicyKind::Random: {
      std::size_t i = std::size_t(rng.uniform() * double(bases.size()));
      return bases[std::min(i, bases.size() - 1)];
    }
  }
  return bases.front();
}

bool RunRecord::operator==(const RunRecord& o) const {
  return run_id == o.run_id && arm == o.arm && phi == o.phi && basis == o.basis &&
         detector == o.detector && clicks == o.clicks && pointer == o.pointer;
}

namespace {

class SamplerCache {
 public:
  const InverseCdfSampler& get(const std::string& key, const Distribution& d,
                               const Grid1D& grid) {
    auto it = cache_.find(key);
    if (it == cache_.end()) {
      it = cache_.emplace(key, std::make_unique<InverseCdfSampler>(d.eval, grid, d.mass))
               .first;
    }
    return *it->second;
  }

 private:
  std::map<std::string, std::unique_ptr<InverseCdfSampler>> cache_;
};

// Draws from Phi_A or Phi_B in any basis.
class ReferenceSamplers {
 public:
  explicit ReferenceSamplers(const ExperimentConfig& c) : config_(c) {}

  double draw(char tag, const MeasurementBasis& basis, RngStream& rng) {
    const bool shifted = tag == 'A';
    const auto d = reference_gaussian(config_, shifted, basis);
    return cache_.get(std::string(1, tag) + basis.label(), d, default_grid(config_, basis))
        .draw(rng);
  }

 private:
  ExperimentConfig config_;
  SamplerCache cache_;
};

}  // namespace

RunStream quantum_sampler(const ExperimentConfig& config, std::size_t n_runs,
                          const BasisPolicy& policy, std::uint64_t seed) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  const ExperimentConfig c = config.validated();
  RunStream out;
  out.strategy = "quantum";
  out.seed = seed;
  out.config = c;
  out.records.reserve(n_runs);

  RngStream rng(seed, 3);
  RngStream basis_rng(seed, 2);
  const double p1 = click_probability(c, Detector::D1);
  const double p2 = click_probability(c, Detector::D2);
  SamplerCache cache;
  for (std::size_t i = 0; i < n_runs; ++i) {
    RunRecord r;
    r.run_id = i;
    r.phi = c.phi;
    const double u = rng.uniform();
    r.detector = u < p1 ? Detector::D1 : u < p1 + p2 ? Detector::D2 : Detector::D3;
    r.basis = policy.choose(i, basis_rng);
    const auto d = density(c, r.detector, r.basis);
    const std::string key = std::string(to_string(r.detector)) + r.basis.label();
    r.pointer = cache.get(key, d, default_grid(c, r.basis)).draw(rng);
    out.records.push_back(r);
  }
  return out;
}

RunStream run_strategy(LhvStrategy& strategy, const ExperimentConfig& config,
                       std::size_t n_runs, const EventTimeline& timeline,
                       const BasisPolicy& policy, std::uint64_t seed) {
  if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  const ExperimentConfig c = config.validated();
  const AccessibilityMatrix access(timeline);
  RunStream out;
  out.strategy = strategy.name();
  out.seed = seed;
  out.config = c;
  out.records.reserve(n_runs);

  RngStream rng(seed, 1);
  RngStream basis_rng(seed, 2);
  std::map<std::string, std::pair<Event, double>> memory;

  auto context = [&](Decision d) {
    DecisionContext ctx(d, access, timeline, rng);
    ctx.memory_ = &memory;
    ctx.phi_ = c.phi;
    return ctx;
  };

  for (std::size_t i = 0; i < n_runs; ++i) {
    memory.clear();
    RunRecord r;
    r.run_id = i;
    r.phi = c.phi;

    auto at_b1 = context(Decision::AtB1);
    r.arm = strategy.at_b1(at_b1);
    if (r.arm != Side::Alice && r.arm != Side::Bob) {
      throw std::logic_error("strategy must send the particle to one side at B1");
    }

    auto at_m = context(Decision::CommitAtM);
    at_m.arm_ = r.arm;
    const Commitment commitment = strategy.commit_at_m(at_m);

    bool reaches_b2 = r.arm == Side::Alice;
    if (r.arm == Side::Bob) {
      auto at_bob = context(Decision::AtBobArm);
      at_bob.arm_ = r.arm;
      at_bob.commitment_ = &commitment;
      reaches_b2 = strategy.at_bob_arm(at_bob) == BobRoute::ToB2;
    }
    if (reaches_b2) {
      auto at_b2 = context(Decision::AtB2);
      at_b2.arm_ = r.arm;
      at_b2.commitment_ = &commitment;
      r.detector = strategy.at_b2(at_b2);
      if (r.detector == Detector::D3) {
        throw std::logic_error("B2 can only route to D1 or D2");
      }
    } else {
      r.detector = Detector::D3;
    }
    r.clicks = 1;

    r.basis = policy.choose(i, basis_rng);
    auto readout = context(Decision::Readout);
    readout.arm_ = r.arm;
    readout.commitment_ = &commitment;
    readout.routing_ = r.detector;
    readout.basis_ = &r.basis;
    r.pointer = strategy.readout(readout);
    out.records.push_back(r);
  }
  return out;
}

namespace {

double eta_of(const MeasurementBasis& b, double x, double k) {
  switch (b.kind) {
    case BasisKind::Position:
      return x;
    case BasisKind::Wavenumber:
      return k;
    case BasisKind::Quadrature:
      return b.axis.a * x + b.axis.b * k;
  }
  return x;
}

class PhiZeroStrategy : public LhvStrategy {
 public:
  explicit PhiZeroStrategy(const ExperimentConfig& c) : samplers_(c) {}
  std::string name() const override { return "phi-zero"; }
  Side at_b1(DecisionContext& ctx) override {
    return ctx.rng().bernoulli(0.5) ? Side::Alice : Side::Bob;
  }
  Commitment commit_at_m(DecisionContext& ctx) override {
    Commitment cm;
    cm.tag = ctx.arm() == Side::Alice ? 'A' : 'B';
    return cm;
  }
  BobRoute at_bob_arm(DecisionContext&) override { return BobRoute::ToD3; }
  Detector at_b2(DecisionContext& ctx) override {
    return ctx.rng().bernoulli(0.5) ? Detector::D1 : Detector::D2;
  }
  double readout(DecisionContext& ctx) override {
    return samplers_.draw(ctx.commitment().tag, ctx.alice_basis(), ctx.rng());
  }

 private:
  ReferenceSamplers samplers_;
};

class CommittedDistributionStrategy : public LhvStrategy {
 public:
  explicit CommittedDistributionStrategy(const ExperimentConfig& c)
      : config_(c), samplers_(c) {}
  std::string name() const override { return "committed-distribution"; }
  Side at_b1(DecisionContext& ctx) override {
    return ctx.rng().bernoulli(0.5) ? Side::Alice : Side::Bob;
  }
  Commitment commit_at_m(DecisionContext& ctx) override {
    Commitment cm;
    cm.tag = ctx.arm() == Side::Alice ? 'A' : 'B';
    return cm;
  }
  BobRoute at_bob_arm(DecisionContext& ctx) override {
    const double phi = ctx.phi();
    return ctx.rng().bernoulli((1.0 + std::cos(phi)) / 2.0) ? BobRoute::ToD3
                                                            : BobRoute::ToB2;
  }
  // The only routing that matches the detector rates for either commitment
  // is the constant Prob(D1) / Prob(D+).
  Detector at_b2(DecisionContext& ctx) override {
    ExperimentConfig c = config_;
    c.phi = ctx.phi();
    const double p = click_probability(c, Detector::D1) / prob_plus(c.phi);
    return ctx.rng().bernoulli(p) ? Detector::D1 : Detector::D2;
  }
  double readout(DecisionContext& ctx) override {
    return samplers_.draw(ctx.commitment().tag, ctx.alice_basis(), ctx.rng());
  }

 private:
  ExperimentConfig config_;
  ReferenceSamplers samplers_;
};

class CommittedOutcomeStrategy : public LhvStrategy {
 public:
  CommittedOutcomeStrategy(const ExperimentConfig& c, const MeasurementBasis& fixed)
      : config_(c), fixed_(fixed), samplers_(c) {}
  std::string name() const override {
    return "committed-outcome-" + fixed_.label();
  }
  Side at_b1(DecisionContext& ctx) override {
    return ctx.rng().bernoulli(0.5) ? Side::Alice : Side::Bob;
  }
  Commitment commit_at_m(DecisionContext& ctx) override {
    Commitment cm;
    cm.tag = ctx.arm() == Side::Alice ? 'A' : 'B';
    cm.x = samplers_.draw(cm.tag, MeasurementBasis::position(), ctx.rng());
    cm.k = samplers_.draw(cm.tag, MeasurementBasis::wavenumber(), ctx.rng());
    return cm;
  }
  BobRoute at_bob_arm(DecisionContext& ctx) override {
    const double phi = ctx.phi();
    return ctx.rng().bernoulli((1.0 + std::cos(phi)) / 2.0) ? BobRoute::ToD3
                                                            : BobRoute::ToB2;
  }
  Detector at_b2(DecisionContext& ctx) override {
    const double phi = ctx.phi();
    const Commitment& cm = ctx.commitment();
    const double lambda = eta_of(fixed_, *cm.x, *cm.k);
    double w = weights(phi)(lambda);
    if (std::isnan(w)) w = 0.5;
    return ctx.rng().bernoulli(w) ? Detector::D1 : Detector::D2;
  }
  double readout(DecisionContext& ctx) override {
    const Commitment& cm = ctx.commitment();
    return eta_of(ctx.alice_basis(), *cm.x, *cm.k);
  }

 private:
  const SplitWeightFunction& weights(double phi) {
    auto it = weights_.find(phi);
    if (it == weights_.end()) {
      ExperimentConfig c = config_;
      c.phi = phi;
      it = weights_.emplace(phi, split_weights(c, Detector::D1, fixed_)).first;
    }
    return it->second;
  }

  ExperimentConfig config_;
  MeasurementBasis fixed_;
  ReferenceSamplers samplers_;
  std::map<double, SplitWeightFunction> weights_;
};

class CheatingStrategy : public PhiZeroStrategy {
 public:
  using PhiZeroStrategy::PhiZeroStrategy;
  std::string name() const override { return "cheating"; }
  Commitment commit_at_m(DecisionContext& ctx) override {
    Commitment cm;
    cm.tag = ctx.phi() == 0.0 ? 'A' : 'B';
    return cm;
  }
};

}  // namespace

std::unique_ptr<LhvStrategy> phi_zero_strategy(const ExperimentConfig& config) {
  return std::make_unique<PhiZeroStrategy>(config.validated());
}

std::unique_ptr<LhvStrategy> committed_distribution_strategy(const ExperimentConfig& config) {
  return std::make_unique<CommittedDistributionStrategy>(config.validated());
}

std::unique_ptr<LhvStrategy> committed_outcome_strategy(const ExperimentConfig& config,
                                                        const MeasurementBasis& fixed_basis) {
  return std::make_unique<CommittedOutcomeStrategy>(config.validated(), fixed_basis);
}

std::unique_ptr<LhvStrategy> cheating_strategy(const ExperimentConfig& config) {
  return std::make_unique<CheatingStrategy>(config.validated());
}

TwoDetectorCounts einstein_experiment(std::size_t n_runs, std::uint64_t seed) {
  RngStream rng(seed, 5);
  TwoDetectorCounts out;
  for (std::size_t i = 0; i < n_runs; ++i) {
    const bool first = rng.bernoulli(0.5);
    const int fired = 1;
    if (fired != 1) ++out.multi_clicks;
    (first ? out.d1 : out.d2) += 1;
    ++out.runs;
  }
  return out;
}

TwoDetectorCounts wheeler_experiment(double phi1, double phi2, bool b2_present,
                                     std::size_t n_runs, std::uint64_t seed) {
  RngStream rng(seed, 6);
  TwoDetectorCounts out;
  for (std::size_t i = 0; i < n_runs; ++i) {
    const int path = rng.bernoulli(0.5) ? 1 : 2;
    // Phase picked up locally and the one signalled from the other arm.
    const double own = path == 1 ? phi1 : phi2;
    const double other = path == 1 ? phi2 : phi1;
    bool to_d1;
    if (b2_present) {
      to_d1 = rng.bernoulli((1.0 - std::cos(own - other)) / 2.0);
    } else {
      to_d1 = path == 1;
    }
    (to_d1 ? out.d1 : out.d2) += 1;
    ++out.runs;
  }
  return out;
}

double kolmogorov_survival(double d, std::size_t n) {
  if (n == 0) return 1.0;
  const double sn = std::sqrt(double(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int j = 1; j <= 200; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

namespace {

class ReferenceCdf {
 public:
  ReferenceCdf(const Distribution& d, const Grid1D& grid) : f_(d.eval), grid_(grid) {
    table_.resize(grid.size());
    table_[0] = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      table_[i] = table_[i - 1] + cell(grid[i - 1], grid[i]);
    }
    total_ = table_.back();
  }

  double operator()(double v) const {
    if (v <= grid_.min()) return 0.0;
    if (v >= grid_.max()) return 1.0;
    std::size_t i = std::size_t((v - grid_.min()) / grid_.spacing());
    i = std::min(i, grid_.size() - 2);
    return (table_[i] + cell(grid_[i], v)) / total_;
  }

 private:
  double cell(double a, double b) const {
    return boost::math::quadrature::gauss<double, 7>::integrate(f_, a, b);
  }

  RealFunction f_;
  Grid1D grid_;
  std::vector<double> table_;
  double total_;
};

}  // namespace

ComparisonVerdict compare(const RunStream& records, const ExperimentConfig& config,
                          const CompareOptions& options) {
  const ExperimentConfig c = config.validated();
  ComparisonVerdict v;
  v.alpha = options.alpha;
  const std::size_t n = records.records.size();
  if (n < options.min_cell) {
    v.warnings.push_back("underpowered: only " + std::to_string(n) + " runs");
  }

  std::array<std::size_t, 3> counts{0, 0, 0};
  std::map<std::pair<int, std::string>, std::vector<double>> cells;
  std::map<std::string, MeasurementBasis> bases;
  for (const auto& r : records.records) {
    if (r.clicks != 1) throw std::logic_error("run with other than one click");
    counts[std::size_t(index_of(r.detector))] += 1;
    if (r.pointer) {
      const std::string label = r.basis.label();
      bases.emplace(label, r.basis);
      cells[{index_of(r.detector), label}].push_back(*r.pointer);
    }
  }

  double stat = 0.0;
  int used = 0;
  for (Detector d : kDetectors) {
    const double expected = double(n) * click_probability(c, d);
    const double observed = double(counts[std::size_t(index_of(d))]);
    if (expected > 0.0) {
      stat += (observed - expected) * (observed - expected) / expected;
      ++used;
    } else if (observed > 0.0) {
      stat = std::numeric_limits<double>::infinity();
    }
  }
  v.chi_square.statistic = stat;
  v.chi_square.dof = std::max(used - 1, 0);
  if (!std::isfinite(stat)) {
    v.chi_square.p_value = 0.0;
  } else if (v.chi_square.dof == 0) {
    v.chi_square.p_value = 1.0;
  } else {
    boost::math::chi_squared dist(v.chi_square.dof);
    v.chi_square.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  }

  for (auto& [key, samples] : cells) {
    const Detector d = Detector(key.first);
    const MeasurementBasis& basis = bases.at(key.second);
    if (samples.size() < options.min_cell) {
      v.warnings.push_back("underpowered: " + std::string(to_string(d)) + "/" + key.second +
                           " has " + std::to_string(samples.size()) + " samples");
      continue;
    }
    const auto dens = density(c, d, basis);
    if (!(dens.mass > 0.0)) {
      v.ks.push_back({d, basis, samples.size(), 1.0, 0.0, false});
      continue;
    }
    const ReferenceCdf cdf(dens, default_grid(c, basis));
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    const double m = double(s.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double f = cdf(s[i]);
      dmax = std::max({dmax, f - double(i) / m, double(i + 1) / m - f});
    }
    v.ks.push_back({d, basis, s.size(), dmax, kolmogorov_survival(dmax, s.size()), false});
  }

  const std::size_t tests = 1 + v.ks.size();
  v.per_test_alpha = options.alpha / double(tests);
  v.chi_square.pass = v.chi_square.p_value >= v.per_test_alpha;
  v.pass = v.chi_square.pass;
  for (auto& k : v.ks) {
    k.pass = k.p_value >= v.per_test_alpha;
    v.pass = v.pass && k.pass;
  }
  return v;
}

}  // namespace weakmzi
