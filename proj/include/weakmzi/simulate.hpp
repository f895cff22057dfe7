#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weakmzi/distribution.hpp"
#include "weakmzi/interferometer.hpp"
#include "weakmzi/numerics.hpp"
#include "weakmzi/pointer.hpp"

namespace weakmzi {

enum class Event {
  Emission,
  B1Passage,
  MeterCommit,
  BobPhaseChoice,
  BobArmPassage,
  B2Passage,
  AliceBasisChoice,
  MeterReadout,
  DetectorClick,
};
inline constexpr int kEventCount = 9;
std::string_view to_string(Event e);

// Decision points of a strategy and the event each one happens at.
enum class Decision { AtB1, CommitAtM, AtBobArm, AtB2, Readout };
inline constexpr int kDecisionCount = 5;
Event event_of(Decision d);
std::string_view to_string(Decision d);

// Inputs a decision may ask for and the event that produces each one.
enum class Input { Arm, Phi, Commitment, Routing, AliceBasis };
inline constexpr int kInputCount = 5;
Event source_of(Input in);
std::string_view to_string(Input in);

struct SpacetimePoint {
  double t;
  double x;
  double y;
};

// Geometry of the square nested interferometer in units with c = 1. The
// particle leaves B1 at t = -L/v; Alice's meter sits on arm x1 at the origin
// and Bob's station at (sqrt(2) L, 0).
class EventTimeline {
 public:
  static EventTimeline square_mzi(double arm_length, double speed);
  static EventTimeline square_mzi(const ExperimentConfig& config) {
    return square_mzi(config.arm_length, config.particle_speed);
  }

  const SpacetimePoint& at(Event e) const { return points_[std::size_t(e)]; }
  // True when a signal no faster than light can get from a to b.
  bool reaches(Event a, Event b) const;
  std::vector<Event> ordered() const;
  double arm_length() const { return arm_length_; }
  double speed() const { return speed_; }

 private:
  std::array<SpacetimePoint, kEventCount> points_{};
  double arm_length_ = 0.0;
  double speed_ = 1.0;
};

class AccessibilityMatrix {
 public:
  explicit AccessibilityMatrix(const EventTimeline& timeline);
  bool granted(Decision d, Input in) const {
    return granted_[std::size_t(d)][std::size_t(in)];
  }

 private:
  std::array<std::array<bool, kInputCount>, kDecisionCount> granted_{};
};

// Which way the particle went at B1: Alice's arm x1 or Bob's side.
enum class Side { None, Alice, Bob };
std::string_view to_string(Side s);

struct Commitment {
  // 'A' or 'B' for a committed distribution, or '-' when unused.
  char tag = '-';
  std::optional<double> x;
  std::optional<double> k;
};

enum class BobRoute { ToD3, ToB2 };

class LhvStrategy;
struct BasisPolicy;
struct RunStream;
class EventTimeline;

class DecisionContext {
 public:
  DecisionContext(Decision decision, const AccessibilityMatrix& access,
                  const EventTimeline& timeline, RngStream& rng);

  Decision decision() const { return decision_; }
  RngStream& rng() { return *rng_; }

  // Each accessor throws LocalityViolation when the input lies outside this
  // decision's past light cone.
  Side arm() const;
  double phi() const;
  const Commitment& commitment() const;
  Detector routing() const;
  const MeasurementBasis& alice_basis() const;

  // Per-run memory; reads are checked against the light cone of the write.
  void remember(const std::string& key, double value);
  double recall(const std::string& key) const;

 private:
  friend RunStream run_strategy(LhvStrategy&, const ExperimentConfig&, std::size_t,
                                const EventTimeline&, const BasisPolicy&, std::uint64_t);
  void require(Input in) const;

  Decision decision_;
  const AccessibilityMatrix* access_;
  const EventTimeline* timeline_;
  RngStream* rng_;
  std::map<std::string, std::pair<Event, double>>* memory_ = nullptr;
  Side arm_ = Side::None;
  double phi_ = 0.0;
  const Commitment* commitment_ = nullptr;
  std::optional<Detector> routing_;
  const MeasurementBasis* basis_ = nullptr;
};

class LhvStrategy {
 public:
  virtual ~LhvStrategy() = default;
  virtual std::string name() const = 0;
  virtual Side at_b1(DecisionContext& ctx) = 0;
  // Called every run; ctx.arm() tells whether the particle passes the meter.
  virtual Commitment commit_at_m(DecisionContext& ctx) = 0;
  virtual BobRoute at_bob_arm(DecisionContext& ctx) = 0;
  // Must return D1 or D2.
  virtual Detector at_b2(DecisionContext& ctx) = 0;
  virtual double readout(DecisionContext& ctx) = 0;
};

enum class BasisPolicyKind { Fixed, Alternating, Random };

struct BasisPolicy {
  BasisPolicyKind kind = BasisPolicyKind::Random;
  std::vector<MeasurementBasis> bases{MeasurementBasis::position(),
                                      MeasurementBasis::wavenumber()};

  static BasisPolicy fixed(const MeasurementBasis& b) {
    return {BasisPolicyKind::Fixed, {b}};
  }
  static BasisPolicy random_xk() { return {}; }
  const MeasurementBasis& choose(std::uint64_t run_id, RngStream& rng) const;
};

struct RunRecord {
  std::uint64_t run_id = 0;
  Side arm = Side::None;
  double phi = 0.0;
  MeasurementBasis basis;
  Detector detector = Detector::D1;
  // Detectors that fired in the run.
  int clicks = 1;
  std::optional<double> pointer;

  bool operator==(const RunRecord& o) const;
};

struct RunStream {
  std::string strategy;
  std::uint64_t seed = 0;
  ExperimentConfig config;
  std::vector<RunRecord> records;

  bool operator==(const RunStream& o) const {
    return strategy == o.strategy && seed == o.seed && records == o.records;
  }
};

RunStream quantum_sampler(const ExperimentConfig& config, std::size_t n_runs,
                          const BasisPolicy& policy, std::uint64_t seed);

RunStream run_strategy(LhvStrategy& strategy, const ExperimentConfig& config,
                       std::size_t n_runs, const EventTimeline& timeline,
                       const BasisPolicy& policy, std::uint64_t seed);

std::unique_ptr<LhvStrategy> phi_zero_strategy(const ExperimentConfig& config);
std::unique_ptr<LhvStrategy> committed_distribution_strategy(const ExperimentConfig& config);
std::unique_ptr<LhvStrategy> committed_outcome_strategy(const ExperimentConfig& config,
                                                        const MeasurementBasis& fixed_basis);
// Reads Bob's phase when committing at the meter.
std::unique_ptr<LhvStrategy> cheating_strategy(const ExperimentConfig& config);

struct TwoDetectorCounts {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t runs = 0;
  // Runs in which other than exactly one detector fired.
  std::size_t multi_clicks = 0;
};

// Single beam splitter, two distant detectors; the path is chosen at B.
TwoDetectorCounts einstein_experiment(std::size_t n_runs, std::uint64_t seed);

// Two-arm interferometer; B2's presence is decided after B1.
TwoDetectorCounts wheeler_experiment(double phi1, double phi2, bool b2_present,
                                     std::size_t n_runs, std::uint64_t seed);

struct ChiSquareResult {
  double statistic;
  int dof;
  double p_value;
  bool pass;
};

struct KsResult {
  Detector detector;
  MeasurementBasis basis;
  std::size_t n;
  double statistic;
  double p_value;
  bool pass;
};

struct ComparisonVerdict {
  double alpha;
  // Per-test threshold after the Bonferroni split of alpha.
  double per_test_alpha;
  ChiSquareResult chi_square;
  std::vector<KsResult> ks;
  std::vector<std::string> warnings;
  bool pass;
};

struct CompareOptions {
  double alpha = 0.01;
  std::size_t min_cell = 1000;
};

ComparisonVerdict compare(const RunStream& records, const ExperimentConfig& config,
                          const CompareOptions& options = {});

// P(D_n > d) for the two-sided one-sample statistic, asymptotic with the
// Stephens small-sample correction.
double kolmogorov_survival(double d, std::size_t n);

}  // namespace weakmzi
