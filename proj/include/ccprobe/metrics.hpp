#pragma once
// Per-anchor background/task scores, conceptual consistency (average precision
// of predicting task correctness from the background score), and the
// relation, concept and yes/no-bias breakdowns.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ccprobe/decision_engine.hpp"

namespace ccprobe {

// Counts behind the balanced background score of one anchor.
struct BackgroundScore {
  std::uint64_t positive_correct = 0;
  std::uint64_t positive_total = 0;
  std::uint64_t negative_correct = 0;
  std::uint64_t negative_total = 0;

  std::optional<double> positive_acc() const;
  std::optional<double> negative_acc() const;
  // Mean of the defined sides; undefined when both sides are empty.
  std::optional<double> s_b() const;
  // s_b as a reduced fraction (numerator, denominator).
  std::optional<std::pair<std::uint64_t, std::uint64_t>> s_b_rational() const;
};

// Verdicts are split into positives and negatives by their fact's polarity.
BackgroundScore background_score(std::span<const Verdict> verdicts);

int anchor_score(const AnchorDecision& decision);

struct CurvePoint {
  double threshold;
  double precision;
  double recall;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// One point per distinct score, in descending threshold order. The predictor
// at threshold t is score >= t.
std::vector<CurvePoint> precision_recall_curve(std::span<const double> scores,
                                               std::span<const int> labels);

// Step-wise AP: sum over descending distinct thresholds of
// (R_n - R_{n-1}) * P_n. Throws UndefinedMetricError when no label is 1.
double average_precision(std::span<const double> scores, std::span<const int> labels);

struct ScoreRecord {
  std::string anchor_id;
  std::optional<double> s_b;
  int s_a = 0;
  std::optional<double> positive_acc;
  std::optional<double> negative_acc;
  std::vector<RelationKind> background_relations;  // sorted, unique
  std::vector<std::string> background_concepts;   // sorted, unique
  friend bool operator==(const ScoreRecord&, const ScoreRecord&) = default;
};

// Builds the record for one anchor from its background facts (positives and
// negatives), the run's verdicts for those facts, and its decision.
ScoreRecord make_score_record(const BackgroundSet& background,
                              std::span<const Verdict> verdicts,
                              const AnchorDecision& decision);

enum class Degeneracy { None, AllCorrect, NoneCorrect };
std::string_view degeneracy_name(Degeneracy d) noexcept;

struct ConsistencyResult {
  std::optional<double> cc;  // empty only when degeneracy == NoneCorrect
  std::size_t n_anchors = 0;   // records used
  std::size_t n_excluded = 0;  // records with undefined s_b
  std::size_t positives = 0;   // records with s_a == 1
  Degeneracy degeneracy = Degeneracy::None;
  std::vector<CurvePoint> threshold_curve;
};

// Throws UndefinedMetricError when every record is excluded or none has
// s_a == 1. All-correct input yields cc = 1 flagged AllCorrect.
ConsistencyResult conceptual_consistency(std::span<const ScoreRecord> records);

// Never throws on degenerate labels; NoneCorrect leaves cc empty.
ConsistencyResult conceptual_consistency_flagged(std::span<const ScoreRecord> records);

enum class BreakdownMode { Relation, Concept };

struct BreakdownOptions {
  BreakdownMode mode = BreakdownMode::Relation;
  std::size_t min_count = 1;
  std::size_t max_rows = 0;  // 0: unlimited

  static BreakdownOptions relations() { return {BreakdownMode::Relation, 1, 0}; }
  static BreakdownOptions concepts() { return {BreakdownMode::Concept, 28, 14}; }
};

struct BreakdownRow {
  std::string key;
  std::size_t subset_size = 0;
  std::optional<double> cc_subset;
  std::optional<double> mean_s_b_subset;
  Degeneracy degeneracy = Degeneracy::None;
};

// Rows ordered by subset size (descending) then key.
std::vector<BreakdownRow> breakdown(std::span<const ScoreRecord> records,
                                    const BreakdownOptions& options);

struct RelationAccuracy {
  RelationKind relation;
  std::size_t fact_count = 0;
  std::optional<double> positive_acc;
  std::optional<double> negative_acc;
  std::optional<double> balanced;  // empty when the relation has no facts
};

struct RelationBackground {
  std::optional<double> mean;  // unweighted over relations with facts
  double ci95 = 0.0;           // half-width, 1.96 * sd / sqrt(n)
  std::vector<RelationAccuracy> per_relation;  // all 14, canonical order
  std::vector<RelationKind> excluded;          // relations without facts
};

RelationBackground relation_mean_background(std::span<const Verdict> verdicts);

struct BiasRow {
  std::string scope = "all";
  std::optional<double> positive_acc_mean;
  std::optional<double> negative_acc_mean;
};

BiasRow bias_report(std::span<const Verdict> verdicts, std::string scope = "all");

}  // namespace ccprobe
