#include "ccprobe/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "ccprobe/errors.hpp"

namespace ccprobe {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::optional<double> BackgroundScore::positive_acc() const {
  return ratio(positive_correct, positive_total);
}

std::optional<double> BackgroundScore::negative_acc() const {
  return ratio(negative_correct, negative_total);
}

std::optional<double> BackgroundScore::s_b() const {
  auto p = positive_acc();
  auto n = negative_acc();
  if (p && n) return (*p + *n) / 2.0;
  if (p) return p;
  return n;
}

std::optional<std::pair<std::uint64_t, std::uint64_t>> BackgroundScore::s_b_rational() const {
  std::uint64_t num;
  std::uint64_t den;
  if (positive_total && negative_total) {
    num = positive_correct * negative_total + negative_correct * positive_total;
    den = 2 * positive_total * negative_total;
  } else if (positive_total) {
    num = positive_correct;
    den = positive_total;
  } else if (negative_total) {
    num = negative_correct;
    den = negative_total;
  } else {
    return std::nullopt;
  }
  const auto g = std::gcd(num, den);
  return std::make_pair(num / g, den / g);
}

BackgroundScore background_score(std::span<const Verdict> verdicts) {
  BackgroundScore s;
  for (const auto& v : verdicts) {
    if (v.fact.polarity == Polarity::Positive) {
      ++s.positive_total;
      s.positive_correct += v.correct ? 1 : 0;
    } else {
      ++s.negative_total;
      s.negative_correct += v.correct ? 1 : 0;
    }
  }
  return s;
}

int anchor_score(const AnchorDecision& decision) { return decision.correct ? 1 : 0; }

// ---------------------------------------------------------------------------
// Average precision

namespace {

// Validates the inputs and returns the number of positive labels.
std::uint64_t check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw PreconditionError("scores and labels differ in length");
  }
  std::uint64_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw PreconditionError("NaN score");
    if (labels[i] != 0 && labels[i] != 1) throw PreconditionError("labels must be 0 or 1");
    positives += static_cast<std::uint64_t>(labels[i]);
  }
  return positives;
}

struct Scored {
  double score;
  int label;
};

// Visits (threshold, true positives, predicted positives) per distinct score,
// descending.
template <typename Visit>
void sweep(std::span<const double> scores, std::span<const int> labels, Visit&& visit) {
  constexpr std::size_t kInline = 32;
  const std::size_t n = scores.size();
  std::array<Scored, kInline> small;
  std::vector<Scored> large;
  Scored* items = small.data();
  if (n > kInline) {
    large.resize(n);
    items = large.data();
  }
  for (std::size_t i = 0; i < n; ++i) items[i] = {scores[i], labels[i]};
  const auto later = [](const Scored& a, const Scored& b) { return a.score > b.score; };
  if (n <= kInline) {
    for (std::size_t i = 1; i < n; ++i) {
      const Scored x = items[i];
      std::size_t j = i;
      for (; j > 0 && later(x, items[j - 1]); --j) items[j] = items[j - 1];
      items[j] = x;
    }
  } else {
    std::sort(items, items + n, later);
  }
  std::uint64_t tp = 0;
  std::uint64_t predicted = 0;
  std::size_t i = 0;
  while (i < n) {
    const double t = items[i].score;
    while (i < n && items[i].score == t) {
      tp += static_cast<std::uint64_t>(items[i].label);
      ++predicted;
      ++i;
    }
    visit(t, tp, predicted);
  }
}

}  // namespace

std::vector<CurvePoint> precision_recall_curve(std::span<const double> scores,
                                               std::span<const int> labels) {
  const auto total = check_inputs(scores, labels);
  std::vector<CurvePoint> curve;
  sweep(scores, labels, [&](double t, std::uint64_t tp, std::uint64_t predicted) {
    curve.push_back({t, static_cast<double>(tp) / static_cast<double>(predicted),
                     total ? static_cast<double>(tp) / static_cast<double>(total) : 0.0});
  });
  return curve;
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  const auto total = check_inputs(scores, labels);
  if (total == 0) throw UndefinedMetricError("average precision needs at least one positive label");
  double ap = 0.0;
  std::uint64_t prev_tp = 0;
  sweep(scores, labels, [&](double, std::uint64_t tp, std::uint64_t predicted) {
    const double recall_step =
        static_cast<double>(tp - prev_tp) / static_cast<double>(total);
    ap += recall_step * (static_cast<double>(tp) / static_cast<double>(predicted));
    prev_tp = tp;
  });
  return ap;
}

// ---------------------------------------------------------------------------
// Records

ScoreRecord make_score_record(const BackgroundSet& background,
                              std::span<const Verdict> verdicts,
                              const AnchorDecision& decision) {
  ScoreRecord record;
  record.anchor_id = background.anchor_id;
  const auto bs = background_score(verdicts);
  record.s_b = bs.s_b();
  record.positive_acc = bs.positive_acc();
  record.negative_acc = bs.negative_acc();
  record.s_a = anchor_score(decision);

  std::set<RelationKind> relations;
  std::set<std::string> concepts;
  auto collect = [&](const std::vector<Fact>& facts) {
    for (const auto& f : facts) {
      relations.insert(f.relation);
      concepts.insert(f.c1.label());
      concepts.insert(f.c2.label());
    }
  };
  collect(background.positives);
  collect(background.negatives);
  record.background_relations.assign(relations.begin(), relations.end());
  record.background_concepts.assign(concepts.begin(), concepts.end());
  return record;
}

std::string_view degeneracy_name(Degeneracy d) noexcept {
  switch (d) {
    case Degeneracy::AllCorrect: return "all_correct";
    case Degeneracy::NoneCorrect: return "none_correct";
    case Degeneracy::None: break;
  }
  return "none";
}

ConsistencyResult conceptual_consistency_flagged(std::span<const ScoreRecord> records) {
  ConsistencyResult result;
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& r : records) {
    if (!r.s_b) {
      ++result.n_excluded;
      continue;
    }
    scores.push_back(*r.s_b);
    labels.push_back(r.s_a);
  }
  result.n_anchors = scores.size();
  result.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (scores.empty()) return result;
  result.threshold_curve = precision_recall_curve(scores, labels);
  if (result.positives == 0) {
    result.degeneracy = Degeneracy::NoneCorrect;
    return result;
  }
  if (result.positives == result.n_anchors) result.degeneracy = Degeneracy::AllCorrect;
  result.cc = average_precision(scores, labels);
  return result;
}

ConsistencyResult conceptual_consistency(std::span<const ScoreRecord> records) {
  auto result = conceptual_consistency_flagged(records);
  if (result.n_anchors == 0) {
    throw UndefinedMetricError("every anchor was excluded (no background facts)");
  }
  if (result.degeneracy == Degeneracy::NoneCorrect) {
    throw UndefinedMetricError("no anchor answered correctly; average precision undefined");
  }
  return result;
}

std::vector<BreakdownRow> breakdown(std::span<const ScoreRecord> records,
                                    const BreakdownOptions& options) {
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (options.mode == BreakdownMode::Relation) {
      for (auto r : records[i].background_relations) {
        members[std::string(relation_name(r))].push_back(i);
      }
    } else {
      for (const auto& c : records[i].background_concepts) members[c].push_back(i);
    }
  }
  std::vector<std::pair<std::string, std::vector<std::size_t>>> keyed(members.begin(),
                                                                      members.end());
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.second.size() > b.second.size();
  });

  std::vector<BreakdownRow> rows;
  for (const auto& [key, idx] : keyed) {
    if (idx.size() < options.min_count) continue;
    if (options.max_rows && rows.size() >= options.max_rows) break;
    std::vector<ScoreRecord> subset;
    subset.reserve(idx.size());
    for (auto i : idx) subset.push_back(records[i]);
    auto cc = conceptual_consistency_flagged(subset);
    BreakdownRow row;
    row.key = key;
    row.subset_size = idx.size();
    row.cc_subset = cc.cc;
    row.degeneracy = cc.degeneracy;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : subset) {
      if (r.s_b) {
        sum += *r.s_b;
        ++n;
      }
    }
    if (n) row.mean_s_b_subset = sum / static_cast<double>(n);
    rows.push_back(std::move(row));
  }
  return rows;
}

RelationBackground relation_mean_background(std::span<const Verdict> verdicts) {
  std::array<BackgroundScore, kRelationCount> per{};
  for (const auto& v : verdicts) {
    auto& s = per[relation_index(v.fact.relation)];
    if (v.fact.polarity == Polarity::Positive) {
      ++s.positive_total;
      s.positive_correct += v.correct ? 1 : 0;
    } else {
      ++s.negative_total;
      s.negative_correct += v.correct ? 1 : 0;
    }
  }
  RelationBackground out;
  std::vector<double> values;
  for (auto r : kAllRelations) {
    const auto& s = per[relation_index(r)];
    RelationAccuracy acc{r, static_cast<std::size_t>(s.positive_total + s.negative_total),
                         s.positive_acc(), s.negative_acc(), s.s_b()};
    if (acc.balanced) {
      values.push_back(*acc.balanced);
    } else {
      out.excluded.push_back(r);
    }
    out.per_relation.push_back(acc);
  }
  if (!values.empty()) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    out.mean = mean;
    if (values.size() > 1) {
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      out.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
  }
  return out;
}

BiasRow bias_report(std::span<const Verdict> verdicts, std::string scope) {
  const auto s = background_score(verdicts);
  return BiasRow{std::move(scope), s.positive_acc(), s.negative_acc()};
}

}  // namespace ccprobe
