#pragma once
// Brute-force reference implementations used by the unit and acceptance
// tests. They share no code with the library beyond its data types.

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ccprobe/decision_engine.hpp"
#include "ccprobe/extraction.hpp"
#include "ccprobe/kb_store.hpp"
#include "ccprobe/text.hpp"

namespace oracle {

using Triple = std::tuple<std::string, ccprobe::RelationKind, std::string>;

// Exact fraction with 128-bit intermediates (small instances only).
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction make(std::int64_t n, std::int64_t d) {
    const auto g = std::gcd(n, d);
    return {n / g, d / g};
  }
  Fraction operator+(const Fraction& o) const {
    return make(num * o.den + o.num * den, den * o.den);
  }
  Fraction operator*(const Fraction& o) const { return make(num * o.num, den * o.den); }
  bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Threshold sweep by direct counting: for every distinct score t (descending)
// count tp and predicted positives over the whole list.
inline double ap_sweep(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  const auto total = std::count(labels.begin(), labels.end(), 1);
  double ap = 0.0;
  std::uint64_t prev_tp = 0;
  for (double t : thresholds) {
    std::uint64_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++predicted;
        tp += labels[i] == 1 ? 1 : 0;
      }
    }
    ap += static_cast<double>(tp - prev_tp) / static_cast<double>(total) *
          (static_cast<double>(tp) / static_cast<double>(predicted));
    prev_tp = tp;
  }
  return ap;
}

// Same sweep in exact arithmetic.
inline Fraction ap_exact(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  const auto total = static_cast<std::int64_t>(std::count(labels.begin(), labels.end(), 1));
  Fraction ap;
  std::int64_t prev_tp = 0;
  for (double t : thresholds) {
    std::int64_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++predicted;
        tp += labels[i];
      }
    }
    ap = ap + Fraction::make(tp - prev_tp, total) * Fraction::make(tp, predicted);
    prev_tp = tp;
  }
  return ap;
}

// All edges whose endpoints are {a, b}, in either orientation.
inline std::set<Triple> edges_between(const std::vector<Triple>& edges, const std::string& a,
                                      const std::string& b) {
  std::set<Triple> out;
  for (const auto& e : edges) {
    const auto& [x, r, y] = e;
    if ((x == a && y == b) || (x == b && y == a)) out.insert(e);
  }
  return out;
}

// Every edge connecting two distinct members of `concepts`.
inline std::set<Triple> all_pairs_background(const std::vector<Triple>& edges,
                                             const std::set<std::string>& concepts) {
  std::set<Triple> out;
  for (const auto& e : edges) {
    const auto& [x, r, y] = e;
    if (x != y && concepts.contains(x) && concepts.contains(y)) out.insert(e);
  }
  return out;
}

inline std::set<std::string> to_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// Overlap test written from the rule: more than half of the concept's
// distinct words (or of the union, for Jaccard) appear in the span, and at
// least one shared word is not a stopword.
inline bool overlap_matches(const std::vector<std::string>& span, const std::string& label,
                            ccprobe::OverlapMode mode) {
  const auto s = to_set(span);
  const auto c = to_set(ccprobe::split_words(label));
  std::size_t shared = 0;
  bool content = false;
  for (const auto& w : c) {
    if (s.contains(w)) {
      ++shared;
      content = content || !ccprobe::is_stopword(w);
    }
  }
  if (!content) return false;
  const std::size_t denom =
      mode == ccprobe::OverlapMode::ConceptCoverage ? c.size() : s.size() + c.size() - shared;
  return static_cast<double>(shared) / static_cast<double>(denom) > 0.5;
}

// Exhaustive concept matching: every n-gram of every field against every
// vocabulary label, then per-span pruning (longer labels claim their shared
// words first; exact labels always survive). Result: labels in discovery order.
inline std::vector<std::string> match_concepts(const ccprobe::AnchorExample& anchor,
                                               const std::vector<std::string>& vocabulary,
                                               std::size_t max_ngram,
                                               ccprobe::OverlapMode mode) {
  std::vector<std::string> found;
  std::set<std::string> seen;
  std::vector<std::string> fields{anchor.question};
  fields.insert(fields.end(), anchor.choices.begin(), anchor.choices.end());
  for (const auto& text : fields) {
    const auto tokens = ccprobe::tokenize_text(text);
    for (std::size_t b = 0; b < tokens.size(); ++b) {
      for (std::size_t n = 1; n <= max_ngram && b + n <= tokens.size(); ++n) {
        std::vector<std::string> span(tokens.begin() + b, tokens.begin() + b + n);
        bool all_stop = true;
        for (const auto& w : span) all_stop = all_stop && ccprobe::is_stopword(w);
        if (all_stop) continue;
        std::vector<std::string> hits;
        for (const auto& label : vocabulary) {
          if (overlap_matches(span, label, mode)) hits.push_back(label);
        }
        auto rank = [](const std::string& l) {
          return std::make_tuple(-static_cast<long>(to_set(ccprobe::split_words(l)).size()),
                                 -static_cast<long>(l.size()), l);
        };
        std::sort(hits.begin(), hits.end(),
                  [&](const auto& x, const auto& y) { return rank(x) < rank(y); });
        const auto span_words = to_set(span);
        std::set<std::string> claimed;
        std::vector<std::string> kept;
        for (const auto& h : hits) {
          std::vector<std::string> shared;
          for (const auto& w : to_set(ccprobe::split_words(h))) {
            if (span_words.contains(w)) shared.push_back(w);
          }
          bool clash = false;
          for (const auto& w : shared) clash = clash || claimed.contains(w);
          if (clash) continue;
          kept.push_back(h);
          claimed.insert(shared.begin(), shared.end());
        }
        std::string joined;
        for (std::size_t i = 0; i < span.size(); ++i) joined += (i ? " " : "") + span[i];
        if (std::find(hits.begin(), hits.end(), joined) != hits.end() &&
            std::find(kept.begin(), kept.end(), joined) == kept.end()) {
          kept.push_back(joined);
        }
        for (const auto& k : kept) {
          if (seen.insert(k).second) found.push_back(k);
        }
      }
    }
  }
  return found;
}

// Argmax over a score table with first-index tie-breaking.
inline std::size_t first_argmax(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

// A random labelled store over `n_concepts` synthetic words.
inline std::vector<Triple> random_edges(std::mt19937_64& rng, std::size_t n_concepts,
                                        std::size_t n_edges, bool multiword = false) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n_concepts; ++i) {
    std::string name = "c" + std::to_string(i);
    if (multiword && i % 5 == 4) name = "c" + std::to_string(i - 1) + " x" + std::to_string(i);
    names.push_back(name);
  }
  std::vector<Triple> edges;
  std::uniform_int_distribution<std::size_t> pick(0, n_concepts - 1);
  std::uniform_int_distribution<std::size_t> rel(0, ccprobe::kRelationCount - 1);
  for (std::size_t e = 0; e < n_edges; ++e) {
    edges.emplace_back(names[pick(rng)], ccprobe::kAllRelations[rel(rng)], names[pick(rng)]);
  }
  return edges;
}

inline std::vector<ccprobe::Verdict> random_verdicts(std::mt19937_64& rng, std::size_t n) {
  std::vector<ccprobe::Verdict> out;
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<std::size_t> rel(0, ccprobe::kRelationCount - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto polarity = coin(rng) ? ccprobe::Polarity::Positive : ccprobe::Polarity::Negative;
    const bool correct = coin(rng) == 1;
    const auto decided = correct ? polarity
                                 : (polarity == ccprobe::Polarity::Positive ? ccprobe::Polarity::Negative
                                                                             : ccprobe::Polarity::Positive);
    out.push_back(ccprobe::Verdict{
        ccprobe::Fact{ccprobe::Concept("a" + std::to_string(i)), ccprobe::kAllRelations[rel(rng)],
                      ccprobe::Concept("b" + std::to_string(i)), polarity},
        decided, ccprobe::WinningVariant{1, 0, "Yes"}, 0.0, correct});
  }
  return out;
}

}  // namespace oracle
