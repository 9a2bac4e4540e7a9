#pragma once
// Scorer contract and the rules that turn variant likelihoods into fact
// verdicts and anchor answers.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ccprobe/extraction.hpp"
#include "ccprobe/kb_store.hpp"
#include "ccprobe/prompt_engine.hpp"

namespace ccprobe {

enum class Normalization { Sum, PerTokenMean };

std::string_view normalization_name(Normalization n) noexcept;  // "sum" | "mean"
std::optional<Normalization> parse_normalization(std::string_view name) noexcept;

// Run-side metadata riding along with a query. Real backends ignore it; the
// mock oracle relies on it instead of parsing prompt text.
struct FactTag {
  Fact fact;
  std::vector<Polarity> polarities;  // per continuation
};

struct AnchorTag {
  std::string anchor_id;
  std::size_t answer_index = 0;
  std::vector<std::size_t> choice_indices;  // per continuation
  std::vector<Fact> background;             // the anchor's positive facts
};

using QueryTag = std::variant<std::monostate, FactTag, AnchorTag>;

struct ScoreQuery {
  std::string prompt;
  std::vector<std::string> continuations;
  Normalization normalization = Normalization::PerTokenMean;
  QueryTag tag;

  // Throws PreconditionError on empty or blank continuations.
  void validate() const;
};

struct ScoreResult {
  std::vector<double> log_likelihoods;  // natural log, one per continuation
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  // Scores queries in order. Implementations must be safe to call from up to
  // max_in_flight() threads at once.
  virtual std::vector<ScoreResult> score_batch(std::span<const ScoreQuery> queries) = 0;
  virtual std::size_t max_in_flight() const { return 1; }
  virtual std::string describe() const = 0;
};

// Validates each query, scores them as one batch, then checks arity and
// finiteness (ProtocolError on violation).
std::vector<ScoreResult> score_checked(ScorerBackend& backend,
                                       std::span<const ScoreQuery> queries);
ScoreResult score(ScorerBackend& backend, const ScoreQuery& query);

enum class DecisionRule { GlobalArgmax, PerMetaPromptVote };

std::string_view decision_rule_name(DecisionRule r) noexcept;
std::optional<DecisionRule> parse_decision_rule(std::string_view name) noexcept;

struct WinningVariant {
  int meta_prompt_id = 0;
  std::size_t answer_pair_id = 0;
  std::string word;
  friend bool operator==(const WinningVariant&, const WinningVariant&) = default;
};

struct Verdict {
  Fact fact;
  Polarity decided = Polarity::Negative;
  WinningVariant winner;
  double winning_score = 0.0;
  bool correct = false;  // decided == fact.polarity
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct AnchorDecision {
  std::string anchor_id;
  std::size_t chosen_index = 0;
  std::array<double, kChoiceCount> choice_scores{};
  bool correct = false;
  friend bool operator==(const AnchorDecision&, const AnchorDecision&) = default;
};

// Pure decision over precomputed variant scores (scores[i] belongs to
// variants[i]). Exact ties resolve to the earliest variant in the span.
Verdict decide_from_scores(const Fact& fact, std::span<const PromptVariant> variants,
                           std::span<const double> scores, DecisionRule rule);

// Per-choice aggregate is the max over meta-prompts; ties pick the lowest
// choice index.
AnchorDecision decide_anchor_from_scores(const AnchorExample& anchor,
                                         std::span<const PromptVariant> variants,
                                         std::span<const double> scores);

class DecisionEngine {
 public:
  DecisionEngine(const PromptTables& tables = PromptTables::defaults(),
                 DecisionRule rule = DecisionRule::GlobalArgmax,
                 Normalization normalization = Normalization::PerTokenMean,
                 VariantOptions variant_options = {});

  // All variants of the fact go out in a single batch.
  Verdict decide_fact(const Fact& fact, ScorerBackend& backend) const;
  AnchorDecision decide_anchor(const AnchorExample& anchor, std::span<const Fact> background,
                               ScorerBackend& backend) const;

  // Queries exactly as decide_fact/decide_anchor would issue them.
  std::vector<ScoreQuery> fact_queries(const Fact& fact,
                                       std::span<const PromptVariant> variants) const;
  std::vector<ScoreQuery> anchor_queries(const AnchorExample& anchor,
                                         std::span<const Fact> background) const;

  DecisionRule rule() const { return rule_; }
  Normalization normalization() const { return normalization_; }
  const PromptTables& tables() const { return *tables_; }

 private:
  const PromptTables* tables_;
  DecisionRule rule_;
  Normalization normalization_;
  VariantOptions variant_options_;
};

}  // namespace ccprobe
