#include "ccprobe/decision_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ccprobe/errors.hpp"

namespace ccprobe {

std::string_view normalization_name(Normalization n) noexcept {
  return n == Normalization::Sum ? "sum" : "mean";
}

std::optional<Normalization> parse_normalization(std::string_view name) noexcept {
  if (name == "sum") return Normalization::Sum;
  if (name == "mean" || name == "per-token-mean") return Normalization::PerTokenMean;
  return std::nullopt;
}

std::string_view decision_rule_name(DecisionRule r) noexcept {
  return r == DecisionRule::GlobalArgmax ? "global-argmax" : "per-meta-prompt-vote";
}

std::optional<DecisionRule> parse_decision_rule(std::string_view name) noexcept {
  if (name == "global-argmax") return DecisionRule::GlobalArgmax;
  if (name == "per-meta-prompt-vote") return DecisionRule::PerMetaPromptVote;
  return std::nullopt;
}

void ScoreQuery::validate() const {
  if (continuations.empty()) throw PreconditionError("score query has no continuations");
  for (const auto& c : continuations) {
    if (normalize_label(c).empty()) throw PreconditionError("score query has an empty continuation");
  }
}

std::vector<ScoreResult> score_checked(ScorerBackend& backend,
                                       std::span<const ScoreQuery> queries) {
  for (const auto& q : queries) q.validate();
  auto results = backend.score_batch(queries);
  if (results.size() != queries.size()) {
    throw ProtocolError("backend returned " + std::to_string(results.size()) +
                        " results for " + std::to_string(queries.size()) + " queries");
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& values = results[i].log_likelihoods;
    if (values.size() != queries[i].continuations.size()) {
      throw ProtocolError("arity mismatch for prompt: " + queries[i].prompt);
    }
    if (!std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
      throw ProtocolError("non-finite log-likelihood for prompt: " + queries[i].prompt);
    }
  }
  return results;
}

ScoreResult score(ScorerBackend& backend, const ScoreQuery& query) {
  return std::move(score_checked(backend, std::span(&query, 1)).front());
}

Verdict decide_from_scores(const Fact& fact, std::span<const PromptVariant> variants,
                           std::span<const double> scores, DecisionRule rule) {
  if (variants.empty() || variants.size() != scores.size()) {
    throw PreconditionError("decide_from_scores: need one score per variant");
  }
  auto best_of = [&](auto&& keep) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < variants.size(); ++i) {
      if (!keep(variants[i])) continue;
      if (!best || scores[i] > scores[*best]) best = i;
    }
    return best;
  };

  Polarity decided;
  std::size_t winner;
  if (rule == DecisionRule::GlobalArgmax) {
    winner = *best_of([](const PromptVariant&) { return true; });
    decided = variants[winner].candidate_polarity.value_or(Polarity::Negative);
  } else {
    // Meta-prompt ids in first-seen order.
    std::vector<int> metas;
    for (const auto& v : variants) {
      if (std::find(metas.begin(), metas.end(), v.meta_prompt_id) == metas.end()) {
        metas.push_back(v.meta_prompt_id);
      }
    }
    std::size_t positive_votes = 0;
    for (int meta : metas) {
      auto local = best_of([meta](const PromptVariant& v) { return v.meta_prompt_id == meta; });
      if (variants[*local].candidate_polarity == Polarity::Positive) ++positive_votes;
    }
    decided = 2 * positive_votes > metas.size() ? Polarity::Positive : Polarity::Negative;
    winner = *best_of([decided](const PromptVariant& v) { return v.candidate_polarity == decided; });
  }
  const auto& w = variants[winner];
  return Verdict{fact,
                 decided,
                 WinningVariant{w.meta_prompt_id, w.answer_pair_id.value_or(0), w.candidate_word},
                 scores[winner],
                 decided == fact.polarity};
}

AnchorDecision decide_anchor_from_scores(const AnchorExample& anchor,
                                         std::span<const PromptVariant> variants,
                                         std::span<const double> scores) {
  if (variants.size() != scores.size()) {
    throw PreconditionError("decide_anchor_from_scores: need one score per variant");
  }
  AnchorDecision decision;
  decision.anchor_id = anchor.id;
  std::array<bool, kChoiceCount> seen{};
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const auto k = variants[i].choice_index.value_or(kChoiceCount);
    if (k >= kChoiceCount) throw PreconditionError("anchor variant without a valid choice index");
    if (!seen[k] || scores[i] > decision.choice_scores[k]) decision.choice_scores[k] = scores[i];
    seen[k] = true;
  }
  if (!std::all_of(seen.begin(), seen.end(), [](bool s) { return s; })) {
    throw PreconditionError("anchor variants do not cover every choice");
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < kChoiceCount; ++k) {
    if (decision.choice_scores[k] > decision.choice_scores[best]) best = k;
  }
  decision.chosen_index = best;
  decision.correct = best == anchor.answer_index;
  return decision;
}

DecisionEngine::DecisionEngine(const PromptTables& tables, DecisionRule rule,
                               Normalization normalization, VariantOptions variant_options)
    : tables_(&tables),
      rule_(rule),
      normalization_(normalization),
      variant_options_(variant_options) {}

std::vector<ScoreQuery> DecisionEngine::fact_queries(
    const Fact& fact, std::span<const PromptVariant> variants) const {
  // Consecutive variants sharing a prompt form one query.
  std::vector<ScoreQuery> queries;
  for (const auto& v : variants) {
    if (queries.empty() || queries.back().prompt != v.prompt_text) {
      ScoreQuery q;
      q.prompt = v.prompt_text;
      q.normalization = normalization_;
      q.tag = FactTag{fact, {}};
      queries.push_back(std::move(q));
    }
    auto& q = queries.back();
    q.continuations.push_back(v.candidate_word);
    std::get<FactTag>(q.tag).polarities.push_back(v.candidate_polarity.value_or(Polarity::Negative));
  }
  return queries;
}

Verdict DecisionEngine::decide_fact(const Fact& fact, ScorerBackend& backend) const {
  const auto variants = enumerate_fact_variants(fact, *tables_, variant_options_);
  const auto queries = fact_queries(fact, variants);
  const auto results = score_checked(backend, queries);
  std::vector<double> flat;
  flat.reserve(variants.size());
  for (const auto& r : results) flat.insert(flat.end(), r.log_likelihoods.begin(), r.log_likelihoods.end());
  return decide_from_scores(fact, variants, flat, rule_);
}

std::vector<ScoreQuery> DecisionEngine::anchor_queries(const AnchorExample& anchor,
                                                       std::span<const Fact> background) const {
  std::vector<ScoreQuery> queries;
  for (const auto& meta : tables_->meta_prompts()) {
    ScoreQuery q;
    q.prompt = render_anchor_prompt(anchor, meta);
    q.normalization = normalization_;
    AnchorTag tag{anchor.id, anchor.answer_index, {}, {background.begin(), background.end()}};
    for (std::size_t k = 0; k < anchor.choices.size(); ++k) {
      q.continuations.push_back(anchor.choices[k]);
      tag.choice_indices.push_back(k);
    }
    q.tag = std::move(tag);
    queries.push_back(std::move(q));
  }
  return queries;
}

AnchorDecision DecisionEngine::decide_anchor(const AnchorExample& anchor,
                                             std::span<const Fact> background,
                                             ScorerBackend& backend) const {
  anchor.validate();
  const auto variants = enumerate_anchor_variants(anchor, *tables_);
  const auto queries = anchor_queries(anchor, background);
  const auto results = score_checked(backend, queries);
  std::vector<double> flat;
  for (const auto& r : results) flat.insert(flat.end(), r.log_likelihoods.begin(), r.log_likelihoods.end());
  return decide_anchor_from_scores(anchor, variants, flat);
}

}  // namespace ccprobe
