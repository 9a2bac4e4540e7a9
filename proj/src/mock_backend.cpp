#include "ccprobe/mock_backend.hpp"

#include <sstream>

#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"

namespace ccprobe {

void MockOracleConfig::validate() const {
  auto check = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string("mock ") + name + " must lie in [0, 1]");
    }
  };
  check(knowledge_rate, "knowledge_rate");
  check(anchor_policy.coupling, "coupling");
  check(anchor_policy.threshold, "threshold");
  check(anchor_policy.base_rate, "base_rate");
  check(yes_bias, "yes_bias");
}

bool mock_knows(const MockOracleConfig& config, const Fact& fact) {
  if (fact.polarity != Polarity::Positive) return false;
  const auto key = fact.triple_key();
  if (config.known_facts.contains(key)) return true;
  return config.knowledge_rate > 0.0 && keyed_unit(config.seed, {"know", key}) < config.knowledge_rate;
}

double mock_known_fraction(const MockOracleConfig& config, std::span<const Fact> background) {
  std::size_t total = 0;
  std::size_t known = 0;
  for (const auto& f : background) {
    if (f.polarity != Polarity::Positive) continue;
    ++total;
    if (mock_knows(config, f)) ++known;
  }
  return total == 0 ? 0.0 : static_cast<double>(known) / static_cast<double>(total);
}

bool mock_answers_correctly(const MockOracleConfig& config, const AnchorTag& tag) {
  const auto& policy = config.anchor_policy;
  const bool coupled = keyed_unit(config.seed, {"couple", tag.anchor_id}) < policy.coupling;
  if (coupled) {
    return mock_known_fraction(config, tag.background) >= policy.threshold;
  }
  return keyed_unit(config.seed, {"base", tag.anchor_id}) < policy.base_rate;
}

namespace {

double jitter(const MockOracleConfig& config, const ScoreQuery& query, std::size_t j) {
  return kMockJitter * keyed_unit(config.seed, {"jitter", query.prompt, query.continuations[j]});
}

}  // namespace

ScoreResult mock_score(const MockOracleConfig& config, const ScoreQuery& query) {
  ScoreResult result;
  result.log_likelihoods.resize(query.continuations.size());

  if (const auto* fact_tag = std::get_if<FactTag>(&query.tag)) {
    if (fact_tag->polarities.size() != query.continuations.size()) {
      throw MockProtocolError("fact tag polarity count does not match continuations");
    }
    const bool says_yes = mock_knows(config, fact_tag->fact);
    for (std::size_t j = 0; j < query.continuations.size(); ++j) {
      const bool positive_word = fact_tag->polarities[j] == Polarity::Positive;
      double value = (positive_word == says_yes) ? 1.0 : -1.0;
      if (positive_word) value += kMockYesShift * config.yes_bias;
      result.log_likelihoods[j] = value + jitter(config, query, j);
    }
    return result;
  }

  if (const auto* anchor_tag = std::get_if<AnchorTag>(&query.tag)) {
    if (anchor_tag->choice_indices.size() != query.continuations.size()) {
      throw MockProtocolError("anchor tag choice count does not match continuations");
    }
    std::size_t target = anchor_tag->answer_index;
    if (!mock_answers_correctly(config, *anchor_tag)) {
      // A keyed wrong choice among the other four.
      auto engine = keyed_engine(config.seed, {"wrong", anchor_tag->anchor_id});
      const auto offset = 1 + uniform_index(engine, kChoiceCount - 1);
      target = (anchor_tag->answer_index + offset) % kChoiceCount;
    }
    for (std::size_t j = 0; j < query.continuations.size(); ++j) {
      const double value = anchor_tag->choice_indices[j] == target ? 1.0 : -1.0;
      result.log_likelihoods[j] = value + jitter(config, query, j);
    }
    return result;
  }

  throw MockProtocolError("query carries no fact or anchor metadata: " + query.prompt);
}

MockBackend::MockBackend(MockOracleConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::vector<ScoreResult> MockBackend::score_batch(std::span<const ScoreQuery> queries) {
  std::vector<ScoreResult> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(mock_score(config_, q));
  return out;
}

std::string MockBackend::describe() const {
  std::ostringstream s;
  s << "mock(knowledge_rate=" << config_.knowledge_rate
    << ",coupling=" << config_.anchor_policy.coupling
    << ",threshold=" << config_.anchor_policy.threshold
    << ",base_rate=" << config_.anchor_policy.base_rate << ",yes_bias=" << config_.yes_bias
    << ",seed=" << config_.seed << ")";
  return s.str();
}

}  // namespace ccprobe
