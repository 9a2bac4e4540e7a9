#pragma once
// Fact-question templates, meta-prompts and answer pairs, and the expansion
// of facts and anchors into scoreable prompt variants.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccprobe/extraction.hpp"
#include "ccprobe/kb_store.hpp"

namespace ccprobe {

// Pattern with exactly one "{c1}" and one "{c2}" slot.
struct RelationTemplate {
  RelationKind relation;
  std::string pattern;
};

// Pattern with one "{question}" slot and optionally "{label_a}"/"{label_b}".
struct MetaPrompt {
  int id = 0;
  std::string pattern;
  bool has_labels() const;
};

struct AnswerPair {
  std::string positive_word;
  std::string negative_word;
};

inline constexpr int kPromptTablesVersion = 1;

class PromptTables {
 public:
  // The shipped tables (identical to data/prompts.json).
  static const PromptTables& defaults();
  // Loads a versioned JSON table file; throws ConfigError on any violation.
  static PromptTables load(const std::filesystem::path& path);
  static PromptTables from_json_text(std::string_view text);
  std::string to_json_text() const;

  const RelationTemplate& relation_template(RelationKind r) const {
    return templates_[relation_index(r)];
  }
  const std::vector<MetaPrompt>& meta_prompts() const { return meta_prompts_; }
  const std::vector<AnswerPair>& answer_pairs() const { return answer_pairs_; }

 private:
  void validate() const;

  std::array<RelationTemplate, kRelationCount> templates_;
  std::vector<MetaPrompt> meta_prompts_;
  std::vector<AnswerPair> answer_pairs_;
};

struct VariantOptions {
  // Cross label-free meta-prompts with every answer pair (full product).
  // When false they only use the first pair.
  bool cross_unlabeled_meta_prompts = true;
};

struct PromptVariant {
  std::string subject;  // fact triple key or anchor id
  int meta_prompt_id = 0;
  std::optional<std::size_t> answer_pair_id;   // facts only
  std::string candidate_word;
  std::optional<Polarity> candidate_polarity;  // facts only
  std::optional<std::size_t> choice_index;     // anchors only
  std::string prompt_text;
};

// Substitutes the fact's concepts into its relation template verbatim.
std::string render_fact_question(const Fact& fact,
                                 const PromptTables& tables = PromptTables::defaults());

// Drops one trailing '?' (and whitespace before it).
std::string strip_question_mark(std::string_view question);

// Fills a meta-prompt. `question` is inserted after strip_question_mark.
std::string render_meta_prompt(const MetaPrompt& meta, std::string_view question,
                               std::string_view label_a, std::string_view label_b);

// Enumeration order: meta-prompt, answer pair, then positive before negative.
std::vector<PromptVariant> enumerate_fact_variants(
    const Fact& fact, const PromptTables& tables = PromptTables::defaults(),
    const VariantOptions& options = {});

// One variant per (meta-prompt, choice); label slots list all choices.
std::vector<PromptVariant> enumerate_anchor_variants(
    const AnchorExample& anchor, const PromptTables& tables = PromptTables::defaults());

// Prompt for an anchor under one meta-prompt (label slots list the choices).
std::string render_anchor_prompt(const AnchorExample& anchor, const MetaPrompt& meta);

}  // namespace ccprobe
