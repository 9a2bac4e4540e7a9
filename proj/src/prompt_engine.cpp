#include "ccprobe/prompt_engine.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "ccprobe/errors.hpp"

namespace ccprobe {

using nlohmann::json;

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// Fills slots in a single left-to-right pass so substituted values are never
// rescanned for slot markers.
std::string fill(std::string_view pattern,
                 std::initializer_list<std::pair<std::string_view, std::string_view>> slots) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    bool replaced = false;
    for (const auto& [slot, value] : slots) {
      if (pattern.substr(i, slot.size()) == slot) {
        out.append(value);
        i += slot.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) out.push_back(pattern[i++]);
  }
  return out;
}


}  // namespace

bool MetaPrompt::has_labels() const {
  return pattern.find("{label_a}") != std::string::npos;
}

const PromptTables& PromptTables::defaults() {
  static const PromptTables tables = [] {
    json doc;
    doc["version"] = kPromptTablesVersion;
    doc["relation_templates"] = {
        {"IsA", "Is {c1} a {c2}?"},
        {"HasA", "does {c1} has a {c2}?"},
        {"Antonym", "Is {c1} an antonym of {c2}?"},
        {"Causes", "does {c1} cause {c2}?"},
        {"Desires", "does a {c1} desires {c2}?"},
        {"FormOf", "Is {c1} a form of of {c2}?"},
        {"MadeOf", "Is the {c1} made of {c2}?"},
        {"PartOf", "Is {c1} a part of {c2}?"},
        {"RelatedTo", "Is {c1} related to {c2}?"},
        {"SimilarTo", "Is {c1} similar to {c2}?"},
        {"Synonym", "Is {c1} a synonym of {c2}?"},
        {"UsedFor", "Are {c1} used for {c2}?"},
        {"AtLocation", "Is {c1} at location {c2}?"},
        {"CapableOf", "Is a {c1} capable of {c2}?"},
    };
    doc["meta_prompts"] = json::array({
        {{"id", 1}, {"pattern", "{question}?"}},
        {{"id", 2}, {"pattern", "{question}. Is this true?"}},
        {{"id", 3},
         {"pattern", "Answer this question as '{label_a}' or '{label_b}'. Question: {question}?"}},
        {{"id", 4},
         {"pattern",
          "Each item is a question and answer. Answer is one of '{label_a}' or "
          "'{label_b}'. Question: {question}? Answer:"}},
        {{"id", 5}, {"pattern", "Pick '{label_a}' or '{label_b}'. Question: {question}?Answer:"}},
    });
    doc["answer_pairs"] = json::array({
        json::array({"Yes", "No"}),
        json::array({"True", "False"}),
        json::array({"Right", "Wrong"}),
        json::array({"Correct", "Incorrect"}),
        json::array({"Positive", "Negative"}),
        json::array({"Pass", "Fail"}),
        json::array({"On", "Off"}),
    });
    return from_json_text(doc.dump());
  }();
  return tables;
}

PromptTables PromptTables::from_json_text(std::string_view text) {
  PromptTables tables;
  try {
    const json doc = json::parse(text);
    if (doc.at("version").get<int>() != kPromptTablesVersion) {
      throw ConfigError("unsupported prompt tables version");
    }
    const auto& templates = doc.at("relation_templates");
    for (auto r : kAllRelations) {
      const auto name = std::string(relation_name(r));
      if (!templates.contains(name)) throw ConfigError("missing template for " + name);
      tables.templates_[relation_index(r)] = {r, templates.at(name).get<std::string>()};
    }
    if (templates.size() != kRelationCount) {
      throw ConfigError("template table names an unknown relation");
    }
    for (const auto& m : doc.at("meta_prompts")) {
      tables.meta_prompts_.push_back({m.at("id").get<int>(), m.at("pattern").get<std::string>()});
    }
    for (const auto& p : doc.at("answer_pairs")) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("answer pair must have two words");
      tables.answer_pairs_.push_back({p[0].get<std::string>(), p[1].get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prompt tables: ") + e.what());
  }
  tables.validate();
  return tables;
}

PromptTables PromptTables::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prompt tables: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string PromptTables::to_json_text() const {
  json doc;
  doc["version"] = kPromptTablesVersion;
  json templates = json::object();
  for (const auto& t : templates_) templates[std::string(relation_name(t.relation))] = t.pattern;
  doc["relation_templates"] = templates;
  doc["meta_prompts"] = json::array();
  for (const auto& m : meta_prompts_) {
    doc["meta_prompts"].push_back({{"id", m.id}, {"pattern", m.pattern}});
  }
  doc["answer_pairs"] = json::array();
  for (const auto& p : answer_pairs_) {
    doc["answer_pairs"].push_back({p.positive_word, p.negative_word});
  }
  return doc.dump(2) + "\n";
}

void PromptTables::validate() const {
  for (const auto& t : templates_) {
    if (count_occurrences(t.pattern, "{c1}") != 1 || count_occurrences(t.pattern, "{c2}") != 1) {
      throw ConfigError("template for " + std::string(relation_name(t.relation)) +
                        " needs exactly one {c1} and one {c2}");
    }
  }
  if (meta_prompts_.empty()) throw ConfigError("no meta-prompts");
  std::set<int> ids;
  for (const auto& m : meta_prompts_) {
    if (!ids.insert(m.id).second) throw ConfigError("duplicate meta-prompt id");
    if (count_occurrences(m.pattern, "{question}") != 1) {
      throw ConfigError("meta-prompt " + std::to_string(m.id) + " needs one {question}");
    }
    auto a = count_occurrences(m.pattern, "{label_a}");
    auto b = count_occurrences(m.pattern, "{label_b}");
    if (a != b || a > 1) {
      throw ConfigError("meta-prompt " + std::to_string(m.id) +
                        " must have both label slots once or neither");
    }
  }
  if (answer_pairs_.empty()) throw ConfigError("no answer pairs");
  std::set<std::string> words;
  for (const auto& p : answer_pairs_) {
    if (p.positive_word.empty() || p.negative_word.empty()) {
      throw ConfigError("empty answer word");
    }
    if (!words.insert(p.positive_word).second || !words.insert(p.negative_word).second) {
      throw ConfigError("answer words must be distinct across pairs");
    }
  }
}

std::string render_fact_question(const Fact& fact, const PromptTables& tables) {
  const auto& t = tables.relation_template(fact.relation);
  return fill(t.pattern, {{"{c1}", fact.c1.label()}, {"{c2}", fact.c2.label()}});
}

std::string strip_question_mark(std::string_view question) {
  auto end = question.find_last_not_of(" \t\r\n");
  if (end == std::string_view::npos) return {};
  question = question.substr(0, end + 1);
  if (question.ends_with('?')) {
    question.remove_suffix(1);
    auto trimmed = question.find_last_not_of(" \t");
    question = trimmed == std::string_view::npos ? std::string_view{} : question.substr(0, trimmed + 1);
  }
  return std::string(question);
}

std::string render_meta_prompt(const MetaPrompt& meta, std::string_view question,
                               std::string_view label_a, std::string_view label_b) {
  const auto stripped = strip_question_mark(question);
  return fill(meta.pattern,
              {{"{question}", stripped}, {"{label_a}", label_a}, {"{label_b}", label_b}});
}

std::vector<PromptVariant> enumerate_fact_variants(const Fact& fact, const PromptTables& tables,
                                                   const VariantOptions& options) {
  const auto question = render_fact_question(fact, tables);
  const auto subject = fact.triple_key();
  std::vector<PromptVariant> out;
  for (const auto& meta : tables.meta_prompts()) {
    const auto& pairs = tables.answer_pairs();
    const std::size_t pair_count =
        (meta.has_labels() || options.cross_unlabeled_meta_prompts) ? pairs.size() : 1;
    for (std::size_t p = 0; p < pair_count; ++p) {
      const auto prompt =
          render_meta_prompt(meta, question, pairs[p].positive_word, pairs[p].negative_word);
      for (auto polarity : {Polarity::Positive, Polarity::Negative}) {
        PromptVariant v;
        v.subject = subject;
        v.meta_prompt_id = meta.id;
        v.answer_pair_id = p;
        v.candidate_word =
            polarity == Polarity::Positive ? pairs[p].positive_word : pairs[p].negative_word;
        v.candidate_polarity = polarity;
        v.prompt_text = prompt;
        out.push_back(std::move(v));
      }
    }
  }
  return out;
}

std::string render_anchor_prompt(const AnchorExample& anchor, const MetaPrompt& meta) {
  // "'s1', 's2', 's3', 's4' or 's5'" through the two label slots.
  std::string head;
  for (std::size_t k = 0; k + 1 < anchor.choices.size(); ++k) {
    if (k) head += "', '";
    head += anchor.choices[k];
  }
  return render_meta_prompt(meta, anchor.question, head, anchor.choices.back());
}

std::vector<PromptVariant> enumerate_anchor_variants(const AnchorExample& anchor,
                                                     const PromptTables& tables) {
  std::vector<PromptVariant> out;
  for (const auto& meta : tables.meta_prompts()) {
    const auto prompt = render_anchor_prompt(anchor, meta);
    for (std::size_t k = 0; k < anchor.choices.size(); ++k) {
      PromptVariant v;
      v.subject = anchor.id;
      v.meta_prompt_id = meta.id;
      v.candidate_word = anchor.choices[k];
      v.choice_index = k;
      v.prompt_text = prompt;
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace ccprobe
