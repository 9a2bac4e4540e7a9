#include <doctest.h>

#include <map>
#include <random>
#include <set>

#include "ccprobe/errors.hpp"
#include "ccprobe/prompt_engine.hpp"
#include "ccprobe/synthetic.hpp"

using namespace ccprobe;

namespace {

Fact fact(const char* a, RelationKind r, const char* b, Polarity p = Polarity::Positive) {
  return Fact{Concept(a), r, Concept(b), p};
}

struct Golden {
  const char* c1;
  RelationKind relation;
  const char* c2;
  const char* text;
};

// Sample instances of the per-relation templates.
const Golden kSamples[] = {
    {"security", RelationKind::IsA, "department", "Is security a department?"},
    {"house", RelationKind::HasA, "basement", "does house has a basement?"},
    {"clever", RelationKind::Antonym, "dull", "Is clever an antonym of dull?"},
    {"fencing", RelationKind::Causes, "small cuts", "does fencing cause small cuts?"},
    {"dog", RelationKind::Desires, "affection", "does a dog desires affection?"},
    {"partying", RelationKind::FormOf, "party", "Is partying a form of of party?"},
    {"car", RelationKind::MadeOf, "metal", "Is the car made of metal?"},
    {"book", RelationKind::PartOf, "library", "Is book a part of library?"},
    {"doctor", RelationKind::RelatedTo, "illness", "Is doctor related to illness?"},
    {"ridiculous", RelationKind::SimilarTo, "silly", "Is ridiculous similar to silly?"},
    {"reply", RelationKind::Synonym, "answer", "Is reply a synonym of answer?"},
    {"clothes", RelationKind::UsedFor, "wearing", "Are clothes used for wearing?"},
    {"door", RelationKind::AtLocation, "library", "Is door at location library?"},
    {"child", RelationKind::CapableOf, "form opinions", "Is a child capable of form opinions?"},
};

// Negative examples rendered through the same templates.
const Golden kNegatives[] = {
    {"drill", RelationKind::IsA, "clamp", "Is drill a clamp?"},
    {"mammals", RelationKind::HasA, "watch", "does mammals has a watch?"},
    {"wash", RelationKind::Antonym, "detached", "Is wash an antonym of detached?"},
    {"going into coma", RelationKind::Causes, "company", "does going into coma cause company?"},
    {"person", RelationKind::Desires, "schizophrenia", "does a person desires schizophrenia?"},
    {"car", RelationKind::MadeOf, "rain", "Is the car made of rain?"},
    {"gulf", RelationKind::PartOf, "round", "Is gulf a part of round?"},
    {"class", RelationKind::RelatedTo, "cornstarch", "Is class related to cornstarch?"},
    {"lie", RelationKind::SimilarTo, "botany", "Is lie similar to botany?"},
    {"heart", RelationKind::Synonym, "volition", "Is heart a synonym of volition?"},
    {"hair", RelationKind::UsedFor, "council", "Are hair used for council?"},
    {"monkey", RelationKind::AtLocation, "fuzzball", "Is monkey at location fuzzball?"},
    {"computer", RelationKind::CapableOf, "pillow", "Is a computer capable of pillow?"},
};

std::string tables_with(const std::string& key, const std::string& value) {
  auto text = PromptTables::defaults().to_json_text();
  const auto at = text.find(key);
  REQUIRE(at != std::string::npos);
  text.replace(at, key.size(), value);
  return text;
}

}  // namespace

TEST_SUITE("prompt_engine") {
  TEST_CASE("relation template samples") {
    CHECK(render_fact_question(fact("book", RelationKind::UsedFor, "school")) ==
          "Are book used for school?");
    std::set<RelationKind> covered;
    for (const auto& g : kSamples) {
      CAPTURE(g.text);
      CHECK(render_fact_question(fact(g.c1, g.relation, g.c2)) == g.text);
      covered.insert(g.relation);
    }
    CHECK(covered.size() == kRelationCount);
  }

  TEST_CASE("negative examples render through the same templates") {
    for (const auto& g : kNegatives) {
      CAPTURE(g.text);
      CHECK(render_fact_question(fact(g.c1, g.relation, g.c2, Polarity::Negative)) == g.text);
    }
    // FormOf keeps the doubled "of" of its sample instance.
    CHECK(render_fact_question(fact("recycled", RelationKind::FormOf, "burned")) ==
          "Is recycled a form of of burned?");
  }

  TEST_CASE("meta-prompt rendering") {
    const auto& metas = PromptTables::defaults().meta_prompts();
    REQUIRE(metas.size() == 5);
    const std::string q = "Are book used for school?";
    CHECK(render_meta_prompt(metas[0], q, "Yes", "No") == "Are book used for school?");
    CHECK(render_meta_prompt(metas[1], q, "Yes", "No") == "Are book used for school. Is this true?");
    CHECK(render_meta_prompt(metas[2], "Are book used for school", "Yes", "No") ==
          "Answer this question as 'Yes' or 'No'. Question: Are book used for school?");
    CHECK(render_meta_prompt(metas[3], q, "True", "False") ==
          "Each item is a question and answer. Answer is one of 'True' or 'False'. "
          "Question: Are book used for school? Answer:");
    CHECK(render_meta_prompt(metas[4], q, "On", "Off") ==
          "Pick 'On' or 'Off'. Question: Are book used for school?Answer:");
    CHECK_FALSE(metas[0].has_labels());
    CHECK(metas[2].has_labels());
  }

  TEST_CASE("question mark stripping") {
    CHECK(strip_question_mark("Is it?") == "Is it");
    CHECK(strip_question_mark("Is it ?  ") == "Is it");
    CHECK(strip_question_mark("Is it??") == "Is it?");
    CHECK(strip_question_mark("no mark") == "no mark");
    CHECK(strip_question_mark("?") == "");
  }

  TEST_CASE("slot values are not rescanned") {
    CHECK(render_fact_question(fact("{c2}", RelationKind::IsA, "x")) == "Is {c2} a x?");
  }

  TEST_CASE("fact variants are the full product without duplicates") {
    const auto f = fact("book", RelationKind::UsedFor, "school");
    const auto& tables = PromptTables::defaults();
    const auto variants = enumerate_fact_variants(f);
    REQUIRE(variants.size() == 70);
    std::set<std::tuple<int, std::size_t, std::string>> keys;
    std::set<std::pair<std::string, std::string>> prompt_word;
    for (const auto& v : variants) {
      REQUIRE(v.answer_pair_id);
      REQUIRE(v.candidate_polarity);
      const auto& pair = tables.answer_pairs()[*v.answer_pair_id];
      CHECK(v.candidate_word == (*v.candidate_polarity == Polarity::Positive ? pair.positive_word
                                                                            : pair.negative_word));
      CHECK(v.subject == f.triple_key());
      CHECK_FALSE(v.choice_index);
      keys.emplace(v.meta_prompt_id, *v.answer_pair_id, v.candidate_word);
      prompt_word.emplace(v.prompt_text, v.candidate_word);
    }
    CHECK(keys.size() == 70);
    // Label-free meta-prompts reuse one text; the words still differ.
    CHECK(prompt_word.size() == 70);
    CHECK(variants[0].meta_prompt_id == 1);
    CHECK(variants[0].prompt_text == "Are book used for school?");
    CHECK(variants[0].candidate_word == "Yes");
    CHECK(variants[1].candidate_word == "No");

    const auto narrow = enumerate_fact_variants(f, tables, {false});
    CHECK(narrow.size() == 2 * 2 + 3 * 7 * 2);
  }

  TEST_CASE("rendering is a pure function") {
    const auto f = fact("ice cream", RelationKind::IsA, "dessert");
    const auto a = enumerate_fact_variants(f);
    const auto b = enumerate_fact_variants(f);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].prompt_text == b[i].prompt_text);
      CHECK(a[i].candidate_word == b[i].candidate_word);
    }
  }

  TEST_CASE("anchor variants") {
    AnchorExample a;
    a.id = "x1";
    a.question = "Where do you keep a book?";
    a.choices = {"shelf", "oven", "river", "sky", "shoe"};
    const auto variants = enumerate_anchor_variants(a);
    REQUIRE(variants.size() == 25);
    for (const auto& v : variants) {
      REQUIRE(v.choice_index);
      CHECK(v.candidate_word == a.choices[*v.choice_index]);
      CHECK_FALSE(v.answer_pair_id);
      CHECK_FALSE(v.candidate_polarity);
    }
    CHECK(variants[0].prompt_text == "Where do you keep a book?");
    CHECK(variants[10].prompt_text ==
          "Answer this question as 'shelf', 'oven', 'river', 'sky' or 'shoe'. "
          "Question: Where do you keep a book?");
  }

  TEST_CASE("anchor prompts differ across distinct questions") {
    SynthOptions o;
    o.anchors = 400;
    const auto corpus = generate_synthetic(o);
    std::set<std::string> questions;
    std::map<std::string, std::string> owner;
    for (const auto& a : corpus.anchors) {
      if (!questions.insert(a.question).second) continue;
      for (const auto& v : enumerate_anchor_variants(a)) {
        const auto [it, fresh] = owner.emplace(v.prompt_text + '\x1f' + v.candidate_word, a.id);
        if (!fresh) CHECK(it->second == a.id);
      }
    }
  }

  TEST_CASE("shipped table file equals the built-in defaults") {
    const auto loaded = PromptTables::load(std::filesystem::path(CCPROBE_SOURCE_DIR) / "data" / "prompts.json");
    CHECK(loaded.to_json_text() == PromptTables::defaults().to_json_text());
    const auto back = PromptTables::from_json_text(PromptTables::defaults().to_json_text());
    CHECK(back.to_json_text() == PromptTables::defaults().to_json_text());
  }

  TEST_CASE("malformed tables are rejected") {
    CHECK_THROWS_AS(PromptTables::from_json_text("{"), ConfigError);
    CHECK_THROWS_AS(PromptTables::from_json_text(tables_with("\"version\": 1", "\"version\": 2")),
                    ConfigError);
    CHECK_THROWS_AS(PromptTables::from_json_text(tables_with("Is {c1} a {c2}?", "Is {c1} a thing?")),
                    ConfigError);
    CHECK_THROWS_AS(PromptTables::from_json_text(tables_with("\"IsA\"", "\"IsNotA\"")), ConfigError);
    CHECK_THROWS_AS(PromptTables::from_json_text(tables_with("\"True\"", "\"Yes\"")), ConfigError);
    CHECK_THROWS_AS(PromptTables::from_json_text(tables_with("Pick '{label_a}'", "Pick")),
                    ConfigError);
    CHECK_THROWS_AS(PromptTables::load("/nonexistent/prompts.json"), ConfigError);
  }
}
