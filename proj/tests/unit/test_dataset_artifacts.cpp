#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "ccprobe/artifacts.hpp"
#include "ccprobe/dataset.hpp"
#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"
#include "ccprobe/synthetic.hpp"
#include "oracles.hpp"

using namespace ccprobe;
namespace fs = std::filesystem;

namespace {

const char* kRecord =
    R"({"answerKey": "C", "id": "q1", "question": {"stem": "Where do You keep a Book?", )"
    R"("choices": [{"label": "A", "text": "oven"}, {"label": "B", "text": "river"}, )"
    R"({"label": "C", "text": "Shelf"}, {"label": "D", "text": "sky"}, {"label": "E", "text": "shoe"}]}})";

LoadedDataset load_text(const std::string& text) {
  std::istringstream in(text);
  return load_dataset(in, "mem");
}

fs::path temp_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("ccprobe_art_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string expect_parse_error(const std::string& text) {
  try {
    load_text(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("records load with raw text preserved") {
    const auto d = load_text(std::string(kRecord) + "\n\n");
    REQUIRE(d.anchors.size() == 1);
    const auto& a = d.anchors[0];
    CHECK(a.id == "q1");
    CHECK(a.question == "Where do You keep a Book?");
    CHECK(a.choices[2] == "Shelf");
    CHECK(a.answer_index == 2);
    CHECK(d.warnings.empty());
  }

  TEST_CASE("a four-choice record is rejected with its line") {
    std::string four = kRecord;
    four.erase(four.find(R"(, {"label": "E")"), std::string(R"(, {"label": "E", "text": "shoe"})").size());
    const auto msg = expect_parse_error(std::string(kRecord) + "\n" + four + "\n");
    CHECK(msg.find("mem:2") != std::string::npos);
  }

  TEST_CASE("other malformed records") {
    std::string bad_key = kRecord;
    bad_key.replace(bad_key.find("\"C\""), 3, "\"F\"");
    CHECK(expect_parse_error(bad_key).find("mem:1") != std::string::npos);
    CHECK(expect_parse_error("{not json\n").find("mem:1") != std::string::npos);
    CHECK(expect_parse_error(R"({"id": "x"})").find("mem:1") != std::string::npos);
    std::string empty_stem = kRecord;
    empty_stem.replace(empty_stem.find("Where do You keep a Book?"), 25, "  ");
    CHECK(expect_parse_error(empty_stem) != "no error");
  }

  TEST_CASE("empty input warns") {
    const auto d = load_text("");
    CHECK(d.anchors.empty());
    CHECK(d.warnings.size() == 1);
    CHECK_THROWS_AS(load_dataset(fs::path("/nonexistent/dev.jsonl")), DataError);
  }

  TEST_CASE("dataset lines round-trip") {
    SynthOptions o;
    o.anchors = 50;
    const auto corpus = generate_synthetic(o);
    std::string text;
    for (const auto& a : corpus.anchors) text += to_dataset_line(a) + "\n";
    CHECK(load_text(text).anchors == corpus.anchors);
  }

  TEST_CASE("CommonsenseQA dev split size when available") {
    const char* path = std::getenv("CCPROBE_CSQA_DEV");
    if (!path || !*path) {
      MESSAGE("CCPROBE_CSQA_DEV not set; skipping the dev-split count");
      return;
    }
    const auto d = load_dataset(fs::path(path));
    CHECK(d.anchors.size() == 1221);
  }
}

TEST_SUITE("artifacts") {
  TEST_CASE("record conversions round-trip") {
    std::mt19937_64 rng(2);
    for (const auto& v : oracle::random_verdicts(rng, 50)) {
      auto copy = v;
      copy.winning_score = -1.2345678901234567;
      copy.winner = WinningVariant{3, 4, "Correct"};
      CHECK(verdict_from_json(to_json(copy)) == copy);
      CHECK(fact_from_json(fact_to_json(copy.fact)) == copy.fact);
    }
    AnchorDecision d{"a7", 3, {-1.0, -0.5, -2.0, 0.25, -9.0}, true};
    CHECK(decision_from_json(to_json(d)) == d);

    ScoreRecord r;
    r.anchor_id = "a7";
    r.s_b = 5.0 / 6.0;
    r.s_a = 1;
    r.positive_acc = 2.0 / 3.0;
    r.negative_acc = 1.0;
    r.background_relations = {RelationKind::IsA, RelationKind::UsedFor};
    r.background_concepts = {"book", "school"};
    CHECK(score_record_from_json(to_json(r)) == r);
    ScoreRecord empty;
    empty.anchor_id = "e";
    CHECK(score_record_from_json(to_json(empty)) == empty);
  }

  TEST_CASE("background records round-trip") {
    SynthOptions o;
    o.anchors = 20;
    const auto corpus = generate_synthetic(o);
    const auto store = FactStore::from_triples(corpus.edges);
    std::vector<Concept> words;
    for (const auto& w : corpus.words) words.emplace_back(w);
    const DictionaryPool pool(words);
    for (const auto& a : corpus.anchors) {
      const auto concepts = extract_concepts(a, store);
      BackgroundRecord rec{a, {}, build_background_set(concepts, store, pool, 9)};
      for (const auto& m : concepts.matches) rec.concepts.push_back(m.matched.label());
      CHECK(background_from_json(to_json(rec)) == rec);
    }
  }

  TEST_CASE("malformed records are parse errors") {
    CHECK_THROWS_AS(verdict_from_json(nlohmann::json::object()), ParseError);
    CHECK_THROWS_AS(fact_from_json({{"c1", "a"}, {"relation", "Nope"}, {"c2", "b"}, {"polarity", "positive"}}),
                    ParseError);
    CHECK_THROWS_AS(decision_from_json({{"anchor_id", "x"}}), ParseError);
  }

  TEST_CASE("jsonl files with headers, plain and gzip") {
    const auto dir = temp_dir("jsonl");
    std::vector<nlohmann::json> records;
    for (int i = 0; i < 200; ++i) records.push_back({{"i", i}, {"text", std::string(40, 'x')}});
    const ArtifactHeader header{"ccprobe.test", kArtifactSchemaVersion, 42};

    const auto plain = write_jsonl(dir, "things", header, records, 1u << 30);
    CHECK(plain.file_name == "things.jsonl");
    CHECK(plain.records == 200);
    CHECK(plain.sha256 == sha256_file(dir / "things.jsonl"));
    auto back = read_jsonl(dir, "things", "ccprobe.test");
    CHECK(back.records == records);
    CHECK(back.header.seed == 42u);

    const auto gz = write_jsonl(dir, "things", header, records, 100);
    CHECK(gz.file_name == "things.jsonl.gz");
    CHECK_FALSE(fs::exists(dir / "things.jsonl"));
    CHECK(gz.sha256 == sha256_file(dir / "things.jsonl.gz"));
    CHECK(read_jsonl(dir, "things", "ccprobe.test").records == records);
    // Compressed output carries no timestamp, so rewriting is byte-identical.
    CHECK(write_jsonl(dir, "things", header, records, 100).sha256 == gz.sha256);

    CHECK_THROWS_AS(read_jsonl(dir, "things", "ccprobe.other"), DataError);
    CHECK_THROWS_AS(read_jsonl(dir, "missing", "ccprobe.test"), DataError);
    CHECK_FALSE(find_jsonl(dir, "missing"));
  }

  TEST_CASE("version mismatch") {
    const auto dir = temp_dir("version");
    write_jsonl(dir, "v", {"ccprobe.test", kArtifactSchemaVersion + 1, std::nullopt}, {}, 1u << 30);
    CHECK_THROWS_AS(read_jsonl(dir, "v", "ccprobe.test"), IncompatibleVersionError);
    write_file_atomic(dir / "w.jsonl", "{\"schema\": \"ccprobe.test\", \"version\": 1}\n{broken\n");
    CHECK_THROWS_AS(read_jsonl(dir, "w", "ccprobe.test"), ParseError);
  }
}
