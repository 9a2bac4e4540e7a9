#include "ccprobe/artifacts.hpp"

#include <zlib.h>

#include <fstream>
#include <sstream>

#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"

namespace ccprobe {

using nlohmann::json;

namespace {

RelationKind relation_from(const json& j) {
  auto r = parse_relation(j.get<std::string>());
  if (!r) throw ParseError("unknown relation " + j.dump());
  return *r;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed ") + what + " record: " + e.what());
  } catch (const PreconditionError& e) {
    throw ParseError(std::string("invalid ") + what + " record: " + e.what());
  }
}

}  // namespace

json fact_to_json(const Fact& f) {
  return {{"c1", f.c1.label()},
          {"relation", relation_name(f.relation)},
          {"c2", f.c2.label()},
          {"polarity", polarity_name(f.polarity)}};
}

Fact fact_from_json(const json& j) {
  return guarded("fact", [&] {
    auto polarity = parse_polarity(j.at("polarity").get<std::string>());
    if (!polarity) throw ParseError("bad polarity in " + j.dump());
    return Fact{Concept(j.at("c1").get<std::string>()), relation_from(j.at("relation")),
                Concept(j.at("c2").get<std::string>()), *polarity};
  });
}

json to_json(const BackgroundRecord& r) {
  json choices = json::array();
  for (const auto& c : r.anchor.choices) choices.push_back(c);
  json positives = json::array();
  for (const auto& f : r.background.positives) positives.push_back(fact_to_json(f));
  json negatives = json::array();
  for (const auto& f : r.background.negatives) negatives.push_back(fact_to_json(f));
  json partner = json::array();
  for (const auto& p : r.background.partner) partner.push_back(p ? json(*p) : json(nullptr));
  return {{"anchor",
           {{"id", r.anchor.id},
            {"question", r.anchor.question},
            {"choices", std::move(choices)},
            {"answer_index", r.anchor.answer_index}}},
          {"concepts", r.concepts},
          {"positives", std::move(positives)},
          {"negatives", std::move(negatives)},
          {"partner", std::move(partner)}};
}

BackgroundRecord background_from_json(const json& j) {
  return guarded("background", [&] {
    BackgroundRecord r;
    const auto& a = j.at("anchor");
    r.anchor.id = a.at("id").get<std::string>();
    r.anchor.question = a.at("question").get<std::string>();
    const auto& choices = a.at("choices");
    if (choices.size() != kChoiceCount) throw ParseError("background anchor needs 5 choices");
    for (std::size_t k = 0; k < kChoiceCount; ++k) r.anchor.choices[k] = choices[k].get<std::string>();
    r.anchor.answer_index = a.at("answer_index").get<std::size_t>();
    r.anchor.validate();
    r.concepts = j.at("concepts").get<std::vector<std::string>>();
    r.background.anchor_id = r.anchor.id;
    for (const auto& f : j.at("positives")) r.background.positives.push_back(fact_from_json(f));
    for (const auto& f : j.at("negatives")) r.background.negatives.push_back(fact_from_json(f));
    for (const auto& p : j.at("partner")) {
      if (p.is_null()) {
        r.background.partner.emplace_back(std::nullopt);
      } else {
        const auto idx = p.get<std::size_t>();
        if (idx >= r.background.negatives.size()) throw ParseError("partner index out of range");
        r.background.partner.emplace_back(idx);
      }
    }
    if (r.background.partner.size() != r.background.positives.size()) {
      throw ParseError("partner list does not match positives");
    }
    return r;
  });
}

json to_json(const Verdict& v) {
  json j = fact_to_json(v.fact);
  j["decided"] = polarity_name(v.decided);
  j["meta_prompt"] = v.winner.meta_prompt_id;
  j["answer_pair"] = v.winner.answer_pair_id;
  j["word"] = v.winner.word;
  j["score"] = v.winning_score;
  j["correct"] = v.correct;
  return j;
}

Verdict verdict_from_json(const json& j) {
  return guarded("verdict", [&] {
    auto decided = parse_polarity(j.at("decided").get<std::string>());
    if (!decided) throw ParseError("bad decided polarity");
    return Verdict{fact_from_json(j), *decided,
                   WinningVariant{j.at("meta_prompt").get<int>(),
                                  j.at("answer_pair").get<std::size_t>(),
                                  j.at("word").get<std::string>()},
                   j.at("score").get<double>(), j.at("correct").get<bool>()};
  });
}

json to_json(const AnchorDecision& d) {
  return {{"anchor_id", d.anchor_id},
          {"chosen_index", d.chosen_index},
          {"choice_scores", d.choice_scores},
          {"correct", d.correct}};
}

AnchorDecision decision_from_json(const json& j) {
  return guarded("decision", [&] {
    AnchorDecision d;
    d.anchor_id = j.at("anchor_id").get<std::string>();
    d.chosen_index = j.at("chosen_index").get<std::size_t>();
    const auto scores = j.at("choice_scores").get<std::vector<double>>();
    if (scores.size() != kChoiceCount || d.chosen_index >= kChoiceCount) {
      throw ParseError("decision needs 5 choice scores");
    }
    std::copy(scores.begin(), scores.end(), d.choice_scores.begin());
    d.correct = j.at("correct").get<bool>();
    return d;
  });
}

json to_json(const ScoreRecord& r) {
  json relations = json::array();
  for (auto rel : r.background_relations) relations.push_back(relation_name(rel));
  return {{"anchor_id", r.anchor_id},
          {"s_b", optional_number(r.s_b)},
          {"s_a", r.s_a},
          {"positive_acc", optional_number(r.positive_acc)},
          {"negative_acc", optional_number(r.negative_acc)},
          {"relations", std::move(relations)},
          {"concepts", r.background_concepts}};
}

ScoreRecord score_record_from_json(const json& j) {
  return guarded("score", [&] {
    ScoreRecord r;
    r.anchor_id = j.at("anchor_id").get<std::string>();
    r.s_b = number_or_null(j.at("s_b"));
    r.s_a = j.at("s_a").get<int>();
    r.positive_acc = number_or_null(j.at("positive_acc"));
    r.negative_acc = number_or_null(j.at("negative_acc"));
    for (const auto& rel : j.at("relations")) r.background_relations.push_back(relation_from(rel));
    r.background_concepts = j.at("concepts").get<std::vector<std::string>>();
    return r;
  });
}

// ---------------------------------------------------------------------------
// Files

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw DataError("write failure: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string gzip_bytes(std::string_view text) {
  z_stream zs{};
  // windowBits 15 + 16 selects the gzip wrapper; the header carries mtime 0.
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    throw DataError("deflateInit2 failed");
  }
  std::string out(deflateBound(&zs, static_cast<uLong>(text.size())), '\0');
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(text.data()));
  zs.avail_in = static_cast<uInt>(text.size());
  zs.next_out = reinterpret_cast<Bytef*>(out.data());
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = deflate(&zs, Z_FINISH);
  out.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) throw DataError("gzip compression failed");
  return out;
}

std::string gunzip_file(const std::filesystem::path& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (!f) throw DataError("cannot open " + path.string());
  std::string out;
  std::vector<char> buf(1 << 16);
  int n;
  while ((n = gzread(f, buf.data(), static_cast<unsigned>(buf.size()))) > 0) {
    out.append(buf.data(), static_cast<std::size_t>(n));
  }
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw DataError("corrupt gzip artifact: " + path.string());
  return out;
}

}  // namespace

WrittenArtifact write_jsonl(const std::filesystem::path& dir, const std::string& stem,
                            const ArtifactHeader& header, const std::vector<json>& records,
                            std::size_t gzip_threshold) {
  json head = {{"schema", header.schema}, {"version", header.version}};
  head["seed"] = header.seed ? json(*header.seed) : json(nullptr);
  std::string text = head.dump();
  text.push_back('\n');
  for (const auto& r : records) {
    text += r.dump();
    text.push_back('\n');
  }
  const auto plain = stem + ".jsonl";
  const auto gz = plain + ".gz";
  WrittenArtifact written;
  written.records = records.size();
  if (gzip_threshold > 0 && text.size() > gzip_threshold) {
    const auto bytes = gzip_bytes(text);
    write_file_atomic(dir / gz, bytes);
    std::filesystem::remove(dir / plain);
    written.file_name = gz;
    written.sha256 = sha256_hex(bytes);
  } else {
    write_file_atomic(dir / plain, text);
    std::filesystem::remove(dir / gz);
    written.file_name = plain;
    written.sha256 = sha256_hex(text);
  }
  return written;
}

std::optional<std::filesystem::path> find_jsonl(const std::filesystem::path& dir,
                                                const std::string& stem) {
  auto plain = dir / (stem + ".jsonl");
  if (std::filesystem::exists(plain)) return plain;
  auto gz = dir / (stem + ".jsonl.gz");
  if (std::filesystem::exists(gz)) return gz;
  return std::nullopt;
}

ReadArtifact read_jsonl(const std::filesystem::path& dir, const std::string& stem,
                        const std::string& expected_schema) {
  auto path = find_jsonl(dir, stem);
  if (!path) throw DataError("missing artifact " + stem + ".jsonl in " + dir.string());
  const auto text = path->extension() == ".gz" ? gunzip_file(*path) : read_file(*path);
  ReadArtifact out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(path->string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (line_no == 1) {
      if (!j.is_object() || j.value("schema", "") != expected_schema) {
        throw ParseError(path->string() + ": expected schema " + expected_schema);
      }
      out.header.schema = expected_schema;
      out.header.version = j.value("version", 0);
      if (out.header.version != kArtifactSchemaVersion) {
        throw IncompatibleVersionError(path->string() + ": schema version " +
                                       std::to_string(out.header.version));
      }
      if (j.contains("seed") && !j["seed"].is_null()) out.header.seed = j["seed"].get<std::uint64_t>();
      continue;
    }
    out.records.push_back(std::move(j));
  }
  if (line_no == 0) throw ParseError(path->string() + ": empty artifact");
  return out;
}

}  // namespace ccprobe
