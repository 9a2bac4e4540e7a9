#include "ccprobe/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "ccprobe/artifacts.hpp"
#include "ccprobe/dataset.hpp"
#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"
#include "ccprobe/metrics.hpp"
#include "ccprobe/report.hpp"

namespace ccprobe {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kStoreFile = "store.bin";
constexpr const char* kIngestStatsFile = "ingest_stats.json";
constexpr const char* kScoreSummaryFile = "score_summary.json";

constexpr const char* kStageNames[] = {"ingest", "extract", "score", "metrics", "report"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_int(const std::string& key, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || p != value.data() + value.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "yes" || value == "1" || value == "on") return true;
  if (value == "false" || value == "no" || value == "0" || value == "off") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

std::size_t stage_index(Stage s) { return static_cast<std::size_t>(s); }

}  // namespace

std::string_view stage_name(Stage s) noexcept { return kStageNames[stage_index(s)]; }

std::optional<Stage> parse_stage(std::string_view name) noexcept {
  for (auto s : kAllStages) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<Stage> parse_stage_selection(std::string_view text) {
  std::set<Stage> picked;
  std::string all(text);
  std::istringstream in(all);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    if (item == "all") {
      picked.insert(std::begin(kAllStages), std::end(kAllStages));
      continue;
    }
    const auto dash = item.find('-');
    if (dash != std::string::npos) {
      auto from = parse_stage(trim(item.substr(0, dash)));
      auto to = parse_stage(trim(item.substr(dash + 1)));
      if (!from || !to || stage_index(*from) > stage_index(*to)) {
        throw ConfigError("bad stage range '" + item + "'");
      }
      for (auto i = stage_index(*from); i <= stage_index(*to); ++i) picked.insert(kAllStages[i]);
      continue;
    }
    auto s = parse_stage(item);
    if (!s) throw ConfigError("unknown stage '" + item + "'");
    picked.insert(*s);
  }
  if (picked.empty()) throw ConfigError("empty stage selection");
  return {picked.begin(), picked.end()};
}

// ---------------------------------------------------------------------------
// Config

void RunConfig::set(const std::string& key, const std::string& value, const fs::path& base) {
  if (key == "dump") {
    dump_path = resolve(base, value);
  } else if (key == "dataset") {
    dataset_path = resolve(base, value);
  } else if (key == "word_list") {
    word_list_path = resolve(base, value);
  } else if (key == "frequency_list") {
    frequency_list_path = resolve(base, value);
  } else if (key == "prompts") {
    prompts_path = value.empty() ? fs::path{} : resolve(base, value);
  } else if (key == "output_dir") {
    output_dir = resolve(base, value);
  } else if (key == "top_k") {
    top_k = parse_int<std::size_t>(key, value);
  } else if (key == "pool_in_vocabulary") {
    pool_in_vocabulary = parse_bool(key, value);
  } else if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "stages") {
    stages = parse_stage_selection(value);
  } else if (key == "jobs") {
    jobs = parse_int<std::size_t>(key, value);
  } else if (key == "gzip_threshold") {
    gzip_threshold = parse_int<std::size_t>(key, value);
  } else if (key == "backend") {
    if (value == "mock") {
      backend = BackendKind::Mock;
    } else if (value == "remote") {
      backend = BackendKind::Remote;
    } else {
      throw ConfigError("backend must be 'mock' or 'remote', got '" + value + "'");
    }
  } else if (key == "mock.knowledge_rate") {
    mock.knowledge_rate = parse_double(key, value);
  } else if (key == "mock.coupling") {
    mock.anchor_policy.coupling = parse_double(key, value);
  } else if (key == "mock.threshold") {
    mock.anchor_policy.threshold = parse_double(key, value);
  } else if (key == "mock.base_rate") {
    mock.anchor_policy.base_rate = parse_double(key, value);
  } else if (key == "mock.yes_bias") {
    mock.yes_bias = parse_double(key, value);
  } else if (key == "mock.known_facts") {
    mock_known_facts_path = value.empty() ? fs::path{} : resolve(base, value);
  } else if (key == "remote.endpoint") {
    remote.endpoint = value;
  } else if (key == "remote.model") {
    remote.model = value;
  } else if (key == "remote.max_retries") {
    remote.max_retries = parse_int<int>(key, value);
  } else if (key == "remote.max_in_flight") {
    remote.max_in_flight = parse_int<std::size_t>(key, value);
  } else if (key == "remote.timeout_s") {
    remote.timeout = std::chrono::seconds(parse_int<long>(key, value));
  } else if (key == "rule") {
    auto r = parse_decision_rule(value);
    if (!r) throw ConfigError("unknown decision rule '" + value + "'");
    rule = *r;
  } else if (key == "normalization") {
    auto n = parse_normalization(value);
    if (!n) throw ConfigError("normalization must be 'sum' or 'mean', got '" + value + "'");
    normalization = *n;
  } else if (key == "max_ngram") {
    extraction.max_ngram = parse_int<std::size_t>(key, value);
  } else if (key == "overlap") {
    if (value == "coverage") {
      extraction.overlap = OverlapMode::ConceptCoverage;
    } else if (value == "jaccard") {
      extraction.overlap = OverlapMode::Jaccard;
    } else {
      throw ConfigError("overlap must be 'coverage' or 'jaccard', got '" + value + "'");
    }
  } else if (key == "cross_unlabeled") {
    variants.cross_unlabeled_meta_prompts = parse_bool(key, value);
  } else if (key == "concept_min_count") {
    concept_min_count = parse_int<std::size_t>(key, value);
  } else if (key == "concept_rows") {
    concept_rows = parse_int<std::size_t>(key, value);
  } else if (key == "relation_min_count") {
    relation_min_count = parse_int<std::size_t>(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  auto selected = [this](Stage s) { return std::find(stages.begin(), stages.end(), s) != stages.end(); };
  auto need_file = [](const fs::path& p, const char* what) {
    if (p.empty()) throw ConfigError(std::string("missing config: ") + what);
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
  };
  if (top_k == 0) throw ConfigError("top_k must be positive");
  if (jobs == 0) throw ConfigError("jobs must be positive");
  if (extraction.max_ngram == 0) throw ConfigError("max_ngram must be positive");
  mock.validate();
  if (selected(Stage::Ingest)) {
    need_file(dump_path, "dump");
    need_file(word_list_path, "word_list");
    need_file(frequency_list_path, "frequency_list");
  }
  if (selected(Stage::Extract)) need_file(dataset_path, "dataset");
  if ((selected(Stage::Extract) || selected(Stage::Score)) && !seed) {
    throw ConfigError("a seed is required for the extract and score stages");
  }
  if (selected(Stage::Score)) {
    if (!prompts_path.empty()) need_file(prompts_path, "prompts");
    if (backend == BackendKind::Mock && !mock_known_facts_path.empty()) {
      need_file(mock_known_facts_path, "mock.known_facts");
    }
    if (backend == BackendKind::Remote && remote.model.empty()) {
      throw ConfigError("remote.model is required for the remote backend");
    }
    if (backend == BackendKind::Remote && remote.max_in_flight == 0) {
      throw ConfigError("remote.max_in_flight must be positive");
    }
  }
}

namespace {

json ingest_settings(const RunConfig& c) {
  return {{"top_k", c.top_k}, {"pool_in_vocabulary", c.pool_in_vocabulary}};
}

json extract_settings(const RunConfig& c) {
  return {{"seed", c.seed ? json(*c.seed) : json(nullptr)},
          {"max_ngram", c.extraction.max_ngram},
          {"overlap", c.extraction.overlap == OverlapMode::Jaccard ? "jaccard" : "coverage"}};
}

json score_settings(const RunConfig& c) {
  json j = {{"seed", c.seed ? json(*c.seed) : json(nullptr)},
            {"backend", c.backend == BackendKind::Mock ? "mock" : "remote"},
            {"rule", decision_rule_name(c.rule)},
            {"normalization", normalization_name(c.normalization)},
            {"cross_unlabeled", c.variants.cross_unlabeled_meta_prompts},
            {"custom_prompts", !c.prompts_path.empty()}};
  if (c.backend == BackendKind::Mock) {
    j["mock"] = {{"knowledge_rate", c.mock.knowledge_rate},
                 {"coupling", c.mock.anchor_policy.coupling},
                 {"threshold", c.mock.anchor_policy.threshold},
                 {"base_rate", c.mock.anchor_policy.base_rate},
                 {"yes_bias", c.mock.yes_bias},
                 {"known_facts", !c.mock_known_facts_path.empty()}};
  } else {
    j["remote"] = {{"model", c.remote.model}};
  }
  return j;
}

json metrics_settings(const RunConfig& c) {
  return {{"concept_min_count", c.concept_min_count},
          {"concept_rows", c.concept_rows},
          {"relation_min_count", c.relation_min_count}};
}

json stage_settings(const RunConfig& c, Stage s) {
  switch (s) {
    case Stage::Ingest: return ingest_settings(c);
    case Stage::Extract: return extract_settings(c);
    case Stage::Score: return score_settings(c);
    case Stage::Metrics: return metrics_settings(c);
    case Stage::Report: return json::object();
  }
  return json::object();
}

}  // namespace

json RunConfig::snapshot() const {
  json j = json::object();
  for (auto s : kAllStages) j[std::string(stage_name(s))] = stage_settings(*this, s);
  j["gzip_threshold"] = gzip_threshold;
  return j;
}

RunConfig parse_config_text(std::string_view text, const fs::path& base_dir) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), base_dir);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  apply_environment(config);
  return config;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path.parent_path());
}

void apply_environment(RunConfig& config) {
  if (const char* url = std::getenv(kScorerUrlEnv); url && *url) config.remote.endpoint = url;
}

// ---------------------------------------------------------------------------
// Manifest

const StageRecord* RunManifest::find(Stage s) const {
  for (const auto& r : stages) {
    if (r.stage == stage_name(s)) return &r;
  }
  return nullptr;
}

json RunManifest::to_json() const {
  json list = json::array();
  for (const auto& r : stages) {
    list.push_back({{"stage", r.stage},
                    {"settings", r.settings},
                    {"inputs", r.inputs},
                    {"artifacts", r.artifacts},
                    {"counts", r.counts}});
  }
  return {{"tool", "ccprobe"}, {"tool_version", tool_version}, {"config", config}, {"stages", list}};
}

RunManifest RunManifest::from_json(const json& j) {
  try {
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config = j.at("config");
    for (const auto& r : j.at("stages")) {
      StageRecord rec;
      rec.stage = r.at("stage").get<std::string>();
      if (!parse_stage(rec.stage)) throw ParseError("manifest names unknown stage " + rec.stage);
      rec.settings = r.at("settings");
      rec.inputs = r.at("inputs");
      rec.artifacts = r.at("artifacts");
      rec.counts = r.at("counts");
      m.stages.push_back(std::move(rec));
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest read_manifest(const fs::path& dir) {
  const auto path = dir / kManifestFile;
  if (!fs::exists(path)) return {};
  try {
    return RunManifest::from_json(json::parse(read_file(path)));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Backend

std::unique_ptr<ScorerBackend> make_backend(const RunConfig& config) {
  if (config.backend == BackendKind::Remote) return std::make_unique<RemoteBackend>(config.remote);
  if (!config.seed) throw ConfigError("a seed is required for the score stage");
  MockOracleConfig mock = config.mock;
  mock.seed = *config.seed;
  if (!config.mock_known_facts_path.empty()) {
    std::ifstream in(config.mock_known_facts_path);
    if (!in) throw DataError("cannot open " + config.mock_known_facts_path.string());
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (!line.empty()) mock.known_facts.insert(line);
    }
  }
  return std::make_unique<MockBackend>(std::move(mock));
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. The first exception
// stops further work and is rethrown.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (!stop.load()) {
        const auto i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          stop = true;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<json> to_json_lines(const auto& items) {
  std::vector<json> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(to_json(item));
  return out;
}

json curve_json(const std::vector<CurvePoint>& curve) {
  json out = json::array();
  for (const auto& p : curve) {
    out.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
  }
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json breakdown_json(const std::vector<BreakdownRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"key", r.key},
                   {"subset_size", r.subset_size},
                   {"cc", optional_json(r.cc_subset)},
                   {"mean_s_b", optional_json(r.mean_s_b_subset)},
                   {"degeneracy", degeneracy_name(r.degeneracy)}});
  }
  return out;
}

std::vector<BackgroundRecord> read_background(const fs::path& dir) {
  std::vector<BackgroundRecord> out;
  for (const auto& j : read_jsonl(dir, "background", "ccprobe.background").records) {
    out.push_back(background_from_json(j));
  }
  return out;
}

}  // namespace

Pipeline::Pipeline(RunConfig config) : Pipeline(std::move(config), nullptr) {}

Pipeline::Pipeline(RunConfig config, std::shared_ptr<ScorerBackend> backend)
    : config_(std::move(config)), dir_(config_.output_dir), backend_(std::move(backend)) {
  fs::create_directories(dir_);
  manifest_ = read_manifest(dir_);
}

ScorerBackend& Pipeline::backend() {
  if (!backend_) backend_ = make_backend(config_);
  return *backend_;
}

void Pipeline::require(Stage upstream) const {
  const auto name = std::string(stage_name(upstream));
  const auto* rec = manifest_.find(upstream);
  if (!rec) {
    throw DataError("stage '" + name + "' has not completed in " + dir_.string() +
                    "; run it first");
  }
  for (const auto& [file, hash] : rec->artifacts.items()) {
    const auto path = dir_ / file;
    if (!fs::exists(path)) {
      throw DataError("artifact " + file + " of stage '" + name + "' is missing; rerun '" + name + "'");
    }
    if (sha256_file(path) != hash.get<std::string>()) {
      throw DataError("artifact " + file + " of stage '" + name +
                      "' does not match the manifest; rerun '" + name + "'");
    }
  }
  if (rec->settings != stage_settings(config_, upstream)) {
    throw ConfigError("settings of stage '" + name + "' changed since it ran; rerun '" + name + "'");
  }
}

void Pipeline::commit(Stage stage, StageRecord record) {
  record.stage = std::string(stage_name(stage));
  record.settings = stage_settings(config_, stage);
  auto& list = manifest_.stages;
  list.erase(std::remove_if(list.begin(), list.end(),
                            [&](const StageRecord& r) {
                              return stage_index(*parse_stage(r.stage)) >= stage_index(stage);
                            }),
             list.end());
  list.push_back(std::move(record));
  manifest_.tool_version = kToolVersion;
  manifest_.config = config_.snapshot();
  write_file_atomic(dir_ / kManifestFile, manifest_.to_json().dump(2) + "\n");
}

RunManifest Pipeline::run() {
  config_.validate();
  auto stages = config_.stages;
  std::sort(stages.begin(), stages.end());
  for (auto s : stages) run_stage(s);
  return manifest_;
}

RunManifest Pipeline::run_stage(Stage stage) {
  StageRecord record;
  switch (stage) {
    case Stage::Ingest: record = ingest(); break;
    case Stage::Extract: record = extract(); break;
    case Stage::Score: record = score(); break;
    case Stage::Metrics: record = metrics(); break;
    case Stage::Report: record = report(); break;
  }
  commit(stage, std::move(record));
  return manifest_;
}

StageRecord Pipeline::ingest() {
  StageRecord rec;
  IngestStats stats;
  auto store = parse_dump_file(config_.dump_path, all_relations(), &stats);
  const auto words = read_word_list(config_.word_list_path);
  const auto freqs = read_frequency_list(config_.frequency_list_path);
  auto pool = build_dictionary_pool(words, freqs, config_.top_k);
  const auto full_pool = pool.size();
  if (config_.pool_in_vocabulary) pool = restrict_to_vocabulary(pool, store);

  const auto bytes = serialize_store(store, pool);
  write_file_atomic(dir_ / kStoreFile, bytes);
  json counts = {{"rows_read", stats.rows_read},
                 {"malformed_rows", stats.malformed_rows},
                 {"filtered_relation", stats.filtered_relation},
                 {"filtered_language", stats.filtered_language},
                 {"duplicate_edges", stats.duplicate_edges},
                 {"edges", store.edge_count()},
                 {"concepts", store.vocabulary().size()},
                 {"pool_top_k", full_pool},
                 {"pool", pool.size()}};
  const auto stats_text = counts.dump(2) + "\n";
  write_file_atomic(dir_ / kIngestStatsFile, stats_text);

  rec.inputs = {{"dump", sha256_file(config_.dump_path)},
                {"word_list", sha256_file(config_.word_list_path)},
                {"frequency_list", sha256_file(config_.frequency_list_path)}};
  rec.artifacts = {{kStoreFile, sha256_hex(bytes)}, {kIngestStatsFile, sha256_hex(stats_text)}};
  rec.counts = std::move(counts);
  return rec;
}

StageRecord Pipeline::extract() {
  require(Stage::Ingest);
  if (!config_.seed) throw ConfigError("a seed is required for the extract stage");
  StageRecord rec;
  const auto index = load_store(dir_ / kStoreFile);
  if (index.pool.empty()) throw DataError("the negative-candidate pool is empty");
  auto dataset = load_dataset(config_.dataset_path);
  for (const auto& w : dataset.warnings) std::cerr << "warning: " << w << "\n";

  std::vector<BackgroundRecord> records(dataset.anchors.size());
  parallel_for(records.size(), config_.jobs, [&](std::size_t i) {
    const auto& anchor = dataset.anchors[i];
    auto concepts = extract_concepts(anchor, index.store, config_.extraction);
    auto& r = records[i];
    r.anchor = anchor;
    for (const auto& c : concepts.concepts()) r.concepts.push_back(c.label());
    r.background = build_background_set(concepts, index.store, index.pool, *config_.seed);
  });

  std::size_t positives = 0, negatives = 0, failures = 0, empty = 0;
  for (const auto& r : records) {
    positives += r.background.positives.size();
    negatives += r.background.negatives.size();
    failures += r.background.mining_failures();
    empty += r.background.empty() ? 1 : 0;
  }
  auto written = write_jsonl(dir_, "background", {"ccprobe.background", kArtifactSchemaVersion, config_.seed},
                             to_json_lines(records), config_.gzip_threshold);
  rec.inputs = {{"dataset", sha256_file(config_.dataset_path)}};
  rec.artifacts = {{written.file_name, written.sha256}};
  rec.counts = {{"anchors", records.size()},
                {"positives", positives},
                {"negatives", negatives},
                {"mining_failures", failures},
                {"empty_backgrounds", empty}};
  return rec;
}

StageRecord Pipeline::score() {
  require(Stage::Extract);
  if (!config_.seed) throw ConfigError("a seed is required for the score stage");
  StageRecord rec;
  if (!tables_) {
    tables_ = config_.prompts_path.empty() ? PromptTables::defaults()
                                            : PromptTables::load(config_.prompts_path);
  }
  const auto records = read_background(dir_);
  DecisionEngine engine(*tables_, config_.rule, config_.normalization, config_.variants);
  auto& scorer = backend();
  const auto workers = std::min(config_.jobs, scorer.max_in_flight());

  std::set<Fact> unique;
  for (const auto& r : records) {
    unique.insert(r.background.positives.begin(), r.background.positives.end());
    unique.insert(r.background.negatives.begin(), r.background.negatives.end());
  }
  const std::vector<Fact> facts(unique.begin(), unique.end());
  std::vector<std::optional<Verdict>> verdicts(facts.size());
  parallel_for(facts.size(), workers,
               [&](std::size_t i) { verdicts[i] = engine.decide_fact(facts[i], scorer); });

  std::vector<AnchorDecision> decisions(records.size());
  parallel_for(records.size(), workers, [&](std::size_t i) {
    decisions[i] = engine.decide_anchor(records[i].anchor, records[i].background.positives, scorer);
  });

  std::vector<json> verdict_lines;
  verdict_lines.reserve(verdicts.size());
  for (const auto& v : verdicts) verdict_lines.push_back(to_json(*v));
  const ArtifactHeader vh{"ccprobe.verdicts", kArtifactSchemaVersion, config_.seed};
  const ArtifactHeader dh{"ccprobe.decisions", kArtifactSchemaVersion, config_.seed};
  auto wv = write_jsonl(dir_, "verdicts", vh, verdict_lines, config_.gzip_threshold);
  auto wd = write_jsonl(dir_, "decisions", dh, to_json_lines(decisions), config_.gzip_threshold);

  const auto per_fact =
      facts.empty() ? std::size_t{0} : enumerate_fact_variants(facts.front(), *tables_, config_.variants).size();
  const auto per_anchor = tables_->meta_prompts().size() * kChoiceCount;
  const std::string label = config_.backend == BackendKind::Remote && config_.remote.model.size()
                                ? "remote(" + config_.remote.model + ")"
                                : scorer.describe();
  const json summary = {{"backend", label},
                        {"rule", decision_rule_name(config_.rule)},
                        {"normalization", normalization_name(config_.normalization)},
                        {"variants_per_fact", per_fact},
                        {"variants_per_anchor", per_anchor}};
  const auto summary_text = summary.dump(2) + "\n";
  write_file_atomic(dir_ / kScoreSummaryFile, summary_text);

  if (!config_.prompts_path.empty()) rec.inputs["prompts"] = sha256_file(config_.prompts_path);
  if (config_.backend == BackendKind::Mock && !config_.mock_known_facts_path.empty()) {
    rec.inputs["mock.known_facts"] = sha256_file(config_.mock_known_facts_path);
  }
  rec.artifacts = {{wv.file_name, wv.sha256},
                   {wd.file_name, wd.sha256},
                   {kScoreSummaryFile, sha256_hex(summary_text)}};
  rec.counts = {{"facts", facts.size()},
                {"verdicts", verdicts.size()},
                {"anchors", decisions.size()},
                {"variants", facts.size() * per_fact + records.size() * per_anchor}};
  return rec;
}

StageRecord Pipeline::metrics() {
  require(Stage::Score);
  StageRecord rec;
  const auto records = read_background(dir_);
  std::vector<Verdict> verdicts;
  for (const auto& j : read_jsonl(dir_, "verdicts", "ccprobe.verdicts").records) {
    verdicts.push_back(verdict_from_json(j));
  }
  std::map<std::string, AnchorDecision> decisions;
  for (const auto& j : read_jsonl(dir_, "decisions", "ccprobe.decisions").records) {
    auto d = decision_from_json(j);
    decisions.emplace(d.anchor_id, std::move(d));
  }
  json summary;
  try {
    summary = json::parse(read_file(dir_ / kScoreSummaryFile));
  } catch (const json::exception& e) {
    throw ParseError(std::string(kScoreSummaryFile) + ": " + e.what());
  }
  std::map<Fact, const Verdict*> by_fact;
  for (const auto& v : verdicts) by_fact.emplace(v.fact, &v);

  std::vector<ScoreRecord> scores;
  scores.reserve(records.size());
  for (const auto& r : records) {
    std::vector<Verdict> mine;
    auto collect = [&](const std::vector<Fact>& facts) {
      for (const auto& f : facts) {
        auto it = by_fact.find(f);
        if (it == by_fact.end()) throw DataError("no verdict for fact " + f.triple_key());
        mine.push_back(*it->second);
      }
    };
    collect(r.background.positives);
    collect(r.background.negatives);
    auto d = decisions.find(r.anchor.id);
    if (d == decisions.end()) throw DataError("no decision for anchor " + r.anchor.id);
    scores.push_back(make_score_record(r.background, mine, d->second));
  }
  auto written = write_jsonl(dir_, "records", {"ccprobe.records", kArtifactSchemaVersion, config_.seed},
                             to_json_lines(scores), config_.gzip_threshold);

  const auto cc = conceptual_consistency_flagged(scores);
  const auto rel = relation_mean_background(verdicts);
  const auto bias = bias_report(verdicts);
  std::optional<double> task, mean_sb;
  if (!scores.empty()) {
    double total = 0, sb = 0;
    std::size_t defined = 0;
    for (const auto& s : scores) {
      total += s.s_a;
      if (s.s_b) {
        sb += *s.s_b;
        ++defined;
      }
    }
    task = total / static_cast<double>(scores.size());
    if (defined) mean_sb = sb / static_cast<double>(defined);
  }
  json per_relation = json::array();
  for (const auto& p : rel.per_relation) {
    per_relation.push_back({{"relation", relation_name(p.relation)},
                            {"facts", p.fact_count},
                            {"positive_acc", optional_json(p.positive_acc)},
                            {"negative_acc", optional_json(p.negative_acc)},
                            {"balanced", optional_json(p.balanced)}});
  }
  json excluded = json::array();
  for (auto r : rel.excluded) excluded.push_back(relation_name(r));

  BreakdownOptions relation_opts = BreakdownOptions::relations();
  relation_opts.min_count = config_.relation_min_count;
  BreakdownOptions concept_opts{BreakdownMode::Concept, config_.concept_min_count, config_.concept_rows};

  const json doc = {
      {"schema", "ccprobe.metrics"},
      {"version", kArtifactSchemaVersion},
      {"seed", config_.seed ? json(*config_.seed) : json(nullptr)},
      {"backend", summary.at("backend")},
      {"rule", summary.at("rule")},
      {"normalization", summary.at("normalization")},
      {"consistency",
       {{"cc", optional_json(cc.cc)},
        {"degeneracy", degeneracy_name(cc.degeneracy)},
        {"n_anchors", cc.n_anchors},
        {"n_excluded", cc.n_excluded},
        {"positives", cc.positives},
        {"curve", curve_json(cc.threshold_curve)}}},
      {"task", {{"accuracy", optional_json(task)}, {"anchors", scores.size()}}},
      {"background",
       {{"mean_s_b", optional_json(mean_sb)},
        {"relation_mean", optional_json(rel.mean)},
        {"ci95", rel.ci95},
        {"per_relation", per_relation},
        {"excluded", excluded}}},
      {"bias",
       {{"scope", bias.scope},
        {"positive_acc", optional_json(bias.positive_acc_mean)},
        {"negative_acc", optional_json(bias.negative_acc_mean)}}},
      {"breakdowns",
       {{"relation", breakdown_json(breakdown(scores, relation_opts))},
        {"concept", breakdown_json(breakdown(scores, concept_opts))}}}};
  const auto text = doc.dump(2) + "\n";
  write_file_atomic(dir_ / kMetricsFile, text);

  rec.artifacts = {{written.file_name, written.sha256}, {kMetricsFile, sha256_hex(text)}};
  rec.counts = {{"records", scores.size()},
                {"excluded", cc.n_excluded},
                {"correct", cc.positives}};
  return rec;
}

StageRecord Pipeline::report() {
  require(Stage::Metrics);
  StageRecord rec;
  for (const auto& file : write_report(dir_)) {
    rec.artifacts[file.generic_string()] = sha256_file(dir_ / file);
  }
  rec.counts = {{"files", rec.artifacts.size()}};
  return rec;
}

}  // namespace ccprobe
