#pragma once
// Staged runs: ingest -> extract -> score -> metrics -> report. Each stage
// reads only the artifacts of earlier stages from the run directory and
// records its inputs, outputs and counts in manifest.json.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccprobe/decision_engine.hpp"
#include "ccprobe/extraction.hpp"
#include "ccprobe/mock_backend.hpp"
#include "ccprobe/remote_backend.hpp"

namespace ccprobe {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Stage { Ingest, Extract, Score, Metrics, Report };
inline constexpr Stage kAllStages[] = {Stage::Ingest, Stage::Extract, Stage::Score,
                                       Stage::Metrics, Stage::Report};

std::string_view stage_name(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view name) noexcept;
// "all", a single stage, a comma list, or a range such as "score-report".
std::vector<Stage> parse_stage_selection(std::string_view text);

enum class BackendKind { Mock, Remote };

struct RunConfig {
  std::filesystem::path dump_path;
  std::filesystem::path dataset_path;
  std::filesystem::path word_list_path;
  std::filesystem::path frequency_list_path;
  std::filesystem::path prompts_path;  // empty: built-in tables
  std::filesystem::path output_dir = "run";

  std::size_t top_k = 20000;
  bool pool_in_vocabulary = true;
  std::optional<std::uint64_t> seed;

  BackendKind backend = BackendKind::Mock;
  MockOracleConfig mock;
  std::filesystem::path mock_known_facts_path;  // one "c1|Rel|c2" key per line
  RemoteConfig remote;

  DecisionRule rule = DecisionRule::GlobalArgmax;
  Normalization normalization = Normalization::PerTokenMean;
  ExtractionOptions extraction;
  VariantOptions variants;

  std::vector<Stage> stages{std::begin(kAllStages), std::end(kAllStages)};
  std::size_t jobs = 4;
  std::size_t gzip_threshold = 64u << 20;

  std::size_t concept_min_count = 28;
  std::size_t concept_rows = 14;
  std::size_t relation_min_count = 1;

  // Sets one key from the config-file vocabulary; ConfigError on unknown
  // keys or bad values. Relative paths resolve against `base_dir`.
  void set(const std::string& key, const std::string& value,
           const std::filesystem::path& base_dir = {});
  // Checks ranges and that the inputs of the selected stages exist.
  void validate() const;
  // Stable JSON view of the settings that affect artifacts (no paths, jobs
  // or endpoint).
  nlohmann::json snapshot() const;
};

// Parses "key = value" lines ('#' starts a comment). The remote endpoint is
// then overridden by CCPROBE_SCORER_URL when that variable is set.
RunConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);
void apply_environment(RunConfig& config);

struct StageRecord {
  std::string stage;
  nlohmann::json settings = nlohmann::json::object();  // config slice the stage depends on
  nlohmann::json inputs = nlohmann::json::object();     // name -> sha256
  nlohmann::json artifacts = nlohmann::json::object();  // file -> sha256
  nlohmann::json counts = nlohmann::json::object();
};

struct RunManifest {
  std::string tool_version = kToolVersion;
  nlohmann::json config = nlohmann::json::object();
  std::vector<StageRecord> stages;  // pipeline order

  const StageRecord* find(Stage s) const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr const char* kManifestFile = "manifest.json";

// Reads <dir>/manifest.json; an absent file gives an empty manifest.
RunManifest read_manifest(const std::filesystem::path& dir);

// Backend described by the config (mock known facts are loaded from disk).
std::unique_ptr<ScorerBackend> make_backend(const RunConfig& config);

class Pipeline {
 public:
  explicit Pipeline(RunConfig config);
  // Uses `backend` for the score stage instead of building one from config.
  Pipeline(RunConfig config, std::shared_ptr<ScorerBackend> backend);

  // Runs the selected stages in order. Upstream artifacts are re-verified
  // against the manifest before a stage reads them; rerunning a stage drops
  // the manifest entries of every later stage.
  RunManifest run();
  RunManifest run_stage(Stage stage);

  const RunConfig& config() const { return config_; }
  const RunManifest& manifest() const { return manifest_; }

 private:
  StageRecord ingest();
  StageRecord extract();
  StageRecord score();
  StageRecord metrics();
  StageRecord report();

  void require(Stage upstream) const;
  void commit(Stage stage, StageRecord record);
  ScorerBackend& backend();

  RunConfig config_;
  std::filesystem::path dir_;
  RunManifest manifest_;
  std::shared_ptr<ScorerBackend> backend_;
  std::optional<PromptTables> tables_;
};

}  // namespace ccprobe
