#pragma once
// Line-delimited stage artifacts. Every file starts with a header record
// {"schema": ..., "version": ..., "seed": ...}; field-by-field layouts are in
// docs/artifacts.md.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccprobe/decision_engine.hpp"
#include "ccprobe/extraction.hpp"
#include "ccprobe/metrics.hpp"

namespace ccprobe {

inline constexpr int kArtifactSchemaVersion = 1;

// Background record: the anchor itself plus its background set.
struct BackgroundRecord {
  AnchorExample anchor;
  std::vector<std::string> concepts;  // matched concept labels, discovery order
  BackgroundSet background;
  friend bool operator==(const BackgroundRecord&, const BackgroundRecord&) = default;
};

nlohmann::json fact_to_json(const Fact& fact);  // polarity included
Fact fact_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BackgroundRecord& r);
BackgroundRecord background_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Verdict& v);
Verdict verdict_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AnchorDecision& d);
AnchorDecision decision_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScoreRecord& r);
ScoreRecord score_record_from_json(const nlohmann::json& j);

struct ArtifactHeader {
  std::string schema;
  int version = kArtifactSchemaVersion;
  std::optional<std::uint64_t> seed;
};

struct WrittenArtifact {
  std::string file_name;  // relative to the run directory
  std::string sha256;
  std::size_t records = 0;
};

// Writes <stem>.jsonl, or <stem>.jsonl.gz when the text exceeds
// gzip_threshold bytes. The write goes through a temporary file and a rename,
// and removes any stale file of the other form.
WrittenArtifact write_jsonl(const std::filesystem::path& dir, const std::string& stem,
                            const ArtifactHeader& header,
                            const std::vector<nlohmann::json>& records,
                            std::size_t gzip_threshold);

struct ReadArtifact {
  ArtifactHeader header;
  std::vector<nlohmann::json> records;
};

// Reads <stem>.jsonl or <stem>.jsonl.gz; checks the header schema and version.
ReadArtifact read_jsonl(const std::filesystem::path& dir, const std::string& stem,
                        const std::string& expected_schema);

// The path of an existing artifact (plain or gz), or nullopt.
std::optional<std::filesystem::path> find_jsonl(const std::filesystem::path& dir,
                                                const std::string& stem);

// Writes bytes through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace ccprobe
