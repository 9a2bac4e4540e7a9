#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace ccprobe {

// The closed set of knowledge-graph relations used for background facts.
// Declaration order is the canonical order (alphabetical by name).
enum class RelationKind : std::uint8_t {
  Antonym,
  AtLocation,
  CapableOf,
  Causes,
  Desires,
  FormOf,
  HasA,
  IsA,
  MadeOf,
  PartOf,
  RelatedTo,
  SimilarTo,
  Synonym,
  UsedFor,
};

inline constexpr std::size_t kRelationCount = 14;

inline constexpr std::array<RelationKind, kRelationCount> kAllRelations = {
    RelationKind::Antonym,   RelationKind::AtLocation, RelationKind::CapableOf,
    RelationKind::Causes,    RelationKind::Desires,    RelationKind::FormOf,
    RelationKind::HasA,      RelationKind::IsA,        RelationKind::MadeOf,
    RelationKind::PartOf,    RelationKind::RelatedTo,  RelationKind::SimilarTo,
    RelationKind::Synonym,   RelationKind::UsedFor,
};

// ConceptNet-style relation name, e.g. "UsedFor".
std::string_view relation_name(RelationKind r) noexcept;

// Parses a bare name ("UsedFor"). Anything outside the 14 yields nullopt.
std::optional<RelationKind> parse_relation(std::string_view name) noexcept;

// Parses a relation URI ("/r/UsedFor", trailing slash tolerated).
std::optional<RelationKind> parse_relation_uri(std::string_view uri) noexcept;

inline std::size_t relation_index(RelationKind r) noexcept {
  return static_cast<std::size_t>(r);
}

}  // namespace ccprobe
