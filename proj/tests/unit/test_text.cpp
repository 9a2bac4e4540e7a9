#include <doctest.h>

#include <map>

#include "ccprobe/errors.hpp"
#include "ccprobe/hashing.hpp"
#include "ccprobe/relation.hpp"
#include "ccprobe/text.hpp"

using namespace ccprobe;

TEST_SUITE("text") {
  TEST_CASE("labels are lowercased, underscores become single spaces") {
    CHECK(normalize_label("  Ice_Cream ") == "ice cream");
    CHECK(normalize_label("new__york\tcity") == "new york city");
    CHECK(normalize_label(" _ ").empty());
  }

  TEST_CASE("concept invariants") {
    Concept c("Tree_Line");
    CHECK(c.label() == "tree line");
    CHECK(c.words() == std::vector<std::string>{"tree", "line"});
    CHECK_THROWS_AS(Concept("   "), PreconditionError);
    CHECK_THROWS_AS(Concept("__"), PreconditionError);
  }

  TEST_CASE("tokenizer keeps apostrophes and hyphens inside words") {
    CHECK(tokenize_text("Where's the well-known book?") ==
          std::vector<std::string>{"where's", "the", "well-known", "book"});
    CHECK(tokenize_text("'quoted' --dash-- 42") == std::vector<std::string>{"quoted", "dash", "42"});
    CHECK(tokenize_text("...").empty());
  }

  TEST_CASE("stopwords") {
    CHECK(is_stopword("the"));
    CHECK(is_stopword("you're"));
    CHECK_FALSE(is_stopword("book"));
    CHECK_FALSE(is_stopword(""));
  }
}

TEST_SUITE("relation") {
  TEST_CASE("exactly fourteen relations round-trip by name and URI") {
    CHECK(kAllRelations.size() == 14);
    for (auto r : kAllRelations) {
      CHECK(parse_relation(relation_name(r)) == r);
      CHECK(parse_relation_uri("/r/" + std::string(relation_name(r))) == r);
      CHECK(parse_relation_uri("/r/" + std::string(relation_name(r)) + "/") == r);
    }
    CHECK_FALSE(parse_relation("ExternalURL"));
    CHECK_FALSE(parse_relation_uri("/r/HasProperty"));
    CHECK_FALSE(parse_relation_uri("UsedFor"));
  }
}

TEST_SUITE("hashing") {
  TEST_CASE("field separation changes the hash") {
    CHECK(stable_hash({"ab", "c"}) != stable_hash({"a", "bc"}));
    CHECK(stable_hash({"x"}) == stable_hash({"x"}));
  }

  TEST_CASE("pinned values stay stable across builds") {
    // FNV-1a of "a" followed by the 0x1f separator.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : std::string("a\x1f")) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    CHECK(stable_hash({"a"}) == h);
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  }

  TEST_CASE("uniform_index rejects empty ranges and stays in range") {
    auto e = keyed_engine(1, {"x"});
    CHECK_THROWS(uniform_index(e, 0));
    for (int i = 0; i < 1000; ++i) CHECK(uniform_index(e, 7) < 7);
  }

  TEST_CASE("keyed_unit lies in [0, 1)") {
    for (std::uint64_t s = 0; s < 500; ++s) {
      const double u = keyed_unit(s, {"k"});
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
  }

  TEST_CASE("sha256 of the empty string") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
