#include "dtki/rgx.h"

#include <gtest/gtest.h>

#include <regex>
#include <string>
#include <vector>

namespace dtki {
namespace {

TEST(RgxTest, ParsesAndCanonicalises) {
  EXPECT_EQ(Rgx::Parse(".*\\.org").text(), ".*\\.org");
  EXPECT_EQ(Rgx::Parse("[a-h].*\\.com").text(), "[a-h].*\\.com");
  EXPECT_EQ(Rgx::Parse("[c-ha-b].*\\.com").text(), "[a-h].*\\.com");
  EXPECT_EQ(Rgx::Parse("[ab0-3c].*\\.co\\.uk").text(), "[0-3a-c].*\\.co\\.uk");
  EXPECT_EQ(Rgx::Parse("[a-h].*\\.com").suffix(), ".com");
}

TEST(RgxTest, RejectsOutsideGrammar) {
  for (const char* bad : {"", ".*", "example.com", ".*com", "[a-h]\\.com", "[].*\\.com", "[a-h.*\\.com",
                          "[h-a].*\\.com", "[0-z].*\\.com", ".*\\.COM", ".*\\.c_m", "[A-H].*\\.com",
                          ".*\\.com\\", ".*\\x"}) {
    EXPECT_FALSE(Rgx::IsValid(bad)) << bad;
    EXPECT_THROW(Rgx::Parse(bad), RgxParseError) << bad;
  }
}

TEST(RgxTest, PaperExample) {
  const Rgx r = Rgx::Parse("[a-h].*\\.com");
  EXPECT_TRUE(r.Matches("example.com"));
  EXPECT_TRUE(r.Matches("hat.com"));
  EXPECT_FALSE(r.Matches("ibm.com"));
  EXPECT_FALSE(r.Matches("example.org"));
  EXPECT_TRUE(Rgx::Parse(".*\\.org").Matches("example.org"));
}

const std::vector<std::string>& Patterns() {
  static const std::vector<std::string> kPatterns = [] {
    std::vector<std::string> out;
    for (const char* cls : {"", "[a-h]", "[i-z]", "[a]", "[h-i]", "[m-o]"}) {
      for (const char* suffix : {"\\.m", "\\.om", "\\.com", "\\.g", "\\.rg", "\\.o\\.m"}) {
        out.push_back(std::string(cls) + ".*" + suffix);
      }
    }
    return out;
  }();
  return kPatterns;
}

// Every string over a small alphabet up to length 5.
std::vector<std::string> Strings() {
  const std::string alphabet = "ahiz.comrg";
  std::vector<std::string> out = {""};
  std::vector<std::string> layer = {""};
  for (int len = 1; len <= 5; ++len) {
    std::vector<std::string> next;
    for (const auto& s : layer) {
      for (char c : alphabet) next.push_back(s + c);
    }
    out.insert(out.end(), next.begin(), next.end());
    layer = std::move(next);
  }
  return out;
}

TEST(RgxTest, MatchesAgreesWithStdRegex) {
  const std::vector<std::string> strings = Strings();
  for (const std::string& p : Patterns()) {
    const Rgx r = Rgx::Parse(p);
    const std::regex oracle(p);
    for (const std::string& s : strings) {
      ASSERT_EQ(r.Matches(s), std::regex_match(s, oracle)) << p << " on " << s;
    }
  }
}

TEST(RgxTest, OverlapsAgreesWithBruteForce) {
  const std::vector<std::string> strings = Strings();
  const std::vector<std::string>& patterns = Patterns();
  std::vector<std::vector<bool>> match(patterns.size());
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    const Rgx r = Rgx::Parse(patterns[i]);
    for (const std::string& s : strings) match[i].push_back(r.Matches(s));
  }
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    for (std::size_t j = 0; j < patterns.size(); ++j) {
      bool common = false;
      for (std::size_t k = 0; k < strings.size() && !common; ++k) common = match[i][k] && match[j][k];
      EXPECT_EQ(Rgx::Parse(patterns[i]).Overlaps(Rgx::Parse(patterns[j])), common)
          << patterns[i] << " vs " << patterns[j];
    }
  }
}

TEST(RgxTest, OverlapIsSymmetric) {
  for (const std::string& a : Patterns()) {
    for (const std::string& b : Patterns()) {
      EXPECT_EQ(Rgx::Parse(a).Overlaps(Rgx::Parse(b)), Rgx::Parse(b).Overlaps(Rgx::Parse(a)));
    }
  }
}

}  // namespace
}  // namespace dtki
