#ifndef DTKI_RGX_H_
#define DTKI_RGX_H_

// Domain-group patterns of the form  [class]? ".*" suffix
//
//   ".*\.org"        every name ending in ".org"
//   "[a-h].*\.com"   names ending in ".com" whose first character is a..h
//
// Classes hold ranges over [a-z0-9]; the suffix is a literal starting with an
// escaped dot and otherwise made of [a-z0-9-] and escaped dots.

#include <bitset>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dtki {

class RgxParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class Rgx {
 public:
  // Throws RgxParseError for anything outside the grammar.
  static Rgx Parse(std::string_view text);
  static bool IsValid(std::string_view text);

  bool Matches(std::string_view domain) const;
  // Whether some domain name matches both patterns.
  bool Overlaps(const Rgx& other) const;

  // Canonical text: ranges sorted and merged. Used as the map key.
  const std::string& text() const { return text_; }
  const std::string& suffix() const { return suffix_; }
  const std::optional<std::bitset<128>>& first() const { return first_; }

  bool operator==(const Rgx& other) const { return text_ == other.text_; }

 private:
  std::optional<std::bitset<128>> first_;
  std::string suffix_;
  std::string text_;
};

}  // namespace dtki

#endif  // DTKI_RGX_H_
