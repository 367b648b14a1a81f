#include "dtki/rgx.h"

namespace dtki {
namespace {

bool ClassChar(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

bool SuffixChar(char c) { return ClassChar(c) || c == '-'; }

std::string ClassText(const std::bitset<128>& set) {
  std::string out = "[";
  for (int c = 0; c < 128; ++c) {
    if (!set[c]) continue;
    int end = c;
    while (end + 1 < 128 && set[end + 1]) ++end;
    out += static_cast<char>(c);
    if (end > c) {
      out += '-';
      out += static_cast<char>(end);
    }
    c = end;
  }
  return out + "]";
}

}  // namespace

Rgx Rgx::Parse(std::string_view text) {
  Rgx r;
  std::size_t pos = 0;
  if (!text.empty() && text[0] == '[') {
    const std::size_t close = text.find(']');
    if (close == std::string_view::npos) throw RgxParseError("unterminated class");
    std::string_view body = text.substr(1, close - 1);
    if (body.empty()) throw RgxParseError("empty class");
    std::bitset<128> set;
    for (std::size_t i = 0; i < body.size();) {
      const char lo = body[i];
      if (!ClassChar(lo)) throw RgxParseError("bad class character");
      char hi = lo;
      if (i + 2 < body.size() && body[i + 1] == '-') {
        hi = body[i + 2];
        if (!ClassChar(hi)) throw RgxParseError("bad class character");
        // Ranges may not straddle digits and letters.
        if ((lo <= '9') != (hi <= '9') || hi < lo) throw RgxParseError("bad class range");
        i += 3;
      } else {
        i += 1;
      }
      for (int c = lo; c <= hi; ++c) set.set(c);
    }
    r.first_ = set;
    pos = close + 1;
  }
  if (text.substr(pos, 2) != ".*") throw RgxParseError("missing .* wildcard");
  pos += 2;
  if (pos >= text.size()) throw RgxParseError("empty suffix");
  while (pos < text.size()) {
    const char c = text[pos];
    if (c == '\\') {
      if (pos + 1 >= text.size() || text[pos + 1] != '.') throw RgxParseError("bad escape");
      r.suffix_ += '.';
      pos += 2;
    } else if (SuffixChar(c)) {
      r.suffix_ += c;
      ++pos;
    } else {
      throw RgxParseError("character outside the pattern grammar");
    }
  }
  if (r.suffix_[0] != '.') throw RgxParseError("suffix must start with an escaped dot");
  if (r.first_) r.text_ = ClassText(*r.first_);
  r.text_ += ".*";
  for (char c : r.suffix_) r.text_ += c == '.' ? std::string("\\.") : std::string(1, c);
  return r;
}

bool Rgx::IsValid(std::string_view text) {
  try {
    Parse(text);
    return true;
  } catch (const RgxParseError&) {
    return false;
  }
}

bool Rgx::Matches(std::string_view domain) const {
  if (!domain.ends_with(suffix_)) return false;
  if (!first_) return true;
  if (domain.size() < suffix_.size() + 1) return false;
  const auto c = static_cast<unsigned char>(domain[0]);
  return c < 128 && (*first_)[c];
}

bool Rgx::Overlaps(const Rgx& other) const {
  if (!suffix_.ends_with(other.suffix_) && !other.suffix_.ends_with(suffix_)) return false;
  if (!first_ || !other.first_) return true;
  return (*first_ & *other.first_).any();
}

}  // namespace dtki
