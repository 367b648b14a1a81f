#ifndef DTKI_BYTES_H_
#define DTKI_BYTES_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dtki {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

// Simulated time in integer seconds.
using Time = std::int64_t;

inline Bytes ToBytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline ByteView AsView(std::string_view s) {
  return ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

std::string HexEncode(ByteView data);
// Throws std::invalid_argument on odd length or non-hex characters.
Bytes HexDecode(std::string_view hex);

// Lexicographic byte comparison: <0, 0, >0.
int CompareBytes(ByteView a, ByteView b);

}  // namespace dtki

#endif  // DTKI_BYTES_H_
