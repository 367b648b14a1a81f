#ifndef DTKI_CHRONOLOG_H_
#define DTKI_CHRONOLOG_H_

// Append-only Merkle sequence with positional presence proofs and extension
// (consistency) proofs. Tree shape and hashing follow RFC 6962: leaves are
// hash(0x00 || item), interior nodes hash(0x01 || left || right), and a range
// of n leaves splits at the largest power of two strictly below n.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dtki/bytes.h"
#include "dtki/crypto.h"

namespace dtki {

class Writer;
class Reader;

namespace chrono {

Digest LeafHash(ByteView item);
Digest NodeHash(const Digest& left, const Digest& right);

struct PresenceProof {
  std::uint64_t index = 0;
  std::uint64_t size = 0;
  // Sibling digests, leaf level first.
  std::vector<Digest> path;

  void EncodeTo(Writer& w) const;
  static PresenceProof DecodeFrom(Reader& r);
  bool operator==(const PresenceProof&) const = default;
};

struct ExtensionProof {
  std::uint64_t old_size = 0;
  std::uint64_t new_size = 0;
  std::vector<Digest> nodes;

  void EncodeTo(Writer& w) const;
  static ExtensionProof DecodeFrom(Reader& r);
  bool operator==(const ExtensionProof&) const = default;
};

class ChronoLog {
 public:
  ChronoLog() = default;
  explicit ChronoLog(std::vector<Bytes> items);

  void Append(Bytes item);
  ChronoLog Appended(Bytes item) const;

  std::uint64_t size() const { return items_.size(); }
  const Bytes& item(std::uint64_t index) const { return items_.at(index); }
  const std::vector<Bytes>& items() const { return items_; }

  Digest digest() const { return DigestAt(size()); }
  // Digest of the first `prefix` items. Throws std::out_of_range past size().
  Digest DigestAt(std::uint64_t prefix) const;

  // Throws std::out_of_range unless index < size().
  PresenceProof ProvePresence(std::uint64_t index) const;
  // Proof that the first old_size items extend to the whole log.
  // Throws std::out_of_range if old_size > size().
  ExtensionProof ProveExtension(std::uint64_t old_size) const;
  // Same, between two historical prefixes.
  ExtensionProof ProveExtension(std::uint64_t old_size, std::uint64_t new_size) const;

 private:
  Digest RangeHash(std::uint64_t begin, std::uint64_t end) const;
  void AuditPath(std::uint64_t index, std::uint64_t begin, std::uint64_t end,
                 std::vector<Digest>& out) const;
  void Subproof(std::uint64_t m, std::uint64_t begin, std::uint64_t end, bool whole,
                std::vector<Digest>& out) const;

  std::vector<Bytes> items_;
  // levels_[k][i] caches the root of the perfect subtree over leaves
  // [i * 2^k, (i + 1) * 2^k).
  std::vector<std::vector<Digest>> levels_;
};

// Is `item` at proof.index of the log with root `root` and size
// proof.size?
bool VerifyPresence(const Digest& root, ByteView item, const PresenceProof& proof);

// Is (root, size) an append-only extension of (old_root, old_size)?
bool VerifyExtension(const Digest& old_root, std::uint64_t old_size, const Digest& root,
                     std::uint64_t size, const ExtensionProof& proof);

}  // namespace chrono
}  // namespace dtki

#endif  // DTKI_CHRONOLOG_H_
