#ifndef DTKI_ORDLOG_H_
#define DTKI_ORDLOG_H_

// Authenticated dictionary over byte-string keys: a Merkle treap whose node
// priorities are hash(key). For a fixed key set the treap shape is unique, so
// the root digest depends only on the entry set (history independence).
//
//   value digest  = hash(value)
//   entry digest  = hash(0x03 || u32be(|key|) || key || value digest)
//   node digest   = hash(0x02 || entry digest || left digest || right digest)
//
// An absent child, and the empty map, have digest Digest::Empty().
//
// Mutation proofs are pruned copies of the pre-state tree in which every node
// the treap algorithm inspects is kept open and everything else is replaced
// by its digest. A verifier re-runs the same deterministic algorithm over the
// pruned tree; the witness pins both the before and after digests.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dtki/bytes.h"
#include "dtki/crypto.h"

namespace dtki {

class Writer;
class Reader;

namespace ods {

class DuplicateKeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingKeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Digest EntryDigest(ByteView key, const Digest& value_digest);
Digest NodeDigest(const Digest& entry, const Digest& left, const Digest& right);

struct Entry {
  Bytes key;
  Bytes value;
  bool operator==(const Entry&) const = default;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

// A tree node. Stubs stand in for pruned subtrees and carry only a digest.
struct Node {
  bool stub = false;
  Bytes key;
  Bytes value;  // empty inside witnesses; only value_digest is committed
  Digest value_digest;
  Digest entry;
  Digest priority;
  NodePtr left;
  NodePtr right;
  Digest digest;
};

// Presence path from the root down to the entry.
struct PresenceProof {
  struct Step {
    Digest entry;  // entry digest of the ancestor
    Digest sibling;
    bool went_left = false;
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> steps;
  Digest left;   // children of the proven node
  Digest right;

  void EncodeTo(Writer& w) const;
  static PresenceProof DecodeFrom(Reader& r);
  bool operator==(const PresenceProof&) const = default;
};

// Search path from the root down to the empty slot where the key would sit.
struct AbsenceProof {
  struct Step {
    Bytes key;
    Digest value_digest;
    Digest sibling;
    bool went_left = false;
    bool operator==(const Step&) const = default;
  };
  std::vector<Step> steps;

  void EncodeTo(Writer& w) const;
  static AbsenceProof DecodeFrom(Reader& r);
  bool operator==(const AbsenceProof&) const = default;
};

enum class MutationKind : std::uint8_t { kAdd = 1, kDelete = 2, kModify = 3 };

struct MutationProof {
  MutationKind kind = MutationKind::kAdd;
  NodePtr witness;  // pruned pre-state tree

  void EncodeTo(Writer& w) const;
  static MutationProof DecodeFrom(Reader& r);
  bool operator==(const MutationProof& other) const;
  // Number of opened nodes and stubs in the witness.
  std::size_t OpenNodes() const;
  std::size_t Stubs() const;
};

class OrderedMap;

struct Mutation;

class OrderedMap {
 public:
  OrderedMap() = default;
  // Builds a map from an entry list (any order). Throws DuplicateKeyError.
  static OrderedMap FromEntries(const std::vector<Entry>& entries);

  const Digest& digest() const;
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool contains(ByteView key) const { return find(key).has_value(); }
  std::optional<Bytes> find(ByteView key) const;
  // In-order entries.
  std::vector<Entry> entries() const;

  // Throw DuplicateKeyError / MissingKeyError on precondition violations.
  Mutation Insert(ByteView key, ByteView value) const;
  Mutation Delete(ByteView key) const;
  Mutation Modify(ByteView key, ByteView value) const;

  // Throws MissingKeyError if absent.
  PresenceProof ProvePresence(ByteView key) const;
  // Throws DuplicateKeyError if present.
  AbsenceProof ProveAbsence(ByteView key) const;

  // BST order on keys and heap order on priorities.
  bool CheckInvariants() const;
  struct DepthStats {
    double mean = 0;
    std::size_t max = 0;
  };
  // Depth of every node, root at depth 1.
  DepthStats Depths() const;

  const NodePtr& root() const { return root_; }

 private:
  OrderedMap(NodePtr root, std::size_t size) : root_(std::move(root)), size_(size) {}

  NodePtr root_;
  std::size_t size_ = 0;
};

struct Mutation {
  OrderedMap map;
  MutationProof proof;
};

// Membership and non-membership checks against a root digest.
bool VerifyPresence(const Digest& root, ByteView key, ByteView value, const PresenceProof& proof);
bool VerifyAbsence(const Digest& root, ByteView key, const AbsenceProof& proof);

// Single-mutation checks: `after` is `before` with exactly one add, delete or
// value replacement.
bool VerifyAdd(ByteView key, ByteView value, const Digest& before, const Digest& after,
               const MutationProof& proof);
bool VerifyDelete(ByteView key, ByteView value, const Digest& before, const Digest& after,
                  const MutationProof& proof);
bool VerifyModify(ByteView key, ByteView old_value, ByteView new_value, const Digest& before,
                  const Digest& after, const MutationProof& proof);

// Digest of the map holding exactly these entries, computed from scratch.
Digest DigestOf(const std::vector<Entry>& entries);

}  // namespace ods
}  // namespace dtki

#endif  // DTKI_ORDLOG_H_
