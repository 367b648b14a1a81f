#include "dtki/ordlog.h"

#include <functional>
#include <unordered_set>

#include "dtki/encoding.h"

namespace dtki::ods {
namespace {

// Raised when an algorithm needs a node that the witness pruned away.
struct WitnessIncomplete {};

constexpr int kMaxWitnessDepth = 512;

const Digest& DigestOf(const NodePtr& n) { return n ? n->digest : Digest::Empty(); }

Digest Priority(ByteView key) { return Hash(key); }

NodePtr MakeNode(Bytes key, Bytes value, const Digest& value_digest, NodePtr left,
                 NodePtr right) {
  auto n = std::make_shared<Node>();
  n->entry = EntryDigest(key, value_digest);
  n->priority = Priority(key);
  n->key = std::move(key);
  n->value = std::move(value);
  n->value_digest = value_digest;
  n->left = std::move(left);
  n->right = std::move(right);
  n->digest = NodeDigest(n->entry, DigestOf(n->left), DigestOf(n->right));
  return n;
}

NodePtr WithChildren(const Node& n, NodePtr left, NodePtr right) {
  auto c = std::make_shared<Node>(n);
  c->left = std::move(left);
  c->right = std::move(right);
  c->digest = NodeDigest(c->entry, DigestOf(c->left), DigestOf(c->right));
  return c;
}

NodePtr MakeStub(const Digest& d) {
  auto n = std::make_shared<Node>();
  n->stub = true;
  n->digest = d;
  return n;
}

// Shared by the real map and by verifiers running over pruned witnesses.
class Walker {
 public:
  explicit Walker(std::unordered_set<const Node*>* opened = nullptr) : opened_(opened) {}

  const Node& Open(const NodePtr& p) {
    if (p->stub) throw WitnessIncomplete{};
    if (opened_) opened_->insert(p.get());
    return *p;
  }

  const Node* Find(const NodePtr& root, ByteView key) {
    NodePtr cur = root;
    while (cur) {
      const Node& n = Open(cur);
      const int c = CompareBytes(key, n.key);
      if (c == 0) return &n;
      cur = c < 0 ? n.left : n.right;
    }
    return nullptr;
  }

  NodePtr Insert(const NodePtr& t, ByteView key, ByteView value, const Digest& value_digest) {
    if (!t) return MakeNode(Bytes(key.begin(), key.end()), Bytes(value.begin(), value.end()),
                            value_digest, nullptr, nullptr);
    const Node& n = Open(t);
    const int c = CompareBytes(key, n.key);
    if (c == 0) throw DuplicateKeyError("key already present");
    if (c < 0) {
      NodePtr l = Insert(n.left, key, value, value_digest);
      if (l->priority > n.priority) {
        return WithChildren(*l, l->left, WithChildren(n, l->right, n.right));
      }
      return WithChildren(n, std::move(l), n.right);
    }
    NodePtr r = Insert(n.right, key, value, value_digest);
    if (r->priority > n.priority) {
      return WithChildren(*r, WithChildren(n, n.left, r->left), r->right);
    }
    return WithChildren(n, n.left, std::move(r));
  }

  NodePtr Delete(const NodePtr& t, ByteView key) {
    if (!t) throw MissingKeyError("key not present");
    const Node& n = Open(t);
    const int c = CompareBytes(key, n.key);
    if (c == 0) return Merge(n.left, n.right);
    if (c < 0) return WithChildren(n, Delete(n.left, key), n.right);
    return WithChildren(n, n.left, Delete(n.right, key));
  }

  NodePtr Modify(const NodePtr& t, ByteView key, ByteView value, const Digest& value_digest) {
    if (!t) throw MissingKeyError("key not present");
    const Node& n = Open(t);
    const int c = CompareBytes(key, n.key);
    if (c == 0) {
      return MakeNode(n.key, Bytes(value.begin(), value.end()), value_digest, n.left, n.right);
    }
    if (c < 0) return WithChildren(n, Modify(n.left, key, value, value_digest), n.right);
    return WithChildren(n, n.left, Modify(n.right, key, value, value_digest));
  }

 private:
  NodePtr Merge(const NodePtr& a, const NodePtr& b) {
    if (!a) return b;
    if (!b) return a;
    const Node& x = Open(a);
    const Node& y = Open(b);
    if (x.priority > y.priority) return WithChildren(x, x.left, Merge(x.right, b));
    return WithChildren(y, Merge(a, y.left), y.right);
  }

  std::unordered_set<const Node*>* opened_;
};

NodePtr Prune(const NodePtr& n, const std::unordered_set<const Node*>& keep) {
  if (!n) return nullptr;
  if (!keep.contains(n.get())) return MakeStub(n->digest);
  return MakeNode(n->key, Bytes{}, n->value_digest, Prune(n->left, keep), Prune(n->right, keep));
}

void EncodeNode(Writer& w, const NodePtr& n) {
  if (!n) {
    w.PutComposite(Tag::kOdsNull, [](Writer&) {});
  } else if (n->stub) {
    w.PutComposite(Tag::kOdsStub, [&](Writer& c) { n->digest.EncodeTo(c); });
  } else {
    w.PutComposite(Tag::kOdsNode, [&](Writer& c) {
      c.PutBytes(n->key);
      n->value_digest.EncodeTo(c);
      EncodeNode(c, n->left);
      EncodeNode(c, n->right);
    });
  }
}

NodePtr DecodeNode(Reader& r, int depth) {
  if (depth > kMaxWitnessDepth) throw DecodeError("witness too deep");
  switch (r.PeekTag()) {
    case Tag::kOdsNull: {
      r.Enter(Tag::kOdsNull).ExpectEnd();
      return nullptr;
    }
    case Tag::kOdsStub: {
      Reader c = r.Enter(Tag::kOdsStub);
      NodePtr n = MakeStub(Digest::DecodeFrom(c));
      c.ExpectEnd();
      return n;
    }
    case Tag::kOdsNode: {
      Reader c = r.Enter(Tag::kOdsNode);
      Bytes key = c.GetBytes();
      Digest vd = Digest::DecodeFrom(c);
      NodePtr left = DecodeNode(c, depth + 1);
      NodePtr right = DecodeNode(c, depth + 1);
      c.ExpectEnd();
      return MakeNode(std::move(key), Bytes{}, vd, std::move(left), std::move(right));
    }
    default:
      throw DecodeError("unknown witness node tag");
  }
}

void CountNodes(const NodePtr& n, std::size_t& open, std::size_t& stubs) {
  if (!n) return;
  if (n->stub) {
    ++stubs;
    return;
  }
  ++open;
  CountNodes(n->left, open, stubs);
  CountNodes(n->right, open, stubs);
}

Bytes PackSides(const std::vector<bool>& sides) {
  Bytes out((sides.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < sides.size(); ++i) {
    if (sides[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80 >> (i % 8));
  }
  return out;
}

std::vector<bool> UnpackSides(const Bytes& packed, std::size_t count) {
  if (packed.size() != (count + 7) / 8) throw DecodeError("side bitmap length mismatch");
  std::vector<bool> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = packed[i / 8] & (0x80 >> (i % 8));
  for (std::size_t i = count; i < packed.size() * 8; ++i) {
    if (packed[i / 8] & (0x80 >> (i % 8))) throw DecodeError("non-canonical side bitmap");
  }
  return out;
}

bool CheckNode(const NodePtr& n, const Bytes* lo, const Bytes* hi, const Digest* parent_priority) {
  if (!n) return true;
  if (n->stub) return false;
  if (lo && CompareBytes(n->key, *lo) <= 0) return false;
  if (hi && CompareBytes(n->key, *hi) >= 0) return false;
  if (parent_priority && !(n->priority < *parent_priority)) return false;
  if (n->priority != Priority(n->key)) return false;
  if (n->digest != NodeDigest(EntryDigest(n->key, n->value_digest), DigestOf(n->left),
                              DigestOf(n->right))) {
    return false;
  }
  return CheckNode(n->left, lo, &n->key, &n->priority) &&
         CheckNode(n->right, &n->key, hi, &n->priority);
}

}  // namespace

Digest EntryDigest(ByteView key, const Digest& value_digest) {
  return Hasher()
      .Update(std::uint8_t{0x03})
      .UpdateU32(static_cast<std::uint32_t>(key.size()))
      .Update(key)
      .Update(value_digest)
      .Finalize();
}

Digest NodeDigest(const Digest& entry, const Digest& left, const Digest& right) {
  return Hasher().Update(std::uint8_t{0x02}).Update(entry).Update(left).Update(right).Finalize();
}

void PresenceProof::EncodeTo(Writer& w) const {
  std::vector<bool> sides;
  std::vector<Digest> entries, siblings;
  for (const Step& s : steps) {
    sides.push_back(s.went_left);
    entries.push_back(s.entry);
    siblings.push_back(s.sibling);
  }
  w.PutComposite(Tag::kOdsPresence, [&](Writer& c) {
    c.PutBytes(PackSides(sides));
    c.PutDigests(entries);
    c.PutDigests(siblings);
    left.EncodeTo(c);
    right.EncodeTo(c);
  });
}

PresenceProof PresenceProof::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kOdsPresence);
  Bytes packed = c.GetBytes();
  std::vector<Digest> entries = c.GetDigests();
  std::vector<Digest> siblings = c.GetDigests();
  if (entries.size() != siblings.size()) throw DecodeError("presence proof shape mismatch");
  std::vector<bool> sides = UnpackSides(packed, entries.size());
  PresenceProof p;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    p.steps.push_back({entries[i], siblings[i], sides[i]});
  }
  p.left = Digest::DecodeFrom(c);
  p.right = Digest::DecodeFrom(c);
  c.ExpectEnd();
  return p;
}

void AbsenceProof::EncodeTo(Writer& w) const {
  std::vector<bool> sides;
  std::vector<Bytes> keys;
  std::vector<Digest> values, siblings;
  for (const Step& s : steps) {
    sides.push_back(s.went_left);
    keys.push_back(s.key);
    values.push_back(s.value_digest);
    siblings.push_back(s.sibling);
  }
  w.PutComposite(Tag::kOdsAbsence, [&](Writer& c) {
    c.PutBytes(PackSides(sides));
    c.PutList(keys, [](Writer& e, const Bytes& k) { e.PutBytes(k); });
    c.PutDigests(values);
    c.PutDigests(siblings);
  });
}

AbsenceProof AbsenceProof::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kOdsAbsence);
  Bytes packed = c.GetBytes();
  std::vector<Bytes> keys = c.GetList<Bytes>([](Reader& e) { return e.GetBytes(); });
  std::vector<Digest> values = c.GetDigests();
  std::vector<Digest> siblings = c.GetDigests();
  c.ExpectEnd();
  if (keys.size() != values.size() || keys.size() != siblings.size()) {
    throw DecodeError("absence proof shape mismatch");
  }
  std::vector<bool> sides = UnpackSides(packed, keys.size());
  AbsenceProof p;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    p.steps.push_back({std::move(keys[i]), values[i], siblings[i], sides[i]});
  }
  return p;
}

void MutationProof::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kOdsMutation, [&](Writer& c) {
    c.PutUint(static_cast<std::uint64_t>(kind));
    EncodeNode(c, witness);
  });
}

MutationProof MutationProof::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kOdsMutation);
  MutationProof p;
  const std::uint64_t kind = c.GetUint();
  if (kind < 1 || kind > 3) throw DecodeError("unknown mutation kind");
  p.kind = static_cast<MutationKind>(kind);
  p.witness = DecodeNode(c, 0);
  c.ExpectEnd();
  return p;
}

bool MutationProof::operator==(const MutationProof& other) const {
  return Encode(*this) == Encode(other);
}

std::size_t MutationProof::OpenNodes() const {
  std::size_t open = 0, stubs = 0;
  CountNodes(witness, open, stubs);
  return open;
}

std::size_t MutationProof::Stubs() const {
  std::size_t open = 0, stubs = 0;
  CountNodes(witness, open, stubs);
  return stubs;
}

OrderedMap OrderedMap::FromEntries(const std::vector<Entry>& entries) {
  OrderedMap m;
  Walker walker;
  for (const Entry& e : entries) {
    m.root_ = walker.Insert(m.root_, e.key, e.value, Hash(e.value));
    ++m.size_;
  }
  return m;
}

const Digest& OrderedMap::digest() const { return DigestOf(root_); }

std::optional<Bytes> OrderedMap::find(ByteView key) const {
  Walker walker;
  const Node* n = walker.Find(root_, key);
  if (!n) return std::nullopt;
  return n->value;
}

std::vector<Entry> OrderedMap::entries() const {
  std::vector<Entry> out;
  out.reserve(size_);
  std::function<void(const NodePtr&)> visit = [&](const NodePtr& n) {
    if (!n) return;
    visit(n->left);
    out.push_back({n->key, n->value});
    visit(n->right);
  };
  visit(root_);
  return out;
}

Mutation OrderedMap::Insert(ByteView key, ByteView value) const {
  std::unordered_set<const Node*> opened;
  Walker walker(&opened);
  NodePtr after = walker.Insert(root_, key, value, Hash(value));
  return Mutation{OrderedMap(std::move(after), size_ + 1),
                  MutationProof{MutationKind::kAdd, Prune(root_, opened)}};
}

Mutation OrderedMap::Delete(ByteView key) const {
  std::unordered_set<const Node*> opened;
  Walker walker(&opened);
  NodePtr after = walker.Delete(root_, key);
  return Mutation{OrderedMap(std::move(after), size_ - 1),
                  MutationProof{MutationKind::kDelete, Prune(root_, opened)}};
}

Mutation OrderedMap::Modify(ByteView key, ByteView value) const {
  std::unordered_set<const Node*> opened;
  Walker walker(&opened);
  NodePtr after = walker.Modify(root_, key, value, Hash(value));
  return Mutation{OrderedMap(std::move(after), size_),
                  MutationProof{MutationKind::kModify, Prune(root_, opened)}};
}

PresenceProof OrderedMap::ProvePresence(ByteView key) const {
  PresenceProof proof;
  NodePtr cur = root_;
  while (cur) {
    const int c = CompareBytes(key, cur->key);
    if (c == 0) {
      proof.left = DigestOf(cur->left);
      proof.right = DigestOf(cur->right);
      return proof;
    }
    const bool left = c < 0;
    proof.steps.push_back({cur->entry, DigestOf(left ? cur->right : cur->left), left});
    cur = left ? cur->left : cur->right;
  }
  throw MissingKeyError("key not present");
}

AbsenceProof OrderedMap::ProveAbsence(ByteView key) const {
  AbsenceProof proof;
  NodePtr cur = root_;
  while (cur) {
    const int c = CompareBytes(key, cur->key);
    if (c == 0) throw DuplicateKeyError("key present");
    const bool left = c < 0;
    proof.steps.push_back({cur->key, cur->value_digest, DigestOf(left ? cur->right : cur->left), left});
    cur = left ? cur->left : cur->right;
  }
  return proof;
}

bool OrderedMap::CheckInvariants() const { return CheckNode(root_, nullptr, nullptr, nullptr); }

OrderedMap::DepthStats OrderedMap::Depths() const {
  DepthStats stats;
  std::size_t total = 0;
  std::function<void(const NodePtr&, std::size_t)> visit = [&](const NodePtr& n, std::size_t d) {
    if (!n) return;
    total += d;
    stats.max = std::max(stats.max, d);
    visit(n->left, d + 1);
    visit(n->right, d + 1);
  };
  visit(root_, 1);
  if (size_ > 0) stats.mean = static_cast<double>(total) / static_cast<double>(size_);
  return stats;
}

bool VerifyPresence(const Digest& root, ByteView key, ByteView value, const PresenceProof& proof) {
  Digest h = NodeDigest(EntryDigest(key, Hash(value)), proof.left, proof.right);
  for (auto it = proof.steps.rbegin(); it != proof.steps.rend(); ++it) {
    h = it->went_left ? NodeDigest(it->entry, h, it->sibling) : NodeDigest(it->entry, it->sibling, h);
  }
  return h == root;
}

bool VerifyAbsence(const Digest& root, ByteView key, const AbsenceProof& proof) {
  Digest h = Digest::Empty();
  for (auto it = proof.steps.rbegin(); it != proof.steps.rend(); ++it) {
    const int c = CompareBytes(key, it->key);
    if (c == 0 || (c < 0) != it->went_left) return false;
    const Digest entry = EntryDigest(it->key, it->value_digest);
    h = it->went_left ? NodeDigest(entry, h, it->sibling) : NodeDigest(entry, it->sibling, h);
  }
  return h == root;
}

namespace {

// Runs `op` over the witness and compares the resulting digest with `after`.
template <typename Op>
bool Replay(const Digest& before, const Digest& after, const MutationProof& proof,
            MutationKind kind, Op&& op) {
  if (proof.kind != kind) return false;
  if (DigestOf(proof.witness) != before) return false;
  try {
    Walker walker;
    NodePtr result = op(walker, proof.witness);
    if (!result) return after == Digest::Empty();
    return result->digest == after;
  } catch (const WitnessIncomplete&) {
    return false;
  } catch (const DuplicateKeyError&) {
    return false;
  } catch (const MissingKeyError&) {
    return false;
  }
}

}  // namespace

bool VerifyAdd(ByteView key, ByteView value, const Digest& before, const Digest& after,
               const MutationProof& proof) {
  return Replay(before, after, proof, MutationKind::kAdd, [&](Walker& w, const NodePtr& t) {
    return w.Insert(t, key, {}, Hash(value));
  });
}

bool VerifyDelete(ByteView key, ByteView value, const Digest& before, const Digest& after,
                  const MutationProof& proof) {
  const Digest vd = Hash(value);
  return Replay(before, after, proof, MutationKind::kDelete, [&](Walker& w, const NodePtr& t) {
    const Node* n = w.Find(t, key);
    if (!n || n->value_digest != vd) throw MissingKeyError("value mismatch");
    return w.Delete(t, key);
  });
}

bool VerifyModify(ByteView key, ByteView old_value, ByteView new_value, const Digest& before,
                  const Digest& after, const MutationProof& proof) {
  const Digest old_vd = Hash(old_value);
  return Replay(before, after, proof, MutationKind::kModify, [&](Walker& w, const NodePtr& t) {
    const Node* n = w.Find(t, key);
    if (!n || n->value_digest != old_vd) throw MissingKeyError("value mismatch");
    return w.Modify(t, key, {}, Hash(new_value));
  });
}

Digest DigestOf(const std::vector<Entry>& entries) {
  return OrderedMap::FromEntries(entries).digest();
}

}  // namespace dtki::ods
