#include "dtki/chronolog.h"

#include <bit>

#include "dtki/encoding.h"

namespace dtki::chrono {
namespace {

// Largest power of two strictly less than n (n >= 2).
std::uint64_t SplitPoint(std::uint64_t n) { return std::bit_floor(n - 1); }

}  // namespace

Digest LeafHash(ByteView item) { return Hasher().Update(std::uint8_t{0x00}).Update(item).Finalize(); }

Digest NodeHash(const Digest& left, const Digest& right) {
  return Hasher().Update(std::uint8_t{0x01}).Update(left).Update(right).Finalize();
}

void PresenceProof::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kChronoPresence, [&](Writer& c) {
    c.PutUint(index);
    c.PutUint(size);
    c.PutDigests(path);
  });
}

PresenceProof PresenceProof::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kChronoPresence);
  PresenceProof p;
  p.index = c.GetUint();
  p.size = c.GetUint();
  p.path = c.GetDigests();
  c.ExpectEnd();
  return p;
}

void ExtensionProof::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kChronoExtension, [&](Writer& c) {
    c.PutUint(old_size);
    c.PutUint(new_size);
    c.PutDigests(nodes);
  });
}

ExtensionProof ExtensionProof::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kChronoExtension);
  ExtensionProof p;
  p.old_size = c.GetUint();
  p.new_size = c.GetUint();
  p.nodes = c.GetDigests();
  c.ExpectEnd();
  return p;
}

ChronoLog::ChronoLog(std::vector<Bytes> items) {
  for (auto& item : items) Append(std::move(item));
}

void ChronoLog::Append(Bytes item) {
  if (levels_.empty()) levels_.emplace_back();
  levels_[0].push_back(LeafHash(item));
  items_.push_back(std::move(item));
  for (std::size_t k = 0; levels_[k].size() % 2 == 0; ++k) {
    const auto& level = levels_[k];
    Digest parent = NodeHash(level[level.size() - 2], level.back());
    if (levels_.size() <= k + 1) levels_.emplace_back();
    levels_[k + 1].push_back(parent);
  }
}

ChronoLog ChronoLog::Appended(Bytes item) const {
  ChronoLog copy = *this;
  copy.Append(std::move(item));
  return copy;
}

Digest ChronoLog::RangeHash(std::uint64_t begin, std::uint64_t end) const {
  const std::uint64_t n = end - begin;
  if (n == 0) return Digest::Empty();
  if (std::has_single_bit(n) && begin % n == 0) {
    return levels_[std::countr_zero(n)][begin / n];
  }
  const std::uint64_t k = SplitPoint(n);
  return NodeHash(RangeHash(begin, begin + k), RangeHash(begin + k, end));
}

Digest ChronoLog::DigestAt(std::uint64_t prefix) const {
  if (prefix > size()) throw std::out_of_range("prefix beyond log size");
  return RangeHash(0, prefix);
}

void ChronoLog::AuditPath(std::uint64_t index, std::uint64_t begin, std::uint64_t end,
                          std::vector<Digest>& out) const {
  const std::uint64_t n = end - begin;
  if (n <= 1) return;
  const std::uint64_t k = SplitPoint(n);
  if (index < k) {
    AuditPath(index, begin, begin + k, out);
    out.push_back(RangeHash(begin + k, end));
  } else {
    AuditPath(index - k, begin + k, end, out);
    out.push_back(RangeHash(begin, begin + k));
  }
}

PresenceProof ChronoLog::ProvePresence(std::uint64_t index) const {
  if (index >= size()) throw std::out_of_range("presence proof index out of range");
  PresenceProof proof;
  proof.index = index;
  proof.size = size();
  AuditPath(index, 0, size(), proof.path);
  return proof;
}

void ChronoLog::Subproof(std::uint64_t m, std::uint64_t begin, std::uint64_t end, bool whole,
                         std::vector<Digest>& out) const {
  const std::uint64_t n = end - begin;
  if (m == n) {
    if (!whole) out.push_back(RangeHash(begin, end));
    return;
  }
  const std::uint64_t k = SplitPoint(n);
  if (m <= k) {
    Subproof(m, begin, begin + k, whole, out);
    out.push_back(RangeHash(begin + k, end));
  } else {
    Subproof(m - k, begin + k, end, false, out);
    out.push_back(RangeHash(begin, begin + k));
  }
}

ExtensionProof ChronoLog::ProveExtension(std::uint64_t old_size) const {
  return ProveExtension(old_size, size());
}

ExtensionProof ChronoLog::ProveExtension(std::uint64_t old_size, std::uint64_t new_size) const {
  if (new_size > size() || old_size > new_size) {
    throw std::out_of_range("extension proof sizes out of range");
  }
  ExtensionProof proof;
  proof.old_size = old_size;
  proof.new_size = new_size;
  if (old_size > 0 && old_size < new_size) Subproof(old_size, 0, new_size, true, proof.nodes);
  return proof;
}

bool VerifyPresence(const Digest& root, ByteView item, const PresenceProof& proof) {
  if (proof.index >= proof.size) return false;
  std::uint64_t fn = proof.index;
  std::uint64_t sn = proof.size - 1;
  Digest r = LeafHash(item);
  for (const Digest& p : proof.path) {
    if (sn == 0) return false;
    if ((fn & 1) || fn == sn) {
      r = NodeHash(p, r);
      while (!(fn & 1) && fn != 0) {
        fn >>= 1;
        sn >>= 1;
      }
    } else {
      r = NodeHash(r, p);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && r == root;
}

bool VerifyExtension(const Digest& old_root, std::uint64_t old_size, const Digest& root,
                     std::uint64_t size, const ExtensionProof& proof) {
  if (proof.old_size != old_size || proof.new_size != size) return false;
  if (old_size > size) return false;
  if (old_size == size) return proof.nodes.empty() && old_root == root;
  if (old_size == 0) return proof.nodes.empty() && old_root == Digest::Empty();
  if (proof.nodes.empty()) return false;

  std::vector<Digest> nodes;
  nodes.reserve(proof.nodes.size() + 1);
  if (std::has_single_bit(old_size)) nodes.push_back(old_root);
  nodes.insert(nodes.end(), proof.nodes.begin(), proof.nodes.end());

  std::uint64_t fn = old_size - 1;
  std::uint64_t sn = size - 1;
  while (fn & 1) {
    fn >>= 1;
    sn >>= 1;
  }
  Digest fr = nodes[0];
  Digest sr = nodes[0];
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const Digest& c = nodes[i];
    if (sn == 0) return false;
    if ((fn & 1) || fn == sn) {
      fr = NodeHash(c, fr);
      sr = NodeHash(c, sr);
      while (!(fn & 1) && fn != 0) {
        fn >>= 1;
        sn >>= 1;
      }
    } else {
      sr = NodeHash(sr, c);
    }
    fn >>= 1;
    sn >>= 1;
  }
  return sn == 0 && fr == old_root && sr == root;
}

}  // namespace dtki::chrono
