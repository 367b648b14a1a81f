#include "dtki/ordlog.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "dtki/encoding.h"
#include "golden_util.h"

namespace dtki::ods {
namespace {

Bytes B(const std::string& s) { return ToBytes(s); }

std::vector<Entry> RandomEntries(std::mt19937_64& rng, int n) {
  std::set<std::string> keys;
  while (static_cast<int>(keys.size()) < n) keys.insert("k" + std::to_string(rng() % 100000));
  std::vector<Entry> out;
  for (const auto& k : keys) out.push_back({B(k), B("v" + std::to_string(rng() % 1000))});
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

TEST(OrderedMapTest, EmptyDigest) {
  EXPECT_EQ(OrderedMap().digest(), Digest::Empty());
  EXPECT_EQ(DigestOf({}), Digest::Empty());
}

TEST(OrderedMapTest, SingleNode) {
  OrderedMap m = OrderedMap::FromEntries({{B("a"), B("v")}});
  // hashlib: sha256(02 || sha256(03 || u32(1) || "a" || sha256("v")) || E || E)
  EXPECT_EQ(m.digest().Hex(), "7ebe6e9bc519f9b4394e3af8b7f93f5e299c0149a83b11456df09fd5bce0de7d");
}

TEST(OrderedMapTest, ThreeKeysEveryOrder) {
  std::vector<Entry> e = {{B("a"), B("1")}, {B("b"), B("2")}, {B("c"), B("3")}};
  std::sort(e.begin(), e.end(), [](const Entry& x, const Entry& y) { return x.key < y.key; });
  std::set<Digest> digests;
  do {
    OrderedMap m;
    for (const Entry& x : e) m = m.Insert(x.key, x.value).map;
    digests.insert(m.digest());
  } while (std::next_permutation(e.begin(), e.end(),
                                 [](const Entry& x, const Entry& y) { return x.key < y.key; }));
  ASSERT_EQ(digests.size(), 1u);
  // Independent treap build in Python.
  EXPECT_EQ(digests.begin()->Hex(),
            "6af87c423ca55f7de821f49501d3adfe9ffe0806f3996a61ba74d4bebcf9aa73");
}

TEST(OrderedMapTest, Errors) {
  OrderedMap m = OrderedMap::FromEntries({{B("a"), B("1")}});
  EXPECT_THROW(m.Insert(B("a"), B("2")), DuplicateKeyError);
  EXPECT_THROW(m.Delete(B("b")), MissingKeyError);
  EXPECT_THROW(m.Modify(B("b"), B("2")), MissingKeyError);
  EXPECT_THROW(m.ProvePresence(B("b")), MissingKeyError);
  EXPECT_THROW(m.ProveAbsence(B("a")), DuplicateKeyError);
  EXPECT_THROW(OrderedMap::FromEntries({{B("a"), B("1")}, {B("a"), B("2")}}), DuplicateKeyError);
}

TEST(OrderedMapTest, FindAndEntries) {
  OrderedMap m = OrderedMap::FromEntries({{B("b"), B("2")}, {B("a"), B("1")}});
  EXPECT_EQ(m.find(B("a")), B("1"));
  EXPECT_FALSE(m.find(B("c")).has_value());
  std::vector<Entry> expected = {{B("a"), B("1")}, {B("b"), B("2")}};
  EXPECT_EQ(m.entries(), expected);
  EXPECT_EQ(m.size(), 2u);
}

TEST(MutationTest, InsertIntoEmpty) {
  Mutation mu = OrderedMap().Insert(B("k"), B("v"));
  EXPECT_EQ(mu.map.size(), 1u);
  EXPECT_TRUE(VerifyAdd(B("k"), B("v"), Digest::Empty(), mu.map.digest(), mu.proof));
}

TEST(MutationTest, DeleteRestoresDigest) {
  std::mt19937_64 rng(3);
  OrderedMap m = OrderedMap::FromEntries(RandomEntries(rng, 50));
  Mutation add = m.Insert(B("zz"), B("x"));
  EXPECT_EQ(add.map.Delete(B("zz")).map.digest(), m.digest());
}

TEST(MutationTest, ModifyTwiceRestores) {
  std::mt19937_64 rng(4);
  for (int n = 1; n <= 200; n += 13) {
    std::vector<Entry> e = RandomEntries(rng, n);
    OrderedMap m = OrderedMap::FromEntries(e);
    const Entry& pick = e[rng() % e.size()];
    Mutation a = m.Modify(pick.key, B("other"));
    EXPECT_TRUE(VerifyModify(pick.key, pick.value, B("other"), m.digest(), a.map.digest(), a.proof));
    Mutation b = a.map.Modify(pick.key, pick.value);
    EXPECT_EQ(b.map.digest(), m.digest());
  }
}

TEST(MutationTest, AddWithUnrelatedDifferenceRejected) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<Entry> e = RandomEntries(rng, 1 + rng() % 100);
    OrderedMap m = OrderedMap::FromEntries(e);
    Mutation add = m.Insert(B("new"), B("x"));
    const Entry& other = e[rng() % e.size()];
    Mutation skewed = add.map.Modify(other.key, B("changed"));
    EXPECT_FALSE(VerifyAdd(B("new"), B("x"), m.digest(), skewed.map.digest(), add.proof));
    Mutation dropped = add.map.Delete(other.key);
    EXPECT_FALSE(VerifyAdd(B("new"), B("x"), m.digest(), dropped.map.digest(), add.proof));
    EXPECT_FALSE(VerifyAdd(B("new"), B("y"), m.digest(), add.map.digest(), add.proof));
    EXPECT_FALSE(VerifyAdd(B("neW"), B("x"), m.digest(), add.map.digest(), add.proof));
  }
}

TEST(MutationTest, WrongKindRejected) {
  OrderedMap m = OrderedMap::FromEntries({{B("a"), B("1")}, {B("b"), B("2")}});
  Mutation del = m.Delete(B("a"));
  EXPECT_TRUE(VerifyDelete(B("a"), B("1"), m.digest(), del.map.digest(), del.proof));
  EXPECT_FALSE(VerifyDelete(B("a"), B("2"), m.digest(), del.map.digest(), del.proof));
  EXPECT_FALSE(VerifyAdd(B("a"), B("1"), del.map.digest(), m.digest(), del.proof));
}

TEST(MutationTest, WitnessIsPruned) {
  std::mt19937_64 rng(6);
  OrderedMap m = OrderedMap::FromEntries(RandomEntries(rng, 1000));
  Mutation add = m.Insert(B("fresh"), B("v"));
  EXPECT_LT(add.proof.OpenNodes(), 60u);
  EXPECT_GT(add.proof.Stubs(), 0u);
  EXPECT_EQ(Decode<MutationProof>(Encode(add.proof)), add.proof);
}

TEST(MutationTest, DeepWitnessRejected) {
  // A hand-built witness nested beyond the decoder's depth limit.
  Bytes inner = {0x1b, 0, 0, 0, 0};
  for (int i = 0; i < 600; ++i) {
    Writer w;
    w.PutComposite(Tag::kOdsNode, [&](Writer& c) {
      c.PutBytes(B("k"));
      Digest().EncodeTo(c);
      Reader r(inner);
      (void)r;
    });
    Bytes node = w.Take();
    // Splice the previous level in as the left child, then a null right child.
    Bytes body(node.begin() + 5, node.end());
    body.insert(body.end(), inner.begin(), inner.end());
    body.insert(body.end(), {0x1b, 0, 0, 0, 0});
    Bytes framed = {0x1d};
    for (int s = 3; s >= 0; --s) framed.push_back(static_cast<std::uint8_t>(body.size() >> (8 * s)));
    framed.insert(framed.end(), body.begin(), body.end());
    inner = framed;
  }
  Writer w;
  w.PutComposite(Tag::kOdsMutation, [&](Writer& c) { c.PutUint(1); });
  Bytes top = w.Take();
  Bytes body(top.begin() + 5, top.end());
  body.insert(body.end(), inner.begin(), inner.end());
  Bytes framed = {0x1a};
  for (int s = 3; s >= 0; --s) framed.push_back(static_cast<std::uint8_t>(body.size() >> (8 * s)));
  framed.insert(framed.end(), body.begin(), body.end());
  EXPECT_THROW(Decode<MutationProof>(framed), DecodeError);
}

TEST(ProofTest, AbsenceInEmptyMap) {
  AbsenceProof p = OrderedMap().ProveAbsence(B("x"));
  EXPECT_TRUE(p.steps.empty());
  EXPECT_TRUE(VerifyAbsence(Digest::Empty(), B("x"), p));
}

TEST(ProofTest, PresenceRoundTrip) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 200; n += 7) {
    std::vector<Entry> e = RandomEntries(rng, n);
    OrderedMap m = OrderedMap::FromEntries(e);
    for (const Entry& x : e) {
      PresenceProof p = m.ProvePresence(x.key);
      EXPECT_TRUE(VerifyPresence(m.digest(), x.key, x.value, p));
      EXPECT_FALSE(VerifyPresence(m.digest(), x.key, B("wrong"), p));
      EXPECT_EQ(Decode<PresenceProof>(Encode(p)), p);
    }
  }
}

TEST(ProofTest, BruteForceMembership) {
  // Alphabet of every key "a".."z"; maps hold random subsets.
  std::mt19937_64 rng(8);
  std::vector<Bytes> alphabet;
  for (char c = 'a'; c <= 'z'; ++c) alphabet.push_back(Bytes{static_cast<std::uint8_t>(c)});
  for (int t = 0; t < 100; ++t) {
    const int n = rng() % 33;
    std::vector<Bytes> shuffled = alphabet;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::vector<Entry> e;
    for (int i = 0; i < std::min<int>(n, shuffled.size()); ++i) e.push_back({shuffled[i], B("v")});
    OrderedMap m = OrderedMap::FromEntries(e);
    for (const Bytes& key : alphabet) {
      const bool member = m.contains(key);
      if (member) {
        EXPECT_TRUE(VerifyPresence(m.digest(), key, B("v"), m.ProvePresence(key)));
        for (const Bytes& other : alphabet) {
          if (m.contains(other)) continue;
          // An absence proof built for some absent key never covers a present one.
          EXPECT_FALSE(VerifyAbsence(m.digest(), key, m.ProveAbsence(other)));
          break;
        }
      } else {
        AbsenceProof p = m.ProveAbsence(key);
        EXPECT_TRUE(VerifyAbsence(m.digest(), key, p));
        EXPECT_EQ(Decode<AbsenceProof>(Encode(p)), p);
        for (const Entry& x : e) {
          EXPECT_FALSE(VerifyPresence(m.digest(), key, B("v"), m.ProvePresence(x.key)));
        }
      }
    }
  }
}

TEST(ProofTest, AbsenceForPresentKeyRejected) {
  std::mt19937_64 rng(9);
  std::vector<Entry> e = RandomEntries(rng, 32);
  OrderedMap m = OrderedMap::FromEntries(e);
  for (const Entry& x : e) {
    // Every absence path the map can produce, checked against a present key.
    for (const std::string& probe : {std::string("k"), std::string("k99999x"), std::string("")}) {
      AbsenceProof p = m.ProveAbsence(B(probe));
      EXPECT_FALSE(VerifyAbsence(m.digest(), x.key, p));
    }
  }
}

TEST(InvariantTest, ShapeAfterMutations) {
  std::mt19937_64 rng(10);
  OrderedMap m;
  std::map<Bytes, Bytes> model;
  for (int i = 0; i < 2000; ++i) {
    Bytes key = B("k" + std::to_string(rng() % 300));
    if (model.contains(key)) {
      if (rng() % 2) {
        m = m.Delete(key).map;
        model.erase(key);
      } else {
        m = m.Modify(key, B("m")).map;
        model[key] = B("m");
      }
    } else {
      m = m.Insert(key, B("i")).map;
      model[key] = B("i");
    }
    if (i % 100 == 0) ASSERT_TRUE(m.CheckInvariants());
  }
  std::vector<Entry> e;
  for (const auto& [k, v] : model) e.push_back({k, v});
  EXPECT_EQ(m.entries(), e);
  EXPECT_EQ(m.digest(), DigestOf(e));
}

TEST(InvariantTest, LogarithmicDepth) {
  std::mt19937_64 rng(11);
  OrderedMap m = OrderedMap::FromEntries(RandomEntries(rng, 1024));
  OrderedMap::DepthStats d = m.Depths();
  EXPECT_LE(d.mean, 30.0);
  EXPECT_LE(d.max, 60u);
}

TEST(OrderedMapGolden, SmallMaps) {
  for (int n = 0; n <= 3; ++n) {
    std::vector<Entry> e;
    for (int i = 0; i < n; ++i) e.push_back({B("k" + std::to_string(i)), B("v" + std::to_string(i))});
    OrderedMap m = OrderedMap::FromEntries(e);
    Writer w;
    m.digest().EncodeTo(w);
    for (const Entry& x : m.entries()) m.ProvePresence(x.key).EncodeTo(w);
    testing::ExpectGolden("ods_n" + std::to_string(n) + ".bin", w.bytes());
  }
}

}  // namespace
}  // namespace dtki::ods
