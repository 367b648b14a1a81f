#include <gtest/gtest.h>

#include <random>

#include "dtki/crypto.h"
#include "dtki/encoding.h"

namespace dtki {
namespace {

TEST(HashTest, EmptyInput) {
  EXPECT_EQ(Hash(std::string_view("")).Hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Hash(std::string_view("")), Digest::Empty());
  EXPECT_TRUE(Digest().IsEmpty());
}

TEST(HashTest, Abc) {
  // hashlib.sha256(b"abc")
  EXPECT_EQ(Hash(std::string_view("abc")).Hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(HashTest, IncrementalMatchesOneShot) {
  Hasher h;
  h.Update(AsView("ab")).Update(std::uint8_t{'c'});
  EXPECT_EQ(h.Finalize(), Hash(std::string_view("abc")));
}

TEST(HashTest, DistinctInputsDistinctDigests) {
  std::set<Digest> seen;
  for (int i = 0; i < 500; ++i) seen.insert(Hash(std::to_string(i)));
  EXPECT_EQ(seen.size(), 500u);
}

TEST(DigestTest, FromBytesRejectsWrongLength) {
  EXPECT_THROW(Digest::FromBytes(Bytes(31)), DecodeError);
  EXPECT_NO_THROW(Digest::FromBytes(Bytes(32)));
}

TEST(SignatureTest, RoundTrip) {
  SigningKey k = SigningKey::FromSeed(Bytes(32, 7));
  Bytes msg = ToBytes("hello");
  Signature s = k.Sign(msg);
  EXPECT_TRUE(Verify(k.public_key(), msg, s));
}

TEST(SignatureTest, FlippedMessageByte) {
  SigningKey k = SigningKey::Generate();
  Bytes msg = ToBytes("hello");
  Signature s = k.Sign(msg);
  for (std::size_t i = 0; i < msg.size(); ++i) {
    Bytes bad = msg;
    bad[i] ^= 1;
    EXPECT_FALSE(Verify(k.public_key(), bad, s));
  }
}

TEST(SignatureTest, WrongKey) {
  SigningKey a = SigningKey::FromSeed(Bytes(32, 1));
  SigningKey b = SigningKey::FromSeed(Bytes(32, 2));
  Bytes msg = ToBytes("m");
  EXPECT_FALSE(Verify(b.public_key(), msg, a.Sign(msg)));
}

TEST(SignatureTest, MalformedBytes) {
  EXPECT_THROW(PublicKey::FromBytes(Bytes(31)), KeyDecodeError);
  EXPECT_THROW(Signature::FromBytes(Bytes(63)), KeyDecodeError);
  EXPECT_THROW(SigningKey::FromSeed(Bytes(5)), KeyDecodeError);
}

TEST(SignatureTest, SeedIsDeterministic) {
  EXPECT_EQ(SigningKey::FromSeed(Bytes(32, 9)).public_key(),
            SigningKey::FromSeed(Bytes(32, 9)).public_key());
}

TEST(EncodingTest, EmptyList) {
  Writer w;
  w.PutList(std::vector<Digest>{});
  EXPECT_EQ(HexEncode(w.bytes()), "0400000000");
}

TEST(EncodingTest, ScalarLayout) {
  Writer w;
  w.PutUint(258);
  w.PutString("ab");
  w.PutBool(true);
  EXPECT_EQ(HexEncode(w.bytes()),
            "02000000080000000000000102"
            "03000000026162"
            "050000000101");
}

TEST(EncodingTest, TruncatedInput) {
  Writer w;
  w.PutString("abc");
  Bytes b = w.Take();
  for (std::size_t n = 0; n < b.size(); ++n) {
    Reader r(ByteView(b.data(), n));
    EXPECT_THROW(r.GetString(), DecodeError) << n;
  }
}

TEST(EncodingTest, UnknownTag) {
  Bytes b = {0xee, 0, 0, 0, 0};
  Reader r(b);
  EXPECT_THROW(r.GetBytes(), DecodeError);
}

TEST(EncodingTest, TrailingBytesRejected) {
  Bytes b = Encode(Hash(std::string_view("x")));
  b.push_back(0);
  EXPECT_THROW(Decode<Digest>(b), DecodeError);
}

TEST(EncodingTest, MalformedBool) {
  Bytes b = {0x05, 0, 0, 0, 1, 2};
  Reader r(b);
  EXPECT_THROW(r.GetBool(), DecodeError);
}

// A small composite used to property-test the round trip and injectivity.
struct Sample {
  std::uint64_t a = 0;
  std::int64_t b = 0;
  std::string s;
  Bytes raw;
  std::vector<Digest> ds;
  std::optional<Digest> opt;

  void EncodeTo(Writer& w) const {
    w.PutComposite(Tag::kSignedPayload, [&](Writer& c) {
      c.PutUint(a);
      c.PutInt(b);
      c.PutString(s);
      c.PutBytes(raw);
      c.PutDigests(ds);
      c.PutOptional(opt);
    });
  }
  static Sample DecodeFrom(Reader& r) {
    Reader c = r.Enter(Tag::kSignedPayload);
    Sample x;
    x.a = c.GetUint();
    x.b = c.GetInt();
    x.s = c.GetString();
    x.raw = c.GetBytes();
    x.ds = c.GetDigests();
    x.opt = c.GetOptional<Digest>();
    c.ExpectEnd();
    return x;
  }
  bool operator==(const Sample&) const = default;
};

Sample RandomSample(std::mt19937_64& rng) {
  Sample x;
  x.a = rng();
  x.b = static_cast<std::int64_t>(rng());
  x.s = std::string(rng() % 5, static_cast<char>('a' + rng() % 3));
  x.raw = Bytes(rng() % 4, static_cast<std::uint8_t>(rng() % 2));
  for (std::uint64_t i = rng() % 3; i > 0; --i) x.ds.push_back(Hash(std::to_string(rng() % 4)));
  if (rng() % 2) x.opt = Hash(std::to_string(rng() % 2));
  return x;
}

TEST(EncodingTest, RoundTripProperty) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    Sample x = RandomSample(rng);
    EXPECT_EQ(Decode<Sample>(Encode(x)), x);
  }
}

TEST(EncodingTest, InjectiveProperty) {
  std::mt19937_64 rng(2);
  std::map<Bytes, Sample> seen;
  for (int i = 0; i < 5000; ++i) {
    Sample x = RandomSample(rng);
    x.a %= 3;
    x.b %= 3;
    auto [it, inserted] = seen.emplace(Encode(x), x);
    if (!inserted) EXPECT_EQ(it->second, x);
  }
}

TEST(HexTest, RoundTrip) {
  Bytes b = {0x00, 0xab, 0xff};
  EXPECT_EQ(HexEncode(b), "00abff");
  EXPECT_EQ(HexDecode("00ABff"), b);
  EXPECT_THROW(HexDecode("abc"), std::invalid_argument);
  EXPECT_THROW(HexDecode("zz"), std::invalid_argument);
}

}  // namespace
}  // namespace dtki
