#include "dtki/crypto.h"

#include <sodium.h>

#include <algorithm>
#include <cstring>

#include "dtki/encoding.h"

namespace dtki {
namespace {

void EnsureSodium() {
  static const bool ready = [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
    return true;
  }();
  (void)ready;
}

// SHA-256 of the empty string.
constexpr std::array<std::uint8_t, Digest::kSize> kEmptyDigest = {
    0xe3, 0xb0, 0xc4, 0x42, 0x98, 0xfc, 0x1c, 0x14, 0x9a, 0xfb, 0xf4,
    0xc8, 0x99, 0x6f, 0xb9, 0x24, 0x27, 0xae, 0x41, 0xe4, 0x64, 0x9b,
    0x93, 0x4c, 0xa4, 0x95, 0x99, 0x1b, 0x78, 0x52, 0xb8, 0x55};

static_assert(sizeof(crypto_hash_sha256_state) <= 128);

crypto_hash_sha256_state* AsState(std::array<std::uint8_t, 128>& buf) {
  return reinterpret_cast<crypto_hash_sha256_state*>(buf.data());
}

}  // namespace

std::string HexEncode(ByteView data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes HexDecode(std::string_view hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("bad hex character");
  };
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

int CompareBytes(ByteView a, ByteView b) {
  const std::size_t n = std::min(a.size(), b.size());
  if (n > 0) {
    const int c = std::memcmp(a.data(), b.data(), n);
    if (c != 0) return c < 0 ? -1 : 1;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

Digest::Digest() : bytes_(kEmptyDigest) {}

Digest Digest::FromBytes(ByteView bytes) {
  if (bytes.size() != kSize) throw DecodeError("digest must be 32 bytes");
  Digest d;
  std::copy(bytes.begin(), bytes.end(), d.bytes_.begin());
  return d;
}

const Digest& Digest::Empty() {
  static const Digest empty;
  return empty;
}

std::string Digest::Hex() const { return HexEncode(view()); }

void Digest::EncodeTo(Writer& w) const { w.PutBytes(view()); }

Digest Digest::DecodeFrom(Reader& r) { return FromBytes(r.GetBytes()); }

Digest Hash(ByteView data) { return Hasher().Update(data).Finalize(); }

Hasher::Hasher() {
  EnsureSodium();
  crypto_hash_sha256_init(AsState(state_));
}

Hasher& Hasher::Update(ByteView data) {
  crypto_hash_sha256_update(AsState(state_), data.data(), data.size());
  return *this;
}

Hasher& Hasher::UpdateU32(std::uint32_t v) {
  const std::uint8_t be[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                              static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
  return Update(ByteView(be, 4));
}

Digest Hasher::Finalize() {
  std::array<std::uint8_t, Digest::kSize> out;
  crypto_hash_sha256_final(AsState(state_), out.data());
  return Digest::FromBytes(out);
}

PublicKey PublicKey::FromBytes(ByteView bytes) {
  if (bytes.size() != kSize) throw KeyDecodeError("public key must be 32 bytes");
  PublicKey k;
  std::copy(bytes.begin(), bytes.end(), k.bytes_.begin());
  return k;
}

std::string PublicKey::Hex() const { return HexEncode(view()); }

void PublicKey::EncodeTo(Writer& w) const { w.PutBytes(view()); }

PublicKey PublicKey::DecodeFrom(Reader& r) {
  try {
    return FromBytes(r.GetBytes());
  } catch (const KeyDecodeError& e) {
    throw DecodeError(e.what());
  }
}

Signature Signature::FromBytes(ByteView bytes) {
  if (bytes.size() != kSize) throw KeyDecodeError("signature must be 64 bytes");
  Signature s;
  std::copy(bytes.begin(), bytes.end(), s.bytes_.begin());
  return s;
}

void Signature::EncodeTo(Writer& w) const { w.PutBytes(view()); }

Signature Signature::DecodeFrom(Reader& r) {
  try {
    return FromBytes(r.GetBytes());
  } catch (const KeyDecodeError& e) {
    throw DecodeError(e.what());
  }
}

SigningKey SigningKey::Generate() {
  EnsureSodium();
  SigningKey k;
  std::array<std::uint8_t, PublicKey::kSize> pk;
  crypto_sign_ed25519_keypair(pk.data(), k.secret_.data());
  k.public_key_ = PublicKey::FromBytes(pk);
  return k;
}

SigningKey SigningKey::FromSeed(ByteView seed) {
  if (seed.size() != kSeedSize) throw KeyDecodeError("signing seed must be 32 bytes");
  EnsureSodium();
  SigningKey k;
  std::array<std::uint8_t, PublicKey::kSize> pk;
  crypto_sign_ed25519_seed_keypair(pk.data(), k.secret_.data(), seed.data());
  k.public_key_ = PublicKey::FromBytes(pk);
  return k;
}

Signature SigningKey::Sign(ByteView message) const {
  std::array<std::uint8_t, Signature::kSize> sig;
  crypto_sign_ed25519_detached(sig.data(), nullptr, message.data(), message.size(),
                               secret_.data());
  return Signature::FromBytes(sig);
}

bool Verify(const PublicKey& key, ByteView message, const Signature& sig) {
  EnsureSodium();
  return crypto_sign_ed25519_verify_detached(sig.view().data(), message.data(), message.size(),
                                             key.view().data()) == 0;
}

}  // namespace dtki
