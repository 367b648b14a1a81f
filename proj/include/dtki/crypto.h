#ifndef DTKI_CRYPTO_H_
#define DTKI_CRYPTO_H_

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "dtki/bytes.h"

namespace dtki {

class Writer;
class Reader;

// Raised when key or signature bytes have the wrong shape.
class KeyDecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A 32-byte SHA-256 value. Default-constructed digests equal Digest::Empty(),
// the hash of the empty string, which also stands for the empty structure.
class Digest {
 public:
  static constexpr std::size_t kSize = 32;

  Digest();
  static Digest FromBytes(ByteView bytes);
  static const Digest& Empty();

  const std::array<std::uint8_t, kSize>& bytes() const { return bytes_; }
  ByteView view() const { return ByteView(bytes_); }
  Bytes ToBytes() const { return Bytes(bytes_.begin(), bytes_.end()); }
  std::string Hex() const;
  bool IsEmpty() const { return *this == Empty(); }

  void EncodeTo(Writer& w) const;
  static Digest DecodeFrom(Reader& r);

  auto operator<=>(const Digest&) const = default;
  bool operator==(const Digest&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_;
};

Digest Hash(ByteView data);
inline Digest Hash(std::string_view s) { return Hash(AsView(s)); }

// Incremental SHA-256.
class Hasher {
 public:
  Hasher();
  Hasher& Update(ByteView data);
  Hasher& Update(std::uint8_t byte) { return Update(ByteView(&byte, 1)); }
  Hasher& Update(const Digest& d) { return Update(d.view()); }
  Hasher& UpdateU32(std::uint32_t v);
  Digest Finalize();

 private:
  alignas(64) std::array<std::uint8_t, 128> state_;
};

class PublicKey {
 public:
  static constexpr std::size_t kSize = 32;

  PublicKey() : bytes_{} {}
  static PublicKey FromBytes(ByteView bytes);

  ByteView view() const { return ByteView(bytes_); }
  std::string Hex() const;

  void EncodeTo(Writer& w) const;
  static PublicKey DecodeFrom(Reader& r);

  auto operator<=>(const PublicKey&) const = default;
  bool operator==(const PublicKey&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_;
};

class Signature {
 public:
  static constexpr std::size_t kSize = 64;

  Signature() : bytes_{} {}
  static Signature FromBytes(ByteView bytes);

  ByteView view() const { return ByteView(bytes_); }

  void EncodeTo(Writer& w) const;
  static Signature DecodeFrom(Reader& r);

  bool operator==(const Signature&) const = default;

 private:
  std::array<std::uint8_t, kSize> bytes_;
};

// Ed25519 signing key.
class SigningKey {
 public:
  static constexpr std::size_t kSeedSize = 32;

  static SigningKey Generate();
  // Deterministic key derivation; seed must be 32 bytes.
  static SigningKey FromSeed(ByteView seed);

  const PublicKey& public_key() const { return public_key_; }
  Signature Sign(ByteView message) const;

 private:
  SigningKey() = default;

  std::array<std::uint8_t, 64> secret_{};
  PublicKey public_key_;
};

bool Verify(const PublicKey& key, ByteView message, const Signature& sig);

}  // namespace dtki

#endif  // DTKI_CRYPTO_H_
