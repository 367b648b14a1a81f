#ifndef DTKI_SIZE_MODEL_H_
#define DTKI_SIZE_MODEL_H_

// Byte-size model of the three client protocols as this implementation
// encodes them. Every field costs a tag-length frame plus its payload; proofs
// cost ceil(log2 n) levels over a structure of n entries:
//   chronological proofs    one digest per level
//   ordered-map proofs      `ods_level_digests` per level (entry + sibling)
// The side bitmap of ordered-map proofs (ceil(levels / 8) bytes) is ignored.
//
// `cert` is the whole encoded certificate. The mapping and registration
// messages assume the latest mapping record is `end` and a TLS registration.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dtki::size {

struct Params {
  std::uint64_t digest = 32;
  std::uint64_t sig = 64;
  std::uint64_t cert = 300;
  std::uint64_t rgx = 20;
  std::uint64_t id = 20;
  std::uint64_t frame = 5;
  std::uint64_t scalar = 8;
  std::uint64_t ods_level_digests = 2;
  bool extension = true;  // count the extension request and proof

  // Structure sizes.
  std::uint64_t clog = 1;       // certificate log
  std::uint64_t mlog = 1;       // mapping log
  std::uint64_t rgx_count = 1;  // entries of dg^r
  std::uint64_t clm_count = 1;  // entries of dg^s
  std::uint64_t dg_rgx = 1;
  std::uint64_t dg_id = 1;
  std::uint64_t dg_a = 1;
  std::uint64_t dg_rv = 1;

  // The published assumptions: clog 10^8; mlog, rgx and CLM counts 10^3;
  // dg^rgx 10, dg^id 10^5, dg^a 10, dg^rv 100; cert 1536 B, signature 256 B,
  // rgx and id 20 B, digest 32 B.
  static Params Paper();
  // Throws std::invalid_argument for an unknown key or a value that is not a
  // positive integer (booleans take 0 or 1).
  void Set(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::uint64_t>> List() const;
};

// ceil(log2 n), 0 for n <= 1.
std::uint64_t Levels(std::uint64_t n);

struct Estimate {
  std::uint64_t mapping = 0;
  std::uint64_t publish = 0;
  std::uint64_t verify = 0;
  std::uint64_t revoke = 0;
  // (message, bytes) in protocol order, prefixed by the protocol name.
  std::vector<std::pair<std::string, std::uint64_t>> messages;
};

Estimate EstimateSizes(const Params& p);

}  // namespace dtki::size

#endif  // DTKI_SIZE_MODEL_H_
