#ifndef DTKI_MAPLOG_H_
#define DTKI_MAPLOG_H_

// Mapping log: which certificate log maintainer (CLM) is authorised for which
// group of domains. Every record is
//
//   (req, t, dg_s, dg_bl, dg_r, dg_i)
//
// with the digests taken after applying req:
//   S_s   CLM id -> encode(ClmEntry{cert, signed head of its log})
//   S_bl  blacklisted CLM id -> ""
//   S_r   rgx -> CLM id
//   S_i   CLM id -> digest of that CLM's rgx set (rgx -> "")
//
// The chronological log stores encode(MapRecord) as its items.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dtki/certificate.h"
#include "dtki/chronolog.h"
#include "dtki/crypto.h"
#include "dtki/errors.h"
#include "dtki/ordlog.h"

namespace dtki {

class Writer;
class Reader;

namespace mlog {

inline constexpr Time kDefaultValidity = 86400;

// sign_sk(n, dg, t): a CLM's signed statement about its own log.
struct LogHead {
  std::uint64_t size = 0;
  Digest digest;
  Time t = 0;
  Signature sig;

  static Bytes SignedBytes(std::uint64_t size, const Digest& digest, Time t);
  static LogHead Make(const SigningKey& key, std::uint64_t size, const Digest& digest, Time t);
  bool VerifyWith(const PublicKey& key) const;

  void EncodeTo(Writer& w) const;
  static LogHead DecodeFrom(Reader& r);
  bool operator==(const LogHead&) const = default;
};

struct ClmEntry {
  Certificate cert;
  LogHead head;

  void EncodeTo(Writer& w) const;
  static ClmEntry DecodeFrom(Reader& r);
  bool operator==(const ClmEntry&) const = default;
};

struct MapAdd {
  std::string rgx;
  std::string id;
  bool operator==(const MapAdd&) const = default;
};
struct MapDel {
  std::string rgx;
  std::string id;
  bool operator==(const MapDel&) const = default;
};
struct MapNew {
  ClmEntry entry;  // head must be (0, EMPTY, t) signed by the new CLM
  bool operator==(const MapNew&) const = default;
};
// Replaces a CLM's certificate (possibly by itself, to refresh the head).
// `endorsement` is the old key's signature over new_cert; `head` is signed by
// the new key.
struct MapMod {
  Certificate cert;
  Certificate new_cert;
  Signature endorsement;
  LogHead head;

  static Bytes EndorsedBytes(const Certificate& new_cert);
  bool operator==(const MapMod&) const = default;
};
struct MapBl {
  std::string id;
  bool operator==(const MapBl&) const = default;
};
struct MapEnd {
  bool operator==(const MapEnd&) const = default;
};

struct MapRequest {
  std::variant<MapAdd, MapDel, MapNew, MapMod, MapBl, MapEnd> v;

  std::string Name() const;
  void EncodeTo(Writer& w) const;
  static MapRequest DecodeFrom(Reader& r);
  bool operator==(const MapRequest&) const = default;
};

struct MapRecord {
  MapRequest req;
  Time t = 0;
  Digest dg_s;
  Digest dg_bl;
  Digest dg_r;
  Digest dg_i;

  void EncodeTo(Writer& w) const;
  static MapRecord DecodeFrom(Reader& r);
  bool operator==(const MapRecord&) const = default;
};

// sign_sk(t, dg, N) over the published mapping log.
struct SignedMlogTimestamp {
  Time t = 0;
  Digest digest;
  std::uint64_t size = 0;
  Signature sig;

  static Bytes SignedBytes(Time t, const Digest& digest, std::uint64_t size);
  static SignedMlogTimestamp Make(const SigningKey& key, Time t, const Digest& digest,
                                  std::uint64_t size);
  bool VerifyWith(const PublicKey& key) const;
  // Valid during [t, t + validity).
  bool FreshAt(Time now, Time validity = kDefaultValidity) const {
    return t <= now && now < t + validity;
  }

  void EncodeTo(Writer& w) const;
  static SignedMlogTimestamp DecodeFrom(Reader& r);
  bool operator==(const SignedMlogTimestamp&) const = default;
};

struct MapState {
  ods::OrderedMap s;
  ods::OrderedMap bl;
  ods::OrderedMap r;
  ods::OrderedMap i;
  std::map<std::string, ods::OrderedMap> irgx;

  // The CLM currently mapped to `domain`, if any, with the matching rgx.
  std::optional<std::pair<std::string, std::string>> Resolve(std::string_view domain) const;
  std::optional<ClmEntry> Entry(const std::string& id) const;
};

// Proof material the maintainer hands to auditors for one record. Fields not
// used by the request type are left empty.
struct MlmWitness {
  std::optional<ods::MutationProof> s;
  std::optional<ods::MutationProof> bl;
  std::optional<ods::MutationProof> r;
  std::optional<ods::MutationProof> i;
  std::optional<ods::MutationProof> irgx;
  // add/del: the CLM is active; value is s_value.
  std::optional<ods::PresenceProof> s_presence;
  // new: the id was never blacklisted.
  std::optional<ods::AbsenceProof> bl_absence;
  Bytes s_value;  // current (add/del/bl) or previous (mod) S_s value
  Digest irgx_before;
  Digest irgx_after;
  // bl: the purged rgx set, the S_r deletions and the S_r digest after each.
  std::vector<std::string> purged;
  std::vector<ods::MutationProof> r_chain;
  std::vector<Digest> r_chain_digests;

  void EncodeTo(Writer& w) const;
  static MlmWitness DecodeFrom(Reader& r);
  bool operator==(const MlmWitness& other) const;
};

struct Transition {
  MapState state;
  MlmWitness witness;
};

// Applies one request to `state`. Pure; throws RejectError.
Transition ApplyRequest(const MapState& state, const MapRequest& req, const TrustedIssuers& issuers);

// Lets an auditor tie a certificate-log record to the mapping log: where rgx
// pointed in dg_r of record `index`. Either (rgx, id) is present or rgx is
// absent. The record itself must be checked against the mapping log.
struct MappingEvidence {
  std::uint64_t index = 0;
  MapRecord record;
  std::string rgx;
  std::optional<std::string> id;
  std::optional<ods::PresenceProof> r_proof;
  std::optional<ods::AbsenceProof> r_absence;

  // The CLM id the proofs show rgx mapped to, if they verify.
  std::optional<std::string> MappedId() const;
  bool ProvesUnmapped() const;

  void EncodeTo(Writer& w) const;
  static MappingEvidence DecodeFrom(Reader& r);
};

MappingEvidence MakeEvidence(const MapState& state, const MapRecord& record, std::uint64_t index,
                             const std::string& rgx);

// Answer to a mapping request (served by mirrors and the maintainer).
struct MappingResponse {
  MapRecord record;                    // latest record of the published log
  chrono::PresenceProof record_proof;  // ... and its position in ts.digest
  std::string rgx;
  ClmEntry entry;                      // the authorised CLM
  ods::PresenceProof s_proof;          // entry in record.dg_s
  ods::PresenceProof r_proof;          // (rgx, id) in record.dg_r
  SignedMlogTimestamp ts;

  void EncodeTo(Writer& w) const;
  static MappingResponse DecodeFrom(Reader& r);
};

// Client-side checks of a mapping response, in protocol order. Returns the
// name of the first failed check, or nullopt.
std::optional<std::string> CheckMappingResponse(const MappingResponse& resp,
                                                std::string_view domain,
                                                const PublicKey& mlm_key, Time now,
                                                Time validity = kDefaultValidity);

// A published, immutable view of the mapping log.
struct MlogSnapshot {
  std::shared_ptr<const chrono::ChronoLog> log;
  MapState state;
  std::optional<MapRecord> last;
  SignedMlogTimestamp ts;

  // Throws RejectError (kNoMapping, kBlacklisted).
  MappingResponse Lookup(std::string_view domain) const;
  // Throws RejectError(kUnknownHistory) unless old_size <= new_size <= size.
  chrono::ExtensionProof ProveExtension(std::uint64_t old_size, std::uint64_t new_size) const;
};

struct MlogArchive;

class MappingLogMaintainer {
 public:
  MappingLogMaintainer(std::string name, SigningKey key, TrustedIssuers issuers,
                       Time validity = kDefaultValidity);

  const std::string& name() const { return name_; }
  const PublicKey& public_key() const { return key_.public_key(); }
  Time validity() const { return validity_; }

  // Appends one record. Requests other than `end` stay invisible to lookups
  // until the following `end`, which publishes the new state and signs a
  // fresh timestamp. Throws RejectError; nothing is appended then.
  const MapRecord& Apply(const MapRequest& req, Time t);
  // Re-signs the published state at time t.
  SignedMlogTimestamp IssueTimestamp(Time t);

  std::shared_ptr<const MlogSnapshot> published() const { return published_; }
  bool updating() const { return log_.size() != published_->log->size(); }

  std::uint64_t size() const { return log_.size(); }
  const chrono::ChronoLog& log() const { return log_; }
  const MapRecord& record(std::uint64_t k) const { return records_.at(k); }
  const MlmWitness& witness(std::uint64_t k) const { return witnesses_.at(k); }
  const MapState& state() const { return states_.back(); }
  // State after the first n records (n = 0 is the empty state).
  const MapState& StateAt(std::uint64_t n) const { return states_.at(n); }

  // Where rgx pointed after the first n_mlog records. Throws
  // RejectError(kUnknownHistory) for n_mlog outside [1, size].
  MappingEvidence ProveMapping(std::uint64_t n_mlog, const std::string& rgx) const;

  MlogArchive Archive() const;

  // Adversary hook: silently rewrites the working state before the next
  // request is applied. Only the next record's audit can notice.
  void TamperBeforeNext(std::function<void(MapState&)> tamper) { tamper_ = std::move(tamper); }

 private:
  std::string name_;
  SigningKey key_;
  TrustedIssuers issuers_;
  Time validity_;
  chrono::ChronoLog log_;
  std::vector<MapRecord> records_;
  std::vector<MlmWitness> witnesses_;
  std::vector<MapState> states_;
  std::shared_ptr<const MlogSnapshot> published_;
  std::function<void(MapState&)> tamper_;
};

}  // namespace mlog
}  // namespace dtki

#endif  // DTKI_MAPLOG_H_
