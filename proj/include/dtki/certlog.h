#ifndef DTKI_CERTLOG_H_
#define DTKI_CERTLOG_H_

// Certificate log maintainer (CLM). Every record is
//
//   (req, n_mlog, dg_rgx)
//
// where n_mlog is the mapping-log size the CLM acted on and dg_rgx the digest
// of its nested state after req:
//   S_rgx       rgx -> dg_id
//   id map      H(domain) -> H(encode(DomainHead))        (one per rgx)
//   S_a         FilingKey(cert) -> encode(registration)   (one per domain)
//   S_rv        FilingKey(cert) -> encode(CertRevocation) (one per domain)
// S_rgx only holds rgx with at least one domain, so a fresh CLM has
// dg_rgx = EMPTY. The chronological log item is encode(CertRecordHeader),
// which carries H(encode(req)) instead of req itself.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "dtki/certificate.h"
#include "dtki/chronolog.h"
#include "dtki/crypto.h"
#include "dtki/errors.h"
#include "dtki/maplog.h"
#include "dtki/ordlog.h"

namespace dtki {

class Writer;
class Reader;

namespace clog {

// |t_A - now| <= kDefaultWindow, and reg/rev timestamps at most this old.
inline constexpr Time kDefaultWindow = 86400;

// What the id map commits to for one domain. A domain without an active master
// certificate (never registered, or revoked) has master = none, master_t = 0.
struct DomainHead {
  std::optional<Certificate> master;
  Time master_t = 0;
  Digest dg_a;
  Digest dg_rv;

  Digest Hash() const;
  void EncodeTo(Writer& w) const;
  static DomainHead DecodeFrom(Reader& r);
  bool operator==(const DomainHead&) const = default;
};

struct CertRevocation {
  SignedCertAction reg;
  SignedCertAction rev;

  void EncodeTo(Writer& w) const;
  static CertRevocation DecodeFrom(Reader& r);
  bool operator==(const CertRevocation&) const = default;
};

struct CertReg {
  SignedCertAction action;
  bool operator==(const CertReg&) const = default;
};
struct CertRev {
  SignedCertAction action;
  bool operator==(const CertRev&) const = default;
};
struct CertUpAdd {
  Digest id_hash;
  Digest h;
  bool operator==(const CertUpAdd&) const = default;
};
struct CertUpDel {
  Digest id_hash;
  Digest h;
  bool operator==(const CertUpDel&) const = default;
};

struct CertRequest {
  std::variant<CertReg, CertRev, CertUpAdd, CertUpDel> v;

  std::string Name() const;
  void EncodeTo(Writer& w) const;
  static CertRequest DecodeFrom(Reader& r);
  bool operator==(const CertRequest&) const = default;
};

struct CertRecordHeader {
  Digest req_digest;
  std::uint64_t n_mlog = 0;
  Digest dg_rgx;

  void EncodeTo(Writer& w) const;
  static CertRecordHeader DecodeFrom(Reader& r);
  bool operator==(const CertRecordHeader&) const = default;
};

struct CertRecord {
  CertRequest req;
  std::uint64_t n_mlog = 0;
  Digest dg_rgx;

  CertRecordHeader Header() const;
  // The chronological log item.
  Bytes Item() const;

  void EncodeTo(Writer& w) const;
  static CertRecord DecodeFrom(Reader& r);
  bool operator==(const CertRecord&) const = default;
};

struct DomainState {
  std::string rgx;
  std::optional<SignedCertAction> master;
  ods::OrderedMap active;
  ods::OrderedMap revoked;

  DomainHead Head() const;
};

// The whole id subtree, handed from the old CLM to the new one on upadd.
struct DomainExport {
  std::string domain;
  std::optional<SignedCertAction> master;
  std::vector<ods::Entry> active;
  std::vector<ods::Entry> revoked;

  DomainState ToState(const std::string& rgx) const;
  void EncodeTo(Writer& w) const;
  static DomainExport DecodeFrom(Reader& r);
  bool operator==(const DomainExport&) const = default;
};

struct ClmState {
  ods::OrderedMap rgx;
  std::map<std::string, ods::OrderedMap> ids;
  std::map<std::string, DomainState> domains;

  // Recomputes every nested digest from the leaf maps.
  bool CheckCoherence() const;
};

// Proof material for one record. head_before is none when the domain was not
// in its id map; head_after is none when the record removed it (updel).
struct ClmWitness {
  std::string rgx;
  std::string domain;
  std::optional<DomainHead> head_before;
  std::optional<DomainHead> head_after;
  // The registration a rev undoes (the master's own for a master rev).
  std::optional<SignedCertAction> prior;
  std::optional<ods::MutationProof> a;
  std::optional<ods::MutationProof> rv;
  std::optional<ods::MutationProof> id;
  std::optional<ods::MutationProof> rgx_map;
  Digest dg_id_before;
  Digest dg_id_after;

  void EncodeTo(Writer& w) const;
  static ClmWitness DecodeFrom(Reader& r);
  bool operator==(const ClmWitness& other) const;
};

// m of the registration protocol. cert_proof places the certificate in dg_a
// (TLS reg) or its revocation in dg_rv (TLS rev); master actions are covered
// by the id-map proof alone.
struct RegisterMessage {
  std::string rgx;
  Digest dg_id;
  Digest dg_rgx;
  Digest dg_a;
  Digest dg_rv;
  std::uint64_t n_mlog = 0;
  Time master_t = 0;
  chrono::PresenceProof record_proof;
  ods::PresenceProof rgx_proof;
  ods::PresenceProof id_proof;
  std::optional<ods::PresenceProof> cert_proof;

  void EncodeTo(Writer& w) const;
  static RegisterMessage DecodeFrom(Reader& r);
};

struct RegisterResponse {
  Digest dg_clog;
  std::uint64_t size = 0;
  RegisterMessage m;
  Signature sig;  // over (dg_clog, size, H(encode(m)))

  static Bytes SignedBytes(const Digest& dg_clog, std::uint64_t size, const Digest& m_hash);
  void EncodeTo(Writer& w) const;
  static RegisterResponse DecodeFrom(Reader& r);
};

// What the owner expects the register response to show.
struct RegisterExpectation {
  CertRequest req;
  std::string domain;
  std::optional<Certificate> master;  // head master after the request
  // The value cert_proof must carry (none for master actions).
  std::optional<Bytes> cert_value;
  std::optional<Bytes> cert_key;
  bool in_revoked = false;
};

// Returns the first failed check, or nullopt.
std::optional<std::string> CheckRegisterResponse(const RegisterResponse& resp,
                                                 const RegisterExpectation& want,
                                                 const PublicKey& clm_key);

// m of the verification protocol. mlog_size is the CLM's current view of the
// mapping-log size; the latest record's own n_mlog sits in n_mlog.
struct VerifyMessage {
  Digest dg_a;
  Digest dg_rv;
  std::string rgx;
  Digest dg_id;
  Digest req_digest;
  std::uint64_t n_mlog = 0;
  Digest dg_rgx;
  Time master_t = 0;
  std::uint64_t mlog_size = 0;
  chrono::PresenceProof record_proof;
  ods::PresenceProof rgx_proof;
  ods::PresenceProof id_proof;
  ods::PresenceProof cert_proof;

  void EncodeTo(Writer& w) const;
  static VerifyMessage DecodeFrom(Reader& r);
};

struct VerifyResponse {
  Digest dg_clog;
  std::uint64_t size = 0;
  VerifyMessage m;
  Signature sig;  // over (dg_clog, size, t_A, H(encode(m)))

  static Bytes SignedBytes(const Digest& dg_clog, std::uint64_t size, Time t_A, const Digest& m_hash);
  void EncodeTo(Writer& w) const;
  static VerifyResponse DecodeFrom(Reader& r);
};

// Verifies σ and P1..P4 of a verify response for `reg` (the master-signed
// TLS registration the browser was shown). Returns the first failed check.
std::optional<std::string> CheckVerifyResponse(const VerifyResponse& resp, Time t_A,
                                               const std::string& domain, const Certificate& cert_m,
                                               const SignedCertAction& reg, const PublicKey& clm_key);

// Where a domain stands in the CLM, proved from dg_rgx down. Exactly one of:
//   rgx_absence                      no domain of rgx is logged
//   rgx_proof + id_absence           rgx is, but this domain is not
//   rgx_proof + id_proof + head      the domain is logged with this head
struct DomainStatus {
  std::string rgx;
  Digest dg_id;
  std::optional<ods::AbsenceProof> rgx_absence;
  std::optional<ods::PresenceProof> rgx_proof;
  std::optional<ods::AbsenceProof> id_absence;
  std::optional<ods::PresenceProof> id_proof;
  std::optional<DomainHead> head;

  // True when the proofs verify against dg_rgx and show no active master.
  // nullopt when they do not verify.
  std::optional<bool> Absent(const Digest& dg_rgx, const std::string& domain) const;

  void EncodeTo(Writer& w) const;
  static DomainStatus DecodeFrom(Reader& r);
};

struct StatusResponse {
  Digest dg_clog;
  std::uint64_t size = 0;
  Time t_A = 0;
  std::optional<CertRecordHeader> header;  // latest record, none for an empty log
  std::optional<chrono::PresenceProof> record_proof;
  DomainStatus status;
  Signature sig;

  Bytes SignedBytes() const;
  void EncodeTo(Writer& w) const;
  static StatusResponse DecodeFrom(Reader& r);
};

// Checks σ and the record position; returns the verified dg_rgx.
std::optional<Digest> CheckStatusResponse(const StatusResponse& resp, const PublicKey& clm_key);

// A refusal to verify carries the domain status instead of P.
using VerifyOutcome = std::variant<VerifyResponse, StatusResponse>;

struct ClogArchive;

class CertificateLogMaintainer {
 public:
  CertificateLogMaintainer(std::string id, SigningKey key, TrustedIssuers issuers,
                           Time window = kDefaultWindow);

  const std::string& id() const { return id_; }
  const PublicKey& public_key() const { return key_.public_key(); }

  // The rgx set the mapping log currently assigns to this CLM.
  void Manage(const std::string& rgx) { managed_.insert(rgx); }
  void Unmanage(const std::string& rgx) { managed_.erase(rgx); }
  const std::set<std::string>& managed() const { return managed_; }
  std::optional<std::string> RgxFor(std::string_view domain) const;

  // Size of the published mapping log the CLM acts on.
  void SetMlogSize(std::uint64_t n) { mlog_size_ = n; }
  std::uint64_t mlog_size() const { return mlog_size_; }

  // Throw RejectError.
  RegisterResponse Register(const SignedCertAction& reg, Time now);
  RegisterResponse Revoke(const SignedCertAction& rev, Time now);
  VerifyOutcome VerifyCert(Time t_A, const Certificate& cert, const Certificate& cert_m, Time now);
  StatusResponse Status(const std::string& domain, Time t_A, Time now) const;
  chrono::ExtensionProof ProveExtension(std::uint64_t old_size, std::uint64_t new_size) const;

  // Mapping-driven synchronisation.
  std::vector<std::string> DomainsUnder(const std::string& rgx) const;
  DomainExport Export(const std::string& domain) const;
  // h must equal the recomputed head hash of the import (kSyncIntegrity).
  void UpAdd(const DomainExport& import, const Digest& h, std::uint64_t n_mlog);
  void UpDel(const std::string& domain, std::uint64_t n_mlog);

  mlog::LogHead Head(Time t) const;
  std::uint64_t size() const { return log_.size(); }
  const chrono::ChronoLog& log() const { return log_; }
  const CertRecord& record(std::uint64_t k) const { return records_.at(k); }
  const ClmWitness& witness(std::uint64_t k) const { return witnesses_.at(k); }
  const ClmState& state() const { return state_; }
  std::optional<DomainHead> HeadOf(const std::string& domain) const;

  // Records, witnesses and positions under a head signed at time t.
  ClogArchive Archive(Time t) const;

  // Adversary hooks.
  void SkipMasterCheck(bool skip) { skip_master_check_ = skip; }
  void SkipSyncCheck(bool skip) { skip_sync_check_ = skip; }
  void ReportMlogSize(std::optional<std::uint64_t> n) { reported_mlog_size_ = n; }
  void TamperBeforeNext(std::function<void(ClmState&)> tamper) { tamper_ = std::move(tamper); }

 private:
  void Commit(const CertRequest& req, std::uint64_t n_mlog, ClmState next, ClmWitness witness);
  void Install(const std::string& domain, DomainState next, ClmState& state, ClmWitness& w) const;
  void Remove(const std::string& domain, ClmState& state, ClmWitness& w) const;
  ClmState Working();
  RegisterResponse Respond(const std::string& domain, const std::optional<Bytes>& cert_key,
                           bool in_revoked) const;
  DomainStatus StatusOf(const std::string& domain) const;
  void CheckFresh(Time t, Time now) const;

  std::string id_;
  SigningKey key_;
  TrustedIssuers issuers_;
  Time window_;
  std::set<std::string> managed_;
  std::uint64_t mlog_size_ = 0;
  chrono::ChronoLog log_;
  std::vector<CertRecord> records_;
  std::vector<ClmWitness> witnesses_;
  ClmState state_;
  bool skip_master_check_ = false;
  bool skip_sync_check_ = false;
  std::optional<std::uint64_t> reported_mlog_size_;
  std::function<void(ClmState&)> tamper_;
};

}  // namespace clog
}  // namespace dtki

#endif  // DTKI_CERTLOG_H_
