#ifndef DTKI_ACTORS_H_
#define DTKI_ACTORS_H_

// Client-side protocol engines (domain owner, browser), the mirror, and the
// bus handler that exposes a CLM. Clients talk only through the bus.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtki/certificate.h"
#include "dtki/certlog.h"
#include "dtki/maplog.h"
#include "dtki/messages.h"
#include "dtki/transport.h"

namespace dtki::actors {

struct Clock {
  Time now = 0;
};

// What a client last accepted from one log: ch_{A,L}.
struct CacheEntry {
  Digest digest;
  std::uint64_t size = 0;
  Time t = 0;
  Digest response_hash;
  std::optional<Signature> sig;
};

class DigestCache {
 public:
  // (EMPTY, 0) for a log never seen.
  CacheEntry Get(const std::string& log) const;
  // Only called once the extension from the current entry has verified.
  // Throws std::logic_error if the size would shrink.
  void Update(const std::string& log, CacheEntry entry);
  // Every accepted entry for `log`, oldest first.
  std::vector<CacheEntry> History(const std::string& log) const;
  std::vector<std::string> Logs() const;

 private:
  std::map<std::string, std::vector<CacheEntry>> entries_;
};

enum class OutcomeKind { kOk, kReject, kAlarm };

// kReject: the protocol stopped at `step`. kAlarm: evidence of misbehaviour
// (fork, stale-log, master-mismatch).
struct Outcome {
  OutcomeKind kind = OutcomeKind::kOk;
  std::string step;
  std::string detail;

  static Outcome Ok(std::string detail = "") { return {OutcomeKind::kOk, "", std::move(detail)}; }
  static Outcome Reject(std::string step, std::string detail = "") {
    return {OutcomeKind::kReject, std::move(step), std::move(detail)};
  }
  static Outcome Alarm(std::string step, std::string detail = "") {
    return {OutcomeKind::kAlarm, std::move(step), std::move(detail)};
  }
  bool ok() const { return kind == OutcomeKind::kOk; }
  std::string ToString() const;
};

// What a TLS server shows a browser: the TLS certificate with its
// master-signed registration, and the master certificate.
struct Credential {
  Certificate cert_m;
  SignedCertAction reg;
  const Certificate& cert() const { return reg.cert; }
};

struct ClientConfig {
  std::string mlm;  // log identity used for the mapping-log cache
  PublicKey mlm_key;
  std::string mirror;
  TrustedIssuers issuers;  // CAs the browser accepts
  Time validity = mlog::kDefaultValidity;
};

class Client {
 public:
  Client(std::string name, Bus& bus, const Clock& clock, ClientConfig config);
  virtual ~Client() = default;

  const std::string& name() const { return name_; }
  const DigestCache& cache() const { return cache_; }
  void SetMirror(std::string mirror) { config_.mirror = std::move(mirror); }

  // Request-mapping protocol: checks the response, then reveals the cached
  // mapping-log pair and checks the extension.
  Outcome RequestMapping(const std::string& domain, mlog::MappingResponse* out);

 protected:
  // Encodes, sends and decodes. An ErrorMessage reply comes back as is.
  std::optional<msg::Message> Exchange(std::uint64_t session, const std::string& to, const msg::Message& m);
  // Reveals the cached pair for `log` only now, asks `peer` for the extension
  // to (digest, size) and updates the cache if it verifies.
  Outcome Extend(std::uint64_t session, const std::string& peer, const std::string& log, CacheEntry fresh);

  std::string name_;
  Bus& bus_;
  const Clock& clock_;
  ClientConfig config_;
  DigestCache cache_;
};

class DomainOwner : public Client {
 public:
  DomainOwner(std::string name, std::string domain, Bus& bus, const Clock& clock, ClientConfig config,
              SigningKey master_key, Certificate master_cert);

  const std::string& domain() const { return domain_; }
  const Certificate& master_cert() const { return master_cert_; }

  Outcome PublishMaster();
  // Signs the TLS certificate with the master key and registers it.
  Outcome PublishTls(const std::string& label, const Certificate& tls);
  Outcome RevokeTls(const std::string& label);
  Outcome RevokeMaster();
  // Looks the domain up in its CLM and compares the logged master.
  Outcome CheckMaster();
  // A bl record appeared: re-verify the master in the successor CLM.
  Outcome OnBlacklist() { return CheckMaster(); }

  // Revoked credentials stay available so scenarios can replay them.
  std::optional<Credential> CredentialFor(const std::string& label) const;
  bool Revoked(const std::string& label) const { return revoked_.count(label) > 0; }
  Time last_registration_time() const { return last_t_; }

  // Relays Forward messages (privacy redirect).
  Bytes Serve(const std::string& sender, ByteView request);

 private:
  Outcome Submit(const std::string& protocol, const SignedCertAction& action, const clog::RegisterExpectation& want);

  std::string domain_;
  SigningKey master_key_;
  Certificate master_cert_;
  std::optional<SignedCertAction> master_reg_;
  std::map<std::string, SignedCertAction> tls_;
  std::set<std::string> revoked_;
  Time last_t_ = 0;
};

struct Acceptance {
  std::string domain;
  PublicKey key;
  Time t = 0;
};

class Browser : public Client {
 public:
  using Client::Client;

  // Verifies a credential at t_A = now. With `via`, the verify request is
  // relayed by that endpoint.
  Outcome Verify(const std::string& domain, const Credential& cred, const std::optional<std::string>& via = {});
  // TLS-stripping check: Ok("absent") or Ok("present").
  Outcome CheckAbsence(const std::string& domain);

  const std::vector<Acceptance>& accepted() const { return accepted_; }

 private:
  std::vector<Acceptance> accepted_;
};

// Untrusted replica of the published mapping log.
class Mirror {
 public:
  explicit Mirror(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  void Sync(std::shared_ptr<const mlog::MlogSnapshot> snapshot) {
    if (!frozen_) snapshot_ = std::move(snapshot);
  }
  // A frozen mirror keeps serving its last snapshot.
  void Freeze(bool frozen) { frozen_ = frozen; }
  bool frozen() const { return frozen_; }
  const mlog::MlogSnapshot* snapshot() const { return snapshot_.get(); }

  Bytes Serve(const std::string& sender, ByteView request);

 private:
  std::string name_;
  std::shared_ptr<const mlog::MlogSnapshot> snapshot_;
  bool frozen_ = false;
};

// Bus handler for a CLM: add, revoke, verify, status and extension requests.
Bus::Handler ServeClm(clog::CertificateLogMaintainer& clm, const Clock& clock);

}  // namespace dtki::actors

#endif  // DTKI_ACTORS_H_
