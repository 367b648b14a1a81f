#ifndef DTKI_WORLD_H_
#define DTKI_WORLD_H_

// A simulated deployment: CA, mapping-log maintainer, CLMs, mirrors, domain
// owners and browsers on one bus, driven by a virtual clock. Keys derive from
// (seed, label), so a run is reproducible from its seed.
//
// Mapping changes are queued and applied by Commit() as one batch:
//   queued records, CLM synchronisation (upadd/updel), a mod(cert, cert) head
//   refresh for every CLM whose log changed, then end.
// Synchronisation records carry the mapping-log size after the whole batch.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dtki/actors.h"
#include "dtki/archive.h"
#include "dtki/audit.h"
#include "dtki/certlog.h"
#include "dtki/key_oracle.h"
#include "dtki/maplog.h"
#include "dtki/transport.h"

namespace dtki::sim {

class WorldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class World {
 public:
  static constexpr Time kDefaultStart = 1'000'000'000;

  explicit World(std::uint64_t seed, Time start = kDefaultStart, Time validity = mlog::kDefaultValidity);
  World(const World&) = delete;
  World& operator=(const World&) = delete;

  std::uint64_t seed() const { return seed_; }
  Time now() const { return clock_.now; }
  // Moves the clock forward and re-signs the mapping-log timestamp when half
  // its validity has passed. Throws WorldError if t is in the past.
  void AdvanceTo(Time t);

  SigningKey KeyFor(const std::string& label) const;

  Bus& bus() { return bus_; }
  const Bus& bus() const { return bus_; }
  mlog::MappingLogMaintainer& mlm() { return *mlm_; }
  const KeyOracle& oracle() const { return oracle_; }

  // ---- Setup; mapping changes wait for Commit ----
  void AddCa(const std::string& name);
  void AddClm(const std::string& id);
  void AddMirror(const std::string& name);
  void Map(const std::string& rgx, const std::string& id);
  void Unmap(const std::string& rgx);
  void Move(const std::string& rgx, const std::string& to);
  void Blacklist(const std::string& id, const std::string& successor);
  void Commit();

  actors::DomainOwner& AddOwner(const std::string& name, const std::string& domain, const std::string& mirror);
  actors::Browser& AddBrowser(const std::string& name, const std::string& mirror);

  // ---- Protocol runs; honest intents feed the key oracle ----
  actors::Outcome PublishMaster(const std::string& owner);
  actors::Outcome PublishTls(const std::string& owner, const std::string& label);
  actors::Outcome RevokeTls(const std::string& owner, const std::string& label);
  actors::Outcome RevokeMaster(const std::string& owner);
  actors::Outcome CheckMaster(const std::string& owner);
  // `credential` is "owner/label" or a name made by an adversary directive.
  actors::Outcome Verify(const std::string& browser, const std::string& credential,
                         const std::optional<std::string>& via = {});
  actors::Outcome CheckAbsence(const std::string& browser, const std::string& domain);
  // Every owner whose domain was under a blacklisted CLM re-checks its master.
  std::vector<std::pair<std::string, actors::Outcome>> TakeBlacklistChecks();

  // ---- Adversary directives ----
  // A colluding CA issues a master and TLS certificate for `domain` under
  // attacker keys; nothing is logged.
  void FakeCertNoLog(const std::string& domain, const std::string& as);
  // Same, and the CLM logs the fake master over the existing one.
  void FakeCertInLog(const std::string& clm, const std::string& domain, const std::string& as);
  // From now on `victims` reach a private copy "<clm>#fork" of the CLM.
  void ForkLog(const std::string& clm, const std::vector<std::string>& victims);
  // The CLM keeps the rgx it should hand over in the next move.
  void SkipSync(const std::string& clm);
  // The mirror stops syncing.
  void StaleTimestamp(const std::string& mirror);
  // When `clm` next imports domains from a blacklisted CLM it swaps their
  // master for an attacker key.
  void SwapMasterOnBlacklist(const std::string& clm);

  // ---- Inspection ----
  clog::CertificateLogMaintainer& clm(const std::string& id);
  bool HasClm(const std::string& id) const;
  std::vector<std::string> ClmIds() const;  // honest instances, not forks
  actors::DomainOwner& owner(const std::string& name);
  actors::Browser& browser(const std::string& name);
  bool HasOwner(const std::string& name) const { return owners_.count(name) > 0; }
  bool HasBrowser(const std::string& name) const { return browsers_.count(name) > 0; }
  std::optional<std::pair<std::string, actors::Credential>> FindCredential(const std::string& name) const;

  // The persisted logs as an auditor would fetch them.
  StateDir Snapshot() const;
  std::vector<audit::AuditVerdict> AuditAll() const;

  // One line per browser acceptance: "browser,domain,key,t,status" where
  // status is the oracle's view of the key at acceptance time.
  std::vector<std::string> OracleReport() const;
  // True when every accepted key was authentic and active.
  bool OracleConsistent() const;

 private:
  struct PendingOp {
    enum Kind { kNew, kAdd, kDel, kMove, kBl } kind;
    std::string rgx;
    std::string id;
    std::string other;
  };
  struct SyncOp {
    std::string rgx;
    std::string from;
    std::string to;  // empty: the rgx is dropped
  };

  std::string Canonical(const std::string& rgx) const;
  std::optional<std::string> MappedTo(const std::string& rgx) const;
  void ApplyMlm(const mlog::MapRequest& req);
  void RunSync(const SyncOp& op, std::uint64_t n_mlog);
  actors::ClientConfig Config(const std::string& mirror) const;
  std::pair<Certificate, SigningKey> AttackerMaster(const std::string& domain, const std::string& as);
  actors::Credential AttackerCredential(const std::string& domain, const std::string& as);
  void RefreshTimestamp();

  std::uint64_t seed_;
  Time validity_;
  actors::Clock clock_;
  Bus bus_;
  std::vector<std::unique_ptr<CertificateAuthority>> cas_;
  TrustedIssuers issuers_;
  std::unique_ptr<mlog::MappingLogMaintainer> mlm_;
  std::map<std::string, std::unique_ptr<clog::CertificateLogMaintainer>> clms_;
  std::map<std::string, Certificate> clm_certs_;
  std::set<std::string> blacklisted_;
  std::set<std::string> skip_sync_;
  std::set<std::string> swap_master_;
  std::map<std::string, std::unique_ptr<actors::Mirror>> mirrors_;
  std::map<std::string, std::unique_ptr<actors::DomainOwner>> owners_;
  std::map<std::string, std::unique_ptr<actors::Browser>> browsers_;
  std::map<std::string, std::pair<std::string, actors::Credential>> fake_creds_;
  std::vector<PendingOp> pending_;
  std::set<std::string> blacklist_hits_;  // owners to re-check
  KeyOracle oracle_;
};

}  // namespace dtki::sim

#endif  // DTKI_WORLD_H_
