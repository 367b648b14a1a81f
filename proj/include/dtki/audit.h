#ifndef DTKI_AUDIT_H_
#define DTKI_AUDIT_H_

// Per-record audits of both logs, random sampling over them, and pairwise
// digest comparison for fork detection.
//
// A record audit re-derives record k from record k-1 using the proofs the
// maintainer supplied and stops at the first check that fails. Missing proof
// material gives an inconclusive verdict instead of a failure. The check lists
// for requests other than add and TLS reg extend the two worked examples by
// analogy, so they are this implementation's reading, not a published list.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dtki/archive.h"
#include "dtki/chronolog.h"

namespace dtki::audit {

enum class Verdict { kPass, kFail, kInconclusive };

std::string_view VerdictName(Verdict v);

struct AuditVerdict {
  std::string log;
  std::uint64_t index = 0;
  Verdict verdict = Verdict::kPass;
  std::string check;  // first failed check; empty on pass

  bool passed() const { return verdict == Verdict::kPass; }
  // "log,index,verdict,check"
  std::string ToLine() const;
};

// The mapping log as an auditor sees it. Replays the requests lazily to
// answer cross-checks from certificate-log audits.
class MlogView {
 public:
  MlogView(mlog::MlogArchive archive, TrustedIssuers issuers);

  const mlog::MlogArchive& archive() const { return archive_; }
  const TrustedIssuers& issuers() const { return issuers_; }
  std::uint64_t size() const { return archive_.records.size(); }
  bool head_ok() const { return head_ok_; }

  // Where rgx pointed in record n-1, or nullopt if the record is not in the
  // signed log or the replay disagrees with it.
  std::optional<mlog::MappingEvidence> Evidence(std::uint64_t n, const std::string& rgx) const;

 private:
  mlog::MlogArchive archive_;
  TrustedIssuers issuers_;
  bool head_ok_ = false;
  mutable std::optional<std::vector<mlog::MapState>> states_;
};

AuditVerdict AuditMlogRecord(const MlogView& view, std::uint64_t k);
AuditVerdict AuditClogRecord(const clog::ClogArchive& clog, const MlogView& mlog, std::uint64_t k);

// Every record of every log.
std::vector<AuditVerdict> AuditAll(const MlogView& mlog, const std::vector<clog::ClogArchive>& clogs);

// m independent uniform picks over the records of all logs. Deterministic in
// seed.
std::vector<AuditVerdict> RandomCheck(std::uint64_t seed, const MlogView& mlog,
                                      const std::vector<clog::ClogArchive>& clogs, std::uint64_t m);

struct LogPair {
  Digest digest;
  std::uint64_t size = 0;
};

enum class GossipResult { kConsistent, kFork };

// Extension proof from the smaller size to the larger, or nullopt if the
// maintainer cannot produce one.
using ExtensionProver =
    std::function<std::optional<chrono::ExtensionProof>(std::uint64_t old_size, std::uint64_t new_size)>;

GossipResult GossipCompare(const LogPair& a, const LogPair& b, const ExtensionProver& prover);

}  // namespace dtki::audit

#endif  // DTKI_AUDIT_H_
