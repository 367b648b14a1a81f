#include "dtki/audit.h"

#include <random>
#include <sstream>

#include "dtki/encoding.h"
#include "dtki/rgx.h"

namespace dtki::audit {
namespace {

struct Outcome {
  Verdict verdict;
  std::string check;
};
using Result = std::optional<Outcome>;

// First failing condition wins.
#define AUDIT_CHECK(cond, label) \
  if (!(cond)) return Outcome{Verdict::kFail, label}
#define AUDIT_NEED(cond, label) \
  if (!(cond)) return Outcome{Verdict::kInconclusive, label}

Bytes Key(std::string_view s) { return ToBytes(s); }

bool At(const Digest& root, std::uint64_t size, std::uint64_t k, ByteView item, const chrono::PresenceProof& p) {
  return p.index == k && p.size == size && chrono::VerifyPresence(root, item, p);
}

// ---- Mapping log -----------------------------------------------------------

struct Prev {
  Time t = 0;
  Digest dg_s, dg_bl, dg_r, dg_i;
};

Result AddOrDel(const mlog::MapRecord& rec, const Prev& prev, const mlog::MlmWitness& w, const std::string& rgx,
                const std::string& id, bool add) {
  AUDIT_CHECK(rec.dg_s == prev.dg_s, "dg-s-unchanged");
  AUDIT_CHECK(rec.dg_bl == prev.dg_bl, "dg-bl-unchanged");
  if (add) AUDIT_CHECK(Rgx::IsValid(rgx) && Rgx::Parse(rgx).text() == rgx, "rgx-canonical");
  AUDIT_NEED(w.s_presence && w.r && w.irgx && w.i, "missing-proof");
  AUDIT_CHECK(ods::VerifyPresence(prev.dg_s, Key(id), w.s_value, *w.s_presence), "clm-active");
  try {
    const mlog::ClmEntry entry = Decode<mlog::ClmEntry>(w.s_value);
    AUDIT_CHECK(entry.cert.subject == id && entry.cert.kind == CertKind::kLog, "entry-id");
  } catch (const DecodeError&) {
    return Outcome{Verdict::kFail, "entry-id"};
  }
  if (add) {
    AUDIT_CHECK(ods::VerifyAdd(Key(rgx), Key(id), prev.dg_r, rec.dg_r, *w.r), "dg-r-add");
    AUDIT_CHECK(ods::VerifyAdd(Key(rgx), {}, w.irgx_before, w.irgx_after, *w.irgx), "dg-irgx-add");
  } else {
    AUDIT_CHECK(ods::VerifyDelete(Key(rgx), Key(id), prev.dg_r, rec.dg_r, *w.r), "dg-r-delete");
    AUDIT_CHECK(ods::VerifyDelete(Key(rgx), {}, w.irgx_before, w.irgx_after, *w.irgx), "dg-irgx-delete");
  }
  AUDIT_CHECK(ods::VerifyModify(Key(id), w.irgx_before.ToBytes(), w.irgx_after.ToBytes(), prev.dg_i, rec.dg_i, *w.i),
              "dg-i-modify");
  return std::nullopt;
}

bool LogHeadOk(const mlog::ClmEntry& e, const TrustedIssuers& issuers) {
  return e.cert.kind == CertKind::kLog && VerifyIssuer(e.cert, issuers) && e.head.VerifyWith(e.cert.key);
}

Result MlogChecks(const MlogView& view, std::uint64_t k) {
  const mlog::MlogArchive& a = view.archive();
  AUDIT_CHECK(view.head_ok(), "signed-head");
  AUDIT_NEED(k < a.positions.size() && k < a.records.size(), "unpublished");
  const mlog::MapRecord& rec = a.records[k];
  AUDIT_CHECK(At(a.ts.digest, a.ts.size, k, Encode(rec), a.positions[k]), "record-presence");
  Prev prev{0, Digest::Empty(), Digest::Empty(), Digest::Empty(), Digest::Empty()};
  if (k > 0) {
    const mlog::MapRecord& p = a.records[k - 1];
    AUDIT_NEED(At(a.ts.digest, a.ts.size, k - 1, Encode(p), a.positions[k - 1]), "previous-record");
    prev = Prev{p.t, p.dg_s, p.dg_bl, p.dg_r, p.dg_i};
  }
  AUDIT_NEED(k < a.witnesses.size(), "missing-witness");
  const mlog::MlmWitness& w = a.witnesses[k];
  AUDIT_CHECK(rec.t >= prev.t, "time-order");

  return std::visit(
      [&](const auto& req) -> Result {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, mlog::MapAdd>) {
          return AddOrDel(rec, prev, w, req.rgx, req.id, true);
        } else if constexpr (std::is_same_v<T, mlog::MapDel>) {
          return AddOrDel(rec, prev, w, req.rgx, req.id, false);
        } else if constexpr (std::is_same_v<T, mlog::MapNew>) {
          const std::string& id = req.entry.cert.subject;
          AUDIT_CHECK(rec.dg_r == prev.dg_r, "dg-r-unchanged");
          AUDIT_CHECK(rec.dg_bl == prev.dg_bl, "dg-bl-unchanged");
          AUDIT_CHECK(LogHeadOk(req.entry, view.issuers()) && req.entry.head.size == 0 &&
                          req.entry.head.digest == Digest::Empty(),
                      "entry-valid");
          AUDIT_NEED(w.bl_absence && w.s && w.i, "missing-proof");
          AUDIT_CHECK(ods::VerifyAbsence(prev.dg_bl, Key(id), *w.bl_absence), "not-blacklisted");
          AUDIT_CHECK(ods::VerifyAdd(Key(id), Encode(req.entry), prev.dg_s, rec.dg_s, *w.s), "dg-s-add");
          AUDIT_CHECK(ods::VerifyAdd(Key(id), Digest::Empty().ToBytes(), prev.dg_i, rec.dg_i, *w.i), "dg-i-add");
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, mlog::MapMod>) {
          const std::string& id = req.cert.subject;
          AUDIT_CHECK(rec.dg_bl == prev.dg_bl, "dg-bl-unchanged");
          AUDIT_CHECK(rec.dg_r == prev.dg_r, "dg-r-unchanged");
          AUDIT_CHECK(rec.dg_i == prev.dg_i, "dg-i-unchanged");
          AUDIT_NEED(w.s, "missing-proof");
          mlog::ClmEntry old;
          try {
            old = Decode<mlog::ClmEntry>(w.s_value);
          } catch (const DecodeError&) {
            return Outcome{Verdict::kFail, "mod-valid"};
          }
          const mlog::ClmEntry next{req.new_cert, req.head};
          AUDIT_CHECK(old.cert == req.cert && req.new_cert.subject == id && LogHeadOk(next, view.issuers()) &&
                          Verify(req.cert.key, mlog::MapMod::EndorsedBytes(req.new_cert), req.endorsement) &&
                          req.head.size >= old.head.size,
                      "mod-valid");
          AUDIT_CHECK(ods::VerifyModify(Key(id), w.s_value, Encode(next), prev.dg_s, rec.dg_s, *w.s), "dg-s-modify");
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, mlog::MapBl>) {
          AUDIT_NEED(w.bl && w.s && w.i && w.r_chain.size() == w.purged.size() &&
                         w.r_chain_digests.size() == w.purged.size(),
                     "missing-proof");
          AUDIT_CHECK(ods::VerifyAdd(Key(req.id), {}, prev.dg_bl, rec.dg_bl, *w.bl), "dg-bl-add");
          AUDIT_CHECK(ods::VerifyDelete(Key(req.id), w.s_value, prev.dg_s, rec.dg_s, *w.s), "dg-s-delete");
          std::vector<ods::Entry> purged;
          for (const std::string& r : w.purged) purged.push_back({Key(r), {}});
          AUDIT_CHECK(ods::DigestOf(purged) == w.irgx_before, "purge-complete");
          Digest cur = prev.dg_r;
          for (std::size_t j = 0; j < w.purged.size(); ++j) {
            AUDIT_CHECK(ods::VerifyDelete(Key(w.purged[j]), Key(req.id), cur, w.r_chain_digests[j], w.r_chain[j]),
                        "dg-r-purge");
            cur = w.r_chain_digests[j];
          }
          AUDIT_CHECK(cur == rec.dg_r, "dg-r-purge");
          AUDIT_CHECK(ods::VerifyDelete(Key(req.id), w.irgx_before.ToBytes(), prev.dg_i, rec.dg_i, *w.i),
                      "dg-i-delete");
          return std::nullopt;
        } else {
          AUDIT_CHECK(rec.dg_s == prev.dg_s && rec.dg_bl == prev.dg_bl && rec.dg_r == prev.dg_r &&
                          rec.dg_i == prev.dg_i,
                      "end-no-op");
          return std::nullopt;
        }
      },
      rec.req.v);
}

// ---- Certificate log -------------------------------------------------------

Result RegChecks(const SignedCertAction& a, const clog::ClmWitness& w, const TrustedIssuers& issuers) {
  const Certificate& c = a.cert;
  AUDIT_CHECK(a.action == CertAction::kReg && w.domain == c.subject, "domain-hash");
  AUDIT_NEED(w.head_after, "missing-proof");
  const clog::DomainHead& after = *w.head_after;
  const clog::DomainHead before = w.head_before.value_or(clog::DomainHead{});
  if (c.kind == CertKind::kMaster) {
    AUDIT_CHECK(a.VerifyWith(c.key), "signature");
    AUDIT_CHECK(VerifyIssuer(c, issuers) && c.ValidAt(a.t), "master-valid");
    AUDIT_CHECK(!before.master, "no-existing-master");
    AUDIT_CHECK(after.dg_rv == before.dg_rv, "dg-rv-unchanged");
    AUDIT_CHECK(after.dg_a == before.dg_a, "dg-a-unchanged");
    AUDIT_CHECK(after.master == c && after.master_t == a.t, "head-master");
    return std::nullopt;
  }
  AUDIT_CHECK(before.master && a.VerifyWith(before.master->key), "signature");
  AUDIT_CHECK(c.kind == CertKind::kTls && VerifyIssuer(c, issuers) && before.master->ValidAt(a.t) &&
                  before.master->subject == c.subject,
              "master-valid");
  AUDIT_CHECK(after.dg_rv == before.dg_rv, "dg-rv-unchanged");
  AUDIT_NEED(w.a, "missing-proof");
  AUDIT_CHECK(ods::VerifyAdd(c.FilingKey(), Encode(a), before.dg_a, after.dg_a, *w.a), "dg-a-add");
  AUDIT_CHECK(after.master == before.master && after.master_t == before.master_t, "head-master");
  return std::nullopt;
}

Result RevChecks(const SignedCertAction& a, const clog::ClmWitness& w) {
  const Certificate& c = a.cert;
  AUDIT_CHECK(a.action == CertAction::kRev && w.domain == c.subject, "domain-hash");
  AUDIT_NEED(w.head_before && w.head_after && w.prior && w.rv, "missing-proof");
  const clog::DomainHead& before = *w.head_before;
  const clog::DomainHead& after = *w.head_after;
  const SignedCertAction& prior = *w.prior;
  AUDIT_CHECK(prior.cert == c && prior.action == CertAction::kReg, "prior-registration");
  AUDIT_CHECK(a.t > prior.t, "revoke-order");
  const Bytes revocation = Encode(clog::CertRevocation{prior, a});
  if (before.master && *before.master == c) {
    AUDIT_CHECK(prior.t == before.master_t && prior.VerifyWith(c.key) && a.VerifyWith(c.key), "signature");
    AUDIT_CHECK(!after.master && after.master_t == 0, "head-master");
    AUDIT_CHECK(after.dg_a == before.dg_a, "dg-a-unchanged");
    AUDIT_CHECK(ods::VerifyAdd(c.FilingKey(), revocation, before.dg_rv, after.dg_rv, *w.rv), "dg-rv-add");
    return std::nullopt;
  }
  AUDIT_CHECK(before.master && prior.VerifyWith(before.master->key) && a.VerifyWith(before.master->key),
              "signature");
  AUDIT_CHECK(after.master == before.master && after.master_t == before.master_t, "head-master");
  AUDIT_NEED(w.a, "missing-proof");
  AUDIT_CHECK(ods::VerifyDelete(c.FilingKey(), Encode(prior), before.dg_a, after.dg_a, *w.a), "dg-a-delete");
  AUDIT_CHECK(ods::VerifyAdd(c.FilingKey(), revocation, before.dg_rv, after.dg_rv, *w.rv), "dg-rv-add");
  return std::nullopt;
}

Result ClogChecks(const clog::ClogArchive& c, const MlogView& mlog, std::uint64_t k) {
  AUDIT_CHECK(c.head.VerifyWith(c.key) && c.positions.size() == c.head.size, "signed-head");
  AUDIT_NEED(k < c.positions.size() && k < c.records.size(), "unpublished");
  const clog::CertRecord& rec = c.records[k];
  AUDIT_CHECK(At(c.head.digest, c.head.size, k, rec.Item(), c.positions[k]), "record-presence");
  Digest prev_dg_rgx = Digest::Empty();
  std::uint64_t prev_n = 0;
  if (k > 0) {
    const clog::CertRecord& p = c.records[k - 1];
    AUDIT_NEED(At(c.head.digest, c.head.size, k - 1, p.Item(), c.positions[k - 1]), "previous-record");
    prev_dg_rgx = p.dg_rgx;
    prev_n = p.n_mlog;
  }
  AUDIT_NEED(k < c.witnesses.size(), "missing-witness");
  const clog::ClmWitness& w = c.witnesses[k];
  AUDIT_CHECK(rec.n_mlog >= prev_n, "n-mlog-order");
  AUDIT_CHECK(Rgx::IsValid(w.rgx) && Rgx::Parse(w.rgx).Matches(w.domain), "rgx-instance");

  const bool removal = std::holds_alternative<clog::CertUpDel>(rec.req.v);
  Result r = std::visit(
      [&](const auto& req) -> Result {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, clog::CertReg>) {
          return RegChecks(req.action, w, mlog.issuers());
        } else if constexpr (std::is_same_v<T, clog::CertRev>) {
          return RevChecks(req.action, w);
        } else if constexpr (std::is_same_v<T, clog::CertUpAdd>) {
          AUDIT_CHECK(Hash(w.domain) == req.id_hash, "domain-hash");
          AUDIT_CHECK(!w.head_before, "upadd-fresh");
          AUDIT_NEED(w.head_after, "missing-proof");
          AUDIT_CHECK(w.head_after->Hash() == req.h, "upadd-hash");
          return std::nullopt;
        } else {
          AUDIT_CHECK(Hash(w.domain) == req.id_hash, "domain-hash");
          AUDIT_CHECK(!w.head_after, "updel-removes");
          AUDIT_NEED(w.head_before, "missing-proof");
          AUDIT_CHECK(w.head_before->Hash() == req.h, "updel-hash");
          return std::nullopt;
        }
      },
      rec.req.v);
  if (r) return r;

  AUDIT_NEED(w.id && w.rgx_map, "missing-proof");
  const Bytes idk = Hash(w.domain).ToBytes();
  if (!w.head_before) {
    AUDIT_CHECK(ods::VerifyAdd(idk, w.head_after->Hash().ToBytes(), w.dg_id_before, w.dg_id_after, *w.id),
                "dg-id-add");
  } else if (!w.head_after) {
    AUDIT_CHECK(ods::VerifyDelete(idk, w.head_before->Hash().ToBytes(), w.dg_id_before, w.dg_id_after, *w.id),
                "dg-id-delete");
  } else {
    AUDIT_CHECK(ods::VerifyModify(idk, w.head_before->Hash().ToBytes(), w.head_after->Hash().ToBytes(),
                                  w.dg_id_before, w.dg_id_after, *w.id),
                "dg-id-modify");
  }
  // S_rgx only holds rgx whose id map is non-empty.
  if (w.dg_id_before.IsEmpty()) {
    AUDIT_CHECK(ods::VerifyAdd(Key(w.rgx), w.dg_id_after.ToBytes(), prev_dg_rgx, rec.dg_rgx, *w.rgx_map),
                "dg-rgx-add");
  } else if (w.dg_id_after.IsEmpty()) {
    AUDIT_CHECK(ods::VerifyDelete(Key(w.rgx), w.dg_id_before.ToBytes(), prev_dg_rgx, rec.dg_rgx, *w.rgx_map),
                "dg-rgx-delete");
  } else {
    AUDIT_CHECK(ods::VerifyModify(Key(w.rgx), w.dg_id_before.ToBytes(), w.dg_id_after.ToBytes(), prev_dg_rgx,
                                  rec.dg_rgx, *w.rgx_map),
                "dg-rgx-modify");
  }

  std::optional<mlog::MappingEvidence> ev = mlog.Evidence(rec.n_mlog, w.rgx);
  AUDIT_NEED(ev, "mapping-evidence");
  if (removal) {
    std::optional<std::string> id = ev->MappedId();
    AUDIT_CHECK(ev->ProvesUnmapped() || (id && *id != c.id), "mapping-cross-check");
  } else {
    AUDIT_CHECK(ev->MappedId() == c.id, "mapping-cross-check");
  }
  return std::nullopt;
}

#undef AUDIT_CHECK
#undef AUDIT_NEED

AuditVerdict ToVerdict(const std::string& log, std::uint64_t k, const Result& r) {
  if (!r) return AuditVerdict{log, k, Verdict::kPass, ""};
  return AuditVerdict{log, k, r->verdict, r->check};
}

}  // namespace

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

std::string AuditVerdict::ToLine() const {
  std::ostringstream out;
  out << log << ',' << index << ',' << VerdictName(verdict) << ',' << check;
  return out.str();
}

MlogView::MlogView(mlog::MlogArchive archive, TrustedIssuers issuers)
    : archive_(std::move(archive)), issuers_(std::move(issuers)) {
  head_ok_ = archive_.ts.VerifyWith(archive_.key) && archive_.ts.size <= archive_.records.size() &&
             archive_.positions.size() == archive_.ts.size;
}

std::optional<mlog::MappingEvidence> MlogView::Evidence(std::uint64_t n, const std::string& rgx) const {
  if (n == 0 || n > archive_.positions.size() || !head_ok_) return std::nullopt;
  const mlog::MapRecord& rec = archive_.records[n - 1];
  if (!At(archive_.ts.digest, archive_.ts.size, n - 1, Encode(rec), archive_.positions[n - 1])) return std::nullopt;
  if (!states_) {
    try {
      states_ = archive_.Replay(issuers_);
    } catch (const RejectError&) {
      states_.emplace();
    }
  }
  if (n >= states_->size()) return std::nullopt;
  const mlog::MapState& st = (*states_)[n];
  if (st.r.digest() != rec.dg_r) return std::nullopt;
  return mlog::MakeEvidence(st, rec, n - 1, rgx);
}

AuditVerdict AuditMlogRecord(const MlogView& view, std::uint64_t k) {
  return ToVerdict(view.archive().name, k, MlogChecks(view, k));
}

AuditVerdict AuditClogRecord(const clog::ClogArchive& clog, const MlogView& mlog, std::uint64_t k) {
  return ToVerdict(clog.id, k, ClogChecks(clog, mlog, k));
}

std::vector<AuditVerdict> AuditAll(const MlogView& mlog, const std::vector<clog::ClogArchive>& clogs) {
  std::vector<AuditVerdict> out;
  for (std::uint64_t k = 0; k < mlog.size(); ++k) out.push_back(AuditMlogRecord(mlog, k));
  for (const clog::ClogArchive& c : clogs) {
    for (std::uint64_t k = 0; k < c.records.size(); ++k) out.push_back(AuditClogRecord(c, mlog, k));
  }
  return out;
}

std::vector<AuditVerdict> RandomCheck(std::uint64_t seed, const MlogView& mlog,
                                      const std::vector<clog::ClogArchive>& clogs, std::uint64_t m) {
  std::uint64_t total = mlog.size();
  for (const clog::ClogArchive& c : clogs) total += c.records.size();
  std::vector<AuditVerdict> out;
  if (total == 0) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  for (std::uint64_t i = 0; i < m; ++i) {
    std::uint64_t x = pick(rng);
    if (x < mlog.size()) {
      out.push_back(AuditMlogRecord(mlog, x));
      continue;
    }
    x -= mlog.size();
    for (const clog::ClogArchive& c : clogs) {
      if (x < c.records.size()) {
        out.push_back(AuditClogRecord(c, mlog, x));
        break;
      }
      x -= c.records.size();
    }
  }
  return out;
}

GossipResult GossipCompare(const LogPair& a, const LogPair& b, const ExtensionProver& prover) {
  if (a.size == b.size) return a.digest == b.digest ? GossipResult::kConsistent : GossipResult::kFork;
  const LogPair& lo = a.size < b.size ? a : b;
  const LogPair& hi = a.size < b.size ? b : a;
  std::optional<chrono::ExtensionProof> p = prover(lo.size, hi.size);
  if (!p || !chrono::VerifyExtension(lo.digest, lo.size, hi.digest, hi.size, *p)) return GossipResult::kFork;
  return GossipResult::kConsistent;
}

}  // namespace dtki::audit
