#include "dtki/certlog.h"

#include <cstdlib>

#include "dtki/archive.h"
#include "dtki/encoding.h"
#include "dtki/rgx.h"

namespace dtki::clog {
namespace {

[[noreturn]] void Reject(ErrorCode code, const std::string& what) { throw RejectError(code, what); }

Bytes Key(std::string_view s) { return ToBytes(s); }
Bytes IdKey(std::string_view domain) { return Hash(domain).ToBytes(); }

void PutEntries(Writer& w, const std::vector<ods::Entry>& entries) {
  w.PutList(entries, [](Writer& e, const ods::Entry& x) {
    e.PutBytes(x.key);
    e.PutBytes(x.value);
  });
}

std::vector<ods::Entry> GetEntries(Reader& r) {
  return r.GetList<ods::Entry>([](Reader& e) {
    ods::Entry x;
    x.key = e.GetBytes();
    x.value = e.GetBytes();
    return x;
  });
}

bool RecordAt(const Digest& dg_clog, std::uint64_t size, const CertRecordHeader& header,
              const chrono::PresenceProof& proof) {
  return proof.size == size && proof.index + 1 == size &&
         chrono::VerifyPresence(dg_clog, Encode(header), proof);
}

}  // namespace

// ---- Value encodings -------------------------------------------------------

Digest DomainHead::Hash() const { return dtki::Hash(Encode(*this)); }

void DomainHead::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kDomainHead, [&](Writer& c) {
    c.PutOptional(master);
    c.PutInt(master_t);
    dg_a.EncodeTo(c);
    dg_rv.EncodeTo(c);
  });
}

DomainHead DomainHead::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kDomainHead);
  DomainHead h;
  h.master = c.GetOptional<Certificate>();
  h.master_t = c.GetInt();
  h.dg_a = Digest::DecodeFrom(c);
  h.dg_rv = Digest::DecodeFrom(c);
  c.ExpectEnd();
  return h;
}

void CertRevocation::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kCertRevocation, [&](Writer& c) {
    reg.EncodeTo(c);
    rev.EncodeTo(c);
  });
}

CertRevocation CertRevocation::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kCertRevocation);
  CertRevocation v;
  v.reg = SignedCertAction::DecodeFrom(c);
  v.rev = SignedCertAction::DecodeFrom(c);
  c.ExpectEnd();
  return v;
}

std::string CertRequest::Name() const {
  static const char* kNames[] = {"reg", "rev", "upadd", "updel"};
  return kNames[v.index()];
}

void CertRequest::EncodeTo(Writer& w) const {
  std::visit(
      [&](const auto& req) {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, CertReg>) {
          w.PutComposite(Tag::kCertReg, [&](Writer& c) { req.action.EncodeTo(c); });
        } else if constexpr (std::is_same_v<T, CertRev>) {
          w.PutComposite(Tag::kCertRev, [&](Writer& c) { req.action.EncodeTo(c); });
        } else {
          const Tag tag = std::is_same_v<T, CertUpAdd> ? Tag::kCertUpAdd : Tag::kCertUpDel;
          w.PutComposite(tag, [&](Writer& c) {
            req.id_hash.EncodeTo(c);
            req.h.EncodeTo(c);
          });
        }
      },
      v);
}

CertRequest CertRequest::DecodeFrom(Reader& r) {
  CertRequest out;
  const Tag tag = r.PeekTag();
  switch (tag) {
    case Tag::kCertReg:
    case Tag::kCertRev: {
      Reader c = r.Enter(tag);
      SignedCertAction a = SignedCertAction::DecodeFrom(c);
      c.ExpectEnd();
      if (tag == Tag::kCertReg) {
        out.v = CertReg{a};
      } else {
        out.v = CertRev{a};
      }
      break;
    }
    case Tag::kCertUpAdd:
    case Tag::kCertUpDel: {
      Reader c = r.Enter(tag);
      Digest id_hash = Digest::DecodeFrom(c);
      Digest h = Digest::DecodeFrom(c);
      c.ExpectEnd();
      if (tag == Tag::kCertUpAdd) {
        out.v = CertUpAdd{id_hash, h};
      } else {
        out.v = CertUpDel{id_hash, h};
      }
      break;
    }
    default:
      throw DecodeError("unknown certificate request tag");
  }
  return out;
}

void CertRecordHeader::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kCertRecordHeader, [&](Writer& c) {
    req_digest.EncodeTo(c);
    c.PutUint(n_mlog);
    dg_rgx.EncodeTo(c);
  });
}

CertRecordHeader CertRecordHeader::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kCertRecordHeader);
  CertRecordHeader h;
  h.req_digest = Digest::DecodeFrom(c);
  h.n_mlog = c.GetUint();
  h.dg_rgx = Digest::DecodeFrom(c);
  c.ExpectEnd();
  return h;
}

CertRecordHeader CertRecord::Header() const { return CertRecordHeader{Hash(Encode(req)), n_mlog, dg_rgx}; }

Bytes CertRecord::Item() const { return Encode(Header()); }

void CertRecord::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kCertRecord, [&](Writer& c) {
    req.EncodeTo(c);
    c.PutUint(n_mlog);
    dg_rgx.EncodeTo(c);
  });
}

CertRecord CertRecord::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kCertRecord);
  CertRecord rec;
  rec.req = CertRequest::DecodeFrom(c);
  rec.n_mlog = c.GetUint();
  rec.dg_rgx = Digest::DecodeFrom(c);
  c.ExpectEnd();
  return rec;
}

DomainHead DomainState::Head() const {
  DomainHead h;
  if (master) {
    h.master = master->cert;
    h.master_t = master->t;
  }
  h.dg_a = active.digest();
  h.dg_rv = revoked.digest();
  return h;
}

DomainState DomainExport::ToState(const std::string& rgx) const {
  DomainState s;
  s.rgx = rgx;
  s.master = master;
  s.active = ods::OrderedMap::FromEntries(active);
  s.revoked = ods::OrderedMap::FromEntries(revoked);
  return s;
}

void DomainExport::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kDomainExport, [&](Writer& c) {
    c.PutString(domain);
    c.PutOptional(master);
    PutEntries(c, active);
    PutEntries(c, revoked);
  });
}

DomainExport DomainExport::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kDomainExport);
  DomainExport e;
  e.domain = c.GetString();
  e.master = c.GetOptional<SignedCertAction>();
  e.active = GetEntries(c);
  e.revoked = GetEntries(c);
  c.ExpectEnd();
  return e;
}

bool ClmState::CheckCoherence() const {
  std::map<std::string, std::size_t> per_rgx;
  for (const auto& [domain, d] : domains) {
    auto it = ids.find(d.rgx);
    if (it == ids.end()) return false;
    std::optional<Bytes> h = it->second.find(IdKey(domain));
    if (!h || *h != d.Head().Hash().ToBytes()) return false;
    ++per_rgx[d.rgx];
  }
  std::size_t nonempty = 0;
  for (const auto& [rgx_text, m] : ids) {
    if (m.size() != per_rgx[rgx_text]) return false;
    std::optional<Bytes> dg = rgx.find(Key(rgx_text));
    if (m.empty()) {
      if (dg) return false;
      continue;
    }
    ++nonempty;
    if (!dg || *dg != m.digest().ToBytes()) return false;
  }
  return rgx.size() == nonempty;
}

void ClmWitness::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kClmWitness, [&](Writer& c) {
    c.PutString(rgx);
    c.PutString(domain);
    c.PutOptional(head_before);
    c.PutOptional(head_after);
    c.PutOptional(prior);
    c.PutOptional(a);
    c.PutOptional(rv);
    c.PutOptional(id);
    c.PutOptional(rgx_map);
    dg_id_before.EncodeTo(c);
    dg_id_after.EncodeTo(c);
  });
}

ClmWitness ClmWitness::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kClmWitness);
  ClmWitness w;
  w.rgx = c.GetString();
  w.domain = c.GetString();
  w.head_before = c.GetOptional<DomainHead>();
  w.head_after = c.GetOptional<DomainHead>();
  w.prior = c.GetOptional<SignedCertAction>();
  w.a = c.GetOptional<ods::MutationProof>();
  w.rv = c.GetOptional<ods::MutationProof>();
  w.id = c.GetOptional<ods::MutationProof>();
  w.rgx_map = c.GetOptional<ods::MutationProof>();
  w.dg_id_before = Digest::DecodeFrom(c);
  w.dg_id_after = Digest::DecodeFrom(c);
  c.ExpectEnd();
  return w;
}

bool ClmWitness::operator==(const ClmWitness& other) const { return Encode(*this) == Encode(other); }

// ---- Protocol messages -----------------------------------------------------

void RegisterMessage::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kRegisterMessage, [&](Writer& c) {
    c.PutString(rgx);
    dg_id.EncodeTo(c);
    dg_rgx.EncodeTo(c);
    dg_a.EncodeTo(c);
    dg_rv.EncodeTo(c);
    c.PutUint(n_mlog);
    c.PutInt(master_t);
    record_proof.EncodeTo(c);
    rgx_proof.EncodeTo(c);
    id_proof.EncodeTo(c);
    c.PutOptional(cert_proof);
  });
}

RegisterMessage RegisterMessage::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kRegisterMessage);
  RegisterMessage m;
  m.rgx = c.GetString();
  m.dg_id = Digest::DecodeFrom(c);
  m.dg_rgx = Digest::DecodeFrom(c);
  m.dg_a = Digest::DecodeFrom(c);
  m.dg_rv = Digest::DecodeFrom(c);
  m.n_mlog = c.GetUint();
  m.master_t = c.GetInt();
  m.record_proof = chrono::PresenceProof::DecodeFrom(c);
  m.rgx_proof = ods::PresenceProof::DecodeFrom(c);
  m.id_proof = ods::PresenceProof::DecodeFrom(c);
  m.cert_proof = c.GetOptional<ods::PresenceProof>();
  c.ExpectEnd();
  return m;
}

Bytes RegisterResponse::SignedBytes(const Digest& dg_clog, std::uint64_t size, const Digest& m_hash) {
  Writer w;
  w.PutComposite(Tag::kSignedPayload, [&](Writer& c) {
    c.PutString("register");
    dg_clog.EncodeTo(c);
    c.PutUint(size);
    m_hash.EncodeTo(c);
  });
  return w.Take();
}

void RegisterResponse::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMsgRegisterResponse, [&](Writer& c) {
    dg_clog.EncodeTo(c);
    c.PutUint(size);
    m.EncodeTo(c);
    sig.EncodeTo(c);
  });
}

RegisterResponse RegisterResponse::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMsgRegisterResponse);
  RegisterResponse resp;
  resp.dg_clog = Digest::DecodeFrom(c);
  resp.size = c.GetUint();
  resp.m = RegisterMessage::DecodeFrom(c);
  resp.sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return resp;
}

std::optional<std::string> CheckRegisterResponse(const RegisterResponse& resp, const RegisterExpectation& want,
                                                 const PublicKey& clm_key) {
  const RegisterMessage& m = resp.m;
  if (!Verify(clm_key, RegisterResponse::SignedBytes(resp.dg_clog, resp.size, Hash(Encode(m))), resp.sig)) {
    return "clm-signature";
  }
  if (!RecordAt(resp.dg_clog, resp.size, CertRecordHeader{Hash(Encode(want.req)), m.n_mlog, m.dg_rgx},
                m.record_proof)) {
    return "record-presence";
  }
  if (!Rgx::IsValid(m.rgx) || !Rgx::Parse(m.rgx).Matches(want.domain)) return "rgx-instance";
  if (!ods::VerifyPresence(m.dg_rgx, Key(m.rgx), m.dg_id.ToBytes(), m.rgx_proof)) return "rgx-presence";
  DomainHead head{want.master, want.master ? m.master_t : 0, m.dg_a, m.dg_rv};
  if (!ods::VerifyPresence(m.dg_id, IdKey(want.domain), head.Hash().ToBytes(), m.id_proof)) {
    return "id-presence";
  }
  if (want.cert_value) {
    const Digest& root = want.in_revoked ? m.dg_rv : m.dg_a;
    if (!m.cert_proof || !want.cert_key ||
        !ods::VerifyPresence(root, *want.cert_key, *want.cert_value, *m.cert_proof)) {
      return "cert-presence";
    }
  }
  return std::nullopt;
}

void VerifyMessage::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kVerifyMessage, [&](Writer& c) {
    dg_a.EncodeTo(c);
    dg_rv.EncodeTo(c);
    c.PutString(rgx);
    dg_id.EncodeTo(c);
    req_digest.EncodeTo(c);
    c.PutUint(n_mlog);
    dg_rgx.EncodeTo(c);
    c.PutInt(master_t);
    c.PutUint(mlog_size);
    record_proof.EncodeTo(c);
    rgx_proof.EncodeTo(c);
    id_proof.EncodeTo(c);
    cert_proof.EncodeTo(c);
  });
}

VerifyMessage VerifyMessage::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kVerifyMessage);
  VerifyMessage m;
  m.dg_a = Digest::DecodeFrom(c);
  m.dg_rv = Digest::DecodeFrom(c);
  m.rgx = c.GetString();
  m.dg_id = Digest::DecodeFrom(c);
  m.req_digest = Digest::DecodeFrom(c);
  m.n_mlog = c.GetUint();
  m.dg_rgx = Digest::DecodeFrom(c);
  m.master_t = c.GetInt();
  m.mlog_size = c.GetUint();
  m.record_proof = chrono::PresenceProof::DecodeFrom(c);
  m.rgx_proof = ods::PresenceProof::DecodeFrom(c);
  m.id_proof = ods::PresenceProof::DecodeFrom(c);
  m.cert_proof = ods::PresenceProof::DecodeFrom(c);
  c.ExpectEnd();
  return m;
}

Bytes VerifyResponse::SignedBytes(const Digest& dg_clog, std::uint64_t size, Time t_A, const Digest& m_hash) {
  Writer w;
  w.PutComposite(Tag::kSignedPayload, [&](Writer& c) {
    c.PutString("verify");
    dg_clog.EncodeTo(c);
    c.PutUint(size);
    c.PutInt(t_A);
    m_hash.EncodeTo(c);
  });
  return w.Take();
}

void VerifyResponse::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMsgVerifyResponse, [&](Writer& c) {
    dg_clog.EncodeTo(c);
    c.PutUint(size);
    m.EncodeTo(c);
    sig.EncodeTo(c);
  });
}

VerifyResponse VerifyResponse::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMsgVerifyResponse);
  VerifyResponse resp;
  resp.dg_clog = Digest::DecodeFrom(c);
  resp.size = c.GetUint();
  resp.m = VerifyMessage::DecodeFrom(c);
  resp.sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return resp;
}

std::optional<std::string> CheckVerifyResponse(const VerifyResponse& resp, Time t_A, const std::string& domain,
                                               const Certificate& cert_m, const SignedCertAction& reg,
                                               const PublicKey& clm_key) {
  const VerifyMessage& m = resp.m;
  if (!Verify(clm_key, VerifyResponse::SignedBytes(resp.dg_clog, resp.size, t_A, Hash(Encode(m))), resp.sig)) {
    return "clm-signature";
  }
  if (m.n_mlog > m.mlog_size) return "mlog-size-order";
  if (!RecordAt(resp.dg_clog, resp.size, CertRecordHeader{m.req_digest, m.n_mlog, m.dg_rgx}, m.record_proof)) {
    return "record-presence";
  }
  if (!Rgx::IsValid(m.rgx) || !Rgx::Parse(m.rgx).Matches(domain)) return "rgx-instance";
  if (!ods::VerifyPresence(m.dg_rgx, Key(m.rgx), m.dg_id.ToBytes(), m.rgx_proof)) return "rgx-presence";
  DomainHead head{cert_m, m.master_t, m.dg_a, m.dg_rv};
  if (!ods::VerifyPresence(m.dg_id, IdKey(domain), head.Hash().ToBytes(), m.id_proof)) return "id-presence";
  if (!ods::VerifyPresence(m.dg_a, reg.cert.FilingKey(), Encode(reg), m.cert_proof)) return "cert-presence";
  return std::nullopt;
}

std::optional<bool> DomainStatus::Absent(const Digest& dg_rgx, const std::string& domain) const {
  if (!Rgx::IsValid(rgx) || !Rgx::Parse(rgx).Matches(domain)) return std::nullopt;
  if (rgx_absence) {
    if (!ods::VerifyAbsence(dg_rgx, Key(rgx), *rgx_absence)) return std::nullopt;
    return true;
  }
  if (!rgx_proof || !ods::VerifyPresence(dg_rgx, Key(rgx), dg_id.ToBytes(), *rgx_proof)) return std::nullopt;
  if (id_absence) {
    if (!ods::VerifyAbsence(dg_id, IdKey(domain), *id_absence)) return std::nullopt;
    return true;
  }
  if (!id_proof || !head || !ods::VerifyPresence(dg_id, IdKey(domain), head->Hash().ToBytes(), *id_proof)) {
    return std::nullopt;
  }
  return !head->master.has_value();
}

void DomainStatus::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kDomainStatus, [&](Writer& c) {
    c.PutString(rgx);
    dg_id.EncodeTo(c);
    c.PutOptional(rgx_absence);
    c.PutOptional(rgx_proof);
    c.PutOptional(id_absence);
    c.PutOptional(id_proof);
    c.PutOptional(head);
  });
}

DomainStatus DomainStatus::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kDomainStatus);
  DomainStatus s;
  s.rgx = c.GetString();
  s.dg_id = Digest::DecodeFrom(c);
  s.rgx_absence = c.GetOptional<ods::AbsenceProof>();
  s.rgx_proof = c.GetOptional<ods::PresenceProof>();
  s.id_absence = c.GetOptional<ods::AbsenceProof>();
  s.id_proof = c.GetOptional<ods::PresenceProof>();
  s.head = c.GetOptional<DomainHead>();
  c.ExpectEnd();
  return s;
}

Bytes StatusResponse::SignedBytes() const {
  Writer w;
  w.PutComposite(Tag::kSignedPayload, [&](Writer& c) {
    c.PutString("status");
    dg_clog.EncodeTo(c);
    c.PutUint(size);
    c.PutInt(t_A);
    c.PutOptional(header);
    Hash(Encode(status)).EncodeTo(c);
  });
  return w.Take();
}

void StatusResponse::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMsgStatusResponse, [&](Writer& c) {
    dg_clog.EncodeTo(c);
    c.PutUint(size);
    c.PutInt(t_A);
    c.PutOptional(header);
    c.PutOptional(record_proof);
    status.EncodeTo(c);
    sig.EncodeTo(c);
  });
}

StatusResponse StatusResponse::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMsgStatusResponse);
  StatusResponse s;
  s.dg_clog = Digest::DecodeFrom(c);
  s.size = c.GetUint();
  s.t_A = c.GetInt();
  s.header = c.GetOptional<CertRecordHeader>();
  s.record_proof = c.GetOptional<chrono::PresenceProof>();
  s.status = DomainStatus::DecodeFrom(c);
  s.sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return s;
}

std::optional<Digest> CheckStatusResponse(const StatusResponse& resp, const PublicKey& clm_key) {
  if (!Verify(clm_key, resp.SignedBytes(), resp.sig)) return std::nullopt;
  if (resp.size == 0) {
    if (resp.header || resp.dg_clog != Digest::Empty()) return std::nullopt;
    return Digest::Empty();
  }
  if (!resp.header || !resp.record_proof || !RecordAt(resp.dg_clog, resp.size, *resp.header, *resp.record_proof)) {
    return std::nullopt;
  }
  return resp.header->dg_rgx;
}

// ---- Maintainer ------------------------------------------------------------

CertificateLogMaintainer::CertificateLogMaintainer(std::string id, SigningKey key, TrustedIssuers issuers,
                                                   Time window)
    : id_(std::move(id)), key_(std::move(key)), issuers_(std::move(issuers)), window_(window) {}

std::optional<std::string> CertificateLogMaintainer::RgxFor(std::string_view domain) const {
  for (const std::string& r : managed_) {
    if (Rgx::Parse(r).Matches(domain)) return r;
  }
  return std::nullopt;
}

void CertificateLogMaintainer::CheckFresh(Time t, Time now) const {
  if (t > now || now - t > window_) Reject(ErrorCode::kStaleTime, "timestamp outside the acceptance window");
}

ClmState CertificateLogMaintainer::Working() {
  ClmState s = state_;
  if (tamper_) {
    tamper_(s);
    tamper_ = nullptr;
  }
  return s;
}

void CertificateLogMaintainer::Install(const std::string& domain, DomainState next, ClmState& st,
                                       ClmWitness& w) const {
  const std::string rgx = next.rgx;
  const ods::OrderedMap& ids = st.ids[rgx];
  const Bytes h = next.Head().Hash().ToBytes();
  ods::Mutation id = ids.contains(IdKey(domain)) ? ids.Modify(IdKey(domain), h) : ids.Insert(IdKey(domain), h);
  const Bytes dg_id = id.map.digest().ToBytes();
  ods::Mutation rg = st.rgx.contains(Key(rgx)) ? st.rgx.Modify(Key(rgx), dg_id) : st.rgx.Insert(Key(rgx), dg_id);
  w.rgx = rgx;
  w.domain = domain;
  w.head_after = next.Head();
  w.id = id.proof;
  w.rgx_map = rg.proof;
  w.dg_id_before = ids.digest();
  w.dg_id_after = id.map.digest();
  st.ids[rgx] = id.map;
  st.rgx = rg.map;
  st.domains[domain] = std::move(next);
}

void CertificateLogMaintainer::Remove(const std::string& domain, ClmState& st, ClmWitness& w) const {
  const DomainState& cur = st.domains.at(domain);
  const std::string rgx = cur.rgx;
  const ods::OrderedMap& ids = st.ids[rgx];
  ods::Mutation id = ids.Delete(IdKey(domain));
  ods::Mutation rg = id.map.empty() ? st.rgx.Delete(Key(rgx)) : st.rgx.Modify(Key(rgx), id.map.digest().ToBytes());
  w.rgx = rgx;
  w.domain = domain;
  w.head_before = cur.Head();
  w.id = id.proof;
  w.rgx_map = rg.proof;
  w.dg_id_before = ids.digest();
  w.dg_id_after = id.map.digest();
  if (id.map.empty()) {
    st.ids.erase(rgx);
  } else {
    st.ids[rgx] = id.map;
  }
  st.rgx = rg.map;
  st.domains.erase(domain);
}

void CertificateLogMaintainer::Commit(const CertRequest& req, std::uint64_t n_mlog, ClmState next,
                                      ClmWitness witness) {
  if (!records_.empty() && n_mlog < records_.back().n_mlog) {
    Reject(ErrorCode::kStaleTime, "mapping-log size goes backwards");
  }
  CertRecord rec{req, n_mlog, next.rgx.digest()};
  log_.Append(rec.Item());
  records_.push_back(std::move(rec));
  witnesses_.push_back(std::move(witness));
  state_ = std::move(next);
}

RegisterResponse CertificateLogMaintainer::Register(const SignedCertAction& reg, Time now) {
  CheckFresh(reg.t, now);
  if (reg.action != CertAction::kReg) Reject(ErrorCode::kMalformed, "not a registration");
  const Certificate& cert = reg.cert;
  if (cert.kind == CertKind::kLog) Reject(ErrorCode::kBadCertificate, "log certificates are not registered here");
  if (!VerifyIssuer(cert, issuers_) || !cert.ValidAt(now)) Reject(ErrorCode::kBadCertificate, cert.subject);
  std::optional<std::string> rgx = RgxFor(cert.subject);
  if (!rgx) Reject(ErrorCode::kUnmapped, cert.subject + " is not managed by " + id_);

  ClmState st = Working();
  auto it = st.domains.find(cert.subject);
  const DomainState* cur = it == st.domains.end() ? nullptr : &it->second;
  DomainState next = cur ? *cur : DomainState{*rgx, std::nullopt, {}, {}};
  ClmWitness w;
  if (cur) w.head_before = cur->Head();
  std::optional<Bytes> cert_key;
  if (cert.kind == CertKind::kMaster) {
    if (cur && cur->master && !skip_master_check_) Reject(ErrorCode::kDuplicateMaster, cert.subject);
    if (!reg.VerifyWith(cert.key)) Reject(ErrorCode::kBadSignature, "registration not signed by the master key");
    next.master = reg;
  } else {
    if (!cur || !cur->master) Reject(ErrorCode::kNoRegistration, "no master certificate for " + cert.subject);
    if (!reg.VerifyWith(cur->master->cert.key)) {
      Reject(ErrorCode::kWrongMasterKey, "not signed by the logged master key");
    }
    if (cur->active.contains(cert.FilingKey()) || cur->revoked.contains(cert.FilingKey())) {
      Reject(ErrorCode::kDuplicateCert, cert.subject);
    }
    ods::Mutation a = cur->active.Insert(cert.FilingKey(), Encode(reg));
    w.a = a.proof;
    next.active = a.map;
    cert_key = cert.FilingKey();
  }
  Install(cert.subject, std::move(next), st, w);
  Commit(CertRequest{CertReg{reg}}, mlog_size_, std::move(st), std::move(w));
  return Respond(cert.subject, cert_key, false);
}

RegisterResponse CertificateLogMaintainer::Revoke(const SignedCertAction& rev, Time now) {
  CheckFresh(rev.t, now);
  if (rev.action != CertAction::kRev) Reject(ErrorCode::kMalformed, "not a revocation");
  const Certificate& cert = rev.cert;
  ClmState st = Working();
  auto it = st.domains.find(cert.subject);
  if (it == st.domains.end()) Reject(ErrorCode::kNoRegistration, cert.subject);
  const DomainState& cur = it->second;
  DomainState next = cur;
  ClmWitness w;
  w.head_before = cur.Head();
  const Bytes key = cert.FilingKey();
  if (cur.master && cur.master->cert == cert) {
    if (rev.t <= cur.master->t) Reject(ErrorCode::kRevokeOrder, "revocation not after registration");
    if (!rev.VerifyWith(cert.key)) Reject(ErrorCode::kWrongMasterKey, "not signed by the master key");
    ods::Mutation rv = cur.revoked.Insert(key, Encode(CertRevocation{*cur.master, rev}));
    w.prior = cur.master;
    w.rv = rv.proof;
    next.master.reset();
    next.revoked = rv.map;
  } else {
    std::optional<Bytes> value = cur.active.find(key);
    if (!value) Reject(ErrorCode::kNoRegistration, "certificate is not active");
    SignedCertAction prior = Decode<SignedCertAction>(*value);
    if (prior.cert != cert) Reject(ErrorCode::kNoRegistration, "certificate is not active");
    if (rev.t <= prior.t) Reject(ErrorCode::kRevokeOrder, "revocation not after registration");
    if (!cur.master || !rev.VerifyWith(cur.master->cert.key) || !prior.VerifyWith(cur.master->cert.key)) {
      Reject(ErrorCode::kWrongMasterKey, "not signed by the registering master key");
    }
    ods::Mutation a = cur.active.Delete(key);
    ods::Mutation rv = cur.revoked.Insert(key, Encode(CertRevocation{prior, rev}));
    w.prior = prior;
    w.a = a.proof;
    w.rv = rv.proof;
    next.active = a.map;
    next.revoked = rv.map;
  }
  Install(cert.subject, std::move(next), st, w);
  Commit(CertRequest{CertRev{rev}}, mlog_size_, std::move(st), std::move(w));
  return Respond(cert.subject, key, true);
}

RegisterResponse CertificateLogMaintainer::Respond(const std::string& domain, const std::optional<Bytes>& cert_key,
                                                   bool in_revoked) const {
  const DomainState& d = state_.domains.at(domain);
  const ods::OrderedMap& ids = state_.ids.at(d.rgx);
  const DomainHead head = d.Head();
  RegisterResponse resp;
  RegisterMessage& m = resp.m;
  m.rgx = d.rgx;
  m.dg_id = ids.digest();
  m.dg_rgx = state_.rgx.digest();
  m.dg_a = head.dg_a;
  m.dg_rv = head.dg_rv;
  m.n_mlog = records_.back().n_mlog;
  m.master_t = head.master_t;
  m.record_proof = log_.ProvePresence(log_.size() - 1);
  m.rgx_proof = state_.rgx.ProvePresence(Key(d.rgx));
  m.id_proof = ids.ProvePresence(IdKey(domain));
  if (cert_key) m.cert_proof = (in_revoked ? d.revoked : d.active).ProvePresence(*cert_key);
  resp.dg_clog = log_.digest();
  resp.size = log_.size();
  resp.sig = key_.Sign(RegisterResponse::SignedBytes(resp.dg_clog, resp.size, Hash(Encode(m))));
  return resp;
}

VerifyOutcome CertificateLogMaintainer::VerifyCert(Time t_A, const Certificate& cert, const Certificate& cert_m,
                                                   Time now) {
  if (std::llabs(t_A - now) > window_) Reject(ErrorCode::kOutOfWindow, "t_A outside the acceptance window");
  const std::string& domain = cert.subject;
  std::optional<std::string> rgx = RgxFor(domain);
  if (!rgx) Reject(ErrorCode::kNotManaged, domain + " is not managed by " + id_);
  auto it = state_.domains.find(domain);
  bool active = it != state_.domains.end() && it->second.master && it->second.master->cert == cert_m;
  std::optional<Bytes> value;
  if (active) value = it->second.active.find(cert.FilingKey());
  if (!value || Decode<SignedCertAction>(*value).cert != cert) return Status(domain, t_A, now);

  const DomainState& d = it->second;
  const ods::OrderedMap& ids = state_.ids.at(d.rgx);
  const CertRecord& last = records_.back();
  VerifyResponse resp;
  VerifyMessage& m = resp.m;
  m.dg_a = d.active.digest();
  m.dg_rv = d.revoked.digest();
  m.rgx = d.rgx;
  m.dg_id = ids.digest();
  m.req_digest = Hash(Encode(last.req));
  m.n_mlog = last.n_mlog;
  m.dg_rgx = last.dg_rgx;
  m.master_t = d.master->t;
  m.mlog_size = reported_mlog_size_.value_or(mlog_size_);
  m.record_proof = log_.ProvePresence(log_.size() - 1);
  m.rgx_proof = state_.rgx.ProvePresence(Key(d.rgx));
  m.id_proof = ids.ProvePresence(IdKey(domain));
  m.cert_proof = d.active.ProvePresence(cert.FilingKey());
  resp.dg_clog = log_.digest();
  resp.size = log_.size();
  resp.sig = key_.Sign(VerifyResponse::SignedBytes(resp.dg_clog, resp.size, t_A, Hash(Encode(m))));
  return resp;
}

DomainStatus CertificateLogMaintainer::StatusOf(const std::string& domain) const {
  std::optional<std::string> rgx = RgxFor(domain);
  if (!rgx) Reject(ErrorCode::kNotManaged, domain + " is not managed by " + id_);
  DomainStatus s;
  s.rgx = *rgx;
  auto ids = state_.ids.find(*rgx);
  if (ids == state_.ids.end()) {
    s.dg_id = Digest::Empty();
    s.rgx_absence = state_.rgx.ProveAbsence(Key(*rgx));
    return s;
  }
  s.dg_id = ids->second.digest();
  s.rgx_proof = state_.rgx.ProvePresence(Key(*rgx));
  auto d = state_.domains.find(domain);
  if (d == state_.domains.end()) {
    s.id_absence = ids->second.ProveAbsence(IdKey(domain));
  } else {
    s.id_proof = ids->second.ProvePresence(IdKey(domain));
    s.head = d->second.Head();
  }
  return s;
}

StatusResponse CertificateLogMaintainer::Status(const std::string& domain, Time t_A, Time now) const {
  if (std::llabs(t_A - now) > window_) Reject(ErrorCode::kOutOfWindow, "t_A outside the acceptance window");
  StatusResponse resp;
  resp.status = StatusOf(domain);
  resp.dg_clog = log_.digest();
  resp.size = log_.size();
  resp.t_A = t_A;
  if (!records_.empty()) {
    resp.header = records_.back().Header();
    resp.record_proof = log_.ProvePresence(log_.size() - 1);
  }
  resp.sig = key_.Sign(resp.SignedBytes());
  return resp;
}

chrono::ExtensionProof CertificateLogMaintainer::ProveExtension(std::uint64_t old_size,
                                                                std::uint64_t new_size) const {
  if (old_size > new_size || new_size > log_.size()) Reject(ErrorCode::kUnknownHistory, "no such log prefix");
  return log_.ProveExtension(old_size, new_size);
}

std::vector<std::string> CertificateLogMaintainer::DomainsUnder(const std::string& rgx) const {
  std::vector<std::string> out;
  for (const auto& [domain, d] : state_.domains) {
    if (d.rgx == rgx) out.push_back(domain);
  }
  return out;
}

DomainExport CertificateLogMaintainer::Export(const std::string& domain) const {
  auto it = state_.domains.find(domain);
  if (it == state_.domains.end()) Reject(ErrorCode::kUnknownId, domain);
  return DomainExport{domain, it->second.master, it->second.active.entries(), it->second.revoked.entries()};
}

void CertificateLogMaintainer::UpAdd(const DomainExport& import, const Digest& h, std::uint64_t n_mlog) {
  std::optional<std::string> rgx = RgxFor(import.domain);
  if (!rgx) Reject(ErrorCode::kNotManaged, import.domain + " is not managed by " + id_);
  ClmState st = Working();
  if (st.domains.count(import.domain)) Reject(ErrorCode::kSyncIntegrity, import.domain + " is already logged");
  DomainState next = import.ToState(*rgx);
  if (next.Head().Hash() != h && !skip_sync_check_) {
    Reject(ErrorCode::kSyncIntegrity, "imported subtree does not hash to h");
  }
  ClmWitness w;
  Install(import.domain, std::move(next), st, w);
  Commit(CertRequest{CertUpAdd{Hash(import.domain), h}}, n_mlog, std::move(st), std::move(w));
}

void CertificateLogMaintainer::UpDel(const std::string& domain, std::uint64_t n_mlog) {
  ClmState st = Working();
  auto it = st.domains.find(domain);
  if (it == st.domains.end()) Reject(ErrorCode::kUnknownId, domain);
  const Digest h = it->second.Head().Hash();
  ClmWitness w;
  Remove(domain, st, w);
  Commit(CertRequest{CertUpDel{Hash(domain), h}}, n_mlog, std::move(st), std::move(w));
}

mlog::LogHead CertificateLogMaintainer::Head(Time t) const {
  return mlog::LogHead::Make(key_, log_.size(), log_.digest(), t);
}

std::optional<DomainHead> CertificateLogMaintainer::HeadOf(const std::string& domain) const {
  auto it = state_.domains.find(domain);
  if (it == state_.domains.end()) return std::nullopt;
  return it->second.Head();
}

ClogArchive CertificateLogMaintainer::Archive(Time t) const {
  ClogArchive a;
  a.id = id_;
  a.key = key_.public_key();
  a.records = records_;
  a.witnesses = witnesses_;
  a.head = Head(t);
  for (std::uint64_t k = 0; k < log_.size(); ++k) a.positions.push_back(log_.ProvePresence(k));
  return a;
}

}  // namespace dtki::clog
