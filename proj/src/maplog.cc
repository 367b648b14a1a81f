#include "dtki/maplog.h"

#include "dtki/archive.h"
#include "dtki/encoding.h"
#include "dtki/rgx.h"

namespace dtki::mlog {
namespace {

Bytes Key(std::string_view s) { return ToBytes(s); }

Bytes DigestValue(const Digest& d) { return d.ToBytes(); }

[[noreturn]] void Reject(ErrorCode code, const std::string& what) { throw RejectError(code, what); }

}  // namespace

// ---- Value encodings -------------------------------------------------------

Bytes LogHead::SignedBytes(std::uint64_t size, const Digest& digest, Time t) {
  Writer w;
  w.PutComposite(Tag::kLogHead, [&](Writer& c) {
    c.PutUint(size);
    digest.EncodeTo(c);
    c.PutInt(t);
  });
  return w.Take();
}

LogHead LogHead::Make(const SigningKey& key, std::uint64_t size, const Digest& digest, Time t) {
  return LogHead{size, digest, t, key.Sign(SignedBytes(size, digest, t))};
}

bool LogHead::VerifyWith(const PublicKey& key) const {
  return Verify(key, SignedBytes(size, digest, t), sig);
}

void LogHead::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kLogHead, [&](Writer& c) {
    c.PutUint(size);
    digest.EncodeTo(c);
    c.PutInt(t);
    sig.EncodeTo(c);
  });
}

LogHead LogHead::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kLogHead);
  LogHead h;
  h.size = c.GetUint();
  h.digest = Digest::DecodeFrom(c);
  h.t = c.GetInt();
  h.sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return h;
}

void ClmEntry::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kClmEntry, [&](Writer& c) {
    cert.EncodeTo(c);
    head.EncodeTo(c);
  });
}

ClmEntry ClmEntry::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kClmEntry);
  ClmEntry e;
  e.cert = Certificate::DecodeFrom(c);
  e.head = LogHead::DecodeFrom(c);
  c.ExpectEnd();
  return e;
}

Bytes MapMod::EndorsedBytes(const Certificate& new_cert) {
  Writer w;
  w.PutComposite(Tag::kSignedPayload, [&](Writer& c) {
    c.PutString("mod");
    new_cert.EncodeTo(c);
  });
  return w.Take();
}

std::string MapRequest::Name() const {
  static const char* kNames[] = {"add", "del", "new", "mod", "bl", "end"};
  return kNames[v.index()];
}

void MapRequest::EncodeTo(Writer& w) const {
  std::visit(
      [&](const auto& req) {
        using T = std::decay_t<decltype(req)>;
        if constexpr (std::is_same_v<T, MapAdd>) {
          w.PutComposite(Tag::kMapAdd, [&](Writer& c) {
            c.PutString(req.rgx);
            c.PutString(req.id);
          });
        } else if constexpr (std::is_same_v<T, MapDel>) {
          w.PutComposite(Tag::kMapDel, [&](Writer& c) {
            c.PutString(req.rgx);
            c.PutString(req.id);
          });
        } else if constexpr (std::is_same_v<T, MapNew>) {
          w.PutComposite(Tag::kMapNew, [&](Writer& c) { req.entry.EncodeTo(c); });
        } else if constexpr (std::is_same_v<T, MapMod>) {
          w.PutComposite(Tag::kMapMod, [&](Writer& c) {
            req.cert.EncodeTo(c);
            req.new_cert.EncodeTo(c);
            req.endorsement.EncodeTo(c);
            req.head.EncodeTo(c);
          });
        } else if constexpr (std::is_same_v<T, MapBl>) {
          w.PutComposite(Tag::kMapBl, [&](Writer& c) { c.PutString(req.id); });
        } else {
          w.PutComposite(Tag::kMapEnd, [](Writer&) {});
        }
      },
      v);
}

MapRequest MapRequest::DecodeFrom(Reader& r) {
  MapRequest out;
  switch (r.PeekTag()) {
    case Tag::kMapAdd: {
      Reader c = r.Enter(Tag::kMapAdd);
      MapAdd a;
      a.rgx = c.GetString();
      a.id = c.GetString();
      c.ExpectEnd();
      out.v = a;
      break;
    }
    case Tag::kMapDel: {
      Reader c = r.Enter(Tag::kMapDel);
      MapDel d;
      d.rgx = c.GetString();
      d.id = c.GetString();
      c.ExpectEnd();
      out.v = d;
      break;
    }
    case Tag::kMapNew: {
      Reader c = r.Enter(Tag::kMapNew);
      out.v = MapNew{ClmEntry::DecodeFrom(c)};
      c.ExpectEnd();
      break;
    }
    case Tag::kMapMod: {
      Reader c = r.Enter(Tag::kMapMod);
      MapMod m;
      m.cert = Certificate::DecodeFrom(c);
      m.new_cert = Certificate::DecodeFrom(c);
      m.endorsement = Signature::DecodeFrom(c);
      m.head = LogHead::DecodeFrom(c);
      c.ExpectEnd();
      out.v = m;
      break;
    }
    case Tag::kMapBl: {
      Reader c = r.Enter(Tag::kMapBl);
      out.v = MapBl{c.GetString()};
      c.ExpectEnd();
      break;
    }
    case Tag::kMapEnd:
      r.Enter(Tag::kMapEnd).ExpectEnd();
      out.v = MapEnd{};
      break;
    default:
      throw DecodeError("unknown mapping request tag");
  }
  return out;
}

void MapRecord::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMapRecord, [&](Writer& c) {
    req.EncodeTo(c);
    c.PutInt(t);
    dg_s.EncodeTo(c);
    dg_bl.EncodeTo(c);
    dg_r.EncodeTo(c);
    dg_i.EncodeTo(c);
  });
}

MapRecord MapRecord::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMapRecord);
  MapRecord rec;
  rec.req = MapRequest::DecodeFrom(c);
  rec.t = c.GetInt();
  rec.dg_s = Digest::DecodeFrom(c);
  rec.dg_bl = Digest::DecodeFrom(c);
  rec.dg_r = Digest::DecodeFrom(c);
  rec.dg_i = Digest::DecodeFrom(c);
  c.ExpectEnd();
  return rec;
}

Bytes SignedMlogTimestamp::SignedBytes(Time t, const Digest& digest, std::uint64_t size) {
  Writer w;
  w.PutComposite(Tag::kMlogTimestampBody, [&](Writer& c) {
    c.PutInt(t);
    digest.EncodeTo(c);
    c.PutUint(size);
  });
  return w.Take();
}

SignedMlogTimestamp SignedMlogTimestamp::Make(const SigningKey& key, Time t, const Digest& digest,
                                              std::uint64_t size) {
  return SignedMlogTimestamp{t, digest, size, key.Sign(SignedBytes(t, digest, size))};
}

bool SignedMlogTimestamp::VerifyWith(const PublicKey& key) const {
  return Verify(key, SignedBytes(t, digest, size), sig);
}

void SignedMlogTimestamp::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMlogTimestamp, [&](Writer& c) {
    c.PutInt(t);
    digest.EncodeTo(c);
    c.PutUint(size);
    sig.EncodeTo(c);
  });
}

SignedMlogTimestamp SignedMlogTimestamp::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMlogTimestamp);
  SignedMlogTimestamp ts;
  ts.t = c.GetInt();
  ts.digest = Digest::DecodeFrom(c);
  ts.size = c.GetUint();
  ts.sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return ts;
}

void MlmWitness::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMlmWitness, [&](Writer& c) {
    c.PutOptional(s);
    c.PutOptional(bl);
    c.PutOptional(r);
    c.PutOptional(i);
    c.PutOptional(irgx);
    c.PutOptional(s_presence);
    c.PutOptional(bl_absence);
    c.PutBytes(s_value);
    irgx_before.EncodeTo(c);
    irgx_after.EncodeTo(c);
    c.PutList(purged, [](Writer& e, const std::string& x) { e.PutString(x); });
    c.PutList(r_chain);
    c.PutDigests(r_chain_digests);
  });
}

MlmWitness MlmWitness::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMlmWitness);
  MlmWitness w;
  w.s = c.GetOptional<ods::MutationProof>();
  w.bl = c.GetOptional<ods::MutationProof>();
  w.r = c.GetOptional<ods::MutationProof>();
  w.i = c.GetOptional<ods::MutationProof>();
  w.irgx = c.GetOptional<ods::MutationProof>();
  w.s_presence = c.GetOptional<ods::PresenceProof>();
  w.bl_absence = c.GetOptional<ods::AbsenceProof>();
  w.s_value = c.GetBytes();
  w.irgx_before = Digest::DecodeFrom(c);
  w.irgx_after = Digest::DecodeFrom(c);
  w.purged = c.GetList<std::string>([](Reader& e) { return e.GetString(); });
  w.r_chain = c.GetList<ods::MutationProof>();
  w.r_chain_digests = c.GetDigests();
  c.ExpectEnd();
  return w;
}

bool MlmWitness::operator==(const MlmWitness& other) const { return Encode(*this) == Encode(other); }

void MappingEvidence::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMappingEvidence, [&](Writer& c) {
    c.PutUint(index);
    record.EncodeTo(c);
    c.PutString(rgx);
    if (id) {
      c.PutString(*id);
    } else {
      c.PutNone();
    }
    c.PutOptional(r_proof);
    c.PutOptional(r_absence);
  });
}

MappingEvidence MappingEvidence::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMappingEvidence);
  MappingEvidence e;
  e.index = c.GetUint();
  e.record = MapRecord::DecodeFrom(c);
  e.rgx = c.GetString();
  if (c.PeekTag() == Tag::kNone) {
    c.GetNone();
  } else {
    e.id = c.GetString();
  }
  e.r_proof = c.GetOptional<ods::PresenceProof>();
  e.r_absence = c.GetOptional<ods::AbsenceProof>();
  c.ExpectEnd();
  return e;
}

std::optional<std::string> MappingEvidence::MappedId() const {
  if (id && r_proof && ods::VerifyPresence(record.dg_r, Key(rgx), Key(*id), *r_proof)) return id;
  return std::nullopt;
}

bool MappingEvidence::ProvesUnmapped() const {
  return !id && r_absence && ods::VerifyAbsence(record.dg_r, Key(rgx), *r_absence);
}

MappingEvidence MakeEvidence(const MapState& state, const MapRecord& record, std::uint64_t index,
                             const std::string& rgx) {
  MappingEvidence e;
  e.index = index;
  e.record = record;
  e.rgx = rgx;
  if (std::optional<Bytes> id = state.r.find(Key(rgx))) {
    e.id = std::string(id->begin(), id->end());
    e.r_proof = state.r.ProvePresence(Key(rgx));
  } else {
    e.r_absence = state.r.ProveAbsence(Key(rgx));
  }
  return e;
}

void MappingResponse::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMsgMappingResponse, [&](Writer& c) {
    record.EncodeTo(c);
    record_proof.EncodeTo(c);
    c.PutString(rgx);
    entry.EncodeTo(c);
    s_proof.EncodeTo(c);
    r_proof.EncodeTo(c);
    ts.EncodeTo(c);
  });
}

MappingResponse MappingResponse::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMsgMappingResponse);
  MappingResponse m;
  m.record = MapRecord::DecodeFrom(c);
  m.record_proof = chrono::PresenceProof::DecodeFrom(c);
  m.rgx = c.GetString();
  m.entry = ClmEntry::DecodeFrom(c);
  m.s_proof = ods::PresenceProof::DecodeFrom(c);
  m.r_proof = ods::PresenceProof::DecodeFrom(c);
  m.ts = SignedMlogTimestamp::DecodeFrom(c);
  c.ExpectEnd();
  return m;
}

// ---- State machine ---------------------------------------------------------

std::optional<std::pair<std::string, std::string>> MapState::Resolve(std::string_view domain) const {
  for (const ods::Entry& e : r.entries()) {
    const std::string rgx(e.key.begin(), e.key.end());
    if (Rgx::Parse(rgx).Matches(domain)) return std::make_pair(rgx, std::string(e.value.begin(), e.value.end()));
  }
  return std::nullopt;
}

std::optional<ClmEntry> MapState::Entry(const std::string& id) const {
  std::optional<Bytes> v = s.find(Key(id));
  if (!v) return std::nullopt;
  return Decode<ClmEntry>(*v);
}

namespace {

void CheckLogCert(const Certificate& cert, const TrustedIssuers& issuers) {
  if (cert.kind != CertKind::kLog) Reject(ErrorCode::kBadCertificate, "not a log certificate");
  if (!VerifyIssuer(cert, issuers)) Reject(ErrorCode::kBadCertificate, "untrusted issuer signature");
}

void ApplyAdd(const MapState& in, const MapAdd& req, Transition& out) {
  if (!Rgx::IsValid(req.rgx) || Rgx::Parse(req.rgx).text() != req.rgx) {
    Reject(ErrorCode::kMalformed, "rgx is not in canonical form: " + req.rgx);
  }
  const Rgx rgx = Rgx::Parse(req.rgx);
  if (!in.s.contains(Key(req.id))) Reject(ErrorCode::kUnknownId, "no active CLM " + req.id);
  for (const ods::Entry& e : in.r.entries()) {
    const std::string other(e.key.begin(), e.key.end());
    const std::string owner(e.value.begin(), e.value.end());
    if (other == req.rgx) Reject(ErrorCode::kOverlap, "rgx already mapped: " + other);
    if (Rgx::Parse(other).Overlaps(rgx)) {
      Reject(ErrorCode::kOverlap, req.rgx + " overlaps " + other + " of " + owner);
    }
  }
  MlmWitness& w = out.witness;
  w.s_value = *in.s.find(Key(req.id));
  w.s_presence = in.s.ProvePresence(Key(req.id));
  ods::Mutation r = in.r.Insert(Key(req.rgx), Key(req.id));
  const ods::OrderedMap& irgx = in.irgx.at(req.id);
  ods::Mutation ir = irgx.Insert(Key(req.rgx), {});
  ods::Mutation i = in.i.Modify(Key(req.id), DigestValue(ir.map.digest()));
  w.r = r.proof;
  w.irgx = ir.proof;
  w.i = i.proof;
  w.irgx_before = irgx.digest();
  w.irgx_after = ir.map.digest();
  out.state.r = r.map;
  out.state.i = i.map;
  out.state.irgx[req.id] = ir.map;
}

void ApplyDel(const MapState& in, const MapDel& req, Transition& out) {
  std::optional<Bytes> owner = in.r.find(Key(req.rgx));
  if (!owner || *owner != Key(req.id)) Reject(ErrorCode::kNoMapping, req.rgx + " is not mapped to " + req.id);
  MlmWitness& w = out.witness;
  w.s_value = *in.s.find(Key(req.id));
  w.s_presence = in.s.ProvePresence(Key(req.id));
  ods::Mutation r = in.r.Delete(Key(req.rgx));
  const ods::OrderedMap& irgx = in.irgx.at(req.id);
  ods::Mutation ir = irgx.Delete(Key(req.rgx));
  ods::Mutation i = in.i.Modify(Key(req.id), DigestValue(ir.map.digest()));
  w.r = r.proof;
  w.irgx = ir.proof;
  w.i = i.proof;
  w.irgx_before = irgx.digest();
  w.irgx_after = ir.map.digest();
  out.state.r = r.map;
  out.state.i = i.map;
  out.state.irgx[req.id] = ir.map;
}

void ApplyNew(const MapState& in, const MapNew& req, const TrustedIssuers& issuers, Transition& out) {
  const Certificate& cert = req.entry.cert;
  CheckLogCert(cert, issuers);
  const LogHead& head = req.entry.head;
  if (head.size != 0 || head.digest != Digest::Empty()) {
    Reject(ErrorCode::kMalformed, "a new CLM starts with an empty log");
  }
  if (!head.VerifyWith(cert.key)) Reject(ErrorCode::kBadSignature, "log head not signed by the CLM key");
  if (in.bl.contains(Key(cert.subject))) Reject(ErrorCode::kBlacklisted, cert.subject);
  if (in.s.contains(Key(cert.subject)) || in.i.contains(Key(cert.subject))) {
    Reject(ErrorCode::kDuplicateId, cert.subject);
  }
  MlmWitness& w = out.witness;
  w.bl_absence = in.bl.ProveAbsence(Key(cert.subject));
  ods::Mutation s = in.s.Insert(Key(cert.subject), Encode(req.entry));
  ods::Mutation i = in.i.Insert(Key(cert.subject), DigestValue(Digest::Empty()));
  w.s = s.proof;
  w.i = i.proof;
  out.state.s = s.map;
  out.state.i = i.map;
  out.state.irgx[cert.subject] = ods::OrderedMap();
}

void ApplyMod(const MapState& in, const MapMod& req, const TrustedIssuers& issuers, Transition& out) {
  std::optional<ClmEntry> current = in.Entry(req.cert.subject);
  if (!current || current->cert != req.cert) Reject(ErrorCode::kUnknownId, "certificate is not the active one");
  if (req.new_cert.subject != req.cert.subject) Reject(ErrorCode::kMalformed, "subject changed");
  CheckLogCert(req.new_cert, issuers);
  if (!Verify(req.cert.key, MapMod::EndorsedBytes(req.new_cert), req.endorsement)) {
    Reject(ErrorCode::kBadSignature, "new certificate not endorsed by the old key");
  }
  if (!req.head.VerifyWith(req.new_cert.key)) Reject(ErrorCode::kBadSignature, "log head not signed by the new key");
  if (req.head.size < current->head.size) Reject(ErrorCode::kStaleTime, "log head shrinks");
  MlmWitness& w = out.witness;
  w.s_value = Encode(*current);
  ods::Mutation s = in.s.Modify(Key(req.cert.subject), Encode(ClmEntry{req.new_cert, req.head}));
  w.s = s.proof;
  out.state.s = s.map;
}

void ApplyBl(const MapState& in, const MapBl& req, Transition& out) {
  if (!in.s.contains(Key(req.id))) Reject(ErrorCode::kUnknownId, "no active CLM " + req.id);
  MlmWitness& w = out.witness;
  w.s_value = *in.s.find(Key(req.id));
  ods::Mutation bl = in.bl.Insert(Key(req.id), {});
  ods::Mutation s = in.s.Delete(Key(req.id));
  const ods::OrderedMap& irgx = in.irgx.at(req.id);
  ods::OrderedMap r = in.r;
  for (const ods::Entry& e : irgx.entries()) {
    ods::Mutation step = r.Delete(e.key);
    w.purged.emplace_back(e.key.begin(), e.key.end());
    w.r_chain.push_back(step.proof);
    w.r_chain_digests.push_back(step.map.digest());
    r = step.map;
  }
  ods::Mutation i = in.i.Delete(Key(req.id));
  w.bl = bl.proof;
  w.s = s.proof;
  w.i = i.proof;
  w.irgx_before = irgx.digest();
  out.state.bl = bl.map;
  out.state.s = s.map;
  out.state.r = r;
  out.state.i = i.map;
  out.state.irgx.erase(req.id);
}

}  // namespace

Transition ApplyRequest(const MapState& state, const MapRequest& req, const TrustedIssuers& issuers) {
  Transition out{state, {}};
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, MapAdd>) ApplyAdd(state, r, out);
        if constexpr (std::is_same_v<T, MapDel>) ApplyDel(state, r, out);
        if constexpr (std::is_same_v<T, MapNew>) ApplyNew(state, r, issuers, out);
        if constexpr (std::is_same_v<T, MapMod>) ApplyMod(state, r, issuers, out);
        if constexpr (std::is_same_v<T, MapBl>) ApplyBl(state, r, out);
      },
      req.v);
  return out;
}

// ---- Lookups ---------------------------------------------------------------

MappingResponse MlogSnapshot::Lookup(std::string_view domain) const {
  if (!last) Reject(ErrorCode::kNoMapping, "empty mapping log");
  auto hit = state.Resolve(domain);
  if (!hit) Reject(ErrorCode::kNoMapping, std::string(domain));
  const auto& [rgx, id] = *hit;
  if (state.bl.contains(Key(id))) Reject(ErrorCode::kBlacklisted, id);
  std::optional<ClmEntry> entry = state.Entry(id);
  if (!entry) Reject(ErrorCode::kBlacklisted, id + " has no active certificate");
  MappingResponse resp;
  resp.record = *last;
  resp.record_proof = log->ProvePresence(log->size() - 1);
  resp.rgx = rgx;
  resp.entry = *entry;
  resp.s_proof = state.s.ProvePresence(Key(id));
  resp.r_proof = state.r.ProvePresence(Key(rgx));
  resp.ts = ts;
  return resp;
}

chrono::ExtensionProof MlogSnapshot::ProveExtension(std::uint64_t old_size, std::uint64_t new_size) const {
  if (old_size > new_size || new_size > log->size()) {
    Reject(ErrorCode::kUnknownHistory, "no such log prefix");
  }
  return log->ProveExtension(old_size, new_size);
}

std::optional<std::string> CheckMappingResponse(const MappingResponse& resp, std::string_view domain,
                                                const PublicKey& mlm_key, Time now, Time validity) {
  if (!resp.ts.VerifyWith(mlm_key)) return "timestamp-signature";
  if (!resp.ts.FreshAt(now, validity)) return "timestamp-freshness";
  if (!Rgx::IsValid(resp.rgx) || !Rgx::Parse(resp.rgx).Matches(domain)) return "rgx-instance";
  if (resp.record_proof.size != resp.ts.size || resp.record_proof.index + 1 != resp.ts.size) {
    return "record-position";
  }
  if (!chrono::VerifyPresence(resp.ts.digest, Encode(resp.record), resp.record_proof)) {
    return "record-presence";
  }
  const std::string& id = resp.entry.cert.subject;
  if (!ods::VerifyPresence(resp.record.dg_s, Key(id), Encode(resp.entry), resp.s_proof)) {
    return "clm-presence";
  }
  if (!ods::VerifyPresence(resp.record.dg_r, Key(resp.rgx), Key(id), resp.r_proof)) {
    return "mapping-presence";
  }
  if (!resp.entry.head.VerifyWith(resp.entry.cert.key)) return "clm-head-signature";
  return std::nullopt;
}

// ---- Maintainer ------------------------------------------------------------

MappingLogMaintainer::MappingLogMaintainer(std::string name, SigningKey key, TrustedIssuers issuers,
                                           Time validity)
    : name_(std::move(name)), key_(std::move(key)), issuers_(std::move(issuers)), validity_(validity) {
  states_.emplace_back();
  auto snap = std::make_shared<MlogSnapshot>();
  snap->log = std::make_shared<chrono::ChronoLog>();
  snap->ts = SignedMlogTimestamp::Make(key_, 0, Digest::Empty(), 0);
  published_ = std::move(snap);
}

const MapRecord& MappingLogMaintainer::Apply(const MapRequest& req, Time t) {
  if (!records_.empty() && t < records_.back().t) Reject(ErrorCode::kStaleTime, "time goes backwards");
  MapState working = states_.back();
  if (tamper_) {
    tamper_(working);
    tamper_ = nullptr;
  }
  Transition tr = ApplyRequest(working, req, issuers_);
  MapRecord rec{req, t, tr.state.s.digest(), tr.state.bl.digest(), tr.state.r.digest(), tr.state.i.digest()};
  log_.Append(Encode(rec));
  records_.push_back(rec);
  witnesses_.push_back(std::move(tr.witness));
  states_.push_back(std::move(tr.state));
  if (std::holds_alternative<MapEnd>(req.v)) {
    auto snap = std::make_shared<MlogSnapshot>();
    snap->log = std::make_shared<chrono::ChronoLog>(log_);
    snap->state = states_.back();
    snap->last = records_.back();
    snap->ts = SignedMlogTimestamp::Make(key_, t, log_.digest(), log_.size());
    published_ = std::move(snap);
  }
  return records_.back();
}

SignedMlogTimestamp MappingLogMaintainer::IssueTimestamp(Time t) {
  auto snap = std::make_shared<MlogSnapshot>(*published_);
  snap->ts = SignedMlogTimestamp::Make(key_, t, snap->log->digest(), snap->log->size());
  published_ = snap;
  return snap->ts;
}

MappingEvidence MappingLogMaintainer::ProveMapping(std::uint64_t n_mlog, const std::string& rgx) const {
  if (n_mlog == 0 || n_mlog > records_.size()) Reject(ErrorCode::kUnknownHistory, "no such record");
  return MakeEvidence(states_.at(n_mlog), records_.at(n_mlog - 1), n_mlog - 1, rgx);
}

MlogArchive MappingLogMaintainer::Archive() const {
  MlogArchive a;
  a.name = name_;
  a.key = key_.public_key();
  a.records = records_;
  a.witnesses = witnesses_;
  a.ts = published_->ts;
  for (std::uint64_t k = 0; k < published_->log->size(); ++k) a.positions.push_back(published_->log->ProvePresence(k));
  return a;
}

}  // namespace dtki::mlog
