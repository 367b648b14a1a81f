#include "dtki/actors.h"

#include <stdexcept>

#include "dtki/encoding.h"

namespace dtki::actors {

namespace {

msg::ErrorMessage ErrorFrom(const RejectError& e) { return msg::ErrorMessage{e.code(), e.what()}; }

std::string Describe(const msg::ErrorMessage& e) { return std::string(ErrorName(e.code)) + " " + e.text; }

// Runs a handler body; refusals and decode failures become ErrorMessage.
template <typename F>
Bytes Answer(F&& f) {
  try {
    return msg::EncodeMessage(f());
  } catch (const RejectError& e) {
    return msg::EncodeMessage(ErrorFrom(e));
  } catch (const DecodeError& e) {
    return msg::EncodeMessage(msg::ErrorMessage{ErrorCode::kMalformed, e.what()});
  }
}

}  // namespace

// ---- Cache -----------------------------------------------------------------

CacheEntry DigestCache::Get(const std::string& log) const {
  auto it = entries_.find(log);
  if (it == entries_.end()) return CacheEntry{};
  return it->second.back();
}

void DigestCache::Update(const std::string& log, CacheEntry entry) {
  std::vector<CacheEntry>& h = entries_[log];
  if (!h.empty() && entry.size < h.back().size) throw std::logic_error("cache size would shrink for " + log);
  h.push_back(std::move(entry));
}

std::vector<CacheEntry> DigestCache::History(const std::string& log) const {
  auto it = entries_.find(log);
  return it == entries_.end() ? std::vector<CacheEntry>{} : it->second;
}

std::vector<std::string> DigestCache::Logs() const {
  std::vector<std::string> out;
  for (const auto& [log, h] : entries_) out.push_back(log);
  return out;
}

std::string Outcome::ToString() const {
  switch (kind) {
    case OutcomeKind::kOk:
      return detail.empty() ? "ok" : "ok " + detail;
    case OutcomeKind::kReject:
      return "reject " + step + (detail.empty() ? "" : " (" + detail + ")");
    case OutcomeKind::kAlarm:
      return "alarm " + step + (detail.empty() ? "" : " (" + detail + ")");
  }
  return "?";
}

// ---- Client ----------------------------------------------------------------

Client::Client(std::string name, Bus& bus, const Clock& clock, ClientConfig config)
    : name_(std::move(name)), bus_(bus), clock_(clock), config_(std::move(config)) {}

std::optional<msg::Message> Client::Exchange(std::uint64_t session, const std::string& to, const msg::Message& m) {
  try {
    return msg::DecodeMessage(bus_.Call(session, name_, to, msg::EncodeMessage(m)));
  } catch (const RejectError&) {
    return std::nullopt;
  } catch (const DecodeError&) {
    return std::nullopt;
  }
}

Outcome Client::Extend(std::uint64_t session, const std::string& peer, const std::string& log, CacheEntry fresh) {
  const CacheEntry old = cache_.Get(log);
  if (fresh.size < old.size) return Outcome::Alarm("fork", log + " rolled back");
  if (old.size == fresh.size && old.digest != fresh.digest) {
    return Outcome::Alarm("fork", log + " shows two digests at one size");
  }
  // Nothing cached, or nothing new: no pair to reveal.
  if (old.size != 0 && old.size != fresh.size) {
    std::optional<msg::Message> reply = Exchange(session, peer, msg::ExtensionRequest{old.digest, old.size, fresh.size});
    const auto* ext = reply ? std::get_if<msg::ExtensionResponse>(&*reply) : nullptr;
    if (!ext) return Outcome::Alarm("fork", log + " gave no extension proof");
    if (ext->proof.old_size != old.size || ext->proof.new_size != fresh.size ||
        !chrono::VerifyExtension(old.digest, old.size, fresh.digest, fresh.size, ext->proof)) {
      return Outcome::Alarm("fork", log + " is not an extension of the cached view");
    }
  }
  cache_.Update(log, std::move(fresh));
  return Outcome::Ok();
}

Outcome Client::RequestMapping(const std::string& domain, mlog::MappingResponse* out) {
  const std::uint64_t s = bus_.BeginSession("mapping");
  std::optional<msg::Message> reply = Exchange(s, config_.mirror, msg::MappingRequest{domain});
  if (!reply) return Outcome::Reject("mapping-transport", config_.mirror);
  if (const auto* e = std::get_if<msg::ErrorMessage>(&*reply)) return Outcome::Reject("mapping-refused", Describe(*e));
  auto* resp = std::get_if<mlog::MappingResponse>(&*reply);
  if (!resp) return Outcome::Reject("mapping-malformed");
  if (auto failed = mlog::CheckMappingResponse(*resp, domain, config_.mlm_key, clock_.now, config_.validity)) {
    return Outcome::Reject(*failed);
  }
  const mlog::SignedMlogTimestamp& ts = resp->ts;
  Outcome ext = Extend(s, config_.mirror, config_.mlm, {ts.digest, ts.size, ts.t, Hash(Encode(*resp)), ts.sig});
  if (!ext.ok()) return ext;
  *out = std::move(*resp);
  return Outcome::Ok();
}

// ---- Domain owner ----------------------------------------------------------

DomainOwner::DomainOwner(std::string name, std::string domain, Bus& bus, const Clock& clock, ClientConfig config,
                         SigningKey master_key, Certificate master_cert)
    : Client(std::move(name), bus, clock, std::move(config)),
      domain_(std::move(domain)),
      master_key_(std::move(master_key)),
      master_cert_(std::move(master_cert)) {}

Outcome DomainOwner::Submit(const std::string& protocol, const SignedCertAction& action,
                            const clog::RegisterExpectation& want) {
  mlog::MappingResponse map;
  Outcome o = RequestMapping(domain_, &map);
  if (!o.ok()) return o;
  const std::string clm = map.entry.cert.subject;
  const std::uint64_t s = bus_.BeginSession(protocol);
  msg::Message req = action.action == CertAction::kReg ? msg::Message(msg::AddRequest{action})
                                                        : msg::Message(msg::RevokeRequest{action});
  std::optional<msg::Message> reply = Exchange(s, clm, req);
  if (!reply) return Outcome::Reject("clm-transport", clm);
  if (const auto* e = std::get_if<msg::ErrorMessage>(&*reply)) return Outcome::Reject("clm-refused", Describe(*e));
  const auto* resp = std::get_if<clog::RegisterResponse>(&*reply);
  if (!resp) return Outcome::Reject("clm-malformed");
  if (auto failed = clog::CheckRegisterResponse(*resp, want, map.entry.cert.key)) return Outcome::Reject(*failed);
  // The CLM's log may not be older than its head in the mapping log.
  if (resp->size < map.entry.head.size) {
    return Outcome::Alarm("stale-log", std::to_string(resp->size) + " < " + std::to_string(map.entry.head.size));
  }
  return Extend(s, clm, clm, {resp->dg_clog, resp->size, clock_.now, Hash(Encode(*resp)), resp->sig});
}

Outcome DomainOwner::PublishMaster() {
  SignedCertAction reg = SignedCertAction::Make(master_key_, master_cert_, clock_.now, CertAction::kReg);
  clog::RegisterExpectation want{clog::CertRequest{clog::CertReg{reg}}, domain_, master_cert_, std::nullopt,
                                 std::nullopt, false};
  Outcome o = Submit("publish", reg, want);
  if (o.ok()) {
    master_reg_ = reg;
    last_t_ = reg.t;
  }
  return o;
}

Outcome DomainOwner::PublishTls(const std::string& label, const Certificate& tls) {
  if (!master_reg_) return Outcome::Reject("no-master");
  if (tls_.count(label)) return Outcome::Reject("duplicate-label", label);
  SignedCertAction reg = SignedCertAction::Make(master_key_, tls, clock_.now, CertAction::kReg);
  clog::RegisterExpectation want{clog::CertRequest{clog::CertReg{reg}}, domain_, master_cert_, Encode(reg),
                                 tls.FilingKey(), false};
  Outcome o = Submit("publish", reg, want);
  if (o.ok()) {
    tls_[label] = reg;
    last_t_ = reg.t;
  }
  return o;
}

Outcome DomainOwner::RevokeTls(const std::string& label) {
  auto it = tls_.find(label);
  if (it == tls_.end() || revoked_.count(label)) return Outcome::Reject("unknown-certificate", label);
  const SignedCertAction& reg = it->second;
  SignedCertAction rev = SignedCertAction::Make(master_key_, reg.cert, clock_.now, CertAction::kRev);
  clog::RegisterExpectation want{clog::CertRequest{clog::CertRev{rev}}, domain_, master_cert_,
                                 Encode(clog::CertRevocation{reg, rev}), reg.cert.FilingKey(), true};
  Outcome o = Submit("revoke", rev, want);
  if (o.ok()) revoked_.insert(label);
  return o;
}

Outcome DomainOwner::RevokeMaster() {
  if (!master_reg_) return Outcome::Reject("no-master");
  SignedCertAction rev = SignedCertAction::Make(master_key_, master_cert_, clock_.now, CertAction::kRev);
  clog::RegisterExpectation want{clog::CertRequest{clog::CertRev{rev}}, domain_, std::nullopt,
                                 Encode(clog::CertRevocation{*master_reg_, rev}), master_cert_.FilingKey(), true};
  Outcome o = Submit("revoke", rev, want);
  if (o.ok()) master_reg_.reset();
  return o;
}

Outcome DomainOwner::CheckMaster() {
  mlog::MappingResponse map;
  Outcome o = RequestMapping(domain_, &map);
  if (!o.ok()) return o;
  const std::string clm = map.entry.cert.subject;
  const std::uint64_t s = bus_.BeginSession("lookup");
  std::optional<msg::Message> reply = Exchange(s, clm, msg::StatusRequest{domain_, clock_.now});
  if (!reply) return Outcome::Reject("clm-transport", clm);
  if (const auto* e = std::get_if<msg::ErrorMessage>(&*reply)) return Outcome::Reject("clm-refused", Describe(*e));
  const auto* resp = std::get_if<clog::StatusResponse>(&*reply);
  if (!resp) return Outcome::Reject("clm-malformed");
  std::optional<Digest> dg_rgx = clog::CheckStatusResponse(*resp, map.entry.cert.key);
  if (!dg_rgx || resp->t_A != clock_.now) return Outcome::Reject("status-signature");
  if (!resp->status.Absent(*dg_rgx, domain_)) return Outcome::Reject("status-proof");
  Outcome ext = Extend(s, clm, clm, {resp->dg_clog, resp->size, clock_.now, Hash(Encode(*resp)), resp->sig});
  if (!ext.ok()) return ext;
  const std::optional<clog::DomainHead>& head = resp->status.head;
  std::optional<Certificate> logged = head ? head->master : std::nullopt;
  std::optional<Certificate> mine = master_reg_ ? std::optional<Certificate>(master_cert_) : std::nullopt;
  if (logged != mine) {
    return Outcome::Alarm("master-mismatch", logged ? "logged master " + logged->key.Hex().substr(0, 16)
                                                    : std::string("no master logged"));
  }
  return Outcome::Ok();
}

std::optional<Credential> DomainOwner::CredentialFor(const std::string& label) const {
  auto it = tls_.find(label);
  if (it == tls_.end()) return std::nullopt;
  return Credential{master_cert_, it->second};
}

Bytes DomainOwner::Serve(const std::string& /*sender*/, ByteView request) {
  msg::Message m;
  try {
    m = msg::DecodeMessage(request);
  } catch (const DecodeError& e) {
    return msg::EncodeMessage(msg::ErrorMessage{ErrorCode::kMalformed, e.what()});
  }
  const auto* fwd = std::get_if<msg::Forward>(&m);
  if (!fwd) return msg::EncodeMessage(msg::ErrorMessage{ErrorCode::kMalformed, "owners only relay"});
  try {
    return bus_.Call(bus_.current_session(), name_, fwd->to, fwd->inner);
  } catch (const RejectError& e) {
    return msg::EncodeMessage(ErrorFrom(e));
  }
}

// ---- Browser ---------------------------------------------------------------

Outcome Browser::Verify(const std::string& domain, const Credential& cred, const std::optional<std::string>& via) {
  const Time t_A = clock_.now;
  const Certificate& cert = cred.cert();
  const Certificate& cert_m = cred.cert_m;
  if (cert.subject != domain || cert_m.subject != domain) return Outcome::Reject("subject");
  if (cert.kind != CertKind::kTls || cert_m.kind != CertKind::kMaster) return Outcome::Reject("cert-kind");
  if (!VerifyIssuer(cert, config_.issuers) || !VerifyIssuer(cert_m, config_.issuers)) {
    return Outcome::Reject("issuer-signature");
  }
  if (!cert.ValidAt(t_A) || !cert_m.ValidAt(t_A)) return Outcome::Reject("validity");
  if (cred.reg.action != CertAction::kReg || !cred.reg.VerifyWith(cert_m.key)) {
    return Outcome::Reject("master-signature");
  }

  mlog::MappingResponse map;
  Outcome o = RequestMapping(domain, &map);
  if (!o.ok()) return o;
  const std::string clm = map.entry.cert.subject;
  const std::uint64_t s = bus_.BeginSession("verify");
  msg::Message req = msg::VerifyRequest{t_A, cert, cert_m};
  std::optional<msg::Message> reply =
      via ? Exchange(s, *via, msg::Forward{clm, msg::EncodeMessage(req)}) : Exchange(s, clm, req);
  if (!reply) return Outcome::Reject("clm-transport", clm);
  if (const auto* e = std::get_if<msg::ErrorMessage>(&*reply)) return Outcome::Reject("clm-refused", Describe(*e));
  if (const auto* refusal = std::get_if<clog::StatusResponse>(&*reply)) {
    std::optional<Digest> dg_rgx = clog::CheckStatusResponse(*refusal, map.entry.cert.key);
    if (!dg_rgx || refusal->t_A != t_A || !refusal->status.Absent(*dg_rgx, domain)) {
      return Outcome::Reject("status-invalid");
    }
    return Outcome::Reject("not-logged");
  }
  const auto* resp = std::get_if<clog::VerifyResponse>(&*reply);
  if (!resp) return Outcome::Reject("clm-malformed");

  // The CLM's view of the mapping log against the local copy.
  if (resp->m.mlog_size > cache_.Get(config_.mlm).size) {
    Outcome again = RequestMapping(domain, &map);
    if (!again.ok()) return again;
    if (map.entry.cert.subject != clm) return Outcome::Reject("mapping-changed");
    if (resp->m.mlog_size > cache_.Get(config_.mlm).size) return Outcome::Reject("mlog-size-ahead");
  }
  if (resp->m.mlog_size < cache_.Get(config_.mlm).size) return Outcome::Reject("clm-misbehaved");
  if (auto failed = clog::CheckVerifyResponse(*resp, t_A, domain, cert_m, cred.reg, map.entry.cert.key)) {
    return Outcome::Reject(*failed);
  }
  Outcome ext = Extend(s, clm, clm, {resp->dg_clog, resp->size, t_A, Hash(Encode(*resp)), resp->sig});
  if (!ext.ok()) return ext;
  accepted_.push_back({domain, cert.key, t_A});
  return Outcome::Ok("accept");
}

Outcome Browser::CheckAbsence(const std::string& domain) {
  mlog::MappingResponse map;
  Outcome o = RequestMapping(domain, &map);
  if (!o.ok()) return o;
  const std::string clm = map.entry.cert.subject;
  const std::uint64_t s = bus_.BeginSession("absence");
  std::optional<msg::Message> reply = Exchange(s, clm, msg::StatusRequest{domain, clock_.now});
  if (!reply) return Outcome::Reject("clm-transport", clm);
  if (const auto* e = std::get_if<msg::ErrorMessage>(&*reply)) return Outcome::Reject("clm-refused", Describe(*e));
  const auto* resp = std::get_if<clog::StatusResponse>(&*reply);
  if (!resp) return Outcome::Reject("clm-malformed");
  std::optional<Digest> dg_rgx = clog::CheckStatusResponse(*resp, map.entry.cert.key);
  if (!dg_rgx || resp->t_A != clock_.now) return Outcome::Reject("status-signature");
  std::optional<bool> absent = resp->status.Absent(*dg_rgx, domain);
  if (!absent) return Outcome::Reject("absence-proof");
  Outcome ext = Extend(s, clm, clm, {resp->dg_clog, resp->size, clock_.now, Hash(Encode(*resp)), resp->sig});
  if (!ext.ok()) return ext;
  return Outcome::Ok(*absent ? "absent" : "present");
}

// ---- Servers ---------------------------------------------------------------

Bytes Mirror::Serve(const std::string& /*sender*/, ByteView request) {
  return Answer([&]() -> msg::Message {
    msg::Message m = msg::DecodeMessage(request);
    if (!snapshot_) throw RejectError(ErrorCode::kNoMapping, name_ + " has no snapshot");
    if (const auto* r = std::get_if<msg::MappingRequest>(&m)) return snapshot_->Lookup(r->domain);
    if (const auto* r = std::get_if<msg::ExtensionRequest>(&m)) {
      return msg::ExtensionResponse{snapshot_->ProveExtension(r->old_size, r->new_size)};
    }
    throw RejectError(ErrorCode::kMalformed, "unexpected " + msg::MessageName(m));
  });
}

Bus::Handler ServeClm(clog::CertificateLogMaintainer& clm, const Clock& clock) {
  return [&clm, &clock](const std::string& /*sender*/, ByteView request) {
    return Answer([&]() -> msg::Message {
      msg::Message m = msg::DecodeMessage(request);
      if (const auto* r = std::get_if<msg::AddRequest>(&m)) return clm.Register(r->action, clock.now);
      if (const auto* r = std::get_if<msg::RevokeRequest>(&m)) return clm.Revoke(r->action, clock.now);
      if (const auto* r = std::get_if<msg::VerifyRequest>(&m)) {
        clog::VerifyOutcome out = clm.VerifyCert(r->t_A, r->cert, r->cert_m, clock.now);
        return std::visit([](auto&& v) { return msg::Message(std::move(v)); }, std::move(out));
      }
      if (const auto* r = std::get_if<msg::StatusRequest>(&m)) return clm.Status(r->domain, r->t_A, clock.now);
      if (const auto* r = std::get_if<msg::ExtensionRequest>(&m)) {
        return msg::ExtensionResponse{clm.ProveExtension(r->old_size, r->new_size)};
      }
      throw RejectError(ErrorCode::kMalformed, "unexpected " + msg::MessageName(m));
    });
  };
}

}  // namespace dtki::actors
