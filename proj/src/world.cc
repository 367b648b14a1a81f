#include "dtki/world.h"

#include <algorithm>
#include <sstream>

#include "dtki/encoding.h"
#include "dtki/rgx.h"

namespace dtki::sim {

namespace {

constexpr Time kYear = 365 * 86400;
constexpr char kMlm[] = "mlm";
constexpr char kForkSuffix[] = "#fork";

Bytes Key(std::string_view s) { return ToBytes(s); }

[[noreturn]] void Fail(const std::string& what) { throw WorldError(what); }

}  // namespace

World::World(std::uint64_t seed, Time start, Time validity) : seed_(seed), validity_(validity) {
  clock_.now = start;
  AddCa("ca");
  mlm_ = std::make_unique<mlog::MappingLogMaintainer>(kMlm, KeyFor("mlm"), issuers_, validity_);
}

SigningKey World::KeyFor(const std::string& label) const {
  Writer w;
  w.PutUint(seed_);
  w.PutString(label);
  return SigningKey::FromSeed(Hash(w.bytes()).view());
}

void World::AdvanceTo(Time t) {
  if (t < clock_.now) Fail("time goes backwards: " + std::to_string(t));
  clock_.now = t;
  if (mlm_->size() > 0 && clock_.now - mlm_->published()->ts.t >= validity_ / 2) RefreshTimestamp();
}

void World::RefreshTimestamp() {
  mlm_->IssueTimestamp(clock_.now);
  for (auto& [name, m] : mirrors_) m->Sync(mlm_->published());
}

// ---- Setup -----------------------------------------------------------------

void World::AddCa(const std::string& name) {
  for (const auto& ca : cas_) {
    if (ca->name() == name) Fail("duplicate CA " + name);
  }
  cas_.push_back(std::make_unique<CertificateAuthority>(name, KeyFor("ca:" + name)));
  issuers_[name] = cas_.back()->public_key();
}

void World::AddClm(const std::string& id) {
  if (clms_.count(id) || id.find('#') != std::string::npos) Fail("bad or duplicate CLM id " + id);
  const SigningKey key = KeyFor("clm:" + id);
  clms_[id] = std::make_unique<clog::CertificateLogMaintainer>(id, key, issuers_);
  clm_certs_[id] = cas_.front()->Issue(id, key.public_key(), CertKind::kLog, clock_.now, clock_.now + 10 * kYear);
  bus_.Register(id, actors::ServeClm(*clms_[id], clock_));
  pending_.push_back({PendingOp::kNew, "", id, ""});
}

void World::AddMirror(const std::string& name) {
  if (mirrors_.count(name) || bus_.Has(name)) Fail("duplicate endpoint " + name);
  auto m = std::make_unique<actors::Mirror>(name);
  m->Sync(mlm_->published());
  actors::Mirror* raw = m.get();
  bus_.Register(name, [raw](const std::string& sender, ByteView req) { return raw->Serve(sender, req); });
  mirrors_[name] = std::move(m);
}

std::string World::Canonical(const std::string& rgx) const {
  try {
    return Rgx::Parse(rgx).text();
  } catch (const RgxParseError& e) {
    Fail(std::string("bad rgx: ") + e.what());
  }
}

void World::Map(const std::string& rgx, const std::string& id) {
  if (!clms_.count(id)) Fail("unknown CLM " + id);
  pending_.push_back({PendingOp::kAdd, Canonical(rgx), id, ""});
}

void World::Unmap(const std::string& rgx) { pending_.push_back({PendingOp::kDel, Canonical(rgx), "", ""}); }

void World::Move(const std::string& rgx, const std::string& to) {
  if (!clms_.count(to)) Fail("unknown CLM " + to);
  pending_.push_back({PendingOp::kMove, Canonical(rgx), to, ""});
}

void World::Blacklist(const std::string& id, const std::string& successor) {
  if (!clms_.count(id) || !clms_.count(successor)) Fail("unknown CLM in blacklist " + id + " -> " + successor);
  pending_.push_back({PendingOp::kBl, "", id, successor});
}

std::optional<std::string> World::MappedTo(const std::string& rgx) const {
  std::optional<Bytes> id = mlm_->state().r.find(Key(rgx));
  if (!id) return std::nullopt;
  return std::string(id->begin(), id->end());
}

void World::ApplyMlm(const mlog::MapRequest& req) { mlm_->Apply(req, clock_.now); }

void World::RunSync(const SyncOp& op, std::uint64_t n_mlog) {
  clog::CertificateLogMaintainer& from = clm(op.from);
  const bool dead = blacklisted_.count(op.from) > 0;
  const bool keep = skip_sync_.count(op.from) > 0;
  if (!op.to.empty()) {
    clog::CertificateLogMaintainer& to = clm(op.to);
    to.Manage(op.rgx);
    const bool swap = dead && swap_master_.count(op.to) > 0;
    for (const std::string& domain : from.DomainsUnder(op.rgx)) {
      clog::DomainExport ex = from.Export(domain);
      const Digest h = from.HeadOf(domain)->Hash();
      if (swap && ex.master) {
        auto [m, key] = AttackerMaster(domain, "swap:" + op.to);
        ex.master = SignedCertAction::Make(key, m, clock_.now, CertAction::kReg);
        to.SkipSyncCheck(true);
      }
      to.UpAdd(ex, h, n_mlog);
      to.SkipSyncCheck(false);
    }
  }
  // A blacklisted CLM is not asked to write; a CLM skipping sync keeps serving.
  if (dead || keep) return;
  for (const std::string& domain : from.DomainsUnder(op.rgx)) from.UpDel(domain, n_mlog);
  from.Unmanage(op.rgx);
}

void World::Commit() {
  std::vector<SyncOp> syncs;
  std::vector<std::pair<std::string, std::string>> manage;
  for (const PendingOp& op : pending_) {
    switch (op.kind) {
      case PendingOp::kNew: {
        const SigningKey key = KeyFor("clm:" + op.id);
        ApplyMlm({mlog::MapNew{{clm_certs_.at(op.id), mlog::LogHead::Make(key, 0, Digest::Empty(), clock_.now)}}});
        break;
      }
      case PendingOp::kAdd:
        ApplyMlm({mlog::MapAdd{op.rgx, op.id}});
        manage.emplace_back(op.id, op.rgx);
        break;
      case PendingOp::kDel:
      case PendingOp::kMove: {
        std::optional<std::string> from = MappedTo(op.rgx);
        if (!from) Fail(op.rgx + " is not mapped");
        ApplyMlm({mlog::MapDel{op.rgx, *from}});
        if (op.kind == PendingOp::kMove) ApplyMlm({mlog::MapAdd{op.rgx, op.id}});
        syncs.push_back({op.rgx, *from, op.kind == PendingOp::kMove ? op.id : ""});
        break;
      }
      case PendingOp::kBl: {
        std::vector<std::string> rgxs;
        auto it = mlm_->state().irgx.find(op.id);
        if (it != mlm_->state().irgx.end()) {
          for (const ods::Entry& e : it->second.entries()) rgxs.emplace_back(e.key.begin(), e.key.end());
        }
        ApplyMlm({mlog::MapBl{op.id}});
        blacklisted_.insert(op.id);
        for (const std::string& rgx : rgxs) {
          ApplyMlm({mlog::MapAdd{rgx, op.other}});
          syncs.push_back({rgx, op.id, op.other});
          for (const auto& [name, o] : owners_) {
            if (Rgx::Parse(rgx).Matches(o->domain())) blacklist_hits_.insert(name);
          }
        }
        break;
      }
    }
  }
  pending_.clear();

  // Every live CLM whose log moves, or has moved since its last head in S_s,
  // gets a head refresh. Count them first: sync records carry the final size.
  std::set<std::string> changed;
  for (const SyncOp& op : syncs) {
    if (!op.to.empty()) changed.insert(op.to);
    if (!blacklisted_.count(op.from)) changed.insert(op.from);
  }
  for (const std::string& id : ClmIds()) {
    if (blacklisted_.count(id)) continue;
    std::optional<mlog::ClmEntry> entry = mlm_->state().Entry(id);
    if (entry && entry->head.size != clms_.at(id)->size()) changed.insert(id);
  }
  const std::uint64_t final_size = mlm_->size() + changed.size() + 1;

  for (const auto& [id, rgx] : manage) clm(id).Manage(rgx);
  for (const SyncOp& op : syncs) RunSync(op, final_size);
  for (const std::string& id : changed) {
    const SigningKey key = KeyFor("clm:" + id);
    const Certificate& cert = clm_certs_.at(id);
    ApplyMlm({mlog::MapMod{cert, cert, key.Sign(mlog::MapMod::EndorsedBytes(cert)), clm(id).Head(clock_.now)}});
  }
  ApplyMlm({mlog::MapEnd{}});
  if (mlm_->size() != final_size) Fail("mapping batch size mismatch");
  for (auto& [id, c] : clms_) c->SetMlogSize(final_size);
  for (auto& [name, m] : mirrors_) m->Sync(mlm_->published());
}

actors::ClientConfig World::Config(const std::string& mirror) const {
  if (!mirrors_.count(mirror)) Fail("unknown mirror " + mirror);
  return actors::ClientConfig{kMlm, mlm_->public_key(), mirror, issuers_, validity_};
}

actors::DomainOwner& World::AddOwner(const std::string& name, const std::string& domain, const std::string& mirror) {
  if (owners_.count(name) || browsers_.count(name) || bus_.Has(name)) Fail("duplicate actor " + name);
  SigningKey key = KeyFor("owner:" + name + ":master");
  Certificate m = cas_.front()->Issue(domain, key.public_key(), CertKind::kMaster, clock_.now, clock_.now + 10 * kYear);
  auto o = std::make_unique<actors::DomainOwner>(name, domain, bus_, clock_, Config(mirror), key, m);
  actors::DomainOwner* raw = o.get();
  bus_.Register(name, [raw](const std::string& sender, ByteView req) { return raw->Serve(sender, req); });
  owners_[name] = std::move(o);
  return *raw;
}

actors::Browser& World::AddBrowser(const std::string& name, const std::string& mirror) {
  if (owners_.count(name) || browsers_.count(name) || bus_.Has(name)) Fail("duplicate actor " + name);
  auto b = std::make_unique<actors::Browser>(name, bus_, clock_, Config(mirror));
  actors::Browser* raw = b.get();
  browsers_[name] = std::move(b);
  return *raw;
}

// ---- Protocol runs ---------------------------------------------------------

actors::Outcome World::PublishMaster(const std::string& name) {
  actors::DomainOwner& o = owner(name);
  actors::Outcome out = o.PublishMaster();
  if (out.ok()) oracle_.Register(o.domain(), o.master_cert().key, clock_.now);
  return out;
}

actors::Outcome World::PublishTls(const std::string& name, const std::string& label) {
  actors::DomainOwner& o = owner(name);
  SigningKey key = KeyFor("owner:" + name + ":tls:" + label);
  Certificate tls = cas_.front()->Issue(o.domain(), key.public_key(), CertKind::kTls, clock_.now, clock_.now + kYear);
  actors::Outcome out = o.PublishTls(label, tls);
  if (out.ok()) oracle_.Register(o.domain(), tls.key, clock_.now);
  return out;
}

actors::Outcome World::RevokeTls(const std::string& name, const std::string& label) {
  actors::DomainOwner& o = owner(name);
  actors::Outcome out = o.RevokeTls(label);
  if (out.ok()) oracle_.Revoke(o.domain(), o.CredentialFor(label)->cert().key, clock_.now);
  return out;
}

actors::Outcome World::RevokeMaster(const std::string& name) {
  actors::DomainOwner& o = owner(name);
  actors::Outcome out = o.RevokeMaster();
  if (out.ok()) oracle_.Revoke(o.domain(), o.master_cert().key, clock_.now);
  return out;
}

actors::Outcome World::CheckMaster(const std::string& name) { return owner(name).CheckMaster(); }

actors::Outcome World::Verify(const std::string& b, const std::string& credential,
                              const std::optional<std::string>& via) {
  std::optional<std::pair<std::string, actors::Credential>> cred = FindCredential(credential);
  if (!cred) Fail("unknown credential " + credential);
  if (via && !owners_.count(*via)) Fail("relay must be an owner: " + *via);
  return browser(b).Verify(cred->first, cred->second, via);
}

actors::Outcome World::CheckAbsence(const std::string& b, const std::string& domain) {
  return browser(b).CheckAbsence(domain);
}

std::vector<std::pair<std::string, actors::Outcome>> World::TakeBlacklistChecks() {
  std::vector<std::pair<std::string, actors::Outcome>> out;
  for (const std::string& name : blacklist_hits_) out.emplace_back(name, owner(name).OnBlacklist());
  blacklist_hits_.clear();
  return out;
}

// ---- Adversary -------------------------------------------------------------

std::pair<Certificate, SigningKey> World::AttackerMaster(const std::string& domain, const std::string& as) {
  SigningKey key = KeyFor("adv:" + as + ":master:" + domain);
  Certificate m = cas_.front()->Issue(domain, key.public_key(), CertKind::kMaster, clock_.now, clock_.now + kYear);
  return {m, key};
}

actors::Credential World::AttackerCredential(const std::string& domain, const std::string& as) {
  auto [m, mkey] = AttackerMaster(domain, as);
  SigningKey key = KeyFor("adv:" + as + ":tls:" + domain);
  Certificate tls = cas_.front()->Issue(domain, key.public_key(), CertKind::kTls, clock_.now, clock_.now + kYear);
  return actors::Credential{m, SignedCertAction::Make(mkey, tls, clock_.now, CertAction::kReg)};
}

void World::FakeCertNoLog(const std::string& domain, const std::string& as) {
  if (fake_creds_.count(as) || as.find('/') != std::string::npos) Fail("bad or duplicate credential name " + as);
  fake_creds_[as] = {domain, AttackerCredential(domain, as)};
}

void World::FakeCertInLog(const std::string& clm_id, const std::string& domain, const std::string& as) {
  FakeCertNoLog(domain, as);
  const actors::Credential& cred = fake_creds_.at(as).second;
  clog::CertificateLogMaintainer& c = clm(clm_id);
  // The master registration is self-signed, so the CLM only has to skip the
  // existing-master check.
  SigningKey mkey = KeyFor("adv:" + as + ":master:" + domain);
  c.SkipMasterCheck(true);
  try {
    c.Register(SignedCertAction::Make(mkey, cred.cert_m, clock_.now, CertAction::kReg), clock_.now);
    c.Register(cred.reg, clock_.now);
  } catch (const RejectError& e) {
    c.SkipMasterCheck(false);
    Fail(std::string("fake-cert-in-log refused: ") + e.what());
  }
  c.SkipMasterCheck(false);
}

void World::ForkLog(const std::string& clm_id, const std::vector<std::string>& victims) {
  const std::string fork = clm_id + kForkSuffix;
  if (clms_.count(fork)) Fail(clm_id + " is already forked");
  clms_[fork] = std::make_unique<clog::CertificateLogMaintainer>(clm(clm_id));
  bus_.Register(fork, actors::ServeClm(*clms_[fork], clock_));
  for (const std::string& v : victims) bus_.Route(v, clm_id, fork);
}

void World::SkipSync(const std::string& clm_id) {
  clm(clm_id);
  skip_sync_.insert(clm_id);
}

void World::StaleTimestamp(const std::string& mirror) {
  if (!mirrors_.count(mirror)) Fail("unknown mirror " + mirror);
  mirrors_.at(mirror)->Freeze(true);
}

void World::SwapMasterOnBlacklist(const std::string& clm_id) {
  clm(clm_id);
  swap_master_.insert(clm_id);
}

// ---- Inspection ------------------------------------------------------------

clog::CertificateLogMaintainer& World::clm(const std::string& id) {
  auto it = clms_.find(id);
  if (it == clms_.end()) Fail("unknown CLM " + id);
  return *it->second;
}

bool World::HasClm(const std::string& id) const { return clms_.count(id) > 0; }

std::vector<std::string> World::ClmIds() const {
  std::vector<std::string> out;
  for (const auto& [id, c] : clms_) {
    if (id.find('#') == std::string::npos) out.push_back(id);
  }
  return out;
}

actors::DomainOwner& World::owner(const std::string& name) {
  auto it = owners_.find(name);
  if (it == owners_.end()) Fail("unknown owner " + name);
  return *it->second;
}

actors::Browser& World::browser(const std::string& name) {
  auto it = browsers_.find(name);
  if (it == browsers_.end()) Fail("unknown browser " + name);
  return *it->second;
}

std::optional<std::pair<std::string, actors::Credential>> World::FindCredential(const std::string& name) const {
  if (auto it = fake_creds_.find(name); it != fake_creds_.end()) return it->second;
  const std::size_t slash = name.find('/');
  if (slash == std::string::npos) return std::nullopt;
  auto o = owners_.find(name.substr(0, slash));
  if (o == owners_.end()) return std::nullopt;
  std::optional<actors::Credential> cred = o->second->CredentialFor(name.substr(slash + 1));
  if (!cred) return std::nullopt;
  return std::make_pair(o->second->domain(), *cred);
}

StateDir World::Snapshot() const {
  StateDir dir;
  dir.mlog = mlm_->Archive();
  for (const std::string& id : ClmIds()) dir.clogs.push_back(clms_.at(id)->Archive(clock_.now));
  dir.issuers = issuers_;
  return dir;
}

std::vector<audit::AuditVerdict> World::AuditAll() const {
  StateDir dir = Snapshot();
  audit::MlogView view(dir.mlog, dir.issuers);
  return audit::AuditAll(view, dir.clogs);
}

std::vector<std::string> World::OracleReport() const {
  std::vector<std::string> out;
  for (const auto& [name, b] : browsers_) {
    for (const actors::Acceptance& a : b->accepted()) {
      std::ostringstream line;
      line << name << ',' << a.domain << ',' << a.key.Hex().substr(0, 16) << ',' << a.t << ','
           << KeyStatusName(oracle_.Status(a.domain, a.key, a.t));
      out.push_back(line.str());
    }
  }
  return out;
}

bool World::OracleConsistent() const {
  for (const auto& [name, b] : browsers_) {
    for (const actors::Acceptance& a : b->accepted()) {
      if (!oracle_.AuthenticActive(a.domain, a.key, a.t)) return false;
    }
  }
  return true;
}

}  // namespace dtki::sim
