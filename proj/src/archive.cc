#include "dtki/archive.h"

#include <fstream>
#include <algorithm>
#include <iterator>

#include "dtki/encoding.h"

namespace dtki {
namespace {

Bytes ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void WriteFile(const std::filesystem::path& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

namespace mlog {

chrono::ChronoLog MlogArchive::Log() const {
  chrono::ChronoLog log;
  for (const MapRecord& r : records) log.Append(Encode(r));
  return log;
}

std::vector<MapState> MlogArchive::Replay(const TrustedIssuers& issuers) const {
  std::vector<MapState> states(1);
  for (const MapRecord& r : records) states.push_back(ApplyRequest(states.back(), r.req, issuers).state);
  return states;
}

void MlogArchive::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kMlogArchive, [&](Writer& c) {
    c.PutString(name);
    key.EncodeTo(c);
    c.PutList(records);
    c.PutList(witnesses);
    ts.EncodeTo(c);
    c.PutList(positions);
  });
}

MlogArchive MlogArchive::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kMlogArchive);
  MlogArchive a;
  a.name = c.GetString();
  a.key = PublicKey::DecodeFrom(c);
  a.records = c.GetList<MapRecord>();
  a.witnesses = c.GetList<MlmWitness>();
  a.ts = SignedMlogTimestamp::DecodeFrom(c);
  a.positions = c.GetList<chrono::PresenceProof>();
  c.ExpectEnd();
  return a;
}

}  // namespace mlog

namespace clog {

chrono::ChronoLog ClogArchive::Log() const {
  chrono::ChronoLog log;
  for (const CertRecord& r : records) log.Append(r.Item());
  return log;
}

void ClogArchive::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kClogArchive, [&](Writer& c) {
    c.PutString(id);
    key.EncodeTo(c);
    c.PutList(records);
    c.PutList(witnesses);
    head.EncodeTo(c);
    c.PutList(positions);
  });
}

ClogArchive ClogArchive::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kClogArchive);
  ClogArchive a;
  a.id = c.GetString();
  a.key = PublicKey::DecodeFrom(c);
  a.records = c.GetList<CertRecord>();
  a.witnesses = c.GetList<ClmWitness>();
  a.head = mlog::LogHead::DecodeFrom(c);
  a.positions = c.GetList<chrono::PresenceProof>();
  c.ExpectEnd();
  return a;
}

}  // namespace clog

void StateDir::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  WriteFile(dir / "mlog.bin", Encode(mlog));
  for (const clog::ClogArchive& c : clogs) WriteFile(dir / ("clog-" + c.id + ".bin"), Encode(c));
  Writer w;
  w.PutComposite(Tag::kIssuers, [&](Writer& c) {
    for (const auto& [name, key] : issuers) {
      c.PutString(name);
      key.EncodeTo(c);
    }
  });
  WriteFile(dir / "issuers.bin", w.Take());
}

StateDir StateDir::Load(const std::filesystem::path& dir) {
  StateDir s;
  s.mlog = Decode<mlog::MlogArchive>(ReadFile(dir / "mlog.bin"));
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("clog-", 0) == 0 && entry.path().extension() == ".bin") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) s.clogs.push_back(Decode<clog::ClogArchive>(ReadFile(f)));
  if (std::filesystem::exists(dir / "issuers.bin")) {
    Bytes data = ReadFile(dir / "issuers.bin");
    Reader r(data);
    Reader c = r.Enter(Tag::kIssuers);
    while (!c.AtEnd()) {
      std::string name = c.GetString();
      s.issuers[name] = PublicKey::DecodeFrom(c);
    }
    c.ExpectEnd();
    r.ExpectEnd();
  }
  return s;
}

}  // namespace dtki
