#ifndef DTKI_ARCHIVE_H_
#define DTKI_ARCHIVE_H_

// Everything an auditor downloads from a maintainer: the records, the proof
// material for each one and the latest signed head. Archives are written to
// and read back from a state directory so audits can run offline.

#include <filesystem>
#include <string>
#include <vector>

#include "dtki/certlog.h"
#include "dtki/maplog.h"

namespace dtki {

namespace mlog {

struct MlogArchive {
  std::string name;
  PublicKey key;
  std::vector<MapRecord> records;
  std::vector<MlmWitness> witnesses;
  SignedMlogTimestamp ts;
  // Position of each published record under ts.
  std::vector<chrono::PresenceProof> positions;

  // Rebuilds the chronological log from the records.
  chrono::ChronoLog Log() const;
  // Replays the records through the state machine. Throws RejectError if a
  // request does not apply; StateAt(n) of the result matches the maintainer.
  std::vector<MapState> Replay(const TrustedIssuers& issuers) const;

  void EncodeTo(Writer& w) const;
  static MlogArchive DecodeFrom(Reader& r);
};

}  // namespace mlog

namespace clog {

struct ClogArchive {
  std::string id;
  PublicKey key;
  std::vector<CertRecord> records;
  std::vector<ClmWitness> witnesses;
  mlog::LogHead head;
  // Position of each record under head.
  std::vector<chrono::PresenceProof> positions;

  chrono::ChronoLog Log() const;

  void EncodeTo(Writer& w) const;
  static ClogArchive DecodeFrom(Reader& r);
};

}  // namespace clog

// On-disk layout: mlog.bin plus one clog-<id>.bin per CLM, and an optional
// issuers.bin with the trusted certificate issuers.
struct StateDir {
  mlog::MlogArchive mlog;
  std::vector<clog::ClogArchive> clogs;
  TrustedIssuers issuers;

  void Save(const std::filesystem::path& dir) const;
  static StateDir Load(const std::filesystem::path& dir);
};

}  // namespace dtki

#endif  // DTKI_ARCHIVE_H_
