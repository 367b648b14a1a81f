#ifndef DTKI_TESTS_FIXTURES_H_
#define DTKI_TESTS_FIXTURES_H_

#include <string>

#include "dtki/certificate.h"
#include "dtki/crypto.h"
#include "dtki/maplog.h"

namespace dtki::testing {

inline SigningKey KeyFor(const std::string& name) { return SigningKey::FromSeed(Hash("seed:" + name).view()); }

inline constexpr Time kYear = 365 * 86400;

// A CA plus helpers for the certificates most tests need.
struct Pki {
  CertificateAuthority ca{"ca", KeyFor("ca")};
  TrustedIssuers issuers{{"ca", KeyFor("ca").public_key()}};

  Certificate LogCert(const std::string& id) {
    return ca.Issue(id, KeyFor(id).public_key(), CertKind::kLog, 0, 10 * kYear);
  }
  mlog::MapNew NewClm(const std::string& id, Time t) {
    return mlog::MapNew{{LogCert(id), mlog::LogHead::Make(KeyFor(id), 0, Digest::Empty(), t)}};
  }
};

}  // namespace dtki::testing

#endif  // DTKI_TESTS_FIXTURES_H_
