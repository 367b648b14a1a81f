#ifndef DTKI_CERTIFICATE_H_
#define DTKI_CERTIFICATE_H_

#include <cstdint>
#include <map>
#include <string>

#include "dtki/bytes.h"
#include "dtki/crypto.h"

namespace dtki {

class Writer;
class Reader;

// kLog certificates identify certificate log maintainers in the mapping log.
enum class CertKind : std::uint8_t { kMaster = 1, kTls = 2, kLog = 3 };

struct Certificate {
  std::string subject;
  PublicKey key;
  CertKind kind = CertKind::kTls;
  std::uint64_t serial = 0;
  Time not_before = 0;
  Time not_after = 0;
  std::string issuer;
  Signature issuer_sig;

  // Everything except the issuer signature.
  Bytes TbsEncoding() const;
  bool ValidAt(Time t) const { return not_before <= t && t <= not_after; }
  // Key under which the certificate is filed in the per-domain maps:
  // encode(subject, serial), so entries sort by subject first.
  Bytes FilingKey() const;

  void EncodeTo(Writer& w) const;
  static Certificate DecodeFrom(Reader& r);
  bool operator==(const Certificate&) const = default;
};

bool VerifyIssuer(const Certificate& cert, const PublicKey& issuer_key);

class CertificateAuthority {
 public:
  CertificateAuthority(std::string name, SigningKey key) : name_(std::move(name)), key_(std::move(key)) {}

  Certificate Issue(const std::string& subject, const PublicKey& key, CertKind kind,
                    Time not_before, Time not_after);

  const std::string& name() const { return name_; }
  const PublicKey& public_key() const { return key_.public_key(); }

 private:
  std::string name_;
  SigningKey key_;
  std::uint64_t next_serial_ = 1;
};

// Issuer name -> key. Maintainers accept certificates from these issuers only.
using TrustedIssuers = std::map<std::string, PublicKey>;
bool VerifyIssuer(const Certificate& cert, const TrustedIssuers& issuers);

enum class CertAction : std::uint8_t { kReg = 1, kRev = 2 };

// sign_skm(cert, t, 'reg' | 'rev'). The constant tag is part of the signed
// bytes so a registration signature never doubles as a revocation.
struct SignedCertAction {
  Certificate cert;
  Time t = 0;
  CertAction action = CertAction::kReg;
  Signature sig;

  static Bytes SignedBytes(const Certificate& cert, Time t, CertAction action);
  static SignedCertAction Make(const SigningKey& key, Certificate cert, Time t, CertAction action);
  bool VerifyWith(const PublicKey& key) const;

  void EncodeTo(Writer& w) const;
  static SignedCertAction DecodeFrom(Reader& r);
  bool operator==(const SignedCertAction&) const = default;
};

}  // namespace dtki

#endif  // DTKI_CERTIFICATE_H_
