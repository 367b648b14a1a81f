#include "dtki/certificate.h"

#include "dtki/encoding.h"

namespace dtki {
namespace {

void PutTbs(Writer& w, const Certificate& c) {
  w.PutString(c.subject);
  c.key.EncodeTo(w);
  w.PutUint(static_cast<std::uint64_t>(c.kind));
  w.PutUint(c.serial);
  w.PutInt(c.not_before);
  w.PutInt(c.not_after);
  w.PutString(c.issuer);
}

}  // namespace

Bytes Certificate::TbsEncoding() const {
  Writer w;
  w.PutComposite(Tag::kCertificate, [&](Writer& c) { PutTbs(c, *this); });
  return w.Take();
}

Bytes Certificate::FilingKey() const {
  Writer w;
  w.PutString(subject);
  w.PutUint(serial);
  return w.Take();
}

void Certificate::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kCertificate, [&](Writer& c) {
    PutTbs(c, *this);
    issuer_sig.EncodeTo(c);
  });
}

Certificate Certificate::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kCertificate);
  Certificate cert;
  cert.subject = c.GetString();
  cert.key = PublicKey::DecodeFrom(c);
  const std::uint64_t kind = c.GetUint();
  if (kind < 1 || kind > 3) throw DecodeError("unknown certificate kind");
  cert.kind = static_cast<CertKind>(kind);
  cert.serial = c.GetUint();
  cert.not_before = c.GetInt();
  cert.not_after = c.GetInt();
  cert.issuer = c.GetString();
  cert.issuer_sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return cert;
}

bool VerifyIssuer(const Certificate& cert, const PublicKey& issuer_key) {
  return Verify(issuer_key, cert.TbsEncoding(), cert.issuer_sig);
}

bool VerifyIssuer(const Certificate& cert, const TrustedIssuers& issuers) {
  auto it = issuers.find(cert.issuer);
  return it != issuers.end() && VerifyIssuer(cert, it->second);
}

Certificate CertificateAuthority::Issue(const std::string& subject, const PublicKey& key,
                                        CertKind kind, Time not_before, Time not_after) {
  Certificate c;
  c.subject = subject;
  c.key = key;
  c.kind = kind;
  c.serial = next_serial_++;
  c.not_before = not_before;
  c.not_after = not_after;
  c.issuer = name_;
  c.issuer_sig = key_.Sign(c.TbsEncoding());
  return c;
}

Bytes SignedCertAction::SignedBytes(const Certificate& cert, Time t, CertAction action) {
  Writer w;
  w.PutComposite(Tag::kSignedPayload, [&](Writer& c) {
    cert.EncodeTo(c);
    c.PutInt(t);
    c.PutString(action == CertAction::kReg ? "reg" : "rev");
  });
  return w.Take();
}

SignedCertAction SignedCertAction::Make(const SigningKey& key, Certificate cert, Time t,
                                        CertAction action) {
  SignedCertAction a;
  a.sig = key.Sign(SignedBytes(cert, t, action));
  a.cert = std::move(cert);
  a.t = t;
  a.action = action;
  return a;
}

bool SignedCertAction::VerifyWith(const PublicKey& key) const {
  return Verify(key, SignedBytes(cert, t, action), sig);
}

void SignedCertAction::EncodeTo(Writer& w) const {
  w.PutComposite(Tag::kCertAction, [&](Writer& c) {
    cert.EncodeTo(c);
    c.PutInt(t);
    c.PutUint(static_cast<std::uint64_t>(action));
    sig.EncodeTo(c);
  });
}

SignedCertAction SignedCertAction::DecodeFrom(Reader& r) {
  Reader c = r.Enter(Tag::kCertAction);
  SignedCertAction a;
  a.cert = Certificate::DecodeFrom(c);
  a.t = c.GetInt();
  const std::uint64_t action = c.GetUint();
  if (action < 1 || action > 2) throw DecodeError("unknown certificate action");
  a.action = static_cast<CertAction>(action);
  a.sig = Signature::DecodeFrom(c);
  c.ExpectEnd();
  return a;
}

}  // namespace dtki
