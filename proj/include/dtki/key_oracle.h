#ifndef DTKI_KEY_ORACLE_H_
#define DTKI_KEY_ORACLE_H_

// Ground truth for tests: which public keys a domain owner really holds and
// when. Fed from honest actors' intents only, never from log contents.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "dtki/crypto.h"

namespace dtki {

class OracleError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class KeyStatus { kNone, kActive, kRevoked };

std::string_view KeyStatusName(KeyStatus s);

class KeyOracle {
 public:
  // A key is recorded once per domain; a second registration is an error.
  void Register(const std::string& domain, const PublicKey& pk, Time t);
  // Only an active key can be revoked, and not before its registration.
  void Revoke(const std::string& domain, const PublicKey& pk, Time t);

  // kNone before registration, kActive in [t_reg, t_rev), kRevoked after.
  KeyStatus Status(const std::string& domain, const PublicKey& pk, Time t) const;
  bool AuthenticActive(const std::string& domain, const PublicKey& pk, Time t) const {
    return Status(domain, pk, t) == KeyStatus::kActive;
  }

 private:
  struct Life {
    Time registered = 0;
    std::optional<Time> revoked;
  };
  std::map<std::pair<std::string, PublicKey>, Life> keys_;
};

}  // namespace dtki

#endif  // DTKI_KEY_ORACLE_H_
