#include "dtki/key_oracle.h"

namespace dtki {

std::string_view KeyStatusName(KeyStatus s) {
  switch (s) {
    case KeyStatus::kNone:
      return "none";
    case KeyStatus::kActive:
      return "authentic-active";
    case KeyStatus::kRevoked:
      return "authentic-revoked";
  }
  return "?";
}

void KeyOracle::Register(const std::string& domain, const PublicKey& pk, Time t) {
  auto [it, inserted] = keys_.try_emplace({domain, pk}, Life{t, std::nullopt});
  if (!inserted) throw OracleError("key registered twice for " + domain);
}

void KeyOracle::Revoke(const std::string& domain, const PublicKey& pk, Time t) {
  auto it = keys_.find({domain, pk});
  if (it == keys_.end()) throw OracleError("revoking an unknown key of " + domain);
  if (it->second.revoked) throw OracleError("key revoked twice for " + domain);
  if (t < it->second.registered) throw OracleError("revocation before registration for " + domain);
  it->second.revoked = t;
}

KeyStatus KeyOracle::Status(const std::string& domain, const PublicKey& pk, Time t) const {
  auto it = keys_.find({domain, pk});
  if (it == keys_.end() || t < it->second.registered) return KeyStatus::kNone;
  if (it->second.revoked && t >= *it->second.revoked) return KeyStatus::kRevoked;
  return KeyStatus::kActive;
}

}  // namespace dtki
