#include "dtki/errors.h"

namespace dtki {

std::string_view ErrorName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kNoMapping: return "no-mapping";
    case ErrorCode::kBlacklisted: return "blacklisted";
    case ErrorCode::kOverlap: return "overlap";
    case ErrorCode::kUnknownId: return "unknown-id";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kBadSignature: return "bad-signature";
    case ErrorCode::kStaleTime: return "stale-time";
    case ErrorCode::kDuplicateMaster: return "duplicate-master";
    case ErrorCode::kUnmapped: return "unmapped";
    case ErrorCode::kNoRegistration: return "no-registration";
    case ErrorCode::kRevokeOrder: return "revoke-order";
    case ErrorCode::kWrongMasterKey: return "wrong-master-key";
    case ErrorCode::kOutOfWindow: return "out-of-window";
    case ErrorCode::kSyncIntegrity: return "sync-integrity";
    case ErrorCode::kUnknownHistory: return "unknown-history";
    case ErrorCode::kNotActive: return "not-active";
    case ErrorCode::kNotManaged: return "not-managed";
    case ErrorCode::kDuplicateCert: return "duplicate-cert";
    case ErrorCode::kBadCertificate: return "bad-certificate";
    case ErrorCode::kUnknownEndpoint: return "unknown-endpoint";
  }
  return "unknown";
}

}  // namespace dtki
