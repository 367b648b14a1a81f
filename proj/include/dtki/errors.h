#ifndef DTKI_ERRORS_H_
#define DTKI_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dtki {

// Rejection reasons shared by the log maintainers and the protocol engines.
// Values are stable: they travel inside error responses.
enum class ErrorCode : std::uint16_t {
  kMalformed = 1,
  kNoMapping = 2,
  kBlacklisted = 3,
  kOverlap = 4,
  kUnknownId = 5,
  kDuplicateId = 6,
  kBadSignature = 7,
  kStaleTime = 8,
  kDuplicateMaster = 9,
  kUnmapped = 10,
  kNoRegistration = 11,
  kRevokeOrder = 12,
  kWrongMasterKey = 13,
  kOutOfWindow = 14,
  kSyncIntegrity = 15,
  kUnknownHistory = 16,
  kNotActive = 17,
  kNotManaged = 18,
  kDuplicateCert = 19,
  kBadCertificate = 20,
  kUnknownEndpoint = 21,
};

std::string_view ErrorName(ErrorCode code);

// A request refused by a maintainer. Nothing is appended when this is thrown.
class RejectError : public std::runtime_error {
 public:
  RejectError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorName(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dtki

#endif  // DTKI_ERRORS_H_
