#ifndef DTKI_MESSAGES_H_
#define DTKI_MESSAGES_H_

// Wire messages exchanged over the bus. Every message encodes with the
// canonical encoding; field order follows the protocol figures.

#include <string>
#include <variant>

#include "dtki/certlog.h"
#include "dtki/errors.h"
#include "dtki/maplog.h"

namespace dtki::msg {

struct MappingRequest {
  std::string domain;
};

// The client's cached (dg', N') and the size it wants a proof up to. Sent only
// after the fresh response has been checked.
struct ExtensionRequest {
  Digest old_digest;
  std::uint64_t old_size = 0;
  std::uint64_t new_size = 0;
};

struct ExtensionResponse {
  chrono::ExtensionProof proof;
};

struct AddRequest {
  SignedCertAction action;
};

struct RevokeRequest {
  SignedCertAction action;
};

struct VerifyRequest {
  Time t_A = 0;
  Certificate cert;
  Certificate cert_m;
};

struct StatusRequest {
  std::string domain;
  Time t_A = 0;
};

struct ErrorMessage {
  ErrorCode code = ErrorCode::kMalformed;
  std::string text;
};

// Privacy redirect: the domain's server relays an encoded request to `to`.
struct Forward {
  std::string to;
  Bytes inner;
};

using Message = std::variant<MappingRequest, mlog::MappingResponse, ExtensionRequest, ExtensionResponse, AddRequest,
                             RevokeRequest, clog::RegisterResponse, VerifyRequest, clog::VerifyResponse, StatusRequest,
                             clog::StatusResponse, ErrorMessage, Forward>;

Bytes EncodeMessage(const Message& m);
// Throws DecodeError.
Message DecodeMessage(ByteView data);
std::string MessageName(const Message& m);

}  // namespace dtki::msg

#endif  // DTKI_MESSAGES_H_
