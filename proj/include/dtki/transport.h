#ifndef DTKI_TRANSPORT_H_
#define DTKI_TRANSPORT_H_

// In-process request/response bus. Every message is recorded in a transcript,
// one line per message:
//
//   seq session dir sender receiver len hex
//
// where dir is "->" for requests and "<-" for responses. Sessions group the
// messages of one protocol run and carry a protocol label for size accounting.

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "dtki/bytes.h"

namespace dtki {

struct TranscriptLine {
  std::uint64_t seq = 0;
  std::uint64_t session = 0;
  bool request = true;
  std::string sender;
  std::string receiver;
  Bytes payload;

  std::string ToLine() const;
};

class Bus {
 public:
  // Returns the encoded response to an encoded request from `sender`.
  using Handler = std::function<Bytes(const std::string& sender, ByteView request)>;

  void Register(const std::string& endpoint, Handler handler);
  bool Has(const std::string& endpoint) const { return handlers_.count(endpoint) > 0; }

  // Network-level redirect: requests from `client` to `logical` reach
  // `actual` instead. Used to model an adversary serving a fork.
  void Route(const std::string& client, const std::string& logical, const std::string& actual);

  std::uint64_t BeginSession(const std::string& protocol);
  const std::string& SessionProtocol(std::uint64_t session) const { return sessions_.at(session); }

  // Delivers a request and records both directions. Throws RejectError
  // (kUnknownEndpoint) for an unknown receiver.
  Bytes Call(std::uint64_t session, const std::string& sender, const std::string& receiver, Bytes request);

  // Session of the innermost Call in progress, so a relaying handler can stay
  // in the caller's session. 0 outside any call.
  std::uint64_t current_session() const { return active_.empty() ? 0 : active_.back(); }

  const std::vector<TranscriptLine>& transcript() const { return transcript_; }
  // Total bytes of every message in a session.
  std::size_t SessionBytes(std::uint64_t session) const;
  void WriteTranscript(std::ostream& out) const;

 private:
  std::map<std::string, Handler> handlers_;
  std::map<std::pair<std::string, std::string>, std::string> routes_;
  std::vector<std::string> sessions_ = {""};
  std::vector<TranscriptLine> transcript_;
  std::vector<std::uint64_t> active_;
};

}  // namespace dtki

#endif  // DTKI_TRANSPORT_H_
