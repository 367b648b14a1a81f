#include "dtki/transport.h"

#include <sstream>

#include "dtki/errors.h"

namespace dtki {

std::string TranscriptLine::ToLine() const {
  std::ostringstream out;
  out << seq << ' ' << session << ' ' << (request ? "->" : "<-") << ' ' << sender << ' ' << receiver << ' '
      << payload.size() << ' ' << HexEncode(payload);
  return out.str();
}

void Bus::Register(const std::string& endpoint, Handler handler) { handlers_[endpoint] = std::move(handler); }

void Bus::Route(const std::string& client, const std::string& logical, const std::string& actual) {
  routes_[{client, logical}] = actual;
}

std::uint64_t Bus::BeginSession(const std::string& protocol) {
  sessions_.push_back(protocol);
  return sessions_.size() - 1;
}

Bytes Bus::Call(std::uint64_t session, const std::string& sender, const std::string& receiver, Bytes request) {
  std::string target = receiver;
  if (auto it = routes_.find({sender, receiver}); it != routes_.end()) target = it->second;
  auto h = handlers_.find(target);
  if (h == handlers_.end()) throw RejectError(ErrorCode::kUnknownEndpoint, receiver);
  transcript_.push_back({transcript_.size(), session, true, sender, receiver, request});
  active_.push_back(session);
  Bytes response;
  try {
    response = h->second(sender, request);
  } catch (...) {
    active_.pop_back();
    throw;
  }
  active_.pop_back();
  transcript_.push_back({transcript_.size(), session, false, receiver, sender, response});
  return response;
}

std::size_t Bus::SessionBytes(std::uint64_t session) const {
  std::size_t total = 0;
  for (const TranscriptLine& l : transcript_) {
    if (l.session == session) total += l.payload.size();
  }
  return total;
}

void Bus::WriteTranscript(std::ostream& out) const {
  for (const TranscriptLine& l : transcript_) out << l.ToLine() << '\n';
}

}  // namespace dtki
