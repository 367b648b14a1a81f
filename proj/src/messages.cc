#include "dtki/messages.h"

#include "dtki/encoding.h"

namespace dtki::msg {
Bytes EncodeMessage(const Message& m) {
  Writer w;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, MappingRequest>) {
          w.PutComposite(Tag::kMsgMappingRequest, [&](Writer& c) { c.PutString(x.domain); });
        } else if constexpr (std::is_same_v<T, ExtensionRequest>) {
          w.PutComposite(Tag::kMsgExtensionRequest, [&](Writer& c) {
            x.old_digest.EncodeTo(c);
            c.PutUint(x.old_size);
            c.PutUint(x.new_size);
          });
        } else if constexpr (std::is_same_v<T, ExtensionResponse>) {
          w.PutComposite(Tag::kMsgExtensionResponse, [&](Writer& c) { x.proof.EncodeTo(c); });
        } else if constexpr (std::is_same_v<T, AddRequest>) {
          w.PutComposite(Tag::kMsgAddRequest, [&](Writer& c) { x.action.EncodeTo(c); });
        } else if constexpr (std::is_same_v<T, RevokeRequest>) {
          w.PutComposite(Tag::kMsgRevokeRequest, [&](Writer& c) { x.action.EncodeTo(c); });
        } else if constexpr (std::is_same_v<T, VerifyRequest>) {
          w.PutComposite(Tag::kMsgVerifyRequest, [&](Writer& c) {
            c.PutInt(x.t_A);
            x.cert.EncodeTo(c);
            x.cert_m.EncodeTo(c);
          });
        } else if constexpr (std::is_same_v<T, StatusRequest>) {
          w.PutComposite(Tag::kMsgStatusRequest, [&](Writer& c) {
            c.PutString(x.domain);
            c.PutInt(x.t_A);
          });
        } else if constexpr (std::is_same_v<T, ErrorMessage>) {
          w.PutComposite(Tag::kMsgError, [&](Writer& c) {
            c.PutUint(static_cast<std::uint64_t>(x.code));
            c.PutString(x.text);
          });
        } else if constexpr (std::is_same_v<T, Forward>) {
          w.PutComposite(Tag::kMsgForward, [&](Writer& c) {
            c.PutString(x.to);
            c.PutBytes(x.inner);
          });
        } else {
          x.EncodeTo(w);
        }
      },
      m);
  return w.Take();
}

Message DecodeMessage(ByteView data) {
  Reader r(data);
  Message out;
  switch (r.PeekTag()) {
    case Tag::kMsgMappingRequest: {
      Reader c = r.Enter(Tag::kMsgMappingRequest);
      out = MappingRequest{c.GetString()};
      c.ExpectEnd();
      break;
    }
    case Tag::kMsgMappingResponse:
      out = mlog::MappingResponse::DecodeFrom(r);
      break;
    case Tag::kMsgExtensionRequest: {
      Reader c = r.Enter(Tag::kMsgExtensionRequest);
      ExtensionRequest e;
      e.old_digest = Digest::DecodeFrom(c);
      e.old_size = c.GetUint();
      e.new_size = c.GetUint();
      c.ExpectEnd();
      out = e;
      break;
    }
    case Tag::kMsgExtensionResponse: {
      Reader c = r.Enter(Tag::kMsgExtensionResponse);
      out = ExtensionResponse{chrono::ExtensionProof::DecodeFrom(c)};
      c.ExpectEnd();
      break;
    }
    case Tag::kMsgAddRequest: {
      Reader c = r.Enter(Tag::kMsgAddRequest);
      out = AddRequest{SignedCertAction::DecodeFrom(c)};
      c.ExpectEnd();
      break;
    }
    case Tag::kMsgRevokeRequest: {
      Reader c = r.Enter(Tag::kMsgRevokeRequest);
      out = RevokeRequest{SignedCertAction::DecodeFrom(c)};
      c.ExpectEnd();
      break;
    }
    case Tag::kMsgRegisterResponse:
      out = clog::RegisterResponse::DecodeFrom(r);
      break;
    case Tag::kMsgVerifyRequest: {
      Reader c = r.Enter(Tag::kMsgVerifyRequest);
      VerifyRequest v;
      v.t_A = c.GetInt();
      v.cert = Certificate::DecodeFrom(c);
      v.cert_m = Certificate::DecodeFrom(c);
      c.ExpectEnd();
      out = v;
      break;
    }
    case Tag::kMsgVerifyResponse:
      out = clog::VerifyResponse::DecodeFrom(r);
      break;
    case Tag::kMsgStatusRequest: {
      Reader c = r.Enter(Tag::kMsgStatusRequest);
      StatusRequest s;
      s.domain = c.GetString();
      s.t_A = c.GetInt();
      c.ExpectEnd();
      out = s;
      break;
    }
    case Tag::kMsgStatusResponse:
      out = clog::StatusResponse::DecodeFrom(r);
      break;
    case Tag::kMsgError: {
      Reader c = r.Enter(Tag::kMsgError);
      ErrorMessage e;
      e.code = static_cast<ErrorCode>(c.GetUint());
      e.text = c.GetString();
      c.ExpectEnd();
      out = e;
      break;
    }
    case Tag::kMsgForward: {
      Reader c = r.Enter(Tag::kMsgForward);
      Forward f;
      f.to = c.GetString();
      f.inner = c.GetBytes();
      c.ExpectEnd();
      out = f;
      break;
    }
    default:
      throw DecodeError("unknown message tag");
  }
  r.ExpectEnd();
  return out;
}

std::string MessageName(const Message& m) {
  static const char* kNames[] = {"mapping-request", "mapping-response", "extension-request", "extension-response",
                                 "add-request",     "revoke-request",   "register-response", "verify-request",
                                 "verify-response", "status-request",   "status-response",   "error",
                                 "forward"};
  return kNames[m.index()];
}

}  // namespace dtki::msg
