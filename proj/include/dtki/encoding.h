#ifndef DTKI_ENCODING_H_
#define DTKI_ENCODING_H_

// Canonical tag-length-value encoding shared by every protocol value.
//
// Each value is a 1-byte tag, a 4-byte big-endian payload length and the
// payload. Composite values concatenate their fields in declaration order
// inside a payload framed by the composite's own tag. Encodings are
// deterministic, and decoding rejects truncated input, unknown or unexpected
// tags, and trailing bytes.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dtki/bytes.h"
#include "dtki/crypto.h"

namespace dtki {

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Tag : std::uint8_t {
  // Scalars.
  kBytes = 0x01,
  kUint = 0x02,
  kString = 0x03,
  kList = 0x04,
  kBool = 0x05,
  kNone = 0x06,
  kInt = 0x07,

  // Chronological structure.
  kChronoPresence = 0x10,
  kChronoExtension = 0x11,

  // Ordered structure.
  kOdsPresence = 0x18,
  kOdsAbsence = 0x19,
  kOdsMutation = 0x1a,
  kOdsNull = 0x1b,
  kOdsStub = 0x1c,
  kOdsNode = 0x1d,

  // Certificates.
  kCertificate = 0x20,
  kCertAction = 0x21,
  kCertRevocation = 0x22,
  kLogHead = 0x23,
  kClmEntry = 0x24,

  // Mapping log.
  kMapAdd = 0x30,
  kMapDel = 0x31,
  kMapNew = 0x32,
  kMapMod = 0x33,
  kMapBl = 0x34,
  kMapEnd = 0x35,
  kMapRecord = 0x36,
  kMlogTimestamp = 0x37,
  kMlmWitness = 0x38,
  kMlogTimestampBody = 0x39,

  // Certificate log.
  kCertReg = 0x40,
  kCertRev = 0x41,
  kCertUpAdd = 0x42,
  kCertUpDel = 0x43,
  kCertRecordHeader = 0x44,
  kDomainHead = 0x45,
  kClmWitness = 0x46,
  kDomainExport = 0x47,
  kCertRecord = 0x48,

  // Wire messages.
  kMsgMappingRequest = 0x50,
  kMsgMappingResponse = 0x51,
  kMsgExtensionRequest = 0x52,
  kMsgExtensionResponse = 0x53,
  kMsgAddRequest = 0x54,
  kMsgRegisterResponse = 0x55,
  kMsgRevokeRequest = 0x56,
  kMsgVerifyRequest = 0x57,
  kMsgVerifyResponse = 0x58,
  kMsgStatusRequest = 0x59,
  kMsgStatusResponse = 0x5a,
  kMsgError = 0x5b,
  kMsgForward = 0x5c,
  kRegisterMessage = 0x5d,
  kVerifyMessage = 0x5e,
  kDomainStatus = 0x5f,
  kSignedPayload = 0x60,

  // Archives.
  kMlogArchive = 0x70,
  kClogArchive = 0x71,
  kMappingEvidence = 0x72,
  kIssuers = 0x73,
};

// Size of the tag plus length prefix.
inline constexpr std::size_t kFrameSize = 5;

class Writer {
 public:
  void PutBytes(ByteView data);
  void PutString(std::string_view s);
  void PutUint(std::uint64_t v);
  void PutInt(std::int64_t v);
  void PutBool(bool v);
  void PutNone();
  // A sequence of digests packed into one kBytes field.
  void PutDigests(std::span<const Digest> digests);

  template <typename Body>
  void PutComposite(Tag tag, Body&& body) {
    const std::size_t start = Open(tag);
    body(*this);
    Close(start);
  }

  template <typename T, typename Each>
  void PutList(const std::vector<T>& items, Each&& each) {
    PutComposite(Tag::kList, [&](Writer& w) {
      for (const auto& item : items) each(w, item);
    });
  }

  template <typename T>
  void PutList(const std::vector<T>& items) {
    PutList(items, [](Writer& w, const T& item) { item.EncodeTo(w); });
  }

  template <typename T>
  void PutOptional(const std::optional<T>& v) {
    if (v.has_value()) {
      v->EncodeTo(*this);
    } else {
      PutNone();
    }
  }

  const Bytes& bytes() const { return out_; }
  Bytes Take() { return std::move(out_); }

 private:
  std::size_t Open(Tag tag);
  void Close(std::size_t start);
  void PutFramed(Tag tag, ByteView payload);

  Bytes out_;
};

class Reader {
 public:
  explicit Reader(ByteView data) : data_(data) {}

  Bytes GetBytes();
  std::string GetString();
  std::uint64_t GetUint();
  std::int64_t GetInt();
  bool GetBool();
  void GetNone();
  std::vector<Digest> GetDigests();

  // Returns a reader over the composite payload and advances past it.
  Reader Enter(Tag tag);
  Tag PeekTag() const;
  bool AtEnd() const { return pos_ == data_.size(); }
  void ExpectEnd() const;

  template <typename T, typename Each>
  std::vector<T> GetList(Each&& each) {
    Reader list = Enter(Tag::kList);
    std::vector<T> out;
    while (!list.AtEnd()) out.push_back(each(list));
    return out;
  }

  template <typename T>
  std::vector<T> GetList() {
    return GetList<T>([](Reader& r) { return T::DecodeFrom(r); });
  }

  template <typename T>
  std::optional<T> GetOptional() {
    if (PeekTag() == Tag::kNone) {
      GetNone();
      return std::nullopt;
    }
    return T::DecodeFrom(*this);
  }

 private:
  ByteView Frame(Tag tag);

  ByteView data_;
  std::size_t pos_ = 0;
};

template <typename T>
Bytes Encode(const T& value) {
  Writer w;
  value.EncodeTo(w);
  return w.Take();
}

template <typename T>
T Decode(ByteView data) {
  Reader r(data);
  T value = T::DecodeFrom(r);
  r.ExpectEnd();
  return value;
}

}  // namespace dtki

#endif  // DTKI_ENCODING_H_
