#include "dtki/encoding.h"

#include <limits>

namespace dtki {
namespace {

void PutBe(Bytes& out, std::uint64_t v, int width) {
  for (int i = width - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t GetBe(ByteView data, int width) {
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v = v << 8 | data[i];
  return v;
}

}  // namespace

std::size_t Writer::Open(Tag tag) {
  out_.push_back(static_cast<std::uint8_t>(tag));
  const std::size_t start = out_.size();
  PutBe(out_, 0, 4);
  return start;
}

void Writer::Close(std::size_t start) {
  const std::size_t length = out_.size() - start - 4;
  if (length > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("encoded value exceeds 4 GiB");
  }
  for (int i = 0; i < 4; ++i) {
    out_[start + i] = static_cast<std::uint8_t>(length >> (8 * (3 - i)));
  }
}

void Writer::PutFramed(Tag tag, ByteView payload) {
  const std::size_t start = Open(tag);
  out_.insert(out_.end(), payload.begin(), payload.end());
  Close(start);
}

void Writer::PutBytes(ByteView data) { PutFramed(Tag::kBytes, data); }

void Writer::PutString(std::string_view s) { PutFramed(Tag::kString, AsView(s)); }

void Writer::PutUint(std::uint64_t v) {
  Bytes payload;
  PutBe(payload, v, 8);
  PutFramed(Tag::kUint, payload);
}

void Writer::PutInt(std::int64_t v) {
  Bytes payload;
  PutBe(payload, static_cast<std::uint64_t>(v), 8);
  PutFramed(Tag::kInt, payload);
}

void Writer::PutBool(bool v) {
  const std::uint8_t b = v ? 1 : 0;
  PutFramed(Tag::kBool, ByteView(&b, 1));
}

void Writer::PutNone() { PutFramed(Tag::kNone, {}); }

void Writer::PutDigests(std::span<const Digest> digests) {
  const std::size_t start = Open(Tag::kBytes);
  for (const Digest& d : digests) out_.insert(out_.end(), d.bytes().begin(), d.bytes().end());
  Close(start);
}

ByteView Reader::Frame(Tag tag) {
  if (data_.size() - pos_ < kFrameSize) throw DecodeError("truncated frame header");
  const auto actual = static_cast<Tag>(data_[pos_]);
  if (actual != tag) {
    throw DecodeError("unexpected tag 0x" + HexEncode(ByteView(&data_[pos_], 1)) + ", wanted 0x" +
                      HexEncode(ByteView(reinterpret_cast<const std::uint8_t*>(&tag), 1)));
  }
  const std::uint64_t length = GetBe(data_.subspan(pos_ + 1, 4), 4);
  if (data_.size() - pos_ - kFrameSize < length) throw DecodeError("truncated payload");
  ByteView payload = data_.subspan(pos_ + kFrameSize, length);
  pos_ += kFrameSize + length;
  return payload;
}

Tag Reader::PeekTag() const {
  if (AtEnd()) throw DecodeError("unexpected end of input");
  return static_cast<Tag>(data_[pos_]);
}

void Reader::ExpectEnd() const {
  if (!AtEnd()) throw DecodeError("trailing bytes after value");
}

Bytes Reader::GetBytes() {
  ByteView p = Frame(Tag::kBytes);
  return Bytes(p.begin(), p.end());
}

std::string Reader::GetString() {
  ByteView p = Frame(Tag::kString);
  return std::string(p.begin(), p.end());
}

std::uint64_t Reader::GetUint() {
  ByteView p = Frame(Tag::kUint);
  if (p.size() != 8) throw DecodeError("uint payload must be 8 bytes");
  return GetBe(p, 8);
}

std::int64_t Reader::GetInt() {
  ByteView p = Frame(Tag::kInt);
  if (p.size() != 8) throw DecodeError("int payload must be 8 bytes");
  return static_cast<std::int64_t>(GetBe(p, 8));
}

bool Reader::GetBool() {
  ByteView p = Frame(Tag::kBool);
  if (p.size() != 1 || p[0] > 1) throw DecodeError("malformed bool");
  return p[0] == 1;
}

void Reader::GetNone() {
  if (!Frame(Tag::kNone).empty()) throw DecodeError("none carries no payload");
}

std::vector<Digest> Reader::GetDigests() {
  ByteView p = Frame(Tag::kBytes);
  if (p.size() % Digest::kSize != 0) throw DecodeError("digest list length not a multiple of 32");
  std::vector<Digest> out;
  out.reserve(p.size() / Digest::kSize);
  for (std::size_t i = 0; i < p.size(); i += Digest::kSize) {
    out.push_back(Digest::FromBytes(p.subspan(i, Digest::kSize)));
  }
  return out;
}

Reader Reader::Enter(Tag tag) { return Reader(Frame(tag)); }

}  // namespace dtki
