#include "dtki/transport.h"

#include <gtest/gtest.h>

#include <sstream>

#include "dtki/errors.h"

namespace dtki {
namespace {

Bus::Handler Echo(const std::string& tag) {
  return [tag](const std::string& sender, ByteView req) {
    Bytes out(req.begin(), req.end());
    for (char c : tag + sender) out.push_back(static_cast<std::uint8_t>(c));
    return out;
  };
}

TEST(BusTest, SessionsNumberFromOne) {
  Bus bus;
  EXPECT_EQ(bus.BeginSession("a"), 1u);
  EXPECT_EQ(bus.BeginSession("b"), 2u);
  EXPECT_EQ(bus.SessionProtocol(2), "b");
}

TEST(BusTest, RecordsBothDirections) {
  Bus bus;
  bus.Register("srv", Echo("!"));
  const auto s = bus.BeginSession("p");
  Bytes resp = bus.Call(s, "cli", "srv", Bytes{7});
  EXPECT_EQ(resp, (Bytes{7, '!', 'c', 'l', 'i'}));
  ASSERT_EQ(bus.transcript().size(), 2u);
  EXPECT_TRUE(bus.transcript()[0].request);
  EXPECT_FALSE(bus.transcript()[1].request);
  EXPECT_EQ(bus.transcript()[1].sender, "srv");
  EXPECT_EQ(bus.transcript()[0].ToLine(), "0 1 -> cli srv 1 07");
  EXPECT_EQ(bus.SessionBytes(s), 6u);
}

TEST(BusTest, UnknownEndpoint) {
  Bus bus;
  const auto s = bus.BeginSession("p");
  try {
    bus.Call(s, "cli", "nobody", Bytes{});
    FAIL();
  } catch (const RejectError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownEndpoint);
  }
}

TEST(BusTest, RouteOnlyAffectsThatClient) {
  Bus bus;
  bus.Register("real", Echo("r"));
  bus.Register("fake", Echo("f"));
  bus.Route("victim", "real", "fake");
  const auto s = bus.BeginSession("p");
  EXPECT_EQ(bus.Call(s, "victim", "real", Bytes{})[0], 'f');
  EXPECT_EQ(bus.Call(s, "other", "real", Bytes{})[0], 'r');
}

TEST(BusTest, RelayStaysInCallerSession) {
  Bus bus;
  bus.Register("clm", Echo(""));
  bus.Register("relay", [&bus](const std::string&, ByteView req) {
    return bus.Call(bus.current_session(), "relay", "clm", Bytes(req.begin(), req.end()));
  });
  bus.BeginSession("x");
  const auto s = bus.BeginSession("y");
  bus.Call(s, "cli", "relay", Bytes{1});
  EXPECT_EQ(bus.current_session(), 0u);
  ASSERT_EQ(bus.transcript().size(), 4u);
  for (const auto& l : bus.transcript()) EXPECT_EQ(l.session, s);
  std::ostringstream out;
  bus.WriteTranscript(out);
  const std::string text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

}  // namespace
}  // namespace dtki
