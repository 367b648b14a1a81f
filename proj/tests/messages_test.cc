#include "dtki/messages.h"

#include <gtest/gtest.h>

#include "dtki/encoding.h"
#include "dtki/world.h"
#include "fixtures.h"

namespace dtki::msg {
namespace {

Bytes RoundTrip(const Message& m) { return EncodeMessage(DecodeMessage(EncodeMessage(m))); }

TEST(MessagesTest, SimpleMessagesRoundTrip) {
  const std::vector<Message> all = {
      MappingRequest{"example.com"},
      ExtensionRequest{Hash(std::string("x")), 3, 9},
      ExtensionResponse{{3, 9, {Hash(std::string("a")), Hash(std::string("b"))}}},
      StatusRequest{"example.com", 1234},
      ErrorMessage{ErrorCode::kRevokeOrder, "late"},
      Forward{"clm-a", Bytes{1, 2, 3}},
  };
  for (const Message& m : all) {
    EXPECT_EQ(RoundTrip(m), EncodeMessage(m)) << MessageName(m);
  }
}

TEST(MessagesTest, VariantIndexSurvives) {
  Message m = StatusRequest{"a.com", 7};
  Message back = DecodeMessage(EncodeMessage(m));
  ASSERT_TRUE(std::holds_alternative<StatusRequest>(back));
  EXPECT_EQ(std::get<StatusRequest>(back).domain, "a.com");
  EXPECT_EQ(std::get<StatusRequest>(back).t_A, 7);
}

TEST(MessagesTest, GarbageIsDecodeError) {
  EXPECT_THROW(DecodeMessage(Bytes{}), DecodeError);
  EXPECT_THROW(DecodeMessage(Bytes{0xff, 0, 0, 0, 0}), DecodeError);
  Bytes ok = EncodeMessage(MappingRequest{"example.com"});
  ok.pop_back();
  EXPECT_THROW(DecodeMessage(ok), DecodeError);
  Bytes trailing = EncodeMessage(MappingRequest{"example.com"});
  trailing.push_back(0);
  EXPECT_THROW(DecodeMessage(trailing), DecodeError);
}

// Everything that crossed the bus in a full run decodes and re-encodes to the
// same bytes.
TEST(MessagesTest, TranscriptRoundTrips) {
  sim::World w(3);
  w.AddClm("clm-a");
  w.AddMirror("m1");
  w.Map("[a-h].*\\.com", "clm-a");
  w.Commit();
  w.AddOwner("bob", "example.com", "m1");
  w.AddBrowser("alice", "m1");
  w.AdvanceTo(w.now() + 10);
  ASSERT_TRUE(w.PublishMaster("bob").ok());
  ASSERT_TRUE(w.PublishTls("bob", "www").ok());
  ASSERT_TRUE(w.Verify("alice", "bob/www").ok());
  ASSERT_TRUE(w.Verify("alice", "bob/www", "bob").ok());
  ASSERT_TRUE(w.CheckMaster("bob").ok());
  w.AdvanceTo(w.now() + 1);
  ASSERT_TRUE(w.RevokeTls("bob", "www").ok());
  EXPECT_FALSE(w.Verify("alice", "bob/www").ok());

  std::set<std::string> seen;
  for (const TranscriptLine& l : w.bus().transcript()) {
    Message m = DecodeMessage(l.payload);
    seen.insert(MessageName(m));
    EXPECT_EQ(EncodeMessage(m), l.payload) << l.seq;
  }
  EXPECT_GE(seen.size(), 10u);
}

}  // namespace
}  // namespace dtki::msg
