#include "dtki/size_model.h"

#include <gtest/gtest.h>

#include <map>

#include "dtki/encoding.h"
#include "dtki/world.h"

namespace dtki::size {
namespace {

TEST(SizeModelTest, Levels) {
  EXPECT_EQ(Levels(0), 0u);
  EXPECT_EQ(Levels(1), 0u);
  EXPECT_EQ(Levels(2), 1u);
  EXPECT_EQ(Levels(3), 2u);
  EXPECT_EQ(Levels(1024), 10u);
  EXPECT_EQ(Levels(1025), 11u);
  EXPECT_EQ(Levels(100'000'000), 27u);
}

// With every structure of size 1 there are no path digests, so each total is
// a plain sum of framed fields.
TEST(SizeModelTest, UnitStructuresGiveFixedFieldSums) {
  Params p;
  const Estimate e = EstimateSizes(p);
  const std::uint64_t F = 5, dig = F + 32, num = F + 8, sig = F + 64;
  const std::uint64_t head = F + num + dig + num + sig;
  const std::uint64_t chrono = F + 2 * num + F;
  const std::uint64_t ods = 4 * F + 2 * dig;
  const std::uint64_t ext = (F + dig + 2 * num) + (F + F + 2 * num + F);
  const std::uint64_t record = F + F + num + 4 * dig;
  EXPECT_EQ(e.mapping, (F + F + 20) + (F + record + chrono + F + 20 + (F + 300 + head) + 2 * ods + head) + ext);
  const std::uint64_t action = F + 300 + 2 * num + sig;
  const std::uint64_t reg = F + F + 20 + 4 * dig + 2 * num + chrono + 3 * ods;
  EXPECT_EQ(e.publish, (F + action) + (F + dig + num + reg + sig) + ext);
  EXPECT_EQ(e.revoke, e.publish);
  const std::uint64_t vmsg = F + 2 * dig + F + 20 + 3 * dig + 3 * num + chrono + 3 * ods;
  EXPECT_EQ(e.verify, (F + num + 600) + (F + dig + num + vmsg + sig) + ext);

  p.extension = false;
  EXPECT_EQ(EstimateSizes(p).verify, e.verify - ext);
}

// Crossing a power of two adds one level: digest bytes per chronological
// proof and ods_level_digests * digest per ordered-map proof.
TEST(SizeModelTest, DoublingAddsOneLevelPerProof) {
  struct Case {
    std::uint64_t Params::*field;
    std::uint64_t mapping, publish, verify;  // affected proofs per protocol
    bool chrono;
  };
  const Case cases[] = {
      {&Params::clog, 0, 2, 2, true},       // P1 + extension
      {&Params::mlog, 2, 0, 0, true},
      {&Params::clm_count, 1, 0, 0, false},
      {&Params::rgx_count, 1, 0, 0, false},
      {&Params::dg_rgx, 0, 1, 1, false},
      {&Params::dg_id, 0, 1, 1, false},
      {&Params::dg_a, 0, 1, 1, false},
  };
  for (std::uint64_t per_level : {1u, 2u}) {
    for (const Case& c : cases) {
      for (std::uint64_t n : {1u, 2u, 64u, 1000u}) {
        Params small = Params::Paper();
        small.ods_level_digests = per_level;
        small.*c.field = n;
        Params big = small;
        big.*c.field = 2 * n;
        const Estimate a = EstimateSizes(small), b = EstimateSizes(big);
        const std::uint64_t step = c.chrono ? 32 : 32 * per_level;
        EXPECT_EQ(b.mapping - a.mapping, c.mapping * step);
        EXPECT_EQ(b.publish - a.publish, c.publish * step);
        EXPECT_EQ(b.verify - a.verify, c.verify * step);
      }
    }
  }
}

TEST(SizeModelTest, PaperPresetIsPinned) {
  const Estimate e = EstimateSizes(Params::Paper());
  EXPECT_EQ(e.mapping, 4683u);
  EXPECT_EQ(e.publish, 6108u);
  EXPECT_EQ(e.verify, 7415u);
  EXPECT_EQ(e.revoke, 6300u);
}

TEST(SizeModelTest, SetRejectsBadInput) {
  Params p;
  p.Set("clog", "1024");
  EXPECT_EQ(p.clog, 1024u);
  EXPECT_THROW(p.Set("clog", "0"), std::invalid_argument);
  EXPECT_THROW(p.Set("clog", "-3"), std::invalid_argument);
  EXPECT_THROW(p.Set("clog", "12x"), std::invalid_argument);
  EXPECT_THROW(p.Set("nope", "1"), std::invalid_argument);
  EXPECT_THROW(p.Set("extension", "2"), std::invalid_argument);
}

// The model against real transcripts of a desk-scale world, summed over every
// owner so that treap depths and chronological paths average out. The model
// charges ceil(log2 n) digests per proof, which overstates the path of the
// newest record and of small treaps, so it runs a few percent high.
class DeskScaleTest : public ::testing::Test {
 protected:
  static constexpr int kOwners = 16;

  static std::string Name(int i) { return "o" + std::to_string(i); }

  Params Measured(int i) {
    Params p;
    p.cert = Encode(w_.FindCredential(Name(i) + "/www")->second.cert()).size();
    p.rgx = std::string("[a-h].*\\.com").size();
    p.id = w_.owner(Name(i)).domain().size();
    p.clog = w_.clm("clm-a").size();
    p.mlog = w_.mlm().size();
    p.rgx_count = 2;
    p.clm_count = 2;
    p.dg_id = kOwners;
    return p;
  }

  // Adds the newest session of `protocol` and its estimate to the running sums.
  void Tally(const std::string& protocol, Params p) {
    std::uint64_t session = 0;
    for (const auto& l : w_.bus().transcript()) {
      if (w_.bus().SessionProtocol(l.session) == protocol) session = l.session;
    }
    int messages = 0;
    for (const auto& l : w_.bus().transcript()) messages += l.session == session;
    p.extension = messages == 4;
    const Estimate e = EstimateSizes(p);
    const std::uint64_t est = protocol == "mapping"   ? e.mapping
                              : protocol == "publish" ? e.publish
                              : protocol == "verify"  ? e.verify
                                                      : e.revoke;
    totals_[protocol].first += est;
    totals_[protocol].second += w_.bus().SessionBytes(session);
  }

  double Ratio(const std::string& protocol) {
    const auto [est, actual] = totals_.at(protocol);
    return static_cast<double>(est) / static_cast<double>(actual);
  }

  sim::World w_{9};
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> totals_;
};

TEST_F(DeskScaleTest, TotalsAgreeWithTranscripts) {
  w_.AddClm("clm-a");
  w_.AddClm("clm-b");
  w_.AddMirror("m1");
  w_.Map("[a-h].*\\.com", "clm-a");
  w_.Map(".*\\.org", "clm-b");
  w_.Commit();
  w_.AddBrowser("alice", "m1");
  for (int i = 0; i < kOwners; ++i) w_.AddOwner(Name(i), "d" + std::to_string(i) + "x.com", "m1");
  w_.AdvanceTo(w_.now() + 10);
  for (int i = 0; i < kOwners; ++i) ASSERT_TRUE(w_.PublishMaster(Name(i)).ok());
  for (int i = 0; i < kOwners; ++i) {
    w_.AdvanceTo(w_.now() + 1);
    ASSERT_TRUE(w_.PublishTls(Name(i), "www").ok());
    Tally("publish", Measured(i));
  }
  w_.Commit();
  for (int i = 0; i < kOwners; ++i) {
    w_.AdvanceTo(w_.now() + 1);
    ASSERT_TRUE(w_.Verify("alice", Name(i) + "/www").ok());
    Tally("verify", Measured(i));
    Tally("mapping", Measured(i));
  }
  for (int i = 0; i < kOwners; ++i) {
    w_.AdvanceTo(w_.now() + 1);
    ASSERT_TRUE(w_.RevokeTls(Name(i), "www").ok());
    Tally("revoke", Measured(i));
  }
  for (const char* p : {"mapping", "publish", "verify"}) {
    EXPECT_GE(Ratio(p), 0.90) << p;
    EXPECT_LE(Ratio(p), 1.10) << p;
  }
  // revoke carries one more proof over the revocation map; looser bound
  EXPECT_GE(Ratio("revoke"), 0.85);
  EXPECT_LE(Ratio("revoke"), 1.15);
}

}  // namespace
}  // namespace dtki::size
