#include "dtki/scenario.h"

#include <gtest/gtest.h>

namespace dtki::scenario {
namespace {

const std::filesystem::path kDir = DTKI_SCENARIO_DIR;

int ErrorLine(const std::string& text) {
  try {
    Parse(text);
  } catch (const ScenarioError& e) {
    return e.line();
  }
  return 0;
}

TEST(ScenarioParseTest, Grammar) {
  const Scenario s = Parse(
      "start 2000000000\n"
      "# comment\n"
      "clm clm-a   # trailing\n"
      "mirror m1\n"
      "map [a-h].*\\.com clm-a\n"
      "at 5 commit\n"
      "owner bob domain=example.com mirror=m1\n"
      "at 7 publish bob tls www expect=reject:clm-refused\n");
  EXPECT_EQ(s.start, 2000000000);
  ASSERT_EQ(s.commands.size(), 6u);
  EXPECT_EQ(s.commands[0].line, 3);
  EXPECT_EQ(s.commands[3].at, 5);
  EXPECT_EQ(s.commands[5].args, (std::vector<std::string>{"bob", "tls", "www"}));
  EXPECT_EQ(s.commands[5].Option("expect"), "reject:clm-refused");
  EXPECT_FALSE(s.commands[5].Option("via"));
}

TEST(ScenarioParseTest, Errors) {
  EXPECT_EQ(ErrorLine("clm a\nfrobnicate\n"), 2);
  EXPECT_EQ(ErrorLine("clm a\nmap [a-h].*\\.com b\n"), 2);           // undeclared CLM
  EXPECT_EQ(ErrorLine("map (x clm\n"), 1);                             // unresolved before bad rgx
  EXPECT_EQ(ErrorLine("at 5 commit\nat 4 commit\n"), 2);               // time goes backwards
  EXPECT_EQ(ErrorLine("mirror m\nowner bob mirror=m\n"), 2);           // missing domain=
  EXPECT_EQ(ErrorLine("clm a\nclm a\n"), 2);
  EXPECT_EQ(ErrorLine("commit\nstart 5\n"), 2);
  EXPECT_EQ(ErrorLine("mirror m\nbrowser b mirror=m\nverify b bob/www\n"), 3);
  EXPECT_EQ(ErrorLine("adversary teleport clm=a\n"), 1);
  EXPECT_EQ(ErrorLine("clm a\nadversary skip-sync\n"), 2);
  EXPECT_EQ(ErrorLine("at x commit\n"), 1);
  EXPECT_EQ(ErrorLine("commit foo\n"), 1);
  EXPECT_EQ(ErrorLine("audit audit=1\n"), 1);
}

TEST(ScenarioRunTest, RuntimeErrorNamesLine) {
  const Scenario s = Parse("clm a\nmap [a-h].*\\.com a\nmap [a-h].*\\.com a\ncommit\n");
  try {
    scenario::Run(s, 1);
    FAIL();
  } catch (const ScenarioError& e) {
    EXPECT_GE(e.line(), 3);
  }
}

TEST(ScenarioRunTest, FailedExpectationIsReported) {
  const Scenario s = Parse(
      "clm a\nmirror m\nmap [a-h].*\\.com a\ncommit\nowner bob domain=example.com mirror=m\n"
      "at 1 publish bob master expect=reject\n");
  const Result r = scenario::Run(s, 1);
  EXPECT_FALSE(r.ok);
  ASSERT_EQ(r.failures.size(), 1u);
  EXPECT_NE(r.failures[0].find("line 6"), std::string::npos);
}

class BundledScenarioTest : public ::testing::TestWithParam<const char*> {};

TEST_P(BundledScenarioTest, ExpectationsHold) {
  const Result r = scenario::Run(ParseFile(kDir / GetParam()), 7);
  for (const auto& f : r.failures) ADD_FAILURE() << f;
  EXPECT_TRUE(r.ok);
}

INSTANTIATE_TEST_SUITE_P(All, BundledScenarioTest,
                         ::testing::Values("honest.scn", "fake_no_log.scn", "fake_in_log.scn", "fork.scn",
                                           "revoke.scn", "blacklist.scn", "stale.scn", "skip_sync.scn"));

TEST(ScenarioRunTest, BitReproducible) {
  const Scenario s = ParseFile(kDir / "honest.scn");
  const Result a = scenario::Run(s, 42);
  const Result b = scenario::Run(s, 42);
  const Result c = scenario::Run(s, 43);
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.actions, b.actions);
  EXPECT_EQ(a.audit, b.audit);
  EXPECT_EQ(a.oracle, b.oracle);
  EXPECT_NE(a.transcript, c.transcript);
  EXPECT_EQ(a.actions, c.actions);  // outcomes do not depend on key material

  const auto dir = std::filesystem::temp_directory_path() / "dtki_scenario_out";
  std::filesystem::remove_all(dir);
  WriteOutputs(a, dir);
  for (const char* f : {"transcript.txt", "actions.txt", "audit.txt", "oracle.txt"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  std::filesystem::remove_all(dir);
}

TEST(ScenarioRunTest, HonestOracleReport) {
  const Result r = scenario::Run(ParseFile(kDir / "honest.scn"), 7);
  EXPECT_TRUE(r.oracle_consistent);
  ASSERT_FALSE(r.oracle.empty());
  for (const auto& line : r.oracle) EXPECT_NE(line.find("authentic-active"), std::string::npos) << line;
  for (const auto& line : r.audit) EXPECT_NE(line.find(",pass,"), std::string::npos) << line;
}

}  // namespace
}  // namespace dtki::scenario
