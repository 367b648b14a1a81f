// Acceptance suite. One PASS/FAIL line per criterion with the measured value
// and the pinned bound. Exit status is 0 iff the set of failing criteria is
// exactly the set given with --known-failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dtki/audit.h"
#include "dtki/chronolog.h"
#include "dtki/encoding.h"
#include "dtki/ordlog.h"
#include "dtki/scenario.h"
#include "dtki/size_model.h"
#include "dtki/world.h"

namespace dtki {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Bytes Item(std::uint64_t i) {
  Writer w;
  w.PutUint(i);
  return w.Take();
}

// ---- 1: chronological proof sizes -------------------------------------------

Verdict ChronoProofSizes() {
  const auto start = Clock::now();
  Verdict v;
  std::size_t bad = 0;
  for (std::uint64_t n : {1024u, 1000u}) {
    chrono::ChronoLog log;
    for (std::uint64_t i = 0; i < n; ++i) log.Append(Item(i));
    for (std::uint64_t i = 0; i < n; ++i) {
      const chrono::PresenceProof p = log.ProvePresence(i);
      const bool size_ok = n == 1024 ? p.path.size() == 10 : p.path.size() <= 10;
      if (!size_ok || !chrono::VerifyPresence(log.digest(), log.item(i), p)) ++bad;
    }
  }
  chrono::ChronoLog log;
  for (std::uint64_t i = 0; i < 64; ++i) log.Append(Item(i));
  std::size_t pairs = 0;
  for (std::uint64_t n = 1; n <= 64; ++n) {
    const std::uint64_t bound = 2 * size::Levels(n);
    for (std::uint64_t m = 0; m <= n; ++m) {
      const chrono::ExtensionProof p = log.ProveExtension(m, n);
      ++pairs;
      if (p.nodes.size() > bound || !chrono::VerifyExtension(log.DigestAt(m), m, log.DigestAt(n), n, p)) ++bad;
    }
  }
  const double secs = Seconds(start);
  v.pass = bad == 0 && secs < 5.0;
  v.detail = Fmt("2024 presence + %.0f extension proofs, %.0f bad; %.2f s (bound 5 s)", pairs, bad, secs);
  return v;
}

// ---- 2: ordered-map property suite ------------------------------------------

Bytes Key(int k) { return ToBytes("key-" + std::to_string(k)); }

// One byte flipped somewhere in the encoding; nullopt if it no longer decodes.
template <typename P>
std::optional<P> Flip(const P& proof, std::mt19937_64& rng) {
  Bytes enc = Encode(proof);
  std::uniform_int_distribution<std::size_t> pos(0, enc.size() - 1);
  std::uniform_int_distribution<int> mask(1, 255);
  enc[pos(rng)] ^= static_cast<std::uint8_t>(mask(rng));
  try {
    return Decode<P>(enc);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

Verdict OrderedMapSuite() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t sequences = 0, mutations = 0, failures = 0, brute = 0, tampers = 0, false_accepts = 0;
  std::size_t same = 0;  // flips that decode back to the original proof
  for (; sequences < 1000; ++sequences) {
    const int universe = sequences % 4 == 0 ? 14 : 260;
    const int target = sequences % 4 == 0 ? 12 : 1 + static_cast<int>(rng() % 200);
    std::map<int, Bytes> oracle;
    ods::OrderedMap map;
    const int steps = 1 + static_cast<int>(rng() % 80);
    for (int s = 0; s < steps; ++s) {
      const int k = static_cast<int>(rng() % universe);
      const Bytes value = ToBytes("v" + std::to_string(rng() % 1000));
      const Digest before = map.digest();
      ods::Mutation m;
      bool ok = true;
      Bytes old;
      if (!oracle.count(k) && static_cast<int>(oracle.size()) < target) {
        m = map.Insert(Key(k), value);
        ok = ods::VerifyAdd(Key(k), value, before, m.map.digest(), m.proof);
        oracle[k] = value;
      } else if (oracle.count(k) && rng() % 2) {
        old = oracle[k];
        m = map.Delete(Key(k));
        ok = ods::VerifyDelete(Key(k), old, before, m.map.digest(), m.proof);
        oracle.erase(k);
      } else if (oracle.count(k)) {
        old = oracle[k];
        m = map.Modify(Key(k), value);
        ok = ods::VerifyModify(Key(k), old, value, before, m.map.digest(), m.proof);
        oracle[k] = value;
      } else {
        continue;
      }
      ++mutations;
      failures += !ok;
      // a mutation proof must not vouch for a different digest
      if (tampers < 12000 && ok) {
        ++tampers;
        auto bad = Flip(m.proof, rng);
        if (bad && *bad == m.proof) ++same;
        if (bad) {
          const Digest after = m.map.digest();
          bool accepted = false;
          switch (m.proof.kind) {
            case ods::MutationKind::kAdd:
              accepted = ods::VerifyAdd(Key(k), oracle[k], before, after, *bad) && !(*bad == m.proof);
              break;
            case ods::MutationKind::kDelete:
              accepted = ods::VerifyDelete(Key(k), old, before, after, *bad) && !(*bad == m.proof);
              break;
            case ods::MutationKind::kModify:
              accepted = ods::VerifyModify(Key(k), old, oracle[k], before, after, *bad) && !(*bad == m.proof);
              break;
          }
          false_accepts += accepted;
        }
      }
      map = m.map;
    }
    // history independence
    std::vector<ods::Entry> entries;
    for (const auto& [k, v] : oracle) entries.push_back({Key(k), v});
    std::shuffle(entries.begin(), entries.end(), rng);
    failures += map.digest() != ods::DigestOf(entries);
    failures += map.digest() != ods::OrderedMap::FromEntries(entries).digest();
    failures += !map.CheckInvariants();
    // presence and absence round trips with one-byte tampering
    for (int probe = 0; probe < 4; ++probe) {
      const int k = static_cast<int>(rng() % universe);
      if (oracle.count(k)) {
        const ods::PresenceProof p = map.ProvePresence(Key(k));
        failures += !ods::VerifyPresence(map.digest(), Key(k), oracle[k], p);
        ++tampers;
        auto bad = Flip(p, rng);
        same += bad && *bad == p;
        if (bad && !(*bad == p)) {
          false_accepts += ods::VerifyPresence(map.digest(), Key(k), oracle[k], *bad);
        }
      } else {
        const ods::AbsenceProof p = map.ProveAbsence(Key(k));
        failures += !ods::VerifyAbsence(map.digest(), Key(k), p);
        ++tampers;
        auto bad = Flip(p, rng);
        same += bad && *bad == p;
        if (bad && !(*bad == p)) {
          false_accepts += ods::VerifyAbsence(map.digest(), Key(k), *bad);
        }
      }
    }
    // brute-force membership over the whole key universe
    if (universe <= 14) {
      for (int k = 0; k < universe; ++k) {
        ++brute;
        const bool present = oracle.count(k) > 0;
        if (map.contains(Key(k)) != present) ++failures;
        if (present) {
          failures += !ods::VerifyPresence(map.digest(), Key(k), oracle[k], map.ProvePresence(Key(k)));
          failures += ods::VerifyPresence(map.digest(), Key(k), ToBytes("other"), map.ProvePresence(Key(k)));
        } else {
          failures += !ods::VerifyAbsence(map.digest(), Key(k), map.ProveAbsence(Key(k)));
        }
      }
    }
  }
  const double secs = Seconds(start);
  Verdict v;
  v.pass = sequences >= 1000 && failures == 0 && false_accepts == 0 && same == 0 && tampers >= 10000 && secs < 60.0;
  v.detail = Fmt("%.0f sequences, %.0f mutations, %.0f failures, ", sequences, mutations, failures) +
             Fmt("%.0f brute-force checks, %.0f/%.0f tampered proofs accepted (%.0f non-canonical); ", brute, false_accepts,
                 tampers, same) +
             Fmt("%.2f s (bound 60 s)", secs);
  return v;
}

// ---- 3-5: bundled scenarios -------------------------------------------------

scenario::Result RunBundled(const std::string& name) {
  return scenario::Run(scenario::ParseFile(std::filesystem::path(DTKI_SCENARIO_DIR) / name), 7);
}

std::size_t Count(const std::vector<std::string>& lines, const std::string& needle) {
  return std::count_if(lines.begin(), lines.end(),
                       [&](const std::string& l) { return l.find(needle) != std::string::npos; });
}

Verdict HonestEndToEnd() {
  const scenario::Result r = RunBundled("honest.scn");
  const std::size_t accepted = r.oracle.size();
  const std::size_t active = Count(r.oracle, ",authentic-active");
  const std::size_t audit_pass = Count(r.audit, ",pass,");
  Verdict v;
  v.pass = r.ok && accepted > 0 && active == accepted && r.oracle_consistent && audit_pass == r.audit.size();
  v.detail = std::string("expectations ") + (r.ok ? "held" : "failed") +
             Fmt("; %.0f acceptances, %.0f authentic-active; audit %.0f/%.0f records pass", accepted, active,
                 audit_pass, r.audit.size());
  return v;
}

Verdict FakeNoLog() {
  const scenario::Result r = RunBundled("fake_no_log.scn");
  const std::size_t rejected = Count(r.actions, "verify alice evil,reject:not-logged,");
  Verdict v;
  v.pass = r.ok && rejected == 1 && r.oracle_consistent;
  v.detail = std::string("expectations ") + (r.ok ? "held" : "failed") +
             Fmt("; fake credential rejected at the log proof %.0f time(s)", rejected);
  return v;
}

Verdict FakeInLog() {
  const scenario::Result r = RunBundled("fake_in_log.scn");
  const std::size_t owner_alarm = Count(r.actions, "check-master bob,alarm:master-mismatch,");
  const std::size_t audit_fail = Count(r.audit, ",fail,");
  Verdict v;
  v.pass = r.ok && owner_alarm == 1 && audit_fail >= 1;
  v.detail = std::string("expectations ") + (r.ok ? "held" : "failed") +
             Fmt("; owner lookup alarms %.0f, audit fail lines %.0f", owner_alarm, audit_fail);
  return v;
}

// ---- 6: fork detection -------------------------------------------------------

Verdict ForkDetection() {
  sim::World w(6);
  w.AddClm("clm-a");
  w.AddMirror("m1");
  w.Map("[a-h].*\\.com", "clm-a");
  w.Commit();
  w.AddBrowser("alice", "m1");
  for (int i = 0; i < 6; ++i) w.AddOwner("o" + std::to_string(i), "d" + std::to_string(i) + ".com", "m1");
  w.AdvanceTo(w.now() + 10);
  for (int i = 0; i < 3; ++i) {
    w.PublishMaster("o" + std::to_string(i));
    w.PublishTls("o" + std::to_string(i), "www");
  }
  const std::uint64_t j = w.clm("clm-a").size();
  w.ForkLog("clm-a", {"alice"});
  w.FakeCertInLog("clm-a#fork", "d0.com", "evil");
  w.FakeCertInLog("clm-a#fork", "d1.com", "evil2");
  w.AdvanceTo(w.now() + 10);
  for (int i = 3; i < 6; ++i) {
    w.PublishMaster("o" + std::to_string(i));
    w.PublishTls("o" + std::to_string(i), "www");
  }
  const chrono::ChronoLog honest = w.clm("clm-a").Archive(w.now()).Log();
  const chrono::ChronoLog fork = w.clm("clm-a#fork").Archive(w.now()).Log();

  // The adversary answers from whichever branch helps it; try both.
  auto prover = [](const chrono::ChronoLog& log) {
    return audit::ExtensionProver([&log](std::uint64_t a, std::uint64_t b) -> std::optional<chrono::ExtensionProof> {
      if (b > log.size()) return std::nullopt;
      return log.ProveExtension(a, b);
    });
  };
  std::size_t straddling = 0, detected = 0;
  for (std::uint64_t a = j + 1; a <= honest.size(); ++a) {
    for (std::uint64_t b = j + 1; b <= fork.size(); ++b) {
      ++straddling;
      const audit::LogPair x{honest.DigestAt(a), a}, y{fork.DigestAt(b), b};
      const bool fork_seen = audit::GossipCompare(x, y, prover(honest)) == audit::GossipResult::kFork &&
                             audit::GossipCompare(x, y, prover(fork)) == audit::GossipResult::kFork &&
                             audit::GossipCompare(y, x, prover(fork)) == audit::GossipResult::kFork;
      detected += fork_seen;
    }
  }
  std::mt19937_64 rng(66);
  std::size_t false_forks = 0;
  for (int i = 0; i < 100; ++i) {
    const std::uint64_t a = rng() % (honest.size() + 1), b = rng() % (honest.size() + 1);
    false_forks += audit::GossipCompare({honest.DigestAt(a), a}, {honest.DigestAt(b), b}, prover(honest)) ==
                   audit::GossipResult::kFork;
  }
  Verdict v;
  v.pass = straddling > 0 && detected == straddling && false_forks == 0;
  v.detail = Fmt("fork after index %.0f: %.0f/%.0f straddling pairs flagged; %.0f false forks in 100 honest pairs",
                 j, detected, straddling, false_forks);
  return v;
}

// ---- 7: random checking ------------------------------------------------------

Verdict RandomChecking() {
  const auto start = Clock::now();
  sim::World w(7);
  w.AddClm("clm-a");
  w.AddClm("clm-b");
  w.AddMirror("m1");
  w.Map("[a-h].*\\.com", "clm-a");
  w.Map(".*\\.org", "clm-b");
  w.Commit();
  for (int i = 0; i < 10; ++i) {
    w.AddOwner("o" + std::to_string(i), (i % 2 ? "d" : "x") + std::to_string(i) + (i % 2 ? ".com" : ".org"), "m1");
  }
  w.AdvanceTo(w.now() + 10);
  for (int i = 0; i < 10; ++i) w.PublishMaster("o" + std::to_string(i));
  auto total = [&] {
    StateDir s = w.Snapshot();
    std::size_t n = s.mlog.records.size();
    for (const auto& c : s.clogs) n += c.records.size();
    return n;
  };
  for (int label = 0; total() < 100; ++label) {
    w.AdvanceTo(w.now() + 1);
    w.PublishTls("o" + std::to_string(label % 10), "t" + std::to_string(label));
  }
  StateDir state = w.Snapshot();
  const std::size_t records = total();
  clog::ClogArchive& victim = state.clogs[0];
  victim.records[victim.records.size() / 2].dg_rgx = Hash(std::string("corrupt"));
  const audit::MlogView view(state.mlog, state.issuers);

  constexpr int kTrials = 200;
  constexpr std::uint64_t kM = 300;
  int detected = 0;
  for (int t = 0; t < kTrials; ++t) {
    for (const auto& v : audit::RandomCheck(1000 + t, view, state.clogs, kM)) {
      if (v.verdict == audit::Verdict::kFail) {
        ++detected;
        break;
      }
    }
  }
  const double rate = static_cast<double>(detected) / kTrials;
  const double analytic = 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(records), kM);
  const double secs = Seconds(start);
  Verdict v;
  v.pass = records == 100 && rate >= 0.90 && rate <= 1.0 && secs < 60.0;
  v.detail = Fmt("%.0f records, detection %.3f over 200 trials of m=300 (bound [0.90, 1.0], analytic %.3f); ",
                 records, rate, analytic) +
             Fmt("%.2f s (bound 60 s)", secs);
  return v;
}

// ---- 8: message sizes and verification time ---------------------------------

Verdict Sizes() {
  const size::Estimate e = size::EstimateSizes(size::Params::Paper());
  auto kb = [](std::uint64_t b) { return static_cast<double>(b) / 1024.0; };
  const bool publish = kb(e.publish) >= 2.0 && kb(e.publish) <= 6.0;
  const bool mapping = kb(e.mapping) >= 1.5 && kb(e.mapping) <= 4.5;
  const bool verify = kb(e.verify) >= 2.5 && kb(e.verify) <= 7.5;

  // Wall time of a full browser verification at desk scale, median of 51.
  sim::World w(8);
  w.AddClm("clm-a");
  w.AddMirror("m1");
  w.Map("[a-h].*\\.com", "clm-a");
  w.Commit();
  w.AddOwner("bob", "example.com", "m1");
  w.AddBrowser("alice", "m1");
  w.AdvanceTo(w.now() + 10);
  w.PublishMaster("bob");
  w.PublishTls("bob", "www");
  std::vector<double> ms;
  bool all_ok = true;
  for (int i = 0; i < 51; ++i) {
    const auto start = Clock::now();
    all_ok = all_ok && w.Verify("alice", "bob/www").ok();
    ms.push_back(Seconds(start) * 1000);
  }
  std::nth_element(ms.begin(), ms.begin() + 25, ms.end());
  const double median = ms[25];

  Verdict v;
  v.pass = publish && mapping && verify && all_ok && median < 10.0;
  v.detail = Fmt("publish %.2f KB [2, 6] ", kb(e.publish)) + (publish ? "ok" : "OUT") +
             Fmt("; mapping %.2f KB [1.5, 4.5] ", kb(e.mapping)) + (mapping ? "ok" : "OUT") +
             Fmt("; verify %.2f KB [2.5, 7.5] ", kb(e.verify)) + (verify ? "ok" : "OUT") +
             Fmt("; verification median %.3f ms (bound 10 ms)", median);
  return v;
}

// ---- 9: revocation ordering --------------------------------------------------

Verdict RevocationOrdering() {
  sim::World w(9);
  w.AddClm("clm-a");
  w.AddMirror("m1");
  w.Map("[a-h].*\\.com", "clm-a");
  w.Commit();
  w.AddOwner("bob", "example.com", "m1");
  for (int i = 0; i < 3; ++i) w.AddBrowser("b" + std::to_string(i), "m1");
  w.AdvanceTo(w.now() + 10);
  w.PublishMaster("bob");
  std::size_t before_ok = 0, before = 0, after_rejected = 0, after = 0;
  for (int c = 0; c < 4; ++c) {
    const std::string label = "c" + std::to_string(c);
    w.AdvanceTo(w.now() + 5);
    if (!w.PublishTls("bob", label).ok()) return {false, "publish failed"};
    for (int step = 0; step < 3; ++step) {
      w.AdvanceTo(w.now() + 7);
      for (int b = 0; b < 3; ++b) {
        ++before;
        before_ok += w.Verify("b" + std::to_string(b), "bob/" + label).ok();
      }
    }
    w.AdvanceTo(w.now() + 5);
    if (!w.RevokeTls("bob", label).ok()) return {false, "revoke failed"};
    for (int step = 0; step < 3; ++step) {
      if (step > 0) w.AdvanceTo(w.now() + 11);
      for (int b = 0; b < 3; ++b) {
        ++after;
        after_rejected += !w.Verify("b" + std::to_string(b), "bob/" + label).ok();
      }
    }
  }
  Verdict v;
  v.pass = before_ok == before && after_rejected == after && w.OracleConsistent();
  v.detail = Fmt("before revoke %.0f/%.0f accepted; after revoke %.0f/%.0f rejected", before_ok, before,
                 after_rejected, after);
  return v;
}

}  // namespace
}  // namespace dtki

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> known;
  app.add_option("--known-failures", known, "Criteria expected to fail")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<dtki::Verdict()>>> criteria = {
      {"chronological proof sizes", dtki::ChronoProofSizes},
      {"ordered-map property suite", dtki::OrderedMapSuite},
      {"honest end-to-end", dtki::HonestEndToEnd},
      {"fake certificate outside the log", dtki::FakeNoLog},
      {"fake certificate inside the log", dtki::FakeInLog},
      {"fork detection", dtki::ForkDetection},
      {"random checking", dtki::RandomChecking},
      {"message sizes and verification time", dtki::Sizes},
      {"revocation ordering", dtki::RevocationOrdering},
  };
  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    dtki::Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const int n = static_cast<int>(i) + 1;
    if (!v.pass) failed.insert(n);
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << n << " " << criteria[i].first << ": " << v.detail << std::endl;
  }
  const std::set<int> expected(known.begin(), known.end());
  if (failed != expected) {
    std::cout << "failing set differs from --known-failures" << std::endl;
    return 1;
  }
  return 0;
}
