#include "dtki/scenario.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "dtki/audit.h"
#include "dtki/rgx.h"
#include "dtki/world.h"

namespace dtki::scenario {

namespace {

struct Shape {
  std::size_t min_args;
  std::size_t max_args;
  std::set<std::string> required;
  std::set<std::string> optional;
};

const std::map<std::string, Shape>& Shapes() {
  static const std::map<std::string, Shape> kShapes = {
      {"ca", {1, 1, {}, {}}},
      {"clm", {1, 1, {}, {}}},
      {"mirror", {1, 1, {}, {}}},
      {"owner", {1, 1, {"domain", "mirror"}, {}}},
      {"browser", {1, 1, {"mirror"}, {}}},
      {"map", {2, 2, {}, {}}},
      {"unmap", {1, 1, {}, {}}},
      {"move", {2, 2, {}, {}}},
      {"blacklist", {1, 1, {"successor"}, {}}},
      {"commit", {0, 0, {}, {}}},
      {"publish", {2, 3, {}, {}}},
      {"revoke", {2, 3, {}, {}}},
      {"verify", {2, 2, {}, {"via"}}},
      {"absence", {2, 2, {}, {}}},
      {"check-master", {1, 1, {}, {}}},
      {"on-blacklist", {1, 1, {}, {}}},
      {"gossip", {3, 3, {}, {}}},
      {"audit", {0, 0, {}, {}}},
      {"sample", {0, 0, {"m", "seed"}, {}}},
      {"oracle", {0, 0, {}, {}}},
      {"adversary", {1, 1, {}, {"domain", "as", "clm", "victims", "mirror"}}},
  };
  return kShapes;
}

const std::map<std::string, std::set<std::string>>& Directives() {
  static const std::map<std::string, std::set<std::string>> kDirectives = {
      {"fake-cert-no-log", {"domain", "as"}},
      {"fake-cert-in-log", {"clm", "domain", "as"}},
      {"fork-log", {"clm", "victims"}},
      {"skip-sync", {"clm"}},
      {"stale-timestamp", {"mirror"}},
      {"swap-master-on-blacklist", {"clm"}},
  };
  return kDirectives;
}

std::int64_t ParseInt(int line, const std::string& s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ScenarioError(line, "not an integer: " + s);
  return v;
}

std::vector<std::string> SplitComma(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Names declared so far, for reference checks at parse time.
struct Names {
  std::set<std::string> clms, mirrors, owners, browsers, creds, cas{"ca"};

  void Need(int line, const std::set<std::string>& set, const std::string& what, const std::string& name) const {
    if (!set.count(name)) throw ScenarioError(line, "unknown " + what + " " + name);
  }
  void Fresh(int line, const std::string& name) const {
    if (clms.count(name) || mirrors.count(name) || owners.count(name) || browsers.count(name)) {
      throw ScenarioError(line, "name already in use: " + name);
    }
  }
};

void Check(const Command& c, Names& n) {
  auto it = Shapes().find(c.verb);
  if (it == Shapes().end()) throw ScenarioError(c.line, "unknown command " + c.verb);
  const Shape& shape = it->second;
  if (c.args.size() < shape.min_args || c.args.size() > shape.max_args) {
    throw ScenarioError(c.line, c.verb + ": wrong number of arguments");
  }
  for (const std::string& key : shape.required) {
    if (!c.options.count(key)) throw ScenarioError(c.line, c.verb + ": missing " + key + "=");
  }
  for (const auto& [key, value] : c.options) {
    if (key != "expect" && !shape.required.count(key) && !shape.optional.count(key)) {
      throw ScenarioError(c.line, c.verb + ": unexpected option " + key);
    }
  }
  auto rgx = [&](const std::string& r) {
    if (!Rgx::IsValid(r)) throw ScenarioError(c.line, "bad rgx " + r);
  };
  auto cert_kind = [&]() {
    const std::string& kind = c.args[1];
    if (kind == "master" && c.args.size() == 2) return;
    if (kind == "tls" && c.args.size() == 3) return;
    throw ScenarioError(c.line, c.verb + " takes 'master' or 'tls <label>'");
  };
  const std::string& v = c.verb;
  if (v == "ca") {
    if (n.cas.count(c.args[0])) throw ScenarioError(c.line, "duplicate CA " + c.args[0]);
    n.cas.insert(c.args[0]);
  } else if (v == "clm") {
    n.Fresh(c.line, c.args[0]);
    n.clms.insert(c.args[0]);
  } else if (v == "mirror") {
    n.Fresh(c.line, c.args[0]);
    n.mirrors.insert(c.args[0]);
  } else if (v == "owner") {
    n.Fresh(c.line, c.args[0]);
    n.Need(c.line, n.mirrors, "mirror", c.options.at("mirror"));
    n.owners.insert(c.args[0]);
  } else if (v == "browser") {
    n.Fresh(c.line, c.args[0]);
    n.Need(c.line, n.mirrors, "mirror", c.options.at("mirror"));
    n.browsers.insert(c.args[0]);
  } else if (v == "map" || v == "move") {
    rgx(c.args[0]);
    n.Need(c.line, n.clms, "CLM", c.args[1]);
  } else if (v == "unmap") {
    rgx(c.args[0]);
  } else if (v == "blacklist") {
    n.Need(c.line, n.clms, "CLM", c.args[0]);
    n.Need(c.line, n.clms, "CLM", c.options.at("successor"));
  } else if (v == "publish" || v == "revoke") {
    n.Need(c.line, n.owners, "owner", c.args[0]);
    cert_kind();
    if (c.args.size() == 3) n.creds.insert(c.args[0] + "/" + c.args[2]);
  } else if (v == "verify") {
    n.Need(c.line, n.browsers, "browser", c.args[0]);
    n.Need(c.line, n.creds, "credential", c.args[1]);
    if (auto via = c.Option("via")) n.Need(c.line, n.owners, "owner", *via);
  } else if (v == "absence") {
    n.Need(c.line, n.browsers, "browser", c.args[0]);
  } else if (v == "check-master" || v == "on-blacklist") {
    n.Need(c.line, n.owners, "owner", c.args[0]);
  } else if (v == "gossip") {
    for (int i = 0; i < 2; ++i) {
      if (!n.owners.count(c.args[i]) && !n.browsers.count(c.args[i])) {
        throw ScenarioError(c.line, "unknown actor " + c.args[i]);
      }
    }
    if (c.args[2] != "mlm") n.Need(c.line, n.clms, "CLM", c.args[2]);
  } else if (v == "adversary") {
    auto d = Directives().find(c.args[0]);
    if (d == Directives().end()) throw ScenarioError(c.line, "unknown directive " + c.args[0]);
    for (const std::string& key : d->second) {
      if (!c.options.count(key)) throw ScenarioError(c.line, c.args[0] + ": missing " + key + "=");
    }
    for (const auto& [key, value] : c.options) {
      if (key != "expect" && !d->second.count(key)) throw ScenarioError(c.line, c.args[0] + ": unexpected " + key);
    }
    if (auto clm = c.Option("clm")) n.Need(c.line, n.clms, "CLM", *clm);
    if (auto mirror = c.Option("mirror")) n.Need(c.line, n.mirrors, "mirror", *mirror);
    if (auto as = c.Option("as")) {
      if (n.creds.count(*as) || as->find('/') != std::string::npos) {
        throw ScenarioError(c.line, "bad or duplicate credential name " + *as);
      }
      n.creds.insert(*as);
    }
    if (c.args[0] == "fork-log") {
      for (const std::string& victim : SplitComma(c.options.at("victims"))) {
        if (!n.owners.count(victim) && !n.browsers.count(victim)) {
          throw ScenarioError(c.line, "unknown victim " + victim);
        }
      }
      n.clms.insert(c.options.at("clm") + "#fork");
    }
  }
}

// What a command produced, in the vocabulary of expect=.
struct Observed {
  std::string name;
  std::string step;

  std::string Display() const { return step.empty() ? name : name + ":" + step; }
  bool Matches(const std::string& expect) const { return expect == name || expect == Display(); }
};

Observed FromOutcome(const actors::Outcome& o) {
  switch (o.kind) {
    case actors::OutcomeKind::kOk:
      return {o.detail.empty() ? "ok" : o.detail, ""};
    case actors::OutcomeKind::kReject:
      return {"reject", o.step};
    case actors::OutcomeKind::kAlarm:
      return {"alarm", o.step};
  }
  return {"?", ""};
}

Observed FromVerdicts(const std::vector<audit::AuditVerdict>& verdicts) {
  for (const audit::AuditVerdict& v : verdicts) {
    if (v.verdict == audit::Verdict::kFail) return {"fail", v.log + ":" + std::to_string(v.index)};
  }
  for (const audit::AuditVerdict& v : verdicts) {
    if (v.verdict == audit::Verdict::kInconclusive) return {"inconclusive", v.log + ":" + std::to_string(v.index)};
  }
  return {"pass", ""};
}

std::string Clean(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  return s;
}

std::string Describe(const Command& c) {
  std::string out = c.verb;
  for (const std::string& a : c.args) out += " " + a;
  for (const auto& [k, v] : c.options) {
    if (k != "expect") out += " " + k + "=" + v;
  }
  return out;
}

class Runner {
 public:
  Runner(const Scenario& sc, std::uint64_t seed)
      : world_(seed, sc.start ? sc.start : sim::World::kDefaultStart), t0_(world_.now()) {}

  Observed Execute(const Command& c, Result& result) {
    sim::World& w = world_;
    const std::string& v = c.verb;
    const auto& a = c.args;
    if (v == "ca") w.AddCa(a[0]);
    if (v == "clm") w.AddClm(a[0]);
    if (v == "mirror") w.AddMirror(a[0]);
    if (v == "owner") w.AddOwner(a[0], c.options.at("domain"), c.options.at("mirror"));
    if (v == "browser") w.AddBrowser(a[0], c.options.at("mirror"));
    if (v == "map") w.Map(a[0], a[1]);
    if (v == "unmap") w.Unmap(a[0]);
    if (v == "move") w.Move(a[0], a[1]);
    if (v == "blacklist") w.Blacklist(a[0], c.options.at("successor"));
    if (v == "commit") {
      w.Commit();
      for (auto& [owner, outcome] : w.TakeBlacklistChecks()) {
        result.actions.push_back(std::to_string(c.line) + "," + std::to_string(w.now() - t0_) +
                                 ",on-blacklist " + owner + "," + Clean(outcome.ToString()) + ",,");
        on_blacklist_[owner] = outcome;
      }
    }
    if (v == "publish") return FromOutcome(a[1] == "master" ? w.PublishMaster(a[0]) : w.PublishTls(a[0], a[2]));
    if (v == "revoke") return FromOutcome(a[1] == "master" ? w.RevokeMaster(a[0]) : w.RevokeTls(a[0], a[2]));
    if (v == "verify") return FromOutcome(w.Verify(a[0], a[1], c.Option("via")));
    if (v == "absence") return FromOutcome(w.CheckAbsence(a[0], a[1]));
    if (v == "check-master") return FromOutcome(w.CheckMaster(a[0]));
    if (v == "on-blacklist") {
      auto it = on_blacklist_.find(a[0]);
      return it == on_blacklist_.end() ? Observed{"none", ""} : FromOutcome(it->second);
    }
    if (v == "gossip") return Gossip(a[0], a[1], a[2]);
    if (v == "audit") return FromVerdicts(w.AuditAll());
    if (v == "sample") {
      const std::int64_t m = ParseInt(c.line, c.options.at("m"));
      if (m < 1) throw ScenarioError(c.line, "sample needs m >= 1");
      StateDir dir = w.Snapshot();
      audit::MlogView view(dir.mlog, dir.issuers);
      return FromVerdicts(audit::RandomCheck(static_cast<std::uint64_t>(ParseInt(c.line, c.options.at("seed"))), view,
                                             dir.clogs, static_cast<std::uint64_t>(m)));
    }
    if (v == "oracle") return {w.OracleConsistent() ? "consistent" : "violated", ""};
    if (v == "adversary") Adversary(c);
    return {"ok", ""};
  }

  sim::World& world() { return world_; }
  Time t0() const { return t0_; }

 private:
  const actors::DigestCache& CacheOf(const std::string& actor) {
    if (world_.HasOwner(actor)) return world_.owner(actor).cache();
    return world_.browser(actor).cache();
  }

  Observed Gossip(const std::string& x, const std::string& y, const std::string& log) {
    actors::CacheEntry ex = CacheOf(x).Get(log);
    actors::CacheEntry ey = CacheOf(y).Get(log);
    audit::ExtensionProver prover = [&](std::uint64_t old_size,
                                        std::uint64_t new_size) -> std::optional<chrono::ExtensionProof> {
      try {
        if (log == "mlm") return world_.mlm().published()->ProveExtension(old_size, new_size);
        return world_.clm(log).ProveExtension(old_size, new_size);
      } catch (const RejectError&) {
        return std::nullopt;
      }
    };
    audit::GossipResult r = audit::GossipCompare({ex.digest, ex.size}, {ey.digest, ey.size}, prover);
    return {r == audit::GossipResult::kFork ? "fork" : "consistent", ""};
  }

  void Adversary(const Command& c) {
    const std::string& d = c.args[0];
    auto opt = [&](const char* key) { return c.options.at(key); };
    if (d == "fake-cert-no-log") world_.FakeCertNoLog(opt("domain"), opt("as"));
    if (d == "fake-cert-in-log") world_.FakeCertInLog(opt("clm"), opt("domain"), opt("as"));
    if (d == "fork-log") world_.ForkLog(opt("clm"), SplitComma(opt("victims")));
    if (d == "skip-sync") world_.SkipSync(opt("clm"));
    if (d == "stale-timestamp") world_.StaleTimestamp(opt("mirror"));
    if (d == "swap-master-on-blacklist") world_.SwapMasterOnBlacklist(opt("clm"));
  }

  sim::World world_;
  Time t0_;
  std::map<std::string, actors::Outcome> on_blacklist_;
};

void WriteLines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const std::string& l : lines) out << l << '\n';
}

}  // namespace

std::optional<std::string> Command::Option(const std::string& key) const {
  auto it = options.find(key);
  if (it == options.end()) return std::nullopt;
  return it->second;
}

Scenario Parse(const std::string& text) {
  Scenario sc;
  Names names;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::int64_t last = 0;
  while (std::getline(in, raw)) {
    ++line;
    // '#' opens a comment only at the start of a word; fork copies are "<id>#fork"
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] == '#' && (k == 0 || std::isspace(static_cast<unsigned char>(raw[k - 1])))) {
        raw.resize(k);
        break;
      }
    }
    std::istringstream words(raw);
    std::vector<std::string> tokens;
    for (std::string t; words >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;

    Command c;
    c.line = line;
    std::size_t i = 0;
    if (tokens[0] == "at") {
      if (tokens.size() < 3) throw ScenarioError(line, "'at' needs a time and a command");
      c.at = ParseInt(line, tokens[1]);
      if (*c.at < last) throw ScenarioError(line, "time goes backwards");
      last = *c.at;
      i = 2;
    }
    c.verb = tokens[i++];
    for (; i < tokens.size(); ++i) {
      const std::string& t = tokens[i];
      const std::size_t eq = t.find('=');
      if (eq != std::string::npos && eq > 0) {
        if (!c.options.emplace(t.substr(0, eq), t.substr(eq + 1)).second) {
          throw ScenarioError(line, "repeated option " + t.substr(0, eq));
        }
      } else {
        c.args.push_back(t);
      }
    }
    if (c.verb == "start") {
      if (!sc.commands.empty() || c.at || c.args.size() != 1 || !c.options.empty()) {
        throw ScenarioError(line, "'start <t>' must come first");
      }
      sc.start = ParseInt(line, c.args[0]);
      continue;
    }
    Check(c, names);
    sc.commands.push_back(std::move(c));
  }
  return sc;
}

Scenario ParseFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

Result Run(const Scenario& sc, std::uint64_t seed, const std::optional<std::filesystem::path>& state_dir) {
  Runner runner(sc, seed);
  sim::World& w = runner.world();
  Result result;
  for (const Command& c : sc.commands) {
    Observed seen;
    try {
      if (c.at) w.AdvanceTo(runner.t0() + *c.at);
      seen = runner.Execute(c, result);
    } catch (const ScenarioError&) {
      throw;
    } catch (const std::exception& e) {
      throw ScenarioError(c.line, e.what());
    }
    const std::optional<std::string> expect = c.Option("expect");
    const bool held = !expect || seen.Matches(*expect);
    result.actions.push_back(std::to_string(c.line) + "," + std::to_string(w.now() - runner.t0()) + "," +
                             Clean(Describe(c)) + "," + Clean(seen.Display()) + "," + expect.value_or("") + "," +
                             (held ? "ok" : "FAILED"));
    if (!held) {
      result.ok = false;
      result.failures.push_back("line " + std::to_string(c.line) + ": " + Describe(c) + ": expected " + *expect +
                                ", got " + seen.Display());
    }
  }
  for (const TranscriptLine& l : w.bus().transcript()) result.transcript.push_back(l.ToLine());
  for (const audit::AuditVerdict& v : w.AuditAll()) result.audit.push_back(v.ToLine());
  result.oracle = w.OracleReport();
  result.oracle_consistent = w.OracleConsistent();
  if (state_dir) w.Snapshot().Save(*state_dir);
  return result;
}

void WriteOutputs(const Result& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  WriteLines(dir / "transcript.txt", result.transcript);
  WriteLines(dir / "actions.txt", result.actions);
  WriteLines(dir / "audit.txt", result.audit);
  std::vector<std::string> oracle = result.oracle;
  oracle.push_back(std::string("consistent=") + (result.oracle_consistent ? "yes" : "no"));
  WriteLines(dir / "oracle.txt", oracle);
}

}  // namespace dtki::scenario
