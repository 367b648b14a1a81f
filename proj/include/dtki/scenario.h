#ifndef DTKI_SCENARIO_H_
#define DTKI_SCENARIO_H_

// Line-oriented scenario scripts. One command per line; a word starting with
// '#' starts a comment.
// A line may start with "at <t>" (seconds after the start time, never
// decreasing); other lines run at the current time. Positional arguments come
// first, then key=value options.
//
//   start <unix-seconds>
//   ca <name> | clm <id> | mirror <name>
//   owner <name> domain=<domain> mirror=<mirror>
//   browser <name> mirror=<mirror>
//   map <rgx> <clm> | unmap <rgx> | move <rgx> <clm>
//   blacklist <clm> successor=<clm>
//   commit
//   publish <owner> master | publish <owner> tls <label>
//   revoke <owner> master | revoke <owner> tls <label>
//   verify <browser> <credential> [via=<owner>]
//   absence <browser> <domain>
//   check-master <owner>
//   on-blacklist <owner>        outcome of the owner's last blacklist check
//   gossip <actor> <actor> <log>
//   audit                       full sweep of every log
//   sample m=<m> seed=<s>       random check
//   oracle                      every accepted key authentic and active?
//   adversary <directive> ...   fake-cert-no-log domain= as=
//                               fake-cert-in-log clm= domain= as=
//                               fork-log clm= victims=<a,b,...>
//                               skip-sync clm= | stale-timestamp mirror=
//                               swap-master-on-blacklist clm=
//
// Any command may carry expect=<value>. Outcomes read "ok", "accept",
// "absent", "present", "reject", "alarm", or "<kind>:<step>" for a specific
// failed step. audit/sample expect pass|fail (fail may name the first failing
// "log:index"); gossip expects consistent|fork; oracle expects
// consistent|violated.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dtki::scenario {

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Command {
  int line = 0;
  std::optional<std::int64_t> at;
  std::string verb;
  std::vector<std::string> args;
  std::map<std::string, std::string> options;

  std::optional<std::string> Option(const std::string& key) const;
};

struct Scenario {
  std::int64_t start = 0;  // 0: the default start time
  std::vector<Command> commands;
};

// Throws ScenarioError for syntax errors, unknown commands, bad arity,
// decreasing times and references to undeclared names.
Scenario Parse(const std::string& text);
Scenario ParseFile(const std::filesystem::path& path);

struct Result {
  bool ok = true;  // every expectation held
  std::vector<std::string> actions;     // "line,t,command,outcome,expect,status"
  std::vector<std::string> failures;    // human-readable failed expectations
  std::vector<std::string> transcript;  // bus transcript lines
  std::vector<std::string> audit;       // final full sweep, "log,index,verdict,check"
  std::vector<std::string> oracle;      // acceptances with oracle status
  bool oracle_consistent = true;
};

// Runs a parsed scenario. Runtime errors (a refused mapping change, an
// unknown credential) throw ScenarioError naming the line.
Result Run(const Scenario& scenario, std::uint64_t seed, const std::optional<std::filesystem::path>& state_dir = {});

// Writes transcript.txt, actions.txt, audit.txt and oracle.txt into dir.
void WriteOutputs(const Result& result, const std::filesystem::path& dir);

}  // namespace dtki::scenario

#endif  // DTKI_SCENARIO_H_
