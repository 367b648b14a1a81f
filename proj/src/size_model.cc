#include "dtki/size_model.h"

#include <charconv>
#include <stdexcept>

namespace dtki::size {

Params Params::Paper() {
  Params p;
  p.sig = 256;
  p.cert = 1536;
  p.clog = 100'000'000;
  p.mlog = 1000;
  p.rgx_count = 1000;
  p.clm_count = 1000;
  p.dg_rgx = 10;
  p.dg_id = 100'000;
  p.dg_a = 10;
  p.dg_rv = 100;
  return p;
}

namespace {

struct Field {
  const char* name;
  std::uint64_t Params::*member;
};

constexpr Field kFields[] = {
    {"digest", &Params::digest}, {"sig", &Params::sig},
    {"cert", &Params::cert},     {"rgx", &Params::rgx},
    {"id", &Params::id},         {"frame", &Params::frame},
    {"scalar", &Params::scalar}, {"ods_level_digests", &Params::ods_level_digests},
    {"clog", &Params::clog},     {"mlog", &Params::mlog},
    {"rgx_count", &Params::rgx_count}, {"clm_count", &Params::clm_count},
    {"dg_rgx", &Params::dg_rgx}, {"dg_id", &Params::dg_id},
    {"dg_a", &Params::dg_a},     {"dg_rv", &Params::dg_rv},
};

std::uint64_t ParseCount(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw std::invalid_argument(key + ": not an integer: " + value);
  }
  return v;
}

}  // namespace

void Params::Set(const std::string& key, const std::string& value) {
  if (key == "extension") {
    const std::uint64_t v = ParseCount(key, value);
    if (v > 1) throw std::invalid_argument("extension takes 0 or 1");
    extension = v == 1;
    return;
  }
  for (const Field& f : kFields) {
    if (key != f.name) continue;
    const std::uint64_t v = ParseCount(key, value);
    if (v == 0) throw std::invalid_argument(key + " must be positive");
    this->*f.member = v;
    return;
  }
  throw std::invalid_argument("unknown parameter " + key);
}

std::vector<std::pair<std::string, std::uint64_t>> Params::List() const {
  std::vector<std::pair<std::string, std::uint64_t>> out;
  for (const Field& f : kFields) out.emplace_back(f.name, this->*f.member);
  out.emplace_back("extension", extension ? 1 : 0);
  return out;
}

std::uint64_t Levels(std::uint64_t n) {
  std::uint64_t levels = 0;
  while ((std::uint64_t{1} << levels) < n) ++levels;
  return levels;
}

Estimate EstimateSizes(const Params& p) {
  const std::uint64_t F = p.frame;
  const std::uint64_t dig = F + p.digest;
  const std::uint64_t num = F + p.scalar;
  const std::uint64_t sig = F + p.sig;
  auto str = [&](std::uint64_t len) { return F + len; };
  // index, size, packed path
  auto chrono = [&](std::uint64_t n) { return F + 2 * num + F + Levels(n) * p.digest; };
  // side bits, entry digests, sibling digests, the node's two children
  auto ods = [&](std::uint64_t n) { return 4 * F + 2 * dig + p.ods_level_digests * Levels(n) * p.digest; };
  const std::uint64_t action = F + p.cert + num + num + sig;
  const std::uint64_t head = F + num + dig + num + sig;  // also the signed timestamp

  Estimate e;
  auto add = [&](const std::string& proto, const std::string& msg, std::uint64_t bytes, std::uint64_t& total) {
    e.messages.emplace_back(proto + "." + msg, bytes);
    total += bytes;
  };
  auto extend = [&](const std::string& proto, std::uint64_t n, std::uint64_t& total) {
    if (!p.extension) return;
    add(proto, "extension-request", F + dig + 2 * num, total);
    add(proto, "extension-response", F + F + 2 * num + F + Levels(n) * p.digest, total);
  };

  add("mapping", "request", F + str(p.id), e.mapping);
  const std::uint64_t record = F + F + num + 4 * dig;
  add("mapping", "response",
      F + record + chrono(p.mlog) + str(p.rgx) + (F + p.cert + head) + ods(p.clm_count) + ods(p.rgx_count) + head,
      e.mapping);
  extend("mapping", p.mlog, e.mapping);

  // rgx, dg_id, dg_rgx, dg_a, dg_rv, n_mlog, master_t, then the proofs
  const std::uint64_t reg_fixed = F + str(p.rgx) + 4 * dig + 2 * num + chrono(p.clog) + ods(p.dg_rgx) + ods(p.dg_id);
  add("publish", "request", F + action, e.publish);
  add("publish", "response", F + dig + num + reg_fixed + ods(p.dg_a) + sig, e.publish);
  extend("publish", p.clog, e.publish);

  add("revoke", "request", F + action, e.revoke);
  add("revoke", "response", F + dig + num + reg_fixed + ods(p.dg_rv) + sig, e.revoke);
  extend("revoke", p.clog, e.revoke);

  add("verify", "request", F + num + 2 * p.cert, e.verify);
  // dg_a, dg_rv, rgx, dg_id, req digest, n_mlog, dg_rgx, master_t, mlog_size
  const std::uint64_t vmsg = F + 2 * dig + str(p.rgx) + 3 * dig + 3 * num + chrono(p.clog) + ods(p.dg_rgx) +
                             ods(p.dg_id) + ods(p.dg_a);
  add("verify", "response", F + dig + num + vmsg + sig, e.verify);
  extend("verify", p.clog, e.verify);
  return e;
}

}  // namespace dtki::size
