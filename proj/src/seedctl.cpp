#include "jitvar/seedctl.hpp"

#include <numeric>
#include <random>
#include <stdexcept>

namespace jitvar {

std::string_view factor_name(NiFactor f) {
  switch (f) {
    case NiFactor::W: return "W";
    case NiFactor::D: return "D";
    case NiFactor::B: return "B";
    case NiFactor::P: return "P";
  }
  return "?";
}

SettingSpec SettingSpec::from_id(std::string_view id) {
  SettingSpec s;
  s.id = std::string(id);
  std::string_view algo = id;
  if (id.size() == 2 && id.front() == 'P') {
    s.on[static_cast<std::size_t>(NiFactor::P)] = true;
    algo = id.substr(1);
  }
  if (algo == "N") {
  } else if (algo == "A") {
    s.on[0] = s.on[1] = s.on[2] = true;
  } else if (algo == "W") {
    s.on[static_cast<std::size_t>(NiFactor::W)] = true;
  } else if (algo == "D") {
    s.on[static_cast<std::size_t>(NiFactor::D)] = true;
  } else if (algo == "B") {
    s.on[static_cast<std::size_t>(NiFactor::B)] = true;
  } else {
    throw std::invalid_argument("unknown setting id '" + std::string(id) +
                                "' (expected one of N, A, W, D, B, PN, PA, PW, PD, PB)");
  }
  return s;
}

std::vector<SettingSpec> default_settings() {
  std::vector<SettingSpec> out;
  for (const char* id : {"N", "A", "W", "D", "B", "PN", "PA", "PW", "PD", "PB"}) {
    out.push_back(SettingSpec::from_id(id));
  }
  return out;
}

std::vector<SettingSpec> parse_settings(std::string_view csv) {
  std::vector<SettingSpec> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t comma = csv.find(',', start);
    if (comma == std::string_view::npos) comma = csv.size();
    std::string_view item = csv.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw std::invalid_argument("empty setting id in list");
    for (const auto& s : out) {
      if (s.id == item) throw std::invalid_argument("duplicate setting id '" + std::string(item) + "'");
    }
    out.push_back(SettingSpec::from_id(item));
    start = comma + 1;
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t master, NiFactor factor, std::uint64_t run_index,
                          bool on) {
  return mix(master, factor_tag(factor), on ? run_index + 1 : 0);
}

SeedPlan plan_for_run(const SettingSpec& setting, std::uint64_t master, std::uint64_t run_index) {
  SeedPlan plan{master, run_index, {}};
  for (NiFactor f : kAllFactors) {
    plan.seeds[static_cast<std::size_t>(f)] = derive_seed(master, f, run_index, setting.is_on(f));
  }
  return plan;
}

SeedPlan plan_for_run_entropy(const SettingSpec& setting, std::uint64_t master,
                              std::uint64_t run_index) {
  SeedPlan plan = plan_for_run(setting, master, run_index);
  for (NiFactor f : kAllFactors) {
    if (setting.is_on(f)) plan.seeds[static_cast<std::size_t>(f)] = entropy_seed();
  }
  return plan;
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
  // Largest multiple of bound representable, minus one.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x > limit);
  return x % bound;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  shuffle(std::span<std::size_t>(p));
  return p;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  std::uint64_t hi = rd();
  std::uint64_t lo = rd();
  return fmix64((hi << 32) ^ lo ^ kGolden);
}

}  // namespace jitvar
