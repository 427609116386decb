#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace jitvar {

/// Nondeterminism-introducing factors. P is the parallel-reduction stand-in
/// for GPU execution.
enum class NiFactor : std::uint8_t { W = 0, D = 1, B = 2, P = 3 };

inline constexpr std::array<NiFactor, 4> kAllFactors{NiFactor::W, NiFactor::D, NiFactor::B,
                                                     NiFactor::P};

std::string_view factor_name(NiFactor f);

/// Domain-separation word fed to mix() for each factor (W=1, D=2, B=3, P=4).
constexpr std::uint64_t factor_tag(NiFactor f) { return static_cast<std::uint64_t>(f) + 1; }

/// One configuration of the factors. Ids follow the settings table:
/// N, A, W, D, B and their P-prefixed counterparts.
struct SettingSpec {
  std::string id;
  std::array<bool, 4> on{};  // indexed by NiFactor

  bool is_on(NiFactor f) const { return on[static_cast<std::size_t>(f)]; }

  /// Parses one of N, A, W, D, B, PN, PA, PW, PD, PB. Throws std::invalid_argument otherwise.
  static SettingSpec from_id(std::string_view id);
};

/// All ten settings in table order: N, A, W, D, B, PN, PA, PW, PD, PB.
std::vector<SettingSpec> default_settings();

/// Comma separated setting ids, e.g. "N,W,PW".
std::vector<SettingSpec> parse_settings(std::string_view csv);

/// splitmix64 finalizer.
constexpr std::uint64_t fmix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

/// Three-word avalanche mix:
///   h = fmix64(a ^ (b * kGolden))
///   h = fmix64(h ^ (c * kGolden))
/// kGolden is odd, so for fixed other arguments the result is a bijection of b
/// and of c.
constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = fmix64(a ^ (b * kGolden));
  return fmix64(h ^ (c * kGolden));
}

/// off: mix(master, tag, 0); on: mix(master, tag, run_index + 1).
std::uint64_t derive_seed(std::uint64_t master, NiFactor factor, std::uint64_t run_index,
                          bool on);

struct SeedPlan {
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;
  std::array<std::uint64_t, 4> seeds{};  // indexed by NiFactor

  std::uint64_t seed(NiFactor f) const { return seeds[static_cast<std::size_t>(f)]; }
  bool operator==(const SeedPlan&) const = default;
};

SeedPlan plan_for_run(const SettingSpec& setting, std::uint64_t master, std::uint64_t run_index);

/// Same as plan_for_run, but factors that are on get seeds from
/// std::random_device instead of the master seed. Off factors keep their
/// derived seeds.
SeedPlan plan_for_run_entropy(const SettingSpec& setting, std::uint64_t master,
                              std::uint64_t run_index);

/// Counter-based splitmix64 stream. Every draw is platform independent:
/// no std:: distributions are used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += kGolden;
    return fmix64(state_);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound), bound > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound);

  /// Fisher-Yates shuffle with draws from this stream.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::uint64_t state_;
};

/// Seed from the operating system entropy source.
std::uint64_t entropy_seed();

}  // namespace jitvar
