#include "jitvar/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace jitvar::stats {

std::string_view test_name(TestKind t) {
  return t == TestKind::levene ? "levene" : "mann_whitney_u";
}

namespace {

void require_size(std::span<const double> g, const char* test) {
  if (g.size() < 2) {
    throw std::invalid_argument(std::string(test) + ": each group needs at least two values");
  }
}

/// Arithmetic mean that is exact for constant input.
double group_mean(std::span<const double> v) {
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return v.front();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TestResult levene(std::span<const double> group_a, std::span<const double> group_b) {
  require_size(group_a, "levene");
  require_size(group_b, "levene");

  TestResult r;
  r.test = TestKind::levene;
  r.n1 = group_a.size();
  r.n2 = group_b.size();
  r.method_note = "mean-centered Levene";

  std::vector<double> za, zb;
  const double ma = group_mean(group_a);
  const double mb = group_mean(group_b);
  for (double y : group_a) za.push_back(std::abs(y - ma));
  for (double y : group_b) zb.push_back(std::abs(y - mb));

  const double za_bar = group_mean(za);
  const double zb_bar = group_mean(zb);
  const double n_total = static_cast<double>(r.n1 + r.n2);
  const double z_bar = (static_cast<double>(r.n1) * za_bar + static_cast<double>(r.n2) * zb_bar) /
                       n_total;

  double between = static_cast<double>(r.n1) * (za_bar - z_bar) * (za_bar - z_bar) +
                   static_cast<double>(r.n2) * (zb_bar - z_bar) * (zb_bar - z_bar);
  if (za_bar == zb_bar) between = 0.0;
  double within = 0.0;
  for (double z : za) within += (z - za_bar) * (z - za_bar);
  for (double z : zb) within += (z - zb_bar) * (z - zb_bar);

  constexpr double k = 2.0;
  const double d1 = k - 1.0;
  const double d2 = n_total - k;
  if (within == 0.0) {
    r.degenerate = true;
    if (between == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
      r.method_note += "; degenerate (no spread in either group)";
    } else {
      r.statistic = std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.method_note += "; degenerate (zero within-group spread)";
    }
    return r;
  }
  r.statistic = (d2 / d1) * between / within;
  r.p_value = std::clamp(f_sf(r.statistic, d1, d2), 0.0, 1.0);
  return r;
}

double u_statistic(std::span<const double> group_a, std::span<const double> group_b) {
  std::uint64_t twice = 0;
  for (double a : group_a) {
    for (double b : group_b) {
      if (a > b) twice += 2;
      else if (a == b) twice += 1;
    }
  }
  return static_cast<double>(twice) / 2.0;
}

std::vector<std::uint64_t> u_distribution(std::size_t n1, std::size_t n2) {
  // f[i][j][u]: arrangements of i a's and j b's with u (a > b) pairs.
  // The largest element is either an a (beating all j b's) or a b.
  const std::size_t max_u = n1 * n2;
  std::vector<std::vector<std::vector<std::uint64_t>>> f(
      n1 + 1, std::vector<std::vector<std::uint64_t>>(n2 + 1));
  for (std::size_t i = 0; i <= n1; ++i) {
    for (std::size_t j = 0; j <= n2; ++j) {
      auto& cell = f[i][j];
      cell.assign(i * j + 1, 0);
      if (i == 0 || j == 0) {
        cell[0] = 1;
        continue;
      }
      const auto& top_a = f[i - 1][j];
      const auto& top_b = f[i][j - 1];
      for (std::size_t u = 0; u < top_a.size(); ++u) cell[u + j] += top_a[u];
      for (std::size_t u = 0; u < top_b.size(); ++u) cell[u] += top_b[u];
    }
  }
  auto out = f[n1][n2];
  out.resize(max_u + 1, 0);
  return out;
}

double mann_whitney_exact_p(std::size_t n1, std::size_t n2, double u_min) {
  const auto dist = u_distribution(n1, n2);
  std::uint64_t total = 0;
  std::uint64_t tail = 0;
  for (std::size_t u = 0; u < dist.size(); ++u) {
    total += dist[u];
    if (static_cast<double>(u) <= u_min) tail += dist[u];
  }
  return std::min(1.0, 2.0 * static_cast<double>(tail) / static_cast<double>(total));
}

namespace {

TestResult mann_whitney_impl(std::span<const double> group_a, std::span<const double> group_b,
                             bool allow_exact) {
  require_size(group_a, "mann_whitney_u");
  require_size(group_b, "mann_whitney_u");

  TestResult r;
  r.test = TestKind::mann_whitney_u;
  r.n1 = group_a.size();
  r.n2 = group_b.size();
  const double ua = u_statistic(group_a, group_b);
  const double ub = u_statistic(group_b, group_a);
  r.statistic = std::min(ua, ub);

  std::vector<double> pooled(group_a.begin(), group_a.end());
  pooled.insert(pooled.end(), group_b.begin(), group_b.end());
  std::sort(pooled.begin(), pooled.end());
  const std::size_t n = pooled.size();

  double tie_term = 0.0;  // sum (t^3 - t) over tie groups
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j] == pooled[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  auto constant = [](std::span<const double> g) {
    return std::all_of(g.begin(), g.end(), [&](double x) { return x == g.front(); });
  };
  const bool one_constant = constant(group_a) != constant(group_b);

  if (allow_exact && n <= 32 && tie_term == 0.0) {
    r.p_value = mann_whitney_exact_p(r.n1, r.n2, r.statistic);
    r.method_note = "two-sided, exact distribution";
    return r;
  }

  const double n1 = static_cast<double>(r.n1);
  const double n2 = static_cast<double>(r.n2);
  const double nn = static_cast<double>(n);
  const double mu = n1 * n2 / 2.0;
  const double var = (n1 * n2 / 12.0) * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  r.method_note = "two-sided, normal approximation with tie and continuity correction";
  if (tie_term > 0.0) r.method_note += "; ties present";
  if (!(var > 0.0)) {
    r.degenerate = true;
    r.p_value = 1.0;
    r.method_note += "; degenerate (all values tied)";
    return r;
  }
  if (one_constant) r.method_note += "; one group has zero variance";
  const double z = std::max(0.0, std::abs(r.statistic - mu) - 0.5) / std::sqrt(var);
  r.p_value = std::min(1.0, std::erfc(z / std::numbers::sqrt2));
  return r;
}

}  // namespace

TestResult mann_whitney_u(std::span<const double> group_a, std::span<const double> group_b) {
  return mann_whitney_impl(group_a, group_b, true);
}

TestResult mann_whitney_u_normal(std::span<const double> group_a,
                                 std::span<const double> group_b) {
  return mann_whitney_impl(group_a, group_b, false);
}

namespace {

/// Continued fraction for I_x(a, b), modified Lentz.
double beta_cf(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double dm = static_cast<double>(m);
    const double m2 = 2.0 * dm;
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw std::runtime_error("reg_inc_beta: continued fraction did not converge");
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("reg_inc_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("reg_inc_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(x, a, b) / a;
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_cdf: degrees of freedom must be > 0");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return reg_inc_beta(d1 * x / (d1 * x + d2), d1 / 2.0, d2 / 2.0);
}

double f_sf(double x, double d1, double d2) {
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("f_sf: degrees of freedom must be > 0");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return reg_inc_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

}  // namespace jitvar::stats
