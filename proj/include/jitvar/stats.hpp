#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace jitvar::stats {

enum class TestKind { levene, mann_whitney_u };

std::string_view test_name(TestKind t);

struct TestResult {
  TestKind test = TestKind::levene;
  double statistic = 0.0;  // Levene W, or U = min(U_a, U_b)
  double p_value = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  bool degenerate = false;
  std::string method_note;
};

/// Mean-centered (classical) Levene test for two groups.
/// Z_ij = |Y_ij - mean_i|, W = (N-k)/(k-1) * sum n_i (Zbar_i - Zbar)^2 / sum (Z_ij - Zbar_i)^2,
/// p = 1 - F(W; k-1, N-k). Zero within-group spread of Z is reported as
/// degenerate: W = 0, p = 1 when the between-group term is also zero,
/// otherwise W = inf, p = 0.
TestResult levene(std::span<const double> group_a, std::span<const double> group_b);

/// Two-sided Mann-Whitney U. Exact null distribution by dynamic programming
/// when n1 + n2 <= 32 and the pooled sample has no ties; otherwise the normal
/// approximation with tie and continuity corrections.
TestResult mann_whitney_u(std::span<const double> group_a, std::span<const double> group_b);

/// Always the normal approximation, whatever the sample size.
TestResult mann_whitney_u_normal(std::span<const double> group_a,
                                 std::span<const double> group_b);

/// U_a = #{(a, b): a > b} + 0.5 #{(a, b): a == b}.
double u_statistic(std::span<const double> group_a, std::span<const double> group_b);

/// Null distribution of U_a for sizes (n1, n2) without ties: entry u holds the
/// number of the C(n1 + n2, n1) label arrangements with U_a == u.
std::vector<std::uint64_t> u_distribution(std::size_t n1, std::size_t n2);

/// Exact two-sided p for an untied sample: min(1, 2 * P(U <= u_min)).
double mann_whitney_exact_p(std::size_t n1, std::size_t n2, double u_min);

/// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double reg_inc_beta(double x, double a, double b);

/// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double x, double d1, double d2);

/// Upper tail 1 - f_cdf, computed without cancellation.
double f_sf(double x, double d1, double d2);

double std_normal_cdf(double z);

}  // namespace jitvar::stats
