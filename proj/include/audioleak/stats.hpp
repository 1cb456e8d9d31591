#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>

#include "core.hpp"

namespace audioleak {

inline double mean(std::span<const double> xs) {
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs, double m) {
  if (xs.size() < 2) throw ParameterError("variance needs at least two samples");
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for the incomplete beta, evaluated with the modified
// Lentz scheme. Pure function of its arguments, safe to call concurrently.
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ParameterError("beta parameters must be positive");
  if (std::isnan(x)) throw ParameterError("incomplete beta argument is nan");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front =
      std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  // The continued fraction converges fastest below the distribution mean;
  // use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) on the far side.
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * detail::beta_continued_fraction(1.0 - x, b, a) / b;
}

// Two-tailed p-value of a t statistic. Computed directly as
// I_{df/(t^2+df)}(df/2, 1/2), which is exactly 1 when t == 0.
inline double student_t_two_tailed_p(double t, double df) {
  if (!(df > 0.0)) throw ParameterError("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  const double x = df / (t * t + df);
  return regularized_incomplete_beta(x, df / 2.0, 0.5);
}

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
};

enum class VarianceModel : std::uint8_t { Unequal, Pooled };

// Two-sample t-test. The default is Welch's unequal-variance form with the
// Welch-Satterthwaite degrees of freedom; VarianceModel::Pooled selects the
// classic equal-variance test.
//
// Conventions for degenerate inputs: equal means give t = 0 and p = 1 exactly
// (covers two identical constant vectors); zero variance on both sides with
// unequal means is treated as an infinite t, p = 0.
inline TTestResult t_test(std::span<const double> a, std::span<const double> b,
                          VarianceModel model = VarianceModel::Unequal) {
  if (a.size() < 2 || b.size() < 2)
    throw ParameterError("t-test needs at least two samples per side");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean(a);
  const double mb = mean(b);
  const double va = sample_variance(a, ma);
  const double vb = sample_variance(b, mb);

  TTestResult r;
  if (ma == mb) {
    r.t = 0.0;
    r.df = na + nb - 2.0;
    r.p = 1.0;
    return r;
  }

  double se2, df;
  if (model == VarianceModel::Pooled) {
    df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    se2 = sp2 * (1.0 / na + 1.0 / nb);
  } else {
    const double ta = va / na;
    const double tb = vb / nb;
    se2 = ta + tb;
    df = (se2 == 0.0) ? na + nb - 2.0
                      : se2 * se2 / (ta * ta / (na - 1.0) + tb * tb / (nb - 1.0));
  }
  if (se2 == 0.0) {
    r.t = (ma > mb) ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
    r.df = df;
    r.p = 0.0;
    return r;
  }
  r.t = (ma - mb) / std::sqrt(se2);
  r.df = df;
  r.p = student_t_two_tailed_p(r.t, df);
  return r;
}

inline TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  return t_test(a, b, VarianceModel::Unequal);
}

// Fisher's method for two p-values: -2(ln p1 + ln p2) is chi-square with four
// degrees of freedom, whose survival function has the closed form below.
inline double fisher_combine(double p1, double p2) {
  if (!(p1 >= 0.0) || p1 > 1.0 || !(p2 >= 0.0) || p2 > 1.0)
    throw ParameterError("p-values must lie in [0, 1]");
  if (p1 == 0.0 || p2 == 0.0) return 0.0;
  const double x = -2.0 * (std::log(p1) + std::log(p2));
  return std::exp(-x / 2.0) * (1.0 + x / 2.0);
}

}  // namespace audioleak
