#pragma once

// Randomized checks of the elementary inequalities behind the error analysis.
//
// Every sample draws its own generator from (seed, sample index), so a run is
// reproducible from the seed alone and independent of the worker count. A
// sample whose two sides agree to within kTieTolerance (relative) is redrawn
// and counted in OracleOutcome::redrawn; any other sample with a non-positive
// margin is a violation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>

#include "fracgal/errors.hpp"
#include "fracgal/frac_weights.hpp"
#include "fracgal/parallel.hpp"

namespace fracgal::oracle {

inline constexpr std::uint64_t kRecordedSeed = 7;
inline constexpr std::size_t kDefaultSamples = 10000;
inline constexpr double kTieTolerance = 1e-14;
inline constexpr double kEndpointOffset = 1e-3;

using Witness = std::vector<std::pair<std::string, double>>;

struct OracleOutcome {
  std::string check;
  std::size_t samples = 0;
  std::size_t redrawn = 0;
  std::size_t violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  Witness witness;  // parameters of the sample attaining worst_margin
  std::uint64_t seed = 0;

  bool passed() const noexcept { return violations == 0 && worst_margin > 0.0; }
};

namespace detail {

struct Sample {
  double margin;
  Witness witness;
};

inline std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index, std::uint64_t attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(attempt)};
  return std::mt19937_64(seq);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Exponent in (lo, hi): every tenth sample sits at lo + offset, the next at
/// hi - offset, the rest are uniform between the two.
inline double exponent(std::mt19937_64& rng, std::size_t index, double lo, double hi) {
  switch (index % 10) {
    case 0: return lo + kEndpointOffset;
    case 1: return hi - kEndpointOffset;
    default: return uniform(rng, lo + kEndpointOffset, hi - kEndpointOffset);
  }
}

/// n sorted distinct uniforms on (0, 1), or nullopt on a repeated value.
inline std::optional<std::vector<double>> ordered(std::mt19937_64& rng, std::size_t n) {
  std::vector<double> x(n);
  for (auto& v : x) v = uniform(rng, 0.0, 1.0);
  std::sort(x.begin(), x.end());
  for (std::size_t i = 1; i < n; ++i)
    if (!(x[i] > x[i - 1])) return std::nullopt;
  return x;
}

inline double relative_gap(double larger, double smaller) {
  const double scale = std::max(std::abs(larger), std::abs(smaller));
  return scale > 0.0 ? (larger - smaller) / scale : 0.0;
}

/// draw(rng, index) returns a Sample or nullopt to request a redraw.
template <class Draw>
OracleOutcome run(std::string check, std::size_t samples, std::uint64_t seed, Draw&& draw) {
  fracgal::detail::require(samples >= 1, "oracle needs at least one sample");
  constexpr std::size_t kChunk = 256;
  constexpr std::uint64_t kMaxAttempts = 64;
  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  struct Partial {
    std::size_t redrawn = 0, violations = 0;
    std::optional<Sample> worst;
  };
  std::vector<Partial> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Partial& p = partial[c];
    for (std::size_t i = c * kChunk; i < std::min(samples, (c + 1) * kChunk); ++i) {
      std::optional<Sample> s;
      for (std::uint64_t attempt = 0; attempt < kMaxAttempts && !s; ++attempt) {
        auto rng = sample_rng(seed, i, attempt);
        s = draw(rng, i);
        if (!s) ++p.redrawn;
      }
      if (!s) throw NumericalError("oracle " + check + ": no admissible draw", i);
      if (!(s->margin > 0.0)) ++p.violations;
      if (!p.worst || s->margin < p.worst->margin) p.worst = std::move(s);
    }
  });
  OracleOutcome out;
  out.check = std::move(check);
  out.samples = samples;
  out.seed = seed;
  for (auto& p : partial) {
    out.redrawn += p.redrawn;
    out.violations += p.violations;
    if (p.worst && p.worst->margin < out.worst_margin) {
      out.worst_margin = p.worst->margin;
      out.witness = std::move(p.worst->witness);
    }
  }
  return out;
}

/// A relative margin at the tie level is not a decision; ask for a redraw.
inline std::optional<Sample> decide(double margin, Witness w) {
  if (std::abs(margin) <= kTieTolerance) return std::nullopt;
  return Sample{margin, std::move(w)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ratio inequalities

struct Sides {
  double lhs;
  double rhs;
};

/// Both ratios of the first inequality with an optional linear term mu:
///   lhs = [(d-t)^p - (d-a)^p + mu (a-t)] / [(d-a)^p - (d-b)^p + mu (b-a)]
/// and rhs the same with c in place of d, p = 1 - beta.
inline Sides ratio_sides(double beta, double mu, double t, double a, double b, double c, double d) {
  const double p = 1.0 - beta;
  auto side = [&](double e) {
    const double num = fracgal::detail::power_gap(p, e - a, a - t) + mu * (a - t);
    const double den = fracgal::detail::power_gap(p, e - b, b - a) + mu * (b - a);
    return num / den;
  };
  return {side(d), side(c)};
}

/// lhs = [(c-t)^p - (c-a)^p] / [(c-a)^p - (c-b)^p] with p = 2 - beta and
/// rhs = (a-t)/(b-a).
inline Sides wave_ratio_sides(double beta, double t, double a, double b, double c) {
  const double p = 2.0 - beta;
  const double num = fracgal::detail::power_gap(p, c - a, a - t);
  const double den = fracgal::detail::power_gap(p, c - b, b - a);
  return {num / den, (a - t) / (b - a)};
}

namespace detail {

/// t < a < b < c < d on (0, 1). Every fifth sample pins t = 0 and every
/// seventh pushes c to within 1e-9 of b.
inline std::optional<std::array<double, 5>> five_points(std::mt19937_64& rng, std::size_t index) {
  auto x = ordered(rng, 5);
  if (!x) return std::nullopt;
  std::array<double, 5> p{(*x)[0], (*x)[1], (*x)[2], (*x)[3], (*x)[4]};
  if (index % 5 == 2) p[0] = 0.0;
  if (index % 7 == 3) p[3] = p[2] + 1e-9 * (p[4] - p[2]);
  return p;
}

inline Witness five_point_witness(double beta, std::optional<double> mu, const std::array<double, 5>& p) {
  Witness w{{"beta", beta}};
  if (mu) w.emplace_back("mu", *mu);
  const char* names[] = {"t", "a", "b", "c", "d"};
  for (int i = 0; i < 5; ++i) w.emplace_back(names[i], p[i]);
  return w;
}

}  // namespace detail

/// Monotonicity in the outer point of the ratio of consecutive gaps of
/// s -> (e - s)^{1-beta}: the ratio grows with e.
inline OracleOutcome check_lem31(std::size_t samples = kDefaultSamples, std::uint64_t seed = kRecordedSeed) {
  return detail::run("gap-ratio", samples, seed, [](std::mt19937_64& rng, std::size_t i) -> std::optional<detail::Sample> {
    const double beta = detail::exponent(rng, i, 0.0, 1.0);
    const auto p = detail::five_points(rng, i);
    if (!p) return std::nullopt;
    const auto s = ratio_sides(beta, 0.0, (*p)[0], (*p)[1], (*p)[2], (*p)[3], (*p)[4]);
    return detail::decide(detail::relative_gap(s.lhs, s.rhs), detail::five_point_witness(beta, std::nullopt, *p));
  });
}

/// The same monotonicity with a common linear term mu >= 0 added to both
/// gaps. mu is log-uniform on [1e-6, 1e6], with mu = 0 and mu = 1e6 forced on
/// a fixed share of the samples.
inline OracleOutcome check_pre_g(std::size_t samples = kDefaultSamples, std::uint64_t seed = kRecordedSeed) {
  return detail::run("gap-ratio-linear", samples, seed, [](std::mt19937_64& rng, std::size_t i) -> std::optional<detail::Sample> {
    const double beta = detail::exponent(rng, i, 0.0, 1.0);
    double mu;
    switch (i % 8) {
      case 0: mu = 0.0; break;
      case 1: mu = 1e6; break;
      default: mu = std::pow(10.0, detail::uniform(rng, -6.0, 6.0));
    }
    const auto p = detail::five_points(rng, i);
    if (!p) return std::nullopt;
    const auto s = ratio_sides(beta, mu, (*p)[0], (*p)[1], (*p)[2], (*p)[3], (*p)[4]);
    return detail::decide(detail::relative_gap(s.lhs, s.rhs), detail::five_point_witness(beta, mu, *p));
  });
}

/// For 1 < beta < 2 and t < a < b <= c the ratio of consecutive gaps of
/// s -> (c - s)^{2-beta} stays below the ratio of the interval lengths.
/// Every sixth sample sets b = c.
inline OracleOutcome check_g_wave(std::size_t samples = kDefaultSamples, std::uint64_t seed = kRecordedSeed) {
  return detail::run("wave-ratio", samples, seed, [](std::mt19937_64& rng, std::size_t i) -> std::optional<detail::Sample> {
    const double beta = detail::exponent(rng, i, 1.0, 2.0);
    auto x = detail::ordered(rng, 4);
    if (!x) return std::nullopt;
    double t = (*x)[0], a = (*x)[1], b = (*x)[2], c = (*x)[3];
    if (i % 5 == 2) t = 0.0;
    if (i % 6 == 4) c = b;
    const auto s = wave_ratio_sides(beta, t, a, b, c);
    return detail::decide(detail::relative_gap(s.rhs, s.lhs),
                          Witness{{"beta", beta}, {"t", t}, {"a", a}, {"b", b}, {"c", c}});
  });
}

// ---------------------------------------------------------------------------
// Discrete convolution bounds

enum class ConvKind { Singular, Integrable };

inline const char* to_string(ConvKind k) { return k == ConvKind::Singular ? "conv-singular" : "conv-integrable"; }

/// sum_{j=1}^{k-1} j^beta (k^sigma - j^sigma)^{-gamma}, evaluated directly.
inline double discrete_conv_sum(double beta, double gamma, double sigma, std::size_t k) {
  fracgal::detail::require(k >= 2, "discrete convolution needs k >= 2");
  const double kd = static_cast<double>(k);
  double s = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    const double jd = static_cast<double>(j);
    const double gap = -std::pow(kd, sigma) * std::expm1(sigma * std::log(jd / kd));
    s += std::pow(jd, beta) * std::pow(gap, -gamma);
  }
  return s;
}

inline double conv_exponent(ConvKind kind, double beta, double gamma, double sigma) {
  return kind == ConvKind::Singular ? beta - (sigma - 1.0) * gamma : beta - sigma * gamma + 1.0;
}

/// The sum divided by the claimed growth k^{exponent}, and for the integrable kind also
/// multiplied by (1 - gamma). Evaluated in the scaled variable x = j/k, so
/// nothing overflows for large k or sigma.
inline double conv_ratio(ConvKind kind, double beta, double gamma, double sigma, std::size_t k) {
  fracgal::detail::require(k >= 2, "discrete convolution needs k >= 2");
  const double kd = static_cast<double>(k);
  // singular: x^beta (k (1 - x^sigma))^{-gamma};  integrable: x^beta k^{-1} (1 - x^sigma)^{-gamma}
  const double k_scale = kind == ConvKind::Singular ? std::pow(kd, -gamma) : 1.0 / kd;
  double s = 0.0;
  for (std::size_t j = 1; j < k; ++j) {
    const double lx = std::log(static_cast<double>(j) / kd);
    s += std::exp(beta * lx) * std::pow(-std::expm1(sigma * lx), -gamma);
  }
  s *= k_scale;
  return kind == ConvKind::Singular ? s : (1.0 - gamma) * s;
}

/// A k-independent ceiling for conv_ratio. Split the sum at j = k/2. Above
/// the split k^sigma - j^sigma >= sigma (k/2)^{sigma-1} (k - j) and
/// j^beta <= max(1, 2^{-beta}) k^beta. Below it k^sigma - j^sigma >=
/// (1 - 2^{-sigma}) k^sigma and sum_{j<=k/2} j^beta <= k^{beta+1}/(beta+1).
/// What remains is a partial sum of n^{-gamma}, bounded by zeta(gamma) for
/// gamma > 1 and by k^{1-gamma}/(1-gamma) + 1 for gamma < 1.
inline double conv_ceiling(ConvKind kind, double beta, double gamma, double sigma) {
  const double A = std::max(1.0, std::pow(2.0, -beta)) * std::pow(sigma, -gamma) * std::pow(2.0, (sigma - 1.0) * gamma);
  const double B = std::pow(1.0 - std::pow(2.0, -sigma), -gamma);
  if (kind == ConvKind::Singular) return A * boost::math::zeta(gamma) + B * std::pow(2.0, 1.0 - gamma) / (beta + 1.0);
  return A * (2.0 - gamma) + B * (1.0 - gamma) / (beta + 1.0);
}

/// k = 2..16, then 2^i and 3 * 2^{i-1} up to k_max, then k_max itself.
inline std::vector<std::size_t> conv_k_grid(std::size_t k_max) {
  fracgal::detail::require(k_max >= 2, "k_max must be at least 2");
  std::vector<std::size_t> ks;
  for (std::size_t k = 2; k <= std::min<std::size_t>(16, k_max); ++k) ks.push_back(k);
  for (std::size_t p = 16; p <= k_max; p *= 2) {
    ks.push_back(p);
    if (p + p / 2 <= k_max) ks.push_back(p + p / 2);
  }
  ks.push_back(k_max);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

inline constexpr std::size_t kDefaultConvTriples = 400;
inline constexpr std::size_t kDefaultKMax = 1 << 14;

/// Draws (beta, gamma, sigma) in the admissible range and checks
/// conv_ratio(k) < conv_ceiling on every k of conv_k_grid(k_max). The sample
/// count is the number of (triple, k) pairs.
inline OracleOutcome check_discrete_conv(ConvKind kind, std::size_t k_max = kDefaultKMax,
                                         std::size_t triples = kDefaultConvTriples,
                                         std::uint64_t seed = kRecordedSeed) {
  const auto ks = conv_k_grid(k_max);
  auto outcome = detail::run(to_string(kind), triples, seed,
                             [&](std::mt19937_64& rng, std::size_t i) -> std::optional<detail::Sample> {
    const double beta = detail::exponent(rng, i, -1.0, 3.0);
    const double gamma = kind == ConvKind::Singular ? detail::exponent(rng, i / 10, 1.0, 3.0)
                                              : (i % 10 == 5 ? 0.5 : detail::exponent(rng, i / 10, 0.5, 1.0));
    const double sigma = (i % 3 == 0) ? 1.0 : detail::uniform(rng, 1.0, 4.0);
    const double ceiling = conv_ceiling(kind, beta, gamma, sigma);
    std::optional<detail::Sample> worst;
    for (std::size_t k : ks) {
      const double r = conv_ratio(kind, beta, gamma, sigma, k);
      const double margin = std::isfinite(r) ? detail::relative_gap(ceiling, r) : -1.0;
      if (!worst || margin < worst->margin)
        worst = detail::Sample{margin, Witness{{"beta", beta}, {"gamma", gamma}, {"sigma", sigma},
                                               {"k", static_cast<double>(k)}, {"ratio", r}, {"ceiling", ceiling}}};
    }
    return worst;
  });
  outcome.samples *= ks.size();
  return outcome;
}

// ---------------------------------------------------------------------------
// Coercivity of the left/right fractional derivative pairing

/// v(t) = c1 t + c2 t^2 + c3 t^3 on (0, 1).
struct Cubic {
  std::array<double, 3> c;
};

struct CoercivityTerms {
  double pairing;     // <D_{0+}^g v, D_{1-}^g v>
  double left_norm2;  // ||D_{0+}^g v||^2
  double right_norm2; // ||D_{1-}^g v||^2
};

/// Closed-form integrals. Term by term
///   D_{0+}^g t^i = G(i+1)/G(i+1-g) t^{i-g},
///   D_{1-}^g (1-t)^k = G(k+1)/G(k+1-g) (1-t)^{k-g},
/// after expanding v about t = 1. Products integrate to Beta functions.
inline CoercivityTerms coercivity_terms(const Cubic& v, double g) {
  fracgal::detail::require(g > 0.0 && g < 0.5, "coercivity exponent must lie in (0, 1/2)");
  std::array<double, 4> left{0.0, v.c[0], v.c[1], v.c[2]};  // coefficients of t^i
  // t^i = sum_k C(i,k) (-1)^k (1-t)^k
  std::array<double, 4> right{};
  const double binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
  for (int i = 1; i <= 3; ++i)
    for (int k = 0; k <= i; ++k) right[k] += left[i] * binom[i][k] * (k % 2 ? -1.0 : 1.0);
  std::array<double, 4> scale{};
  for (int i = 0; i <= 3; ++i) scale[i] = std::tgamma(i + 1.0) / std::tgamma(i + 1.0 - g);
  CoercivityTerms out{0.0, 0.0, 0.0};
  for (int i = 0; i <= 3; ++i)
    for (int k = 0; k <= 3; ++k) {
      const double li = left[i] * scale[i], lk = left[k] * scale[k];
      const double ri = right[i] * scale[i], rk = right[k] * scale[k];
      const double power = 1.0 / (i + k + 1.0 - 2.0 * g);
      out.left_norm2 += li * lk * power;
      out.right_norm2 += ri * rk * power;
      if (li != 0.0 && rk != 0.0) out.pairing += li * rk * std::beta(i + 1.0 - g, k + 1.0 - g);
    }
  return out;
}

/// cos(g pi) ||D_{0+}^g v||^2 <= <D_{0+}^g v, D_{1-}^g v> and the same with
/// the right-sided norm, for random cubics with v(0) = 0. The margin is the
/// smaller of the two relative gaps. Sample 0 is v = t, sample 1 is a
/// multiple of t^2 - t^3; g = 0.49 is forced on a share of the samples.
inline OracleOutcome check_coercivity(std::size_t samples = kDefaultSamples, std::uint64_t seed = kRecordedSeed) {
  return detail::run("coercivity", samples, seed, [](std::mt19937_64& rng, std::size_t i) -> std::optional<detail::Sample> {
    const double g = (i % 10 == 7) ? 0.49 : detail::exponent(rng, i, 0.0, 0.5);
    Cubic v{{detail::uniform(rng, -1.0, 1.0), detail::uniform(rng, -1.0, 1.0), detail::uniform(rng, -1.0, 1.0)}};
    if (i == 0) v = Cubic{{1.0, 0.0, 0.0}};
    if (i == 1) v = Cubic{{0.0, v.c[1], -v.c[1]}};
    const auto terms = coercivity_terms(v, g);
    const double cg = std::cos(g * std::numbers::pi);
    const double margin = std::min(detail::relative_gap(terms.pairing, cg * terms.left_norm2),
                                   detail::relative_gap(terms.pairing, cg * terms.right_norm2));
    return detail::decide(margin, Witness{{"gamma", g}, {"c1", v.c[0]}, {"c2", v.c[1]}, {"c3", v.c[2]}});
  });
}

/// All six checks with the given seed.
inline std::vector<OracleOutcome> check_all(std::uint64_t seed = kRecordedSeed, std::size_t samples = kDefaultSamples) {
  return {check_lem31(samples, seed),
          check_pre_g(samples, seed),
          check_g_wave(samples, seed),
          check_discrete_conv(ConvKind::Singular, kDefaultKMax, kDefaultConvTriples, seed),
          check_discrete_conv(ConvKind::Integrable, kDefaultKMax, kDefaultConvTriples, seed),
          check_coercivity(samples, seed)};
}

}  // namespace fracgal::oracle
