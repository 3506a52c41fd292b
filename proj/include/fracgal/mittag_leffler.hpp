#pragma once

// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) on the negative real
// axis, 0 < alpha < 2, beta > 0.
//
// Three evaluation regimes:
//   |z| <= 1 + 2 alpha      power series, compensated summation
//   |z| >= 10 + 20 alpha    algebraic asymptotic series plus the residues of the
//                           poles s^alpha = z (present for alpha >= 1), accepted
//                           only when the truncated series certifies its error
//   otherwise               inverse Laplace transform on an optimal parabolic
//                           contour (Garrappa, SIAM J. Numer. Anal. 53, 2015)

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "fracgal/errors.hpp"

namespace fracgal::ml {

struct MLParams {
  double alpha;
  double beta;
};

enum class Regime { Origin, Series, Contour, Asymptotic };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Origin: return "origin";
    case Regime::Series: return "series";
    case Regime::Contour: return "contour";
    case Regime::Asymptotic: return "asymptotic";
  }
  return "?";
}

struct Evaluation {
  double value;
  Regime regime;
};

inline double series_threshold(double alpha) { return 1.0 + 2.0 * alpha; }
inline double asymptotic_threshold(double alpha) { return 10.0 + 20.0 * alpha; }

/// 1/Gamma(y); zero at the poles y = 0, -1, -2, ...
inline double recip_gamma(double y) {
  if (y > 0.0) {
    if (y > 170.0) return std::exp(-boost::math::lgamma(y));
    return 1.0 / boost::math::tgamma(y);
  }
  if (y == std::nearbyint(y)) return 0.0;
  // reflection: 1/Gamma(y) = Gamma(1 - y) sin(pi y) / pi
  const double s = boost::math::sin_pi(y);
  if (1.0 - y > 170.0) {
    const double mag = std::exp(boost::math::lgamma(1.0 - y) + std::log(std::abs(s)) - std::log(std::numbers::pi));
    return std::copysign(mag, s);
  }
  return boost::math::tgamma(1.0 - y) * s / std::numbers::pi;
}

/// log|1/Gamma(y)| and its sign; sign 0 at the poles.
inline double log_abs_recip_gamma(double y, int& sign) {
  if (y > 0.0) {
    sign = 1;
    return -boost::math::lgamma(y);
  }
  if (y == std::nearbyint(y)) {
    sign = 0;
    return -std::numeric_limits<double>::infinity();
  }
  const double s = boost::math::sin_pi(y);
  sign = s > 0.0 ? 1 : -1;
  return boost::math::lgamma(1.0 - y) + std::log(std::abs(s)) - std::log(std::numbers::pi);
}

namespace detail {

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

inline double series(double alpha, double beta, double z) {
  const double x = -z;
  Neumaier acc;
  acc.add(recip_gamma(beta));
  double peak = std::abs(acc.value());
  const double log_x = std::log(x);
  for (int k = 1; k < 100000; ++k) {
    const double arg = alpha * k + beta;
    double mag;
    if (arg < 170.0)
      mag = std::pow(x, k) / boost::math::tgamma(arg);
    else
      mag = std::exp(k * log_x - boost::math::lgamma(arg));
    const double term = (k % 2 == 0) ? mag : -mag;
    acc.add(term);
    peak = std::max(peak, mag);
    // past the peak of the term sequence and below the working precision
    if (std::pow(x, 1.0 / alpha) < arg && mag <= 1e-18 * std::max(std::abs(acc.value()), 1e-300)) break;
    if (mag == 0.0) break;
  }
  return acc.value();
}

/// Poles s with s^alpha = z, |arg s| < pi, on the principal sheet.
inline std::vector<std::complex<double>> poles(double alpha, std::complex<double> z) {
  const double theta = std::arg(z);
  const int kmin = static_cast<int>(std::ceil(-alpha / 2.0 - theta / (2.0 * std::numbers::pi)));
  const int kmax = static_cast<int>(std::floor(alpha / 2.0 - theta / (2.0 * std::numbers::pi)));
  std::vector<std::complex<double>> out;
  const double r = std::pow(std::abs(z), 1.0 / alpha);
  for (int k = kmin; k <= kmax; ++k)
    out.push_back(std::polar(r, (theta + 2.0 * k * std::numbers::pi) / alpha));
  return out;
}

inline std::complex<double> residue(std::complex<double> s, double alpha, double beta) {
  return std::pow(s, 1.0 - beta) * std::exp(s) / alpha;
}

struct ContourParams {
  double mu;
  double h;
  double N;  // +inf when the region is not usable
};

inline constexpr double kLogMachineEps = -36.043653389117154;

inline ContourParams optimal_bounded(double phi_j, double phi_j1, double p, double q, double log_eps) {
  const double fac = 1.01;
  const double f_max = std::exp(log_eps - kLogMachineEps);
  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt(log_eps - kLogMachineEps);
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);
  double sq_bar_j = 0.0, sq_bar_j1 = 0.0, f_bar = 1.0;
  bool admissible = false;
  if (p < 1e-14 && q < 1e-14) {
    sq_bar_j = sq_phi_j;
    sq_bar_j1 = sq_phi_j1;
    admissible = true;
  } else if (p < 1e-14) {
    sq_bar_j = sq_phi_j;
    const double f_min = sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), q) : fac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / q);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
      admissible = true;
    }
  } else if (q < 1e-14) {
    sq_bar_j1 = sq_phi_j1;
    const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), p);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / p);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
      admissible = true;
    }
  } else {
    double f_min = fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(p, q));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / p);
      const double fq = std::pow(f_bar, -1.0 / q);
      const double w = -phi_j1 / log_eps;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
      admissible = true;
    }
  }
  if (!admissible) return {0.0, 0.0, std::numeric_limits<double>::infinity()};
  const double le = log_eps - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 / le;
  const double mu = std::pow(((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w), 2);
  const double h = -2.0 * std::numbers::pi / le * (sq_bar_j1 - sq_bar_j) / ((1.0 + w) * sq_bar_j + sq_bar_j1);
  const double N = std::ceil(std::sqrt(1.0 - le / mu) / h);
  if (!(mu > 0.0) || !(h > 0.0) || !std::isfinite(N)) return {0.0, 0.0, std::numeric_limits<double>::infinity()};
  return {mu, h, N};
}

inline ContourParams optimal_unbounded(double phi_j, double p, double log_eps) {
  const double sq_phi_j = std::sqrt(phi_j);
  double phi_bar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phi_bar = std::sqrt(phi_bar);
  const double f_min = 1.0, f_max = 10.0, f_tar = 5.0;
  double N = 0.0, A = 0.0, sq_mu = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double phi_t = phi_bar;
    const double le_phi = log_eps / phi_t;
    N = std::ceil(phi_t / std::numbers::pi * (1.0 - 3.0 * le_phi / 2.0 + std::sqrt(1.0 - 2.0 * le_phi)));
    A = std::numbers::pi * N / phi_t;
    sq_mu = sq_phi_bar * std::abs(4.0 - A) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * A));
    const double fbar = std::pow((sq_phi_bar - sq_phi_j) / sq_mu, -p);
    if (p < 1e-14 || (f_min < fbar && fbar < f_max)) break;
    sq_phi_bar = std::pow(f_tar, -1.0 / p) * sq_mu + sq_phi_j;
    phi_bar = sq_phi_bar * sq_phi_bar;
  }
  double mu = sq_mu * sq_mu;
  double h = (-3.0 * A - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * A)) / (4.0 - A) / N;
  const double threshold = log_eps - kLogMachineEps;
  if (mu > threshold) {
    const double Q = std::abs(p) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / p) * std::sqrt(mu);
    phi_bar = std::pow(Q + sq_phi_j, 2);
    if (phi_bar < threshold) {
      const double w = std::sqrt(kLogMachineEps / (kLogMachineEps - log_eps));
      const double u = std::sqrt(-phi_bar / kLogMachineEps);
      mu = threshold;
      N = std::ceil(w * log_eps / 2.0 / std::numbers::pi / (u * w - 1.0));
      h = std::sqrt(kLogMachineEps / (kLogMachineEps - log_eps)) / N;
    } else {
      return {0.0, 0.0, std::numeric_limits<double>::infinity()};
    }
  }
  return {mu, h, N};
}

/// Inverse Laplace transform of s^(alpha-beta) / (s^alpha - z) at t = 1.
inline double contour(double alpha, double beta, double z) {
  using cd = std::complex<double>;
  const cd lambda(z, 0.0);
  auto all = poles(alpha, lambda);
  struct Sing {
    cd s;
    double phi;
  };
  std::vector<Sing> sing;
  for (const auto& s : all) {
    const double phi = 0.5 * (s.real() + std::abs(s));
    if (phi > 1e-15) sing.push_back({s, phi});
  }
  std::stable_sort(sing.begin(), sing.end(), [](const Sing& a, const Sing& b) { return a.phi < b.phi; });
  sing.insert(sing.begin(), Sing{cd(0.0, 0.0), 0.0});
  const std::size_t J1 = sing.size();
  std::vector<double> p(J1, 1.0), q(J1, 1.0), phi(J1 + 1);
  p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
  q[J1 - 1] = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < J1; ++j) phi[j] = sing[j].phi;
  phi[J1] = std::numeric_limits<double>::infinity();

  double log_eps = std::log(1e-15);
  std::vector<std::size_t> regions;
  for (std::size_t j = 0; j < J1; ++j)
    if (phi[j] < (log_eps - kLogMachineEps) && phi[j] < phi[j + 1]) regions.push_back(j);
  if (regions.empty()) throw NumericalError("Mittag-Leffler contour: no admissible integration region");

  std::vector<ContourParams> params(J1, ContourParams{0.0, 0.0, std::numeric_limits<double>::infinity()});
  for (int attempt = 0;; ++attempt) {
    for (std::size_t j : regions) {
      params[j] = (j + 1 < J1) ? optimal_bounded(phi[j], phi[j + 1], p[j], q[j], log_eps)
                               : optimal_unbounded(phi[j], p[j], log_eps);
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j : regions) best = std::min(best, params[j].N);
    if (best <= 200.0) break;
    if (attempt > 10) throw NumericalError("Mittag-Leffler contour: node count did not settle");
    log_eps += std::log(10.0);
  }
  std::size_t chosen = regions.front();
  for (std::size_t j : regions)
    if (params[j].N < params[chosen].N) chosen = j;
  const auto [mu, h, Nd] = params[chosen];
  const int N = static_cast<int>(Nd);

  cd sum(0.0, 0.0);
  for (int k = -N; k <= N; ++k) {
    const double u = h * k;
    const cd zz = mu * std::pow(cd(1.0, u), 2);
    const cd zd(-2.0 * mu * u, 2.0 * mu);
    const cd F = std::pow(zz, alpha - beta) / (std::pow(zz, alpha) - lambda) * zd;
    sum += std::exp(zz) * F;
  }
  cd integral = h * sum / cd(0.0, 2.0 * std::numbers::pi);
  cd residues(0.0, 0.0);
  for (std::size_t j = chosen + 1; j < J1; ++j) residues += residue(sing[j].s, alpha, beta);
  const double value = (integral + residues).real();
  if (!std::isfinite(value)) throw NumericalError("Mittag-Leffler contour: non-finite result");
  return value;
}

/// Asymptotic expansion for large -z. Returns nullopt when the truncated
/// algebraic series cannot certify relative accuracy of about 1e-14.
inline std::optional<double> asymptotic(double alpha, double beta, double z) {
  const double x = -z;
  double pole_part = 0.0;
  if (alpha > 1.0) {
    for (const auto& s : poles(alpha, std::complex<double>(z, 0.0)))
      if (std::abs(std::arg(s)) < std::numbers::pi) pole_part += residue(s, alpha, beta).real();
  } else if (alpha == 1.0) {
    // the pole s = -x sits on the cut: mean of the residues from both sides
    pole_part = std::cos(std::numbers::pi * (beta - 1.0)) * std::exp((1.0 - beta) * std::log(x) - x);
  }
  // For alpha = 1 and integer beta the algebraic part is a finite sum.
  const bool finite_sum = alpha == 1.0 && beta == std::nearbyint(beta);
  // E ~ -sum_{k>=1} z^{-k} / Gamma(beta - alpha k)
  Neumaier acc;
  const double log_x = std::log(x);
  double last = std::numeric_limits<double>::infinity();
  double smallest = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int k = 1; k <= 400; ++k) {
    const double y = beta - alpha * k;
    if (finite_sum && y <= 0.0) {
      converged = true;
      break;
    }
    // Divergence and truncation are judged on the envelope Gamma(1-y)/pi of
    // |1/Gamma(y)|, so a term that is small only through sin(pi y) does
    // not pass for the smallest.
    const double envelope = std::exp((y < 1.0 ? boost::math::lgamma(1.0 - y) - std::log(std::numbers::pi)
                                              : -boost::math::lgamma(y)) - k * log_x);
    if (envelope > last && k > 2) break;  // asymptotic series started to diverge
    last = envelope;
    smallest = std::min(smallest, envelope);
    int sign = 0;
    const double lr = log_abs_recip_gamma(y, sign);
    if (sign != 0) {
      // -(-x)^{-k} = -(-1)^k x^{-k}
      acc.add((k % 2 == 0 ? -1.0 : 1.0) * sign * std::exp(lr - k * log_x));
    }
    if (envelope <= 1e-17 * std::abs(acc.value() + pole_part)) {
      converged = true;
      break;
    }
  }
  const double value = acc.value() + pole_part;
  if (finite_sum) return value;  // exact up to rounding, even when it underflows
  if (!(std::abs(value) > 0.0) || !std::isfinite(value)) return std::nullopt;
  if (!converged && !(smallest <= 1e-14 * std::abs(value))) return std::nullopt;
  // Exponentially small contributions not represented by the algebraic
  // series are of size exp(-x^(1/alpha)); require them to be negligible.
  // For alpha = 1 the only such contribution is the pole term above.
  if (alpha != 1.0 && std::pow(x, 1.0 / alpha) < 40.0) return std::nullopt;
  return value;
}

}  // namespace detail

inline void validate(const MLParams& p) {
  fracgal::detail::require(p.alpha > 0.0 && p.alpha < 2.0, "Mittag-Leffler: alpha must lie in (0, 2)");
  fracgal::detail::require(p.beta > 0.0 && std::isfinite(p.beta), "Mittag-Leffler: beta must be positive");
}

/// E_{alpha,beta}(z) for z <= 0, reporting the regime that produced it.
inline Evaluation evaluate(const MLParams& p, double z) {
  validate(p);
  fracgal::detail::require(z <= 0.0 && std::isfinite(z), "Mittag-Leffler: argument must be a finite z <= 0");
  if (z == 0.0) return {recip_gamma(p.beta), Regime::Origin};
  const double x = -z;
  if (x <= series_threshold(p.alpha)) return {detail::series(p.alpha, p.beta, z), Regime::Series};
  // alpha = 1 decays like exp(-x), below the contour's absolute accuracy,
  // so the expansion with its pole term is tried on the whole band.
  if (x >= asymptotic_threshold(p.alpha) || p.alpha == 1.0) {
    if (auto v = detail::asymptotic(p.alpha, p.beta, z)) return {*v, Regime::Asymptotic};
  }
  return {detail::contour(p.alpha, p.beta, z), Regime::Contour};
}

inline double ml_eval(const MLParams& p, double z) { return evaluate(p, z).value; }

/// Mode solution E_{alpha,1}(-lambda t^alpha).
inline double mode_solution(double lambda, double alpha, double t) {
  fracgal::detail::require(lambda > 0.0, "mode_solution: lambda must be positive");
  fracgal::detail::require(t >= 0.0, "mode_solution: t must be non-negative");
  if (t == 0.0) return 1.0;
  return ml_eval({alpha, 1.0}, -lambda * std::pow(t, alpha));
}

/// First derivative -lambda t^(alpha-1) E_{alpha,alpha}(-lambda t^alpha).
inline double mode_first_derivative(double lambda, double alpha, double t) {
  fracgal::detail::require(lambda > 0.0, "mode derivative: lambda must be positive");
  fracgal::detail::require(t > 0.0, "mode derivative: t must be positive (singular at t = 0)");
  return -lambda * std::pow(t, alpha - 1.0) * ml_eval({alpha, alpha}, -lambda * std::pow(t, alpha));
}

/// Second derivative -lambda t^(alpha-2) E_{alpha,alpha-1}(-lambda t^alpha), 1 < alpha < 2.
inline double mode_second_derivative(double lambda, double alpha, double t) {
  fracgal::detail::require(alpha > 1.0, "second mode derivative needs alpha > 1 (beta = alpha - 1 > 0)");
  fracgal::detail::require(lambda > 0.0, "mode derivative: lambda must be positive");
  fracgal::detail::require(t > 0.0, "mode derivative: t must be positive (singular at t = 0)");
  return -lambda * std::pow(t, alpha - 2.0) * ml_eval({alpha, alpha - 1.0}, -lambda * std::pow(t, alpha));
}

struct ModeDerivatives {
  double first;
  std::optional<double> second;  // present only for alpha > 1
};

inline ModeDerivatives mode_derivatives(double lambda, double alpha, double t) {
  ModeDerivatives d{mode_first_derivative(lambda, alpha, t), std::nullopt};
  if (alpha > 1.0) d.second = mode_second_derivative(lambda, alpha, t);
  return d;
}

}  // namespace fracgal::ml
