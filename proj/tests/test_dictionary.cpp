// Hermite basis, Gaussian quadrature, the coefficient threshold rule,
// and the closed-form depth/rate/schedule calculators.
//
// Oracles: hand-expanded low-degree polynomials (z² = h₀ + √2·h₂,
// z³ = 3·h₁ + √6·h₃), closed-form Gaussian integrals of the relu ridge,
// direct enumeration of threshold sets for exponential coefficient
// families, and independent direct-substitution evaluation of every
// rate formula.
#include "mflab/dictionary.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "mflab/rng.hpp"
#include "mflab/types.hpp"

namespace {

using mflab::CounterRng;
using mflab::hermite_value;
using mflab::hermite_values_upto;
using mflab::Index;
using mflab::StreamTag;
using mflab::Vector;
namespace dict = mflab::dictionary;

// ---------------------------------------------------------------------------
// Hermite recurrence
// ---------------------------------------------------------------------------

TEST(HermiteBasis, LowOrdersByHand) {
  for (double z : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
    EXPECT_DOUBLE_EQ(hermite_value(0, z), 1.0);
    EXPECT_DOUBLE_EQ(hermite_value(1, z), z);
    EXPECT_NEAR(hermite_value(2, z), (z * z - 1.0) / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(hermite_value(3, z), (z * z * z - 3.0 * z) / std::sqrt(6.0),
                1e-13)
        << "h_3 mismatch at z = " << z;
  }
}

TEST(HermiteBasis, BatchColumnMatchesTheScalarRecurrence) {
  const Vector all = hermite_values_upto(20, 0.8);
  for (int m = 0; m <= 20; ++m)
    EXPECT_DOUBLE_EQ(all[m], hermite_value(m, 0.8)) << "order " << m;
}

TEST(HermiteBasis, NegativeOrderThrows) {
  EXPECT_THROW(hermite_value(-1, 0.0), std::invalid_argument);
  EXPECT_THROW(hermite_values_upto(-2, 0.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

TEST(Quadrature, GaussHermiteReproducesGaussianMoments) {
  const dict::QuadratureRule rule = dict::gauss_hermite(20);
  EXPECT_NEAR(rule.weights.sum(), 1.0, 1e-14) << "weights must sum to one";
  // A 20-point rule is exact through degree 39.
  const auto moment = [&](int p) {
    double acc = 0.0;
    for (Index i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * std::pow(rule.nodes[i], p);
    return acc;
  };
  EXPECT_NEAR(moment(1), 0.0, 1e-13);
  EXPECT_NEAR(moment(2), 1.0, 1e-13);
  EXPECT_NEAR(moment(4), 3.0, 1e-12);
  EXPECT_NEAR(moment(6), 15.0, 1e-11);
  EXPECT_NEAR(moment(8), 105.0, 1e-10);
}

TEST(Quadrature, GaussLegendreIntegratesPolynomialsExactly) {
  const dict::QuadratureRule rule = dict::gauss_legendre(8, -1.0, 3.0);
  EXPECT_NEAR(rule.weights.sum(), 4.0, 1e-13) << "weights must sum to b - a";
  double cubic = 0.0;
  for (Index i = 0; i < rule.nodes.size(); ++i)
    cubic += rule.weights[i] * std::pow(rule.nodes[i], 3);
  // ∫_{-1}^{3} z³ dz = (3⁴ − (−1)⁴)/4 = 20.
  EXPECT_NEAR(cubic, 20.0, 1e-12);
}

TEST(Quadrature, HermiteBasisIsOrthonormalUnderTheRule) {
  const dict::QuadratureRule rule = dict::gauss_hermite(200);
  for (int m = 0; m <= 12; ++m) {
    for (int k = 0; k <= m; ++k) {
      double inner = 0.0;
      for (Index i = 0; i < rule.nodes.size(); ++i)
        inner += rule.weights[i] * hermite_value(m, rule.nodes[i]) *
                 hermite_value(k, rule.nodes[i]);
      EXPECT_NEAR(inner, m == k ? 1.0 : 0.0, 1e-10)
          << "inner product (" << m << ", " << k << ") off";
    }
  }
}

// ---------------------------------------------------------------------------
// Expansion
// ---------------------------------------------------------------------------

TEST(Expand, LinearRidgeHasASingleCoefficient) {
  const dict::HermiteExpansion e =
      dict::expand([](double z) { return z; }, 16, 200);
  EXPECT_TRUE(e.converged);
  EXPECT_NEAR(e.coefficients[1], 1.0, 1e-12);
  for (int m = 0; m <= 16; ++m) {
    if (m == 1) continue;
    EXPECT_NEAR(e.coefficients[m], 0.0, 1e-10) << "spurious f-hat at " << m;
  }
}

TEST(Expand, SquareRidgeByHand) {
  // z² = h₀ + √2·h₂ since h₂ = (z² − 1)/√2.
  const dict::HermiteExpansion e =
      dict::expand([](double z) { return z * z; }, 16, 200);
  EXPECT_NEAR(e.coefficients[0], 1.0, 1e-10);
  EXPECT_NEAR(e.coefficients[2], std::sqrt(2.0), 1e-10);
  for (int m : {1, 3, 4, 5, 6})
    EXPECT_NEAR(e.coefficients[m], 0.0, 1e-10) << "order " << m;
}

TEST(Expand, CubicRidgeByHand) {
  // z³ = 3·h₁ + √6·h₃.
  const dict::HermiteExpansion e =
      dict::expand([](double z) { return z * z * z; }, 16, 200);
  EXPECT_NEAR(e.coefficients[1], 3.0, 1e-9);
  EXPECT_NEAR(e.coefficients[3], std::sqrt(6.0), 1e-9);
  EXPECT_NEAR(e.coefficients[0], 0.0, 1e-10);
  EXPECT_NEAR(e.coefficients[2], 0.0, 1e-10);
}

TEST(Expand, ReluRidgeMatchesClosedFormGaussianIntegrals) {
  // E[(Z)_+]           = 1/√(2π)        (f̂₀)
  // E[(Z)_+·Z]         = 1/2            (f̂₁)
  // E[(Z)_+·h₂(Z)]     = 1/(2√π)        (f̂₂)
  // odd orders ≥ 3 vanish: (z)_+ − z/2 is even.
  const dict::HermiteExpansion e = dict::expand(
      [](double z) { return std::max(z, 0.0); }, 24, 200, {0.0});
  EXPECT_NEAR(e.coefficients[0], 1.0 / std::sqrt(2.0 * M_PI), 1e-10);
  EXPECT_NEAR(e.coefficients[1], 0.5, 1e-10);
  EXPECT_NEAR(e.coefficients[2], 1.0 / (2.0 * std::sqrt(M_PI)), 1e-10);
  EXPECT_NEAR(e.coefficients[3], 0.0, 1e-10);
  EXPECT_NEAR(e.coefficients[5], 0.0, 1e-10);
}

TEST(Expand, BesselInequalityHoldsOnEveryExpansion) {
  const std::vector<std::function<double(double)>> targets = {
      [](double z) { return std::tanh(2.0 * z); },
      [](double z) { return std::max(z - 0.3, 0.0); },
      [](double z) { return std::exp(-z * z); },
  };
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const std::vector<double> kinks =
        (t == 1) ? std::vector<double>{0.3} : std::vector<double>{};
    const dict::HermiteExpansion e = dict::expand(targets[t], 40, 200, kinks);
    EXPECT_LE(e.coefficients.squaredNorm(), e.norm_sq + 1e-8)
        << "Bessel violated for target " << t;
  }
}

TEST(Expand, ParsevalClosesForSmoothTargets) {
  // tanh is entire on the realline with rapidly decaying coefficients,
  // so the order-64 coefficient energy captures the full norm.
  const dict::HermiteExpansion e =
      dict::expand([](double z) { return std::tanh(z); }, 64, 200);
  EXPECT_TRUE(e.converged);
  EXPECT_NEAR(e.coefficients.squaredNorm(), e.norm_sq, 1e-6);
}

TEST(Expand, FromCoefficientsIsVerbatim) {
  Vector c(4);
  c << 0.5, -1.0, 0.25, 0.0;
  const dict::HermiteExpansion e = dict::expansion_from_coefficients(c);
  EXPECT_TRUE(e.converged);
  EXPECT_EQ(e.truncation_order, 3);
  EXPECT_EQ(e.coefficients.size(), 4);
  EXPECT_DOUBLE_EQ(e.coefficients[1], -1.0);
  EXPECT_NEAR(e.norm_sq, c.squaredNorm(), 1e-15);
}

// ---------------------------------------------------------------------------
// Threshold rule
// ---------------------------------------------------------------------------

TEST(Threshold, HandExample) {
  Vector c(4);
  c << 1.0, 0.5, 0.1, 0.01;
  const dict::ThresholdReport r = dict::threshold(
      dict::expansion_from_coefficients(c), 0.05, 1.0, 2, 1.0);
  const std::vector<int> expected = {0, 1, 2};
  EXPECT_EQ(r.retained, expected);
  EXPECT_EQ(r.s_up, 6) << "S_up = |A|·mult = 3·2";
  EXPECT_NEAR(r.kappa, 0.01 * 0.01 + 1.0 * 0.05 * 3.0, 1e-15);
  EXPECT_NEAR(r.retained_energy, 1.0 + 0.25 + 0.01, 1e-15);
}

TEST(Threshold, ExtremeTemperatures) {
  Vector c(3);
  c << 0.4, -0.2, 0.1;
  const dict::HermiteExpansion e = dict::expansion_from_coefficients(c);
  // λ above max|f̂|/c_σ: nothing retained, κ is the full energy.
  const dict::ThresholdReport high = dict::threshold(e, 0.5, 1.0, 1, 1.0);
  EXPECT_TRUE(high.retained.empty());
  EXPECT_EQ(high.s_up, 0);
  EXPECT_NEAR(high.kappa, c.squaredNorm(), 1e-15);
  // λ → 0⁺: every nonzero index survives.
  const dict::ThresholdReport low = dict::threshold(e, 1e-12, 1.0, 1, 1.0);
  EXPECT_EQ(low.retained.size(), 3u);
  EXPECT_NEAR(low.retained_energy, c.squaredNorm(), 1e-15);
}

TEST(Threshold, RetainedSetsAreNestedInTemperature) {
  CounterRng rng(404, StreamTag::Scratch, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector c(20);
    for (Index m = 0; m < c.size(); ++m) c[m] = rng.next_gaussian();
    const dict::HermiteExpansion e = dict::expansion_from_coefficients(c);
    const double lam1 = 0.05 + 0.3 * rng.next_unit();
    const double lam2 = lam1 * (1.0 + rng.next_unit());  // lam2 > lam1
    const dict::ThresholdReport r1 = dict::threshold(e, lam1, 1.0, 1, 1.0);
    const dict::ThresholdReport r2 = dict::threshold(e, lam2, 1.0, 1, 1.0);
    const std::set<int> set1(r1.retained.begin(), r1.retained.end());
    for (int m : r2.retained)
      EXPECT_TRUE(set1.count(m))
          << "trial " << trial << ": index " << m
          << " retained at the higher temperature but not the lower";
    // Halving the temperature can only keep more coefficients, so the
    // discarded-energy part of κ is non-increasing.
    const double tail1 = r1.kappa - 1.0 * lam1 * double(r1.retained.size());
    const double tail2 = r2.kappa - 1.0 * lam2 * double(r2.retained.size());
    EXPECT_LE(tail1, tail2 + 1e-12)
        << "trial " << trial << ": discarded energy grew as λ shrank";
  }
}

TEST(Threshold, ExponentialFamilyCountMatchesTheClosedForm) {
  // Coefficients A·e^{−τm} stay above c_σλ exactly for
  // m ≤ (1/τ)·log(A/(c_σλ)), i.e. 1 + floor(...) indices.
  const double A = 1.0, tau = 0.5, c_sigma = 1.0, lambda = 0.01;
  Vector c(64);
  for (Index m = 0; m < c.size(); ++m) c[m] = A * std::exp(-tau * double(m));
  const dict::ThresholdReport r = dict::threshold(
      dict::expansion_from_coefficients(c), lambda, c_sigma, 1, 1.0);
  const int closed_form =
      1 + int(std::floor((1.0 / tau) * std::log(A / (c_sigma * lambda))));
  EXPECT_EQ(int(r.retained.size()), closed_form);
  EXPECT_EQ(int(r.retained.size()), 10);
  EXPECT_EQ(r.s_up, 10);
}

TEST(Threshold, DepthBoundDominatesEnumerationUpToOneAtom) {
  // For |f̂_m| = A·e^{−τm} the enumerated count is
  // 1 + floor((1/τ)·log(A/(c_σλ))) whenever A > c_σλ, which exceeds the
  // continuous bound (1/τ)·log(A/(c_σλ)) by at most one atom (times the
  // multiplicity).
  CounterRng rng(505, StreamTag::Scratch, 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const double A = 0.5 + 2.0 * rng.next_unit();
    const double tau = 0.2 + 1.3 * rng.next_unit();
    const double lambda = 0.002 + 0.2 * rng.next_unit();
    const int mult = 1 + int(rng.next_u64() % 3);
    Vector c(96);
    for (Index m = 0; m < c.size(); ++m)
      c[m] = A * std::exp(-tau * double(m));
    const dict::ThresholdReport r = dict::threshold(
        dict::expansion_from_coefficients(c), lambda, 1.0, mult, 1.0);
    const double bound = dict::exp_tail_depth_bound(A, tau, 1.0, lambda, mult);
    EXPECT_LE(double(r.s_up), bound + double(mult))
        << "trial " << trial << ": A=" << A << " tau=" << tau
        << " lambda=" << lambda << " mult=" << mult;
  }
}

TEST(DepthBound, HandValuesAndBoundary) {
  // log e = 1 makes the A=1, τ=1, λ=e⁻¹ case exactly 1.
  EXPECT_NEAR(dict::exp_tail_depth_bound(1.0, 1.0, 1.0, std::exp(-1.0), 1),
              1.0, 1e-12);
  EXPECT_DOUBLE_EQ(dict::exp_tail_depth_bound(1.0, 1.0, 1.0, 1.0, 1), 0.0)
      << "λ = A/c_σ retains nothing";
  EXPECT_DOUBLE_EQ(dict::exp_tail_depth_bound(1.0, 1.0, 1.0, 2.0, 1), 0.0)
      << "λ > A/c_σ retains nothing";
  EXPECT_THROW(dict::exp_tail_depth_bound(-1.0, 1.0, 1.0, 0.1, 1),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Parseval residual
// ---------------------------------------------------------------------------

TEST(ParsevalResidual, PolynomialCases) {
  // g(z) = z³ = 3·h₁ + √6·h₃.  Keeping only {1} leaves energy 6.
  const auto cubic = [](double z) { return z * z * z; };
  const dict::HermiteExpansion e = dict::expand(cubic, 16, 200);
  EXPECT_NEAR(dict::parseval_residual(e, {1}, cubic, 400), 6.0, 1e-6);
  // Keeping everything of a degree-3 polynomial leaves nothing.
  EXPECT_NEAR(dict::parseval_residual(e, {0, 1, 2, 3}, cubic, 400), 0.0,
              1e-10);
  // Keeping nothing leaves the whole norm 9 + 6 = 15.
  EXPECT_NEAR(dict::parseval_residual(e, {}, cubic, 400), 15.0, 1e-6);
}

TEST(ParsevalResidual, AgreesWithTheCoefficientTailOnPolynomials) {
  CounterRng rng(606, StreamTag::Scratch, 0, 0);
  for (int trial = 0; trial < 10; ++trial) {
    // Random polynomial of degree ≤ 10 expressed in the Hermite basis.
    Vector c = Vector::Zero(11);
    for (Index m = 0; m < c.size(); ++m) c[m] = rng.next_gaussian();
    const auto g = [&](double z) {
      return c.dot(hermite_values_upto(10, z));
    };
    const dict::HermiteExpansion e = dict::expand(g, 16, 200);
    const std::vector<int> keep = {0, 2, 5, 9};
    double tail = 0.0;
    const std::set<int> kept(keep.begin(), keep.end());
    for (Index m = 0; m < c.size(); ++m)
      if (!kept.count(int(m))) tail += c[m] * c[m];
    EXPECT_NEAR(dict::parseval_residual(e, keep, g, 400), tail, 1e-6)
        << "trial " << trial;
  }
}

// ---------------------------------------------------------------------------
// Rate calculators
// ---------------------------------------------------------------------------

// Direct-substitution oracle: every displayed formula retyped
// independently of the library implementation.
struct RateOracle {
  double e_poc, e_stat, e_opt, kappa, s_balance, s_bound, headline;
};

RateOracle rate_oracle(dict::RateRegime regime, const dict::RateParams& p) {
  RateOracle o{};
  const double logn = std::log(p.n_samples);
  o.e_poc = 1.0 / p.n_particles;
  o.e_opt = std::exp(-p.alpha_hat * p.horizon);
  const double factor = p.d_eff + 2.0 - p.d_orb;
  const double lp = regime == dict::RateRegime::BoundedAct ? 1.0 : 2.0;
  o.e_stat = p.sparse_depth * factor * std::pow(logn, lp) / p.n_samples;
  switch (regime) {
    case dict::RateRegime::Balanced:
      o.kappa = p.kappa;
      o.headline = o.e_poc + o.e_stat + o.kappa;
      break;
    case dict::RateRegime::PolyTail:
      o.kappa = std::pow(p.sparse_depth, 1.0 - 2.0 * p.beta) +
                p.lambda * p.sparse_depth;
      o.s_balance = std::pow(p.n_samples / (logn * logn), 1.0 / (2.0 * p.beta));
      o.headline = o.e_poc + std::pow(p.n_samples, -p.beta / (p.beta + 1.0)) *
                                 std::pow(logn, (2.0 * p.beta + 1.0) /
                                                    (p.beta + 1.0));
      break;
    case dict::RateRegime::SigmoidExp:
      o.kappa = p.lambda * p.lambda + p.lambda * std::log(1.0 / p.lambda);
      o.s_bound = 1.0 + std::log(p.tail_amp / (p.c_sigma * p.lambda)) /
                            p.tail_rate;
      o.headline = o.e_poc + std::pow(logn, 3.0) / p.n_samples;
      break;
    case dict::RateRegime::BoundedAct:
      o.kappa = p.kappa;
      o.headline = o.e_poc + std::pow(logn, 2.0) / p.n_samples;
      break;
  }
  return o;
}

TEST(PredictedRates, TrivialSubstitution) {
  // n = e² makes log n = 2; S = 1, d_eff = 1, D_orb = 1 make the
  // statistical factor (1+2−1) = 2, so e_stat = 1·2·4/e².
  dict::RateParams p;
  p.n_particles = 10.0;
  p.n_samples = std::exp(2.0);
  p.horizon = 1.0;
  p.lambda = 0.1;
  p.sparse_depth = 1.0;
  p.d_eff = 1.0;
  p.d_orb = 1.0;
  p.alpha_hat = 1.0;
  const dict::RateReport r = dict::predicted_rates(dict::RateRegime::Balanced, p);
  EXPECT_NEAR(r.e_stat, 2.0 * 4.0 / std::exp(2.0), 1e-14);
  EXPECT_NEAR(r.e_poc, 0.1, 1e-15);
  EXPECT_NEAR(r.e_opt, std::exp(-1.0), 1e-15);
}

TEST(PredictedRates, MatchesDirectSubstitutionOnRandomParameters) {
  CounterRng rng(707, StreamTag::Scratch, 0, 0);
  const std::vector<dict::RateRegime> regimes = {
      dict::RateRegime::Balanced, dict::RateRegime::PolyTail,
      dict::RateRegime::SigmoidExp, dict::RateRegime::BoundedAct};
  for (int trial = 0; trial < 100; ++trial) {
    dict::RateParams p;
    p.n_particles = 8.0 + 4000.0 * rng.next_unit();
    p.n_samples = 20.0 + 100000.0 * rng.next_unit();
    p.horizon = 0.5 + 30.0 * rng.next_unit();
    p.lambda = 0.001 + 0.3 * rng.next_unit();
    p.sparse_depth = 1.0 + 30.0 * rng.next_unit();
    p.d_eff = 1.0 + std::floor(6.0 * rng.next_unit());
    p.d_orb = std::floor(2.0 * rng.next_unit());
    p.alpha_hat = 0.05 + 2.0 * rng.next_unit();
    p.kappa = rng.next_unit();
    p.beta = 1.0 + 2.0 * rng.next_unit();
    p.tail_amp = 0.5 + 2.0 * rng.next_unit();
    p.tail_rate = 0.2 + 1.0 * rng.next_unit();
    p.c_sigma = 0.5 + rng.next_unit();
    const dict::RateRegime regime = regimes[trial % regimes.size()];
    const dict::RateReport r = dict::predicted_rates(regime, p);
    const RateOracle o = rate_oracle(regime, p);
    EXPECT_NEAR(r.e_poc, o.e_poc, 1e-12 * std::abs(o.e_poc));
    EXPECT_NEAR(r.e_stat, o.e_stat, 1e-12 * std::abs(o.e_stat));
    EXPECT_NEAR(r.e_opt, o.e_opt, 1e-12 * std::max(1.0, std::abs(o.e_opt)));
    EXPECT_NEAR(r.kappa, o.kappa, 1e-12 * std::max(1.0, std::abs(o.kappa)));
    EXPECT_NEAR(r.headline, o.headline,
                1e-12 * std::max(1.0, std::abs(o.headline)))
        << "trial " << trial << " regime " << int(regime);
    if (regime == dict::RateRegime::PolyTail)
      EXPECT_NEAR(r.s_balance, o.s_balance, 1e-12 * o.s_balance);
    if (regime == dict::RateRegime::SigmoidExp)
      EXPECT_NEAR(r.s_bound, o.s_bound, 1e-12 * std::abs(o.s_bound));
    EXPECT_NEAR(r.total, r.e_poc + r.e_stat + r.e_opt + r.kappa, 1e-14);
  }
}

TEST(PredictedRates, PolyTailBalanceAtUnitBeta) {
  dict::RateParams p;
  p.n_particles = 100.0;
  p.n_samples = 10000.0;
  p.horizon = 10.0;
  p.lambda = 0.01;
  p.sparse_depth = 5.0;
  p.beta = 1.0;
  const dict::RateReport r = dict::predicted_rates(dict::RateRegime::PolyTail, p);
  const double logn = std::log(10000.0);
  EXPECT_NEAR(r.s_balance, std::sqrt(10000.0 / (logn * logn)), 1e-10)
      << "β = 1 balance should be (n/(log n)²)^{1/2}";
}

TEST(PredictedRates, BoundedActivationDropsOneLogPower) {
  dict::RateParams p;
  p.n_particles = 64.0;
  p.n_samples = 50000.0;
  p.horizon = 5.0;
  p.lambda = 0.05;
  p.sparse_depth = 3.0;
  p.d_eff = 2.0;
  p.d_orb = 1.0;
  const dict::RateReport bounded =
      dict::predicted_rates(dict::RateRegime::BoundedAct, p);
  const dict::RateReport generic =
      dict::predicted_rates(dict::RateRegime::Balanced, p);
  EXPECT_NEAR(generic.e_stat / bounded.e_stat, std::log(p.n_samples), 1e-10)
      << "the generic statistical term carries exactly one extra log";
}

// ---------------------------------------------------------------------------
// Schedule check
// ---------------------------------------------------------------------------

TEST(ScheduleCheck, ReferenceScheduleSatisfiesEveryClause) {
  // λ = n⁻¹, T = (log n)²/α̂, N = n² at n = 10⁶ with unit sparse depth.
  // The fitted decay constant scales with the temperature (α̂ ≍ λ·c_π
  // for the entropic dynamics), so the reference schedule ties α̂ = λ;
  // then λT = (log n)² and every clause holds strictly.
  const double n = 1e6;
  const double lambda = 1.0 / n;
  const double alpha = lambda;
  const double T = std::pow(std::log(n), 2.0) / alpha;
  const double N = n * n;
  const dict::ScheduleVerdict v =
      dict::schedule_check(N, n, T, lambda, alpha, 1.0);
  EXPECT_TRUE(v.clause_coupling)
      << "(λT)^{-1} = " << 1.0 / (lambda * T) << " vs log N = " << std::log(N);
  EXPECT_TRUE(v.clause_statistical);
  EXPECT_TRUE(v.clause_optimization);
  EXPECT_TRUE(v.pass);
}

TEST(ScheduleCheck, FixedHorizonFailsTheOptimizationClause) {
  const double n = 1e6;
  const dict::ScheduleVerdict v =
      dict::schedule_check(n * n, n, 1.0, 0.5, 1.0, 1.0);
  EXPECT_FALSE(v.clause_optimization)
      << "log N = " << std::log(n * n) << " cannot stay below α̂·T = 1";
  EXPECT_FALSE(v.pass);
}

TEST(ScheduleCheck, SmallSampleFailsTheStatisticalClause) {
  // n = 10 with sparse depth 3: S(λ)(log n)²/n = 3·(log 10)²/10 > 1.
  const dict::ScheduleVerdict v =
      dict::schedule_check(1e6, 10.0, 100.0, 0.1, 1.0, 3.0);
  EXPECT_FALSE(v.clause_statistical);
  EXPECT_FALSE(v.pass);
  EXPECT_NEAR(v.value_statistical, 3.0 * std::pow(std::log(10.0), 2) / 10.0,
              1e-12);
}

TEST(ScheduleCheck, RejectsNonpositiveParameters) {
  EXPECT_THROW(dict::schedule_check(0.0, 10.0, 1.0, 0.1, 1.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(dict::schedule_check(10.0, 10.0, 1.0, 0.1, 0.0, 1.0),
               std::invalid_argument);
}

}  // namespace
