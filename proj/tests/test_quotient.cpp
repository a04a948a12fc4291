// Neuron-symmetry canonicalization, atom-list equivalence, the
// architecture-target invariant table, and the covering-number
// calculator.
//
// Oracles: feature values before and after canonicalization (orbit maps
// must not move the function), explicit group elements applied to
// random neurons (orbit members must share a representative), and
// direct substitution for the covering formula.
#include "mflab/quotient.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mflab/model.hpp"
#include "mflab/rng.hpp"
#include "mflab/types.hpp"

namespace {

using mflab::CounterRng;
using mflab::Index;
using mflab::StreamTag;
using mflab::Vector;
namespace model = mflab::model;
namespace quotient = mflab::quotient;

model::ParameterPoint random_point(CounterRng& rng, Index dim) {
  model::ParameterPoint p;
  p.w = Vector(dim);
  for (Index j = 0; j < dim; ++j) p.w[j] = rng.next_gaussian();
  p.b = rng.next_gaussian();
  p.a = rng.next_gaussian();
  return p;
}

bool points_equal(const model::ParameterPoint& x,
                  const model::ParameterPoint& y, double tol) {
  if ((x.w - y.w).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(x.b - y.b) <= tol && std::abs(x.a - y.a) <= tol;
}

const std::vector<model::ActivationSpec>& all_activations() {
  static const std::vector<model::ActivationSpec> specs = {
      model::make_relu(), model::make_leaky_relu(0.1), model::make_tanh(),
      model::make_centered_sigmoid(), model::make_monomial(2),
      model::make_monomial(3)};
  return specs;
}

// ---------------------------------------------------------------------------
// Canonicalization
// ---------------------------------------------------------------------------

TEST(Canonicalize, PreservesTheNeuronFeature) {
  CounterRng rng(1001, StreamTag::Scratch, 0, 0);
  const Index dim = 3;
  for (const auto& spec : all_activations()) {
    for (int trial = 0; trial < 50; ++trial) {
      const model::ParameterPoint theta = random_point(rng, dim);
      const model::ParameterPoint rep = quotient::canonicalize(theta, spec);
      for (int probe = 0; probe < 8; ++probe) {
        Vector x(dim);
        for (Index j = 0; j < dim; ++j) x[j] = rng.next_gaussian();
        const double before = model::feature_eval(theta, x, spec);
        const double after = model::feature_eval(rep, x, spec);
        EXPECT_NEAR(after, before,
                    1e-10 * std::max(1.0, std::abs(before)))
            << spec.name() << " trial " << trial
            << ": canonical representative computes a different feature";
      }
    }
  }
}

TEST(Canonicalize, IsExactlyIdempotent) {
  CounterRng rng(1002, StreamTag::Scratch, 0, 0);
  const Index dim = 4;
  for (const auto& spec : all_activations()) {
    for (int trial = 0; trial < 200; ++trial) {
      const model::ParameterPoint once =
          quotient::canonicalize(random_point(rng, dim), spec);
      const model::ParameterPoint twice = quotient::canonicalize(once, spec);
      EXPECT_TRUE(points_equal(once, twice, 0.0))
          << spec.name() << " trial " << trial
          << ": re-canonicalization moved the representative";
    }
  }
}

TEST(Canonicalize, ScalingFamiliesLandOnTheUnitShell) {
  CounterRng rng(1003, StreamTag::Scratch, 0, 0);
  const std::vector<model::ActivationSpec> scaling = {
      model::make_relu(), model::make_leaky_relu(0.2),
      model::make_monomial(2)};
  for (const auto& spec : scaling) {
    for (int trial = 0; trial < 100; ++trial) {
      const model::ParameterPoint rep =
          quotient::canonicalize(random_point(rng, 2), spec);
      const double shell = std::sqrt(rep.w.squaredNorm() + rep.b * rep.b);
      EXPECT_NEAR(shell, 1.0, 1e-12)
          << spec.name() << ": |(w,b)| must be 1 after canonicalization";
    }
  }
}

TEST(Canonicalize, OrbitMembersShareTheirRepresentative) {
  CounterRng rng(1004, StreamTag::Scratch, 0, 0);
  const Index dim = 3;
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const model::ParameterPoint theta = random_point(rng, dim);

    // Positive scaling for the relu family.
    const model::ActivationSpec relu = model::make_relu();
    const double alpha = 0.1 + 5.0 * rng.next_unit();
    model::ParameterPoint scaled;
    scaled.w = alpha * theta.w;
    scaled.b = alpha * theta.b;
    scaled.a = theta.a / alpha;
    EXPECT_TRUE(points_equal(quotient::canonicalize(theta, relu),
                             quotient::canonicalize(scaled, relu), 1e-10))
        << "relu scaling orbit split at trial " << trial;

    // Sign flip for tanh.
    const model::ActivationSpec th = model::make_tanh();
    model::ParameterPoint flipped;
    flipped.w = -theta.w;
    flipped.b = -theta.b;
    flipped.a = -theta.a;
    EXPECT_TRUE(points_equal(quotient::canonicalize(theta, th),
                             quotient::canonicalize(flipped, th), 1e-10))
        << "tanh flip orbit split at trial " << trial;

    // Full homogeneity (both signs) for monomials.
    for (int degree : {2, 3}) {
      const model::ActivationSpec mono = model::make_monomial(degree);
      const double beta =
          (rng.next_unit() < 0.5 ? -1.0 : 1.0) * (0.2 + 3.0 * rng.next_unit());
      model::ParameterPoint hom;
      hom.w = beta * theta.w;
      hom.b = beta * theta.b;
      hom.a = theta.a * std::pow(beta, -degree);
      EXPECT_TRUE(points_equal(quotient::canonicalize(theta, mono),
                               quotient::canonicalize(hom, mono), 1e-10))
          << "monomial(" << degree << ") orbit split at trial " << trial
          << " with scale " << beta;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(Canonicalize, DeadNeuronsCollapse) {
  const model::ActivationSpec relu = model::make_relu();
  model::ParameterPoint zero_out;
  zero_out.w = Vector::Constant(2, 1.5);
  zero_out.b = -0.5;
  zero_out.a = 0.0;  // zero output weight: feature vanishes
  const model::ParameterPoint rep = quotient::canonicalize(zero_out, relu);
  EXPECT_TRUE(rep.w.isZero(0.0));
  EXPECT_EQ(rep.b, 0.0);
  EXPECT_EQ(rep.a, 0.0);

  model::ParameterPoint zero_in;
  zero_in.w = Vector::Zero(2);
  zero_in.b = 0.0;
  zero_in.a = 3.0;  // σ(0) = 0: feature vanishes identically
  const model::ParameterPoint rep2 = quotient::canonicalize(zero_in, relu);
  EXPECT_EQ(rep2.a, 0.0);
}

TEST(Canonicalize, CenteredSigmoidKeepsNondegeneratePoints) {
  const model::ActivationSpec cs = model::make_centered_sigmoid();
  model::ParameterPoint p;
  p.w = Vector::Constant(2, -0.7);
  p.b = 2.0;
  p.a = -1.0;
  const model::ParameterPoint rep = quotient::canonicalize(p, cs);
  EXPECT_TRUE(points_equal(p, rep, 0.0))
      << "no symmetry is declared for the centered sigmoid";
}

// ---------------------------------------------------------------------------
// Atom lists
// ---------------------------------------------------------------------------

quotient::AtomList random_list(CounterRng& rng, const model::ActivationSpec& spec,
                               int n_atoms, Index dim) {
  quotient::AtomList list;
  list.activation = spec;
  for (int k = 0; k < n_atoms; ++k) {
    quotient::Atom atom;
    atom.weight = 0.2 + rng.next_unit();
    atom.point = random_point(rng, dim);
    list.atoms.push_back(atom);
  }
  return list;
}

// Applies a random symmetry element of the activation's group to every
// atom and shuffles the list order.
quotient::AtomList disguised_copy(const quotient::AtomList& list,
                                  CounterRng& rng) {
  quotient::AtomList out = list;
  for (auto& atom : out.atoms) {
    switch (list.activation.kind) {
      case model::ActivationKind::Relu:
      case model::ActivationKind::LeakyRelu: {
        const double alpha = 0.3 + 4.0 * rng.next_unit();
        atom.point.w *= alpha;
        atom.point.b *= alpha;
        atom.point.a /= alpha;
        break;
      }
      case model::ActivationKind::Tanh: {
        if (rng.next_unit() < 0.5) {
          atom.point.w = -atom.point.w;
          atom.point.b = -atom.point.b;
          atom.point.a = -atom.point.a;
        }
        break;
      }
      case model::ActivationKind::Monomial: {
        const double beta = (rng.next_unit() < 0.5 ? -1.0 : 1.0) *
                            (0.3 + 3.0 * rng.next_unit());
        atom.point.w *= beta;
        atom.point.b *= beta;
        atom.point.a *= std::pow(beta, -list.activation.monomial_degree);
        break;
      }
      case model::ActivationKind::CenteredSigmoid:
        break;
    }
  }
  std::reverse(out.atoms.begin(), out.atoms.end());
  return out;
}

TEST(CanonicalAtoms, MergesOrbitDuplicatesAndDropsDeadMass) {
  const model::ActivationSpec relu = model::make_relu();
  quotient::AtomList list;
  list.activation = relu;

  quotient::Atom base;
  base.weight = 1.0;
  base.point.w = Vector(2);
  base.point.w << 3.0, 4.0;
  base.point.b = 0.0;
  base.point.a = 2.0;
  list.atoms.push_back(base);

  quotient::Atom rescaled = base;  // same orbit, scaled by 1/5
  rescaled.weight = 0.5;
  rescaled.point.w /= 5.0;
  rescaled.point.a *= 5.0;
  list.atoms.push_back(rescaled);

  quotient::Atom dead;
  dead.weight = 0.25;
  dead.point.w = Vector::Zero(2);
  dead.point.b = 0.0;
  dead.point.a = 1.0;
  list.atoms.push_back(dead);

  const std::vector<quotient::Atom> canon =
      quotient::canonical_atoms(list, 1e-10);
  ASSERT_EQ(canon.size(), 1u)
      << "orbit duplicates should merge and dead atoms should drop";
  EXPECT_NEAR(canon[0].weight, 1.5, 1e-15) << "merged weights must add";
  EXPECT_NEAR(canon[0].point.w.norm(), 1.0, 1e-12);
  EXPECT_NEAR(canon[0].point.a, 10.0, 1e-12) << "a picks up the scale factor";
}

TEST(CanonicalAtoms, OutputIsSorted) {
  CounterRng rng(1005, StreamTag::Scratch, 0, 0);
  const quotient::AtomList list =
      random_list(rng, model::make_tanh(), 12, 2);
  const std::vector<quotient::Atom> canon =
      quotient::canonical_atoms(list, 1e-10);
  for (std::size_t k = 1; k < canon.size(); ++k) {
    // Lexicographic on (w, b, a): adjacent atoms must not be reversed.
    const auto& prev = canon[k - 1].point;
    const auto& cur = canon[k].point;
    bool less_or_equal = true;
    for (Index j = 0; j < prev.w.size(); ++j) {
      if (prev.w[j] != cur.w[j]) {
        less_or_equal = prev.w[j] < cur.w[j];
        break;
      }
    }
    EXPECT_TRUE(less_or_equal) << "atoms out of order at position " << k;
  }
}

TEST(Equivalence, DisguisedCopiesAreEquivalentAndComputeTheSameFunction) {
  CounterRng rng(1006, StreamTag::Scratch, 0, 0);
  const std::vector<model::ActivationSpec> specs = {
      model::make_relu(), model::make_tanh(), model::make_monomial(3)};
  for (int trial = 0; trial < 100; ++trial) {
    const auto& spec = specs[std::size_t(trial) % specs.size()];
    const quotient::AtomList a = random_list(rng, spec, 4, 2);
    const quotient::AtomList b = disguised_copy(a, rng);
    EXPECT_TRUE(quotient::equivalent_mod_gfin(a, b, 1e-10))
        << spec.name() << " trial " << trial
        << ": group-transformed copy not recognized";
    EXPECT_TRUE(
        quotient::function_equality_check(a, b, spec, 2000, 1e-6, 55))
        << spec.name() << " trial " << trial
        << ": equivalent lists disagree in L2";
  }
}

TEST(Equivalence, DetectsGenuineDifferences) {
  CounterRng rng(1007, StreamTag::Scratch, 0, 0);
  const model::ActivationSpec spec = model::make_relu();
  const quotient::AtomList a = random_list(rng, spec, 3, 2);

  quotient::AtomList heavier = a;
  heavier.atoms[0].weight += 0.5;
  EXPECT_FALSE(quotient::equivalent_mod_gfin(a, heavier, 1e-10))
      << "weight change must break equivalence";

  quotient::AtomList moved = a;
  moved.atoms[1].point.b += 1.0;
  EXPECT_FALSE(quotient::equivalent_mod_gfin(a, moved, 1e-10))
      << "moving an atom must break equivalence";
  EXPECT_FALSE(
      quotient::function_equality_check(a, moved, spec, 2000, 1e-6, 56))
      << "a moved relu atom changes the function";
}

TEST(Equivalence, ActivationMismatchIsRejected) {
  CounterRng rng(1008, StreamTag::Scratch, 0, 0);
  quotient::AtomList a = random_list(rng, model::make_monomial(2), 2, 2);
  quotient::AtomList b = a;
  b.activation = model::make_monomial(3);
  // Lists over different symmetry groups are not comparable.
  EXPECT_THROW(quotient::equivalent_mod_gfin(a, b, 1e-10),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Invariant table and covering numbers
// ---------------------------------------------------------------------------

TEST(StatisticalFactor, DirectSubstitution) {
  EXPECT_EQ(quotient::statistical_factor(1, 1), 2);
  EXPECT_EQ(quotient::statistical_factor(1, 0), 3);
  EXPECT_EQ(quotient::statistical_factor(5, 1), 6);
}

TEST(InvariantTable, CarriesTheSixCanonicalRows) {
  const std::vector<quotient::InvariantRow> rows = quotient::invariant_table();
  ASSERT_EQ(rows.size(), 6u);

  // Hinge atoms synthesizing a linear target: one orbit dimension,
  // per-atom statistical factor 1+2-1 = 2, no residual.
  EXPECT_EQ(rows[0].activation, "relu");
  EXPECT_EQ(rows[0].target, "linear");
  EXPECT_EQ(rows[0].d_eff, "1");
  EXPECT_EQ(rows[0].d_orb, 1);
  EXPECT_FALSE(rows[0].d_orb_convention);
  EXPECT_EQ(rows[0].s_star, "2");
  EXPECT_EQ(rows[0].residual, quotient::ResidualKind::Zero);
  EXPECT_EQ(rows[0].stat_factor, "2");

  // Saturating activations have no continuous orbit (flip only).
  EXPECT_EQ(rows[2].activation, "tanh");
  EXPECT_EQ(rows[2].d_orb, 0);
  EXPECT_EQ(rows[2].residual, quotient::ResidualKind::ExpSmall);

  // Monomial rows declare their orbit dimension as a convention and
  // split on whether the degree is realizable.
  EXPECT_TRUE(rows[3].d_orb_convention);
  EXPECT_EQ(rows[3].residual, quotient::ResidualKind::Zero);
  EXPECT_EQ(rows[4].s_star, "infinite");
  EXPECT_EQ(rows[4].residual, quotient::ResidualKind::TargetNorm);

  for (const auto& row : rows) {
    EXPECT_GE(row.d_orb, 0);
    EXPECT_LE(row.d_orb, 1) << "orbit dimensions here are 0 or 1";
    EXPECT_FALSE(row.stat_factor.empty());
  }
}

TEST(CoveringLog, MatchesDirectSubstitution) {
  CounterRng rng(1009, StreamTag::Scratch, 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const double eps = 1e-4 + rng.next_unit();
    const double s = 1.0 + 20.0 * rng.next_unit();
    const int d_eff = 1 + int(rng.next_u64() % 5);
    const int d_orb = int(rng.next_u64() % 2);
    const double radius = 0.5 + 3.0 * rng.next_unit();
    const int q = 1 + int(rng.next_u64() % 3);
    const double big_c = 0.5 + 2.0 * rng.next_unit();
    const double scale = big_c * std::pow(radius, q + 1);
    const double expected =
        eps >= scale
            ? 0.0
            : big_c * s * double(d_eff + 2 - d_orb) * std::log(scale / eps);
    EXPECT_NEAR(quotient::covering_log(eps, s, d_eff, d_orb, radius, q, big_c),
                expected, 1e-12 * std::max(1.0, expected))
        << "trial " << trial;
  }
}

TEST(CoveringLog, ClampsAndValidates) {
  // ε as large as C·R^{q+1} needs a single covering element.
  EXPECT_DOUBLE_EQ(quotient::covering_log(2.0, 3.0, 1, 1, 1.0, 1, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(quotient::covering_log(5.0, 3.0, 1, 1, 1.0, 1, 2.0), 0.0);
  EXPECT_GT(quotient::covering_log(0.1, 3.0, 1, 1, 1.0, 1, 2.0), 0.0);
  EXPECT_THROW(quotient::covering_log(0.0, 1.0, 1, 0, 1.0, 1, 1.0),
               std::invalid_argument);
  EXPECT_THROW(quotient::covering_log(0.1, -1.0, 1, 0, 1.0, 1, 1.0),
               std::invalid_argument);
}

}  // namespace
