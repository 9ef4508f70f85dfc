#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fwmnet;

namespace {

EigenmodeBasis<double> modes_of(const CascadeTopology& t) { return decompose(covariance(build_cascade(t))); }

double eta_b3(double G1, double G2) {
  const double p = G1 * G1 * G2 * G2;
  return -1 + 2 * p - 2 * std::sqrt(p * (p - 1));
}

}  // namespace

TEST(Decompose, SingleCellTwinBeamModes) {
  for (double G : {1.1, 1.2, 2.0, 5.0}) {
    const double g = std::sqrt(G * G - 1);
    const auto basis = decompose(covariance(fwm_transform(Gain(G))));
    EXPECT_NEAR(basis.eta(0), (G + g) * (G + g), 1e-10 * (G + g) * (G + g));
    EXPECT_NEAR(basis.eta(1), (G - g) * (G - g), 1e-12);
    const double h = std::sqrt(0.5);
    EXPECT_NEAR(basis.u0(0, 0), h, 1e-12);
    EXPECT_NEAR(basis.u0(1, 0), h, 1e-12);
    // Tie in magnitude: the first entry is made positive.
    EXPECT_NEAR(basis.u0(0, 1), h, 1e-12);
    EXPECT_NEAR(basis.u0(1, 1), -h, 1e-12);
  }
}

TEST(Decompose, Chain2SpectrumAtTypicalGain) {
  const auto basis = modes_of(CascadeTopology::chain2(Gain(1.2), Gain(1.2)));
  EXPECT_NEAR(basis.eta(0), 6.13130, 1e-5);
  EXPECT_NEAR(basis.eta(1), 1.0, 1e-12);
  EXPECT_NEAR(basis.eta(2), 0.16310, 1e-5);
  EXPECT_NEAR(basis.eta(0) * basis.eta(2), 1.0, 1e-12);
  EXPECT_NEAR(squeezing_db(basis.eta(2)), -7.8755, 1e-3);
}

TEST(Decompose, Chain2ClosedFormAtRandomGains) {
  Xoshiro256 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const double G1 = rng.uniform(1.0, 3.0), G2 = rng.uniform(1.0, 3.0);
    const auto basis = modes_of(CascadeTopology::chain2(Gain(G1), Gain(G2)));
    EXPECT_NEAR(basis.eta(2), eta_b3(G1, G2), 1e-9);
    EXPECT_NEAR(basis.eta(1), 1.0, 1e-9);
    EXPECT_NEAR(basis.eta(0), 1.0 / eta_b3(G1, G2), 1e-9);
  }
}

TEST(Decompose, IdentityCovarianceIsAllVacuum) {
  CovarianceMatrix<double> c{RealMatrix::Identity(3, 3), RealMatrix::Identity(3, 3), {"a", "b", "c"}};
  const auto basis = decompose(c);
  EXPECT_LE(max_abs(RealVector(basis.eta - RealVector::Ones(3))), 1e-15);
  EXPECT_LE(identity_deviation(basis.u0), 1e-15);
  EXPECT_EQ(classify_modes(basis).vacuum_count(), 3u);
}

TEST(Decompose, DegenerateSubspaceIsCanonical) {
  // Two copies of the same twin-beam pair give doubly degenerate eigenvalues.
  RealMatrix cxx = RealMatrix::Zero(4, 4);
  const auto single = covariance(fwm_transform(Gain(1.5)));
  cxx.block(0, 0, 2, 2) = single.cxx;
  cxx.block(2, 2, 2, 2) = single.cxx;
  const RealMatrix cpp = cxx.inverse();
  const auto a = decompose(CovarianceMatrix<double>{cxx, cpp, {"a", "b", "c", "d"}});
  // Relabelling by a permutation of the pairs must give the same canonical basis up to row order.
  EXPECT_LE(orthogonality_deviation(a.u0), 1e-12);
  EXPECT_NEAR(a.eta(0), a.eta(1), 1e-12);
  // Canonical form: first vector of the degenerate pair has no weight on the second pair.
  EXPECT_NEAR(a.u0(2, 0), 0.0, 1e-12);
  EXPECT_NEAR(a.u0(3, 0), 0.0, 1e-12);
  EXPECT_LE(reconstruction_deviation(a, cxx), 1e-12);
}

TEST(Decompose, ReconstructsAndPairsForRandomCascades) {
  Xoshiro256 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    const auto topo = fwmnet::testing::random_topology(rng, 5, 1.0, 2.0);
    const auto c = covariance(build_cascade(topo));
    const auto basis = decompose(c);
    EXPECT_LE(orthogonality_deviation(basis.u0), 1e-12);
    const double scale = c.cxx.cwiseAbs().maxCoeff();
    EXPECT_LE(reconstruction_deviation(basis, c.cxx), 1e-11 * scale);
    EXPECT_LE(pure_pairing_deviation(basis, c), 1e-8 * scale);
    for (Eigen::Index k = 1; k < basis.eta.size(); ++k) EXPECT_GE(basis.eta(k - 1), basis.eta(k));
  }
}

TEST(Decompose, MixedStateUsesAmplitudeBlockOnly) {
  RealMatrix cxx(2, 2);
  cxx << 3.0, 1.0, 1.0, 3.0;
  const auto basis = decompose(CovarianceMatrix<double>{cxx, RealMatrix::Identity(2, 2) * 2.0, {"a", "b"}});
  EXPECT_NEAR(basis.eta(0), 4.0, 1e-12);
  EXPECT_NEAR(basis.eta(1), 2.0, 1e-12);
}

TEST(Decompose, RejectsBadMatrices) {
  RealMatrix asym(2, 2);
  asym << 2.0, 0.5, 0.4, 2.0;
  EXPECT_THROW(decompose(CovarianceMatrix<double>{asym, RealMatrix(), {"a", "b"}}), ValidationError);
  RealMatrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(decompose(CovarianceMatrix<double>{indefinite, RealMatrix(), {"a", "b"}}), ValidationError);
}

TEST(Decompose, SpectrumIsClosedUnderInversion) {
  Xoshiro256 rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const auto basis = modes_of(fwmnet::testing::random_topology(rng, 5, 1.0, 2.0));
    const Eigen::Index n = basis.eta.size();
    for (Eigen::Index k = 0; k < n; ++k) EXPECT_NEAR(basis.eta(k) * basis.eta(n - 1 - k), 1.0, 1e-9);
  }
}

// Inversion symmetry forces the number of unit eigenvalues to share the
// parity of the mode count: chains with an even number of cells have exactly
// one vacuum mode, chains with an odd number have none (generic gains).
TEST(Decompose, VacuumModeCountAlongChains) {
  Xoshiro256 rng(5);
  for (int cells = 2; cells <= 6; ++cells) {
    std::vector<Gain> gains;
    for (int k = 0; k < cells; ++k) gains.emplace_back(rng.uniform(1.05, 2.5));
    const auto basis = modes_of(CascadeTopology::chain(gains));
    int unit = 0;
    for (Eigen::Index k = 0; k < basis.eta.size(); ++k) unit += std::abs(basis.eta(k) - 1.0) < 1e-8;
    EXPECT_EQ(unit, cells % 2 == 0 ? 1 : 0) << cells << " cells";
    EXPECT_EQ(classify_modes(basis).vacuum_count(), static_cast<std::size_t>(unit));
  }
}

TEST(Decompose, Chain2VacuumModeTendsToFirstSignal) {
  const auto basis = modes_of(CascadeTopology::chain2(Gain(10.0), Gain(10.0)));
  const RealVector vac = basis.u0.col(1);
  EXPECT_GT(std::abs(vac(0)), 0.99);
  EXPECT_LT(std::abs(vac(1)), 1e-12);  // no weight on i2 at any gain
  const auto low = modes_of(CascadeTopology::chain2(Gain(1.2), Gain(1.2)));
  EXPECT_LT(std::abs(low.u0(1, 1)), 1e-12);
  EXPECT_LT(std::abs(low.u0(0, 1)), std::abs(vac(0)));
}

TEST(Decompose, Tree3ModesBecomeSymmetricAtHighGain) {
  const auto basis = modes_of(CascadeTopology::tree3(Gain(10.0)));
  EXPECT_LE((basis.u0.cwiseAbs().array() - 0.5).abs().maxCoeff(), 0.01);
}

TEST(Classify, Tree3DecibelLevels) {
  const auto cls = classify_modes(modes_of(CascadeTopology::tree3(Gain(1.2))));
  const std::vector<double> expected{9.0, 3.6, -3.6, -9.0};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(cls.squeezing_db[k], expected[k], 0.05);
  EXPECT_EQ(cls.tags[0], ModeTag::antisqueezed);
  EXPECT_EQ(cls.tags[3], ModeTag::squeezed);
  EXPECT_EQ(cls.vacuum_count(), 0u);
}

TEST(Classify, DecibelsAndErrors) {
  EXPECT_NEAR(squeezing_db(0.5), -3.0103, 1e-4);
  EXPECT_DOUBLE_EQ(squeezing_db(1.0), 0.0);
  EXPECT_THROW(squeezing_db(0.0), DomainError);
  EXPECT_THROW(squeezing_db(-1.0), DomainError);
  const auto basis = modes_of(CascadeTopology::chain2(Gain(1.2), Gain(1.2)));
  EXPECT_THROW(classify_modes(basis, 0.0), DomainError);
  EXPECT_THROW(classify_modes(basis, 0.5), DomainError);
  EXPECT_STREQ(to_string(ModeTag::vacuum), "vacuum");
}
