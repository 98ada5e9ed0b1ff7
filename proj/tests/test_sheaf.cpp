#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles/cohomology_oracle.hpp"
#include "qsheaf/corpus.hpp"
#include "qsheaf/sheaf.hpp"
#include "test_support.hpp"

using namespace qsheaf;
using namespace testing_support;

TEST(Graph, RejectsDuplicateAndDanglingEdges) {
  SemanticGraph g;
  g.add_vertex({"a", 1});
  EXPECT_THROW(g.add_vertex({"a", 1}), Error);
  EXPECT_THROW(g.add_vertex({"z", 0}), Error);
  EXPECT_THROW(g.add_edge({"e", "a", "missing"}), Error);
}

TEST(Sheaf, RejectsChannelWithWrongDimensions) {
  SemanticGraph g;
  g.add_vertex({"a", 2});
  g.add_vertex({"b", 3});
  g.add_edge({"ab", "a", "b"});
  EXPECT_THROW(QuantumSemanticSheaf(g, {{"ab", identity_channel(2)}}), Error);
}

TEST(Sheaf, RejectsNonCptpChannelNamingTheEdge) {
  SemanticGraph g;
  g.add_vertex({"a", 2});
  g.add_vertex({"b", 2});
  g.add_edge({"ab", "a", "b"});
  try {
    QuantumSemanticSheaf s(g, {{"ab", QuantumChannel({0.5 * ComplexMatrix::Identity(2, 2)})}});
    FAIL() << "expected a validation error";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::Validation);
    EXPECT_NE(std::string(e.what()).find("'ab'"), std::string::npos);
  }
}

TEST(Coboundary, SingleScalarEdge) {
  const ComplexMatrix d0 = build_coboundary(single_edge(1, identity_channel(1)));
  ASSERT_EQ(d0.rows(), 1);
  ASSERT_EQ(d0.cols(), 2);
  EXPECT_EQ(d0(0, 0), Complex(1.0));
  EXPECT_EQ(d0(0, 1), Complex(-1.0));
}

TEST(Coboundary, TriangleIsSignedIncidence) {
  const ComplexMatrix d0 = build_coboundary(triangle());
  Eigen::Matrix3d expected;
  expected << 1, -1, 0, 0, 1, -1, -1, 0, 1;
  EXPECT_LT(max_norm(d0 - expected.cast<Complex>()), 1e-15);
}

TEST(Coboundary, FullyDepolarizingSourceBlock) {
  const ComplexMatrix d0 = build_coboundary(single_edge(2, depolarizing_channel(2, 1.0)));
  // ρ ↦ Tr(ρ)·I/2 in row-major vectorization: rows (0,0) and (1,1) read the
  // diagonal entries (indices 0 and 3) with weight 1/2.
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  for (int r : {0, 3})
    for (int c : {0, 3}) expected(r, c) = 0.5;
  EXPECT_LT(max_norm(d0.leftCols(4) - expected), 1e-15);
  EXPECT_LT(max_norm(d0.rightCols(4) + ComplexMatrix::Identity(4, 4)), 1e-15);
  EXPECT_EQ(numerical_rank(d0.leftCols(4)), 1u);
}

TEST(Coboundary, MatrixAgreesWithBlockwiseApplication) {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    const QuantumSemanticSheaf s = random_sheaf(rng);
    const Cochain0 sigma = random_cochain0(s, rng);
    const ComplexVector lhs = build_coboundary(s) * sigma.vectorize(s);
    EXPECT_LT((lhs - apply_coboundary(s, sigma).vectorize(s)).norm(), 1e-12);
  }
}

TEST(Laplacian, SingleEdge) {
  const ComplexMatrix l = sheaf_laplacian(build_coboundary(single_edge(1, identity_channel(1))));
  Eigen::Matrix2d expected;
  expected << 1, -1, -1, 1;
  EXPECT_LT(max_norm(l - expected.cast<Complex>()), 1e-15);
}

TEST(Laplacian, TriangleIsCycleLaplacian) {
  const ComplexMatrix l = sheaf_laplacian(build_coboundary(triangle()));
  Eigen::Matrix3d expected;
  expected << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  EXPECT_LT(max_norm(l - expected.cast<Complex>()), 1e-15);
}

TEST(Laplacian, PositiveSemidefinite) {
  Rng rng(22);
  for (int t = 0; t < 20; ++t) {
    const RealVector ev = hermitian_eigenvalues(sheaf_laplacian(build_coboundary(random_sheaf(rng))));
    EXPECT_GE(ev.minCoeff(), -1e-10);
  }
}

TEST(Laplacian, KernelAgreesWithCoboundaryKernel) {
  Rng rng(23);
  for (int t = 0; t < 50; ++t) {
    const QuantumSemanticSheaf s = random_sheaf(rng);
    const ComplexMatrix d0 = build_coboundary(s);
    const ComplexMatrix kl = null_space(sheaf_laplacian(d0));
    const ComplexMatrix kd = null_space(d0);
    ASSERT_EQ(kl.cols(), kd.cols());
    for (Eigen::Index j = 0; j < kl.cols(); ++j) EXPECT_LE((d0 * kl.col(j)).norm(), 1e-8);
    for (Eigen::Index j = 0; j < kd.cols(); ++j) EXPECT_LE((sheaf_laplacian(d0) * kd.col(j)).norm(), 1e-8);
  }
}

TEST(SpectralGap, Examples) {
  EXPECT_NEAR(spectral_gap(sheaf_laplacian(build_coboundary(triangle()))), 3.0, 1e-12);
  EXPECT_NEAR(spectral_gap(sheaf_laplacian(build_coboundary(single_edge(1, identity_channel(1))))), 2.0, 1e-12);
  EXPECT_EQ(spectral_gap(ComplexMatrix::Zero(3, 3)), 0.0);
}

TEST(Cohomology, PathGraph) {
  const CohomologyReport r = cohomology(path3());
  EXPECT_EQ(r.dim_h0, 1u);
  EXPECT_EQ(r.dim_h1, 0u);
}

TEST(Cohomology, TriangleGraphMode) {
  const CohomologyReport r = cohomology(triangle());
  EXPECT_EQ(r.rank_delta0, 2u);
  EXPECT_EQ(r.dim_h0, 1u);
  EXPECT_EQ(r.dim_h1, 1u);
  EXPECT_NEAR(r.spectral_gap, 3.0, 1e-9);
}

TEST(Cohomology, TriangleWithCell) {
  const CohomologyReport r = cohomology(triangle(), triangle_cell());
  EXPECT_TRUE(r.with_cells);
  EXPECT_EQ(r.dim_ker_delta1, 2u);
  EXPECT_EQ(r.dim_h1, 0u);
}

TEST(Cohomology, RankNullityAndEulerIdentity) {
  Rng rng(24);
  for (int t = 0; t < 40; ++t) {
    const QuantumSemanticSheaf s = random_sheaf(rng);
    const CohomologyReport r = cohomology(s);
    EXPECT_EQ(r.dim_h0 + r.rank_delta0, r.dim_c0);
    bool invertible = true;
    for (std::size_t e = 0; e < s.num_edges(); ++e) {
      const ComplexMatrix &sup = s.superoperator(e);
      invertible = invertible && numerical_rank(sup) == static_cast<std::size_t>(sup.rows());
    }
    if (invertible)
      EXPECT_EQ(static_cast<long>(r.dim_h1) - static_cast<long>(r.dim_h0),
                static_cast<long>(r.dim_c1) - static_cast<long>(r.dim_c0));
  }
}

TEST(Cohomology, TreesWithUnitaryChannelsHaveNoObstruction) {
  Rng rng(25);
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<std::size_t> nv(2, 6), dd(1, 3);
    const std::size_t n = nv(rng), d = dd(rng);
    SemanticGraph g;
    for (std::size_t i = 0; i < n; ++i) g.add_vertex({"v" + std::to_string(i), d});
    std::map<std::string, QuantumChannel> ch;
    for (std::size_t i = 1; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> parent(0, i - 1);
      const std::string id = "e" + std::to_string(i);
      g.add_edge({id, "v" + std::to_string(parent(rng)), "v" + std::to_string(i)});
      ch.emplace(id, unitary_channel(haar_unitary(d, rng)));
    }
    EXPECT_EQ(cohomology(QuantumSemanticSheaf(g, ch)).dim_h1, 0u);
  }
}

TEST(Cohomology, MatchesRationalOracleInGraphMode) {
  std::mt19937_64 rng(26);
  for (int t = 0; t < 30; ++t) {
    const oracle::ExactSheaf es = oracle::random_exact_sheaf(rng, false);
    const oracle::ExactCohomology exact = oracle::exact_cohomology(es);
    const CohomologyReport r = cohomology(oracle::to_library(es));
    ASSERT_LE(r.dim_c0, 12u);
    ASSERT_LE(r.dim_c1, 12u);
    EXPECT_EQ(r.rank_delta0, exact.rank_delta0) << "instance " << t;
    EXPECT_EQ(r.dim_h1, exact.dim_h1) << "instance " << t;
  }
}

TEST(Cohomology, MatchesRationalOracleWithCells) {
  std::mt19937_64 rng(27);
  for (int t = 0; t < 12; ++t) {
    const oracle::ExactSheaf es = oracle::random_exact_sheaf(rng, true);
    const oracle::ExactCohomology exact = oracle::exact_cohomology(es);
    const CohomologyReport r = cohomology(oracle::to_library(es), oracle::library_cells(es));
    EXPECT_EQ(r.dim_ker_delta1, exact.dim_ker_delta1) << "instance " << t;
    EXPECT_EQ(r.dim_h1, exact.dim_h1) << "instance " << t;
  }
}

TEST(Delta1, TriangleRow) {
  const ComplexMatrix d1 = build_delta1(triangle(), triangle_cell());
  ASSERT_EQ(d1.rows(), 1);
  ASSERT_EQ(d1.cols(), 3);
  EXPECT_LT(max_norm(d1 - ComplexMatrix::Ones(1, 3)), 1e-15);
}

TEST(Delta1, ComposesToZeroWithDelta0) {
  EXPECT_LE(max_norm(build_delta1(triangle(), triangle_cell()) * build_coboundary(triangle())), 1e-9);
  const auto sq = pauli_square();
  EXPECT_LE(max_norm(build_delta1(sq, square_cell()) * build_coboundary(sq)), 1e-9);

  Rng rng(28);
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<std::size_t> dd(1, 3);
    const std::size_t d = dd(rng);
    const auto s = uniform_sheaf({"A", "B", "C"}, {{"A", "B"}, {"B", "C"}, {"A", "C"}}, d,
                                 {unitary_channel(haar_unitary(d, rng)), unitary_channel(haar_unitary(d, rng)),
                                  unitary_channel(haar_unitary(d, rng))});
    const TwoCellComplex cx{{{"f", {{"AB", 1}, {"BC", 1}, {"AC", -1}}}}};
    EXPECT_LE(max_norm(build_delta1(s, cx) * build_coboundary(s)), 1e-9);
  }
}

TEST(Delta1, PauliSquareCarriesConjugationSuperoperator) {
  const auto sq = pauli_square();
  const CellTransport ct = cell_transport(sq, square_cell().cells.front());
  // X⊗conj(X) written out: swaps index pairs (i,j) ↔ (1−i,1−j).
  ComplexMatrix xx = ComplexMatrix::Zero(4, 4);
  xx(0, 3) = xx(3, 0) = xx(1, 2) = xx(2, 1) = 1.0;
  EXPECT_LT(max_norm(ct.transports.front() - xx), 1e-15);
  EXPECT_LT(max_norm(ct.holonomy - xx), 1e-15);

  const ComplexMatrix d1 = build_delta1(sq, square_cell());
  EXPECT_LT(max_norm(d1.block(0, 0, 4, 4) - ct.fixed_projector * xx), 1e-15);
  // Fixed operators of X-conjugation are span{I, X}.
  EXPECT_EQ(numerical_rank(ct.fixed_projector), 2u);
}

TEST(Delta1, MalformedAndUnsupportedCells) {
  const auto tri = triangle();
  try {
    build_delta1(tri, {{{"bad", {{"AB", 1}, {"nope", 1}}}}});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedCell);
  }
  try {
    build_delta1(tri, {{{"open", {{"AB", 1}, {"BC", 1}}}}});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedCell);
  }
  const auto dep = uniform_sheaf({"A", "B"}, {{"A", "B"}, {"B", "A"}}, 2,
                                 {depolarizing_channel(2, 0.5), identity_channel(2)});
  try {
    build_delta1(dep, {{{"loop", {{"AB", 1}, {"BA", 1}}}}});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedCell);
  }
}

TEST(GlobalSections, IdentityQubitEdge) {
  const auto s = single_edge(2, identity_channel(2));
  const GlobalSections gs = global_sections(s);
  EXPECT_EQ(gs.basis.size(), 4u);
  ASSERT_TRUE(gs.density_feasible.has_value());
  for (const auto &b : gs.density_feasible->blocks) EXPECT_NO_THROW(DensityOperator::make(b, 1e-9));
  EXPECT_LT(max_norm(gs.density_feasible->blocks[0] - gs.density_feasible->blocks[1]), 1e-9);
}

TEST(GlobalSections, TriangleConstants) {
  const GlobalSections gs = global_sections(triangle());
  ASSERT_EQ(gs.basis.size(), 1u);
  const auto &b = gs.basis.front().blocks;
  EXPECT_NEAR(std::abs(b[0](0, 0) - b[1](0, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(b[0](0, 0) - b[2](0, 0)), 0.0, 1e-12);
  ASSERT_TRUE(gs.density_feasible.has_value());
  for (const auto &blk : gs.density_feasible->blocks) EXPECT_NEAR(blk(0, 0).real(), 1.0, 1e-12);
}

TEST(GlobalSections, FullyDepolarizingEdgeTargetsMaximallyMixed) {
  const GlobalSections gs = global_sections(single_edge(2, depolarizing_channel(2, 1.0)));
  ASSERT_TRUE(gs.density_feasible.has_value());
  EXPECT_LT(max_norm(gs.density_feasible->blocks[1] - ComplexMatrix::Identity(2, 2) / 2.0), 1e-9);
}

TEST(LocalSection, Examples) {
  const auto tri = triangle();
  const auto constant = is_local_section(tri, scalar_cochain0({1, 1, 1}), {"A", "B"});
  EXPECT_TRUE(constant.ok);
  EXPECT_NEAR(constant.residuals.at("AB"), 0.0, 1e-15);

  const auto mismatch = is_local_section(tri, scalar_cochain0({0, 1, 0}), {"A", "B"});
  EXPECT_FALSE(mismatch.ok);
  EXPECT_NEAR(mismatch.residuals.at("AB"), 1.0, 1e-15);
  EXPECT_EQ(mismatch.residuals.size(), 1u);

  std::map<std::string, ComplexMatrix> partial{{"A", ComplexMatrix::Ones(1, 1)}};
  try {
    is_local_section(tri, partial, {"A", "B"});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingState);
  }
}

TEST(LocalSection, GlobalSectionBasisPassesOnFullVertexSet) {
  Rng rng(29);
  for (int t = 0; t < 10; ++t) {
    const auto s = random_sheaf(rng);
    std::set<std::string> all;
    for (const auto &v : s.graph().vertices()) all.insert(v.id);
    for (const auto &b : global_sections(s).basis) {
      const auto check = is_local_section(s, b, all);
      EXPECT_TRUE(check.ok);
      for (const auto &[e, r] : check.residuals) EXPECT_LT(r, 1e-8);
    }
  }
}
