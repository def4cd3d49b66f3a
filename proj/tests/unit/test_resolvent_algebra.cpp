#include <cmath>

#include "core/algebra.hpp"
#include "doctest.h"

using namespace pointdyn;

TEST_CASE("symplectic form") {
  CHECK(sigma({1, 0}, {0, 1}) == 1.0);
  CHECK(sigma({0, 1}, {1, 0}) == -1.0);
  CHECK(sigma({2, 3}, {2, 3}) == 0.0);
  // [Q, P] = i sigma on smooth states
  const auto g = make_grid(128, 16.0);
  const Matrix q = position_operator(g), p = momentum_operator(g);
  const auto probes = gaussian_probes(g, 3, 1);
  for (const auto& s : probes) {
    const Vector v = s.weighted();
    CHECK(((q * p - p * q) * v - cplx(0.0, 1.0) * v).norm() < 1e-8);
  }
}

TEST_CASE("phase operator is Hermitian and linear") {
  const auto g = make_grid(32, 4.0);
  const Matrix a = build_phase_operator({1.0, 0.5}, g);
  CHECK((a - a.adjoint()).norm() < 1e-14);
  const Matrix b = build_phase_operator({1.0, 0.0}, g) + 0.5 * build_phase_operator({0.0, 1.0}, g);
  CHECK((a - b).norm() < 1e-12);
}

TEST_CASE("resolvent construction") {
  const auto g = make_grid(32, 4.0);
  const RepResolvent r = build_resolvent(2.0, {1.0, 1.0}, g);
  CHECK(r.norm <= 0.5 + 1e-12);
  CHECK(r.min_singular > 0.0);
  CHECK_THROWS_AS(build_resolvent(0.0, {1.0, 0.0}, g), Error);
  const RepResolvent zero = build_resolvent(4.0, {0.0, 0.0}, g);
  CHECK((zero.matrix + cplx(0.0, 0.25) * Matrix::Identity(32, 32)).norm() < 1e-15);
}

TEST_CASE("relations 1-4 in operator norm") {
  const auto g = make_grid(64, 8.0);
  RelationParams p;
  p.lambda = 1.0;
  p.mu = 2.0;
  p.f = {1.0, 0.5};
  const auto probes = gaussian_probes(g, 4, 3);
  for (int k = 1; k <= 4; ++k) {
    const RelationResult r = check_relation(k, p, g, probes);
    CHECK_FALSE(r.weak);
    CHECK(r.residual <= 1e-10);
    CHECK(r.passed);
  }
  CHECK_THROWS_AS(check_relation(7, p, g, probes), Error);
}

TEST_CASE("relations 5 and 6 on probes") {
  // at p_max 8 the cutoff alone leaves ~1e-3; p_max 16 is well clear of it
  const auto g = make_grid(256, 16.0);
  RelationParams p;
  const auto probes = gaussian_probes(g, 6, 9);
  for (int k : {5, 6}) {
    const RelationResult r = check_relation(k, p, g, probes);
    CHECK(r.weak);
    CHECK(r.threshold == 1e-3);
    CHECK(r.residual <= 1e-3);
  }
  RelationParams opposite;
  opposite.mu = -opposite.lambda;
  CHECK_THROWS_AS(check_relation(6, opposite, g, probes), Error);
}

TEST_CASE("probe generation is seeded") {
  const auto g = make_grid(64, 8.0);
  const auto a = gaussian_probes(g, 4, 17), b = gaussian_probes(g, 4, 17), c = gaussian_probes(g, 4, 18);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i].amplitudes == b[i].amplitudes);
    CHECK(a[i].norm() == doctest::Approx(1.0));
  }
  CHECK(a[0].amplitudes != c[0].amplitudes);
}

TEST_CASE("refinement reports halving") {
  RelationParams p;
  const RefinementResult r = relation_refinement(5, p, make_grid(64, 8.0), 4, 5);
  CHECK(r.fine.residual <= r.coarse.residual);
  CHECK(r.halved == (r.fine.residual <= 0.5 * r.coarse.residual || r.fine.residual <= 1e-8));
}

TEST_CASE("phase operator reconstruction") {
  const auto g = make_grid(64, 8.0);
  for (PhaseVector f : {PhaseVector{1.0, 0.0}, PhaseVector{0.0, 1.0}, PhaseVector{0.3, -0.7}}) {
    const Matrix phi = build_phase_operator(f, g);
    CHECK(spectral_norm(reconstruct_phi(build_resolvent(1.0, f, g)) - phi) < 1e-8);
    CHECK(spectral_norm(reconstruct_phi_at(build_resolvent(-2.5, f, g)) - phi) < 1e-8);
  }
  CHECK_THROWS_AS(reconstruct_phi(build_resolvent(2.0, {1.0, 0.0}, g)), Error);
}

TEST_CASE("Weyl operators") {
  const auto g = make_grid(64, 8.0);
  const Matrix w = weyl_bridge({0.5, 0.25}, g);
  CHECK((w.adjoint() * w - Matrix::Identity(64, 64)).norm() < 1e-10);
  // e^{i a Q} is diagonal multiplication by e^{i a x}
  const Matrix wq = weyl_bridge({0.7, 0.0}, g);
  const RealVector x = g.positions();
  for (int j = 0; j < 64; ++j) CHECK(std::abs(wq(j, j) - std::exp(cplx(0.0, 0.7 * x(j)))) < 1e-12);
  CHECK(weyl_laplace_deviation({1.0, 0.0}, g) < 1e-4);
  CHECK(weyl_laplace_deviation({0.5, 1.0}, g) < 1e-4);
}
