#include <vector>
#include <cmath>

#include "core/propagator.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace pointdyn;

using oracle::exact_propagator;

TEST_CASE("fnv-1a reference values") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
  const DeltaConfig c({{1.0, 0.0}});
  CHECK(delta_digest(c) != mollified_digest(c, standard_bump(), 0.1));
  CHECK(mollified_digest(c, standard_bump(), 0.1) != mollified_digest(c, standard_bump(), 0.2));
}

TEST_CASE("grid hamiltonian") {
  const auto g = make_grid(16, 4.0);
  const Matrix h = hamiltonian_matrix(delta_transform(DeltaConfig({{1.0, 0.5}})), g);
  CHECK((h - h.adjoint()).norm() < 1e-14);
  // diag(p^2) + w V~(0) / sqrt(2 pi) on the diagonal
  CHECK(h(3, 3).real() == doctest::Approx(g.nodes()(3) * g.nodes()(3) + 0.5 / (2.0 * M_PI)));
  const Matrix h0 = hamiltonian_matrix(zero_transform(), g);
  CHECK((h0 - Matrix(g.nodes().cwiseAbs2().cast<cplx>().asDiagonal())).norm() == 0.0);
}

TEST_CASE("free propagator is the kinetic phase") {
  const auto g = make_grid(16, 4.0);
  const Propagator u = build_propagator(0.4, zero_transform(), g, {}, Provenance::free, "");
  CHECK((u.matrix - exact_propagator(0.4, zero_transform(), g)).norm() < 1e-13);
  CHECK((u.matrix - free_phase(0.4, g).weighted()).norm() < 1e-13);
}

TEST_CASE("delta propagator against an eigendecomposition") {
  const auto g = make_grid(16, 4.0);
  const DeltaConfig c({{1.0, 0.0}});
  const auto v = delta_transform(c);
  const DysonOptions tight{1e-10, 40, 16};
  for (double t : {0.3, -0.3, 0.05}) {
    const Propagator u = build_delta_propagator(t, c, g, tight);
    CHECK(u.provenance == Provenance::dyson_delta);
    CHECK(spectral_norm(u.matrix - exact_propagator(t, v, g)) < 1e-8);
    CHECK(u.unitarity_defect <= u.declared_tolerance);
  }
  // long times are composed from short pieces
  const Propagator u = build_delta_propagator(6.0, c, g, tight);
  CHECK(u.steps == composition_steps(6.0, v.sup_bound()));
  CHECK(u.steps > 1);
  CHECK(spectral_norm(u.matrix - exact_propagator(6.0, v, g)) < 1e-6);
  // default options, three centers
  const DeltaConfig three({{1.0, -1.0}, {0.5, 0.0}, {1.0, 1.0}});
  const Propagator w = build_delta_propagator(0.25, three, g);
  CHECK(spectral_norm(w.matrix - exact_propagator(0.25, delta_transform(three), g)) < 1e-5);
}

TEST_CASE("mollified propagator and time reversal") {
  const auto g = make_grid(32, 8.0);
  const DeltaConfig c({{-1.0, 0.2}});
  const Propagator a = build_mollified_propagator(0.2, c, standard_bump(), 0.3, g);
  const Propagator b = build_mollified_propagator(-0.2, c, standard_bump(), 0.3, g);
  CHECK(a.provenance == Provenance::dyson_mollified);
  CHECK(spectral_norm(a.matrix * b.matrix - Matrix::Identity(32, 32)) < 1e-5);
  CHECK(spectral_norm(a.matrix -
                      exact_propagator(0.2, mollified_transform(c, standard_bump(), 0.3), g)) <
        1e-5);
  CHECK(a.config_digest != b.config_digest + "x");
}

TEST_CASE("apply preserves the norm") {
  const auto g = make_grid(32, 8.0);
  const Propagator u = build_delta_propagator(0.3, DeltaConfig({{1.0, 0.0}}), g);
  StateVector psi{g, Vector::Random(32), Representation::momentum};
  psi.normalize();
  const StateVector out = u.apply(psi);
  CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-6));
  StateVector wrong{make_grid(16, 8.0), Vector::Random(16), Representation::momentum};
  CHECK_THROWS_AS(u.apply(wrong), Error);
}

TEST_CASE("composition helpers") {
  CHECK(composition_steps(0.1, 1.0) == 1);
  CHECK(composition_steps(1.0, 1.0) == 4);
  CHECK(composition_steps(-1.0, 1.0) == 4);
  CHECK(composition_steps(1.01, 1.0) == 5);
  const Matrix m = Matrix::Random(5, 5);
  Matrix p = Matrix::Identity(5, 5);
  for (int k = 0; k < 7; ++k) p *= m;
  CHECK((matrix_power(m, 7) - p).norm() < 1e-10 * p.norm());
  CHECK(matrix_power(m, 0) == Matrix::Identity(5, 5));
}

TEST_CASE("conjugation and distance") {
  const auto g = make_grid(16, 4.0);
  const Propagator u = build_delta_propagator(0.2, DeltaConfig({{1.0, 0.0}}), g);
  const KernelMatrix id = KernelMatrix::identity(g);
  CHECK((conjugate(u, id).weighted() - Matrix::Identity(16, 16)).norm() < 1e-6);
  CHECK(distance(u, u) == 0.0);
  const Propagator other = build_delta_propagator(0.2, DeltaConfig({{1.0, 0.0}}), make_grid(32, 4.0));
  try {
    (void)distance(u, other);
    FAIL("expected a grid mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::grid_mismatch);
  }
}

TEST_CASE("generator finite difference selects one convention") {
  const GeneratorCheck gc = generator_check();
  CHECK(gc.selected == SignConvention::minus_i);
  CHECK(gc.selected == kResolvedConvention);
  CHECK(gc.residual_minus_i * 10.0 <= gc.residual_plus_i);
  CHECK(gc.separation >= 10.0);
}

TEST_CASE("split-step reference approaches the Dyson propagator") {
  // The distance levels off at a floor set by the momentum cutoff, not by
  // the step count: refine steps at fixed p_max, then double p_max.
  const DeltaConfig c({{1.0, 0.0}});
  auto plateau = [&](std::size_t n, double p_max, std::vector<int> steps) {
    const auto g = make_grid(n, p_max);
    const Propagator dyson = build_mollified_propagator(0.25, c, standard_bump(), 0.3, g,
                                                        {1e-9, 40, 16});
    std::vector<double> d;
    for (int k : steps) {
      const Propagator ref = reference_propagator(0.25, c, standard_bump(), 0.3, g, k);
      CHECK(ref.provenance == Provenance::reference_split_step);
      d.push_back(distance(dyson, ref));
    }
    return d;
  };
  const auto fine = plateau(128, 16.0, {16, 64, 1024});
  CHECK(fine[1] < 0.5 * fine[0]);
  CHECK(fine[2] <= fine[1]);
  CHECK(fine[2] < 5e-4);
  const auto coarse = plateau(64, 8.0, {1024});
  MESSAGE("plateau p_max 8: " << coarse[0] << ", p_max 16: " << fine[2]);
  CHECK(fine[2] < 0.25 * coarse[0]);
}

TEST_CASE("small convergence study") {
  const auto g = make_grid(64, 8.0);
  const ConvergenceReport r =
      convergence_study(0.25, DeltaConfig({{1.0, 0.0}}), standard_bump(), {0.4, 0.2, 0.1}, g);
  REQUIRE(r.norms.size() == 3);
  CHECK(r.verdict);
  CHECK(r.norms[2] < r.norms[0]);
  CHECK(r.floor > 0.0);
  CHECK(r.orders_used.size() == 3);
  CHECK_THROWS_AS(
      convergence_study(0.25, DeltaConfig({{1.0, 0.0}}), standard_bump(), {0.1, 0.2}, g), Error);
}

TEST_CASE("l1 stability on the geometric sequence") {
  const auto g = make_grid(32, 8.0);
  const L1Stability s = l1_stability(0.25, geometric_sequence(), 1e-3, 1e-4, g);
  CHECK(s.coarse.size() == 10);
  CHECK(s.fine.size() == 14);
  CHECK(s.difference <= 10.0 * s.tail_gap * 0.25);
  CHECK(s.passed);
}
