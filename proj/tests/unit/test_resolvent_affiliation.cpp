#include <cmath>

#include "core/resolvent.hpp"
#include "doctest.h"

using namespace pointdyn;

TEST_CASE("free Laplace resolvent is the diagonal (p^2 - i lambda)^-1") {
  const auto g = make_grid(64, 8.0);
  const PropagatorFamily free{g, zero_transform(), laplace_options(), Provenance::free, ""};
  for (double lambda : {1.0, -1.0, 2.5}) {
    const ResolventOperator r = resolvent_from_propagator(lambda, free, default_t_max(lambda), 16);
    CHECK(r.source == ResolventSource::laplace_of_propagator);
    double worst = 0.0;
    for (int j = 0; j < 64; ++j) {
      const double p = g.nodes()(j);
      worst = std::max(worst, std::abs(r.matrix(j, j) - 1.0 / cplx(p * p, -lambda)));
    }
    CHECK(worst < 1e-6);
    CHECK((r.matrix - Matrix(r.matrix.diagonal().asDiagonal())).norm() < 1e-12);
    CHECK(r.norm <= 1.0 / std::abs(lambda) + 1e-9);
  }
}

TEST_CASE("Laplace resolvent against a direct inverse") {
  const auto g = make_grid(64, 8.0);
  const DeltaConfig c({{1.0, 0.0}, {-0.5, 1.0}});
  const auto fam = delta_family(c, g, laplace_options());
  const ResolventOperator lap = resolvent_from_propagator(1.0, fam, 20.0, 16, true);
  const ResolventOperator dir = resolvent_direct(1.0, delta_transform(c), g);
  CHECK(dir.source == ResolventSource::direct_inverse);
  CHECK(spectral_norm(lap.matrix - dir.matrix) < 1e-6);
  CHECK(lap.defect < 1e-6);
  CHECK(lap.dyadic_propagators.size() == lap.dyadic_times.size());
  CHECK(lap.dyadic_times.back() <= lap.t_max * (1.0 + 1e-12));
  CHECK(lap.dyadic_times.back() >= 0.5 * lap.t_max);
  CHECK(lap.panels_log2 >= 1);

  // (H - i lambda)^{-1} with real-symmetric H: R(-lambda) = R(lambda)*
  const ResolventOperator neg = resolvent_from_propagator(-1.0, fam, 20.0, 16);
  CHECK(spectral_norm(neg.matrix - lap.matrix.adjoint()) < 1e-8);

  // R(l) - R(m) = i (l - m) R(l) R(m) for (H - i l)^{-1}
  const ResolventOperator two = resolvent_direct(2.0, delta_transform(c), g);
  const Matrix lhs = dir.matrix - two.matrix;
  const Matrix rhs = cplx(0.0, 1.0 - 2.0) * dir.matrix * two.matrix;
  CHECK(spectral_norm(lhs - rhs) < 1e-12);
}

TEST_CASE("t_max and node refinements barely move the Laplace resolvent") {
  const auto g = make_grid(32, 8.0);
  const auto fam = delta_family(DeltaConfig({{1.0, 0.0}}), g, laplace_options());
  const Matrix base = resolvent_from_propagator(1.0, fam, 20.0, 16).matrix;
  CHECK(spectral_norm(base - resolvent_from_propagator(1.0, fam, 40.0, 16).matrix) < 1e-8);
  CHECK(spectral_norm(base - resolvent_from_propagator(1.0, fam, 20.0, 32).matrix) < 1e-10);
  CHECK_THROWS_AS(resolvent_from_propagator(1.0, fam, 10.0, 16), Error);
  CHECK_THROWS_AS(resolvent_from_propagator(0.0, fam, 20.0, 16), Error);
}

TEST_CASE("generic Laplace helper on a scalar phase") {
  // int_0^T e^{-s} e^{-i a s} ds = (1 - e^{-(1 + ia)T}) / (1 + ia)
  const double a = 3.0;
  const Matrix got = laplace_integral(
      1.0, [&](double s) { return Matrix::Constant(1, 1, std::exp(cplx(0.0, -a * s))); }, 20.0,
      16, 0.5);
  const cplx z(1.0, a);
  CHECK(std::abs(got(0, 0) - (1.0 - std::exp(-z * 20.0)) / z) < 1e-12);
}

TEST_CASE("small norm-resolvent study") {
  const auto g = make_grid(64, 8.0);
  const ConvergenceReport r = norm_resolvent_convergence(
      1.0, DeltaConfig({{1.0, 0.0}}), standard_bump(), {0.4, 0.2, 0.1}, g, 20.0, 16);
  REQUIRE(r.norms.size() == 3);
  CHECK(r.verdict);
  CHECK(r.strictly_decreasing);
  CHECK(r.lambda == 1.0);
  CHECK(r.t_max == 20.0);
}

TEST_CASE("finite-rank continuity on a small grid") {
  const auto g = make_grid(64, 8.0);
  const auto fam = delta_family(DeltaConfig({{1.0, 0.0}}), g);
  const StateVector psi = gaussian_state(g, 0.0, 0.0, 1.0);
  const StateVector phi = gaussian_state(g, 0.5, 1.0, 1.0);
  CHECK(psi.norm() == doctest::Approx(1.0));
  const ConvergenceReport r = finite_rank_continuity(fam, psi, phi, 0.1, {0.04, 0.02, 0.01});
  CHECK(r.verdict);
  for (const auto& row : r.checks)
    if (row.name.rfind("triangle_bound", 0) == 0) CHECK(row.value <= row.bound + 1e-10);
}

TEST_CASE("gaussian state centre and momentum") {
  const auto g = make_grid(128, 8.0);
  const StateVector s = gaussian_state(g, 2.0, 1.5, 1.0);
  const StateVector x = fourier_inverse(s);
  const RealVector xs = g.positions(), w = g.position_weights();
  double mx = 0.0, mp = 0.0;
  for (int j = 0; j < 128; ++j) {
    mx += w(j) * xs(j) * std::norm(x.amplitudes(j));
    mp += g.weights()(j) * g.nodes()(j) * std::norm(s.amplitudes(j));
  }
  CHECK(mx == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(mp == doctest::Approx(1.5).epsilon(1e-8));
}
