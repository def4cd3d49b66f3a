#include <cmath>
#include <random>

#include "core/potentials.hpp"
#include "core/propagator.hpp"
#include "doctest.h"

using namespace pointdyn;

namespace {

// Unit-mass bump transform by a plain trapezoid sum on a fine lattice. The
// integrand is smooth and vanishes to all orders at +-1.
cplx trapezoid_bump_transform(double u, double a = 1.0, int n = 20000) {
  auto shape = [a](double x) {
    const double r = 1.0 - x * x;
    return r > 0.0 ? std::exp(-a / r) : 0.0;
  };
  const double h = 2.0 / n;
  double mass = 0.0;
  cplx s = 0.0;
  for (int k = 1; k < n; ++k) {
    const double x = -1.0 + k * h;
    mass += h * shape(x);
    s += h * shape(x) * std::exp(cplx(0.0, -u * x));
  }
  return s / mass;
}

}  // namespace

TEST_CASE("delta config validation") {
  CHECK_THROWS_AS(DeltaConfig({{0.0, 1.0}}), Error);
  CHECK_THROWS_AS(DeltaConfig({{1.0, 0.5}, {2.0, 0.5}}), Error);
  CHECK_THROWS_AS(DeltaConfig({{1.0, 0.0}}, -1.0), Error);
  CHECK_THROWS_AS(DeltaConfig({{NAN, 0.0}}), Error);
  const DeltaConfig c({{1.0, -1.0}, {-0.5, 2.0}}, 0.25);
  CHECK(c.size() == 2);
  CHECK(c.l1_mass() == doctest::Approx(1.5));
  CHECK(c.tail_bound() == 0.25);
}

TEST_CASE("delta config text round trip") {
  const DeltaConfig c({{0.1, -1.0 / 3.0}, {-2.5, 7.0}}, 1e-7);
  const DeltaConfig back = DeltaConfig::parse(c.serialize());
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.centers()[i].alpha == c.centers()[i].alpha);
    CHECK(back.centers()[i].x == c.centers()[i].x);
  }
  CHECK(back.tail_bound() == c.tail_bound());

  const DeltaConfig commented = DeltaConfig::parse(
      "# leading comment\n\ntail_bound 0\n1 0   # the center\n");
  CHECK(commented.size() == 1);
  CHECK_THROWS_AS(DeltaConfig::parse("1 0\n"), Error);
  try {
    DeltaConfig::parse("tail_bound 0\n1 zero\n");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_config);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(DeltaConfig::load("/nonexistent/delta.txt"), Error);
}

TEST_CASE("parity symmetry") {
  CHECK(DeltaConfig({{1.0, -1.0}, {1.0, 1.0}, {0.5, 0.0}}).is_parity_symmetric());
  CHECK_FALSE(DeltaConfig({{1.0, -1.0}, {2.0, 1.0}}).is_parity_symmetric());
  CHECK_FALSE(DeltaConfig({{1.0, 0.5}}).is_parity_symmetric());
}

TEST_CASE("mollifier normalisation and support") {
  const Mollifier m(standard_bump(), 0.3, 0.1);
  CHECK(m.mass() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(m(0.3 + 0.1001) == 0.0);
  CHECK(m(0.3 - 0.1001) == 0.0);
  CHECK(m(0.3) > 0.0);
  CHECK(std::abs(m.unit_transform(0.0) - 1.0) < 1e-14);
  CHECK_THROWS_AS(Mollifier(standard_bump(), 0.0, 0.0), Error);
  CHECK_THROWS_AS(Mollifier({"wide", [](double x) { return std::exp(-x * x); }}, 0.0, 1.0),
                  Error);
  CHECK_THROWS_AS(Mollifier({"negative", [](double x) { return std::abs(x) < 1 ? -1.0 : 0.0; }},
                            0.0, 1.0),
                  Error);
  CHECK_THROWS_AS(profile_by_name("gauss"), Error);
}

TEST_CASE("mollifier transform against a trapezoid oracle") {
  const Mollifier m(standard_bump(), 0.0, 1.0);
  const Mollifier m2(profile_by_name("bump2"), 0.0, 1.0);
  for (double u : {0.0, 0.5, 1.0, 3.0, 7.5, 12.0}) {
    CHECK(std::abs(m.unit_transform(u) - trapezoid_bump_transform(u)) < 1e-9);
    CHECK(std::abs(m2.unit_transform(u) - trapezoid_bump_transform(u, 2.0)) < 1e-9);
  }
  // shifted, scaled copy: (2 pi)^(-1/2) e^{-i p x0} w(eps p)
  const Mollifier s(standard_bump(), 0.7, 0.2);
  const auto v = mollifier_transform(s);
  for (double p : {-5.0, -1.0, 0.0, 2.0, 9.0}) {
    const cplx expect = std::exp(cplx(0.0, -p * 0.7)) * trapezoid_bump_transform(0.2 * p) /
                        std::sqrt(2.0 * M_PI);
    CHECK(std::abs(v(p) - expect) < 1e-9);
    CHECK(std::abs(v(p)) <= v.sup_bound() + 1e-15);
  }
}

TEST_CASE("delta transform formula") {
  const DeltaConfig c({{1.5, -0.4}, {-0.7, 1.1}});
  const auto v = delta_transform(c);
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    const double p = u(gen);
    const cplx expect = (1.5 * std::exp(cplx(0.0, 0.4 * p)) - 0.7 * std::exp(cplx(0.0, -1.1 * p))) /
                        std::sqrt(2.0 * M_PI);
    CHECK(std::abs(v(p) - expect) < 1e-14);
    CHECK(std::abs(v(p)) <= v.sup_bound() + 1e-15);
  }
  CHECK(v.sup_bound() == doctest::Approx(2.2 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("mollified transform tends to the delta transform") {
  const DeltaConfig c({{1.0, 0.0}, {0.5, 1.0}});
  const auto d = delta_transform(c);
  double prev = INFINITY;
  for (double eps : {0.4, 0.2, 0.1, 0.05}) {
    const auto m = mollified_transform(c, standard_bump(), eps);
    double worst = 0.0;
    for (double p = -10.0; p <= 10.0; p += 0.25) worst = std::max(worst, std::abs(m(p) - d(p)));
    CHECK(worst < prev);
    prev = worst;
  }
  CHECK(prev < 0.05);
  CHECK(mollified_transform(DeltaConfig(), standard_bump(), 0.1).is_zero());
}

TEST_CASE("transform algebra") {
  const auto a = delta_transform(DeltaConfig({{1.0, 0.0}}));
  const auto b = delta_transform(DeltaConfig({{2.0, 1.0}}));
  const auto s = a + b.scaled(-0.5);
  CHECK(std::abs(s(0.7) - (a(0.7) - 0.5 * b(0.7))) < 1e-15);
  CHECK(s.sup_bound() >= std::abs(s(0.7)));
  CHECK(zero_transform().is_zero());
  CHECK(zero_transform()(3.0) == cplx(0.0));
}

TEST_CASE("difference table indexing") {
  const auto g = make_grid(8, 2.0);
  const auto v = delta_transform(DeltaConfig({{1.0, 0.3}}));
  const Vector t = potential_on_differences(v, g);
  REQUIRE(t.size() == 15);
  for (int j = 0; j < 8; ++j)
    for (int k = 0; k < 8; ++k)
      CHECK(std::abs(t(j - k + 7) - v(g.nodes()(j) - g.nodes()(k)) / std::sqrt(2.0 * M_PI)) <
            1e-14);
  CHECK(potential_on_differences(zero_transform(), g).norm() == 0.0);
}

TEST_CASE("l1 truncation") {
  const auto seq = geometric_sequence();
  const DeltaConfig a = truncate_l1(seq, 1e-4);
  const DeltaConfig b = truncate_l1(seq, 1e-5);
  // 2^-14 < 1e-4 < 2^-13, 2^-17 < 1e-5 < 2^-16
  CHECK(a.size() == 14);
  CHECK(b.size() == 17);
  CHECK(a.tail_bound() <= 1e-4);
  CHECK(b.tail_bound() <= 1e-5);
  CHECK(a.centers()[0].alpha == 0.5);
  CHECK(a.centers()[3].x == doctest::Approx(1.0));
  CHECK_THROWS_AS(truncate_l1(seq, 0.0), Error);
  SummableSequence stuck{[](std::size_t i) { return DeltaCenter{1.0, double(i)}; },
                         [](std::size_t) { return 1.0; }};
  CHECK_THROWS_AS(truncate_l1(stuck, 0.5), Error);
  const std::vector<DeltaCenter> finite{{1.0, 0.0}, {2.0, 1.0}};
  const DeltaConfig f = truncate_l1(finite, 1e-3);
  CHECK(f.size() == 2);
  CHECK(f.tail_bound() == 0.0);
}
