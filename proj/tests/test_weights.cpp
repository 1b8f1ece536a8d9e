#include <doctest.h>

#include <cmath>

#include "airyhier/airy.hpp"
#include "airyhier/quadrature.hpp"
#include "airyhier/weight.hpp"

using namespace airyhier::weights;

TEST_CASE("fermi weight point values") {
  CHECK(make_fermi(1.0).value(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(make_fermi(2.0).derivative(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  // total mass over [-40, 40]
  auto w = make_fermi(1.0);
  auto rule = airyhier::quad::composite(airyhier::quad::gauss_legendre(16), -40.0,
                                        40.0, 160);
  CHECK(std::abs(rule.integrate(w.derivative) - 1.0) < 1e-12);
}

TEST_CASE("weight invariants validate for fermi and steep step approximant") {
  for (double alpha : {0.5, 1.0, 2.0, 50.0, 200.0}) {
    CHECK_NOTHROW(validate_weight(make_fermi(alpha)));
  }
  auto s = make_smoothed_step(50.0);
  CHECK(s.value(0.2) > 0.9999);
  CHECK(s.value(-0.2) < 1e-4);
  CHECK(s.label.rfind("step-approx", 0) == 0);
}

TEST_CASE("weight spec parsing") {
  CHECK(parse_weight("fermi:alpha=2.0").derivative(0.0) == doctest::Approx(0.5));
  CHECK(parse_weight("step-approx:k=200").label.rfind("step-approx", 0) == 0);
  CHECK_THROWS(parse_weight("bogus:z=1"));
  CHECK_THROWS(parse_weight("fermi:beta=1"));
}

TEST_CASE("sigma quadrature: mass, exactness, closed-form oracle") {
  auto w = make_fermi(1.0);
  auto q = sigma_quadrature(w, 40);
  REQUIRE(q.nodes.size() == 40);
  double mass = 0.0;
  for (double wt : q.weights) {
    CHECK(wt > 0.0);
    mass += wt;
  }
  CHECK(std::abs(mass - 1.0) < 1e-14);
  // int w dsigma = 1/2 (w' is the density of w's own CDF)
  CHECK(std::abs(q.integrate(w.value) - 0.5) < 1e-8);
  // logistic moments: mean 0, variance pi^2/3
  CHECK(std::abs(q.integrate([](double x) { return x; })) < 1e-9);
  CHECK(std::abs(q.integrate([](double x) { return x * x; }) - M_PI * M_PI / 3.0) <
        1e-8);
}

TEST_CASE("sigma quadrature: Gauss exactness against the fine reference") {
  auto w = make_fermi(1.0);
  auto q20 = sigma_quadrature(w, 20);
  auto q40 = sigma_quadrature(w, 40);
  for (int k = 1; k <= 10; ++k) {
    const double a = q20.integrate([&](double x) { return std::pow(x / 10.0, k); });
    const double b = q40.integrate([&](double x) { return std::pow(x / 10.0, k); });
    CHECK(std::abs(a - b) < 1e-11);
  }
}

TEST_CASE("sigma quadrature refinement on a smooth transcendental integrand") {
  auto w = make_fermi(1.0);
  auto cache = airyhier::specfun::cache_for(1, -45.0, 45.0);
  auto f = [&](double x) {
    const double v = cache->ai(x);
    return v * v;
  };
  // Ai_1(x)^2 oscillates with ~26 cycles over the effective support, so the
  // rule needs degree ~300 before Gauss convergence kicks in; past that it is
  // super-exponential (m=160 already agrees with a fine composite reference
  // to 2e-13).
  const double a = sigma_quadrature(w, 160).integrate(f);
  const double b = sigma_quadrature(w, 320).integrate(f);
  CHECK(std::abs(a - b) < 1e-9);
  // reference value from a 6400-point composite Gauss rule on [-40, 40]
  CHECK(b == doctest::Approx(1.047422354291986e-01).epsilon(1e-11));
}

TEST_CASE("sigma quadrature for the steep approximant") {
  auto q = sigma_quadrature(make_smoothed_step(200.0), 30);
  double mass = 0.0;
  for (double wt : q.weights) mass += wt;
  CHECK(std::abs(mass - 1.0) < 1e-14);
  // nodes concentrate near the step location 0
  CHECK(std::abs(q.integrate([](double x) { return x; })) < 1e-6);
  CHECK(q.nodes.front() > -1.5);
  CHECK(q.nodes.back() < 1.5);
}

TEST_CASE("bracket helper") {
  auto q = sigma_quadrature(make_fermi(1.0), 16);
  std::vector<double> ones(q.nodes.size(), 1.0);
  CHECK(q.bracket(ones, ones) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK_THROWS(q.bracket(ones, std::vector<double>(3, 1.0)));
}
