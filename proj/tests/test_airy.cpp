#include <doctest.h>

#include <boost/math/special_functions/airy.hpp>
#include <cmath>
#include <complex>

#include "airyhier/airy.hpp"
#include "airyhier/quadrature.hpp"

using namespace airyhier::specfun;

namespace {

// Independent oracle for the cosine form (i1):
//   Ai_n(x) = (1/pi) int_0^inf cos(y^(2n+1)/(2n+1) + x y) dy
// computed as a real-segment composite Gauss-Legendre part plus a vertical
// ray for the damped tail of Re int exp(i phi(y)) dy.
double cosine_oracle(int n, double x) {
  const int m = 2 * n + 1;
  auto phi = [&](std::complex<double> y) {
    std::complex<double> p(1.0, 0.0);
    for (int k = 0; k < m; ++k) p *= y;
    return p / double(m) + x * y;
  };
  // pick Y0 with phase speed phi'(Y0) comfortably large
  double Y0 = 4.0;
  while (std::pow(Y0, 2 * n) + x < 60.0) Y0 += 1.0;
  const std::complex<double> I(0.0, 1.0);
  // real segment [0, Y0]
  auto seg = airyhier::quad::composite(airyhier::quad::gauss_legendre(16), 0.0, Y0,
                                       400);
  double val = 0.0;
  for (std::size_t k = 0; k < seg.size(); ++k)
    val += seg.w[k] * std::cos(phi(seg.x[k]).real());
  // tail along the rotated ray y = Y0 + s e^{i pi/(2m)} where exp(i phi) decays
  const double speed = std::pow(Y0, 2 * n) + x;
  const double alpha = M_PI / (2 * m);
  const std::complex<double> dir = std::exp(I * alpha);
  const double S1 = 1.2 * 60.0 / (speed * std::sin(alpha));
  auto ray = airyhier::quad::composite(airyhier::quad::gauss_legendre(16), 0.0, S1, 200);
  std::complex<double> tail(0.0, 0.0);
  for (std::size_t k = 0; k < ray.size(); ++k)
    tail += ray.w[k] * std::exp(I * phi(Y0 + ray.x[k] * dir)) * dir;
  return (val + tail.real()) / M_PI;
}

// Second independent oracle: Maclaurin series of the ODE solution with
// closed-form Gamma-function seed derivatives at 0.
double series_oracle(int n, double x) {
  const int m = 2 * n + 1;
  std::vector<double> a(400, 0.0);
  for (int j = 0; j < 2 * n; ++j) {
    // Ai_n^(j)(0) = (1/pi) m^((j+1)/m - 1) Gamma((j+1)/m)
    //              * cos(pi/2 * (j + (j+1)/m))
    const double r = (j + 1.0) / m;
    const double mag = std::pow(double(m), r - 1.0) * std::tgamma(r) / M_PI;
    double fact = 1.0;
    for (int i = 2; i <= j; ++i) fact *= i;
    a[j] = mag * std::cos(0.5 * M_PI * (j + r)) / fact;
  }
  const double sgn = (n % 2 == 1) ? 1.0 : -1.0;
  for (int k = 0; k + 2 * n < static_cast<int>(a.size()); ++k) {
    double denom = 1.0;
    for (int i = 1; i <= 2 * n; ++i) denom *= (k + i);
    a[k + 2 * n] = (k >= 1 ? sgn * a[k - 1] / denom : 0.0);
  }
  double val = 0.0, xp = 1.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    val += a[k] * xp;
    xp *= x;
  }
  return val;
}

}  // namespace

TEST_CASE("closed-form values at the origin") {
  CHECK(std::abs(ai(1, 0.0) - 0.3550280538878172) < 1e-12);
  CHECK(std::abs(ai_deriv(1, 0.0, 1) - (-0.2588194037928068)) < 1e-12);
  CHECK(ai_deriv(1, 0.0, 0) == ai(1, 0.0));
}

TEST_CASE("series seed derivatives agree with the contour route") {
  for (int n = 1; n <= 3; ++n)
    for (int j = 0; j < 2 * n; ++j)
      CHECK(std::abs(series_oracle(n, 0.0) - ai(n, 0.0)) < 1e-10);
}

TEST_CASE("classical Airy oracle on [-10, 8]") {
  for (double x = -10.0; x <= 8.0 + 1e-9; x += 0.5) {
    const double ref = boost::math::airy_ai(x);
    CHECK(std::abs(ai(1, x) - ref) < 1e-10);
  }
}

TEST_CASE("cosine-form oracle for n=2") {
  for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    CHECK(std::abs(ai(2, x) - cosine_oracle(2, x)) < 1e-8);
  }
}

TEST_CASE("series oracle for n=2,3 on [-3,3]") {
  for (int n = 2; n <= 3; ++n)
    for (double x = -3.0; x <= 3.0 + 1e-9; x += 1.0)
      CHECK(std::abs(ai(n, x) - series_oracle(n, x)) < 1e-9);
}

TEST_CASE("ODE residual d^2n Ai_n = (-1)^(n+1) x Ai_n") {
  for (int n = 1; n <= 3; ++n) {
    HigherAiryEvaluator ev(n);
    const double sgn = (n % 2 == 1) ? 1.0 : -1.0;
    for (int k = 0; k < 17; ++k) {
      const double x = -4.0 + 8.0 * k / 16.0;
      auto d = ev.derivs(x, 2 * n);
      CHECK(std::abs(d[2 * n] - sgn * x * d[0]) < 1e-8);
    }
  }
}

TEST_CASE("contour invariants: real output and endpoint decay") {
  for (int n = 1; n <= 4; ++n) {
    HigherAiryEvaluator ev(n);
    for (double x : {-6.0, -1.0, 0.0, 2.0}) {
      CHECK(ev.imag_residual(x) < 1e-12);
      CHECK(ev.endpoint_decay(x) < 1e-16);
    }
  }
}

TEST_CASE("quadrature refinement stability") {
  QuadConfig fine;
  fine.points_per_panel = 32;
  for (int n = 1; n <= 2; ++n) {
    HigherAiryEvaluator ev(n), evf(n, {}, fine);
    for (double x = -4.0; x <= 4.0 + 1e-9; x += 1.0)
      CHECK(std::abs(ev.ai(x) - evf.ai(x)) < 1e-10);
  }
}

TEST_CASE("positive-side asymptotics ratio near 1 at x=8") {
  for (int n = 1; n <= 2; ++n) {
    const double ratio = ai(n, 8.0) / ai_asymptotic(n, 8.0, Side::positive);
    CHECK(std::abs(ratio - 1.0) < 0.05);
  }
}

TEST_CASE("negative-side asymptotics: classical envelope and zero phase") {
  // n=1 envelope prefactor is pi^{-1/2} x^{-1/4}
  for (double x : {4.0, 9.0}) {
    const double env = std::pow(M_PI, -0.5) * std::pow(x, -0.25);
    const double peak = ai_asymptotic(1, x, Side::negative) /
                        std::cos((2.0 / 3.0) * std::pow(x, 1.5) - 0.25 * M_PI);
    CHECK(std::abs(peak - env) < 1e-14);
  }
  // zeros of ai(1,-x) located by bisection vs zeros of the asymptotic cosine
  auto f = [](double xm) { return ai(1, -xm); };
  for (int k = 3; k <= 5; ++k) {
    // asymptotic zero: (2/3) x^{3/2} - pi/4 = (k - 1/2) pi
    const double xz = std::pow(1.5 * ((k - 0.5) * M_PI + 0.25 * M_PI), 2.0 / 3.0);
    double a = xz - 0.3, b = xz + 0.3;
    REQUIRE(f(a) * f(b) < 0.0);
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (a + b);
      (f(a) * f(mid) <= 0.0 ? b : a) = mid;
    }
    CHECK(std::abs(0.5 * (a + b) - xz) < 5e-3);
  }
}

TEST_CASE("cache interpolation error and pool behavior") {
  AiryCache cache(1, -10.0, 5.0);
  HigherAiryEvaluator ev(1);
  for (double x = -9.87; x <= 4.9; x += 0.7793) {
    for (int j = 0; j <= 2; ++j)
      CHECK(std::abs(cache.deriv(x, j) - ev.derivs(x, j)[j]) < 5e-13);
  }
  // outside the range the cache falls back to direct quadrature
  CHECK(std::abs(cache.deriv(6.5, 0) - ev.derivs(6.5, 0)[0]) < 1e-14);

  auto c1 = cache_for(1, -5.0, 3.0);
  auto c2 = cache_for(1, -4.0, 2.0);
  CHECK(c1.get() == c2.get());  // covered: same instance reused
  auto c3 = cache_for(1, -7.0, 3.0);
  CHECK(c3->covers(-5.0, 3.0));
}
