#include "specfun.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

#include "error.hpp"
#include "oracles.hpp"

using namespace shmvdr;
using specfun::SHIndex;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("SH flat index follows the (0,0),(1,-1),(1,0),(1,1),... ordering") {
  CHECK(specfun::sh_flat_index({0, 0}) == 0);
  CHECK(specfun::sh_flat_index({1, -1}) == 1);
  CHECK(specfun::sh_flat_index({1, 0}) == 2);
  CHECK(specfun::sh_flat_index({1, 1}) == 3);
  CHECK(specfun::sh_flat_index({2, -2}) == 4);
  CHECK(specfun::sh_flat_index({3, 3}) == 15);
  for (int flat = 0; flat < specfun::sh_count(8); ++flat) {
    const SHIndex idx = specfun::sh_index_from_flat(flat);
    CHECK(idx.valid());
    CHECK(specfun::sh_flat_index(idx) == flat);
  }
  CHECK_THROWS_AS(specfun::sh_flat_index({1, 2}), Error);
}

TEST_CASE("spherical Bessel: pinned values") {
  CHECK(specfun::sph_bessel_j(0, 0.0) == 1.0);
  CHECK(specfun::sph_bessel_j(1, 0.0) == 0.0);
  CHECK(specfun::sph_bessel_j(5, 0.0) == 0.0);

  // references computed with 50-digit arithmetic
  struct Case {
    int n;
    double x;
    double want;
  };
  const Case cases[] = {
      {0, 1.0, 0.841470984807896507},
      {1, 1.0, 0.301168678939756789},
      {2, 0.1, 0.000666190608445568706},
      {3, 2.0, 0.0607220976628748285},
      {4, 0.5, 0.0000653896061523897086},
      {5, 10.0, -0.0555345116214521809},
      {6, 25.0, -0.0265703198998181333},
      {7, 3.1415, 0.0011092750383314191},
      {8, 50.0, 0.00887374910822750873},
      {2, 0.35, 0.0080954510393793879},
      {3, 0.29, 0.000231193016562101033},
      {6, 0.05, 1.15615480553049378e-13},
      {1, 0.05, 0.0166625003720065867},
  };
  for (const auto& c : cases) {
    CAPTURE(c.n);
    CAPTURE(c.x);
    CHECK(specfun::sph_bessel_j(c.n, c.x) == doctest::Approx(c.want).epsilon(1e-11));
  }
  // near a zero of j_0 the absolute error stays at double-rounding level
  CHECK(std::abs(specfun::sph_bessel_j(0, 3.14159265358979) - 1.03083467542579064e-15) < 1e-16);
}

TEST_CASE("spherical Bessel: recurrence j_{n-1} + j_{n+1} = (2n+1)/x j_n") {
  for (int n = 1; n <= 6; ++n) {
    for (double x = 0.5; x <= 30.0; x += 0.7) {
      const double lhs = specfun::sph_bessel_j(n - 1, x) + specfun::sph_bessel_j(n + 1, x);
      const double rhs = (2.0 * n + 1.0) / x * specfun::sph_bessel_j(n, x);
      const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
      CHECK(std::abs(lhs - rhs) / scale < 1e-10);
    }
  }
}

TEST_CASE("spherical Bessel: domain errors") {
  CHECK_THROWS_AS(specfun::sph_bessel_j(-1, 1.0), Error);
  CHECK_THROWS_AS(specfun::sph_bessel_j(2, -0.5), Error);
}

TEST_CASE("spherical harmonics: conformance values from a high-precision oracle") {
  struct Case {
    int n, m;
    double theta, phi;
    double re, im;
  };
  // computed with 50-digit arithmetic, orthonormal + Condon-Shortley
  const Case cases[] = {
      {0, 0, 0.3, 1.1, 0.282094791773878143, 0.0},
      {1, 0, 0.0, 0.0, 0.488602511902919922, 0.0},
      {1, 1, 0.7, 0.3, -0.21263253058273792, -0.0657749495554676631},
      {1, -1, 0.7, 0.3, 0.21263253058273792, -0.0657749495554676631},
      {2, 0, 1.2, 2.2, -0.191155854601627355, 0.0},
      {2, 2, 2.1, -0.4, 0.200529368104172184, -0.206472769221001137},
      {3, -2, 0.5, 0.9, -0.0468368166376351769, -0.200754852115477701},
      {3, 3, 1.9, 2.7, 0.0861060067080584874, -0.342908410149331289},
      {4, 1, 1.0, 5.0, 0.0583592958003685099, -0.197284475207129092},
      {5, -4, 2.5, 0.8, 0.150586708613542016, -0.00880538528301520708},
      {6, 5, 0.9, 1.3, -0.299611029391490253, -0.0659974787471096766},
      {8, -7, 1.4, 4.2, -0.136170911536574757, 0.285435912846149038},
  };
  for (const auto& c : cases) {
    CAPTURE(c.n);
    CAPTURE(c.m);
    const auto y = specfun::sph_harmonic(c.n, c.m, c.theta, c.phi);
    CHECK(y.real() == doctest::Approx(c.re).epsilon(1e-12));
    CHECK(y.imag() == doctest::Approx(c.im).epsilon(1e-12));
  }
}

TEST_CASE("spherical harmonics: conjugation symmetry") {
  for (int n = 0; n <= 5; ++n)
    for (int m = 0; m <= n; ++m) {
      const auto yp = specfun::sph_harmonic(n, m, 1.234, -0.77);
      const auto ym = specfun::sph_harmonic(n, -m, 1.234, -0.77);
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      CHECK(std::abs(std::conj(yp) - sign * ym) < 1e-14);
    }
}

TEST_CASE("spherical harmonics: orthonormality under sphere quadrature") {
  // Gauss-Legendre x uniform azimuth product rule, exact for this degree range
  std::vector<double> nodes, weights;
  oracle::gauss_legendre(16, nodes, weights);
  const int n_phi = 32;
  const int order = 3;
  const int L = specfun::sh_count(order);
  Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(L, L);
  for (size_t i = 0; i < nodes.size(); ++i) {
    const double theta = std::acos(nodes[i]);
    for (int p = 0; p < n_phi; ++p) {
      const double phi = 2.0 * kPi * p / n_phi;
      Eigen::VectorXcd y(L);
      for (int n = 0; n <= order; ++n)
        for (int m = -n; m <= n; ++m)
          y[specfun::sh_flat_index({n, m})] = specfun::sph_harmonic(n, m, theta, phi);
      gram += weights[i] * (2.0 * kPi / n_phi) * (y * y.adjoint());
    }
  }
  CHECK((gram - Eigen::MatrixXcd::Identity(L, L)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("max_order: ceil(k r_a) with the array constants") {
  const double r_a = 0.042, c = 343.0;
  CHECK(specfun::max_order(specfun::wavenumber(300.0, c), r_a) == 1);
  CHECK(specfun::max_order(specfun::wavenumber(1500.0, c), r_a) == 2);
  CHECK(specfun::max_order(specfun::wavenumber(3400.0, c), r_a) == 3);
  CHECK_THROWS_AS(specfun::max_order(0.0, r_a), Error);
}

TEST_CASE("max_order: nondecreasing in frequency and radius") {
  int prev = 0;
  for (double f = 50.0; f <= 8000.0; f += 25.0) {
    const int n = specfun::max_order(specfun::wavenumber(f, 343.0), 0.042);
    CHECK(n >= prev);
    prev = n;
  }
  prev = 0;
  for (double r = 0.01; r <= 0.2; r += 0.005) {
    const int n = specfun::max_order(specfun::wavenumber(1000.0, 343.0), r);
    CHECK(n >= prev);
    prev = n;
  }
}
