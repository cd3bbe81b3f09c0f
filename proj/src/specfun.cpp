#include "specfun.hpp"

#include <cmath>
#include <vector>

#include "error.hpp"

namespace shmvdr::specfun {

namespace {
constexpr double kPi = 3.14159265358979323846;

// Power series around zero: j_n(x) = x^n/(2n+1)!! * sum_k (-x^2/2)^k / (k! (2n+2k+1)!!)
double sph_bessel_series(int n, double x) {
  double dfact = 1.0;  // (2n+1)!!
  for (int i = 1; i <= n; ++i) dfact *= 2.0 * i + 1.0;
  double term = std::pow(x, n) / dfact;
  double sum = term;
  const double x2h = 0.5 * x * x;
  for (int k = 1; k < 40; ++k) {
    term *= -x2h / (k * (2.0 * n + 2.0 * k + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Miller downward recurrence, normalized against j_0 or j_1 (whichever is
// larger in magnitude, so normalization never divides by a Bessel zero).
double sph_bessel_downward(int n, double x) {
  const int start = n + 24 + static_cast<int>(x);
  double jp = 0.0;          // j_{m+1}
  double jc = 1e-30;        // j_m (arbitrary scale)
  double jn = 0.0, j1 = 0.0, j0 = 0.0;
  for (int m = start; m >= 0; --m) {
    double jm = (2.0 * m + 3.0) / x * jc - jp;
    jp = jc;
    jc = jm;
    if (m == n) jn = jm;
    if (m == 1) j1 = jm;
    if (m == 0) j0 = jm;
    if (std::abs(jc) > 1e250) {  // rescale to avoid overflow
      jc *= 1e-250;
      jp *= 1e-250;
      jn *= 1e-250;
      j1 *= 1e-250;
    }
  }
  const double j0_true = std::sin(x) / x;
  const double j1_true = std::sin(x) / (x * x) - std::cos(x) / x;
  if (std::abs(j0) >= std::abs(j1)) return jn * (j0_true / j0);
  return jn * (j1_true / j1);
}

}  // namespace

int sh_flat_index(SHIndex idx) {
  if (!idx.valid()) throw Error(ErrorCode::InvalidArgument, "SH index out of range");
  return idx.n * idx.n + idx.n + idx.m;
}

SHIndex sh_index_from_flat(int flat) {
  if (flat < 0) throw Error(ErrorCode::InvalidArgument, "negative flat SH index");
  int n = static_cast<int>(std::sqrt(static_cast<double>(flat)));
  while ((n + 1) * (n + 1) <= flat) ++n;
  while (n * n > flat) --n;
  return SHIndex{n, flat - n * n - n};
}

double sph_bessel_j(int n, double x) {
  if (n < 0 || x < 0.0 || !std::isfinite(x))
    throw Error(ErrorCode::InvalidArgument, "sph_bessel_j requires n >= 0, x >= 0 finite");
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x < 0.1 * (n + 1)) return sph_bessel_series(n, x);
  switch (n) {
    case 0: return std::sin(x) / x;
    case 1: return std::sin(x) / (x * x) - std::cos(x) / x;
    case 2: return (3.0 / (x * x) - 1.0) * std::sin(x) / x - 3.0 * std::cos(x) / (x * x);
    default: return sph_bessel_downward(n, x);
  }
}

std::complex<double> sph_harmonic(SHIndex idx, double theta, double phi) {
  if (!idx.valid()) throw Error(ErrorCode::InvalidArgument, "SH index out of range");
  const int n = idx.n;
  const int am = std::abs(idx.m);
  const double x = std::cos(theta);

  // Associated Legendre P_n^m(x) with Condon-Shortley phase, normalized on
  // the fly: p carries sqrt((2n+1)/(4pi) (n-m)!/(n+m)!) P_n^m.
  // Diagonal term: norm(m,m) * (-1)^m (2m-1)!! (1-x^2)^{m/2}
  double pmm = 1.0 / std::sqrt(4.0 * kPi);
  if (am > 0) {
    const double sx = std::sqrt((1.0 - x) * (1.0 + x));  // sin(theta) >= 0
    for (int i = 1; i <= am; ++i)
      pmm *= -sx * std::sqrt((2.0 * i + 1.0) / (2.0 * i));
  }
  double p;
  if (n == am) {
    p = pmm;
  } else {
    double pm1 = pmm;
    double pm = x * std::sqrt(2.0 * am + 3.0) * pmm;
    for (int l = am + 2; l <= n; ++l) {
      const double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - am * am));
      const double b = std::sqrt(((l - 1.0) * (l - 1.0) - am * am) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      const double pl = a * (x * pm - b * pm1);
      pm1 = pm;
      pm = pl;
    }
    p = pm;
  }

  const std::complex<double> e(std::cos(am * phi), std::sin(am * phi));
  std::complex<double> y = p * e;
  if (idx.m < 0) {
    // Y_{n,-|m|} = (-1)^|m| conj(Y_{n,|m|})
    y = std::conj(y);
    if (am & 1) y = -y;
  }
  return y;
}

std::complex<double> sph_harmonic(int n, int m, double theta, double phi) {
  return sph_harmonic(SHIndex{n, m}, theta, phi);
}

int max_order(double k, double r_a) {
  if (!(k > 0.0) || !(r_a > 0.0))
    throw Error(ErrorCode::InvalidArgument, "max_order requires k > 0 and r_a > 0");
  return static_cast<int>(std::ceil(k * r_a));
}

}  // namespace shmvdr::specfun
