#pragma once

#include <complex>

namespace shmvdr::specfun {

// Index of one spherical-harmonic coefficient: order n >= 0, mode |m| <= n.
// Flat layout is (0,0), (1,-1), (1,0), (1,1), (2,-2), ... i.e. n^2 + n + m.
struct SHIndex {
  int n = 0;
  int m = 0;

  bool valid() const { return n >= 0 && m >= -n && m <= n; }
};

inline int sh_count(int order) { return (order + 1) * (order + 1); }
int sh_flat_index(SHIndex idx);
SHIndex sh_index_from_flat(int flat);

// Spherical Bessel function of the first kind, j_n(x), n >= 0, x >= 0.
// Series near zero, trigonometric closed forms for n <= 2, downward
// recurrence otherwise; ~1e-12 relative for n <= 8, x <= 50.
double sph_bessel_j(int n, double x);

// Orthonormal complex spherical harmonic with Condon-Shortley phase.
// theta is the angle from +z in [0, pi], phi the azimuth.
std::complex<double> sph_harmonic(SHIndex idx, double theta, double phi);
std::complex<double> sph_harmonic(int n, int m, double theta, double phi);

// Truncation order for wavenumber k at array radius r_a: N_k = ceil(k * r_a).
int max_order(double k, double r_a);

inline double wavenumber(double frequency_hz, double speed_of_sound) {
  return 2.0 * 3.14159265358979323846 * frequency_hz / speed_of_sound;
}

}  // namespace shmvdr::specfun
