#pragma once

#include <complex>

namespace pat {

struct BesselK01 {
    std::complex<double> k0{0.0, 0.0};
    std::complex<double> k1{0.0, 0.0};
    bool underflow = false;  // result below the exp-underflow range, exact 0 returned
};

/// Second-kind modified Bessel functions K0(z) and K1(z) for Re(z) > 0.
/// Power series for |z| <= 2, a Temme-style continued fraction in the middle,
/// and the large-argument asymptotic series for |z| >= 30. Accurate to about
/// 1e-11 relative on 0.05 <= |z| <= 700, |arg z| < pi/2.
BesselK01 bessel_k01(std::complex<double> z);

/// Single-order convenience wrapper; order must be 0 or 1.
std::complex<double> modified_bessel_k(int order, std::complex<double> z,
                                       bool* underflow = nullptr);

}  // namespace pat
