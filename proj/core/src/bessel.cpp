#include "pat/bessel.hpp"
#include "pat/errors.hpp"

#include <cmath>
#include <limits>

namespace pat {

namespace {

using cplx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// Ascending series; stable for |z| <= 2 where the log/series cancellation
// costs at most a few digits.
BesselK01 series_k01(cplx z) {
    const cplx z2q = 0.25 * z * z;
    const cplx logz2 = std::log(0.5 * z);

    cplx i0(1.0, 0.0), sum0(0.0, 0.0);
    cplx i1_series(1.0, 0.0);  // I1 = (z/2) * sum z2q^k/(k!(k+1)!)
    cplx sum1(0.0, 0.0);
    double hk = 0.0;  // harmonic number H_k

    cplx term0(1.0, 0.0);   // z2q^k/(k!)^2
    cplx term1(1.0, 0.0);   // z2q^k/(k!(k+1)!)
    double psi_a = -kEulerGamma;        // psi(k+1)
    double psi_b = 1.0 - kEulerGamma;   // psi(k+2)
    sum1 += (psi_a + psi_b) * term1;

    for (int k = 1; k <= 40; ++k) {
        term0 *= z2q / static_cast<double>(k * k);
        term1 *= z2q / static_cast<double>(k * (k + 1));
        hk += 1.0 / k;
        i0 += term0;
        sum0 += term0 * hk;
        i1_series += term1;
        psi_a = -kEulerGamma + hk;
        psi_b = psi_a + 1.0 / (k + 1);
        sum1 += (psi_a + psi_b) * term1;
        if (std::abs(term0) < 1e-18 * std::abs(i0) && k > 3) break;
    }

    const cplx i1 = 0.5 * z * i1_series;
    BesselK01 out;
    out.k0 = -(logz2 + kEulerGamma) * i0 + sum0;
    out.k1 = 1.0 / z + logz2 * i1 - 0.25 * z * sum1;
    return out;
}

// Temme continued fraction (CF2), evaluating K0 and K1 together.
// Converges for Re(z) > 0; used on the middle range of |z|.
BesselK01 cf2_k01(cplx z) {
    const double eps = std::numeric_limits<double>::epsilon();
    const int max_iter = 100000;

    const cplx a1(0.25, 0.0);
    cplx b = 2.0 * (1.0 + z);
    cplx d = 1.0 / b;
    cplx delh = d, h = d;
    cplx q1(0.0, 0.0), q2(1.0, 0.0);
    cplx q = a1, c = a1;
    cplx a = -a1;
    cplx s = 1.0 + q * delh;

    for (int i = 2; i <= max_iter; ++i) {
        a -= 2.0 * (i - 1);
        c = -a * c / static_cast<double>(i);
        const cplx qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const cplx dels = q * delh;
        s += dels;
        if (std::abs(dels) < eps * std::abs(s)) {
            BesselK01 out;
            out.k0 = std::sqrt(kPi / (2.0 * z)) * std::exp(-z) / s;
            h = a1 * h;
            out.k1 = out.k0 * (z + 0.5 - h) / z;
            return out;
        }
    }
    throw NumericError("bessel_k01: continued fraction did not converge");
}

// K_nu(z) ~ sqrt(pi/(2z)) e^{-z} sum_k a_k(nu)/z^k with
// a_k = a_{k-1} (4 nu^2 - (2k-1)^2)/(8k).
BesselK01 asymptotic_k01(cplx z) {
    const cplx pref = std::sqrt(kPi / (2.0 * z)) * std::exp(-z);
    cplx s0(1.0, 0.0), s1(1.0, 0.0);
    cplx t0(1.0, 0.0), t1(1.0, 0.0);
    for (int k = 1; k <= 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        t0 *= (-odd * odd) / (8.0 * k) / z;
        t1 *= (4.0 - odd * odd) / (8.0 * k) / z;
        s0 += t0;
        s1 += t1;
        if (std::abs(t0) < 1e-18 * std::abs(s0) && std::abs(t1) < 1e-18 * std::abs(s1)) break;
    }
    BesselK01 out;
    out.k0 = pref * s0;
    out.k1 = pref * s1;
    return out;
}

}  // namespace

BesselK01 bessel_k01(std::complex<double> z) {
    if (!(z.real() > 0.0))
        throw NumericError("bessel_k01: requires Re(z) > 0");

    if (z.real() > 745.0) {
        BesselK01 out;
        out.underflow = true;
        return out;
    }

    const double az = std::abs(z);
    if (az <= 2.0) return series_k01(z);
    if (az < 30.0) return cf2_k01(z);
    return asymptotic_k01(z);
}

std::complex<double> modified_bessel_k(int order, std::complex<double> z, bool* underflow) {
    if (order != 0 && order != 1)
        throw ConfigError("modified_bessel_k: order must be 0 or 1");
    const BesselK01 r = bessel_k01(z);
    if (underflow) *underflow = r.underflow;
    return order == 0 ? r.k0 : r.k1;
}

}  // namespace pat
