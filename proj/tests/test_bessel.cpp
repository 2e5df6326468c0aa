#include "pat/bessel.hpp"
#include "pat/errors.hpp"

#include "support/quad_bessel.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>

using namespace pat;
using cplx = std::complex<double>;

TEST_SUITE_BEGIN("bessel");

TEST_CASE("reference values at z = 1") {
    // frozen from the quad-precision oracle
    const double k0_ref = 0.42102443824070834;
    const double k1_ref = 0.6019072301972346;
    const auto orc = oracle::bessel_k01_reference({1.0, 0.0});
    CHECK(std::abs(orc.k0.real() - k0_ref) <= 1e-14);
    CHECK(std::abs(orc.k1.real() - k1_ref) <= 1e-14);

    const BesselK01 got = bessel_k01({1.0, 0.0});
    CHECK(std::abs(got.k0.real() - k0_ref) <= 1e-10 * k0_ref);
    CHECK(std::abs(got.k1.real() - k1_ref) <= 1e-10 * k1_ref);
    CHECK(std::abs(got.k0.imag()) <= 1e-14);
}

TEST_CASE("leading asymptotic behavior at x = 50") {
    const BesselK01 got = bessel_k01({50.0, 0.0});
    const double lead = std::sqrt(3.14159265358979 / 100.0) * std::exp(-50.0) * (1.0 - 1.0 / 400.0);
    CHECK(std::abs(got.k0.real() - lead) <= 1e-3 * lead);
}

TEST_CASE("accuracy sweep across magnitude and phase") {
    double worst = 0.0;
    for (double am = std::log(0.05); am <= std::log(700.0); am += 0.35) {
        const double mag = std::exp(am);
        for (const double deg : {-89.0, -75.0, -45.0, -15.0, 0.0, 15.0, 45.0, 75.0, 89.0}) {
            const double phi = deg * 3.14159265358979 / 180.0;
            const cplx z = mag * cplx(std::cos(phi), std::sin(phi));
            const BesselK01 got = bessel_k01(z);
            const auto ref = oracle::bessel_k01_reference(z);
            const double e0 = std::abs(got.k0 - ref.k0) / std::abs(ref.k0);
            const double e1 = std::abs(got.k1 - ref.k1) / std::abs(ref.k1);
            worst = std::max({worst, e0, e1});
            CHECK(e0 <= 1e-10);
            CHECK(e1 <= 1e-10);
        }
    }
    MESSAGE("worst relative error ", worst);
}

TEST_CASE("domain and range handling") {
    CHECK_THROWS_AS(bessel_k01({-1.0, 0.5}), NumericError);
    CHECK_THROWS_AS(bessel_k01({0.0, 1.0}), NumericError);

    const BesselK01 under = bessel_k01({800.0, 10.0});
    CHECK(under.underflow);
    CHECK(under.k0 == cplx(0.0, 0.0));
    CHECK(under.k1 == cplx(0.0, 0.0));

    bool flag = true;
    const cplx v = modified_bessel_k(0, {2.0, 0.0}, &flag);
    CHECK_FALSE(flag);
    CHECK(v.real() > 0.0);
    CHECK_THROWS_AS(modified_bessel_k(2, {2.0, 0.0}, nullptr), ConfigError);
}

TEST_SUITE_END();
