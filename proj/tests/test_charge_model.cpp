#include <cmath>
#include <numbers>

#include "braid/charge_model.hpp"
#include "braid/errors.hpp"
#include "doctest.h"

using namespace braid;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("single helix coefficients are all one") {
    const ChargeModel m = ChargeModel::single_helix();
    for (int n : {0, 5, -3, 40}) CHECK(m.zeta(n) == 1.0);
    CHECK(m.bound() == 1.0);
}

TEST_CASE("DNA-like closed form") {
    SUBCASE("net charge") {
        for (double th : {0.0, 0.3, 0.7, 1.0}) {
            const DnaParams p{th, 0.2, 0.5, 0.4 * pi};
            CHECK(dna_coefficients(p, 0) == th - 1.0);
        }
    }
    SUBCASE("bare phosphates") {
        for (int n = -6; n <= 6; ++n) CHECK(dna_coefficients({0.0, 0.0, 0.0, 0.9}, n) == doctest::Approx(-std::cos(n * 0.9)));
    }
    SUBCASE("reference point") {
        CHECK(dna_coefficients({0.7, 0.3, 0.3, 0.4 * pi}, 1) == doctest::Approx(-0.30901699437494745).epsilon(1e-14));
    }
    SUBCASE("even in n and bounded") {
        const ChargeModel m = ChargeModel::dna({0.6, 0.25, 0.45, 0.37 * pi}, 16);
        for (int n = 1; n <= 16; ++n) {
            CHECK(m.zeta(n) == m.zeta(-n));
            CHECK(std::abs(m.zeta(n) * m.zeta(-n)) <= m.bound() * m.bound());
        }
    }
}

TEST_CASE("quadrature of the DNA-like distribution matches the closed form") {
    for (const DnaParams& p : {DnaParams{0.7, 0.3, 0.3, 0.4 * pi}, DnaParams{0.85, 0.1, 0.6, 0.35 * pi},
                               DnaParams{0.0, 0.0, 0.0, 0.5}}) {
        const ChargeModel q = coefficients_from_radial(dna_distribution(p), 8);
        for (int n = -8; n <= 8; ++n) CHECK(std::abs(q.zeta(n) - dna_coefficients(p, n)) < 1e-10);
        CHECK(q.zeta(0) == doctest::Approx(p.theta - 1.0).epsilon(1e-14));
    }
}

TEST_CASE("radial distributions") {
    SUBCASE("uniform layer keeps only the monopole") {
        const RadialDistribution d{[](double) { return 1.0 / (2.0 * pi); }, {}};
        const ChargeModel m = coefficients_from_radial(d, 6);
        CHECK(m.zeta(0) == doctest::Approx(1.0).epsilon(1e-13));
        for (int n = 1; n <= 6; ++n) CHECK(std::abs(m.zeta(n)) < 1e-14);
    }
    SUBCASE("single line matches the single helix") {
        const RadialDistribution d{{}, {{1.0, 0.0}}};
        const ChargeModel m = coefficients_from_radial(d, 6);
        for (int n = -6; n <= 6; ++n) CHECK(m.zeta(n) == doctest::Approx(1.0));
    }
    SUBCASE("Parseval for a smooth density") {
        const double c0 = 0.4, c1 = 0.3, c2 = -0.2, c3 = 0.05;
        const RadialDistribution d{
            [=](double t) { return c0 + c1 * std::cos(t) + c2 * std::cos(2 * t) + c3 * std::cos(3 * t); }, {}};
        const ChargeModel m = coefficients_from_radial(d, 8);
        double sum = 0.0;
        for (int n = -8; n <= 8; ++n) sum += m.zeta(n) * m.zeta(n);
        const double l2 = 2 * pi * (c0 * c0 + (c1 * c1 + c2 * c2 + c3 * c3) / 2);
        CHECK(sum / (2 * pi) == doctest::Approx(l2).epsilon(1e-12));
        CHECK(m.zeta(1) == doctest::Approx(pi * c1).epsilon(1e-13));
        CHECK(m.zeta(-2) == doctest::Approx(pi * c2).epsilon(1e-13));
    }
    SUBCASE("asymmetric distributions are rejected") {
        const RadialDistribution d{{}, {{1.0, 0.3}}};
        CHECK_THROWS_AS(coefficients_from_radial(d, 4), ValidationError);
    }
}

TEST_CASE("explicit table") {
    const ChargeModel m = ChargeModel::from_table({{0, -0.3}, {1, 0.5}, {-1, 0.5}});
    CHECK(m.zeta(0) == -0.3);
    CHECK(m.zeta(1) == 0.5);
    CHECK(m.zeta(2) == 0.0);
    CHECK(m.n_max() == 1);
    CHECK(m.bound() == 0.5);
    CHECK_THROWS_AS(ChargeModel::from_table({{0, std::nan("")}}), ValidationError);
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ChargeModel::dna({1.2, 0.0, 0.0, 0.1}), ValidationError);
    CHECK_THROWS_AS(ChargeModel::dna({0.5, 0.7, 0.5, 0.1}), ValidationError);
    CHECK_THROWS_AS(ChargeModel::dna({0.5, -0.1, 0.5, 0.1}), ValidationError);
}

TEST_CASE("DNA monopole coefficient is exactly the net charge") {
    for (double theta : {0.0, 0.3, 0.7, 0.85, 1.0})
        for (double f1 : {0.0, 0.1, 0.45})
            for (double f2 : {0.0, 0.2, 0.55}) CHECK(dna_coefficients({theta, f1, f2, 1.1}, 0) == theta - 1.0);
}
