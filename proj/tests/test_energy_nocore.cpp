#include <boost/math/special_functions/bessel.hpp>
#include <chrono>
#include <cmath>
#include <complex>
#include <numbers>

#include "braid/energy_nocore.hpp"
#include "braid/errors.hpp"
#include "doctest.h"

using namespace braid;
namespace bm = boost::math;

namespace {
constexpr double pi = std::numbers::pi;

BraidState state(double R, double a, double eta, double w3 = 0.0, double rate = 1.0) {
    BraidState s = BraidState::make(R, a, eta, w3);
    s.dxi1_ds = rate;
    s.dxi2_ds = rate;
    return s;
}

double I(int n, double x) { return bm::cyl_bessel_i(std::abs(n), x); }
double K(int n, double x) { return bm::cyl_bessel_k(std::abs(n), x); }
double J(int n, double x) { return bm::cyl_bessel_j(n, x); }

// Plain six-fold loop with Boost Bessel functions and no table reuse.
double naive_density(const BraidState& st, double kappa_D, const Truncation& tr, const ChargeModel& ch) {
    const TiltPair t = tilts_from_state(st.eta, st.omegaA[2], st.R);
    const auto [s1, s2] = sigma_from_tilts(t);
    const double w = st.omegaA[0], x1 = st.dxi1_ds, x2 = st.dxi2_ds;
    std::complex<double> sum = 0.0;
    for (int n = -tr.n_cap; n <= tr.n_cap; ++n)
        for (int np = -tr.n_cap; np <= tr.n_cap; ++np)
            for (int m = -tr.m_cap; m <= tr.m_cap; ++m)
                for (int mp = -tr.m_cap; mp <= tr.m_cap; ++mp)
                    for (int j = -tr.j_cap; j <= tr.j_cap; ++j)
                        for (int jp = -tr.j_cap; jp <= tr.j_cap; ++jp) {
                            const int l = 2 * m - n - j, lp = np - 2 * mp - jp;
                            const double k = -(n * (w - x1) + np * (w - x2) + (2 * m - j) * x1 + (2 * mp + jp) * x2) / 2;
                            const double kap = std::sqrt(k * k + kappa_D * kappa_D), x = st.a * kap;
                            const double v = ((np & 1) ? -1.0 : 1.0) * K(np - n, st.R * kap) *
                                             I(n - m, x * (1 - std::cos(t.eta1)) / 2) * I(m, x * (1 + std::cos(t.eta1)) / 2) *
                                             I(np - mp, x * (1 - std::cos(t.eta2)) / 2) * I(mp, x * (1 + std::cos(t.eta2)) / 2) *
                                             J(j, st.a * k * std::sin(t.eta1)) * J(jp, st.a * k * std::sin(t.eta2)) *
                                             ch.zeta(l) * ch.zeta(lp);
                            sum += v * std::polar(1.0, l * st.xi1 + lp * st.xi2);
                        }
    return (2.0 * s1 * s2 * sum).real();
}
}  // namespace

TEST_CASE("axial wavenumber of a term") {
    const BraidState st = state(3.0, 1.0, 0.4);
    const auto z = mode_wavenumber({}, st, 1.5);
    CHECK(z.k == 0.0);
    CHECK(z.kappa == 1.5);
    ModeIndex one;
    one.n = 1;
    CHECK(mode_wavenumber(one, st, 1.0).k == doctest::Approx(-(st.omegaA[0] - st.dxi1_ds) / 2));
    ModeIndex i{2, -1, 1, 0, -1, 2};
    const double w = st.omegaA[0];
    const double k = mode_wavenumber(i, st, 1.0).k;
    const double lit = -(i.n * (w - 1.0) + i.np * (w - 1.0) + (2 * i.m - i.j) * 1.0 + (2 * i.mp + i.jp) * 1.0) / 2;
    CHECK(k == doctest::Approx(lit));
}

TEST_CASE("line-charge limit") {
    PhysicalParams ph;
    const auto t0 = std::chrono::steady_clock::now();
    const double v = energy_density_nocore(state(3.0, 0.0, 0.0, 0.0, 0.0), ph, {}).value;
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(std::abs(v - 2.0 * bm::cyl_bessel_k(0, 3.0)) <= 1e-8 * 2.0 * bm::cyl_bessel_k(0, 3.0));
    CHECK(dt < 1.0);
    // phase independent in this limit
    BraidState s = state(3.0, 0.0, 0.0, 0.0, 0.0);
    s.xi1 = 1.3;
    CHECK(energy_density_nocore(s, ph, {}).value == doctest::Approx(v).epsilon(1e-14));
}

TEST_CASE("six-fold sum against a plain loop") {
    Truncation tr;
    tr.n_cap = 3;
    tr.m_cap = 2;
    tr.j_cap = 2;
    PhysicalParams ph;
    for (const auto& ch : {ChargeModel::single_helix(), ChargeModel::dna({0.7, 0.3, 0.3, 0.4 * pi})}) {
        BraidState st = state(3.0, 1.0, 0.35, 0.04, 0.9);
        st.dxi2_ds = 1.1;
        st.xi1 = 0.3;
        st.xi2 = -0.8;
        const double ref = naive_density(st, 1.0, tr, ch);
        CHECK(energy_density_nocore(st, ph, tr, &ch).value == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("realness") {
    PhysicalParams ph;
    BraidState st = state(3.0, 1.0, 0.3);
    st.xi1 = 0.4;
    st.xi2 = 1.9;
    const auto d = energy_density_nocore(st, ph, {});
    CHECK(d.imag_residual < 1e-10 * std::abs(d.value));
}

TEST_CASE("rod exchange") {
    PhysicalParams ph;
    Truncation tr;
    tr.n_cap = 6;
    tr.m_cap = 4;
    tr.j_cap = 4;
    BraidState a = state(3.0, 1.0, 0.3, 0.05);
    a.xi1 = 0.4;
    a.xi2 = 1.1;
    a.dxi1_ds = 0.9;
    a.dxi2_ds = 1.2;
    BraidState b = state(3.0, 1.0, 0.3, -0.05);
    // a half turn about the axis swaps the rods and advances both helix phases by pi
    b.xi1 = a.xi2 + pi;
    b.xi2 = a.xi1 + pi;
    b.dxi1_ds = a.dxi2_ds;
    b.dxi2_ds = a.dxi1_ds;
    const double ea = energy_density_nocore(a, ph, tr).value, eb = energy_density_nocore(b, ph, tr).value;
    CHECK(std::abs(ea - eb) <= 1e-10 * std::abs(ea));
}

TEST_CASE("scaling all lengths leaves the reduced energy unchanged") {
    const double lam = 2.5;
    PhysicalParams p1, p2;
    p2.kappa_D = 1.0 / lam;
    BraidState a = state(3.0, 1.0, 0.3, 0.05, 1.0);
    a.xi1 = 0.7;
    BraidState b = state(3.0 * lam, lam, 0.3, 0.05 / lam, 1.0 / lam);
    b.xi1 = 0.7;
    const double ea = energy_density_nocore(a, p1, {}).value, eb = energy_density_nocore(b, p2, {}).value;
    CHECK(eb == doctest::Approx(ea).epsilon(1e-12));
}

TEST_CASE("screening decay") {
    PhysicalParams ph;
    BraidState near = state(3.0, 1.0, 20 * pi / 180);
    BraidState far = state(10.0, 1.0, 20 * pi / 180);
    CHECK(std::abs(mean_density_nocore(near, ph, {})) > 500.0 * std::abs(mean_density_nocore(far, ph, {})));
}

TEST_CASE("truncation estimate bounds the effect of larger caps") {
    PhysicalParams ph;
    const BraidState st = state(3.0, 1.0, 0.3);
    Truncation small;
    small.n_cap = 5;
    small.m_cap = 4;
    small.j_cap = 4;
    const auto d = energy_density_nocore(st, ph, small);
    for (Truncation big : {small, small, small}) {
        static int which = 0;
        if (which == 0) big.n_cap += 2;
        if (which == 1) big.m_cap += 2;
        if (which == 2) big.j_cap += 2;
        ++which;
        CHECK(std::abs(energy_density_nocore(st, ph, big).value - d.value) < d.truncation_estimate);
    }
    CHECK(d.terms > 0);
}

TEST_CASE("braid average keeps the non-advancing phase combinations") {
    PhysicalParams ph;
    Truncation tr;
    tr.n_cap = 5;
    tr.m_cap = 4;
    tr.j_cap = 4;
    BraidState st = state(3.0, 1.0, 0.3);
    const PhaseSpectrum sp = spectrum_nocore(st, ph, tr);
    // direct average of the local density over one common helix period
    const int steps = 256;
    double avg = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double ph1 = 2 * pi * i / steps;
        avg += sp.evaluate(0.5 + ph1, ph1).real() / steps;
    }
    st.xi1 = 0.5;
    CHECK(mean_density_nocore(st, ph, tr) == doctest::Approx(avg).epsilon(1e-12));
    CHECK(sp.phase_average(1.0, 1.0, 0.5, 0.0).real() == doctest::Approx(avg).epsilon(1e-12));
    // static helices: no averaging at all
    CHECK(sp.phase_average(0.0, 0.0, 0.5, 0.2).real() == doctest::Approx(sp.evaluate(0.5, 0.2).real()).epsilon(1e-14));
}

TEST_CASE("axial integration") {
    PhysicalParams ph;
    Truncation tr;
    tr.n_cap = 4;
    tr.m_cap = 3;
    tr.j_cap = 3;
    const BraidState st = state(3.0, 1.0, 0.2);
    const double d = energy_density_nocore(st, ph, tr).value;
    std::vector<BraidState> states(5, st);
    const std::vector<double> s{0.0, 0.5, 1.0, 2.0, 3.0};
    const auto tot = total_energy_nocore(states, s, ph, tr);
    CHECK(tot.value == doctest::Approx(3.0 * d).epsilon(1e-14));
    CHECK_FALSE(tot.grid_warning);
    CHECK(total_energy_nocore({st}, {0.0}, ph, tr).value == 0.0);

    // smooth profile: halving the spacing changes the integral by less than 0.1%
    auto integral = [&](int n) {
        std::vector<double> dens, ss;
        for (int i = 0; i <= n; ++i) {
            const double x = 2.0 * i / n;
            ss.push_back(x);
            dens.push_back(energy_density_nocore(state(3.0 + 0.5 * std::sin(x), 1.0, 0.2), ph, tr).value);
        }
        return integrate_densities(dens, ss).value;
    };
    const double c = integral(16), f = integral(32);
    CHECK(std::abs(c - f) < 1e-3 * std::abs(f));
    CHECK_THROWS_AS(integrate_densities({1.0, 2.0}, {1.0, 0.0}), ValidationError);
    CHECK(integrate_densities({1.0, 3.0}, {0.0, 1.0}).grid_warning);
}

TEST_CASE("input validation") {
    PhysicalParams bad;
    bad.kappa_D = 0.0;
    CHECK_THROWS_AS(energy_density_nocore(state(3.0, 1.0, 0.2), bad, {}), ValidationError);
    Truncation t;
    t.n_cap = -1;
    CHECK_THROWS_AS(energy_density_nocore(state(3.0, 1.0, 0.2), {}, t), ValidationError);
}
