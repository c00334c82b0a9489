#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "braid/energy_dielectric.hpp"
#include "braid/errors.hpp"
#include "doctest.h"

using namespace braid;
namespace bm = boost::math;

namespace {
constexpr double pi = std::numbers::pi;

BraidState state(double eta, double w3 = 0.0, double R = 3.0, double a = 1.0) {
    BraidState s = BraidState::make(R, a, eta, w3);
    s.dxi1_ds = 1.0;
    s.dxi2_ds = 1.0;
    return s;
}

// every cap equal, so the three levels sum over the same modes
Truncation matched(int c) {
    Truncation t;
    t.n_cap = t.m_cap = t.j_cap = t.l_cap = t.np_cap = c;
    return t;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
}  // namespace

TEST_CASE("approximation level names") {
    for (ApproxLevel l : {ApproxLevel::Full, ApproxLevel::Diagonal, ApproxLevel::SmallAngle})
        CHECK(parse_approx_level(to_string(l)) == l);
    CHECK_THROWS_AS(parse_approx_level("exact"), ValidationError);
}

TEST_CASE("transparent cores reproduce the no-core energy") {
    const ChargeModel ch = ChargeModel::dna({0.7, 0.3, 0.3, 0.4 * pi});
    const Truncation tr = matched(4);
    DielectricOptions opt;
    opt.core = CoreModel::Transparent;
    BraidState st = state(0.3, 0.04);
    st.dxi2_ds = 1.2;
    st.xi1 = 0.5;
    const PhysicalParams ph;
    const auto d = e_dir_full(st, ch, ph, tr, opt);
    const double nocore = mean_density_nocore(st, ph, tr, &ch);
    CHECK(std::abs(d[0] + d[1] + d[2] - nocore) <= 1e-10 * std::abs(nocore));
    for (int rod = 1; rod <= 2; ++rod)
        for (double v : e_img_full(rod, st, ch, ph, tr, opt)) CHECK(v == 0.0);
    opt.averaging = Averaging::Local;
    const auto dl = e_dir_full(st, ch, ph, tr, opt);
    CHECK(std::abs(dl[0] + dl[1] + dl[2] - energy_density_nocore(st, ph, tr, &ch).value) <= 1e-10 * std::abs(nocore));
}

TEST_CASE("direct tilt corrections") {
    const ChargeModel ch = ChargeModel::single_helix();
    const PhysicalParams ph;
    const Truncation tr = matched(4);
    SUBCASE("untilted rods") {
        const auto d = e_dir_full(state(0.0), ch, ph, tr);
        CHECK(d[1] == 0.0);
        CHECK(d[2] == 0.0);
    }
    SUBCASE("symmetric braid") {
        const auto d = e_dir_full(state(0.3), ch, ph, tr);
        CHECK(std::abs(d[1] + d[2]) < 1e-12 * std::abs(d[0]));
        const auto g = e_dir_diagonal(state(0.3), ch, ph, tr);
        CHECK(std::abs(g[1] + g[2]) < 1e-12 * std::abs(g[0]));
    }
}

TEST_CASE("image parts beyond the leading one vanish without tilt") {
    const auto v = e_img_full(1, state(0.0), ChargeModel::single_helix(), {}, matched(3));
    CHECK(v[0] > 0.0);
    CHECK(v[1] == 0.0);
    CHECK(v[2] == 0.0);
    CHECK(v[3] == 0.0);
    const auto g = e_img_diagonal(2, state(0.0), ChargeModel::single_helix(), {}, matched(3));
    CHECK(g[3] == 0.0);
}

TEST_CASE("rod exchange") {
    // a half turn about the axis swaps the rods, flips w_A3 and advances both phases by pi
    const ChargeModel ch = ChargeModel::single_helix();
    const Truncation tr = matched(3);
    DielectricOptions loc;
    loc.averaging = Averaging::Local;
    BraidState a = state(0.3, 0.05);
    a.dxi1_ds = 0.9;
    a.dxi2_ds = 1.1;
    a.xi1 = 0.4;
    a.xi2 = 1.0;
    BraidState b = state(0.3, -0.05);
    b.dxi1_ds = a.dxi2_ds;
    b.dxi2_ds = a.dxi1_ds;
    b.xi1 = a.xi2 + pi;
    b.xi2 = a.xi1 + pi;
    const auto i1 = e_img_full(1, a, ch, {}, tr, loc), i2 = e_img_full(2, b, ch, {}, tr, loc);
    CHECK(rel(i1[0], i2[0]) < 1e-10);
    CHECK(rel(i1[1], i2[2]) < 1e-10);
    CHECK(rel(i1[2], i2[1]) < 1e-10);
    const auto d1 = e_dir_full(a, ch, {}, tr, loc), d2 = e_dir_full(b, ch, {}, tr, loc);
    CHECK(rel(d1[0], d2[0]) < 1e-10);
    CHECK(rel(d1[1], d2[2]) < 1e-10);
    CHECK(rel(d1[2], d2[1]) < 1e-10);
}

TEST_CASE("untilted full and small-angle levels agree") {
    const ChargeModel ch = ChargeModel::single_helix();
    const Truncation tr = matched(4);
    const BraidState st = state(0.0);
    const auto full_img = e_img_full(1, st, ch, {}, tr);
    const auto full_dir = e_dir_full(st, ch, {}, tr);
    const EnergyBreakdown sa = e_small_angle(st, ch, {}, tr);
    CHECK(rel(full_img[0], sa.e_img1_parts[0]) < 1e-8);
    CHECK(rel(full_dir[0], sa.e_dir_0) < 1e-8);
}

TEST_CASE("diagonal level equals the full level at a common phase rate") {
    const ChargeModel ch = ChargeModel::single_helix();
    const Truncation tr = matched(4);
    BraidState st = state(0.3);
    st.xi1 = 0.6;
    const auto fd = e_dir_full(st, ch, {}, tr), gd = e_dir_diagonal(st, ch, {}, tr);
    for (int c = 0; c < 3; ++c) CHECK(std::abs(fd[c] - gd[c]) <= 1e-10 * std::abs(fd[0]));
    const auto fi = e_img_full(1, st, ch, {}, tr), gi = e_img_diagonal(1, st, ch, {}, tr);
    for (int c = 0; c < 4; ++c) CHECK(std::abs(fi[c] - gi[c]) <= 1e-10 * std::abs(fi[0]));
    CHECK(diagonal_validity_ratio(st, 1.0) == 0.0);
    st.dxi1_ds = 1.1;
    CHECK(diagonal_validity_ratio(st, 1.0) == doctest::Approx(0.1));
}

TEST_CASE("diagonal direct tilt corrections are even in w_A3") {
    // flipping w_A3 swaps the two rods, so the summed correction starts at second order
    const ChargeModel ch = ChargeModel::single_helix();
    const Truncation tr = matched(4);
    const auto g0 = e_dir_diagonal(state(0.3, 0.0), ch, {}, tr);
    CHECK(std::abs(g0[1] + g0[2]) < 1e-14);
    const auto g1 = e_dir_diagonal(state(0.3, 0.01), ch, {}, tr);
    const auto g2 = e_dir_diagonal(state(0.3, 0.02), ch, {}, tr);
    CHECK((g2[1] + g2[2]) / (g1[1] + g1[2]) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("phase parity of the dipole terms") {
    // only n = 0 and n = +-1 in the spectrum: E(phase) = A + B cos(phase)
    const ChargeModel ch = ChargeModel::from_table({{0, -0.3}, {1, 0.6}, {-1, 0.6}});
    const Truncation tr = matched(4);
    auto total = [&](double phase) {
        BraidState st = state(0.2);
        st.xi1 = phase;
        return energy_breakdown(st, ch, {}, tr, ApproxLevel::Diagonal).total();
    };
    const double e0 = total(0.0), ep = total(pi), eh = total(pi / 2);
    CHECK(std::abs(e0 + ep - 2.0 * eh) < 1e-12 * std::abs(e0));
    CHECK(std::abs(e0 - ep) > 1e-6);
}

TEST_CASE("stretch factors squared to first order") {
    const double eta = 0.4, h = eta / 2;
    for (double x : {0.005, 0.01, 0.02}) {
        const auto f = rod_frequencies(state(eta, x / 3.0));
        const double lin1 = 1.0 / (std::cos(h) * std::cos(h)) + x;
        const double lin2 = 1.0 / (std::cos(h) * std::cos(h)) - x;
        CHECK(std::abs(f.sigma1 * f.sigma1 - lin1) < 2.0 * x * x);
        CHECK(std::abs(f.sigma2 * f.sigma2 - lin2) < 2.0 * x * x);
    }
}

TEST_CASE("small-angle level") {
    const PhysicalParams ph;
    SUBCASE("monopole-only spectrum has no tilt or twist parts") {
        BraidState st = state(0.2, 0.02);
        const EnergyBreakdown e = e_small_angle(st, ChargeModel::from_table({{0, -0.4}}), ph, matched(4));
        CHECK(e.e_dir_1 == 0.0);
        CHECK(e.e_dir_2 == 0.0);
        CHECK(e.e_img1_parts[1] == 0.0);
        CHECK(e.e_img2_parts[1] == 0.0);
        CHECK(e.e_dir_0 != 0.0);
        CHECK(e.incomplete_omega_terms);
    }
    SUBCASE("thin rods reduce to two line charges") {
        const EnergyBreakdown e = e_small_angle(state(0.0, 0.0, 3.0, 1e-4), ChargeModel::from_table({{0, 1.0}}), ph, matched(4));
        CHECK(e.e_dir_0 == doctest::Approx(2.0 * bm::cyl_bessel_k(0, 3.0)).epsilon(1e-6));
    }
    SUBCASE("image self-energy is non-negative for square spectra") {
        for (double R : {2.5, 3.0, 4.0})
            for (const auto& ch : {ChargeModel::single_helix(), ChargeModel::dna({0.7, 0.3, 0.3, 0.4 * pi})}) {
                const EnergyBreakdown e = e_small_angle(state(0.1, 0.0, R), ch, ph, matched(4));
                CHECK(e.e_img1_parts[0] >= 0.0);
                CHECK(e.e_img2_parts[0] >= 0.0);
            }
    }
    SUBCASE("difference from the diagonal level is second order in the tilt") {
        const ChargeModel ch = ChargeModel::single_helix();
        const Truncation tr = matched(4);
        std::vector<double> diff;
        for (double eta : {0.05, 0.1, 0.2}) {
            const double d = energy_breakdown(state(eta), ch, ph, tr, ApproxLevel::Diagonal).total();
            const double s = energy_breakdown(state(eta), ch, ph, tr, ApproxLevel::SmallAngle).total();
            diff.push_back(std::abs(s - d) / std::abs(d));
        }
        const double slope = std::log(diff[2] / diff[0]) / std::log(std::sin(0.2) / std::sin(0.05));
        CHECK(slope >= 1.8);
        CHECK(slope <= 2.2);
    }
    SUBCASE("transparent cores are rejected") {
        DielectricOptions opt;
        opt.core = CoreModel::Transparent;
        CHECK_THROWS_AS(energy_breakdown(state(0.1), ChargeModel::single_helix(), ph, matched(3), ApproxLevel::SmallAngle, opt),
                        ValidationError);
    }
}

TEST_CASE("image tilt sum in two forms") {
    const Truncation tr;
    for (int n = 0; n <= 3; ++n)
        for (double x : {3.0, 5.0, 8.0})
            for (double y : {1.0, 2.0, 4.0}) {
                const OmegaTilde o = omega_tilde_table(n, x, y, tr);
                CHECK(o.residual < 1e-9);
                CHECK(o.primed_form == doctest::Approx(o.value).epsilon(1e-9));
            }
    // decays like the product of two K factors
    const double r = omega_tilde_table(1, 9.0, 1.0, tr).value / omega_tilde_table(1, 8.0, 1.0, tr).value;
    CHECK(std::abs(std::log(std::abs(r)) + 2.0) < 0.3);
    // only convergent while y < x: the truncated tail stays large
    CHECK(omega_tilde_table(0, 8.0, 1.0, tr).converged);
    CHECK_FALSE(omega_tilde_table(0, 2.0, 3.0, tr).converged);
}

TEST_CASE("identity removing the K' term") {
    for (int n = -3; n <= 3; ++n) CHECK(identity_10_13_check(n, n, 1.0, 3.0, 1.0) < 1e-12);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> a(0.2, 1.5), k(0.3, 2.0);
    std::uniform_int_distribution<int> o(-4, 4);
    for (int i = 0; i < 100; ++i) {
        const double aa = a(rng);
        std::uniform_real_distribution<double> R(2.0 * aa + 0.1, 6.0);
        CHECK(identity_10_13_check(o(rng), o(rng), aa, R(rng), k(rng)) < 1e-10);
    }
}

TEST_CASE("breakdown bookkeeping") {
    const ChargeModel ch = ChargeModel::single_helix();
    const EnergyBreakdown e = energy_breakdown(state(0.2), ch, {}, matched(3), ApproxLevel::Diagonal);
    CHECK(e.approx_level == ApproxLevel::Diagonal);
    CHECK(e.total() == doctest::Approx(e.direct() + e.image()));
    CHECK(e.imag_residual < 1e-10 * std::abs(e.total()));
    CHECK_FALSE(e.incomplete_omega_terms);
    PhysicalParams twice;
    twice.prefactor = 2.0;
    CHECK(energy_breakdown(state(0.2), ch, twice, matched(3), ApproxLevel::Diagonal).total() ==
          doctest::Approx(2.0 * e.total()).epsilon(1e-14));
}
