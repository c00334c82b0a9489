#include "braid/energy_nocore.hpp"

#include <algorithm>
#include <vector>
#include <cmath>
#include <complex>

#include "braid/errors.hpp"
#include "braid/summation.hpp"
#include "mode_tables.hpp"

namespace braid {

void PhysicalParams::validate() const {
    if (!(kappa_D > 0.0) || !std::isfinite(kappa_D)) throw ValidationError("kappa_D must be positive and finite");
    if (!std::isfinite(prefactor)) throw ValidationError("energy prefactor must be finite");
    if (!std::isfinite(omega_xi)) throw ValidationError("omega_xi must be finite");
}

void Truncation::validate() const {
    if (n_cap < 0 || m_cap < 0 || j_cap < 0 || l_cap < 0 || np_cap < 0)
        throw ValidationError("truncation caps must be non-negative");
    if (n_cap > 24 || m_cap > 24 || j_cap > 24 || l_cap > 24 || np_cap > 40)
        throw ValidationError("truncation caps exceed the supported range");
    if (!(series_tol > 0.0)) throw ValidationError("series tolerance must be positive");
}

ModeWavenumber mode_wavenumber(const ModeIndex& i, const BraidState& st, double kappa_D) {
    const double w = st.omegaA[0];
    const double x1 = st.dxi1_ds, x2 = st.dxi2_ds;
    const double k =
        -(i.n * (w - x1) + i.np * (w - x2) + (2 * i.m - i.j) * x1 + (2 * i.mp + i.jp) * x2) / 2.0;
    return {k, std::sqrt(k * k + kappa_D * kappa_D)};
}

namespace {

// Range of an index that collapses to a single value when its Bessel argument vanishes identically.
struct Range {
    int lo, hi;
};

Range full(int cap) { return {-cap, cap}; }

}  // namespace

std::complex<double> PhaseSpectrum::evaluate(double xi1, double xi2) const {
    ComplexSum acc;
    for (int l = -lmax; l <= lmax; ++l)
        for (int lp = -lmax; lp <= lmax; ++lp) {
            const std::complex<double> v = at(l, lp);
            if (v != 0.0) acc.add(v * std::polar(1.0, l * xi1 + lp * xi2));
        }
    return acc.value();
}

std::complex<double> PhaseSpectrum::phase_average(double r1, double r2, double xi1, double xi2) const {
    const double scale = std::max(std::abs(r1), std::abs(r2));
    ComplexSum acc;
    for (int l = -lmax; l <= lmax; ++l)
        for (int lp = -lmax; lp <= lmax; ++lp) {
            if (std::abs(l * r1 + lp * r2) > 1e-12 * scale) continue;
            const std::complex<double> v = at(l, lp);
            if (v != 0.0) acc.add(v * std::polar(1.0, l * xi1 + lp * xi2));
        }
    return acc.value();
}

PhaseSpectrum spectrum_nocore(const BraidState& st, const PhysicalParams& phys, const Truncation& tr,
                              const ChargeModel* charge, EnergyDensity* diag) {
    st.validate();
    phys.validate();
    tr.validate();

    const TiltPair tilts = tilts_from_state(st.eta, st.omegaA[2], st.R);
    const auto [sig1, sig2] = sigma_from_tilts(tilts);
    detail::TubeGeometry g;
    g.a = st.a;
    g.R = st.R;
    g.kappa_D = phys.kappa_D;
    g.s1 = std::sin(tilts.eta1);
    g.s2 = std::sin(tilts.eta2);
    g.c1 = std::cos(tilts.eta1);
    g.c2 = std::cos(tilts.eta2);

    const int N = tr.n_cap, M = tr.m_cap, J = tr.j_cap;
    detail::WaveTableStore store(g, N + M, 2 * N, J, 1u << 14);

    const int lmax = 2 * M + N + J;
    std::vector<double> weight(2 * lmax + 1, 1.0);
    for (int l = -lmax; l <= lmax; ++l)
        if (charge) weight[l + lmax] = charge->zeta(l);
    std::vector<ComplexSum> bins(static_cast<std::size_t>((2 * lmax + 1) * (2 * lmax + 1)));

    // vanishing Bessel arguments collapse an index to one value
    const bool a0 = st.a == 0.0;
    const bool lo1_zero = a0 || g.c1 == 1.0, lo2_zero = a0 || g.c2 == 1.0;
    const bool z1_zero = a0 || g.s1 == 0.0, z2_zero = a0 || g.s2 == 0.0;
    const Range jr1 = z1_zero ? Range{0, 0} : full(J);
    const Range jr2 = z2_zero ? Range{0, 0} : full(J);

    const double pref = 2.0 * sig1 * sig2 * phys.prefactor;
    CompensatedSum<double> edge;
    std::size_t count = 0;
    ModeIndex idx;
    for (idx.n = -N; idx.n <= N; ++idx.n) {
        Range mr1 = full(M);
        if (a0) mr1 = {0, 0};
        if (lo1_zero) {
            if (std::abs(idx.n) > M) continue;
            mr1 = a0 ? Range{0, 0} : Range{idx.n, idx.n};
            if (a0 && idx.n != 0) continue;
        }
        for (idx.np = -N; idx.np <= N; ++idx.np) {
            Range mr2 = full(M);
            if (a0) mr2 = {0, 0};
            if (lo2_zero) {
                if (std::abs(idx.np) > M) continue;
                mr2 = a0 ? Range{0, 0} : Range{idx.np, idx.np};
                if (a0 && idx.np != 0) continue;
            }
            const double sgn = detail::parity(idx.np);
            for (idx.m = mr1.lo; idx.m <= mr1.hi; ++idx.m) {
                for (idx.mp = mr2.lo; idx.mp <= mr2.hi; ++idx.mp) {
                    for (idx.j = jr1.lo; idx.j <= jr1.hi; ++idx.j) {
                        for (idx.jp = jr2.lo; idx.jp <= jr2.hi; ++idx.jp) {
                            const int l = 2 * idx.m - idx.n - idx.j;
                            const int lp = idx.np - 2 * idx.mp - idx.jp;
                            const double w = weight[l + lmax] * weight[lp + lmax];
                            if (w == 0.0) continue;
                            const ModeWavenumber kw = mode_wavenumber(idx, st, phys.kappa_D);
                            const detail::WaveTables& t = store.get(kw.k);
                            const double mag = sgn * t.kr(idx.np - idx.n) * t.lo2(idx.np - idx.mp) * t.hi2(idx.mp) *
                                               t.lo1(idx.n - idx.m) * t.hi1(idx.m) * t.j1(idx.j) * t.j2(idx.jp) * w;
                            if (mag == 0.0) continue;
                            bins[static_cast<std::size_t>((l + lmax) * (2 * lmax + 1) + lp + lmax)].add(mag);
                            ++count;
                            if (std::abs(idx.n) == N || std::abs(idx.np) == N || std::abs(idx.m) == M ||
                                std::abs(idx.mp) == M || std::abs(idx.j) == J || std::abs(idx.jp) == J)
                                edge.add(std::abs(mag));
                        }
                    }
                }
            }
        }
    }
    PhaseSpectrum spectrum(lmax);
    for (std::size_t i = 0; i < bins.size(); ++i) spectrum.c[i] = pref * bins[i].value();
    if (diag) {
        diag->truncation_estimate = std::abs(pref) * edge.value();
        diag->terms = count;
    }
    return spectrum;
}

EnergyDensity energy_density_nocore(const BraidState& st, const PhysicalParams& phys, const Truncation& tr,
                                    const ChargeModel* charge) {
    EnergyDensity out;
    const PhaseSpectrum spectrum = spectrum_nocore(st, phys, tr, charge, &out);
    const std::complex<double> z = spectrum.evaluate(st.xi1, st.xi2);
    out.value = z.real();
    out.imag_residual = std::abs(z.imag());
    if (!std::isfinite(out.value)) throw NonConvergence("no-core mode sum overflowed");
    return out;
}

double mean_density_nocore(const BraidState& st, const PhysicalParams& phys, const Truncation& tr,
                           const ChargeModel* charge) {
    const PhaseSpectrum spectrum = spectrum_nocore(st, phys, tr, charge);
    // the phases at the station only fix the relative offset of the two helices
    return spectrum.phase_average(st.dxi1_ds, st.dxi2_ds, st.xi1, st.xi2).real();
}

TotalEnergy integrate_densities(const std::vector<double>& d, const std::vector<double>& s) {
    if (d.size() != s.size()) throw ValidationError("density and station counts differ");
    TotalEnergy out;
    out.densities = d;
    if (d.size() < 2) return out;
    CompensatedSum<double> acc;
    for (std::size_t i = 1; i < d.size(); ++i) {
        const double h = s[i] - s[i - 1];
        if (!(h >= 0.0)) throw ValidationError("axial stations must be ascending");
        acc.add(0.5 * h * (d[i] + d[i - 1]));
        const double scale = std::max(std::abs(d[i]), std::abs(d[i - 1]));
        if (scale > 0.0 && std::abs(d[i] - d[i - 1]) > 0.1 * scale) out.grid_warning = true;
    }
    out.value = acc.value();
    return out;
}

TotalEnergy total_energy_nocore(const std::vector<BraidState>& states, const std::vector<double>& s,
                                const PhysicalParams& phys, const Truncation& trunc, const ChargeModel* charge) {
    if (states.size() != s.size()) throw ValidationError("state and station counts differ");
    std::vector<double> d(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) d[i] = energy_density_nocore(states[i], phys, trunc, charge).value;
    return integrate_densities(d, s);
}

}  // namespace braid
