#include "braid/energy_dielectric.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <future>
#include <limits>
#include <thread>
#include <unordered_map>

#include "braid/errors.hpp"
#include "braid/special_functions.hpp"
#include "braid/summation.hpp"
#include "mode_tables.hpp"

namespace braid {

using sf::OrderTable;

std::string to_string(ApproxLevel level) {
    switch (level) {
        case ApproxLevel::Full: return "full";
        case ApproxLevel::Diagonal: return "diagonal";
        case ApproxLevel::SmallAngle: return "small_angle";
    }
    return "full";
}

ApproxLevel parse_approx_level(const std::string& s) {
    if (s == "full") return ApproxLevel::Full;
    if (s == "diagonal") return ApproxLevel::Diagonal;
    if (s == "small_angle") return ApproxLevel::SmallAngle;
    throw ValidationError("unknown approximation level '" + s + "' (expected full, diagonal or small_angle)");
}

double EnergyBreakdown::image() const {
    double s = 0.0;
    for (double v : e_img1_parts) s += v;
    for (double v : e_img2_parts) s += v;
    return s;
}

namespace {

/// Tilt trigonometry, phase rates and prefactors fed to the mode sums.
struct SumGeometry {
    double s1 = 0.0, s2 = 0.0;  // sines of the rod tilts
    double c1 = 1.0, c2 = 1.0;  // cosines of the rod tilts
    double eta = 0.0;           // total tilt
    double omega_a1 = 0.0;      // precession of the inter-axial vector
    double r1 = 0.0, r2 = 0.0;  // helix phase rates
    double pref_dir = 0.0, pref_img1 = 0.0, pref_img2 = 0.0;
};

SumGeometry full_geometry(const BraidState& st, const PhysicalParams& phys) {
    const TiltPair t = tilts_from_state(st.eta, st.omegaA[2], st.R);
    const auto [sig1, sig2] = sigma_from_tilts(t);
    SumGeometry g;
    g.s1 = std::sin(t.eta1);
    g.s2 = std::sin(t.eta2);
    g.c1 = std::cos(t.eta1);
    g.c2 = std::cos(t.eta2);
    g.eta = st.eta;
    g.omega_a1 = st.omegaA[0];
    g.r1 = st.dxi1_ds;
    g.r2 = st.dxi2_ds;
    g.pref_dir = 2.0 * sig1 * sig2 * phys.prefactor;
    g.pref_img1 = sig1 * sig1 * phys.prefactor;
    g.pref_img2 = sig2 * sig2 * phys.prefactor;
    return g;
}

// Tilts, stretch factors and precession to first order in R omega_A3.
SumGeometry diagonal_geometry(const BraidState& st, const PhysicalParams& phys) {
    const double h = 0.5 * st.eta, ch = std::cos(h), sh = std::sin(h);
    const double e = st.R * st.omegaA[2] * std::sin(st.eta) / 4.0;
    SumGeometry g;
    g.s1 = sh - e * ch;
    g.s2 = sh + e * ch;
    g.c1 = ch + e * sh;
    g.c2 = ch - e * sh;
    g.eta = st.eta;
    g.omega_a1 = -2.0 * std::tan(h) / st.R;
    g.r1 = st.dxi1_ds;
    g.r2 = st.dxi2_ds;
    const double inv = 1.0 / (ch * ch), rw = st.R * st.omegaA[2];
    g.pref_dir = 2.0 * inv * phys.prefactor;
    g.pref_img1 = (inv + rw) * phys.prefactor;
    g.pref_img2 = (inv - rw) * phys.prefactor;
    return g;
}

ResponseParams response_params(const BraidState& st, const PhysicalParams& phys, const DielectricOptions& opt) {
    ResponseParams p;
    p.a = st.a;
    p.R = st.R;
    p.kappa_D = phys.kappa_D;
    p.eta = st.eta;
    p.trunc = opt.response;
    return p;
}

std::uint64_t bits(double x) {
    if (x == 0.0) x = 0.0;
    std::uint64_t k;
    std::memcpy(&k, &x, sizeof k);
    return k;
}

/// zeta_surf0 and its k-derivative for every order |l| <= lmax at one axial wavenumber.
struct DressRow {
    std::vector<double> z, dz;  // index l + lmax
};

DressRow dress_row(double kz, double a, double kappa_D, int lmax, bool transparent) {
    DressRow r;
    r.z.assign(2 * lmax + 1, 1.0);
    r.dz.assign(2 * lmax + 1, 0.0);
    if (transparent) return r;
    const double kap = std::sqrt(kz * kz + kappa_D * kappa_D);
    const double x = a * kap;
    const OrderTable I(OrderTable::Kind::I, lmax + 2, x);
    const OrderTable K(OrderTable::Kind::K, lmax + 2, x);
    for (int l = 0; l <= lmax; ++l) {
        const double i = I(l), ip = I.deriv(l), kp = K.deriv(l), kpp = K.deriv2(l);
        const double g = x * i * kp;
        const double dg = i * kp + x * ip * kp + x * i * kpp;
        const double z = -1.0 / g, dz = dg / (g * g) * a * kz / kap;
        r.z[lmax + l] = r.z[lmax - l] = z;
        r.dz[lmax + l] = r.dz[lmax - l] = dz;
    }
    return r;
}

class DressMemo {
public:
    DressMemo(double a, double kappa_D, int lmax, bool transparent)
        : a_(a), kd_(kappa_D), lmax_(lmax), transparent_(transparent) {}
    const DressRow& get(double kz) {
        const auto key = bits(kz);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
        if (map_.size() > (1u << 15)) map_.clear();
        return map_.emplace(key, dress_row(kz, a_, kd_, lmax_, transparent_)).first->second;
    }
    int lmax() const { return lmax_; }

private:
    double a_, kd_;
    int lmax_;
    bool transparent_;
    std::unordered_map<std::uint64_t, DressRow> map_;
};

struct Range {
    int lo, hi;
};

Range full_range(int cap) { return {-cap, cap}; }

void check_inputs(const BraidState& st, const PhysicalParams& phys, const Truncation& tr, const DielectricOptions& opt) {
    st.validate();
    phys.validate();
    tr.validate();
    if (opt.core == CoreModel::Dielectric) response_params(st, phys, opt).validate();
}

// ---- direct -------------------------------------------------------------------

DirectSpectra direct_spectra(const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                             const Truncation& tr, const DielectricOptions& opt, const SumGeometry& sg,
                             bool diagonal) {
    check_inputs(st, phys, tr, opt);
    detail::TubeGeometry g;
    g.a = st.a;
    g.R = st.R;
    g.kappa_D = phys.kappa_D;
    g.s1 = sg.s1;
    g.s2 = sg.s2;
    g.c1 = sg.c1;
    g.c2 = sg.c2;

    const int N = tr.n_cap, M = tr.m_cap, J = tr.j_cap;
    const int lmax = 2 * M + N + J;
    detail::WaveTableStore store(g, N + M, 2 * N, J, 1u << 14);
    const bool transparent = opt.core == CoreModel::Transparent;
    DressMemo dress(st.a, phys.kappa_D, lmax, transparent);

    std::vector<double> weight(2 * lmax + 1);
    for (int l = -lmax; l <= lmax; ++l) weight[l + lmax] = charge.zeta(l);
    const std::size_t width = static_cast<std::size_t>(2 * lmax + 1);
    std::vector<ComplexSum> bins[3];
    for (auto& b : bins) b.resize(width * width);

    const bool a0 = st.a == 0.0;
    const bool lo1_zero = a0 || g.c1 == 1.0, lo2_zero = a0 || g.c2 == 1.0;
    const Range jr1 = (a0 || g.s1 == 0.0) ? Range{0, 0} : full_range(J);
    const Range jr2 = (a0 || g.s2 == 0.0) ? Range{0, 0} : full_range(J);

    for (int n = -N; n <= N; ++n) {
        Range mr1 = a0 ? Range{0, 0} : full_range(M);
        if (lo1_zero) {
            if (std::abs(n) > M || (a0 && n != 0)) continue;
            mr1 = a0 ? Range{0, 0} : Range{n, n};
        }
        for (int np = -N; np <= N; ++np) {
            Range mr2 = a0 ? Range{0, 0} : full_range(M);
            if (lo2_zero) {
                if (std::abs(np) > M || (a0 && np != 0)) continue;
                mr2 = a0 ? Range{0, 0} : Range{np, np};
            }
            const double sgn = detail::parity(np);
            const double tilt1 = (n - np) * sg.s1 / st.R, tilt2 = (n - np) * sg.s2 / st.R;
            for (int m = mr1.lo; m <= mr1.hi; ++m)
                for (int mp = mr2.lo; mp <= mr2.hi; ++mp)
                    for (int j = jr1.lo; j <= jr1.hi; ++j)
                        for (int jp = jr2.lo; jp <= jr2.hi; ++jp) {
                            const int l = 2 * m - n - j;
                            const int lp = np - 2 * mp - jp;
                            if (diagonal && lp != -l) continue;
                            const double w = weight[l + lmax] * weight[lp + lmax];
                            if (w == 0.0) continue;
                            const double k = -((n + np) * sg.omega_a1 + l * sg.r1 - lp * sg.r2) / 2.0;
                            const detail::WaveTables& t = store.get(k);
                            const double mag = sgn * t.kr(np - n) * t.lo1(n - m) * t.hi1(m) * t.lo2(np - mp) *
                                               t.hi2(mp) * t.j1(j) * t.j2(jp) * w;
                            if (mag == 0.0) continue;
                            const DressRow& d1 = dress.get(k * sg.c1);
                            const DressRow& d2 = dress.get(k * sg.c2);
                            const double z1 = d1.z[l + lmax], z2 = d2.z[lp + lmax];
                            const std::size_t at = static_cast<std::size_t>(l + lmax) * width + lp + lmax;
                            bins[0][at].add(mag * z1 * z2);
                            if (tilt1 != 0.0) bins[1][at].add(mag * tilt1 * d1.dz[l + lmax] * z2);
                            if (tilt2 != 0.0) bins[2][at].add(-mag * tilt2 * z1 * d2.dz[lp + lmax]);
                        }
        }
    }
    DirectSpectra out;
    for (int c = 0; c < 3; ++c) {
        out.part[c] = PhaseSpectrum(lmax);
        for (std::size_t i = 0; i < bins[c].size(); ++i) out.part[c].c[i] = sg.pref_dir * bins[c][i].value();
    }
    return out;
}

// ---- images -------------------------------------------------------------------

// Per (n+n', wavenumber offset) group: Bessel tables and the helix sums over m.
struct ImageGroup {
    int nsum = 0, d = 0;
};

struct GroupResult {
    std::vector<double> c[4];  // bin q + 2 lc
};

GroupResult image_group(int rod, const ImageGroup& grp, const BraidState& st, const PhysicalParams& phys,
                        const Truncation& tr, const ResponseParams& rp, const SumGeometry& sg,
                        const std::vector<double>& weight, bool diagonal) {
    const int N = tr.n_cap, M = tr.m_cap, L = tr.l_cap;
    const int wq = 4 * L + 1;
    GroupResult res;
    for (auto& v : res.c) v.assign(wq, 0.0);

    const double rate = rod == 1 ? sg.r1 : sg.r2;
    const double kt = -0.5 * grp.d * rate - 0.5 * grp.nsum * sg.omega_a1;
    const double kap = std::sqrt(kt * kt + phys.kappa_D * phys.kappa_D);
    const double x = st.a * kap;
    const int jo = 2 * M + N + L;
    const OrderTable lo1(OrderTable::Kind::I, N + M, 0.5 * x * (1.0 - sg.c1));
    const OrderTable hi1(OrderTable::Kind::I, N + M, 0.5 * x * (1.0 + sg.c1));
    const OrderTable lo2(OrderTable::Kind::I, N + M, 0.5 * x * (1.0 - sg.c2));
    const OrderTable hi2(OrderTable::Kind::I, N + M, 0.5 * x * (1.0 + sg.c2));
    const OrderTable kr(OrderTable::Kind::K, 2 * N, st.R * kap);
    const OrderTable j1(OrderTable::Kind::J, jo, st.a * kt * sg.s1);
    const OrderTable j2(OrderTable::Kind::J, jo, st.a * kt * sg.s2);

    const int wl = 2 * L + 1, wn = 2 * N + 1;
    auto idx = [&](int n, int l) { return static_cast<std::size_t>((n + N) * wl + l + L); };
    std::vector<double> A1(static_cast<std::size_t>(wn * wl)), A2(A1.size());
    for (int n = -N; n <= N; ++n)
        for (int l = -L; l <= L; ++l) {
            CompensatedSum<double> s1, s2;
            for (int m = -M; m <= M; ++m) {
                s1.add(lo1(n - m) * hi1(m) * j1(2 * m - n - l));
                s2.add(lo2(n - m) * hi2(m) * j2(n - 2 * m - l));
            }
            A1[idx(n, l)] = s1.value();
            A2[idx(n, l)] = s2.value();
        }

    // source modes j' on the charged rod reached by this group
    const int jlo = std::max(-L, rod == 1 ? -L - grp.d : -L + grp.d);
    const int jhi = std::min(L, rod == 1 ? L - grp.d : L + grp.d);
    if (jlo > jhi) return res;

    // image coefficients on the neighbour, summed against the neighbour's helix sums
    const int other = rod == 1 ? 2 : 1;
    const double kz_img = rod == 1 ? -kt * sg.c2 : kt * sg.c1;
    const SurfaceKernel kernel(other, kz_img, rp);
    const int wj = jhi - jlo + 1;
    std::vector<double> T10(static_cast<std::size_t>(wn * wj)), Td10(T10.size()), T11(T10.size());
    const std::vector<double>& Aimg = rod == 1 ? A2 : A1;
    for (int jp = jlo; jp <= jhi; ++jp) {
        if (diagonal) {
            // only the source mode paired with the dressed mode survives
            const int ldress = rod == 1 ? grp.d + jp : jp - grp.d;
            if (ldress != -jp) continue;
        }
        std::vector<SurfaceCoefficients> coef(static_cast<std::size_t>(wl));
        for (int li = -L; li <= L; ++li) coef[li + L] = kernel.eval(li, jp);
        for (int n = -N; n <= N; ++n) {
            CompensatedSum<double> a, b, c;
            for (int li = -L; li <= L; ++li) {
                const double v = Aimg[idx(n, li)];
                a.add(v * coef[li + L].zeta10);
                b.add(v * coef[li + L].dzeta10);
                c.add(v * coef[li + L].zeta11);
            }
            const std::size_t at = static_cast<std::size_t>((n + N) * wj + jp - jlo);
            T10[at] = a.value();
            Td10[at] = b.value();
            T11[at] = c.value();
        }
    }

    const double kz_dress = rod == 1 ? -kt * sg.c1 : kt * sg.c2;
    const DressRow dress = dress_row(kz_dress, st.a, phys.kappa_D, L, false);
    const double sin_eta = std::sin(sg.eta);
    const double pref = rod == 1 ? sg.pref_img1 : sg.pref_img2;
    for (int n = -N; n <= N; ++n) {
        const int np = grp.nsum - n;
        if (np < -N || np > N) continue;
        const double kv = detail::parity(np) * kr(np - n);
        const double t1 = (n - np) * sg.s1 / st.R, t2 = (n - np) * sg.s2 / st.R;
        // rod 1 loops its dressed mode l, rod 2 its dressed mode l'
        for (int ld = -L; ld <= L; ++ld) {
            const int jp = rod == 1 ? ld - grp.d : ld + grp.d;
            if (jp < jlo || jp > jhi) continue;
            if (diagonal && jp != -ld) continue;
            const double w = weight[ld + L] * weight[jp + L];
            if (w == 0.0) continue;
            const double helix = rod == 1 ? A1[idx(n, ld)] : A2[idx(np, ld)];
            const double base = pref * kv * helix * w;
            if (base == 0.0) continue;
            const int partner = rod == 1 ? np : n;
            const std::size_t at = static_cast<std::size_t>((partner + N) * wj + jp - jlo);
            const double z = dress.z[ld + L], dz = dress.dz[ld + L];
            const int q = jp + ld + 2 * L;
            if (rod == 1) {
                res.c[0][q] += base * z * T10[at];
                res.c[1][q] += -base * t1 * dz * T10[at];
                res.c[2][q] += base * t2 * z * Td10[at];
                res.c[3][q] += base * sin_eta * z * T11[at];
            } else {
                res.c[0][q] += base * z * T10[at];
                res.c[1][q] += base * t1 * z * Td10[at];
                res.c[2][q] += -base * t2 * dz * T10[at];
                res.c[3][q] += base * sin_eta * z * T11[at];
            }
        }
    }
    return res;
}

ImageSpectra image_spectra(int rod, const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                           const Truncation& tr, const DielectricOptions& opt, const SumGeometry& sg, bool diagonal) {
    if (rod != 1 && rod != 2) throw DomainError("rod index must be 1 or 2");
    check_inputs(st, phys, tr, opt);
    const int N = tr.n_cap, L = tr.l_cap;
    ImageSpectra out;
    for (auto& p : out.part) p = PhaseSpectrum(2 * L);
    if (opt.core == CoreModel::Transparent) return out;

    const ResponseParams rp = response_params(st, phys, opt);
    std::vector<double> weight(2 * L + 1);
    for (int l = -L; l <= L; ++l) weight[l + L] = charge.zeta(l);

    std::vector<ImageGroup> groups;
    for (int nsum = -2 * N; nsum <= 2 * N; ++nsum)
        for (int d = -2 * L; d <= 2 * L; ++d) {
            if (diagonal && (d & 1)) continue;
            groups.push_back({nsum, d});
        }

    const unsigned nt = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nblocks = std::min<std::size_t>(groups.size(), static_cast<std::size_t>(nt) * 4);
    std::vector<std::future<std::vector<GroupResult>>> futures;
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = groups.size() * b / nblocks, hi = groups.size() * (b + 1) / nblocks;
        futures.push_back(std::async(nt > 1 ? std::launch::async : std::launch::deferred, [&, lo, hi] {
            std::vector<GroupResult> r;
            r.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i)
                r.push_back(image_group(rod, groups[i], st, phys, tr, rp, sg, weight, diagonal));
            return r;
        }));
    }
    // merged in group order whatever the completion order
    const int wq = 4 * L + 1;
    std::vector<CompensatedSum<double>> acc[4];
    for (auto& a : acc) a.resize(static_cast<std::size_t>(wq));
    for (auto& f : futures)
        for (const GroupResult& r : f.get())
            for (int c = 0; c < 4; ++c)
                for (int q = 0; q < wq; ++q)
                    if (r.c[c][q] != 0.0) acc[c][q].add(r.c[c][q]);
    for (int c = 0; c < 4; ++c)
        for (int q = -2 * L; q <= 2 * L; ++q) {
            const double v = acc[c][q + 2 * L].value();
            if (rod == 1)
                out.part[c].at(q, 0) = v;
            else
                out.part[c].at(0, q) = v;
        }
    return out;
}

std::complex<double> reduce(const PhaseSpectrum& s, const BraidState& st, Averaging avg) {
    if (avg == Averaging::Local) return s.evaluate(st.xi1, st.xi2);
    return s.phase_average(st.dxi1_ds, st.dxi2_ds, st.xi1, st.xi2);
}

template <std::size_t K>
std::array<double, K> real_parts(const PhaseSpectrum (&parts)[K], const BraidState& st, Averaging avg,
                                 double* imag = nullptr) {
    std::array<double, K> out{};
    for (std::size_t c = 0; c < K; ++c) {
        const std::complex<double> z = reduce(parts[c], st, avg);
        out[c] = z.real();
        if (!std::isfinite(out[c])) throw NonConvergence("dielectric mode sum overflowed");
        if (imag) *imag = std::max(*imag, std::abs(z.imag()));
    }
    return out;
}

}  // namespace

// ---- full -------------------------------------------------------------------

DirectSpectra e_dir_spectra(const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                            const Truncation& tr, const DielectricOptions& opt) {
    return direct_spectra(st, charge, phys, tr, opt, full_geometry(st, phys), false);
}

ImageSpectra e_img_spectra(int rod, const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                           const Truncation& tr, const DielectricOptions& opt) {
    return image_spectra(rod, st, charge, phys, tr, opt, full_geometry(st, phys), false);
}

std::array<double, 3> e_dir_full(const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                                 const Truncation& tr, const DielectricOptions& opt) {
    return real_parts(e_dir_spectra(st, charge, phys, tr, opt).part, st, opt.averaging);
}

std::array<double, 4> e_img_full(int rod, const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                                 const Truncation& tr, const DielectricOptions& opt) {
    return real_parts(e_img_spectra(rod, st, charge, phys, tr, opt).part, st, opt.averaging);
}

// ---- diagonal ---------------------------------------------------------------

std::array<double, 3> e_dir_diagonal(const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                                     const Truncation& tr, const DielectricOptions& opt) {
    const DirectSpectra s = direct_spectra(st, charge, phys, tr, opt, diagonal_geometry(st, phys), true);
    return real_parts(s.part, st, Averaging::Local);
}

std::array<double, 4> e_img_diagonal(int rod, const BraidState& st, const ChargeModel& charge,
                                     const PhysicalParams& phys, const Truncation& tr, const DielectricOptions& opt) {
    const ImageSpectra s = image_spectra(rod, st, charge, phys, tr, opt, diagonal_geometry(st, phys), true);
    return real_parts(s.part, st, Averaging::Local);
}

double diagonal_validity_ratio(const BraidState& st, double omega_xi) {
    const double dev = std::max(std::abs(st.dxi1_ds - omega_xi), std::abs(st.dxi2_ds - omega_xi));
    if (omega_xi == 0.0) return dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return dev / std::abs(omega_xi);
}

// ---- small angle ------------------------------------------------------------

OmegaTilde omega_tilde_table(int n, double x, double y, const Truncation& tr) {
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("omega tilde needs positive arguments");
    tr.validate();
    const int J = tr.np_cap;
    const OrderTable Kx(OrderTable::Kind::K, std::abs(n) + J + 2, x);
    const OrderTable Iy(OrderTable::Kind::I, J + 3, y);
    const OrderTable Ky(OrderTable::Kind::K, J + 3, y);

    CompensatedSum<double> plain, primed;
    double last = 0.0;
    for (int j = -J; j <= J; ++j) {
        const double kk = Kx(n + j + 1) * Kx(n + j);
        const double ip = Iy.deriv(j), kp = Ky.deriv(j);
        const double t = kk / (y * kp * kp) * (1.0 + 2.0 * j * ip * kp + double(j) * j / (y * y));
        plain.add(t);
        // ratio derivative from the second derivatives written with neighbouring orders
        const double ipp = 0.25 * (Iy(j - 2) + 2.0 * Iy(j) + Iy(j + 2));
        const double kpp = 0.25 * (Ky(j - 2) + 2.0 * Ky(j) + Ky(j + 2));
        const double dratio = (ipp * kp - ip * kpp) / (kp * kp);
        primed.add(kk * (2.0 * j / y * ip / kp - dratio));
        if (std::abs(j) == J) last += std::abs(t);
    }
    OmegaTilde r;
    r.value = plain.value();
    r.primed_form = primed.value();
    const double scale = std::max(std::abs(r.value), std::numeric_limits<double>::min());
    r.residual = std::abs(r.value - r.primed_form) / scale;
    r.tail = last / scale;
    r.converged = r.tail < tr.series_tol;
    if (r.residual > 1e-9) throw NonConvergence("omega tilde forms disagree: relative residual " + std::to_string(r.residual));
    return r;
}

double identity_10_13_check(int n, int np, double a, double R, double kappa) {
    if (!(a > 0.0) || !(R > 0.0) || !(kappa > 0.0)) throw DomainError("identity arguments must be positive");
    const double x = a * kappa, X = R * kappa;
    const int top = std::max(std::abs(n), std::abs(np)) + 2;
    const OrderTable I(OrderTable::Kind::I, top, x);
    const OrderTable K(OrderTable::Kind::K, std::abs(np - n) + 2, X);
    const double lhs = (n - np) / X *
                       (a * (I.deriv(n) * I(np) + I(n) * I.deriv(np)) * K(np - n) + R * I(np) * I(n) * K.deriv(np - n));
    const double rhs = 0.5 * a *
                       (I(n) * (I(np - 1) * K(np - n - 1) - I(np + 1) * K(np - n + 1)) +
                        I(np) * (I(n + 1) * K(np - n - 1) - I(n - 1) * K(np - n + 1)));
    return std::abs(lhs - rhs);
}

EnergyBreakdown e_small_angle(const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                              const Truncation& tr) {
    st.validate();
    phys.validate();
    tr.validate();
    if (!(st.a > 0.0)) throw ValidationError("small-angle energies need a positive rod radius");

    const BraidFrequencies f = rod_frequencies(st);
    const auto [w11, w21] = helix_frequencies(st, f);
    const double a = st.a, R = st.R, kd = phys.kappa_D;
    const double w3 = st.omegaA[2], sin_eta = std::sin(st.eta);
    const double dxi = st.xi1 - st.xi2;
    const int L = tr.l_cap, NP = tr.np_cap;

    CompensatedSum<double> d0, deta, domega;
    CompensatedSum<double> i0[2], ieta[2], iomega[2];
    for (int n = -L; n <= L; ++n) {
        const double ww = charge.zeta(n) * charge.zeta(-n);
        if (ww == 0.0) continue;
        const double sgn = detail::parity(n), ph = std::cos(n * dxi);

        // direct
        const double kb = -0.5 * n * (w11 + w21) - n * R * w3 * (st.dxi1_ds - st.dxi2_ds) / 4.0;
        const double kap = std::sqrt(kd * kd + kb * kb);
        const OrderTable Ka(OrderTable::Kind::K, std::abs(n) + 2, a * kap);
        const OrderTable KR(OrderTable::Kind::K, 2, R * kap);
        const double kp = Ka.deriv(n), kpp = Ka.deriv2(n);
        const double dress = 1.0 / (a * a * kap * kap * kp * kp);
        d0.add(2.0 * sgn * ww * KR(0) * dress * ph);
        deta.add(sin_eta * sgn * ww * n * n * (w11 + w21) * KR(1) * dress / kap * ph);
        if (w3 != 0.0)
            domega.add(-R / 4.0 * w3 * sgn * ww * (st.dxi1_ds - st.dxi2_ds) * n * n * (w11 + w21) / kap * ph *
                       (R * KR(1) * dress + 2.0 * KR(0) * dress * (1.0 / kap + a * kpp / kp)));

        // images
        for (int mu = 1; mu <= 2; ++mu) {
            const double wmu = mu == 1 ? w11 : w21;
            const double rate = mu == 1 ? st.dxi1_ds : st.dxi2_ds;
            const double km = std::sqrt(n * n * wmu * wmu + kd * kd);
            const double y = a * km, X = R * km;
            const OrderTable Iy(OrderTable::Kind::I, NP + 2, y);
            const OrderTable Ky(OrderTable::Kind::K, std::max(NP, std::abs(n)) + 2, y);
            const OrderTable KX(OrderTable::Kind::K, NP + std::abs(n) + 2, X);
            const double kpn = Ky.deriv(n), kppn = Ky.deriv2(n);
            const double dn = 1.0 / (y * y * kpn * kpn);
            const double stretch = 1.0 + (mu == 1 ? -1.0 : 1.0) * R * w3;
            CompensatedSum<double> s0, sw;
            for (int q = -NP; q <= NP; ++q) {
                const double ratio = Iy.deriv(q) / Ky.deriv(q);
                const double kq = KX(q - n), kqp = KX.deriv(q - n);
                s0.add(ratio * kq * kq * dn);
                if (w3 != 0.0) {
                    // d/dx of the image ratio times the dressing factor
                    const double kpq = Ky.deriv(q);
                    const double dratio = -(1.0 + double(q) * q / (y * y)) / (y * kpq * kpq);
                    const double ddn = -2.0 / (y * y * y * kpn * kpn) - 2.0 * kppn / (y * y * kpn * kpn * kpn);
                    sw.add(2.0 * R * ratio * kq * kqp * dn + n * a * kq * kqp * (dratio * dn + ratio * ddn));
                }
            }
            i0[mu - 1].add(-stretch * ww * s0.value());
            if (n != 0) {
                Truncation t2 = tr;
                const OmegaTilde om = omega_tilde_table(n, X, y, t2);
                ieta[mu - 1].add(a * wmu * sin_eta * ww * dn * n * om.value);
            }
            if (w3 != 0.0) {
                const double sgn_mu = mu == 1 ? -1.0 : 1.0;
                iomega[mu - 1].add(-w3 * R / 2.0 * sgn_mu * rate * n * n * wmu * ww / km * sw.value());
            }
        }
    }

    EnergyBreakdown b;
    b.approx_level = ApproxLevel::SmallAngle;
    const double p = phys.prefactor;
    b.e_dir_0 = p * d0.value();
    b.e_dir_1 = p * deta.value();
    b.e_dir_2 = p * domega.value();
    for (int mu = 0; mu < 2; ++mu) {
        auto& parts = mu == 0 ? b.e_img1_parts : b.e_img2_parts;
        parts[0] = p * i0[mu].value();
        parts[1] = p * ieta[mu].value();
        parts[2] = p * iomega[mu].value();
        parts[3] = 0.0;
    }
    b.incomplete_omega_terms = w3 != 0.0;
    b.validity_ratio = diagonal_validity_ratio(st, phys.omega_xi);
    return b;
}

// ---- combined -----------------------------------------------------------------

EnergyBreakdown energy_breakdown(const BraidState& st, const ChargeModel& charge, const PhysicalParams& phys,
                                 const Truncation& tr, ApproxLevel level, const DielectricOptions& opt) {
    if (level == ApproxLevel::SmallAngle) {
        if (opt.core == CoreModel::Transparent)
            throw ValidationError("small-angle energies assume low-dielectric cores");
        return e_small_angle(st, charge, phys, tr);
    }
    const bool diagonal = level == ApproxLevel::Diagonal;
    const SumGeometry sg = diagonal ? diagonal_geometry(st, phys) : full_geometry(st, phys);
    const Averaging avg = diagonal ? Averaging::Local : opt.averaging;

    EnergyBreakdown b;
    b.approx_level = level;
    double imag = 0.0;
    const DirectSpectra ds = direct_spectra(st, charge, phys, tr, opt, sg, diagonal);
    const auto dir = real_parts(ds.part, st, avg, &imag);
    b.e_dir_0 = dir[0];
    b.e_dir_1 = dir[1];
    b.e_dir_2 = dir[2];
    b.e_img1_parts = real_parts(image_spectra(1, st, charge, phys, tr, opt, sg, diagonal).part, st, avg, &imag);
    b.e_img2_parts = real_parts(image_spectra(2, st, charge, phys, tr, opt, sg, diagonal).part, st, avg, &imag);
    b.imag_residual = imag;
    b.validity_ratio = diagonal_validity_ratio(st, phys.omega_xi);
    return b;
}

}  // namespace braid
