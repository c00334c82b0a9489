#include "braid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <thread>

#include "braid/errors.hpp"
#include "braid/summation.hpp"

namespace braid {

std::pair<DiscretizedHelix, DiscretizedHelix> discretize_braid(const BraidState& st, double length, double ds,
                                                               double kappa_D) {
    st.validate();
    if (!(kappa_D > 0.0)) throw ValidationError("kappa_D must be positive");
    if (!(ds > 0.0) || ds > 0.02 / kappa_D * (1.0 + 1e-12))
        throw ValidationError("oracle sampling step must not exceed 0.02 Debye lengths");
    if (!(length > 0.0)) throw ValidationError("oracle length must be positive");

    const TiltPair tilts = tilts_from_state(st.eta, st.omegaA[2], st.R);
    const auto [sig1, sig2] = sigma_from_tilts(tilts);
    const auto count = static_cast<std::size_t>(std::llround(length / ds));

    DiscretizedHelix h1, h2;
    h1.weight = sig1 * ds;
    h2.weight = sig2 * ds;
    for (auto* h : {&h1, &h2}) {
        h->points.reserve(count);
        h->offsets.reserve(count);
        h->s.reserve(count);
        h->R = st.R;
        h->precession = st.omegaA[0];
    }
    for (std::size_t i = 0; i < count; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * ds;
        const EulerAngles ang{0.0, 0.0, st.omegaA[0] * s};
        const Vec3 axis(0.0, 0.0, s);
        const Vec3 d = rotation_frame(ang).col(0);
        const double xi1 = st.xi1 + st.dxi1_ds * s;
        const double xi2 = st.xi2 + st.dxi2_ds * s;
        h1.offsets.push_back(st.a * helix_vector(ang, tilts, 1, xi1));
        h2.offsets.push_back(st.a * helix_vector(ang, tilts, 2, xi2));
        h1.points.push_back(axis - 0.5 * st.R * d + h1.offsets.back());
        h2.points.push_back(axis + 0.5 * st.R * d + h2.offsets.back());
        h1.s.push_back(s);
        h2.s.push_back(s);
    }
    return {std::move(h1), std::move(h2)};
}

double yukawa_energy(const DiscretizedHelix& h1, const DiscretizedHelix& h2, double kappa_D, const YukawaOptions& opt) {
    if (h1.points.empty() || h2.points.empty()) return 0.0;
    const double edge = opt.edge / kappa_D, cut = opt.cutoff / kappa_D;
    const double s0 = h1.s.front() + edge, s1 = h1.s.back() - edge;
    if (!(s1 > s0)) throw ValidationError("helices too short for the edge discard");

    const auto first = static_cast<std::size_t>(std::lower_bound(h1.s.begin(), h1.s.end(), s0) - h1.s.begin());
    const auto last = static_cast<std::size_t>(std::upper_bound(h1.s.begin(), h1.s.end(), s1) - h1.s.begin());
    const std::size_t n_outer = last - first;

    // Gaussian weight over the central span, four widths to each edge: the local
    // pair sum oscillates with the helix phases, and a plain mean over a
    // non-integer number of periods is biased.
    const double mid = 0.5 * (s0 + s1), width = 0.125 * (s1 - s0);
    auto window = [&](double s) {
        const double x = (s - mid) / width;
        return std::exp(-0.5 * x * x);
    };
    CompensatedSum<double> wsum;
    for (std::size_t i = first; i < last; ++i) wsum.add(window(h1.s[i]));

    // pairs whose axial parameters differ by more than the cutoff are further apart than the cutoff
    auto block_sum = [&](std::size_t b, std::size_t e) {
        CompensatedSum<double> acc;
        for (std::size_t i = b; i < e; ++i) {
            const Vec3& p = h1.points[i];
            const double si = h1.s[i];
            auto lo = std::lower_bound(h2.s.begin(), h2.s.end(), si - cut) - h2.s.begin();
            auto hi = std::upper_bound(h2.s.begin(), h2.s.end(), si + cut) - h2.s.begin();
            double row = 0.0;
            for (auto j = lo; j < hi; ++j) {
                const auto jj = static_cast<std::size_t>(j);
                double r;
                if (opt.chord == ChordModel::Local) {
                    // centrelines straight and parallel along the mean inter-axial vector
                    const double sj = h2.s[jj];
                    const double phi = h1.precession * 0.5 * (si + sj);
                    const Vec3 sep(-h1.R * std::cos(phi), -h1.R * std::sin(phi), si - sj);
                    r = (sep + h1.offsets[i] - h2.offsets[jj]).norm();
                } else {
                    r = (p - h2.points[jj]).norm();
                }
                if (r < 1e-9) throw DomainError("helix samples overlap");
                if (r > cut) continue;
                row += std::exp(-kappa_D * r) / r;
            }
            acc.add(window(si) * row);
        }
        return acc.value();
    };

    unsigned nt = opt.threads > 0 ? static_cast<unsigned>(opt.threads) : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nblocks = std::min<std::size_t>(std::max<std::size_t>(1, nt) * 4, std::max<std::size_t>(1, n_outer));
    std::vector<std::future<double>> parts;
    parts.reserve(nblocks);
    for (std::size_t b = 0; b < nblocks; ++b) {
        const std::size_t lo = first + n_outer * b / nblocks, hi = first + n_outer * (b + 1) / nblocks;
        parts.push_back(std::async(nt > 1 ? std::launch::async : std::launch::deferred, block_sum, lo, hi));
    }
    CompensatedSum<double> total;
    for (auto& f : parts) total.add(f.get());  // block order fixes the rounding
    const double ds = h1.s[1] - h1.s[0];
    return h1.weight * h2.weight * total.value() / (wsum.value() * ds);
}

OracleReport compare_with_oracle(const BraidState& st, const PhysicalParams& phys, const Truncation& trunc,
                                 const OracleSampling& sampling, const YukawaOptions& opt) {
    OracleReport r;
    r.mode_sum = mean_density_nocore(st, phys, trunc);
    const double ds_axis = sampling.ds / phys.kappa_D;
    auto [h1, h2] = discretize_braid(st, sampling.length / phys.kappa_D, ds_axis, phys.kappa_D);
    YukawaOptions exact = opt, local = opt;
    exact.chord = ChordModel::Exact;
    local.chord = ChordModel::Local;
    r.brute_force = phys.prefactor * yukawa_energy(h1, h2, phys.kappa_D, exact);
    r.local_chord = phys.prefactor * yukawa_energy(h1, h2, phys.kappa_D, local);
    r.relative_deviation = std::abs(r.mode_sum - r.brute_force) / std::abs(r.brute_force);
    r.local_deviation = std::abs(r.mode_sum - r.local_chord) / std::abs(r.local_chord);
    return r;
}

}  // namespace braid
