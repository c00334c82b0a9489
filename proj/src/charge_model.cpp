#include "braid/charge_model.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "braid/errors.hpp"

namespace braid {

void DnaParams::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("dna: theta must lie in [0, 1]");
    if (!(f1 >= 0.0 && f2 >= 0.0 && f1 + f2 <= 1.0)) throw ValidationError("dna: need f1, f2 >= 0 and f1 + f2 <= 1");
    if (!std::isfinite(phi_s)) throw ValidationError("dna: phi_s must be finite");
}

double dna_coefficients(const DnaParams& p, int n) {
    p.validate();
    // the n = 0 terms sum to theta - 1; written out they would leave rounding
    if (n == 0) return p.theta - 1.0;
    const double major = (n % 2 == 0) ? p.theta * p.f2 : -p.theta * p.f2;
    return p.theta * p.f1 + major - std::cos(n * p.phi_s);
}

double ChargeModel::zeta(int n) const {
    switch (kind_) {
        case Kind::SingleHelix: return 1.0;
        case Kind::Dna: return dna_coefficients(dna_, n);
        case Kind::Table: {
            auto it = table_.find(n);
            return it == table_.end() ? 0.0 : it->second;
        }
    }
    return 0.0;
}

double ChargeModel::bound() const {
    switch (kind_) {
        case Kind::SingleHelix: return 1.0;
        case Kind::Dna: return 1.0 + dna_.theta * (1.0 + dna_.f1 + dna_.f2);
        case Kind::Table: {
            double b = 0.0;
            for (const auto& [n, z] : table_) b = std::max(b, std::abs(z));
            return b;
        }
    }
    return 0.0;
}

std::map<int, double> ChargeModel::table() const {
    std::map<int, double> out;
    for (int n = -n_max_; n <= n_max_; ++n) out[n] = zeta(n);
    return out;
}

ChargeModel ChargeModel::single_helix(int n_max) {
    ChargeModel m;
    m.kind_ = Kind::SingleHelix;
    m.n_max_ = n_max;
    return m;
}

ChargeModel ChargeModel::dna(const DnaParams& p, int n_max) {
    p.validate();
    ChargeModel m;
    m.kind_ = Kind::Dna;
    m.n_max_ = n_max;
    m.dna_ = p;
    return m;
}

ChargeModel ChargeModel::from_table(const std::map<int, double>& zeta) {
    ChargeModel m;
    m.kind_ = Kind::Table;
    m.table_ = zeta;
    int nm = 0;
    for (const auto& [n, z] : zeta) {
        if (!std::isfinite(z)) throw ValidationError("charge table: non-finite coefficient");
        nm = std::max(nm, std::abs(n));
    }
    m.n_max_ = nm;
    return m;
}

RadialDistribution dna_distribution(const DnaParams& p) {
    p.validate();
    RadialDistribution d;
    const double layer = p.theta * (1.0 - p.f1 - p.f2) / (2.0 * std::numbers::pi);
    d.smooth = [layer](double) { return layer; };
    d.lines = {{-0.5, p.phi_s}, {-0.5, -p.phi_s}, {p.theta * p.f1, 0.0}, {p.theta * p.f2, std::numbers::pi}};
    return d;
}

ChargeModel coefficients_from_radial(const RadialDistribution& dist, int n_max, double tol) {
    using cd = std::complex<double>;
    std::map<int, double> out;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int n = -n_max; n <= n_max; ++n) {
        cd z = 0.0;
        for (const auto& l : dist.lines) z += l.weight * std::polar(1.0, n * l.at);
        if (dist.smooth) {
            // periodic trapezoid; doubling until successive estimates agree
            cd prev = 0.0;
            bool converged = false;
            for (int npts = 2 * (std::abs(n) + 4); npts <= (1 << 20); npts *= 2) {
                cd q = 0.0;
                const double h = two_pi / npts;
                for (int k = 0; k < npts; ++k) q += dist.smooth(k * h) * std::polar(1.0, n * k * h);
                q *= h;
                if (npts > 2 * (std::abs(n) + 4) && std::abs(q - prev) <= tol * std::max(1.0, std::abs(q))) {
                    prev = q;
                    converged = true;
                    break;
                }
                prev = q;
            }
            if (!converged) throw NonConvergence("charge quadrature did not converge");
            z += prev;
        }
        if (std::abs(z.imag()) > 1e-10 * std::max(1.0, std::abs(z)))
            throw ValidationError("radial distribution is not mirror symmetric; coefficients are complex");
        out[n] = z.real();
    }
    return ChargeModel::from_table(out);
}

}  // namespace braid
