#include "braid/surface_response.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "braid/errors.hpp"
#include "braid/summation.hpp"

namespace braid {

using sf::OrderTable;

void ResponseParams::validate() const {
    if (!(a > 0.0)) throw ValidationError("rod radius must be positive");
    if (!(R > 2.0 * a)) throw ValidationError("non-penetrating rods require R > 2a");
    if (!(kappa_D > 0.0)) throw ValidationError("screening constant must be positive");
    if (!(kappa_D * R > 1.0)) throw ValidationError("image expansion needs kappa_D R > 1");
    if (!(eta >= 0.0 && eta < std::numbers::pi)) throw ValidationError("tilt angle must lie in [0, pi)");
    if (!(trunc.abs_tol > 0.0) || trunc.ring_cap < 1) throw ValidationError("bad response truncation");
}

namespace {

double parity(int n) { return (n & 1) ? -1.0 : 1.0; }

double screened(double kz, double kappa) { return std::sqrt(kz * kz + kappa * kappa); }

// I_n'(x) / (K_n'(x) I_n(x)) and its x-derivative.
struct ImageRatio {
    double q, dq;
};

ImageRatio image_ratio(int n, double x) {
    const OrderTable I(OrderTable::Kind::I, std::abs(n) + 2, x);
    const OrderTable K(OrderTable::Kind::K, std::abs(n) + 2, x);
    const double i = I(n), ip = I.deriv(n), ipp = I.deriv2(n);
    const double kp = K.deriv(n), kpp = K.deriv2(n);
    const double den = kp * i;
    return {ip / den, (ipp * den - ip * (kpp * i + kp * ip)) / (den * den)};
}

}  // namespace

// Scaled tables: every expression below pairs one I-type with one K-type factor.
double zeta_img0(int n, double kz, double a, double kappa) {
    const double x = a * screened(kz, kappa);
    const OrderTable I(OrderTable::Kind::I, std::abs(n) + 2, x, true);
    const OrderTable K(OrderTable::Kind::K, std::abs(n) + 2, x, true);
    return -K(n) * I.deriv(n) / (I(n) * K.deriv(n));
}

double zeta_surf0(int n, double kz, double a, double kappa) {
    const double x = a * screened(kz, kappa);
    const OrderTable I(OrderTable::Kind::I, std::abs(n) + 2, x, true);
    const OrderTable K(OrderTable::Kind::K, std::abs(n) + 2, x, true);
    return -1.0 / (x * I(n) * K.deriv(n));
}

double dzeta_surf0_dk(int n, double kz, double a, double kappa) {
    const double kap = screened(kz, kappa);
    const double x = a * kap;
    const OrderTable I(OrderTable::Kind::I, std::abs(n) + 2, x, true);
    const OrderTable K(OrderTable::Kind::K, std::abs(n) + 2, x, true);
    const double i = I(n), ip = I.deriv(n), kp = K.deriv(n), kpp = K.deriv2(n);
    const double g = x * i * kp;
    const double dg = i * kp + x * ip * kp + x * i * kpp;
    return dg / (g * g) * a * kz / kap;
}

double max_abs_dzeta_surf0(int n, const std::vector<double>& kgrid, double a, double kappa) {
    double m = 0.0;
    for (double k : kgrid) m = std::max(m, std::abs(dzeta_surf0_dk(n, k, a, kappa)));
    return m;
}

// ---- SurfaceKernel ------------------------------------------------------------

SurfaceKernel::SurfaceKernel(int rod, double kz, const ResponseParams& p) : rod_(rod), p_(p), kz_(kz) {
    if (rod != 1 && rod != 2) throw DomainError("rod index must be 1 or 2");
    kappa_ = screened(kz, p.kappa_D);
    dkappa_ = kz / kappa_;
    x_ = p.a * kappa_;
    cos_ = std::cos(p.eta);
    sin_ = std::sin(p.eta);
    cap_ = p.trunc.ring_cap;
    const int reach = sf::kMaxOrder;
    ilo_ = OrderTable(OrderTable::Kind::I, 2 * cap_ + 2, 0.5 * x_ * (1.0 - cos_));
    ihi_ = OrderTable(OrderTable::Kind::I, cap_ + 2, 0.5 * x_ * (1.0 + cos_));
    kr_ = OrderTable(OrderTable::Kind::K, cap_ + reach + 2, p.R * kappa_);
    jz_ = OrderTable(OrderTable::Kind::J, 3 * cap_ + reach + 2, p.a * kz * sin_);
    z0_.resize(reach + 1);
    dz0_.resize(reach + 1);
    for (int l = 0; l <= reach; ++l) {
        z0_[l] = zeta_surf0(l, kz * cos_, p.a, p.kappa_D);
        dz0_[l] = cos_ * dzeta_surf0_dk(l, kz * cos_, p.a, p.kappa_D);
    }
}

SurfaceKernel::Term SurfaceKernel::term(int n, int l, int np, int mp) const {
    const int p_lo = np - mp;
    double sgn, kv, kd, jv, jd;
    if (rod_ == 2) {
        sgn = parity(n);
        kv = kr_(n - np);
        kd = kr_.deriv(n - np);
        jv = jz_(2 * mp - np - l);
        jd = jz_.deriv(2 * mp - np - l);
    } else {
        sgn = parity(np);
        kv = kr_(np - n);
        kd = kr_.deriv(np - n);
        jv = jz_(np + l - 2 * mp);
        jd = jz_.deriv(np + l - 2 * mp);
    }
    const double a = ilo_(p_lo), ad = ilo_.deriv(p_lo);
    const double b = ihi_(mp), bd = ihi_.deriv(mp);
    const double z = zeta0(l), zd = dzeta0(l);
    const double v = sgn * a * b * kv * jv * z;
    // chain rule through every argument
    const double dlo = 0.5 * p_.a * (1.0 - cos_) * dkappa_;
    const double dhi = 0.5 * p_.a * (1.0 + cos_) * dkappa_;
    const double dr = p_.R * dkappa_;
    const double dz = p_.a * sin_;
    const double dv = sgn * (ad * dlo * b * kv * jv * z + a * bd * dhi * kv * jv * z + a * b * kd * dr * jv * z +
                             a * b * kv * jd * dz * z + a * b * kv * jv * zd);
    return {v, dv};
}

SurfaceCoefficients SurfaceKernel::eval(int n, int l) const {
    if (std::abs(n) > sf::kMaxOrder || std::abs(l) > sf::kMaxOrder)
        throw DomainError("surface response order beyond library cap");
    const ImageRatio q = image_ratio(n, x_);
    const double dq = q.dq * p_.a * dkappa_;

    CompensatedSum<double> s0, d0, s1, d1;
    double l1_v = 0.0, l1_d = 0.0, l1_w = 0.0;
    const int rmin = std::abs(n) + std::abs(l) + 2;
    const double tol = p_.trunc.abs_tol;
    int r = 0;
    bool converged = false;
    for (; r <= cap_; ++r) {
        double ring_v = 0.0, ring_d = 0.0, ring_w = 0.0;
        auto visit = [&](int np, int mp) {
            const Term t = term(n, l, np, mp);
            const double w = double(n - np);
            s0.add(t.v);
            d0.add(t.dv);
            s1.add(w * t.v);
            d1.add(w * t.dv);
            ring_v += std::abs(t.v);
            ring_d += std::abs(t.dv);
            ring_w += std::abs(w * t.v);
        };
        if (r == 0) {
            visit(0, 0);
        } else {
            for (int i = -r; i <= r; ++i) {
                visit(i, r);
                visit(i, -r);
            }
            for (int i = -r + 1; i <= r - 1; ++i) {
                visit(r, i);
                visit(-r, i);
            }
        }
        l1_v += ring_v;
        l1_d += ring_d;
        l1_w += ring_w;
        if (r >= rmin && ring_v <= tol * l1_v && ring_d <= tol * l1_d && ring_w <= tol * l1_w) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw NonConvergence("surface response ring sum not converged at ring " + std::to_string(cap_) + " (n=" +
                             std::to_string(n) + ", l=" + std::to_string(l) + ")");

    const double sv = s0.value(), sd = d0.value(), wv = s1.value(), wd = d1.value();
    SurfaceCoefficients out;
    out.zeta10 = -q.q * sv;
    out.dzeta10 = -(dq * sv + q.q * sd);
    out.zeta11 = q.q * wv / p_.R;
    out.dzeta11 = (dq * wv + q.q * wd) / p_.R;
    out.rings = r;
    return out;
}

double SurfaceKernel::eval_reversed(int n, int l, int rings) const {
    const ImageRatio q = image_ratio(n, x_);
    CompensatedSum<double> s;
    for (int r = std::min(rings, cap_); r >= 0; --r) {
        if (r == 0) {
            s.add(term(n, l, 0, 0).v);
            continue;
        }
        for (int i = r - 1; i >= -r + 1; --i) {
            s.add(term(n, l, -r, i).v);
            s.add(term(n, l, r, i).v);
        }
        for (int i = r; i >= -r; --i) {
            s.add(term(n, l, i, -r).v);
            s.add(term(n, l, i, r).v);
        }
    }
    return -q.q * s.value();
}

SurfaceCoefficients zeta_surf1(int rod, int n, int l, double kz, const ResponseParams& p) {
    p.validate();
    return SurfaceKernel(rod, kz, p).eval(n, l);
}

double zeta_surf1_reversed(int rod, int n, int l, double kz, const ResponseParams& p, int rings) {
    p.validate();
    return SurfaceKernel(rod, kz, p).eval_reversed(n, l, rings);
}

SmallAngleCoefficients zeta_surf1_small_angle(int rod, int n, int l, double kz, const ResponseParams& p) {
    p.validate();
    if (rod != 1 && rod != 2) throw DomainError("rod index must be 1 or 2");
    const double kap = screened(kz, p.kappa_D);
    const double x = p.a * kap;
    const int top = std::max(std::abs(n), std::abs(l)) + std::abs(n - l) + 3;
    const OrderTable I(OrderTable::Kind::I, top, x);
    const OrderTable K(OrderTable::Kind::K, top, p.R * kap);
    const double q = image_ratio(n, x).q;
    const double z0 = zeta_surf0(l, kz * std::cos(p.eta), p.a, p.kappa_D);
    const double sgn = rod == 2 ? parity(n) : parity(l);

    SmallAngleCoefficients out;
    out.zeta100 = -q * sgn * I(l) * K(n - l) * z0;
    out.zeta11 = q * sgn * double(n - l) * I(l) * K(n - l) * z0 / p.R;
    const double shifted = I(l - 1) * K(n - l + 1) - I(l + 1) * K(n - l - 1);
    // the same bracket appears for both rods once the K orders are reflected
    out.zeta101 = 0.5 * p.a * kz * q * sgn * shifted * z0;
    return out;
}

// ---- cache ----------------------------------------------------------------------

std::uint64_t response_params_hash(const ResponseParams& p) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(std::bit_cast<std::uint64_t>(p.a));
    mix(std::bit_cast<std::uint64_t>(p.R));
    mix(std::bit_cast<std::uint64_t>(p.kappa_D));
    mix(std::bit_cast<std::uint64_t>(p.eta));
    mix(std::bit_cast<std::uint64_t>(p.trunc.abs_tol));
    mix(static_cast<std::uint64_t>(p.trunc.ring_cap));
    return h;
}

std::size_t ResponseCache::KeyHash::operator()(const Key& k) const {
    std::uint64_t h = k.ph;
    auto mix = [&](std::uint64_t v) { h = (h ^ v) * 0x100000001b3ull; };
    mix(static_cast<std::uint64_t>(k.rod));
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.n)));
    mix(static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.l)));
    mix(static_cast<std::uint64_t>(k.kq));
    return static_cast<std::size_t>(h);
}

SurfaceCoefficients ResponseCache::get(int rod, int n, int l, double kz, const ResponseParams& p) {
    const Key key{rod, n, l, static_cast<std::int64_t>(std::llround(kz / quantum_)), response_params_hash(p)};
    {
        std::shared_lock lock(mu_);
        auto it = map_.find(key);
        if (it != map_.end()) {
            ++hits_;
            return it->second;
        }
    }
    const SurfaceCoefficients v = zeta_surf1(rod, n, l, kz, p);
    std::unique_lock lock(mu_);
    map_.try_emplace(key, v);
    return v;
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mu_);
    return map_.size();
}

void ResponseCache::clear() {
    std::unique_lock lock(mu_);
    map_.clear();
}

}  // namespace braid
