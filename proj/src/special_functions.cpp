#include "braid/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "braid/errors.hpp"

namespace braid::sf {
namespace {

constexpr double kEps = 1e-17;
constexpr double kBig = 1e200;
constexpr double kSeriesLimitI = 12.0;  // I: ascending series below, Miller above
constexpr double kTemmeLimitK = 2.0;    // K: Temme series below, Steed CF2 above
constexpr double kSeriesLimitJ = 1.0;

void check_order(int n) {
    if (std::abs(n) > kMaxOrder + 2)
        throw DomainError("Bessel order " + std::to_string(n) + " beyond library cap");
}

// (x/2)^n / n!  for n >= 0
double leading_term(int n, double half_x) {
    double t = 1.0;
    for (int k = 1; k <= n; ++k) t *= half_x / k;
    return t;
}

// Ascending series. sign = +1 for I, -1 for J.
double ascending_series(int n, double x, double sign) {
    const double hx = 0.5 * x;
    double term = leading_term(n, hx);
    if (term == 0.0) return 0.0;
    const double q = sign * hx * hx;
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= q / (double(k) * double(n + k));
        sum += term;
        if (std::abs(term) < kEps * std::abs(sum)) break;
    }
    return sum;
}

// K_0, K_1 for x > 0.
void k01(double x, double& k0, double& k1, bool scaled = false) {
    if (x <= kTemmeLimitK) {
        // Temme series at order zero.
        const double d = 0.25 * x * x;
        double ff = -std::log(0.5 * x) - std::numbers::egamma;
        double p = 0.5, q = 0.5, c = 1.0;
        double sum = ff, sum1 = p;
        for (int i = 1; i < 200; ++i) {
            ff = (i * ff + p + q) / (double(i) * i);
            c *= d / i;
            p /= i;
            q /= i;
            const double del = c * ff;
            sum += del;
            sum1 += c * (p - i * ff);
            if (std::abs(del) < kEps * std::abs(sum)) break;
        }
        k0 = sum;
        k1 = sum1 * 2.0 / x;
        if (scaled) {
            k0 *= std::exp(x);
            k1 *= std::exp(x);
        }
        return;
    }
    // Steed's continued fraction CF2 with Thompson-Barnett normalisation.
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25;
    double q = a1, c = a1, a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i < 10000; ++i) {
        a -= 2 * i;
        c = -a * c / (i + 1.0);
        const double qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        const double dels = q * delh;
        s += dels;
        if (std::abs(dels / s) < kEps) break;
    }
    h = a1 * h;
    k0 = std::sqrt(std::numbers::pi / (2.0 * x)) * (scaled ? 1.0 : std::exp(-x)) / s;
    k1 = k0 * (x + 0.5 - h) / x;
}

// Miller downward recurrence for I_0..I_nmax at x > 0, normalised by
// e^x = I_0 + 2 sum_k I_k.
std::vector<double> i_miller(int nmax, double x, bool scaled) {
    const int start = std::max(nmax, int(x)) + 30 + int(8.0 * std::sqrt(x));
    std::vector<double> out(nmax + 1, 0.0);
    double ip = 0.0, ic = 1e-280, sum = 0.0;
    for (int k = start; k >= 1; --k) {
        const double im = ip + (2.0 * k / x) * ic;  // I_{k-1}
        ip = ic;
        ic = im;
        if (k - 1 <= nmax) out[k - 1] = ic;
        if (k >= 1) sum += 2.0 * ip;
        if (std::abs(ic) > kBig) {
            ic /= kBig;
            ip /= kBig;
            sum /= kBig;
            for (int j = k - 1; j <= nmax; ++j) out[j] /= kBig;
        }
    }
    sum += ic;
    // e^x / sum may overflow for large x while the product does not.
    const double lscale = (scaled ? 0.0 : x) - std::log(sum);
    for (auto& v : out) v = (v == 0.0) ? 0.0 : std::copysign(std::exp(std::log(std::abs(v)) + lscale), v);
    return out;
}

// Miller downward recurrence for J_0..J_nmax at x > 0, normalised by
// 1 = J_0 + 2 sum_k J_{2k}.
std::vector<double> j_miller(int nmax, double x) {
    const int top = std::max(nmax, int(x));
    int start = top + 15 + int(std::sqrt(160.0 * top));
    start += start & 1;
    std::vector<double> out(nmax + 1, 0.0);
    double jp = 0.0, jc = 1e-280, sum = 0.0;
    for (int k = start; k >= 1; --k) {
        const double jm = (2.0 * k / x) * jc - jp;  // J_{k-1}
        jp = jc;
        jc = jm;
        if (k - 1 <= nmax) out[k - 1] = jc;
        if (((k - 1) & 1) == 0 && k - 1 > 0) sum += 2.0 * jc;
        if (std::abs(jc) > kBig) {
            jc /= kBig;
            jp /= kBig;
            sum /= kBig;
            for (int j = k - 1; j <= nmax; ++j) out[j] /= kBig;
        }
    }
    sum += jc;
    for (auto& v : out) v /= sum;
    return out;
}

}  // namespace

std::vector<double> bessel_i_seq(int nmax, double x) {
    if (nmax < 0) return {};
    if (x < 0.0) throw DomainError("bessel_i_seq: negative argument");
    std::vector<double> out(nmax + 1, 0.0);
    if (x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    if (x > 700.0) throw DomainError("bessel_i_seq: argument overflows");
    if (x > kSeriesLimitI) return i_miller(nmax, x, false);

    out[nmax] = ascending_series(nmax, x, 1.0);
    if (nmax == 0) return out;
    out[nmax - 1] = ascending_series(nmax - 1, x, 1.0);
    // Downward recurrence is stable for I; drop back to the series where the
    // top orders underflow.
    for (int k = nmax - 1; k >= 1; --k) {
        if (out[k + 1] == 0.0 || out[k] == 0.0) {
            out[k - 1] = ascending_series(k - 1, x, 1.0);
            continue;
        }
        out[k - 1] = out[k + 1] + (2.0 * k / x) * out[k];
    }
    return out;
}

std::vector<double> bessel_i_seq_scaled(int nmax, double x) {
    if (nmax < 0) return {};
    if (x < 0.0) throw DomainError("bessel_i_seq: negative argument");
    if (x > kSeriesLimitI) return i_miller(nmax, x, true);
    std::vector<double> out = bessel_i_seq(nmax, x);
    for (double& v : out) v *= std::exp(-x);
    return out;
}

std::vector<double> bessel_k_seq_scaled(int nmax, double x) {
    if (nmax < 0) return {};
    if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
    std::vector<double> out(std::max(nmax, 1) + 1);
    k01(x, out[0], out[1], true);
    for (int k = 1; k < nmax; ++k) out[k + 1] = out[k - 1] + (2.0 * k / x) * out[k];
    out.resize(nmax + 1);
    return out;
}

std::vector<double> bessel_k_seq(int nmax, double x) {
    if (nmax < 0) return {};
    if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
    std::vector<double> out(std::max(nmax, 1) + 1);
    k01(x, out[0], out[1]);
    for (int k = 1; k < nmax; ++k) out[k + 1] = out[k - 1] + (2.0 * k / x) * out[k];
    out.resize(nmax + 1);
    return out;
}

std::vector<double> bessel_j_seq(int nmax, double x) {
    if (nmax < 0) return {};
    if (std::abs(x) >= 1e6) throw DomainError("bessel_j: argument out of supported range");
    std::vector<double> out(nmax + 1, 0.0);
    const double ax = std::abs(x);
    if (ax == 0.0) {
        out[0] = 1.0;
        return out;
    }
    if (ax <= kSeriesLimitJ) {
        for (int k = 0; k <= nmax; ++k) out[k] = ascending_series(k, ax, -1.0);
    } else {
        out = j_miller(nmax, ax);
    }
    if (x < 0.0)
        for (int k = 1; k <= nmax; k += 2) out[k] = -out[k];
    return out;
}

double bessel_j(int n, double x) {
    check_order(n);
    const int an = std::abs(n);
    double v = bessel_j_seq(an, x)[an];
    return (n < 0 && (an & 1)) ? -v : v;
}

double bessel_i(int n, double x) {
    check_order(n);
    const int an = std::abs(n);
    if (x < 0.0) {
        const double v = bessel_i(an, -x);
        return (an & 1) ? -v : v;
    }
    if (x <= kSeriesLimitI) return ascending_series(an, x, 1.0);
    return bessel_i_seq(an, x)[an];
}

double bessel_k(int n, double x) {
    check_order(n);
    const int an = std::abs(n);
    return bessel_k_seq(an, x)[an];
}

double bessel_jp(int n, double x) { return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x)); }
double bessel_ip(int n, double x) { return 0.5 * (bessel_i(n - 1, x) + bessel_i(n + 1, x)); }
double bessel_kp(int n, double x) { return -0.5 * (bessel_k(n - 1, x) + bessel_k(n + 1, x)); }
double bessel_ipp(int n, double x) {
    return 0.25 * (bessel_i(n - 2, x) + 2.0 * bessel_i(n, x) + bessel_i(n + 2, x));
}
double bessel_kpp(int n, double x) {
    return 0.25 * (bessel_k(n - 2, x) + 2.0 * bessel_k(n, x) + bessel_k(n + 2, x));
}

OrderTable::OrderTable(Kind kind, int nmax, double x, bool scaled) : kind_(kind), nmax_(nmax), x_(x) {
    const int top = std::max(nmax, 0) + 2;
    switch (kind) {
        case Kind::J: v_ = bessel_j_seq(top, x); break;
        case Kind::I: v_ = scaled ? bessel_i_seq_scaled(top, x) : bessel_i_seq(top, x); break;
        case Kind::K: v_ = scaled ? bessel_k_seq_scaled(top, x) : bessel_k_seq(top, x); break;
    }
}

double OrderTable::operator()(int n) const {
    const int an = std::abs(n);
    if (an >= static_cast<int>(v_.size()))
        throw DomainError("OrderTable: order " + std::to_string(n) + " outside tabulated range");
    const double v = v_[an];
    if (n < 0 && kind_ == Kind::J && (an & 1)) return -v;
    return v;
}

double OrderTable::deriv(int n) const {
    switch (kind_) {
        case Kind::J: return 0.5 * ((*this)(n - 1) - (*this)(n + 1));
        case Kind::I: return 0.5 * ((*this)(n - 1) + (*this)(n + 1));
        case Kind::K: return -0.5 * ((*this)(n - 1) + (*this)(n + 1));
    }
    return 0.0;
}

double OrderTable::deriv2(int n) const {
    const double s = (kind_ == Kind::J) ? -2.0 : 2.0;
    return 0.25 * ((*this)(n - 2) + s * (*this)(n) + (*this)(n + 2));
}

// ---- identity residuals ----------------------------------------------------

namespace {

struct HelixRadius {
    double r;    // R_H
    double phi;  // xi~
};

HelixRadius tilted_helix(double eta, double xi) {
    const double c = std::cos(xi), s = std::cos(eta) * std::sin(xi);
    return {std::hypot(c, s), std::atan2(s, c)};
}

}  // namespace

double graf_addition_residual(double aK, double eta, double xi, int m, int nterms) {
    using cd = std::complex<double>;
    const auto h = tilted_helix(eta, xi);
    const double lo = 0.5 * aK * (1.0 - std::cos(eta));
    const double hi = 0.5 * aK * (1.0 + std::cos(eta));
    const int cap = nterms + std::abs(m) + 1;
    const OrderTable jlo(OrderTable::Kind::J, cap, lo), jhi(OrderTable::Kind::J, cap, hi);
    const OrderTable ilo(OrderTable::Kind::I, cap, lo), ihi(OrderTable::Kind::I, cap, hi);

    const cd lhs_j = bessel_j(m, aK * h.r) * std::polar(1.0, -m * h.phi);
    const cd lhs_i = bessel_i(m, aK * h.r) * std::polar(1.0, -m * h.phi);
    cd rhs_j = 0.0, rhs_i = 0.0;
    for (int n = -nterms; n <= nterms; ++n) {
        const cd ph = std::polar(1.0, (m - 2.0 * n) * xi);
        rhs_j += jlo(m - n) * jhi(n) * ph;
        rhs_i += ilo(m - n) * ihi(n) * ph;
    }
    const double rj = std::abs(lhs_j - rhs_j);
    const double ri = std::abs(lhs_i - rhs_i) / std::max(std::abs(lhs_i), 1e-300);
    return std::max(rj, ri);
}

double graf_addition_residual_rod1(double aK, double eta, double xi, int n, int nterms) {
    using cd = std::complex<double>;
    const auto h = tilted_helix(eta, xi);
    const double lo = 0.5 * aK * (1.0 - std::cos(eta));
    const double hi = 0.5 * aK * (1.0 + std::cos(eta));
    const int cap = nterms + std::abs(n) + 1;
    const OrderTable ilo(OrderTable::Kind::I, cap, lo), ihi(OrderTable::Kind::I, cap, hi);
    const cd lhs = bessel_i(n, aK * h.r) * std::polar(1.0, n * h.phi);
    cd rhs = 0.0;
    for (int m = -nterms; m <= nterms; ++m) rhs += ilo(n - m) * ihi(m) * std::polar(1.0, (2.0 * m - n) * xi);
    return std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
}

double graf_addition_check(double aK, double eta2, double xi2, int m, const SeriesTolerance& tol) {
    if (!(aK > 0.0)) throw DomainError("graf_addition_check: aK must be positive");
    const double r = graf_addition_residual(aK, eta2, xi2, m, tol.max_terms);
    if (r > tol.abs_tol)
        throw NonConvergence("addition formula residual " + std::to_string(r) + " above tolerance at " +
                             std::to_string(tol.max_terms) + " terms");
    return r;
}

double jacobi_anger_residual(double z, double t, int J) {
    using cd = std::complex<double>;
    const OrderTable jt(OrderTable::Kind::J, J, z);
    cd sum = 0.0;
    for (int j = -J; j <= J; ++j) sum += jt(j) * std::polar(1.0, -j * t);
    return std::abs(std::polar(1.0, -z * std::sin(t)) - sum);
}

double wronskian_recurrence_residual(int n, double x) {
    const OrderTable I(OrderTable::Kind::I, std::abs(n) + 1, x);
    const OrderTable K(OrderTable::Kind::K, std::abs(n) + 1, x);
    const double w = std::abs((I.deriv(n) * K(n) - I(n) * K.deriv(n)) * x - 1.0);
    // Recurrences in an arrangement that does not reduce to the one used to build the tables.
    const double ri = std::abs(I.deriv(n) - (I(n - 1) - n / x * I(n))) / std::max(std::abs(I.deriv(n)), 1e-300);
    const double rk = std::abs(K.deriv(n) - (-K(n - 1) - n / x * K(n))) / std::abs(K.deriv(n));
    return std::max({w, ri, rk});
}

double cross_wronskian_residual(int n, double x) {
    const double lhs = bessel_i(n, x) * bessel_k(n + 1, x) + bessel_i(n + 1, x) * bessel_k(n, x);
    return std::abs(lhs * x - 1.0);
}

}  // namespace braid::sf
