#include "braid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "braid/errors.hpp"

namespace braid {
namespace {

constexpr double kSmallTilt = 1e-6;

double reduce_angle(double x) {
    if (!std::isfinite(x)) throw DomainError("non-finite Euler angle");
    double r = std::remainder(x, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

int delta_of(int mu) { return mu == 1 ? 1 : -1; }

}  // namespace

EulerAngles EulerAngles::make(double alpha, double beta, double phi0) {
    return {reduce_angle(alpha), reduce_angle(beta), reduce_angle(phi0)};
}

double FrameSet::orthonormality_defect() const {
    double e = 0.0;
    for (const Vec3* v : {&d_hat, &t1_hat, &t2_hat, &tA_hat, &n1_hat, &n2_hat}) e = std::max(e, std::abs(v->norm() - 1.0));
    e = std::max({e, std::abs(d_hat.dot(t1_hat)), std::abs(d_hat.dot(t2_hat)), std::abs(d_hat.dot(n1_hat)),
                  std::abs(d_hat.dot(n2_hat)), std::abs(n1_hat.dot(t1_hat)), std::abs(n2_hat.dot(t2_hat))});
    e = std::max(e, (n1_hat - t1_hat.cross(d_hat)).norm());
    e = std::max(e, (n2_hat - t2_hat.cross(d_hat)).norm());
    return e;
}

BraidState BraidState::make(double R, double a, double eta, double omegaA3, double omegaA2) {
    BraidState s;
    s.R = R;
    s.a = a;
    s.eta = eta;
    s.omegaA = {omega_A1(eta, omegaA3, R), omegaA2, omegaA3};
    return s;
}

void BraidState::validate() const {
    if (!(R > 0.0) || !(a >= 0.0)) throw ValidationError("rod separation and radius must be positive");
    if (!(R > 2.0 * a)) throw ValidationError("non-penetrating rods require R > 2a");
    if (!(eta >= 0.0 && eta < std::numbers::pi)) throw ValidationError("tilt angle must lie in [0, pi)");
    if (std::abs(R * omegaA[2] * std::sin(eta)) > 2.0)
        throw ValidationError("|R w_A3 sin(eta)| exceeds 2; no real tilt difference");
}

Mat3 rotation_frame(const EulerAngles& e) {
    const double ca = std::cos(e.alpha), sa = std::sin(e.alpha);
    const double cb = std::cos(e.beta), sb = std::sin(e.beta);
    const double cp = std::cos(e.phi0), sp = std::sin(e.phi0);
    Mat3 ta, tb, tp;
    ta << 1, 0, 0, 0, ca, -sa, 0, sa, ca;
    tb << cb, 0, -sb, 0, 1, 0, sb, 0, cb;
    tp << cp, -sp, 0, sp, cp, 0, 0, 0, 1;
    return tb * ta * tp;
}

std::pair<double, double> sigma_from_tilts(const TiltPair& t) {
    const double s = std::sin(t.total());
    if (t.eta1 == 0.0 && t.eta2 == 0.0) return {1.0, 1.0};
    if (std::abs(s) < 1e-300 || std::abs(t.total()) < 1e-14)
        throw DomainError("degenerate tilts: eta1 + eta2 vanishes with eta1 != eta2");
    return {2.0 * std::sin(t.eta2) / s, 2.0 * std::sin(t.eta1) / s};
}

double delta_eta(double eta, double omegaA3, double R) {
    const double arg = -R * omegaA3 * std::sin(eta) / 2.0;
    if (!(std::abs(arg) <= 1.0)) throw DomainError("tilt difference: |R w_A3 sin(eta)/2| > 1");
    return std::asin(arg);
}

double omega_A1(double eta, double omegaA3, double R) {
    if (!(R > 0.0)) throw DomainError("omega_A1: R must be positive");
    const double se = std::sin(eta);
    const double u = R * R * omegaA3 * omegaA3 * se * se / 4.0;
    if (u > 1.0) throw DomainError("omega_A1: negative discriminant");
    // sqrt(1-u) - cos(eta) rewritten as (sin^2 eta - u)/(sqrt(1-u) + cos eta), free of cancellation near eta = 0.
    const double den = std::sqrt(1.0 - u) + std::cos(eta);
    if (den <= 0.0) throw DomainError("omega_A1: closure relation singular");
    return -2.0 * se * (1.0 - R * R * omegaA3 * omegaA3 / 4.0) / (R * den);
}

TiltPair tilts_from_state(double eta, double omegaA3, double R) {
    const double de = delta_eta(eta, omegaA3, R);
    return {(eta + de) / 2.0, (eta - de) / 2.0};
}

double half_angle_c(double x) { return std::sqrt((std::sqrt(1.0 - x * x / 4.0) + 1.0) / 2.0); }

double half_angle_s(double x) {
    // Negative branch for x >= 0; odd continuation so that S = sin(delta_eta/2) for either sign of w_A3.
    const double mag = std::sqrt(std::max(0.0, (1.0 - std::sqrt(1.0 - x * x / 4.0)) / 2.0));
    return x >= 0.0 ? -mag : mag;
}

BraidFrequencies rod_frequencies(const BraidState& st) {
    st.validate();
    const double eta = st.eta, R = st.R;
    const double w1 = st.omegaA[0], w2 = st.omegaA[1], w3 = st.omegaA[2];
    const double se = std::sin(eta);
    const double x = R * se * w3;
    // tilt-difference rate enters the twist rate through d(eta_mu)/ds
    const double tilt_rate = R * (w3 * st.deta_ds * std::cos(eta) + st.domegaA3_ds * se) / (4.0 * std::sqrt(1.0 - x * x / 4.0));

    BraidFrequencies f;
    f.omega[2] = {w1, w2, w3};
    for (int mu = 1; mu <= 2; ++mu) {
        const double d = delta_of(mu);
        double pref, c1, c3;  // 1/sigma, coefficient pairs of (w1, w3)
        if (se >= kSmallTilt) {
            const double h = eta / 2.0, ch = std::cos(h), sh = std::sin(h);
            const double C = half_angle_c(x), S = half_angle_s(x);
            pref = se / (2.0 * sh * C - 2.0 * d * ch * S);
            c1 = C * ch - d * S * sh;  // cos eta_mu
            c3 = d * sh * C + S * ch;  // delta sin eta_mu
        } else {
            // untilted limit: eta_mu -> 0 with sigma_mu -> 1 + delta R w3 / 2
            pref = 1.0 / (1.0 + d * R * w3 / 2.0);
            c1 = 1.0;
            c3 = 0.0;
        }
        auto& om = f.omega[mu - 1];
        om[0] = pref * (c1 * w1 + c3 * w3);
        om[2] = pref * (c1 * w3 - c3 * w1);
        om[1] = pref * (w2 - d * st.deta_ds / 2.0 + tilt_rate);
    }
    const auto& o1 = f.omega[0];
    const auto& o2 = f.omega[1];
    f.sigma1 = 1.0 / std::hypot(R * o1[0] / 2.0, 1.0 - R * o1[2] / 2.0);
    f.sigma2 = 1.0 / std::hypot(R * o2[0] / 2.0, 1.0 + R * o2[2] / 2.0);
    return f;
}

std::pair<double, double> helix_frequencies(const BraidState& st, const BraidFrequencies& f) {
    if (!(f.sigma1 > 0.0 && f.sigma2 > 0.0)) throw DomainError("helix_frequencies: sigma must be positive");
    return {f.omega[0][0] + st.dxi1_ds / f.sigma1, f.omega[1][0] + st.dxi2_ds / f.sigma2};
}

FrameSet frame_set(const EulerAngles& angles, const TiltPair& t) {
    const Mat3 F = rotation_frame(angles);
    const double s1 = std::sin(t.eta1), c1 = std::cos(t.eta1);
    const double s2 = std::sin(t.eta2), c2 = std::cos(t.eta2);
    FrameSet f;
    f.d_hat = F.col(0);
    f.tA_hat = F.col(2);
    f.t1_hat = F * Vec3(0.0, s1, c1);
    f.t2_hat = F * Vec3(0.0, -s2, c2);
    f.n1_hat = F * Vec3(0.0, c1, -s1);
    f.n2_hat = F * Vec3(0.0, c2, s2);
    return f;
}

Vec3 helix_vector(const EulerAngles& angles, const TiltPair& t, int mu, double xi) {
    const double eta = mu == 1 ? t.eta1 : t.eta2;
    const double d = delta_of(mu);
    return rotation_frame(angles) *
           Vec3(std::cos(xi), std::sin(xi) * std::cos(eta), -d * std::sin(xi) * std::sin(eta));
}

FrameDerivative frame_rates(const FrameSet& f, const BraidFrequencies& w, int mu) {
    const auto& om = w.rod(mu);
    const double sg = w.sigma(mu);
    const Vec3& n = mu == 1 ? f.n1_hat : f.n2_hat;
    const Vec3& t = mu == 1 ? f.t1_hat : f.t2_hat;
    return {sg * (om[0] * n - om[2] * t), sg * (om[1] * t - om[0] * f.d_hat), sg * (om[2] * f.d_hat - om[1] * n)};
}

namespace {

struct OdeState {
    Vec3 d, n1, t1, n2, t2, r1, r2;

    OdeState axpy(double h, const OdeState& k) const {
        return {d + h * k.d, n1 + h * k.n1, t1 + h * k.t1, n2 + h * k.n2, t2 + h * k.t2, r1 + h * k.r1, r2 + h * k.r2};
    }
};

OdeState rhs(const OdeState& y, const BraidFrequencies& w) {
    FrameSet f;
    f.d_hat = y.d;
    f.n1_hat = y.n1;
    f.t1_hat = y.t1;
    f.n2_hat = y.n2;
    f.t2_hat = y.t2;
    const auto r1 = frame_rates(f, w, 1);
    const auto r2 = frame_rates(f, w, 2);
    return {r1.d, r1.n, r1.t, r2.n, r2.t, w.sigma1 * y.t1, w.sigma2 * y.t2};
}

FrameSet to_frames(const OdeState& y, const BraidFrequencies& w) {
    FrameSet f;
    f.d_hat = y.d;
    f.n1_hat = y.n1;
    f.t1_hat = y.t1;
    f.n2_hat = y.n2;
    f.t2_hat = y.t2;
    f.tA_hat = (w.sigma1 * y.t1 + w.sigma2 * y.t2) / 2.0;
    return f;
}

double max_rate(const BraidFrequencies& w) {
    double m = 0.0;
    for (int k = 0; k < 3; ++k) {
        m = std::max(m, std::abs(w.sigma1 * w.omega[0][k]));
        m = std::max(m, std::abs(w.sigma2 * w.omega[1][k]));
        m = std::max(m, std::abs(w.omega[2][k]));
    }
    return m;
}

}  // namespace

FrameTrajectory integrate_frames(const FrameSet& initial, const std::function<BraidFrequencies(double)>& freqs,
                                 double length, double step, const IntegrationOptions& opt) {
    if (!(step > 0.0) || !(length >= 0.0)) throw DomainError("integrate_frames: step and length must be positive");
    const BraidFrequencies w0 = freqs(0.0);
    const double wmax = max_rate(w0);
    if (wmax > 0.0 && step >= 0.01 / wmax) throw DomainError("integrate_frames: step too large for the rotation rates");

    OdeState y{initial.d_hat,
               initial.n1_hat,
               initial.t1_hat,
               initial.n2_hat,
               initial.t2_hat,
               opt.rA0 - 0.5 * opt.R * initial.d_hat,
               opt.rA0 + 0.5 * opt.R * initial.d_hat};

    FrameTrajectory out;
    const auto nsteps = static_cast<long>(std::ceil(length / step - 1e-12));
    const double h = nsteps > 0 ? length / nsteps : 0.0;
    auto record = [&](double s, const BraidFrequencies& w) {
        out.s.push_back(s);
        out.frames.push_back(to_frames(y, w));
        out.r1.push_back(y.r1);
        out.r2.push_back(y.r2);
        out.max_separation_drift = std::max(out.max_separation_drift, std::abs((y.r1 - y.r2).norm() - opt.R));
        out.max_orthonormality_defect = std::max(out.max_orthonormality_defect, out.frames.back().orthonormality_defect());
    };
    record(0.0, w0);
    for (long i = 0; i < nsteps; ++i) {
        const double s = i * h;
        const auto wa = freqs(s), wb = freqs(s + h / 2.0), wc = freqs(s + h);
        const OdeState k1 = rhs(y, wa);
        const OdeState k2 = rhs(y.axpy(h / 2.0, k1), wb);
        const OdeState k3 = rhs(y.axpy(h / 2.0, k2), wb);
        const OdeState k4 = rhs(y.axpy(h, k3), wc);
        y = {y.d + h / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d),
             y.n1 + h / 6.0 * (k1.n1 + 2.0 * k2.n1 + 2.0 * k3.n1 + k4.n1),
             y.t1 + h / 6.0 * (k1.t1 + 2.0 * k2.t1 + 2.0 * k3.t1 + k4.t1),
             y.n2 + h / 6.0 * (k1.n2 + 2.0 * k2.n2 + 2.0 * k3.n2 + k4.n2),
             y.t2 + h / 6.0 * (k1.t2 + 2.0 * k2.t2 + 2.0 * k3.t2 + k4.t2),
             y.r1 + h / 6.0 * (k1.r1 + 2.0 * k2.r1 + 2.0 * k3.r1 + k4.r1),
             y.r2 + h / 6.0 * (k1.r2 + 2.0 * k2.r2 + 2.0 * k3.r2 + k4.r2)};
        record(s + h, wc);
    }
    if (out.max_separation_drift > opt.drift_tolerance * opt.R)
        throw NonConvergence("integrate_frames: separation drift " + std::to_string(out.max_separation_drift) +
                             " exceeds tolerance");
    return out;
}

}  // namespace braid
