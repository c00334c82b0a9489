#pragma once

// Local kinematics of a two-rod braid: lab frames from Euler angles, rod arc
// length factors, rotation rates of the braid frames and the helix frames,
// and a fixed-step integrator for the frame equations.

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace braid {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Orientation of the braid axis (alpha, beta) and of the inter-axial vector about it (phi0).
struct EulerAngles {
    double alpha = 0.0;
    double beta = 0.0;
    double phi0 = 0.0;

    /// Reduces each angle to (-pi, pi]; throws DomainError on non-finite input.
    static EulerAngles make(double alpha, double beta, double phi0);
};

/// Tilt of each rod tangent against the braid axis tangent.
struct TiltPair {
    double eta1 = 0.0;
    double eta2 = 0.0;

    double total() const { return eta1 + eta2; }
    double difference() const { return eta1 - eta2; }
};

/// Braid frames {d, n_mu, t_mu} of both rods plus the axis tangent.
struct FrameSet {
    Vec3 d_hat = Vec3::UnitX();
    Vec3 t1_hat = Vec3::UnitZ();
    Vec3 t2_hat = Vec3::UnitZ();
    Vec3 tA_hat = Vec3::UnitZ();
    Vec3 n1_hat = Vec3::UnitY();
    Vec3 n2_hat = Vec3::UnitY();

    /// Largest deviation from unit norm, d.t_mu = 0 and n_mu = t_mu x d.
    double orthonormality_defect() const;
};

/// Rotation rates of the braid frames. omega[0] = rod 1, omega[1] = rod 2,
/// omega[2] = axis; each holds (w_1, w_2, w_3) about (t, d, n).
struct BraidFrequencies {
    std::array<std::array<double, 3>, 3> omega{};
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    const std::array<double, 3>& rod(int mu) const { return omega[mu - 1]; }
    double sigma(int mu) const { return mu == 1 ? sigma1 : sigma2; }
};

/**
 * @brief Local state of the braid at one axial station.
 *
 * omegaA[0] is slaved to eta and omegaA[2] through the closure relation and
 * is filled by make(). Helix phases are functions of axial arc length.
 */
struct BraidState {
    double R = 1.0;
    double a = 0.0;
    double eta = 0.0;
    double deta_ds = 0.0;
    std::array<double, 3> omegaA{};
    double domegaA3_ds = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
    double dxi1_ds = 0.0;
    double dxi2_ds = 0.0;

    /// Builds a state with omegaA[0] from the closure relation.
    static BraidState make(double R, double a, double eta, double omegaA3, double omegaA2 = 0.0);

    /// Throws ValidationError unless R > 2a, 0 <= eta < pi and |R w_A3 sin eta| <= 2.
    void validate() const;
};

/// T_beta * T_alpha * T_phi0.
Mat3 rotation_frame(const EulerAngles& angles);

/// (sigma1, sigma2) from the tilts; (1,1) for two untilted rods.
std::pair<double, double> sigma_from_tilts(const TiltPair& tilts);

/// Tilt difference eta1 - eta2 = asin(-R w_A3 sin(eta) / 2).
double delta_eta(double eta, double omegaA3, double R);

/// Precession rate of d about the axis tangent forced by the closure of the braid.
double omega_A1(double eta, double omegaA3, double R);

/// Individual tilts (eta +- delta_eta)/2.
TiltPair tilts_from_state(double eta, double omegaA3, double R);

/// Half-angle cosine C(x) used by the rod rate formulas.
double half_angle_c(double x);
/// Half-angle sine S(x); equals sin(delta_eta/2) for x = R w_A3 sin(eta).
double half_angle_s(double x);

/// Rod frame rates and arc length factors for a given axis state.
BraidFrequencies rod_frequencies(const BraidState& state);

/// Rotation rate of the helix frame about each rod tangent: w_mu1 + xi_mu'/sigma_mu.
std::pair<double, double> helix_frequencies(const BraidState& state, const BraidFrequencies& freqs);

/// Braid frames built from Euler angles and tilts.
FrameSet frame_set(const EulerAngles& angles, const TiltPair& tilts);

/// Unit vector from rod mu's centreline to its helix at phase xi.
Vec3 helix_vector(const EulerAngles& angles, const TiltPair& tilts, int mu, double xi);

/// d(frame vector)/ds for one rod's braid frame (d, n_mu, t_mu).
struct FrameDerivative {
    Vec3 d, n, t;
};
FrameDerivative frame_rates(const FrameSet& f, const BraidFrequencies& w, int mu);

struct FrameTrajectory {
    std::vector<double> s;
    std::vector<FrameSet> frames;
    std::vector<Vec3> r1;
    std::vector<Vec3> r2;
    double max_separation_drift = 0.0;   // max | |r1 - r2| - R |
    double max_orthonormality_defect = 0.0;
};

struct IntegrationOptions {
    double R = 1.0;
    Vec3 rA0 = Vec3::Zero();
    double drift_tolerance = 1e-6;  // relative to R
};

/**
 * @brief Integrates the braid frame equations and the centrelines with a
 * fixed-step classical Runge-Kutta scheme. No re-orthonormalisation.
 *
 * Throws DomainError if step >= 0.01/max|w|, NonConvergence if the
 * separation drift exceeds drift_tolerance * R.
 */
FrameTrajectory integrate_frames(const FrameSet& initial, const std::function<BraidFrequencies(double)>& freqs,
                                 double length, double step, const IntegrationOptions& opt);

}  // namespace braid
