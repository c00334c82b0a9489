#pragma once

// Interaction energy of two helically charged rods with low-dielectric cores,
// to first order in the image charges: a direct term between the dressed
// helices and one image term per rod (the charge of a rod acting on its own
// images induced in the neighbour). Three levels of approximation:
//
//   Full       every azimuthal mode pair of the local expansion
//   Diagonal   only the mode pairs that survive averaging along a braid whose
//              helices advance at a common rate, geometry expanded to first
//              order in R omega_A3
//   SmallAngle closed single and double sums, first order in sin(eta)
//
// Units as in energy_nocore.hpp.

#include <array>
#include <string>
#include <vector>

#include "braid/charge_model.hpp"
#include "braid/energy_nocore.hpp"
#include "braid/geometry.hpp"
#include "braid/surface_response.hpp"

namespace braid {

enum class ApproxLevel { Full, Diagonal, SmallAngle };

std::string to_string(ApproxLevel level);
/// Accepts "full", "diagonal", "small_angle"; throws ValidationError otherwise.
ApproxLevel parse_approx_level(const std::string& s);

/// Response of the rod cores. Transparent cores (no dielectric contrast)
/// dress nothing and induce no images.
enum class CoreModel { Dielectric, Transparent };

/// Local: value at the helix phases of the state. Braid: average along a
/// regular braid, i.e. only the phase combinations that do not advance.
enum class Averaging { Local, Braid };

struct DielectricOptions {
    CoreModel core = CoreModel::Dielectric;
    Averaging averaging = Averaging::Braid;
    ResponseTruncation response{};
};

/**
 * @brief Energy per unit axial length split into its parts.
 *
 * Full and Diagonal: e_dir_0 is the dressed-helix term, e_dir_1 and e_dir_2
 * the tilt corrections of rods 1 and 2; e_imgN_parts[0..3] are the plain
 * image term, the two tilt corrections and the image-curvature term.
 *
 * SmallAngle: e_dir_0, e_dir_1, e_dir_2 hold the untilted, sin(eta) and
 * omega_A3 parts of the direct energy; e_imgN_parts[0..2] the untilted,
 * sin(eta) and omega_A3 parts of the image energy, [3] is zero.
 */
struct EnergyBreakdown {
    double e_dir_0 = 0.0;
    double e_dir_1 = 0.0;
    double e_dir_2 = 0.0;
    std::array<double, 4> e_img1_parts{};
    std::array<double, 4> e_img2_parts{};
    ApproxLevel approx_level = ApproxLevel::Full;

    double imag_residual = 0.0;         // largest |Im| among the parts before the real part was taken
    double validity_ratio = 0.0;        // max |xi_mu' - omega_xi| / |omega_xi|; diagonal needs << 1
    bool incomplete_omega_terms = false;  // omega_A3 parts present; they are not a complete first-order expansion

    double direct() const { return e_dir_0 + e_dir_1 + e_dir_2; }
    double image() const;
    double total() const { return direct() + image(); }
};

/// Spectra of the three direct parts; index (l, l') as in PhaseSpectrum.
struct DirectSpectra {
    PhaseSpectrum part[3];
};

/// Spectra of the four image parts of one rod. The image energy of rod mu
/// depends on xi_mu only: rod 1 fills at(q, 0), rod 2 fills at(0, q).
struct ImageSpectra {
    PhaseSpectrum part[4];
};

// ---- full -------------------------------------------------------------------

DirectSpectra e_dir_spectra(const BraidState& state, const ChargeModel& charge, const PhysicalParams& phys,
                            const Truncation& trunc, const DielectricOptions& opt = {});
ImageSpectra e_img_spectra(int rod, const BraidState& state, const ChargeModel& charge, const PhysicalParams& phys,
                           const Truncation& trunc, const DielectricOptions& opt = {});

/// Direct parts 0, 1, 2 at the state's phases, or braid-averaged (opt.averaging).
std::array<double, 3> e_dir_full(const BraidState& state, const ChargeModel& charge, const PhysicalParams& phys,
                                 const Truncation& trunc, const DielectricOptions& opt = {});
/// Image parts of rod `rod` (1 or 2).
std::array<double, 4> e_img_full(int rod, const BraidState& state, const ChargeModel& charge,
                                 const PhysicalParams& phys, const Truncation& trunc,
                                 const DielectricOptions& opt = {});

// ---- diagonal ---------------------------------------------------------------

/// Direct parts restricted to mode pairs (l, -l), with the rod tilts and
/// stretch factors expanded to first order in R omega_A3.
std::array<double, 3> e_dir_diagonal(const BraidState& state, const ChargeModel& charge, const PhysicalParams& phys,
                                     const Truncation& trunc, const DielectricOptions& opt = {});
/// Image parts restricted to source modes j' = -l (rod 1) or j' = -l' (rod 2).
std::array<double, 4> e_img_diagonal(int rod, const BraidState& state, const ChargeModel& charge,
                                     const PhysicalParams& phys, const Truncation& trunc,
                                     const DielectricOptions& opt = {});

/// max |xi_mu' - omega_xi| / |omega_xi|; infinite when omega_xi = 0 and the rates differ.
double diagonal_validity_ratio(const BraidState& state, double omega_xi);

// ---- small angle ------------------------------------------------------------

/// First order in sin(eta) and R omega_A3; n runs over |n| <= trunc.l_cap,
/// the inner image order over |n'| <= trunc.np_cap.
EnergyBreakdown e_small_angle(const BraidState& state, const ChargeModel& charge, const PhysicalParams& phys,
                              const Truncation& trunc);

struct OmegaTilde {
    double value = 0.0;          // sum with 1/K_j'^2 weights
    double primed_form = 0.0;    // sum written with the ratio I_j'/K_j' and its derivative
    double residual = 0.0;       // |value - primed_form| / max(|value|, tiny)
    double tail = 0.0;           // |last two terms| / |value|
    bool converged = false;      // tail below trunc.series_tol
};

/**
 * @brief Sum over j of K_{n+j+1}(x) K_{n+j}(x) times the image weight of
 * order j at y, |j| <= trunc.np_cap, in both algebraic forms.
 *
 * The terms grow like (y/x)^{2|j|}: the series converges only for y < x,
 * which rods with R > 2a always satisfy. Throws NonConvergence if the two
 * forms disagree by more than 1e-9.
 */
OmegaTilde omega_tilde_table(int n, double x, double y, const Truncation& trunc);

/// Both sides of the Bessel identity that removes the K' term from the tilt
/// correction of the image energy (orders n, n'; arguments a kappa, R kappa).
double identity_10_13_check(int n, int np, double a, double R, double kappa);

// ---- combined -----------------------------------------------------------------

EnergyBreakdown energy_breakdown(const BraidState& state, const ChargeModel& charge, const PhysicalParams& phys,
                                 const Truncation& trunc, ApproxLevel level, const DielectricOptions& opt = {});

}  // namespace braid
