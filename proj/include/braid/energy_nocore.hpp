#pragma once

// Interaction energy of two helical line charges on rods without dielectric
// cores: a six-fold sum over Bessel products, one term per combination of
// azimuthal and helical mode indices.
//
// Units: lengths in any unit consistent with kappa_D; energies per unit axial
// length in multiples of e^2 / (eps_w l_c^2) (times PhysicalParams::prefactor).

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "braid/charge_model.hpp"
#include "braid/geometry.hpp"

namespace braid {

struct PhysicalParams {
    double kappa_D = 1.0;    // inverse Debye length
    double prefactor = 1.0;  // multiplies every energy; 1 gives reduced units
    double omega_xi = 1.0;   // mean helix phase rate per unit axial length

    void validate() const;
};

/// Index caps and series tolerance for the mode sums.
struct Truncation {
    int n_cap = 8;   // |n|, |n'|
    int m_cap = 6;   // |m|, |m'|
    int j_cap = 6;   // |j|, |j'|
    int l_cap = 8;   // image-mode and source-mode indices of the image sums
    int np_cap = 12; // inner |n'| of the untilted image self-energy
    double series_tol = 1e-12;

    void validate() const;
};

struct ModeIndex {
    int n = 0, np = 0, m = 0, mp = 0, j = 0, jp = 0;
};

struct ModeWavenumber {
    double k = 0.0;
    double kappa = 0.0;  // sqrt(k^2 + kappa_D^2)
};

/// Coefficients c(l, l') of a density written as Re sum c exp(i(l xi1 + l' xi2)).
struct PhaseSpectrum {
    int lmax = 0;
    std::vector<std::complex<double>> c;  // (2 lmax + 1)^2, row index l + lmax

    PhaseSpectrum() = default;
    explicit PhaseSpectrum(int lm) : lmax(lm), c(static_cast<std::size_t>((2 * lm + 1) * (2 * lm + 1))) {}
    std::complex<double>& at(int l, int lp) { return c[static_cast<std::size_t>((l + lmax) * (2 * lmax + 1) + lp + lmax)]; }
    std::complex<double> at(int l, int lp) const {
        return c[static_cast<std::size_t>((l + lmax) * (2 * lmax + 1) + lp + lmax)];
    }
    /// Complex value at the given phases; the energy is its real part.
    std::complex<double> evaluate(double xi1, double xi2) const;
    /// Average along a braid whose phases advance at rates (r1, r2) from
    /// (xi1, xi2): only terms with l r1 + l' r2 = 0 survive.
    std::complex<double> phase_average(double r1, double r2, double xi1 = 0.0, double xi2 = 0.0) const;
};

struct EnergyDensity {
    double value = 0.0;
    double imag_residual = 0.0;       // |Im| of the complex sum before the real part is taken
    double truncation_estimate = 0.0; // sum of |terms| with some index on its cap
    std::size_t terms = 0;            // nonzero terms accumulated
};

/// Axial wavenumber of one term of the six-fold sum.
ModeWavenumber mode_wavenumber(const ModeIndex& idx, const BraidState& state, double kappa_D);

/// Phase spectrum of the no-core density; the helix phases of `state` are not used.
PhaseSpectrum spectrum_nocore(const BraidState& state, const PhysicalParams& phys, const Truncation& trunc,
                              const ChargeModel* charge = nullptr, EnergyDensity* diagnostics = nullptr);

/// Density averaged over the helix phase along a regular braid (constant phase rates).
double mean_density_nocore(const BraidState& state, const PhysicalParams& phys, const Truncation& trunc,
                           const ChargeModel* charge = nullptr);

/**
 * @brief Energy per unit axial length at one station.
 *
 * Indices run n, n', m, m', j, j' with j' innermost; accumulation is
 * compensated so the result is bit-reproducible. With a charge model the
 * term carrying phase exp(i(l xi1 + l' xi2)) is weighted by zeta_l zeta_l'.
 */
EnergyDensity energy_density_nocore(const BraidState& state, const PhysicalParams& phys, const Truncation& trunc,
                                    const ChargeModel* charge = nullptr);

struct TotalEnergy {
    double value = 0.0;
    bool grid_warning = false;  // some adjacent densities differ by more than 10%
    std::vector<double> densities;
};

/// Trapezoidal integral of the density over axial stations `s` (ascending).
TotalEnergy total_energy_nocore(const std::vector<BraidState>& states, const std::vector<double>& s,
                                const PhysicalParams& phys, const Truncation& trunc,
                                const ChargeModel* charge = nullptr);

/// Trapezoidal integral of precomputed densities; shared by every energy model.
TotalEnergy integrate_densities(const std::vector<double>& densities, const std::vector<double>& s);

}  // namespace braid
