#pragma once

// Azimuthal Fourier description of the charge carried on each rod surface.
// Coefficients follow zeta_n = int_0^{2pi} sigma_rad(t) e^{int} dt, so one
// helical line gives zeta_n = 1 and a uniform layer of unit weight gives
// zeta_0 = 1.

#include <functional>
#include <map>
#include <vector>

namespace braid {

struct DnaParams {
    double theta = 0.0;  // fraction of phosphate charge neutralised
    double f1 = 0.0;     // fraction of counterions on the minor-groove line
    double f2 = 0.0;     // fraction on the major-groove line
    double phi_s = 0.0;  // half azimuthal separation of the two phosphate strands

    /// Throws ValidationError unless 0 <= theta <= 1, f1, f2 >= 0 and f1 + f2 <= 1.
    void validate() const;
};

/// Point (line) charge on the rod circumference at angle `at` relative to the helix phase.
struct AngularDelta {
    double weight;
    double at;
};

/// Smooth angular density plus a list of line charges.
struct RadialDistribution {
    std::function<double(double)> smooth;  // may be empty
    std::vector<AngularDelta> lines;
};

class ChargeModel {
public:
    enum class Kind { SingleHelix, Dna, Table };

    ChargeModel() = default;

    double zeta(int n) const;
    int n_max() const { return n_max_; }
    Kind kind() const { return kind_; }
    double line_density_scale() const { return line_density_scale_; }
    /// Upper bound on |zeta_n| used for truncation estimates.
    double bound() const;
    /// Coefficients for |n| <= n_max, keyed by n.
    std::map<int, double> table() const;

    static ChargeModel single_helix(int n_max = 64);
    static ChargeModel dna(const DnaParams& p, int n_max = 64);
    /// Explicit table; zeta(n) is zero outside the supplied range.
    static ChargeModel from_table(const std::map<int, double>& zeta);

    const DnaParams& dna_params() const { return dna_; }

private:
    Kind kind_ = Kind::SingleHelix;
    int n_max_ = 64;
    double line_density_scale_ = 1.0;
    DnaParams dna_{};
    std::map<int, double> table_;
};

/// Closed-form coefficient of the four-line DNA-like distribution.
double dna_coefficients(const DnaParams& p, int n);

/// Fourier coefficients of a radial distribution; line charges enter analytically,
/// the smooth part by periodic trapezoidal quadrature refined until converged.
ChargeModel coefficients_from_radial(const RadialDistribution& dist, int n_max, double tol = 1e-13);

/// The DNA-like distribution written as lines plus a smeared layer.
RadialDistribution dna_distribution(const DnaParams& p);

}  // namespace braid
