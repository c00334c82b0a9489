#pragma once

// Surface response of a low-dielectric rod core to helical charge modes.
//
// Leading order: a mode n on its own rod is dressed by the factor
// zeta_surf0 = 1 + zeta_img0. Next order: the charge on one rod polarises
// the other; zeta~(n, l, k) maps source mode l on the charged rod to image
// mode n on the neighbour, split into a part independent of the rod
// curvature (zeta10) and the coefficient of sin(eta) (zeta11).

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "braid/special_functions.hpp"

namespace braid {

struct ResponseTruncation {
    double abs_tol = 1e-12;  // ring stops once its |contribution| < abs_tol * accumulated |terms|
    int ring_cap = 40;       // largest max(|n'|, |m'|) ring before NonConvergence
};

struct ResponseParams {
    double a = 0.0;
    double R = 1.0;
    double kappa_D = 1.0;
    double eta = 0.0;  // total inter-rod tilt
    ResponseTruncation trunc{};

    /// Throws ValidationError unless a > 0, R > 2a, kappa_D > 0 and kappa_D R > 1.
    void validate() const;
    /// True in the marginal window 1 < kappa_D R < 2 where the image expansion is poor.
    bool weak_screening() const { return kappa_D * R < 2.0; }
};

// ---- leading order ----------------------------------------------------------

/// -K_n(x) I_n'(x) / (I_n(x) K_n'(x)), x = a sqrt(k^2 + kappa^2).
double zeta_img0(int n, double kz, double a, double kappa);
/// 1 + zeta_img0 = -1 / (x I_n(x) K_n'(x)).
double zeta_surf0(int n, double kz, double a, double kappa);
/// d zeta_surf0 / dk, analytic.
double dzeta_surf0_dk(int n, double kz, double a, double kappa);

/// Largest |d zeta_surf0/dk| over a k grid; a small value supports the
/// slowly-varying-response approximation used in the image terms.
double max_abs_dzeta_surf0(int n, const std::vector<double>& kgrid, double a, double kappa);

// ---- next order -------------------------------------------------------------

struct SurfaceCoefficients {
    double zeta10 = 0.0;
    double zeta11 = 0.0;
    double dzeta10 = 0.0;  // d/dk
    double dzeta11 = 0.0;
    int rings = 0;         // rings summed before the stopping rule fired
};

/**
 * @brief Bessel tables for one (rod, kz) pair, reusable across (n, l).
 */
class SurfaceKernel {
public:
    SurfaceKernel(int rod, double kz, const ResponseParams& p);

    /// Ring sum for image mode n and source mode l.
    SurfaceCoefficients eval(int n, int l) const;
    /// Ring sum visiting rings from `rings` down to 0.
    double eval_reversed(int n, int l, int rings) const;

private:
    struct Term {
        double v, dv;  // summand without the leading ratio, and its k-derivative
    };
    Term term(int n, int l, int np, int mp) const;

    int rod_;
    ResponseParams p_;
    double kz_, kappa_, dkappa_, x_;
    double cos_, sin_;
    int cap_;
    sf::OrderTable ilo_, ihi_, kr_, jz_;
    std::vector<double> z0_, dz0_;  // zeta_surf0(l, kz cos eta) and d/dk for |l| <= cap
    double zeta0(int l) const { return z0_[std::abs(l)]; }
    double dzeta0(int l) const { return dz0_[std::abs(l)]; }
};

/**
 * @brief Image coefficients on rod `rod` (1 or 2) for image mode n, source
 * mode l on the other rod, axial wavenumber kz.
 *
 * Truncated double sum over (n', m') in square rings about the origin.
 * Throws NonConvergence if the ring cap is reached first.
 */
SurfaceCoefficients zeta_surf1(int rod, int n, int l, double kz, const ResponseParams& p);

/// Same quantity summed in the reverse ring order (outermost first); a check on roundoff.
double zeta_surf1_reversed(int rod, int n, int l, double kz, const ResponseParams& p, int rings);

struct SmallAngleCoefficients {
    double zeta100 = 0.0;  // untilted limit of zeta10
    double zeta101 = 0.0;  // coefficient of sin(eta) in zeta10
    double zeta11 = 0.0;   // untilted limit of zeta11
};

/// First-order expansion of zeta_surf1 in sin(eta).
SmallAngleCoefficients zeta_surf1_small_angle(int rod, int n, int l, double kz, const ResponseParams& p);

// ---- caching ----------------------------------------------------------------

/**
 * @brief Memo table for zeta_surf1 keyed on (rod, n, l, quantised kz, params).
 *
 * Lookups take a shared lock; an insert that loses a race is discarded.
 */
class ResponseCache {
public:
    explicit ResponseCache(double k_quantum = 1e-13) : quantum_(k_quantum) {}

    SurfaceCoefficients get(int rod, int n, int l, double kz, const ResponseParams& p);
    std::size_t size() const;
    std::size_t hits() const { return hits_.load(); }
    void clear();

private:
    struct Key {
        int rod, n, l;
        std::int64_t kq;
        std::uint64_t ph;
        bool operator==(const Key&) const = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const;
    };

    double quantum_;
    mutable std::shared_mutex mu_;
    std::unordered_map<Key, SurfaceCoefficients, KeyHash> map_;
    std::atomic<std::size_t> hits_{0};
};

/// Hash of the parameters that change zeta_surf1 values.
std::uint64_t response_params_hash(const ResponseParams& p);

}  // namespace braid
