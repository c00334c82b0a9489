#pragma once

// Integer-order Bessel functions J_n, I_n, K_n of real argument, their
// derivatives, and residual checks for the series identities used by the
// mode sums.

#include <complex>
#include <vector>

namespace braid::sf {

/// Largest |n| accepted by the single-order entry points.
inline constexpr int kMaxOrder = 64;

/// Series truncation control for the identity checks.
struct SeriesTolerance {
    double abs_tol = 1e-12;
    int max_terms = 40;
};

double bessel_j(int n, double x);
double bessel_i(int n, double x);
double bessel_k(int n, double x);

double bessel_jp(int n, double x);
double bessel_ip(int n, double x);
double bessel_kp(int n, double x);
double bessel_ipp(int n, double x);
double bessel_kpp(int n, double x);

/**
 * @brief Values f_0..f_N of one Bessel family at a fixed argument, with
 * negative orders served through the reflection rules.
 */
class OrderTable {
public:
    enum class Kind { J, I, K };

    OrderTable() = default;
    /// scaled: I and K tabulated as e^{-x} I_n and e^{x} K_n (derivatives scaled alike),
    /// so products of one I-type and one K-type factor stay finite for large x.
    OrderTable(Kind kind, int nmax, double x, bool scaled = false);

    double operator()(int n) const;
    /// d/dx f_n(x) via the two-neighbour recurrences.
    double deriv(int n) const;
    /// Second derivative from the Bessel equation.
    double deriv2(int n) const;

    int nmax() const { return nmax_; }
    double x() const { return x_; }
    Kind kind() const { return kind_; }

private:
    Kind kind_ = Kind::I;
    int nmax_ = -1;
    double x_ = 0.0;
    std::vector<double> v_;
};

/// J_0..J_nmax(x), any real x.
std::vector<double> bessel_j_seq(int nmax, double x);
/// I_0..I_nmax(x), x >= 0.
std::vector<double> bessel_i_seq(int nmax, double x);
/// K_0..K_nmax(x), x > 0.
std::vector<double> bessel_k_seq(int nmax, double x);
/// e^{-x} I_n(x), any x >= 0.
std::vector<double> bessel_i_seq_scaled(int nmax, double x);
/// e^{x} K_n(x), x > 0.
std::vector<double> bessel_k_seq_scaled(int nmax, double x);

// ---- identity residuals ----------------------------------------------------

/**
 * @brief Addition formula for a helix displaced off a tilted axis.
 *
 * Compares J_m(aK R_H) e^{-i m xi~} with
 * sum_n J_{m-n}(aK(1-cos eta)/2) J_n(aK(1+cos eta)/2) e^{-2inxi} e^{imxi},
 * and the modified-Bessel continuation with I in place of J. Returns the
 * larger of the absolute J residual and the relative I residual.
 * Throws NonConvergence if the residual exceeds tol.abs_tol at max_terms.
 */
double graf_addition_check(double aK, double eta2, double xi2, int m, const SeriesTolerance& tol);

/// Same identity without the convergence throw; |n| <= nterms.
double graf_addition_residual(double aK, double eta, double xi, int m, int nterms);

/// Rod-1 orientation of the I-form: I_n(aK R_H) e^{+in xi~} expanded with e^{2imxi} e^{-inxi}.
double graf_addition_residual_rod1(double aK, double eta, double xi, int n, int nterms);

/// |e^{-i z sin t} - sum_{|j|<=J} J_j(z) e^{-ijt}|
double jacobi_anger_residual(double z, double t, int J);

/// max of |I_n' K_n - I_n K_n' - 1/x| * x and the two recurrence residuals (relative).
double wronskian_recurrence_residual(int n, double x);

/// Running Wronskian I_n(x) K_{n+1}(x) + I_{n+1}(x) K_n(x) = 1/x, relative residual.
double cross_wronskian_residual(int n, double x);

}  // namespace braid::sf
