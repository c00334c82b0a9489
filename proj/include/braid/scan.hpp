#pragma once

// Parameter sweeps, minimisation of the total energy over a few geometric
// parameters, and the files a run leaves behind.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "braid/config.hpp"
#include "braid/energy_dielectric.hpp"

namespace braid {

struct SweepPoint {
    double value = 0.0;  // swept parameter
    EnergyBreakdown energy;
};

struct RunRecord {
    std::string config_hash;
    std::string timestamp;  // UTC, ISO 8601; metadata only, never in the CSV
    ScanParam param = ScanParam::Eta;
    std::vector<SweepPoint> points;
};

/// Evaluate the configured approximation at every sweep point. Points run on a
/// worker pool; the record lists them in sweep order. A failing point rethrows
/// its exception with the point index and value prefixed.
RunRecord run_sweep(const RunConfig& cfg);

/// Energy at one point; shared by sweeps, minimisation and the CLI.
EnergyBreakdown evaluate_point(const RunConfig& cfg, std::optional<std::pair<ScanParam, double>> override = {});

/// Fixed header and column order; numbers with 17 significant digits.
std::string sweep_csv(const RunRecord& rec);
/// Gnuplot data: one two-column block per energy component, blocks separated by two blank lines.
std::string sweep_plot_data(const RunRecord& rec);
std::string sweep_metadata(const RunRecord& rec, const RunConfig& cfg);

/// Writes config copy, CSV, plot data and metadata into a fresh directory under
/// cfg.output_dir; returns its path.
std::string write_run(const RunRecord& rec, const RunConfig& cfg);

std::string format_number(double x);  // 17 significant digits, shortest exact form

// ---- minimisation -------------------------------------------------------------

struct MinimizeResult {
    std::vector<ScanParam> params;
    std::vector<double> argmin;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;
    bool flat = false;     // every evaluated value equal to within the flatness tolerance
    double spread = 0.0;   // max - min over all evaluated values
    struct Step {
        std::vector<double> x;
        double value;
    };
    std::vector<Step> trace;  // best point after each iteration
};

/**
 * @brief Minimises the total energy over 1 to 3 of {eta, R, xi_phase}.
 *
 * One parameter: golden-section search. More: Nelder-Mead in coordinates
 * scaled to the bounds, points clamped into the box. Starts at the midpoint
 * of the bounds. Stops when the interval or simplex diameter falls below
 * cfg.minimize.tol of the bounds span, or after cfg.minimize.max_iter
 * iterations (converged = false, best point so far returned).
 */
MinimizeResult minimize(const RunConfig& cfg, const std::vector<ScanParam>& free_params);

/// Same search on an arbitrary objective over a box; used by minimize().
MinimizeResult minimize_box(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<Bounds>& box, int max_iter, double tol);

/// Bounds from the config, or defaults inside the validity domain.
Bounds default_bounds(const RunConfig& cfg, ScanParam p);

// ---- figure and identity reports ------------------------------------------------

struct Fig1Data {
    double a_kappa = 2.0;
    std::vector<double> a_kz;
    std::vector<std::vector<double>> curves;  // curves[l][i], l = 0..3
};

/// Self-dressing factor against a k_z for orders 0..3 at rod radius a = 1.
Fig1Data fig1_curves(double a_kappa, double range = 10.0, int points = 401);
std::string fig1_csv(const Fig1Data& d);

struct IdentityResult {
    std::string name;
    int draws = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass() const { return max_residual < tolerance; }
};

/// Random-draw identity suites (fixed seed): addition formulas, Jacobi-Anger,
/// Wronskians and recurrences, the K'-elimination identity, the two forms of
/// the image-tilt sum.
std::vector<IdentityResult> run_identity_suite(unsigned seed = 20240611u);

}  // namespace braid
