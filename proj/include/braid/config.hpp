#pragma once

// Run configuration: a line-oriented `key = value` file with dotted section
// prefixes. '#' starts a comment at the beginning of a line or after
// whitespace. Angles are in radians.
//
//   physical.kappa_D      geometry.R            charge.model = single_helix | dna | table
//   physical.prefactor    geometry.a            charge.theta, charge.f1, charge.f2, charge.phi_s
//   physical.omega_xi     geometry.eta          charge.zeta.<n>   (table entries, any integer n)
//                         geometry.omega_A3     charge.n_max
//   sweep.param           geometry.omega_A2
//   sweep.min             geometry.xi1          model.approx_level = full | diagonal | small_angle
//   sweep.max             geometry.xi2          model.core = dielectric | transparent
//   sweep.count           geometry.dxi1_ds      model.averaging = braid | local
//                         geometry.dxi2_ds
//   truncation.n_cap, m_cap, j_cap, l_cap, np_cap, series_tol
//   minimize.<eta|R|xi_phase> = lo, hi        minimize.max_iter    minimize.tol
//   oracle.length, oracle.ds                  output.dir           output.threads

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "braid/charge_model.hpp"
#include "braid/energy_dielectric.hpp"
#include "braid/energy_nocore.hpp"
#include "braid/geometry.hpp"
#include "braid/oracle.hpp"

namespace braid {

/// Parameters a sweep or a minimisation may vary. xi_phase is xi1 - xi2.
enum class ScanParam { Eta, R, KappaD, OmegaA3, XiPhase };

std::string to_string(ScanParam p);
ScanParam parse_scan_param(const std::string& s);

struct GeometrySpec {
    double R = 3.0;
    double a = 1.0;
    double eta = 0.0;
    double omega_A3 = 0.0;
    double omega_A2 = 0.0;
    double xi1 = 0.0;
    double xi2 = 0.0;
    std::optional<double> dxi1_ds;  // default: physical.omega_xi
    std::optional<double> dxi2_ds;
};

struct ChargeSpec {
    ChargeModel::Kind kind = ChargeModel::Kind::SingleHelix;
    DnaParams dna{};
    std::map<int, double> table;
    int n_max = 64;

    ChargeModel build() const;
};

struct SweepAxis {
    ScanParam param = ScanParam::Eta;
    double min = 0.0;
    double max = 0.0;
    int count = 1;
    bool given = false;  // false: one point at the template values

    std::vector<double> values(double template_value) const;
};

struct Bounds {
    double lo = 0.0, hi = 0.0;
};

struct MinimizeSpec {
    std::map<ScanParam, Bounds> bounds;
    int max_iter = 500;
    double tol = 1e-6;  // simplex diameter / interval length relative to the bounds span
};

struct RunConfig {
    PhysicalParams physical{};
    GeometrySpec geometry{};
    ChargeSpec charge{};
    SweepAxis sweep{};
    ApproxLevel approx_level = ApproxLevel::Diagonal;
    DielectricOptions dielectric{};
    Truncation truncation{};
    MinimizeSpec minimize{};
    OracleSampling oracle{};
    std::string output_dir = "runs";
    int threads = 0;  // 0 = hardware concurrency

    std::string source;  // text the config was parsed from
    std::string canonical() const;  // sorted key = value lines of every setting
    std::string hash() const;       // 16 hex digits of a hash of canonical()

    /// State and physical parameters with one parameter overridden.
    std::pair<BraidState, PhysicalParams> point(std::optional<std::pair<ScanParam, double>> override = {}) const;
    double template_value(ScanParam p) const;

    /// Throws ValidationError naming the violated condition, for the template
    /// point and every sweep point.
    void validate() const;
};

/// Parse a config from text; `origin` labels diagnostics. Unknown keys,
/// duplicate keys and malformed values raise ValidationError with the line number.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

/// Comma-separated pair "lo, hi".
Bounds parse_bounds(const std::string& value);

}  // namespace braid
