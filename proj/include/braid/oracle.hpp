#pragma once

// Brute-force check of the no-core mode sum: both helices are sampled in real
// space on an ideal straight braid and the screened Coulomb energy is summed
// pair by pair.

#include <utility>
#include <vector>

#include "braid/energy_nocore.hpp"
#include "braid/geometry.hpp"

namespace braid {

struct DiscretizedHelix {
    std::vector<Vec3> points;
    std::vector<Vec3> offsets;  // a * helix vector: sample minus its centreline point
    std::vector<double> s;      // axial parameter of each sample
    double weight = 0.0;        // charge per sample: sigma_mu * ds in units of e / l_c
    double R = 0.0;             // centreline separation
    double precession = 0.0;    // rotation rate of the inter-axial vector about z
};

/**
 * @brief Samples both helices of a straight braid with constant tilt and
 * helix phase rates taken from `state`; the inter-axial vector precesses at
 * the closure rate omegaA[0].
 *
 * Throws ValidationError if ds > 0.02 / kappa_D.
 */
std::pair<DiscretizedHelix, DiscretizedHelix> discretize_braid(const BraidState& state, double length, double ds,
                                                               double kappa_D);

/// Centreline separation used for each pair of samples.
enum class ChordModel {
    Exact,  // true positions on the curved braid
    Local,  // -R d(mid) + (s1 - s2) z: the straight-chord separation the mode sum is built on
};

struct YukawaOptions {
    double edge = 8.0;     // discarded from each end, in Debye lengths
    double cutoff = 40.0;  // pairs further apart are skipped, in Debye lengths
    int threads = 0;       // 0 = hardware concurrency
    ChordModel chord = ChordModel::Exact;
};

/// Interaction energy per unit axial length, reduced units: pair sums of the
/// central samples averaged with a Gaussian weight over the central span.
double yukawa_energy(const DiscretizedHelix& h1, const DiscretizedHelix& h2, double kappa_D,
                     const YukawaOptions& opt = {});

struct OracleReport {
    double mode_sum = 0.0;
    double brute_force = 0.0;         // true braid geometry
    double relative_deviation = 0.0;  // mode sum against brute_force
    double local_chord = 0.0;         // pair sum with the straight-chord separation
    double local_deviation = 0.0;     // mode sum against local_chord
};

struct OracleSampling {
    double length = 60.0;  // Debye lengths
    double ds = 0.01;      // Debye lengths
};

/// Mode-sum density against the point-pair sums for one constant state. The
/// exact-geometry sum also sees the bending of the centrelines, which the mode
/// sum drops; the local-chord sum isolates the mode-sum arithmetic.
OracleReport compare_with_oracle(const BraidState& state, const PhysicalParams& phys, const Truncation& trunc,
                                 const OracleSampling& sampling = {}, const YukawaOptions& opt = {});

}  // namespace braid
