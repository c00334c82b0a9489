#pragma once

// Bessel tables shared by every term of a mode sum that has the same axial
// wavenumber. Internal to the library.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <unordered_map>

#include "braid/special_functions.hpp"

namespace braid::detail {

/// Per-rod trigonometry entering the tube-offset arguments.
struct TubeGeometry {
    double a = 0.0;
    double R = 1.0;
    double kappa_D = 1.0;
    double s1 = 0.0, s2 = 0.0;  // sines multiplying the axial wavenumber in the J arguments
    double c1 = 1.0, c2 = 1.0;  // cosines splitting the tube radius into the two I arguments
};

/// Tables at one axial wavenumber k.
struct WaveTables {
    double k = 0.0;
    double kappa = 0.0;
    sf::OrderTable lo1, hi1, lo2, hi2;  // I at a kappa (1 -+ c_mu) / 2
    sf::OrderTable kr;                  // K at R kappa
    sf::OrderTable j1, j2;              // J at a k s_mu

    WaveTables() = default;
    WaveTables(double kz, const TubeGeometry& g, int i_order, int k_order, int j_order) : k(kz) {
        using sf::OrderTable;
        kappa = std::sqrt(kz * kz + g.kappa_D * g.kappa_D);
        const double x = g.a * kappa;
        lo1 = OrderTable(OrderTable::Kind::I, i_order, 0.5 * x * (1.0 - g.c1));
        hi1 = OrderTable(OrderTable::Kind::I, i_order, 0.5 * x * (1.0 + g.c1));
        lo2 = OrderTable(OrderTable::Kind::I, i_order, 0.5 * x * (1.0 - g.c2));
        hi2 = OrderTable(OrderTable::Kind::I, i_order, 0.5 * x * (1.0 + g.c2));
        kr = OrderTable(OrderTable::Kind::K, k_order, g.R * kappa);
        j1 = OrderTable(OrderTable::Kind::J, j_order, g.a * kz * g.s1);
        j2 = OrderTable(OrderTable::Kind::J, j_order, g.a * kz * g.s2);
    }
};

/// Table store keyed on the exact bit pattern of k; flushed when it grows past `limit`.
class WaveTableStore {
public:
    WaveTableStore(const TubeGeometry& g, int i_order, int k_order, int j_order, std::size_t limit = 1u << 16)
        : g_(g), io_(i_order), ko_(k_order), jo_(j_order), limit_(limit) {}

    const WaveTables& get(double k) {
        if (k == 0.0) k = 0.0;  // fold -0 onto +0
        std::uint64_t key;
        static_assert(sizeof key == sizeof k);
        std::memcpy(&key, &k, sizeof key);
        auto it = map_.find(key);
        if (it != map_.end()) return it->second;
        if (map_.size() >= limit_) map_.clear();
        return map_.emplace(key, WaveTables(k, g_, io_, ko_, jo_)).first->second;
    }

private:
    TubeGeometry g_;
    int io_, ko_, jo_;
    std::size_t limit_;
    std::unordered_map<std::uint64_t, WaveTables> map_;
};

inline double parity(int n) { return (n & 1) ? -1.0 : 1.0; }

}  // namespace braid::detail
