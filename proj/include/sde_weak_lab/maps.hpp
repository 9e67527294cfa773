#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sde_weak_lab/model.hpp"

namespace sdelab {

/// Taming-map families. Each maps a coefficient block z (and step size h,
/// plus an optional companion magnitude w) to a damped block:
///   identity       z
///   truncation     z capped radially at norm h^-alpha (theta=0 zeroes
///                  the output beyond the cap instead)
///   balanced_tanh  h^-power tanh(h^power z), componentwise
///   tamed          z / (1 + h^power |z|)
///   fully_tamed    z / (1 + h^alpha |z| + h^alpha |w|)
///   modified       z / (1 + h^power |z| [+ h^power |w| when w is given])
enum class MapFamily {
    identity,
    truncation,
    balanced_tanh,
    tamed,
    fully_tamed,
    modified,
};

std::string to_string(MapFamily family);
MapFamily map_family_from_string(const std::string& name);

/// Exponents a configured map claims: the growth cap |T(z,h)| <= C h^-gamma,
/// the defect bounds |z - T(z,h)| <= c h^tau |z|^l1 and
/// |z - T(z,h)| <= c (1 + |z|^eta_q0) h^q0. They are derived from the family
/// closed forms at the declared varsigma.
struct DeclaredExponents {
    double gamma = 0.0;
    double tau = 0.0;
    double l1 = 1.0;
    double q0 = 0.0;
    double eta_q0 = 0.0;
    double varsigma = 0.5;
    double c_defect = 1.0;
};

struct TamingMap {
    MapFamily family = MapFamily::identity;
    double alpha = 1.0;   // truncation exponent; alpha_1 for fully_tamed
    double power = 1.0;   // h-exponent in the tanh/tamed/modified denominators
    int theta = 1;        // truncation behaviour beyond the cap: keep cap or zero
    DeclaredExponents declared;

    bool is_identity() const { return family == MapFamily::identity; }
    bool requires_companion() const { return family == MapFamily::fully_tamed; }
};

struct TamingMapParams {
    double alpha = 1.0;
    double power = 1.0;
    int theta = 1;
    double varsigma = 0.5;
};

/// Builds a map with `declared` filled from the family closed forms;
/// throws std::invalid_argument on out-of-range parameters.
TamingMap make_taming_map(MapFamily family, const TamingMapParams& params = {});

/// Evaluates T(z, h) (w is the companion magnitude |w|, needed by
/// fully_tamed and folded in by modified when present). h must be in (0,1).
Vec apply_map(const TamingMap& map, const Vec& z, double h,
              std::optional<double> w = std::nullopt);

/// In-place variant used by the steppers: out = T(z, h).
void apply_map_into(const TamingMap& map, const Vec& z, double h,
                    std::optional<double> w, Vec& out);

/// l2 norm of z - T(z, h).
double map_defect(const TamingMap& map, const Vec& z, double h,
                  std::optional<double> w = std::nullopt);

/// Result of randomized verification of the growth caps (H1)/(H3) and the
/// defect bounds against the declared exponents.
struct MapCheckReport {
    long long samples = 0;
    long long violations = 0;
    double max_violation = 0.0;  // worst relative excess over a bound; <= 0 is clean
    struct Witness {
        double h;
        double z_norm;
        double w;
        std::string bound;
        double excess;
    };
    std::vector<Witness> witnesses;  // first few violating samples
};

/// Samples (z, h) pairs (and companion magnitudes for the families that
/// take one) and verifies
///   |T(z,h)|   <= h^-gamma  and  |T(z,h)| <= |z|      (componentwise for
///                                                      balanced_tanh)
///   |z-T(z,h)| <= c h^tau |z|^l1
///   |z-T(z,h)| <= c (1+|z|^eta) h^q0
/// with the map's declared exponents. Findings are reported, not thrown.
MapCheckReport check_h1_h3(const TamingMap& map, long long sample_count,
                           const std::vector<double>& h_grid, double z_radius,
                           std::uint64_t seed, int dim = 1);

}  // namespace sdelab
