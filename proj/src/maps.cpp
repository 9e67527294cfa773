#include "sde_weak_lab/maps.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sde_weak_lab/random.hpp"

namespace sdelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Keeps the rescaled vector strictly inside the cap so truncation is
// idempotent in floating point.
constexpr double kTruncationSafety = 1.0 - 4.0 * std::numeric_limits<double>::epsilon();

// Odd by construction, independent of the libm implementation.
inline double odd_tanh(double y) { return std::copysign(std::tanh(std::fabs(y)), y); }

// The preset exponents are 1 or 2; keep those off the libm pow path.
inline double pow_fast(double h, double p) {
    if (p == 1.0) return h;
    if (p == 2.0) return h * h;
    return std::pow(h, p);
}

void check_h(double h) {
    if (!(h > 0.0 && h < 1.0))
        throw std::invalid_argument("taming map: step size must be in (0,1)");
}

}  // namespace

std::string to_string(MapFamily family) {
    switch (family) {
        case MapFamily::identity: return "identity";
        case MapFamily::truncation: return "truncation";
        case MapFamily::balanced_tanh: return "balanced";
        case MapFamily::tamed: return "tamed";
        case MapFamily::fully_tamed: return "fully_tamed";
        case MapFamily::modified: return "modified";
    }
    return "?";
}

MapFamily map_family_from_string(const std::string& name) {
    if (name == "identity") return MapFamily::identity;
    if (name == "truncation") return MapFamily::truncation;
    if (name == "balanced" || name == "balanced_tanh") return MapFamily::balanced_tanh;
    if (name == "tamed") return MapFamily::tamed;
    if (name == "fully_tamed") return MapFamily::fully_tamed;
    if (name == "modified") return MapFamily::modified;
    throw std::invalid_argument("unknown map family: " + name);
}

TamingMap make_taming_map(MapFamily family, const TamingMapParams& params) {
    if (!(params.varsigma >= 0.0 && params.varsigma <= 1.0))
        throw std::invalid_argument("taming map: varsigma must be in [0,1]");
    if (params.theta != 0 && params.theta != 1)
        throw std::invalid_argument("taming map: theta must be 0 or 1");

    TamingMap map;
    map.family = family;
    map.alpha = params.alpha;
    map.power = params.power;
    map.theta = params.theta;

    const double s = params.varsigma;
    DeclaredExponents& d = map.declared;
    d.varsigma = s;
    switch (family) {
        case MapFamily::identity:
            d.gamma = kInf;
            d.tau = kInf;
            d.l1 = 1.0;
            d.q0 = kInf;
            d.eta_q0 = 0.0;
            break;
        case MapFamily::truncation: {
            if (!(params.alpha > 0.0))
                throw std::invalid_argument("truncation map: alpha must be positive");
            // Defect exponent parametrised as eps = alpha * varsigma.
            const double eps = params.alpha * s;
            d.gamma = params.alpha;
            d.tau = eps;
            d.l1 = 1.0 + s;
            d.q0 = eps;
            d.eta_q0 = 1.0 + s;
            d.c_defect = 1.0 + params.theta;
            break;
        }
        case MapFamily::balanced_tanh:
            if (!(params.power > 0.0))
                throw std::invalid_argument("balanced map: power must be positive");
            d.gamma = params.power;
            d.tau = params.power * (2.0 - 2.0 * s);
            d.l1 = 3.0 - 2.0 * s;
            d.q0 = params.power * (2.0 - 2.0 * s);
            d.eta_q0 = 3.0 - 2.0 * s;
            break;
        case MapFamily::tamed:
        case MapFamily::modified:
            if (!(params.power > 0.0))
                throw std::invalid_argument("tamed/modified map: power must be positive");
            d.gamma = params.power;
            d.tau = params.power * s;
            d.l1 = 1.0 + s;
            d.q0 = params.power * s;
            d.eta_q0 = 1.0 + s;
            break;
        case MapFamily::fully_tamed:
            if (!(params.alpha > 0.0 && params.alpha <= 1.0))
                throw std::invalid_argument("fully tamed map: alpha_1 must be in (0,1]");
            d.gamma = params.alpha;
            d.tau = params.alpha * s;
            d.l1 = 1.0 + s;
            d.q0 = params.alpha * s;
            d.eta_q0 = 1.0 + s;
            break;
    }
    return map;
}

void apply_map_into(const TamingMap& map, const Vec& z, double h,
                    std::optional<double> w, Vec& out) {
    check_h(h);
    if (map.requires_companion() && !w)
        throw std::invalid_argument("fully tamed map needs the companion magnitude");

    switch (map.family) {
        case MapFamily::identity:
            out = z;
            return;
        case MapFamily::truncation: {
            const double cap = 1.0 / pow_fast(h, map.alpha);
            const double n = z.norm();
            if (n <= cap) {
                out = z;
            } else if (map.theta == 0) {
                out.setZero(z.size());
            } else {
                out = z * (cap / n * kTruncationSafety);
            }
            return;
        }
        case MapFamily::balanced_tanh: {
            const double hp = pow_fast(h, map.power);
            const double inv = 1.0 / hp;
            out.resize(z.size());
            for (Eigen::Index i = 0; i < z.size(); ++i)
                out[i] = inv * odd_tanh(hp * z[i]);
            return;
        }
        case MapFamily::tamed: {
            const double hp = pow_fast(h, map.power);
            out = z / (1.0 + hp * z.norm());
            return;
        }
        case MapFamily::fully_tamed: {
            const double hp = pow_fast(h, map.alpha);
            out = z / (1.0 + hp * (z.norm() + std::fabs(*w)));
            return;
        }
        case MapFamily::modified: {
            const double hp = pow_fast(h, map.power);
            const double companion = w ? std::fabs(*w) : 0.0;
            out = z / (1.0 + hp * (z.norm() + companion));
            return;
        }
    }
}

Vec apply_map(const TamingMap& map, const Vec& z, double h, std::optional<double> w) {
    Vec out;
    apply_map_into(map, z, h, w, out);
    return out;
}

double map_defect(const TamingMap& map, const Vec& z, double h, std::optional<double> w) {
    if (map.family == MapFamily::identity) {
        check_h(h);
        return 0.0;
    }
    Vec out;
    apply_map_into(map, z, h, w, out);
    return (z - out).norm();
}

namespace {

struct BoundCheck {
    const char* name;
    double lhs;
    double rhs;
};

void record(MapCheckReport& report, const BoundCheck& check, double h, double zn,
            double w) {
    // Relative excess; bounds with rhs = inf never fire.
    if (!(check.rhs < kInf)) return;
    const double tol = 1e-9;
    const double excess = check.rhs > 0.0
                              ? check.lhs / check.rhs - 1.0
                              : (check.lhs > 0.0 ? kInf : -1.0);
    if (excess > report.max_violation) report.max_violation = excess;
    if (excess > tol) {
        ++report.violations;
        if (report.witnesses.size() < 10)
            report.witnesses.push_back({h, zn, w, check.name, excess});
    }
}

}  // namespace

MapCheckReport check_h1_h3(const TamingMap& map, long long sample_count,
                           const std::vector<double>& h_grid, double z_radius,
                           std::uint64_t seed, int dim) {
    if (sample_count < 1)
        throw std::invalid_argument("check_h1_h3: sample_count must be >= 1");
    if (h_grid.empty())
        throw std::invalid_argument("check_h1_h3: empty step-size grid");
    for (double h : h_grid) check_h(h);

    MapCheckReport report;
    report.max_violation = -kInf;
    RandomStream rng(seed, /*trajectory=*/0, /*substream=*/7);
    const DeclaredExponents& d = map.declared;
    const bool takes_companion =
        map.family == MapFamily::fully_tamed || map.family == MapFamily::modified;

    Vec z(dim), tz(dim);
    const double log_lo = std::log(1e-4);
    const double log_hi = std::log(std::max(z_radius, 1e-3));
    for (long long i = 0; i < sample_count; ++i) {
        const double h = h_grid[static_cast<std::size_t>(i % h_grid.size())];
        for (int k = 0; k < dim; ++k) z[k] = rng.normal();
        const double dir_norm = z.norm();
        const double mag = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
        if (dir_norm > 0.0) z *= mag / dir_norm;
        std::optional<double> w;
        double w_mag = 0.0;
        if (takes_companion) {
            w_mag = std::exp(log_lo + (log_hi - log_lo) * rng.uniform());
            w = w_mag;
        }

        apply_map_into(map, z, h, w, tz);
        const double tn = tz.norm();
        const double zn = z.norm();
        ++report.samples;

        // Growth caps: componentwise for the balanced family, by norm
        // otherwise (constants C = 1).
        if (map.family == MapFamily::balanced_tanh) {
            const double cap = std::pow(h, -d.gamma);
            for (int k = 0; k < dim; ++k) {
                record(report, {"H1 cap (component)", std::fabs(tz[k]), cap}, h, zn, w_mag);
                record(report, {"H1 contractivity (component)", std::fabs(tz[k]),
                                std::fabs(z[k])},
                       h, zn, w_mag);
            }
        } else {
            record(report, {"H1 cap", tn, std::pow(h, -d.gamma)}, h, zn, w_mag);
            record(report, {"H1 contractivity", tn, zn}, h, zn, w_mag);
        }

        const double defect = (z - tz).norm();
        if (takes_companion && w_mag > 0.0) {
            // Companion forms of the defect bounds:
            //   |z - T| <= h^q0 |z| (|z|^s + |w|^s)
            //   |z - T| <= 2 (1 + |z|^eta + |w|^eta) h^q0
            const double s = d.varsigma;
            record(report,
                   {"H2 defect (companion)", defect,
                    std::pow(h, d.q0) * zn * (std::pow(zn, s) + std::pow(w_mag, s))},
                   h, zn, w_mag);
            record(report,
                   {"q0 defect (companion)", defect,
                    2.0 * (1.0 + std::pow(zn, d.eta_q0) + std::pow(w_mag, d.eta_q0)) *
                        std::pow(h, d.q0)},
                   h, zn, w_mag);
        } else {
            record(report,
                   {"H2 defect", defect,
                    d.c_defect * std::pow(h, d.tau) * std::pow(zn, d.l1)},
                   h, zn, w_mag);
            record(report,
                   {"q0 defect", defect,
                    d.c_defect * (1.0 + std::pow(zn, d.eta_q0)) * std::pow(h, d.q0)},
                   h, zn, w_mag);
        }
    }
    if (report.max_violation == -kInf) report.max_violation = 0.0;
    return report;
}

}  // namespace sdelab
