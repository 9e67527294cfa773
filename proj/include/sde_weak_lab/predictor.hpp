#pragma once

#include <functional>
#include <optional>
#include <string>

#include "sde_weak_lab/maps.hpp"
#include "sde_weak_lab/schemes.hpp"

namespace sdelab {

/// Which approximation hypothesis backs the moment bounds: the defect bound
/// (growth cap exponents tau/l1), or the one-sided coupling of the drift and
/// diffusion blocks (fully tamed / companion-coupled modified maps), which
/// fixes G1 = 6r and draws its moment budget from p_T.
enum class MomentRoute { defect_bound, one_sided };

/// Exponent bundle of one map family at a concrete choice of the free
/// parameters; feeds the moment-cap and required-moment formulas.
struct MapExponents {
    double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0, gamma4 = 0.0;
    /// Effective cap exponent of T2 inside the moment bound; alpha_1/2 for
    /// the fully tamed family, gamma2 otherwise.
    double gamma2_moment = 0.0;
    double tau = 0.0, l1 = 1.0;
    double q0 = 0.0, eta_q0 = 0.0;
    struct Free {
        double varsigma = 0.0;     // in [0,1]
        double epsilon_exp = 0.0;  // truncation defect exponent (= alpha * varsigma)
        double alpha = 0.0;
        double alpha1 = 0.0;
    } free;
    MomentRoute route = MomentRoute::defect_bound;
};

/// Family description used by the predictor: the family plus its fixed
/// structural parameters (the free parameter is chosen by the optimizer).
struct FamilySpec {
    MapFamily family = MapFamily::identity;
    double alpha = 1.0;  // truncation / fully tamed exponent
    double power = 1.0;  // h-power of the tanh/tamed/modified denominators
    int theta = 1;
};

FamilySpec family_spec_for_preset(const std::string& preset_name);

/// Exponents of `spec` at free parameter varsigma in [0,1] (truncation uses
/// epsilon = alpha * varsigma).
MapExponents family_exponents(const FamilySpec& spec, double varsigma);

struct MomentCaps {
    double G1 = 0.0;
    double B = 0.0;                         // B1 for the first-order kinds, B2 otherwise
    std::function<double(double)> beta;     // beta(p), the initial-data amplification
    bool feasible = true;                   // false when the caps come out non-positive
};

/// Closed-form moment caps for the scheme kind at the given exponents.
/// p_T is consumed only on the one-sided route; it defaults to
/// p0_prime - eps_slack.
MomentCaps moment_caps(SchemeKind kind, const MapExponents& exps, double r,
                       double p0_prime, double eps_slack,
                       std::optional<double> p_T = std::nullopt);

struct RequiredMoment {
    double varkappa = 0.0;
    double threshold = 0.0;  // max(2 kappa, beta kappa + varkappa)
};

/// Moment order the convergence theorems require at weak order q:
///   first-order kinds   varkappa = (2q+2)(2r+1) max(1, eta)
///   second-order kinds  varkappa = max((2q+2)(4r+1) eta, (2q+1)(6r+1))
RequiredMoment required_moment(SchemeKind kind, double q, double r, double kappa,
                               double eta_q0, double beta);

struct ProblemMeta {
    double r = 0.0;
    double p0_prime = 0.0;
    double eps_slack = 0.0;
    std::optional<double> p_T;  // override for the one-sided route
};

ProblemMeta problem_meta(const SdeProblem& problem);

struct OrderPrediction {
    double G1 = 0.0;
    double B = 0.0;
    double beta = 1.0;
    double varkappa = 0.0;
    double threshold = 0.0;
    double q_raw = 0.0;
    double q_integer_note = 0.0;  // q rounded to the nearest integer
    struct Chosen {
        double varsigma = 0.0;         // rate-side free parameter
        double varsigma_moment = 0.0;  // free parameter minimizing G1
        double epsilon_exp = 0.0;      // truncation only
    } chosen;
    bool feasible = false;
    bool saturated = false;  // p0' treated as effectively infinite
};

/// Maximizes the guaranteed weak order q over the family's free parameters,
/// subject to q <= q0(free), q <= scheme ceiling (1 first order, 2 second
/// order) and B >= max(2 kappa, beta(B) kappa + varkappa(q, free)).
///
/// The defect bounds hold for every varsigma at once, so the moment caps are
/// taken at the G1-minimizing free parameter while the rate constraint picks
/// its own; both choices are reported. For p0' >= 1e5 the moment budget is
/// unlimited and q is the scheme ceiling capped by sup q0.
OrderPrediction predict_order(const ProblemMeta& meta, SchemeKind kind,
                              const FamilySpec& family, double kappa);

/// Convenience wrapper resolving one of the named scheme presets.
OrderPrediction predict_order_for_preset(const ProblemMeta& meta,
                                         const std::string& preset_name,
                                         double kappa);

}  // namespace sdelab
