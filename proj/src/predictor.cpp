#include "sde_weak_lab/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdelab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

FamilySpec family_spec_for_preset(const std::string& preset_name) {
    const SchemePresetInfo& info = scheme_preset_info(preset_name);
    return FamilySpec{info.family, info.alpha, info.power, info.theta};
}

MapExponents family_exponents(const FamilySpec& spec, double s) {
    if (!(s >= 0.0 && s <= 1.0))
        throw std::invalid_argument("family_exponents: varsigma must be in [0,1]");
    MapExponents e;
    e.free.varsigma = s;
    e.free.alpha = spec.alpha;
    e.free.alpha1 = spec.alpha;
    switch (spec.family) {
        case MapFamily::identity:
            e.gamma1 = e.gamma2 = e.gamma3 = e.gamma4 = kInf;
            e.gamma2_moment = kInf;
            e.tau = kInf;
            e.l1 = 1.0;
            e.q0 = kInf;
            e.eta_q0 = 0.0;
            e.route = MomentRoute::defect_bound;
            break;
        case MapFamily::truncation: {
            const double eps = spec.alpha * s;
            e.gamma1 = e.gamma2 = e.gamma3 = e.gamma4 = spec.alpha;
            e.gamma2_moment = spec.alpha;
            e.tau = eps;
            e.l1 = 1.0 + s;
            e.q0 = eps;
            e.eta_q0 = 1.0 + s;
            e.free.epsilon_exp = eps;
            e.route = MomentRoute::defect_bound;
            break;
        }
        case MapFamily::balanced_tanh:
            e.gamma1 = e.gamma2 = e.gamma3 = e.gamma4 = spec.power;
            e.gamma2_moment = spec.power;
            e.tau = spec.power * (2.0 - 2.0 * s);
            e.l1 = 3.0 - 2.0 * s;
            e.q0 = spec.power * (2.0 - 2.0 * s);
            e.eta_q0 = 3.0 - 2.0 * s;
            e.route = MomentRoute::defect_bound;
            break;
        case MapFamily::tamed:
            e.gamma1 = e.gamma2 = e.gamma3 = e.gamma4 = spec.power;
            e.gamma2_moment = spec.power;
            e.tau = spec.power * s;
            e.l1 = 1.0 + s;
            e.q0 = spec.power * s;
            e.eta_q0 = 1.0 + s;
            e.route = MomentRoute::defect_bound;
            break;
        case MapFamily::modified:
            e.gamma1 = e.gamma2 = e.gamma3 = e.gamma4 = spec.power;
            e.gamma2_moment = spec.power;
            e.tau = spec.power * s;
            e.l1 = 1.0 + s;
            e.q0 = spec.power * s;
            e.eta_q0 = 1.0 + s;
            e.route = MomentRoute::one_sided;
            break;
        case MapFamily::fully_tamed:
            e.gamma1 = spec.alpha;
            e.gamma2 = spec.alpha;
            e.gamma2_moment = 0.5 * spec.alpha;
            e.gamma3 = e.gamma4 = spec.alpha;
            e.tau = spec.alpha * s;
            e.l1 = 1.0 + s;
            e.q0 = spec.alpha * s;
            e.eta_q0 = 1.0 + s;
            e.route = MomentRoute::one_sided;
            break;
    }
    return e;
}

MomentCaps moment_caps(SchemeKind kind, const MapExponents& e, double r,
                       double p0_prime, double eps_slack,
                       std::optional<double> p_T) {
    const double budget = e.route == MomentRoute::one_sided
                              ? (p_T ? *p_T : p0_prime - eps_slack)
                              : p0_prime - eps_slack;

    double G1 = 6.0 * r;
    if (e.route == MomentRoute::defect_bound) {
        const double num = (2.0 * r + 1.0) * e.l1 - 1.0;
        if (e.tau > 0.0 && std::isfinite(e.tau)) {
            G1 = std::max(G1, num / e.tau);
        } else if (!std::isfinite(e.tau)) {
            // identity: the defect vanishes, no extra constraint
        } else if (num > 0.0) {
            G1 = kInf;
        }
    }

    auto quotient = [&](double denom_coeff) {
        if (G1 == 0.0) return budget;
        if (!std::isfinite(denom_coeff) || !std::isfinite(G1)) return 0.0;
        return (budget - G1) / (1.0 + denom_coeff * G1);
    };

    MomentCaps caps;
    caps.G1 = G1;
    const double B1 = std::min(quotient(e.gamma1), quotient(0.5 + e.gamma2_moment));
    const double g1 = e.gamma1, g2 = e.gamma2_moment, g3 = e.gamma3, g4 = e.gamma4;
    if (is_second_order(kind)) {
        caps.B = std::min({B1, quotient(g3 - 0.5), quotient(g4 - 1.0)});
        caps.beta = [G1, g1, g2, g3, g4](double p) {
            const double b1 = std::min((p * g1 + 1.0), (1.0 + 0.5 * p + p * g2)) * G1 / p;
            const double t3 = (1.0 - 0.5 * p + p * g3) * G1 / p;
            const double t4 = (1.0 - p + p * g4) * G1 / p;
            return 1.0 + std::min({b1, t3, t4});
        };
    } else {
        caps.B = B1;
        caps.beta = [G1, g1, g2](double p) {
            return 1.0 + std::min((p * g1 + 1.0), (1.0 + 0.5 * p + p * g2)) * G1 / p;
        };
    }
    caps.feasible = caps.B > 0.0 && std::isfinite(caps.B);
    return caps;
}

RequiredMoment required_moment(SchemeKind kind, double q, double r, double kappa,
                               double eta_q0, double beta) {
    if (!(q >= 0.0)) throw std::invalid_argument("required_moment: q must be >= 0");
    RequiredMoment rm;
    if (is_second_order(kind)) {
        const double r1 = (4.0 * r + 1.0) * eta_q0;
        const double r2 = (2.0 * q + 1.0) * (6.0 * r + 1.0);
        rm.varkappa = std::max((2.0 * q + 2.0) * r1, r2);
    } else {
        rm.varkappa = (2.0 * q + 2.0) * (2.0 * r + 1.0) * std::max(1.0, eta_q0);
    }
    rm.threshold = std::max(2.0 * kappa, beta * kappa + rm.varkappa);
    return rm;
}

ProblemMeta problem_meta(const SdeProblem& pb) {
    return ProblemMeta{pb.growth_r, pb.p0_prime, pb.epsilon_slack, std::nullopt};
}

namespace {

// sup over the free parameter of the defect order q0.
double q0_sup(const FamilySpec& spec) {
    switch (spec.family) {
        case MapFamily::identity: return kInf;
        case MapFamily::truncation: return spec.alpha;  // eps = alpha * varsigma
        case MapFamily::balanced_tanh: return 2.0 * spec.power;
        case MapFamily::tamed:
        case MapFamily::modified: return spec.power;
        case MapFamily::fully_tamed: return spec.alpha;
    }
    return 0.0;
}

// Free parameter realizing q0(free) == q (clamped to [0,1]).
double free_for_q0(const FamilySpec& spec, double q) {
    double s = 1.0;
    switch (spec.family) {
        case MapFamily::identity: return 0.0;
        case MapFamily::truncation:
        case MapFamily::fully_tamed: s = q / spec.alpha; break;
        case MapFamily::balanced_tanh: s = 1.0 - q / (2.0 * spec.power); break;
        case MapFamily::tamed:
        case MapFamily::modified: s = q / spec.power; break;
    }
    return std::clamp(s, 0.0, 1.0);
}

}  // namespace

OrderPrediction predict_order(const ProblemMeta& meta, SchemeKind kind,
                              const FamilySpec& family, double kappa) {
    const double ceiling = is_second_order(kind) ? 2.0 : 1.0;
    OrderPrediction out;

    // The moment caps may use any admissible free parameter; take the one
    // minimizing G1 (the defect bounds hold for all of them simultaneously).
    double best_moment_s = 1.0;
    double best_G1 = kInf;
    double best_B = -kInf;
    constexpr int kMomentGrid = 400;
    for (int i = 0; i <= kMomentGrid; ++i) {
        const double s = static_cast<double>(i) / kMomentGrid;
        const MapExponents e = family_exponents(family, s);
        const MomentCaps caps =
            moment_caps(kind, e, meta.r, meta.p0_prime, meta.eps_slack, meta.p_T);
        if (caps.B > best_B || (caps.B == best_B && caps.G1 < best_G1)) {
            best_B = caps.B;
            best_G1 = caps.G1;
            best_moment_s = s;
        }
    }
    const MomentCaps caps = moment_caps(kind, family_exponents(family, best_moment_s),
                                        meta.r, meta.p0_prime, meta.eps_slack, meta.p_T);
    out.G1 = caps.G1;
    out.B = caps.B;
    out.chosen.varsigma_moment = best_moment_s;

    if (meta.p0_prime >= kEffectivelyInfiniteMoment) {
        // Unlimited moment budget: the ceiling is attainable whenever the
        // family's defect order reaches it.
        out.saturated = true;
        out.feasible = true;
        const double q = std::min(ceiling, q0_sup(family));
        out.q_raw = q;
        out.q_integer_note = std::round(q);
        const double s = free_for_q0(family, q);
        out.chosen.varsigma = s;
        const MapExponents e = family_exponents(family, s);
        out.chosen.epsilon_exp = e.free.epsilon_exp;
        const double beta_p = std::isfinite(caps.B) && caps.B >= 2.0 ? caps.B : 2.0;
        out.beta = caps.beta(std::max(2.0, beta_p));
        const RequiredMoment rm =
            required_moment(kind, q, meta.r, kappa, e.eta_q0, out.beta);
        out.varkappa = rm.varkappa;
        out.threshold = rm.threshold;
        return out;
    }

    const double B = caps.B;
    const double beta_at_B = caps.feasible ? caps.beta(std::max(2.0, B)) : kInf;
    out.beta = caps.feasible ? beta_at_B : 0.0;

    // Largest q (given eta at the rate-side free parameter) with
    // B >= max(2 kappa, beta kappa + varkappa(q)); varkappa is increasing
    // in q, so bisect.
    auto q_from_budget = [&](double eta) {
        const RequiredMoment at_zero = required_moment(kind, 0.0, meta.r, kappa, eta, beta_at_B);
        if (B < at_zero.threshold) return -1.0;
        double lo = 0.0, hi = ceiling;
        const RequiredMoment at_hi = required_moment(kind, hi, meta.r, kappa, eta, beta_at_B);
        if (B >= at_hi.threshold) return hi;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            const RequiredMoment rm = required_moment(kind, mid, meta.r, kappa, eta, beta_at_B);
            (B >= rm.threshold ? lo : hi) = mid;
        }
        return lo;
    };

    auto q_at = [&](double s) {
        const MapExponents e = family_exponents(family, s);
        const double q_budget = q_from_budget(e.eta_q0);
        if (q_budget < 0.0) return -1.0;
        return std::min({ceiling, e.q0, q_budget});
    };

    double best_s = 0.0, best_q = -1.0;
    double lo = 0.0, hi = 1.0;
    constexpr int kGrid = 800;
    for (int round = 0; round < 4; ++round) {
        double round_best_s = lo, round_best_q = -1.0;
        for (int i = 0; i <= kGrid; ++i) {
            const double s = lo + (hi - lo) * static_cast<double>(i) / kGrid;
            const double q = q_at(s);
            if (q > round_best_q) {
                round_best_q = q;
                round_best_s = s;
            }
        }
        if (round_best_q > best_q) {
            best_q = round_best_q;
            best_s = round_best_s;
        }
        const double span = (hi - lo) / kGrid;
        lo = std::max(0.0, round_best_s - 2.0 * span);
        hi = std::min(1.0, round_best_s + 2.0 * span);
    }

    if (!caps.feasible || best_q < 0.0) {
        out.feasible = false;
        out.q_raw = 0.0;
        out.q_integer_note = 0.0;
        out.chosen.varsigma = best_s < 0.0 ? 0.0 : best_s;
        const MapExponents e = family_exponents(family, out.chosen.varsigma);
        const RequiredMoment rm =
            required_moment(kind, 0.0, meta.r, kappa, e.eta_q0,
                            caps.feasible ? beta_at_B : 1.0);
        out.varkappa = rm.varkappa;
        out.threshold = rm.threshold;
        return out;
    }

    out.feasible = true;
    out.q_raw = best_q;
    out.q_integer_note = std::round(best_q);
    out.chosen.varsigma = best_s;
    const MapExponents e = family_exponents(family, best_s);
    out.chosen.epsilon_exp = e.free.epsilon_exp;
    const RequiredMoment rm =
        required_moment(kind, best_q, meta.r, kappa, e.eta_q0, beta_at_B);
    out.varkappa = rm.varkappa;
    out.threshold = rm.threshold;
    return out;
}

OrderPrediction predict_order_for_preset(const ProblemMeta& meta,
                                         const std::string& preset_name,
                                         double kappa) {
    const SchemePresetInfo& info = scheme_preset_info(preset_name);
    return predict_order(meta, info.kind, family_spec_for_preset(preset_name), kappa);
}

}  // namespace sdelab
