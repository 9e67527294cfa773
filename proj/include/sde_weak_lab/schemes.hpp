#pragma once

#include <array>
#include <string>
#include <vector>

#include "sde_weak_lab/maps.hpp"
#include "sde_weak_lab/model.hpp"
#include "sde_weak_lab/stochastic.hpp"

namespace sdelab {

/// euler_maruyama / milstein_talay are the untamed baselines; the modified
/// kinds apply the configured taming maps to each coefficient block. With
/// identity maps the modified kinds reduce to their baselines exactly (they
/// share one code path).
enum class SchemeKind { euler_maruyama, milstein_talay, modified_euler, modified_mt };

std::string to_string(SchemeKind kind);
bool is_second_order(SchemeKind kind);

struct SchemeConfig {
    SchemeKind kind = SchemeKind::euler_maruyama;
    /// Map slots T1..T6 for the blocks f, g^r, Lambda g, L g, Lambda f - L g,
    /// L f. The first-order kinds use only T1 and T2.
    std::array<TamingMap, 6> maps{};
    /// When set, T1 receives |g(x)| (Frobenius) and T2 receives |f(x)| as the
    /// companion magnitude, as the fully-tamed and modified families expect.
    bool companion_coupling = false;

    std::string label;
};

/// Named presets matching the experiment labels:
///   em, mt          untamed Euler-Maruyama / Milstein-Talay
///   ts1, bs1, ms1   first-order truncation (alpha=1) / tanh / modified maps
///   ft1             first-order fully tamed (alpha_1=1)
///   ts2, bs2, ms2   second-order truncation (alpha=2) / tanh / modified maps
struct SchemePresetInfo {
    std::string name;
    SchemeKind kind;
    MapFamily family;
    double alpha;
    double power;
    int theta;
    bool companion;
};

const std::vector<SchemePresetInfo>& scheme_presets();
const SchemePresetInfo& scheme_preset_info(const std::string& name);
SchemeConfig scheme_preset(const std::string& name);

/// Scratch space for one-step evaluation; reuse across steps.
struct StepWorkspace {
    OperatorWorkspace coeff;
    OperatorValues ops;
    Vec block;   // current coefficient block
    Vec tamed;   // T_i applied to it
    Vec next;
    WienerPackage pkg;
};

/// One step of the configured scheme from state y with the given Wiener
/// package. Non-finite outputs propagate to the caller; divergence
/// detection happens in integrate().
void step(const SchemeConfig& cfg, const SdeProblem& problem, const Vec& y,
          double h, const WienerPackage& pkg, StepWorkspace& ws, Vec& out);

/// Allocating convenience overload.
Vec step(const SchemeConfig& cfg, const SdeProblem& problem, const Vec& y,
         double h, const WienerPackage& pkg);

/// A trajectory is flagged divergent once a component is non-finite or the
/// norm exceeds this threshold.
inline constexpr double kDivergenceThreshold = 1e10;

struct IntegrateResult {
    Vec terminal;
    bool diverged = false;
    double sup_norm = 0.0;
};

/// Integrates over [0, T] on the uniform N-step mesh, drawing one package
/// per step from `stream` in step order.
IntegrateResult integrate(const SchemeConfig& cfg, const SdeProblem& problem,
                          const Vec& x0, double T, long long N,
                          IntegralMode mode, RandomStream& stream,
                          StepWorkspace& ws);

struct VariationResult {
    Vec terminal_x;
    Vec terminal_xi;
    bool diverged = false;
};

/// Integrates the state together with its first variation xi (the
/// derivative with respect to initial-condition coordinate `direction`):
///   d xi = Df(X) xi dt + sum_r Dg^r(X) xi dW_r,  xi(0) = e_direction.
/// The xi update uses untamed Euler terms with the same package as the
/// state update; the variation equation is linear in xi.
VariationResult integrate_with_variation(const SchemeConfig& cfg,
                                         const SdeProblem& problem, const Vec& x0,
                                         double T, long long N, IntegralMode mode,
                                         RandomStream& stream, StepWorkspace& ws,
                                         int direction);

}  // namespace sdelab
