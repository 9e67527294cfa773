#include "sde_weak_lab/schemes.hpp"

#include <cmath>
#include <stdexcept>

namespace sdelab {

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::euler_maruyama: return "euler_maruyama";
        case SchemeKind::milstein_talay: return "milstein_talay";
        case SchemeKind::modified_euler: return "modified_euler";
        case SchemeKind::modified_mt: return "modified_mt";
    }
    return "?";
}

bool is_second_order(SchemeKind kind) {
    return kind == SchemeKind::milstein_talay || kind == SchemeKind::modified_mt;
}

const std::vector<SchemePresetInfo>& scheme_presets() {
    static const std::vector<SchemePresetInfo> presets = {
        {"em", SchemeKind::euler_maruyama, MapFamily::identity, 1.0, 1.0, 1, false},
        {"mt", SchemeKind::milstein_talay, MapFamily::identity, 1.0, 1.0, 1, false},
        {"ts1", SchemeKind::modified_euler, MapFamily::truncation, 1.0, 1.0, 1, false},
        {"bs1", SchemeKind::modified_euler, MapFamily::balanced_tanh, 1.0, 1.0, 1, false},
        {"ms1", SchemeKind::modified_euler, MapFamily::modified, 1.0, 1.0, 1, true},
        {"ft1", SchemeKind::modified_euler, MapFamily::fully_tamed, 1.0, 1.0, 1, true},
        {"ts2", SchemeKind::modified_mt, MapFamily::truncation, 2.0, 2.0, 1, false},
        {"bs2", SchemeKind::modified_mt, MapFamily::balanced_tanh, 2.0, 2.0, 1, false},
        {"ms2", SchemeKind::modified_mt, MapFamily::modified, 2.0, 2.0, 1, true},
    };
    return presets;
}

const SchemePresetInfo& scheme_preset_info(const std::string& name) {
    for (const auto& preset : scheme_presets())
        if (preset.name == name) return preset;
    throw std::invalid_argument("unknown scheme preset: " + name);
}

SchemeConfig scheme_preset(const std::string& name) {
    const SchemePresetInfo& info = scheme_preset_info(name);
    SchemeConfig cfg;
    cfg.kind = info.kind;
    cfg.label = info.name;
    cfg.companion_coupling = info.companion;
    TamingMapParams params;
    params.alpha = info.alpha;
    params.power = info.power;
    params.theta = info.theta;
    const TamingMap map = make_taming_map(info.family, params);
    for (auto& slot : cfg.maps) slot = map;
    return cfg;
}

namespace {

inline bool uses_taming(const SchemeConfig& cfg) {
    return cfg.kind == SchemeKind::modified_euler || cfg.kind == SchemeKind::modified_mt;
}

// Applies slot `i` (0-based) to `block`; `out` aliases the result. Returns a
// reference to avoid copying when the slot is the identity.
inline const Vec& tame(const SchemeConfig& cfg, int slot, const Vec& block,
                       double h, std::optional<double> companion, Vec& out) {
    if (!uses_taming(cfg) || cfg.maps[static_cast<std::size_t>(slot)].is_identity())
        return block;
    apply_map_into(cfg.maps[static_cast<std::size_t>(slot)], block, h, companion, out);
    return out;
}

}  // namespace

void step(const SchemeConfig& cfg, const SdeProblem& pb, const Vec& y, double h,
          const WienerPackage& pkg, StepWorkspace& ws, Vec& out) {
    const int d = pb.dim;
    const int m = pb.noise_dim;
    if (pkg.dW.size() != m)
        throw std::invalid_argument("step: package dimension mismatch");
    if (pkg.h != h) throw std::invalid_argument("step: package step size mismatch");

    const bool second_order = is_second_order(cfg.kind);
    ws.coeff.resize(d, m);
    if (second_order) {
        eval_operators(pb, y, ws.coeff, ws.ops);
    } else {
        pb.drift(y, ws.coeff.f);
        pb.diffusion(y, ws.coeff.g);
    }
    const Vec& f = ws.coeff.f;
    const Mat& g = ws.coeff.g;

    std::optional<double> w_drift, w_diff;
    if (cfg.companion_coupling) {
        w_drift = g.norm();  // companion for T1
        w_diff = f.norm();   // companion for T2
    }

    out = y;
    out.noalias() += h * tame(cfg, 0, f, h, w_drift, ws.tamed);
    for (int r = 0; r < m; ++r) {
        ws.block = g.col(r);
        out.noalias() += pkg.dW[r] * tame(cfg, 1, ws.block, h, w_diff, ws.tamed);
    }
    if (!second_order) return;

    for (int r = 0; r < m; ++r) {
        for (int r1 = 0; r1 < m; ++r1) {
            const Vec& lg = ws.ops.lambda_g[static_cast<std::size_t>(r1) * m + r];
            out.noalias() += pkg.dI(r1, r) * tame(cfg, 2, lg, h, std::nullopt, ws.tamed);
        }
        out.noalias() +=
            h * pkg.dW[r] * tame(cfg, 3, ws.ops.L_g[r], h, std::nullopt, ws.tamed);
        ws.block = ws.ops.lambda_f[r] - ws.ops.L_g[r];
        out.noalias() += pkg.dZ[r] * tame(cfg, 4, ws.block, h, std::nullopt, ws.tamed);
    }
    out.noalias() +=
        0.5 * h * h * tame(cfg, 5, ws.ops.L_f, h, std::nullopt, ws.tamed);
}

Vec step(const SchemeConfig& cfg, const SdeProblem& pb, const Vec& y, double h,
         const WienerPackage& pkg) {
    StepWorkspace ws;
    Vec out;
    step(cfg, pb, y, h, pkg, ws, out);
    return out;
}

namespace {

void check_mesh(double T, long long N) {
    if (N < 1) throw std::invalid_argument("integrate: need at least one step");
    if (!(T > 0.0)) throw std::invalid_argument("integrate: horizon must be positive");
    const double h = T / static_cast<double>(N);
    if (!(h > 0.0 && h < 1.0))
        throw std::invalid_argument("integrate: step size T/N must lie in (0,1)");
}

}  // namespace

IntegrateResult integrate(const SchemeConfig& cfg, const SdeProblem& pb,
                          const Vec& x0, double T, long long N, IntegralMode mode,
                          RandomStream& stream, StepWorkspace& ws) {
    check_mesh(T, N);
    const double h = T / static_cast<double>(N);

    IntegrateResult res;
    res.terminal = x0;
    res.sup_norm = x0.norm();
    for (long long n = 0; n < N; ++n) {
        sample_package(h, pb.noise_dim, mode, stream, ws.pkg);
        step(cfg, pb, res.terminal, h, ws.pkg, ws, ws.next);
        if (!ws.next.allFinite()) {
            res.diverged = true;
            return res;
        }
        res.terminal = ws.next;
        const double norm = res.terminal.norm();
        if (norm > res.sup_norm) res.sup_norm = norm;
        if (norm > kDivergenceThreshold) {
            res.diverged = true;
            return res;
        }
    }
    return res;
}

VariationResult integrate_with_variation(const SchemeConfig& cfg,
                                         const SdeProblem& pb, const Vec& x0,
                                         double T, long long N, IntegralMode mode,
                                         RandomStream& stream, StepWorkspace& ws,
                                         int direction) {
    check_mesh(T, N);
    if (direction < 0 || direction >= pb.dim)
        throw std::invalid_argument("integrate_with_variation: bad direction index");
    const double h = T / static_cast<double>(N);
    const int d = pb.dim;
    const int m = pb.noise_dim;
    ws.coeff.resize(d, m);

    VariationResult res;
    res.terminal_x = x0;
    res.terminal_xi = Vec::Zero(d);
    res.terminal_xi[direction] = 1.0;

    Vec xi_next(d);
    for (long long n = 0; n < N; ++n) {
        sample_package(h, m, mode, stream, ws.pkg);

        // Variation update with the coefficients frozen at the current state;
        // left untamed because the equation is linear in xi.
        pb.drift_jacobian(res.terminal_x, ws.coeff.df);
        pb.diffusion_jacobian(res.terminal_x, ws.coeff.jac_g);
        xi_next = res.terminal_xi;
        xi_next.noalias() += h * (ws.coeff.df * res.terminal_xi);
        for (int r = 0; r < m; ++r)
            xi_next.noalias() += ws.pkg.dW[r] * (ws.coeff.jac_g[r] * res.terminal_xi);

        step(cfg, pb, res.terminal_x, h, ws.pkg, ws, ws.next);
        if (!ws.next.allFinite() || !xi_next.allFinite()) {
            res.diverged = true;
            return res;
        }
        res.terminal_x = ws.next;
        res.terminal_xi = xi_next;
        if (res.terminal_x.norm() > kDivergenceThreshold ||
            res.terminal_xi.norm() > kDivergenceThreshold) {
            res.diverged = true;
            return res;
        }
    }
    return res;
}

}  // namespace sdelab
