#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sde_weak_lab/config.hpp"
#include "sde_weak_lab/predictor.hpp"
#include "sde_weak_lab/weakconv.hpp"

namespace sdelab {

namespace {

SdeProblem problem_from_config(const RunConfig& cfg) {
    std::map<std::string, double> params;
    params["sigma"] = cfg.sigma;
    params["p_large"] = cfg.p_large;
    return builtin_problem(cfg.problem, params);
}

Vec x0_from_config(const RunConfig& cfg, const SdeProblem& pb) {
    const std::vector<double> values = cfg.resolved_x0();
    if (static_cast<int>(values.size()) != pb.dim)
        throw std::invalid_argument("x0 has " + std::to_string(values.size()) +
                                    " components, problem needs " +
                                    std::to_string(pb.dim));
    Vec x0(pb.dim);
    for (int i = 0; i < pb.dim; ++i) x0[i] = values[static_cast<std::size_t>(i)];
    return x0;
}

IntegralMode mode_from_config(const RunConfig& cfg) {
    if (cfg.integral_mode == "weak_substitute") return IntegralMode::weak_substitute;
    if (cfg.integral_mode == "exact_gaussian") return IntegralMode::exact_gaussian;
    throw std::invalid_argument("unknown integral mode: " + cfg.integral_mode);
}

McOptions mc_options(const RunConfig& cfg) {
    McOptions opts;
    opts.threads = cfg.threads;
    opts.mode = mode_from_config(cfg);
    return opts;
}

void write_manifest(const RunConfig& cfg, double wall_seconds,
                    const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write manifest: " + path.string());
    for (const auto& [key, value] : cfg.to_keys()) out << key << '=' << value << '\n';
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", wall_seconds);
    out << "meta.master_seed=" << cfg.seed << '\n';
    out << "meta.wall_time_s=" << buf << '\n';
}

int run_weak_error(const RunConfig& cfg) {
    const SdeProblem pb = problem_from_config(cfg);
    const SchemeConfig scheme = scheme_preset(cfg.scheme);
    const TestFunction phi = TestFunction::parse(cfg.phi);
    const Vec x0 = x0_from_config(cfg, pb);
    const long long m_ref = cfg.M_ref > 0 ? cfg.M_ref : cfg.M;

    const WeakErrorTable table =
        weak_error_study(pb, scheme, phi, x0, cfg.T, cfg.h_list, cfg.M, cfg.h_ref,
                         m_ref, cfg.seed, mc_options(cfg));

    const std::filesystem::path dir(cfg.out_dir);
    const std::string tag = cfg.resolved_tag();
    {
        std::ofstream csv(dir / (tag + ".csv"));
        write_csv(table, csv);
    }
    {
        std::ofstream dat(dir / (tag + ".loglog.dat"));
        write_loglog(table, dat);
    }
    write_csv(table, std::cout);

    const OrderFit fit = fit_order(table);
    if (!fit.resolved) {
        std::cout << "# order fit: statistically unresolved (" << fit.rows_used
                  << " resolved rows)\n";
        return kExitUnresolved;
    }
    char line[160];
    std::snprintf(line, sizeof(line),
                  "# order fit: slope=%.4f intercept=%.4f r2=%.5f rows=%d\n",
                  fit.slope, fit.intercept, fit.r_squared, fit.rows_used);
    std::cout << line;
    return kExitOk;
}

int run_predict_order(const RunConfig& cfg) {
    const SdeProblem pb = problem_from_config(cfg);
    const TestFunction phi = TestFunction::parse(cfg.phi);
    const OrderPrediction pred =
        predict_order_for_preset(problem_meta(pb), cfg.scheme, phi.kappa);

    char line[256];
    std::printf("problem=%s scheme=%s phi=%s kappa=%g\n", pb.name.c_str(),
                cfg.scheme.c_str(), phi.name().c_str(), phi.kappa);
    std::printf("%-12s %-12s %-10s %-10s %-12s %-12s %-10s %s\n", "G1", "B", "beta",
                "varkappa", "threshold", "varsigma", "eps", "q");
    std::snprintf(line, sizeof(line),
                  "%-12.5g %-12.5g %-10.5g %-10.5g %-12.5g %-12.6g %-10.5g %.4f",
                  pred.G1, pred.B, pred.beta, pred.varkappa, pred.threshold,
                  pred.chosen.varsigma, pred.chosen.epsilon_exp, pred.q_raw);
    std::printf("%s\n", line);
    std::printf("feasible=%s saturated=%s q_nearest_integer=%g\n",
                pred.feasible ? "yes" : "no", pred.saturated ? "yes" : "no",
                pred.q_integer_note);
    return kExitOk;
}

int run_check_maps(const RunConfig& cfg) {
    TamingMapParams params;
    params.alpha = cfg.map_alpha;
    params.power = cfg.map_power;
    params.theta = cfg.map_theta;
    params.varsigma = cfg.map_varsigma;
    const TamingMap map = make_taming_map(map_family_from_string(cfg.map_family), params);
    const MapCheckReport report = check_h1_h3(map, cfg.map_samples, cfg.map_h_grid,
                                              cfg.map_z_radius, cfg.seed, cfg.map_dim);
    std::printf("family=%s samples=%lld violations=%lld max_violation=%.3e\n",
                cfg.map_family.c_str(), report.samples, report.violations,
                report.max_violation);
    for (const auto& w : report.witnesses)
        std::printf("  violation: bound=%s h=%g |z|=%g w=%g excess=%.3e\n",
                    w.bound.c_str(), w.h, w.z_norm, w.w, w.excess);
    return report.violations == 0 ? kExitOk : kExitUnresolved;
}

int run_moment_trace(const RunConfig& cfg) {
    const SdeProblem pb = problem_from_config(cfg);
    const SchemeConfig scheme = scheme_preset(cfg.scheme);
    const Vec x0 = x0_from_config(cfg, pb);
    const MomentTrace trace = moment_trace(pb, scheme, cfg.p, x0, cfg.T, cfg.h, cfg.M,
                                           cfg.seed, mc_options(cfg));

    const std::filesystem::path dir(cfg.out_dir);
    std::ofstream dat(dir / (cfg.resolved_tag() + ".trace.dat"));
    dat << "# n E|Y_n|^p  p=" << cfg.p << " scheme=" << cfg.scheme << '\n';
    for (std::size_t n = 0; n < trace.per_step.size(); ++n)
        dat << n << ' ' << trace.per_step[n] << '\n';

    std::printf("scheme=%s p=%g h=%g M=%lld sup_n E|Y_n|^p = %g diverged=%lld\n",
                cfg.scheme.c_str(), cfg.p, cfg.h, cfg.M, trace.sup_over_n,
                trace.diverged_count);
    return kExitOk;
}

int run_one_step(const RunConfig& cfg) {
    const SdeProblem pb = problem_from_config(cfg);
    const SchemeConfig scheme = scheme_preset(cfg.scheme);
    const Vec x0 = x0_from_config(cfg, pb);

    std::vector<double> hs = cfg.h_list;
    std::sort(hs.begin(), hs.end(), std::greater<double>());
    std::printf("one-step moment gap, scheme=%s s=%d M=%lld x=(", cfg.scheme.c_str(),
                cfg.s, cfg.M);
    for (int i = 0; i < pb.dim; ++i) std::printf(i ? ",%g" : "%g", x0[i]);
    std::printf(")\n%-12s %-14s %-12s\n", "h", "gap", "ci95");
    std::vector<double> log_h, log_gap;
    for (double h : hs) {
        const GapEstimate gap =
            one_step_moment_gap(pb, scheme, x0, h, cfg.s, cfg.M, cfg.seed, mc_options(cfg));
        std::printf("%-12g %-14.6e %-12.3e\n", h, gap.gap, gap.ci95);
        if (gap.gap > 0.0) {
            log_h.push_back(std::log(h));
            log_gap.push_back(std::log(gap.gap));
        }
    }
    if (log_h.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < log_h.size(); ++i) {
            sx += log_h[i];
            sy += log_gap[i];
            sxx += log_h[i] * log_h[i];
            sxy += log_h[i] * log_gap[i];
        }
        const double n = static_cast<double>(log_h.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        std::printf("fitted slope: %.3f\n", slope);
    }
    return kExitOk;
}

int run_divergence_demo(const RunConfig& cfg) {
    const SdeProblem pb = problem_from_config(cfg);
    const Vec x0 = x0_from_config(cfg, pb);
    std::printf("divergence demo: problem=%s h=%g M=%lld T=%g x0=%g\n",
                pb.name.c_str(), cfg.h, cfg.M, cfg.T, x0[0]);
    std::printf("%-8s %-12s %-16s\n", "scheme", "diverged", "sup_n E|Y|^2");
    for (const std::string name : {"em", "ts2", "bs2", "ms2"}) {
        const SchemeConfig scheme = scheme_preset(name);
        const MomentTrace trace = moment_trace(pb, scheme, 2.0, x0, cfg.T, cfg.h,
                                               cfg.M, cfg.seed, mc_options(cfg));
        std::printf("%-8s %-12lld %-16g\n", name.c_str(), trace.diverged_count,
                    trace.sup_over_n);
    }
    return kExitOk;
}

}  // namespace

int run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    int status = kExitOk;
    try {
        if (cfg.command == "run-weak-error") status = run_weak_error(cfg);
        else if (cfg.command == "predict-order") status = run_predict_order(cfg);
        else if (cfg.command == "check-maps") status = run_check_maps(cfg);
        else if (cfg.command == "moment-trace") status = run_moment_trace(cfg);
        else if (cfg.command == "one-step") status = run_one_step(cfg);
        else if (cfg.command == "divergence-demo") status = run_divergence_demo(cfg);
        else {
            std::cerr << "unknown command: " << cfg.command << '\n';
            return kExitConfigError;
        }
    } catch (const std::invalid_argument& err) {
        std::cerr << "config error: " << err.what() << '\n';
        return kExitConfigError;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_manifest(cfg, wall,
                       std::filesystem::path(cfg.out_dir) /
                           (cfg.resolved_tag() + ".manifest.txt"));
    } catch (const std::exception& err) {
        std::cerr << "manifest error: " << err.what() << '\n';
        return kExitConfigError;
    }
    return status;
}

}  // namespace sdelab
