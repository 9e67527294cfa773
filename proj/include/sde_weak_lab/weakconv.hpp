#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sde_weak_lab/schemes.hpp"

namespace sdelab {

/// Test functionals phi with their polynomial-growth exponent kappa:
///   identity_coord  x[coord]            kappa = 1
///   square          |x|^2               kappa = 2
///   cosine          cos(x_1 + ... + x_d) kappa = 0
struct TestFunction {
    enum class Kind { identity_coord, square, cosine };
    Kind kind = Kind::cosine;
    int coord = 0;
    double kappa = 0.0;

    double operator()(const Vec& x) const;
    std::string name() const;

    static TestFunction identity_coord(int coord = 0);
    static TestFunction square();
    static TestFunction cosine();
    /// Accepts "cos", "square", "x", or "x<k>" (1-based coordinate).
    static TestFunction parse(const std::string& text);
};

/// Monte Carlo execution options shared by the estimators.
struct McOptions {
    int threads = 0;              // 0 = resolve from env / hardware
    long long chunk = 4096;       // trajectories per deterministic chunk
    IntegralMode mode = IntegralMode::weak_substitute;
    std::uint32_t substream = 0;  // reference runs use substream 1
};

struct EstimateResult {
    double mean = 0.0;
    double ci95_halfwidth = 0.0;
    long long diverged_count = 0;
    long long used = 0;  // trajectories contributing to the mean
};

/// Sample mean of phi(X_T) over M trajectories; the 95% half-width is
/// 1.96 s / sqrt(n). Diverged trajectories are excluded from the mean and
/// counted. Results are bit-identical for a fixed seed on any thread count.
EstimateResult estimate_functional(const SdeProblem& problem, const SchemeConfig& cfg,
                                   const TestFunction& phi, const Vec& x0, double T,
                                   double h, long long M, std::uint64_t seed,
                                   const McOptions& opts = {});

struct WeakErrorRow {
    double h = 0.0;
    double estimate = 0.0;
    double ci95_halfwidth = 0.0;
    double reference = 0.0;
    double abs_error = 0.0;
    double rate = 0.0;     // vs the previous (coarser) row; NaN on the first
    long long diverged = 0;
    bool resolved = false;  // abs_error > 2 * ci95_halfwidth
};

struct WeakErrorTable {
    std::vector<WeakErrorRow> rows;  // sorted by decreasing h
    // Run provenance.
    std::string scheme, problem, phi;
    long long M = 0, M_ref = 0;
    std::uint64_t seed = 0;
    double h_ref = 0.0, T = 0.0;
    Vec x0;
    double reference = 0.0;
    double reference_ci95 = 0.0;
    long long reference_diverged = 0;
};

/// Runs the weak-error protocol: one reference at h_ref with the same
/// scheme, then one estimate per h. Requires min(h_list) > h_ref.
WeakErrorTable weak_error_study(const SdeProblem& problem, const SchemeConfig& cfg,
                                const TestFunction& phi, const Vec& x0, double T,
                                std::vector<double> h_list, long long M, double h_ref,
                                long long M_ref, std::uint64_t seed,
                                const McOptions& opts = {});

struct OrderFit {
    bool resolved = false;  // at least two statistically resolved rows
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int rows_used = 0;
};

/// Least-squares fit of log(abs_error) against log(h) over the resolved rows.
OrderFit fit_order(const WeakErrorTable& table);

struct GapEstimate {
    double gap = 0.0;    // worst coordinate-product moment gap
    double ci95 = 0.0;   // paired half-width of that tuple
    std::vector<double> per_tuple;
};

/// One-step weak-error diagnostic: compares E[prod delta_Y] for one scheme
/// step of size h against a fine proxy (truncation-tamed Milstein-Talay at
/// substep h/64) built from the same Brownian increments, for coordinate
/// products of order s in {1, 2}.
GapEstimate one_step_moment_gap(const SdeProblem& problem, const SchemeConfig& cfg,
                                const Vec& x, double h, int s, long long M,
                                std::uint64_t seed, const McOptions& opts = {});

struct MomentTrace {
    double sup_over_n = 0.0;
    std::vector<double> per_step;  // E|Y_n|^p at every mesh point, +inf after blowup
    long long diverged_count = 0;
};

/// Estimates E|Y_n|^p along the mesh; any diverged trajectory makes the
/// trace +inf from its blowup step onward.
MomentTrace moment_trace(const SdeProblem& problem, const SchemeConfig& cfg, double p,
                         const Vec& x0, double T, double h, long long M,
                         std::uint64_t seed, const McOptions& opts = {});

/// CSV with header
/// scheme,problem,phi,h,M,estimate,ci95,reference,abs_error,rate,diverged —
/// one row per step size; formatting is fixed so equal tables are
/// byte-identical.
void write_csv(const WeakErrorTable& table, std::ostream& os);

/// Two-column log10(h) log10(abs_error) series for plotting.
void write_loglog(const WeakErrorTable& table, std::ostream& os);

}  // namespace sdelab
