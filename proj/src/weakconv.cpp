#include "sde_weak_lab/weakconv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "sde_weak_lab/parallel.hpp"

namespace sdelab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

double TestFunction::operator()(const Vec& x) const {
    switch (kind) {
        case Kind::identity_coord: return x[coord];
        case Kind::square: return x.squaredNorm();
        case Kind::cosine: return std::cos(x.sum());
    }
    return 0.0;
}

std::string TestFunction::name() const {
    switch (kind) {
        case Kind::identity_coord:
            return coord == 0 ? std::string("x") : "x" + std::to_string(coord + 1);
        case Kind::square: return "square";
        case Kind::cosine: return "cos";
    }
    return "?";
}

TestFunction TestFunction::identity_coord(int coord) {
    return TestFunction{Kind::identity_coord, coord, 1.0};
}
TestFunction TestFunction::square() { return TestFunction{Kind::square, 0, 2.0}; }
TestFunction TestFunction::cosine() { return TestFunction{Kind::cosine, 0, 0.0}; }

TestFunction TestFunction::parse(const std::string& text) {
    if (text == "cos" || text == "cosine") return cosine();
    if (text == "square") return square();
    if (text == "x") return identity_coord(0);
    if (text.size() >= 2 && text[0] == 'x') {
        const int idx = std::atoi(text.c_str() + 1);
        if (idx >= 1) return identity_coord(idx - 1);
    }
    throw std::invalid_argument("unknown test function: " + text);
}

namespace {

struct ChunkStats {
    double sum = 0.0;
    double sumsq = 0.0;
    long long used = 0;
    long long diverged = 0;
};

long long mesh_steps(double T, double h) {
    const long long N = std::llround(T / h);
    return N < 1 ? 1 : N;
}

}  // namespace

EstimateResult estimate_functional(const SdeProblem& pb, const SchemeConfig& cfg,
                                   const TestFunction& phi, const Vec& x0, double T,
                                   double h, long long M, std::uint64_t seed,
                                   const McOptions& opts) {
    if (M < 2) throw std::invalid_argument("estimate_functional: need M >= 2");
    if (x0.size() != pb.dim)
        throw std::invalid_argument("estimate_functional: x0 dimension mismatch");
    const long long N = mesh_steps(T, h);

    std::vector<ChunkStats> chunks(chunk_count(M, opts.chunk));
    parallel_chunks(M, opts.chunk, resolve_threads(opts.threads),
                    [&](long long begin, long long end, std::size_t ci) {
                        StepWorkspace ws;
                        ChunkStats acc;
                        for (long long i = begin; i < end; ++i) {
                            RandomStream stream(seed, static_cast<std::uint64_t>(i),
                                                opts.substream);
                            const IntegrateResult r =
                                integrate(cfg, pb, x0, T, N, opts.mode, stream, ws);
                            if (r.diverged) {
                                ++acc.diverged;
                                continue;
                            }
                            const double value = phi(r.terminal);
                            acc.sum += value;
                            acc.sumsq += value * value;
                            ++acc.used;
                        }
                        chunks[ci] = acc;
                    });

    ChunkStats total;
    for (const ChunkStats& c : chunks) {
        total.sum += c.sum;
        total.sumsq += c.sumsq;
        total.used += c.used;
        total.diverged += c.diverged;
    }

    EstimateResult res;
    res.diverged_count = total.diverged;
    res.used = total.used;
    if (total.used == 0) {
        res.mean = kNaN;
        res.ci95_halfwidth = kInf;
        return res;
    }
    res.mean = total.sum / static_cast<double>(total.used);
    if (total.used > 1) {
        const double n = static_cast<double>(total.used);
        double var = (total.sumsq - n * res.mean * res.mean) / (n - 1.0);
        if (var < 0.0) var = 0.0;
        res.ci95_halfwidth = 1.96 * std::sqrt(var / n);
    }
    return res;
}

WeakErrorTable weak_error_study(const SdeProblem& pb, const SchemeConfig& cfg,
                                const TestFunction& phi, const Vec& x0, double T,
                                std::vector<double> h_list, long long M, double h_ref,
                                long long M_ref, std::uint64_t seed,
                                const McOptions& opts) {
    if (h_list.empty()) throw std::invalid_argument("weak_error_study: empty h list");
    std::sort(h_list.begin(), h_list.end(), std::greater<double>());
    if (!(h_ref > 0.0) || h_ref >= h_list.back())
        throw std::invalid_argument("weak_error_study: h_ref must be below min(h_list)");

    WeakErrorTable table;
    table.scheme = cfg.label.empty() ? to_string(cfg.kind) : cfg.label;
    table.problem = pb.name;
    table.phi = phi.name();
    table.M = M;
    table.M_ref = M_ref;
    table.seed = seed;
    table.h_ref = h_ref;
    table.T = T;
    table.x0 = x0;

    // Reference: same scheme at h_ref on its own substream.
    McOptions ref_opts = opts;
    ref_opts.substream = 1;
    const EstimateResult ref =
        estimate_functional(pb, cfg, phi, x0, T, h_ref, M_ref, seed, ref_opts);
    table.reference = ref.mean;
    table.reference_ci95 = ref.ci95_halfwidth;
    table.reference_diverged = ref.diverged_count;

    for (double h : h_list) {
        const EstimateResult est =
            estimate_functional(pb, cfg, phi, x0, T, h, M, seed, opts);
        WeakErrorRow row;
        row.h = T / static_cast<double>(mesh_steps(T, h));
        row.estimate = est.mean;
        row.ci95_halfwidth = est.ci95_halfwidth;
        row.reference = ref.mean;
        row.abs_error = std::fabs(est.mean - ref.mean);
        row.diverged = est.diverged_count;
        row.resolved = row.abs_error > 2.0 * row.ci95_halfwidth;
        row.rate = kNaN;
        table.rows.push_back(row);
    }
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        const WeakErrorRow& prev = table.rows[k - 1];
        WeakErrorRow& cur = table.rows[k];
        cur.rate = std::log(cur.abs_error / prev.abs_error) / std::log(cur.h / prev.h);
    }
    return table;
}

OrderFit fit_order(const WeakErrorTable& table) {
    OrderFit fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const WeakErrorRow& row : table.rows) {
        if (!row.resolved || !(row.abs_error > 0.0)) continue;
        const double x = std::log(row.h);
        const double y = std::log(row.abs_error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        ++fit.rows_used;
    }
    if (fit.rows_used < 2) return fit;
    const double n = fit.rows_used;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    const double ss_tot = syy - sy * sy / n;
    const double ss_res = ss_tot - fit.slope * (sxy - sx * sy / n);
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.resolved = true;
    return fit;
}

namespace {

// Index tuples for coordinate products of order s (1 or 2).
std::vector<std::pair<int, int>> product_tuples(int d, int s) {
    std::vector<std::pair<int, int>> tuples;
    if (s == 1) {
        for (int i = 0; i < d; ++i) tuples.emplace_back(i, -1);
    } else {
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) tuples.emplace_back(i, j);
    }
    return tuples;
}

inline double tuple_product(const Vec& delta, const std::pair<int, int>& t) {
    return t.second < 0 ? delta[t.first] : delta[t.first] * delta[t.second];
}

}  // namespace

GapEstimate one_step_moment_gap(const SdeProblem& pb, const SchemeConfig& cfg,
                                const Vec& x, double h, int s, long long M,
                                std::uint64_t seed, const McOptions& opts) {
    if (s != 1 && s != 2)
        throw std::invalid_argument("one_step_moment_gap: s must be 1 or 2");
    if (M < 2) throw std::invalid_argument("one_step_moment_gap: need M >= 2");
    const int d = pb.dim;
    const int m = pb.noise_dim;
    constexpr int kSubsteps = 64;
    const double h_sub = h / kSubsteps;
    const auto tuples = product_tuples(d, s);
    const std::size_t n_tuples = tuples.size();

    // Fine proxy: truncation-tamed Milstein-Talay; the cap h_sub^-2 is far
    // outside the visited region, so it matches the plain scheme but cannot
    // blow up.
    SchemeConfig fine = scheme_preset("ts2");

    struct GapChunk {
        std::vector<double> sum, sumsq;
        long long used = 0;
    };
    std::vector<GapChunk> chunks(chunk_count(M, opts.chunk));

    parallel_chunks(M, opts.chunk, resolve_threads(opts.threads),
                    [&](long long begin, long long end, std::size_t ci) {
        StepWorkspace ws;
        GapChunk acc;
        acc.sum.assign(n_tuples, 0.0);
        acc.sumsq.assign(n_tuples, 0.0);
        WienerPackage coarse;
        coarse.resize(m);
        Vec w_run(m), fine_state(d), delta_x(d), delta_y(d), y1(d);
        for (long long i = begin; i < end; ++i) {
            RandomStream stream(seed, static_cast<std::uint64_t>(i),
                                opts.substream + 2);
            // Integrate the fine path and assemble the coarse package from
            // the same increments (common random numbers).
            coarse.set_zero();
            coarse.h = h;
            w_run.setZero();
            fine_state = x;
            for (int k = 0; k < kSubsteps; ++k) {
                sample_package(h_sub, m, opts.mode, stream, ws.pkg);
                for (int r = 0; r < m; ++r) {
                    coarse.dZ[r] += w_run[r] * h_sub + ws.pkg.dZ[r];
                    for (int r1 = 0; r1 < m; ++r1)
                        coarse.dI(r1, r) += w_run[r1] * ws.pkg.dW[r] + ws.pkg.dI(r1, r);
                }
                w_run += ws.pkg.dW;
                step(fine, pb, fine_state, h_sub, ws.pkg, ws, ws.next);
                fine_state = ws.next;
            }
            coarse.dW = w_run;
            // Keep the diagonal identity exact against accumulated roundoff.
            for (int r = 0; r < m; ++r)
                coarse.dI(r, r) = 0.5 * (coarse.dW[r] * coarse.dW[r] - h);

            step(cfg, pb, x, h, coarse, ws, y1);
            delta_x = fine_state - x;
            delta_y = y1 - x;
            if (!delta_x.allFinite() || !delta_y.allFinite()) continue;
            for (std::size_t t = 0; t < n_tuples; ++t) {
                const double diff =
                    tuple_product(delta_x, tuples[t]) - tuple_product(delta_y, tuples[t]);
                acc.sum[t] += diff;
                acc.sumsq[t] += diff * diff;
            }
            ++acc.used;
        }
        chunks[ci] = std::move(acc);
    });

    std::vector<double> sum(n_tuples, 0.0), sumsq(n_tuples, 0.0);
    long long used = 0;
    for (const GapChunk& c : chunks) {
        if (c.sum.empty()) continue;
        for (std::size_t t = 0; t < n_tuples; ++t) {
            sum[t] += c.sum[t];
            sumsq[t] += c.sumsq[t];
        }
        used += c.used;
    }

    GapEstimate res;
    res.per_tuple.resize(n_tuples);
    if (used < 2) return res;
    const double n = static_cast<double>(used);
    for (std::size_t t = 0; t < n_tuples; ++t) {
        const double mean = sum[t] / n;
        double var = (sumsq[t] - n * mean * mean) / (n - 1.0);
        if (var < 0.0) var = 0.0;
        const double ci = 1.96 * std::sqrt(var / n);
        res.per_tuple[t] = std::fabs(mean);
        if (std::fabs(mean) >= res.gap) {
            res.gap = std::fabs(mean);
            res.ci95 = ci;
        }
    }
    return res;
}

MomentTrace moment_trace(const SdeProblem& pb, const SchemeConfig& cfg, double p,
                         const Vec& x0, double T, double h, long long M,
                         std::uint64_t seed, const McOptions& opts) {
    if (!(p >= 1.0)) throw std::invalid_argument("moment_trace: need p >= 1");
    const long long N = mesh_steps(T, h);
    const double h_eff = T / static_cast<double>(N);
    const auto n_points = static_cast<std::size_t>(N) + 1;

    struct TraceChunk {
        std::vector<double> sums;
        long long first_div = -1;  // earliest step with a divergent state
        long long diverged = 0;
    };
    std::vector<TraceChunk> chunks(chunk_count(M, opts.chunk));

    parallel_chunks(M, opts.chunk, resolve_threads(opts.threads),
                    [&](long long begin, long long end, std::size_t ci) {
        StepWorkspace ws;
        TraceChunk acc;
        acc.sums.assign(n_points, 0.0);
        Vec y(pb.dim);
        for (long long i = begin; i < end; ++i) {
            RandomStream stream(seed, static_cast<std::uint64_t>(i), opts.substream);
            y = x0;
            acc.sums[0] += std::pow(y.norm(), p);
            for (long long nstep = 0; nstep < N; ++nstep) {
                sample_package(h_eff, pb.noise_dim, opts.mode, stream, ws.pkg);
                step(cfg, pb, y, h_eff, ws.pkg, ws, ws.next);
                const bool bad = !ws.next.allFinite() ||
                                 ws.next.norm() > kDivergenceThreshold;
                if (bad) {
                    ++acc.diverged;
                    if (acc.first_div < 0 || nstep + 1 < acc.first_div)
                        acc.first_div = nstep + 1;
                    break;
                }
                y = ws.next;
                acc.sums[static_cast<std::size_t>(nstep) + 1] += std::pow(y.norm(), p);
            }
        }
        chunks[ci] = std::move(acc);
    });

    MomentTrace trace;
    trace.per_step.assign(n_points, 0.0);
    long long first_div = -1;
    for (const TraceChunk& c : chunks) {
        if (c.sums.empty()) continue;
        for (std::size_t n = 0; n < n_points; ++n) trace.per_step[n] += c.sums[n];
        trace.diverged_count += c.diverged;
        if (c.first_div >= 0 && (first_div < 0 || c.first_div < first_div))
            first_div = c.first_div;
    }
    for (std::size_t n = 0; n < n_points; ++n) {
        if (first_div >= 0 && static_cast<long long>(n) >= first_div)
            trace.per_step[n] = kInf;
        else
            trace.per_step[n] /= static_cast<double>(M);
    }
    trace.sup_over_n = *std::max_element(trace.per_step.begin(), trace.per_step.end());
    return trace;
}

namespace {

std::string fmt(const char* format, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, value);
    return buf;
}

}  // namespace

void write_csv(const WeakErrorTable& table, std::ostream& os) {
    os << "scheme,problem,phi,h,M,estimate,ci95,reference,abs_error,rate,diverged\n";
    for (const WeakErrorRow& row : table.rows) {
        os << table.scheme << ',' << table.problem << ',' << table.phi << ','
           << fmt("%.10g", row.h) << ',' << table.M << ',' << fmt("%.12e", row.estimate)
           << ',' << fmt("%.6e", row.ci95_halfwidth) << ','
           << fmt("%.12e", row.reference) << ',' << fmt("%.12e", row.abs_error) << ',';
        if (std::isfinite(row.rate)) os << fmt("%.4f", row.rate);
        os << ',' << row.diverged << '\n';
    }
}

void write_loglog(const WeakErrorTable& table, std::ostream& os) {
    os << "# log10(h) log10(abs_error)  scheme=" << table.scheme
       << " problem=" << table.problem << " phi=" << table.phi << "\n";
    for (const WeakErrorRow& row : table.rows) {
        if (!(row.abs_error > 0.0)) continue;
        os << fmt("%.12e", std::log10(row.h)) << ' '
           << fmt("%.12e", std::log10(row.abs_error)) << '\n';
    }
}

}  // namespace sdelab
