#include "sde_weak_lab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace sdelab {

void OperatorValues::resize(int dim, int noise_dim) {
    const auto need = static_cast<std::size_t>(noise_dim) * noise_dim;
    if (lambda_g.size() != need) {
        lambda_g.assign(need, Vec(dim));
        L_g.assign(noise_dim, Vec(dim));
        lambda_f.assign(noise_dim, Vec(dim));
        L_f.resize(dim);
    }
}

void OperatorWorkspace::resize(int dim, int noise_dim) {
    if (f.size() == dim && g.rows() == dim && g.cols() == noise_dim &&
        !hess_g.empty())
        return;
    f.resize(dim);
    g.resize(dim, noise_dim);
    df.resize(dim, dim);
    hess_f.assign(dim, Mat(dim, dim));
    jac_g.assign(noise_dim, Mat(dim, dim));
    hess_g.assign(noise_dim, std::vector<Mat>(dim, Mat(dim, dim)));
}

void eval_operators(const SdeProblem& pb, const Vec& x, OperatorWorkspace& ws,
                    OperatorValues& out) {
    if (!x.allFinite()) throw std::domain_error("eval_operators: non-finite state");
    const int d = pb.dim;
    const int m = pb.noise_dim;
    ws.resize(d, m);
    out.resize(d, m);

    pb.drift(x, ws.f);
    pb.diffusion(x, ws.g);
    pb.drift_jacobian(x, ws.df);
    pb.drift_hessian(x, ws.hess_f);
    pb.diffusion_jacobian(x, ws.jac_g);
    pb.diffusion_hessian(x, ws.hess_g);

    // Explicit loops: the built-in problems have d, m <= 2, where small-matrix
    // products through the expression machinery dominate the step cost.
    auto quad_form = [&](const Mat& hess, int rp) {
        double quad = 0.0;
        for (int a = 0; a < d; ++a) {
            double row = 0.0;
            for (int b = 0; b < d; ++b) row += hess(a, b) * ws.g(b, rp);
            quad += ws.g(a, rp) * row;
        }
        return quad;
    };

    // Lambda_r1 g^r = (Dg^r) g^r1  and  Lambda_r f = (Df) g^r.
    for (int r = 0; r < m; ++r) {
        const Mat& jac = ws.jac_g[r];
        for (int r1 = 0; r1 < m; ++r1) {
            Vec& dst = out.lambda_g[static_cast<std::size_t>(r1) * m + r];
            for (int i = 0; i < d; ++i) {
                double acc = 0.0;
                for (int j = 0; j < d; ++j) acc += jac(i, j) * ws.g(j, r1);
                dst[i] = acc;
            }
        }
        Vec& lf = out.lambda_f[r];
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += ws.df(i, j) * ws.g(j, r);
            lf[i] = acc;
        }
    }

    // L g^r = (Dg^r) f + (1/2) sum_r' g^r'^T Hess(g_(i,r)) g^r' per component,
    // and likewise L f with the drift Hessians.
    for (int r = 0; r < m; ++r) {
        const Mat& jac = ws.jac_g[r];
        Vec& dst = out.L_g[r];
        for (int i = 0; i < d; ++i) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += jac(i, j) * ws.f[j];
            double quad = 0.0;
            for (int rp = 0; rp < m; ++rp) quad += quad_form(ws.hess_g[r][i], rp);
            dst[i] = acc + 0.5 * quad;
        }
    }
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += ws.df(i, j) * ws.f[j];
        double quad = 0.0;
        for (int rp = 0; rp < m; ++rp) quad += quad_form(ws.hess_f[i], rp);
        out.L_f[i] = acc + 0.5 * quad;
    }
}

OperatorValues eval_operators(const SdeProblem& pb, const Vec& x) {
    OperatorWorkspace ws;
    OperatorValues out;
    eval_operators(pb, x, ws, out);
    return out;
}

namespace {

double param_or(const std::map<std::string, double>& params,
                const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

SdeProblem make_cubic_linear(double p_large) {
    SdeProblem pb;
    pb.name = "cubic_linear";
    pb.dim = 1;
    pb.noise_dim = 1;
    pb.drift = [](const Vec& x, Vec& out) { out[0] = x[0] - x[0] * x[0] * x[0]; };
    pb.diffusion = [](const Vec& x, Mat& out) { out(0, 0) = x[0]; };
    pb.drift_jacobian = [](const Vec& x, Mat& out) { out(0, 0) = 1.0 - 3.0 * x[0] * x[0]; };
    pb.drift_hessian = [](const Vec& x, std::vector<Mat>& out) { out[0](0, 0) = -6.0 * x[0]; };
    pb.diffusion_jacobian = [](const Vec&, std::vector<Mat>& out) { out[0](0, 0) = 1.0; };
    pb.diffusion_hessian = [](const Vec&, std::vector<std::vector<Mat>>& out) {
        out[0][0](0, 0) = 0.0;
    };
    pb.growth_r = 1.0;
    pb.growth_rho = 1.0;
    pb.p0 = p_large;
    pb.p0_prime = p_large;
    pb.epsilon_slack = 0.0;  // g(0) = 0
    pb.c_p0 = 0.5 * (p_large + 1.0);
    return pb;
}

SdeProblem make_cubic_quadratic(double sigma) {
    SdeProblem pb;
    pb.name = "cubic_quadratic";
    pb.dim = 1;
    pb.noise_dim = 1;
    pb.drift = [](const Vec& x, Vec& out) { out[0] = x[0] - x[0] * x[0] * x[0]; };
    pb.diffusion = [sigma](const Vec& x, Mat& out) { out(0, 0) = sigma * x[0] * x[0]; };
    pb.drift_jacobian = [](const Vec& x, Mat& out) { out(0, 0) = 1.0 - 3.0 * x[0] * x[0]; };
    pb.drift_hessian = [](const Vec& x, std::vector<Mat>& out) { out[0](0, 0) = -6.0 * x[0]; };
    pb.diffusion_jacobian = [sigma](const Vec& x, std::vector<Mat>& out) {
        out[0](0, 0) = 2.0 * sigma * x[0];
    };
    pb.diffusion_hessian = [sigma](const Vec&, std::vector<std::vector<Mat>>& out) {
        out[0][0](0, 0) = 2.0 * sigma;
    };
    pb.growth_r = 1.0;
    pb.growth_rho = 2.0;
    pb.p0 = 1.5 / (sigma * sigma) + 1.0;
    pb.p0_prime = 2.0 / (sigma * sigma) + 1.0;
    pb.epsilon_slack = 0.0;  // g(0) = 0
    pb.c_p0 = 1.0;
    return pb;
}

SdeProblem make_fhn(double p_large) {
    SdeProblem pb;
    pb.name = "fhn";
    pb.dim = 2;
    pb.noise_dim = 2;
    pb.drift = [](const Vec& x, Vec& out) {
        out[0] = x[0] - x[0] * x[0] * x[0] - x[1];
        out[1] = x[0] - x[1] + 1.0;
    };
    pb.diffusion = [](const Vec& x, Mat& out) {
        out.setZero();
        out(0, 0) = x[0] + 1.0;
        out(1, 1) = x[1] + 1.0;
    };
    pb.drift_jacobian = [](const Vec& x, Mat& out) {
        out(0, 0) = 1.0 - 3.0 * x[0] * x[0];
        out(0, 1) = -1.0;
        out(1, 0) = 1.0;
        out(1, 1) = -1.0;
    };
    pb.drift_hessian = [](const Vec& x, std::vector<Mat>& out) {
        out[0].setZero();
        out[0](0, 0) = -6.0 * x[0];
        out[1].setZero();
    };
    pb.diffusion_jacobian = [](const Vec&, std::vector<Mat>& out) {
        out[0].setZero();
        out[0](0, 0) = 1.0;
        out[1].setZero();
        out[1](1, 1) = 1.0;
    };
    pb.diffusion_hessian = [](const Vec&, std::vector<std::vector<Mat>>& out) {
        for (auto& col : out)
            for (auto& hess : col) hess.setZero();
    };
    pb.growth_r = 1.0;
    pb.growth_rho = 1.0;
    pb.p0 = p_large;
    pb.p0_prime = p_large;
    pb.epsilon_slack = 1e-9;  // g(0) != 0
    pb.c_p0 = std::numeric_limits<double>::quiet_NaN();
    return pb;
}

}  // namespace

SdeProblem builtin_problem(const std::string& name,
                           const std::map<std::string, double>& params) {
    const double p_large = param_or(params, "p_large", 1e6);
    if (name == "cubic_linear") return make_cubic_linear(p_large);
    if (name == "cubic_quadratic") {
        const double sigma = param_or(params, "sigma", 0.0);
        if (!(sigma > 0.0))
            throw std::invalid_argument("cubic_quadratic requires sigma > 0");
        return make_cubic_quadratic(sigma);
    }
    if (name == "fhn") return make_fhn(p_large);
    throw std::invalid_argument("unknown problem: " + name);
}

}  // namespace sdelab
