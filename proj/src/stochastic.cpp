#include "sde_weak_lab/stochastic.hpp"

#include <cmath>
#include <stdexcept>

namespace sdelab {

namespace {

// Tail variance of the Levy-area Fourier expansion after `terms` modes:
// rho_p = 1/12 - (1/(2 pi^2)) sum_{k<=p} k^-2.
double levy_tail_rho(int terms) {
    double partial = 0.0;
    for (int k = 1; k <= terms; ++k) partial += 1.0 / (static_cast<double>(k) * k);
    const double rho = 1.0 / 12.0 - partial / (2.0 * std::numbers::pi * std::numbers::pi);
    return rho > 0.0 ? rho : 0.0;
}

}  // namespace

void sample_package(double h, int noise_dim, IntegralMode mode,
                    RandomStream& stream, WienerPackage& out, int levy_terms) {
    if (!(h > 0.0)) throw std::invalid_argument("sample_package: step size must be positive");
    if (noise_dim < 1) throw std::invalid_argument("sample_package: noise dimension must be >= 1");

    out.resize(noise_dim);
    out.h = h;

    const double sqrt_h = std::sqrt(h);
    for (int r = 0; r < noise_dim; ++r) out.dW[r] = sqrt_h * stream.normal();

    // dZ_r = (h/2)(dW_r + eta_r), eta_r ~ N(0, h/3), which realises the
    // joint law Var(dZ) = h^3/3, Cov(dZ, dW) = h^2/2.
    const double sqrt_h3 = std::sqrt(h / 3.0);
    for (int r = 0; r < noise_dim; ++r) {
        const double eta = sqrt_h3 * stream.normal();
        out.dZ[r] = 0.5 * h * (out.dW[r] + eta);
    }

    for (int r = 0; r < noise_dim; ++r) out.dI(r, r) = 0.5 * (out.dW[r] * out.dW[r] - h);

    if (noise_dim == 1) return;

    if (mode == IntegralMode::weak_substitute) {
        // I_(r1,r) -> (dW_r1 dW_r - V_(r1,r))/2 with V antisymmetric and
        // V_(r1,r) = +-h equiprobably for r1 < r.
        for (int r1 = 0; r1 < noise_dim; ++r1) {
            for (int r2 = r1 + 1; r2 < noise_dim; ++r2) {
                const double v = h * stream.sign();
                const double prod = out.dW[r1] * out.dW[r2];
                out.dI(r1, r2) = 0.5 * (prod - v);
                out.dI(r2, r1) = 0.5 * (prod + v);
            }
        }
        return;
    }

    // Truncated Fourier expansion of the Levy area A_(r1,r):
    //   A = h sqrt(rho_p) (mu_r1 xi_r2 - mu_r2 xi_r1)
    //     + (h/2pi) sum_k (1/k) [zeta_k,r1 (sqrt2 xi_r2 + eta_k,r2)
    //                            - zeta_k,r2 (sqrt2 xi_r1 + eta_k,r1)]
    // with xi_r = dW_r / sqrt(h); then I_(r1,r) = dW_r1 dW_r / 2 + A.
    Eigen::VectorXd xi = out.dW / sqrt_h;
    Eigen::MatrixXd area = Eigen::MatrixXd::Zero(noise_dim, noise_dim);
    Eigen::VectorXd zeta(noise_dim), eta(noise_dim);
    for (int k = 1; k <= levy_terms; ++k) {
        for (int r = 0; r < noise_dim; ++r) zeta[r] = stream.normal();
        for (int r = 0; r < noise_dim; ++r) eta[r] = stream.normal();
        const double coeff = h / (2.0 * std::numbers::pi * k);
        for (int r1 = 0; r1 < noise_dim; ++r1) {
            for (int r2 = r1 + 1; r2 < noise_dim; ++r2) {
                area(r1, r2) += coeff * (zeta[r1] * (std::numbers::sqrt2 * xi[r2] + eta[r2]) -
                                         zeta[r2] * (std::numbers::sqrt2 * xi[r1] + eta[r1]));
            }
        }
    }
    const double tail = std::sqrt(levy_tail_rho(levy_terms));
    Eigen::VectorXd mu(noise_dim);
    for (int r = 0; r < noise_dim; ++r) mu[r] = stream.normal();
    for (int r1 = 0; r1 < noise_dim; ++r1) {
        for (int r2 = r1 + 1; r2 < noise_dim; ++r2) {
            const double a = area(r1, r2) + h * tail * (mu[r1] * xi[r2] - mu[r2] * xi[r1]);
            const double prod = 0.5 * out.dW[r1] * out.dW[r2];
            out.dI(r1, r2) = prod + a;
            out.dI(r2, r1) = prod - a;
        }
    }
}

WienerPackage sample_package(double h, int noise_dim, IntegralMode mode,
                             RandomStream& stream, int levy_terms) {
    WienerPackage pkg;
    sample_package(h, noise_dim, mode, stream, pkg, levy_terms);
    return pkg;
}

}  // namespace sdelab
