#pragma once

#include <Eigen/Dense>

#include "sde_weak_lab/random.hpp"

namespace sdelab {

/// How the off-diagonal double Wiener integrals I_(r1,r) are produced.
/// `weak_substitute` replaces them by (dW_r1 dW_r - V)/2 with an
/// antisymmetric +-h coin flip V, which preserves all moments needed for
/// weak order two. `exact_gaussian` uses a truncated Fourier expansion of
/// the Levy area and is meant for strong-path diagnostics.
enum class IntegralMode { exact_gaussian, weak_substitute };

/// Joint sample of the Wiener increments and iterated integrals over one
/// step of size h:
///   dW[r]    ~ N(0, h)
///   dZ[r]    = int int dW_r(s1) ds,   Var = h^3/3, Cov(dZ,dW) = h^2/2
///   dI(r1,r) = int int dW_r1(s1) dW_r(s); the diagonal is exact,
///              dI(r,r) = (dW[r]^2 - h)/2.
struct WienerPackage {
    Eigen::VectorXd dW;
    Eigen::VectorXd dZ;
    Eigen::MatrixXd dI;
    double h = 0.0;

    void resize(int noise_dim) {
        if (dW.size() != noise_dim) {
            dW.resize(noise_dim);
            dZ.resize(noise_dim);
            dI.resize(noise_dim, noise_dim);
        }
    }

    void set_zero() {
        dW.setZero();
        dZ.setZero();
        dI.setZero();
    }
};

/// Number of Fourier modes retained in exact_gaussian mode.
inline constexpr int kLevyFourierTerms = 10;

/// Draws one package from `stream`. The draw order is fixed (all dW, then
/// the dZ companions, then the off-diagonal terms) so that a given stream
/// position always yields the same package.
void sample_package(double h, int noise_dim, IntegralMode mode,
                    RandomStream& stream, WienerPackage& out,
                    int levy_terms = kLevyFourierTerms);

/// Allocating convenience overload.
WienerPackage sample_package(double h, int noise_dim, IntegralMode mode,
                             RandomStream& stream,
                             int levy_terms = kLevyFourierTerms);

}  // namespace sdelab
