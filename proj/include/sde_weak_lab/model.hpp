#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace sdelab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// An autonomous Ito SDE  dX = f(X) dt + g(X) dW  on R^d with m-dimensional
/// noise, together with the closed-form derivatives the second-order scheme
/// needs and the growth/moment metadata consumed by the order predictor.
///
/// Coefficient callbacks write into caller-owned storage and must be pure;
/// a constructed problem is immutable and safe to share across trajectory
/// workers.
struct SdeProblem {
    int dim = 1;        // state dimension d
    int noise_dim = 1;  // Wiener dimension m

    /// f(x) -> out (d)
    std::function<void(const Vec&, Vec&)> drift;
    /// g(x) -> out (d x m); column r is the coefficient of dW_r
    std::function<void(const Vec&, Mat&)> diffusion;
    /// Df(x) -> out (d x d), out(i,j) = d f_i / d x_j
    std::function<void(const Vec&, Mat&)> drift_jacobian;
    /// Hessians of the drift components: out[i](j,k) = d^2 f_i / dx_j dx_k
    std::function<void(const Vec&, std::vector<Mat>&)> drift_hessian;
    /// Jacobian per noise column: out[r](i,j) = d g_(i,r) / d x_j
    std::function<void(const Vec&, std::vector<Mat>&)> diffusion_jacobian;
    /// Hessian per column and component: out[r][i](j,k) = d^2 g_(i,r) / dx_j dx_k
    std::function<void(const Vec&, std::vector<std::vector<Mat>>&)> diffusion_hessian;

    // Growth and moment metadata. These are declared per problem, never
    // inferred from samples.
    double growth_r = 0.0;    // drift growth exponent: |f| <= C(1+|x|^(2r+1))
    double growth_rho = 0.0;  // diffusion growth exponent: |g| <= C(1+|x|^rho)
    double p0 = std::numeric_limits<double>::infinity();
    double p0_prime = std::numeric_limits<double>::infinity();
    double epsilon_slack = 0.0;  // slack in the monotonicity bound; 0 when g(0)=0
    double c_p0 = std::numeric_limits<double>::quiet_NaN();  // documentation only

    std::string name;
};

/// Values of the Ito-Taylor operators at one state:
///   Lambda_r  = sum_i g_(i,r) d/dx_i
///   L         = f^T d/dx + (1/2) sum_r sum_ij g_(i,r) g_(j,r) d^2/dx_i dx_j
/// lambda_g[r1*m + r] = Lambda_r1 g^r, L_g[r] = L g^r, lambda_f[r] = Lambda_r f.
struct OperatorValues {
    std::vector<Vec> lambda_g;  // m*m entries, each length d
    std::vector<Vec> L_g;       // m entries
    std::vector<Vec> lambda_f;  // m entries
    Vec L_f;                    // length d

    void resize(int dim, int noise_dim);
};

/// Scratch storage for one operator evaluation; reuse across steps to keep
/// the integrators allocation-free.
struct OperatorWorkspace {
    Vec f;
    Mat g;
    Mat df;
    std::vector<Mat> hess_f;
    std::vector<Mat> jac_g;
    std::vector<std::vector<Mat>> hess_g;

    void resize(int dim, int noise_dim);
};

/// Evaluates all operator values at x. Throws std::domain_error when x has
/// a non-finite entry. `ws.f` and `ws.g` hold f(x) and g(x) on return.
void eval_operators(const SdeProblem& problem, const Vec& x,
                    OperatorWorkspace& ws, OperatorValues& out);

/// Allocating convenience overload.
OperatorValues eval_operators(const SdeProblem& problem, const Vec& x);

/// Built-in example problems, selected by name:
///   cubic_linear     dX = (X - X^3) dt + X dW
///   cubic_quadratic  dX = (X - X^3) dt + sigma X^2 dW   (needs params["sigma"])
///   cubic quadratic declares p0 = 3/(2 sigma^2) + 1 and p0' = 2/sigma^2 + 1.
///   fhn              2-d stochastic FitzHugh-Nagumo with additive-affine
///                    diagonal noise diag(X1+1, X2+1)
/// For cubic_linear and fhn the highest bounded moment order is unconstrained;
/// it is stored as params["p_large"] (default 1e6), which downstream code
/// treats as effectively infinite.
SdeProblem builtin_problem(const std::string& name,
                           const std::map<std::string, double>& params = {});

/// Moment order treated as "effectively infinite" by the predictor.
inline constexpr double kEffectivelyInfiniteMoment = 1e5;

}  // namespace sdelab
