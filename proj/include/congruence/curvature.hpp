#pragma once

#include <vector>

#include "congruence/surface.hpp"
#include "congruence/tensor.hpp"

namespace congruence {

// Index convention, fixed so that the unit round n-sphere comes out with
// R(x,y,y,x) = g(x,x)g(y,y) - g(x,y)^2, S = (n-1) g and tau = n(n-1):
//   riemann(i,j,k,l) = < R(e_i,e_j) e_k , e_l >,
//   ricci(j,k)       = g^{il} riemann(i,j,k,l).

// Derivative jets of the induced metric and everything built from it,
// evaluated at one chart point with exact symbolic immersion derivatives.
// depth = number of derivative orders of g that are populated:
//   1 -> gamma;  2 -> riemann/ricci/tau;  3 -> their first derivatives.
struct MetricJets {
    int n = 0;
    int depth = 0;
    MatrixXd g, ginv;
    std::vector<MatrixXd> dg, dginv;
    std::vector<MatrixXd> d2g, d2ginv;  // indexed by SymIndex::idx2
    std::vector<MatrixXd> d3g;          // indexed by SymIndex::idx3
    std::vector<MatrixXd> gamma;                  // gamma[k](i,j) = Gamma^k_ij
    std::vector<std::vector<MatrixXd>> dgamma;    // [q][k](i,j)
    std::vector<std::vector<MatrixXd>> d2gamma;   // [idx2(q,r)][k](i,j)
    Tensor4 riemann;
    std::vector<Tensor4> driemann;  // [q]
    MatrixXd ricci;
    std::vector<MatrixXd> dricci;
    double tau = 0.0;
    VectorXd dtau;
    const SymIndex* sym = nullptr;
};

MetricJets metric_jets(const AmbientSpace& space, const FrameJet& jet, int depth);

enum class RiemannMethod { Intrinsic, Gauss };

struct CurvatureOptions {
    bool with_gauss = true;   // Gauss-equation route and sign resolution
    bool with_weyl = true;    // Weyl tensor (n >= 3)
    bool with_cotton = true;  // n = 3 conformal-flatness tensor (order-4 jets)
};

struct CurvaturePack {
    VectorXd u;
    PointGeometry pg;
    MetricJets jets;
    Tensor4 riemann;        // intrinsic
    Tensor4 riemann_gauss;  // gauss_sign * (h ^ h), when requested
    double gauss_sign = 1.0;
    bool gauss_sign_determinate = false;
    MatrixXd ricci;
    double tau = 0.0;
    Tensor4 weyl;     // n >= 3
    Tensor3 cotton3;  // n = 3 only
    double floor = 0.0;  // scale floor 1e-12 (1 + ||g||^4) for ratio tests
};

CurvaturePack curvature_pack(const ImmersionPatch& patch, const VectorXd& u,
                             const CurvatureOptions& opts = {},
                             const SurfaceTolerances& tol = {});

std::vector<MatrixXd> christoffel(const ImmersionPatch& patch, const VectorXd& u,
                                  const SurfaceTolerances& tol = {});

Tensor4 riemann(const ImmersionPatch& patch, const VectorXd& u, RiemannMethod method,
                const SurfaceTolerances& tol = {});

// S(j,k) = g^{il} R(i,j,k,l), tau = g^{jk} S(j,k)
std::pair<MatrixXd, double> ricci_scalar(const Tensor4& riemann, const MatrixXd& g_inv);

// phi(T)(x,y,z,u) = g(x,u)T(y,z) - g(x,z)T(y,u) + g(y,z)T(x,u) - g(y,u)T(x,z)
Tensor4 phi_op(const MatrixXd& T, const MatrixXd& g);

Tensor4 pi1_op(const MatrixXd& g);  // (1/2) phi(g)

Tensor4 weyl_tensor(const Tensor4& riemann, const MatrixXd& ricci, double tau,
                    const MatrixXd& g);

struct CodazziReport {
    Tensor3 residual;  // (nabla_i h)(j,k) - (nabla_j h)(i,k)
    double scale;      // magnitude of the terms that cancel
};

CodazziReport codazzi_residual(const ImmersionPatch& patch, const VectorXd& u,
                               const SurfaceTolerances& tol = {});

enum class FlatnessVerdict { ConformallyFlat, NotConformallyFlat, Indeterminate };

const char* to_string(FlatnessVerdict v);

struct FlatnessReport {
    FlatnessVerdict verdict;
    double max_ratio = 0.0;   // max over grid of ||test|| / max(||R||, floor)
    VectorXd worst_u;
    double tol = 0.0;
    bool used_cotton = false;  // n = 3 path
};

FlatnessReport conformal_flatness(const ImmersionPatch& patch, const GridSpec& grid,
                                  double tol, const SurfaceTolerances& stol = {});

double ratio_floor(const MatrixXd& g);

}  // namespace congruence
