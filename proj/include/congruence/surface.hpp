#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "congruence/ambient.hpp"
#include "congruence/expr.hpp"
#include "congruence/grid.hpp"
#include "congruence/scene.hpp"

namespace congruence {

// Rank lookup for symmetric multi-indices of order 2..4 over n chart variables.
// Rank arrays are filled for every permutation, so accessors take indices in
// any order.
struct SymIndex {
    int n = 0;
    int s2 = 0, s3 = 0, s4 = 0;
    std::vector<int> r2, r3, r4;

    SymIndex() = default;
    explicit SymIndex(int n_);

    int idx2(int i, int j) const { return r2[static_cast<std::size_t>(i * n + j)]; }
    int idx3(int i, int j, int k) const {
        return r3[static_cast<std::size_t>((i * n + j) * n + k)];
    }
    int idx4(int i, int j, int k, int l) const {
        return r4[static_cast<std::size_t>(((i * n + j) * n + k) * n + l)];
    }
};

// Values of the immersion and its partial derivatives at one chart point.
struct FrameJet {
    int n = 0, m = 0;  // chart dim, ambient dim
    int order = 0;
    VectorXd f;        // m
    MatrixXd d1;       // m x n
    std::vector<double> d2;  // m * s2
    std::vector<double> d3;  // m * s3
    std::vector<double> d4;  // m * s4
    const SymIndex* sym = nullptr;

    double d2v(int a, int i, int j) const { return d2[static_cast<std::size_t>(a) * sym->s2 + sym->idx2(i, j)]; }
    double d3v(int a, int i, int j, int k) const { return d3[static_cast<std::size_t>(a) * sym->s3 + sym->idx3(i, j, k)]; }
    double d4v(int a, int i, int j, int k, int l) const { return d4[static_cast<std::size_t>(a) * sym->s4 + sym->idx4(i, j, k, l)]; }
};

// A chart patch of a hypersurface: expression components together with exact
// symbolic derivatives up to order 4, computed once at construction.
class ImmersionPatch {
public:
    ImmersionPatch(AmbientSpace space, const SurfaceDef& def);

    const AmbientSpace& space() const { return space_; }
    const std::string& name() const { return name_; }
    int chart_dim() const { return n_; }
    int ambient_dim() const { return m_; }
    const std::vector<std::string>& vars() const { return vars_; }
    const std::vector<std::pair<double, double>>& domain() const { return domain_; }
    const SymIndex& sym() const { return sym_; }
    const std::vector<Expr>& components() const { return components_; }

    GridSpec grid(int per_axis) const { return GridSpec(domain_, per_axis); }

    FrameJet jet(const VectorXd& u, int order) const;

private:
    AmbientSpace space_;
    std::string name_;
    int n_, m_;
    std::vector<std::string> vars_;
    std::vector<std::pair<double, double>> domain_;
    std::vector<Expr> components_;
    SymIndex sym_;
    std::vector<Expr> d1_, d2_, d3_, d4_;  // component-major blocks
};

// Per-point extrinsic data bundle.
struct PointGeometry {
    VectorXd u;
    FrameJet jet;        // order >= 2
    MatrixXd g, g_inv;
    double det_g = 0.0;
    VectorXd normal;     // ambient coordinates, eta-unit
    double eps_normal = 1.0;  // eta(N, N)
    MatrixXd h;          // second fundamental form
    MatrixXd B;          // traceless part h - (tr_h/n) g
    double tr_h = 0.0;   // g-trace of h
};

struct SurfaceTolerances {
    double degenerate_metric = 1e-10;  // |det g| <= tol * (1+||g||_inf)^n fails
    double isotropic = 1e-10;          // relative isotropy threshold
};

MatrixXd induced_metric(const ImmersionPatch& patch, const VectorXd& u,
                        const SurfaceTolerances& tol = {});

std::pair<VectorXd, double> unit_normal(const ImmersionPatch& patch, const VectorXd& u,
                                        const SurfaceTolerances& tol = {});

MatrixXd second_fundamental_form(const ImmersionPatch& patch, const VectorXd& u,
                                 const SurfaceTolerances& tol = {});

// Full bundle; jet_order >= 2 controls how many derivative orders are kept.
PointGeometry point_geometry(const ImmersionPatch& patch, const VectorXd& u,
                             int jet_order = 2, const SurfaceTolerances& tol = {});

// true iff x is numerically isotropic for the quadratic form g
bool chart_isotropic(const MatrixXd& g, const VectorXd& x, double tol = 1e-10);

// K_h(x) = h(x,x) / g(x,x); throws on isotropic or zero x.
double bending(const PointGeometry& pg, const VectorXd& x,
               const SurfaceTolerances& tol = {});

}  // namespace congruence
