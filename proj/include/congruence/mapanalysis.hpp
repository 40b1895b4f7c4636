#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "congruence/classify.hpp"
#include "congruence/curvature.hpp"
#include "congruence/scene.hpp"

namespace congruence {

// Chart-level diffeomorphism between two patches, with exact rule derivatives
// to order 2. The Jacobian must be invertible wherever it is evaluated.
class PatchMap {
public:
    PatchMap(const ImmersionPatch& source, const ImmersionPatch& target, const MapDef& def);

    const ImmersionPatch& source() const { return *source_; }
    const ImmersionPatch& target() const { return *target_; }
    const std::string& name() const { return name_; }

    VectorXd apply(const VectorXd& u) const;
    MatrixXd jacobian(const VectorXd& u) const;                    // dF
    double rule_d2(int comp, int i, int j, const VectorXd& u) const;

private:
    const ImmersionPatch* source_;
    const ImmersionPatch* target_;
    std::string name_;
    std::vector<Expr> rule_;
    std::vector<Expr> d1_, d2_;
    SymIndex sym_;
};

struct AnalysisConfig {
    int grid_geometry = 5;
    int grid_profile = 9;
    std::uint64_t seed = 0;
    double tol_scale = 1.0;  // multiplies every default tolerance below
    std::optional<VectorXd> point_p;  // designated point for the local theorem

    double profile_tol() const { return 1e-7 * tol_scale; }
    double verdict_tol() const { return 1e-6 * tol_scale; }
    double motion_tol() const { return 1e-6 * tol_scale; }
    double classify_tol() const { return 1e-6 * tol_scale; }
    double flatness_tol() const { return 1e-6 * tol_scale; }
    double identity_tol() const { return 1e-6 * tol_scale; }
    double isolimit_tol() const { return 1e-6 * tol_scale; }
};

struct ProfilePoint {
    VectorXd u, Fu;
    MatrixXd jac;
    MatrixXd g, g_inv, h;      // source geometry
    MatrixXd pb_gbar;          // f* gbar
    MatrixXd pb_hbar;          // f* hbar with the chosen target orientation
    int hbar_orientation = 1;  // sign applied to the target's rule-oriented normal
    double c = 0.0;            // proportionality factor of f* gbar = c g
    double sigma = 0.0;        // (1/2) log |c|
    double lambda = 0.0;
    double residual_conformal = 0.0;
    double residual_lemma3b = 0.0;
    double scale = 0.0;        // ||h||_inf + ||g||_inf
    // grid-fitted derivative fields
    VectorXd dsigma, dlambda;  // covectors d_i sigma, d_i lambda
    MatrixXd hess_sigma;
    VectorXd grad_sigma;       // g^{ij} d_j sigma
    double grad_sigma_norm2 = 0.0;  // g(grad sigma, grad sigma)
    MatrixXd Q;                // X sigma Y sigma - Hess sigma - (1/2)||grad||^2 g
    double residual_21 = 0.0;  // max |(2.1)| / scale
    double residual_22 = 0.0;  // max |(2.2)| / scale
};

struct ConformalProfile {
    explicit ConformalProfile(GridSpec g) : grid(std::move(g)) {}

    GridSpec grid;
    std::vector<ProfilePoint> points;
    bool conformal = false;
    int eps = 1;
    std::string failure;   // "not_conformal" | "sign_flip" when !conformal
    VectorXd witness_u;    // worst point when not conformal
    double worst_residual = 0.0;

    // summaries over the grid
    double sigma_mean = 0.0, sigma_spread = 0.0;
    double max_abs_lambda = 0.0;
    double max_residual_conformal = 0.0;
    double max_residual_lemma3b = 0.0;
    double max_residual_21 = 0.0, max_residual_22 = 0.0;
    double max_grad_sigma_norm = 0.0;
};

MatrixXd pullback_metric(const PatchMap& map, const VectorXd& u,
                         const SurfaceTolerances& tol = {});

ConformalProfile conformal_extract(const PatchMap& map, const GridSpec& grid, double tol,
                                   const SurfaceTolerances& stol = {});

struct LambdaResult {
    double lambda = 0.0;
    double residual = 0.0;
    int orientation = 1;
};

// f* hbar = eps e^{2 sigma} (h + lambda g): extracts lambda for both target
// orientations and keeps the consistent one (ties broken toward smaller
// |lambda|, the compatible-orientation reading).
LambdaResult lambda_extract(const PatchMap& map, const VectorXd& u, int eps, double sigma,
                            const SurfaceTolerances& tol = {});

struct BendingReport {
    int evaluated = 0;
    int skipped = 0;
    double max_deviation = 0.0;  // max |Kbar(f_* x) - K(x)|
    double lambda_abs = 0.0;     // profile prediction for the deviation
};

BendingReport check_bending_eq(const PatchMap& map, const ProfilePoint& pp, int samples,
                               double iso_tol, std::uint64_t seed);

struct IsoLimitReport {
    bool skipped = false;
    std::string reason;
    double limit = 0.0;
    double limit_error = 0.0;  // |limit - 1|
    double pointwise_identity_residual = 0.0;  // (f*hbar)(xi,xi) vs eps e^{2s} h(xi,xi)
    int points_used = 0;
};

IsoLimitReport check_isotropic_limit(const PatchMap& map, const ProfilePoint& pp,
                                     const VectorXd& xi, double precondition_tol = 1e-8);

// Extrapolation core on plain quadratic forms, so the ratio algebra can be
// exercised without a scene behind it.
IsoLimitReport bending_ratio_limit(const MatrixXd& g, const MatrixXd& h,
                                   const MatrixXd& gbar, const MatrixXd& hbar,
                                   const VectorXd& xi, const VectorXd& v);

struct Lemma3dReport {
    double max_residual_21 = 0.0;
    double max_residual_22 = 0.0;
};

Lemma3dReport lemma3d_residuals(const ConformalProfile& profile);

struct Lemma4Report {
    int U_count = 0;          // points with grad sigma nonzero but null
    int violations = 0;       // U-points that are generic or have R != 0
    bool consistent = true;
};

Lemma4Report lemma4_diagnostic(const ConformalProfile& profile,
                               const std::vector<PointKind>& kinds,
                               const std::vector<double>& riemann_norms,
                               double tol);

struct MotionFit {
    Motion motion;
    double fit_residual = 0.0;  // max eta-norm point mismatch
    double ortho_defect = 0.0;  // ||A^T eta A - eta||_inf
};

MotionFit fit_motion(const PatchMap& map, const std::vector<VectorXd>& sample_points);

enum class VerdictKind {
    Congruence,
    IsometryNotExtended,
    ConformalOnly,
    NotConformal,
    HypothesesUnmet,
};

const char* to_string(VerdictKind v);

struct CongruenceVerdict {
    VerdictKind kind = VerdictKind::HypothesesUnmet;
    std::string reason;
    Motion motion;
    double fit_residual = -1.0;
    double ortho_defect = -1.0;
    bool subtest_passed = false;  // sigma = 0, eps = +1, lambda = 0 gates
    std::string theorem_branch;   // "theorem1" | "theorem2" | "none"
    std::vector<int> component;   // theorem2: grid indices of the neighbourhood V
    std::optional<ConformalProfile> profile;
    DensityReport density;
    FlatnessReport flatness{};
    double max_riemann_norm = 0.0;
};

CongruenceVerdict decide_congruence(const SceneModel& scene, const std::string& map_name,
                                    const AnalysisConfig& config);

CongruenceVerdict decide_congruence(const PatchMap& map, const AnalysisConfig& config);

struct IdentityResiduals {
    std::vector<double> res_12;     // per profile point, / max(||R||, floor)
    std::vector<double> res_3c;
    std::vector<bool> lemma3b_ok;   // whether the lemma's premise holds there
    double max_12 = 0.0;
    double max_3c_applicable = 0.0;
    int applicable_count = 0;
};

// Checkable forms of the conformal curvature law and of the lemma relating
// f*Rbar to R + lambda phi(h) + lambda^2 pi1 (the latter gated on the
// second-fundamental-form law holding at the point).
IdentityResiduals conformal_identity_residuals(const PatchMap& map,
                                               const ConformalProfile& profile,
                                               double lemma3b_gate);

}  // namespace congruence
