#include "congruence/mapanalysis.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <deque>

#include "congruence/rng.hpp"

namespace congruence {

PatchMap::PatchMap(const ImmersionPatch& source, const ImmersionPatch& target,
                   const MapDef& def)
    : source_(&source), target_(&target), name_(def.name), rule_(def.rule),
      sym_(source.chart_dim()) {
    const int n = source.chart_dim();
    if (static_cast<int>(rule_.size()) != target.chart_dim())
        throw GeometryError("map rule arity does not match target chart");
    d1_.resize(rule_.size() * static_cast<std::size_t>(n));
    d2_.resize(rule_.size() * static_cast<std::size_t>(sym_.s2));
    for (std::size_t c = 0; c < rule_.size(); ++c) {
        for (int i = 0; i < n; ++i) d1_[c * n + i] = rule_[c].differentiate(i);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j)
                d2_[c * sym_.s2 + sym_.idx2(i, j)] = d1_[c * n + i].differentiate(j);
    }
}

VectorXd PatchMap::apply(const VectorXd& u) const {
    const std::span<const double> env(u.data(), static_cast<std::size_t>(u.size()));
    VectorXd out(static_cast<Eigen::Index>(rule_.size()));
    for (std::size_t c = 0; c < rule_.size(); ++c) out[static_cast<Eigen::Index>(c)] = rule_[c].evaluate(env);
    return out;
}

MatrixXd PatchMap::jacobian(const VectorXd& u) const {
    const int n = source_->chart_dim();
    const std::span<const double> env(u.data(), static_cast<std::size_t>(u.size()));
    MatrixXd J(static_cast<Eigen::Index>(rule_.size()), n);
    for (std::size_t c = 0; c < rule_.size(); ++c)
        for (int i = 0; i < n; ++i)
            J(static_cast<Eigen::Index>(c), i) = d1_[c * n + i].evaluate(env);
    return J;
}

double PatchMap::rule_d2(int comp, int i, int j, const VectorXd& u) const {
    const std::span<const double> env(u.data(), static_cast<std::size_t>(u.size()));
    return d2_[static_cast<std::size_t>(comp) * sym_.s2 + sym_.idx2(i, j)].evaluate(env);
}

MatrixXd pullback_metric(const PatchMap& map, const VectorXd& u, const SurfaceTolerances& tol) {
    const MatrixXd J = map.jacobian(u);
    const MatrixXd gbar = induced_metric(map.target(), map.apply(u), tol);
    return J.transpose() * gbar * J;
}

namespace {

double frob(const MatrixXd& m) { return m.norm(); }

struct LambdaChoice {
    double lambda;
    double residual;
    int orientation;
};

LambdaChoice pick_lambda(const MatrixXd& g_inv, const MatrixXd& g, const MatrixXd& h,
                         const MatrixXd& pb_hbar_rule_oriented, int eps, double sigma,
                         double tie_tol) {
    const int n = static_cast<int>(g.rows());
    const double e2s = std::exp(-2.0 * sigma) * eps;
    const double scale = std::abs(e2s) * frob(pb_hbar_rule_oriented) + frob(h) + 1e-300;
    LambdaChoice best{0.0, std::numeric_limits<double>::infinity(), 1};
    bool best_ok = false;
    for (int o : {1, -1}) {
        const MatrixXd P = e2s * (o * pb_hbar_rule_oriented) - h;
        const double lam = (g_inv * P).trace() / n;
        const double res = frob(P - lam * g) / scale;
        const bool ok = res <= tie_tol;
        // prefer a consistent orientation; among consistent ones the one with
        // smaller |lambda| (the compatible-orientation reading)
        bool take;
        if (ok && best_ok)
            take = std::abs(lam) < std::abs(best.lambda);
        else if (ok != best_ok)
            take = ok;
        else
            take = res < best.residual;
        if (take) {
            best = {lam, res, o};
            best_ok = ok;
        }
    }
    return best;
}

// Least-squares polynomial fit along one grid line; writes the fitted first
// and second derivative at every node of the line.
void fit_line_derivatives(const std::vector<double>& ts, const std::vector<double>& ys,
                          std::vector<double>& dy, std::vector<double>& d2y) {
    const int K = static_cast<int>(ts.size());
    const int degree = std::min(3, K - 1);
    const double t0 = ts[static_cast<std::size_t>(K / 2)];
    double span = std::abs(ts.back() - ts.front());
    if (!(span > 0)) span = 1.0;
    MatrixXd X(K, degree + 1);
    VectorXd y(K);
    for (int r = 0; r < K; ++r) {
        const double t = (ts[static_cast<std::size_t>(r)] - t0) / span;
        double p = 1.0;
        for (int c = 0; c <= degree; ++c) {
            X(r, c) = p;
            p *= t;
        }
        y[r] = ys[static_cast<std::size_t>(r)];
    }
    const VectorXd coef = X.colPivHouseholderQr().solve(y);
    dy.assign(static_cast<std::size_t>(K), 0.0);
    d2y.assign(static_cast<std::size_t>(K), 0.0);
    for (int r = 0; r < K; ++r) {
        const double t = (ts[static_cast<std::size_t>(r)] - t0) / span;
        double d1 = 0.0, d2 = 0.0;
        for (int c = 1; c <= degree; ++c) {
            d1 += coef[c] * c * std::pow(t, c - 1);
            if (c >= 2) d2 += coef[c] * c * (c - 1) * std::pow(t, c - 2);
        }
        dy[static_cast<std::size_t>(r)] = d1 / span;
        d2y[static_cast<std::size_t>(r)] = d2 / (span * span);
    }
}

// Per-axis cubic fits of a scalar grid field; gradient at every grid point,
// plus the pure second derivative along each axis.
void fit_scalar_field(const GridSpec& grid, const std::vector<double>& vals,
                      std::vector<VectorXd>& grad, std::vector<VectorXd>& pure_d2) {
    const int n = grid.axes();
    const int K = grid.per_axis();
    grad.assign(static_cast<std::size_t>(grid.total()), VectorXd::Zero(n));
    pure_d2.assign(static_cast<std::size_t>(grid.total()), VectorXd::Zero(n));
    std::vector<double> ts(static_cast<std::size_t>(K)), ys(static_cast<std::size_t>(K));
    std::vector<double> dy, d2y;
    for (int axis = 0; axis < n; ++axis) {
        for (int k = 0; k < K; ++k) ts[static_cast<std::size_t>(k)] = grid.coord(axis, k);
        for (int idx = 0; idx < grid.total(); ++idx) {
            if (grid.steps_of(idx)[static_cast<std::size_t>(axis)] != 0) continue;  // line anchors
            const std::vector<int> line = grid.line_through(idx, axis);
            for (int k = 0; k < K; ++k) ys[static_cast<std::size_t>(k)] = vals[static_cast<std::size_t>(line[static_cast<std::size_t>(k)])];
            fit_line_derivatives(ts, ys, dy, d2y);
            for (int k = 0; k < K; ++k) {
                grad[static_cast<std::size_t>(line[static_cast<std::size_t>(k)])][axis] = dy[static_cast<std::size_t>(k)];
                pure_d2[static_cast<std::size_t>(line[static_cast<std::size_t>(k)])][axis] = d2y[static_cast<std::size_t>(k)];
            }
        }
    }
}

}  // namespace

LambdaResult lambda_extract(const PatchMap& map, const VectorXd& u, int eps, double sigma,
                            const SurfaceTolerances& tol) {
    const PointGeometry src = point_geometry(map.source(), u, 2, tol);
    const PointGeometry dst = point_geometry(map.target(), map.apply(u), 2, tol);
    const MatrixXd J = map.jacobian(u);
    const MatrixXd pbh = J.transpose() * dst.h * J;
    const LambdaChoice c = pick_lambda(src.g_inv, src.g, src.h, pbh, eps, sigma, 1e-7);
    return {c.lambda, c.residual, c.orientation};
}

ConformalProfile conformal_extract(const PatchMap& map, const GridSpec& grid, double tol,
                                   const SurfaceTolerances& stol) {
    const ImmersionPatch& src = map.source();
    const int n = src.chart_dim();
    ConformalProfile profile(grid);
    profile.points.resize(static_cast<std::size_t>(grid.total()));

    double worst = 0.0;
    int worst_idx = 0;
    int eps_first = 0;
    bool eps_flip = false;

    for (int idx = 0; idx < grid.total(); ++idx) {
        ProfilePoint& pp = profile.points[static_cast<std::size_t>(idx)];
        pp.u = grid.point(idx);
        pp.Fu = map.apply(pp.u);
        pp.jac = map.jacobian(pp.u);
        const double detj = pp.jac.determinant();
        const double jscale = std::max(1.0, pp.jac.cwiseAbs().maxCoeff());
        if (std::abs(detj) <= 1e-10 * std::pow(jscale, n))
            throw GeometryError("map '" + map.name() + "' has a singular Jacobian on the grid");

        const PointGeometry spg = point_geometry(src, pp.u, 2, stol);
        const PointGeometry tpg = point_geometry(map.target(), pp.Fu, 2, stol);
        pp.g = spg.g;
        pp.g_inv = spg.g_inv;
        pp.h = spg.h;
        pp.scale = spg.h.cwiseAbs().maxCoeff() + spg.g.cwiseAbs().maxCoeff();
        pp.pb_gbar = pp.jac.transpose() * tpg.g * pp.jac;

        pp.c = (pp.g_inv * pp.pb_gbar).trace() / n;
        const double pb_norm = std::max(frob(pp.pb_gbar), 1e-300);
        pp.residual_conformal = frob(pp.pb_gbar - pp.c * pp.g) / pb_norm;
        const double floor_c = 1e-12 * (1.0 + pp.g.cwiseAbs().maxCoeff());
        if (std::abs(pp.c) <= floor_c) pp.residual_conformal = 1.0;
        pp.sigma = 0.5 * std::log(std::max(std::abs(pp.c), 1e-300));

        const int eps_pt = pp.c >= 0 ? 1 : -1;
        if (eps_first == 0) eps_first = eps_pt;
        else if (eps_pt != eps_first) eps_flip = true;

        const MatrixXd pbh = pp.jac.transpose() * tpg.h * pp.jac;
        const LambdaChoice lc = pick_lambda(pp.g_inv, pp.g, pp.h, pbh, eps_pt, pp.sigma, tol);
        pp.lambda = lc.lambda;
        pp.residual_lemma3b = lc.residual;
        pp.hbar_orientation = lc.orientation;
        pp.pb_hbar = lc.orientation * pbh;

        if (pp.residual_conformal > worst) {
            worst = pp.residual_conformal;
            worst_idx = idx;
        }
    }

    profile.eps = eps_first == 0 ? 1 : eps_first;
    profile.worst_residual = worst;
    if (worst > tol) {
        profile.conformal = false;
        profile.failure = "not_conformal";
        profile.witness_u = profile.points[static_cast<std::size_t>(worst_idx)].u;
        return profile;
    }
    if (eps_flip) {
        profile.conformal = false;
        profile.failure = "sign_flip";
        profile.witness_u = profile.points[static_cast<std::size_t>(worst_idx)].u;
        return profile;
    }
    profile.conformal = true;

    // sigma / lambda derivative fields from per-axis cubic fits
    std::vector<double> sig(static_cast<std::size_t>(grid.total())), lam(static_cast<std::size_t>(grid.total()));
    for (int idx = 0; idx < grid.total(); ++idx) {
        sig[static_cast<std::size_t>(idx)] = profile.points[static_cast<std::size_t>(idx)].sigma;
        lam[static_cast<std::size_t>(idx)] = profile.points[static_cast<std::size_t>(idx)].lambda;
    }
    std::vector<VectorXd> dsig, d2sig_pure, dlam, d2lam_pure;
    fit_scalar_field(grid, sig, dsig, d2sig_pure);
    fit_scalar_field(grid, lam, dlam, d2lam_pure);

    // mixed second derivatives: fit the gradient components, symmetrized
    std::vector<std::vector<VectorXd>> dsig_grad(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        std::vector<double> comp(static_cast<std::size_t>(grid.total()));
        for (int idx = 0; idx < grid.total(); ++idx) comp[static_cast<std::size_t>(idx)] = dsig[static_cast<std::size_t>(idx)][a];
        std::vector<VectorXd> unused;
        fit_scalar_field(grid, comp, dsig_grad[static_cast<std::size_t>(a)], unused);
    }

    double sig_min = sig[0], sig_max = sig[0], sig_sum = 0.0;

    for (int idx = 0; idx < grid.total(); ++idx) {
        ProfilePoint& pp = profile.points[static_cast<std::size_t>(idx)];
        pp.dsigma = dsig[static_cast<std::size_t>(idx)];
        pp.dlambda = dlam[static_cast<std::size_t>(idx)];
        pp.hess_sigma = MatrixXd::Zero(n, n);
        for (int a = 0; a < n; ++a) {
            pp.hess_sigma(a, a) = d2sig_pure[static_cast<std::size_t>(idx)][a];
            for (int b = a + 1; b < n; ++b) {
                const double mixed = 0.5 * (dsig_grad[static_cast<std::size_t>(a)][static_cast<std::size_t>(idx)][b] +
                                            dsig_grad[static_cast<std::size_t>(b)][static_cast<std::size_t>(idx)][a]);
                pp.hess_sigma(a, b) = mixed;
                pp.hess_sigma(b, a) = mixed;
            }
        }
        pp.grad_sigma = pp.g_inv * pp.dsigma;
        pp.grad_sigma_norm2 = pp.dsigma.dot(pp.grad_sigma);

        // Q(X,Y) = Xs Ys - Hess s(X,Y) - (1/2)||grad s||^2 g(X,Y),
        // Hess s(i,j) = d_i d_j s - Gamma^k_ij d_k s
        const MetricJets jets = metric_jets(src.space(),
                                            point_geometry(src, pp.u, 2, stol).jet, 1);
        pp.Q = MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double hess = pp.hess_sigma(i, j);
                for (int k = 0; k < n; ++k)
                    hess -= jets.gamma[static_cast<std::size_t>(k)](i, j) * pp.dsigma[k];
                pp.Q(i, j) = pp.dsigma[i] * pp.dsigma[j] - hess -
                             0.5 * pp.grad_sigma_norm2 * pp.g(i, j);
            }

        // Lemma 3 d residuals on the coordinate frame
        const double trh = (pp.g_inv * pp.h).trace();
        const MatrixXd B = pp.h - (trh / n) * pp.g;
        double t21 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double v = pp.dsigma[i] * B(j, k) - pp.dsigma[j] * B(i, k) +
                                     (pp.dlambda[i] * pp.g(j, k) - pp.dlambda[j] * pp.g(i, k)) / n;
                    t21 = std::max(t21, std::abs(v));
                }
        pp.residual_21 = t21 / pp.scale;
        double t22 = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = -((n - 1.0) / n) * pp.dlambda[j];
            for (int k = 0; k < n; ++k) v += B(j, k) * pp.grad_sigma[k];
            t22 = std::max(t22, std::abs(v));
        }
        pp.residual_22 = t22 / pp.scale;

        sig_min = std::min(sig_min, pp.sigma);
        sig_max = std::max(sig_max, pp.sigma);
        sig_sum += pp.sigma;

        profile.max_abs_lambda = std::max(profile.max_abs_lambda, std::abs(pp.lambda));
        profile.max_residual_conformal = std::max(profile.max_residual_conformal, pp.residual_conformal);
        profile.max_residual_lemma3b = std::max(profile.max_residual_lemma3b, pp.residual_lemma3b);
        profile.max_residual_21 = std::max(profile.max_residual_21, pp.residual_21);
        profile.max_residual_22 = std::max(profile.max_residual_22, pp.residual_22);
        profile.max_grad_sigma_norm = std::max(profile.max_grad_sigma_norm, pp.dsigma.cwiseAbs().maxCoeff());
    }
    profile.sigma_mean = sig_sum / grid.total();
    profile.sigma_spread = sig_max - sig_min;
    return profile;
}

BendingReport check_bending_eq(const PatchMap& map, const ProfilePoint& pp, int samples,
                               double iso_tol, std::uint64_t seed) {
    (void)map;
    const int n = static_cast<int>(pp.g.rows());
    Rng rng(seed);
    BendingReport rep;
    rep.lambda_abs = std::abs(pp.lambda);
    for (int s = 0; s < samples; ++s) {
        VectorXd x(n);
        for (int i = 0; i < n; ++i) x[i] = rng.normal();
        if (chart_isotropic(pp.g, x, iso_tol) || chart_isotropic(pp.pb_gbar, x, iso_tol)) {
            ++rep.skipped;
            continue;
        }
        const double K = x.dot(pp.h * x) / x.dot(pp.g * x);
        const double Kbar = x.dot(pp.pb_hbar * x) / x.dot(pp.pb_gbar * x);
        rep.max_deviation = std::max(rep.max_deviation, std::abs(Kbar - K));
        ++rep.evaluated;
    }
    return rep;
}

IsoLimitReport bending_ratio_limit(const MatrixXd& g, const MatrixXd& h,
                                   const MatrixXd& gbar, const MatrixXd& hbar,
                                   const VectorXd& xi, const VectorXd& v) {
    IsoLimitReport rep;
    const double hscale = std::max(1.0, h.cwiseAbs().maxCoeff());
    std::vector<std::pair<double, double>> pts;  // (t, ratio)
    for (int k = 4; k <= 12; ++k) {
        const double t = std::ldexp(1.0, -k);
        const VectorXd x = xi + t * v;
        const double qg = x.dot(g * x);
        const double qgbar = x.dot(gbar * x);
        if (std::abs(qg) <= 1e-14 * x.squaredNorm() || std::abs(qgbar) <= 1e-14 * x.squaredNorm())
            continue;
        const double K = x.dot(h * x) / qg;
        const double Kbar = x.dot(hbar * x) / qgbar;
        if (std::abs(K) <= 1e-13 * hscale) continue;
        pts.emplace_back(t, Kbar / K);
    }
    if (pts.size() < 6) {
        rep.skipped = true;
        rep.reason = "approach path degenerate (ratio undefined along x = xi + t v)";
        return rep;
    }
    // linear extrapolation t -> 0 from the last 4 usable terms
    const std::size_t m = pts.size();
    double st = 0, sr = 0, stt = 0, str = 0;
    for (std::size_t i = m - 4; i < m; ++i) {
        st += pts[i].first;
        sr += pts[i].second;
        stt += pts[i].first * pts[i].first;
        str += pts[i].first * pts[i].second;
    }
    const double denom = 4.0 * stt - st * st;
    rep.limit = (sr * stt - st * str) / denom;
    rep.limit_error = std::abs(rep.limit - 1.0);
    rep.points_used = static_cast<int>(m);
    return rep;
}

IsoLimitReport check_isotropic_limit(const PatchMap& map, const ProfilePoint& pp,
                                     const VectorXd& xi, double precondition_tol) {
    (void)map;
    IsoLimitReport rep;
    const double hxx = xi.dot(pp.h * xi);
    const double hscale = std::max(1.0, pp.h.cwiseAbs().maxCoeff()) * xi.squaredNorm();
    if (std::abs(hxx) <= precondition_tol * hscale) {
        rep.skipped = true;
        rep.reason = "h(xi,xi) = 0 within tolerance: ratio limit uninformative, point skipped";
        return rep;
    }
    // transversal direction: the coordinate axis with the largest |g(xi, e_j)|
    const VectorXd gxi = pp.g * xi;
    int jbest = 0;
    for (int j = 1; j < gxi.size(); ++j)
        if (std::abs(gxi[j]) > std::abs(gxi[jbest])) jbest = j;
    if (std::abs(gxi[jbest]) <= 1e-13 * xi.norm() * std::max(1.0, pp.g.cwiseAbs().maxCoeff())) {
        rep.skipped = true;
        rep.reason = "no transversal coordinate direction (g(xi, .) ~ 0)";
        return rep;
    }
    VectorXd v = VectorXd::Zero(gxi.size());
    v[jbest] = 1.0;

    rep = bending_ratio_limit(pp.g, pp.h, pp.pb_gbar, pp.pb_hbar, xi, v);
    if (rep.skipped) return rep;

    // pointwise identity used in the proof: (f*hbar)(xi,xi) = eps e^{2s} h(xi,xi)
    const double eps_e2s = (pp.c >= 0 ? 1.0 : -1.0) * std::exp(2.0 * pp.sigma);
    rep.pointwise_identity_residual =
        std::abs(xi.dot(pp.pb_hbar * xi) - eps_e2s * hxx) /
        (std::abs(eps_e2s) * hscale + 1e-300);
    return rep;
}

Lemma3dReport lemma3d_residuals(const ConformalProfile& profile) {
    Lemma3dReport rep;
    rep.max_residual_21 = profile.max_residual_21;
    rep.max_residual_22 = profile.max_residual_22;
    return rep;
}

Lemma4Report lemma4_diagnostic(const ConformalProfile& profile,
                               const std::vector<PointKind>& kinds,
                               const std::vector<double>& riemann_norms, double tol) {
    Lemma4Report rep;
    for (std::size_t i = 0; i < profile.points.size(); ++i) {
        const ProfilePoint& pp = profile.points[i];
        if (pp.dsigma.size() == 0) continue;
        const bool grad_nonzero = pp.dsigma.cwiseAbs().maxCoeff() > tol;
        const bool grad_null = std::abs(pp.grad_sigma_norm2) <= tol;
        if (!(grad_nonzero && grad_null)) continue;
        ++rep.U_count;
        const bool quasi = kinds[i] != PointKind::Generic;
        const bool flat = riemann_norms[i] <= tol * (1.0 + pp.scale * pp.scale);
        if (!quasi || !flat) {
            ++rep.violations;
            rep.consistent = false;
        }
    }
    return rep;
}

MotionFit fit_motion(const PatchMap& map, const std::vector<VectorXd>& sample_points) {
    const ImmersionPatch& src = map.source();
    const ImmersionPatch& dst = map.target();
    const AmbientSpace& space = src.space();
    const int m = space.dim_total;
    const int needed = (m + 1) * m;  // (n+2)(n+1) sample pairs
    if (static_cast<int>(sample_points.size()) < needed)
        throw GeometryError("fit_motion: need at least " + std::to_string(needed) +
                            " sample pairs, got " + std::to_string(sample_points.size()));

    const int rows = static_cast<int>(sample_points.size());
    MatrixXd X(rows, m + 1);
    MatrixXd Y(rows, m);
    for (int t = 0; t < rows; ++t) {
        const VectorXd p = src.jet(sample_points[static_cast<std::size_t>(t)], 0).f;
        const VectorXd q = dst.jet(map.apply(sample_points[static_cast<std::size_t>(t)]), 0).f;
        X.row(t).head(m) = p.transpose();
        X(t, m) = 1.0;
        Y.row(t) = q.transpose();
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(X);
    if (qr.rank() < m + 1)
        throw GeometryError("fit_motion: rank-deficient sample set (degenerate patch image)");
    const MatrixXd Z = qr.solve(Y);  // (m+1) x m, columns are rows of [A | b]

    MotionFit fit;
    fit.motion.linear = Z.topRows(m).transpose();
    fit.motion.translation = Z.row(m).transpose();
    for (int t = 0; t < rows; ++t) {
        const VectorXd d = fit.motion.linear * X.row(t).head(m).transpose() +
                           fit.motion.translation - Y.row(t).transpose();
        fit.fit_residual = std::max(fit.fit_residual, std::sqrt(std::abs(inner(space, d, d))));
    }
    fit.ortho_defect = motion_defect(space, fit.motion);
    return fit;
}

const char* to_string(VerdictKind v) {
    switch (v) {
        case VerdictKind::Congruence: return "congruence";
        case VerdictKind::IsometryNotExtended: return "isometry_not_extended";
        case VerdictKind::ConformalOnly: return "conformal_only";
        case VerdictKind::NotConformal: return "not_conformal";
        case VerdictKind::HypothesesUnmet: return "hypotheses_unmet";
    }
    return "?";
}

namespace {

std::string format_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

}  // namespace

CongruenceVerdict decide_congruence(const PatchMap& map, const AnalysisConfig& config) {
    const ImmersionPatch& src = map.source();
    const int n = src.chart_dim();
    const GridSpec pgrid = src.grid(config.grid_profile);
    const GridSpec ggrid = src.grid(config.grid_geometry);

    CongruenceVerdict verdict;
    verdict.profile = conformal_extract(map, pgrid, config.profile_tol());
    verdict.density = density_scan(src, ggrid, config.classify_tol());
    verdict.flatness = conformal_flatness(src, ggrid, config.flatness_tol());

    // Riemann norms over the profile grid (theorem-2 gating and evidence)
    CurvatureOptions copts;
    copts.with_gauss = false;
    copts.with_weyl = false;
    copts.with_cotton = false;
    std::vector<double> rnorms(static_cast<std::size_t>(pgrid.total()));
    std::vector<bool> rnonzero(static_cast<std::size_t>(pgrid.total()));
    bool any_r_nonzero = false;
    for (int idx = 0; idx < pgrid.total(); ++idx) {
        const CurvaturePack pack = curvature_pack(src, pgrid.point(idx), copts);
        rnorms[static_cast<std::size_t>(idx)] = pack.riemann.frobenius_norm();
        const double hs = pack.pg.h.cwiseAbs().maxCoeff();
        rnonzero[static_cast<std::size_t>(idx)] =
            rnorms[static_cast<std::size_t>(idx)] > config.verdict_tol() * (1.0 + hs * hs);
        if (rnonzero[static_cast<std::size_t>(idx)]) any_r_nonzero = true;
        verdict.max_riemann_norm = std::max(verdict.max_riemann_norm, rnorms[static_cast<std::size_t>(idx)]);
    }

    const ConformalProfile& profile = *verdict.profile;
    if (!profile.conformal) {
        verdict.kind = VerdictKind::NotConformal;
        std::string w = "(";
        for (int i = 0; i < profile.witness_u.size(); ++i)
            w += (i ? "," : "") + format_sci(profile.witness_u[i]);
        w += ")";
        verdict.reason = profile.failure == "sign_flip"
                             ? "pullback factor changes sign across the grid"
                             : "pullback metric not proportional to g; worst residual " +
                                   format_sci(profile.worst_residual) + " at u = " + w;
        verdict.theorem_branch = "none";
        return verdict;
    }

    const bool thm1_density = verdict.density.generic_fraction == 1.0;
    const bool thm1_flatness =
        verdict.flatness.verdict == FlatnessVerdict::NotConformallyFlat;
    const bool thm2_density = verdict.density.umbilic_fraction == 0.0;
    const bool thm1 = thm1_density && thm1_flatness;

    // theorem-2 neighbourhood: connected profile-grid component around p with
    // nonvanishing curvature
    std::vector<int> component;
    if (thm2_density && any_r_nonzero) {
        int start = -1;
        if (config.point_p) {
            const int cand = pgrid.nearest_index(*config.point_p);
            if (rnonzero[static_cast<std::size_t>(cand)]) start = cand;
        } else {
            double best = 0.0;
            for (int idx = 0; idx < pgrid.total(); ++idx)
                if (rnonzero[static_cast<std::size_t>(idx)] && rnorms[static_cast<std::size_t>(idx)] > best) {
                    best = rnorms[static_cast<std::size_t>(idx)];
                    start = idx;
                }
        }
        if (start >= 0) {
            std::vector<bool> seen(static_cast<std::size_t>(pgrid.total()), false);
            std::deque<int> queue{start};
            seen[static_cast<std::size_t>(start)] = true;
            while (!queue.empty()) {
                const int cur = queue.front();
                queue.pop_front();
                component.push_back(cur);
                const std::vector<int> steps = pgrid.steps_of(cur);
                for (int a = 0; a < n; ++a)
                    for (int d : {-1, 1}) {
                        std::vector<int> s = steps;
                        s[static_cast<std::size_t>(a)] += d;
                        if (s[static_cast<std::size_t>(a)] < 0 || s[static_cast<std::size_t>(a)] >= pgrid.per_axis()) continue;
                        const int nb = pgrid.flat_of(s);
                        if (!seen[static_cast<std::size_t>(nb)] && rnonzero[static_cast<std::size_t>(nb)]) {
                            seen[static_cast<std::size_t>(nb)] = true;
                            queue.push_back(nb);
                        }
                    }
            }
            std::sort(component.begin(), component.end());
        }
    }
    const bool thm2 = thm2_density && !component.empty();

    std::vector<int> scope;
    if (thm1) {
        verdict.theorem_branch = "theorem1";
        scope.resize(static_cast<std::size_t>(pgrid.total()));
        for (int i = 0; i < pgrid.total(); ++i) scope[static_cast<std::size_t>(i)] = i;
    } else if (thm2) {
        verdict.theorem_branch = "theorem2";
        scope = component;
        verdict.component = component;
    } else {
        verdict.theorem_branch = "none";
        scope.resize(static_cast<std::size_t>(pgrid.total()));
        for (int i = 0; i < pgrid.total(); ++i) scope[static_cast<std::size_t>(i)] = i;
    }

    // congruence subtest: sigma constant and zero, eps = +1, lambda = 0
    double smin = 0, smax = 0, ssum = 0, lmax = 0;
    bool first = true;
    for (int idx : scope) {
        const ProfilePoint& pp = profile.points[static_cast<std::size_t>(idx)];
        if (first) {
            smin = smax = pp.sigma;
            first = false;
        }
        smin = std::min(smin, pp.sigma);
        smax = std::max(smax, pp.sigma);
        ssum += pp.sigma;
        lmax = std::max(lmax, std::abs(pp.lambda));
    }
    const double smean = ssum / static_cast<double>(scope.size());
    const bool sigma_const = (smax - smin) <= config.verdict_tol();
    const bool sigma_zero = std::abs(smean) <= config.verdict_tol();
    const bool eps_plus = profile.eps == 1;
    const bool lambda_zero = lmax <= config.verdict_tol();
    verdict.subtest_passed = sigma_const && sigma_zero && eps_plus && lambda_zero;

    std::string subtest_note;
    if (verdict.subtest_passed) {
        std::vector<VectorXd> samples;
        samples.reserve(scope.size());
        for (int idx : scope) samples.push_back(profile.points[static_cast<std::size_t>(idx)].u);
        MotionFit mf = fit_motion(map, samples);
        verdict.motion = mf.motion;
        verdict.fit_residual = mf.fit_residual;
        verdict.ortho_defect = mf.ortho_defect;
        // scene diameter for the relative motion-fit gate
        double diameter = 0.0;
        const VectorXd p0 = src.jet(samples.front(), 0).f;
        for (const auto& u : samples)
            diameter = std::max(diameter, (src.jet(u, 0).f - p0).norm());
        const bool motion_ok = mf.fit_residual <= config.motion_tol() * std::max(diameter, 1.0) &&
                               mf.ortho_defect <= config.motion_tol();
        if (thm1 || thm2) {
            if (motion_ok) {
                verdict.kind = VerdictKind::Congruence;
                verdict.reason = (thm1 ? "theorem-1 hypotheses hold" : "theorem-2 hypotheses hold on V") +
                                 std::string("; sigma = 0, eps = +1, lambda = 0; ambient motion recovered");
                return verdict;
            }
            verdict.kind = VerdictKind::IsometryNotExtended;
            verdict.reason =
                "sigma = 0, eps = +1, lambda = 0 but the affine fit is not a motion "
                "(fit residual " + format_sci(mf.fit_residual) + ", defect " +
                format_sci(mf.ortho_defect) +
                "); under the theorem hypotheses this indicates tolerance miscalibration, "
                "not a counterexample";
            return verdict;
        }
        subtest_note = motion_ok ? "congruence subtest passed (sigma = 0, eps = +1, lambda = 0, motion fit ok)"
                                 : "sigma/eps/lambda subtest passed but motion fit failed";
    } else {
        std::string why;
        if (!sigma_const) why = "sigma varies (spread " + format_sci(smax - smin) + ")";
        else if (!sigma_zero) why = "sigma = " + format_sci(smean) + " (homothety, not isometry)";
        else if (!eps_plus) why = "eps = -1 (anti-isometric pullback)";
        else why = "lambda = " + format_sci(lmax) + " nonzero";
        subtest_note = "congruence subtest failed: " + why;
        if (thm1 || thm2) {
            verdict.kind = VerdictKind::ConformalOnly;
            verdict.reason = subtest_note;
            return verdict;
        }
    }

    // no theorem hypotheses hold
    std::string reason;
    if (verdict.density.umbilic_fraction == 1.0) reason = "umbilic everywhere";
    else if (!thm1_density) reason = "nonquasi-umbilic points not dense (generic fraction " +
                                     format_sci(verdict.density.generic_fraction) + ")";
    if (!thm1_flatness) {
        if (!reason.empty()) reason += "; ";
        reason += verdict.flatness.verdict == FlatnessVerdict::ConformallyFlat
                      ? "conformally flat"
                      : "curvature below floor (flatness indeterminate)";
    }
    if (!thm2_density && verdict.density.umbilic_fraction != 1.0) {
        if (!reason.empty()) reason += "; ";
        reason += "umbilic points present (theorem-2 density fails)";
    }
    if (thm2_density && !any_r_nonzero) {
        if (!reason.empty()) reason += "; ";
        reason += "curvature tensor vanishes on the whole grid";
    }
    if (thm2_density && any_r_nonzero && component.empty()) {
        if (!reason.empty()) reason += "; ";
        reason += "curvature vanishes at the designated point p";
    }
    verdict.kind = VerdictKind::HypothesesUnmet;
    verdict.reason = reason + "; " + subtest_note;
    return verdict;
}

CongruenceVerdict decide_congruence(const SceneModel& scene, const std::string& map_name,
                                    const AnalysisConfig& config) {
    const MapDef* def = scene.find_map(map_name);
    if (!def) throw ParseError("unknown map '" + map_name + "'", 0);
    const SurfaceDef* sdef = scene.find_surface(def->from);
    const SurfaceDef* tdef = scene.find_surface(def->to);
    const ImmersionPatch source(scene.space, *sdef);
    const ImmersionPatch target(scene.space, *tdef);
    const PatchMap map(source, target, *def);
    return decide_congruence(map, config);
}

IdentityResiduals conformal_identity_residuals(const PatchMap& map,
                                               const ConformalProfile& profile,
                                               double lemma3b_gate) {
    if (!profile.conformal)
        throw GeometryError("conformal identities require a conformal profile");
    const ImmersionPatch& src = map.source();
    const ImmersionPatch& dst = map.target();
    const int n = src.chart_dim();

    CurvatureOptions copts;
    copts.with_gauss = false;
    copts.with_weyl = false;
    copts.with_cotton = false;

    IdentityResiduals out;
    out.res_12.reserve(profile.points.size());
    out.res_3c.reserve(profile.points.size());
    for (const ProfilePoint& pp : profile.points) {
        const CurvaturePack spack = curvature_pack(src, pp.u, copts);
        const CurvaturePack tpack = curvature_pack(dst, pp.Fu, copts);

        Tensor4 pbR(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double acc = 0.0;
                        for (int a = 0; a < n; ++a)
                            for (int b = 0; b < n; ++b)
                                for (int c = 0; c < n; ++c)
                                    for (int d = 0; d < n; ++d)
                                        acc += tpack.riemann(a, b, c, d) * pp.jac(a, i) *
                                               pp.jac(b, j) * pp.jac(c, k) * pp.jac(d, l);
                        pbR(i, j, k, l) = acc;
                    }

        const double eps = pp.c >= 0 ? 1.0 : -1.0;
        const double e2s = std::exp(2.0 * pp.sigma);
        const double denom = std::max(spack.riemann.frobenius_norm(), spack.floor);

        const Tensor4 lhs12 = pbR - (eps * e2s) * (spack.riemann + phi_op(pp.Q, pp.g));
        out.res_12.push_back(lhs12.frobenius_norm() / denom);

        const Tensor4 lhs3c =
            pbR - (e2s * e2s) * (spack.riemann + pp.lambda * phi_op(pp.h, pp.g) +
                                 (pp.lambda * pp.lambda) * pi1_op(pp.g));
        out.res_3c.push_back(lhs3c.frobenius_norm() / denom);

        const bool ok3b = pp.residual_lemma3b <= lemma3b_gate;
        out.lemma3b_ok.push_back(ok3b);
        out.max_12 = std::max(out.max_12, out.res_12.back());
        if (ok3b) {
            out.max_3c_applicable = std::max(out.max_3c_applicable, out.res_3c.back());
            ++out.applicable_count;
        }
    }
    return out;
}

}  // namespace congruence
