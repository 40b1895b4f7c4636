#include "congruence/analysis.hpp"

#include <Eigen/Eigenvalues>

namespace congruence {

namespace {

double symmetry_residual(const Tensor4& R) {
    const int n = R.dim();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    worst = std::max(worst, std::abs(R(i, j, k, l) + R(j, i, k, l)));
                    worst = std::max(worst, std::abs(R(i, j, k, l) + R(i, j, l, k)));
                    worst = std::max(worst, std::abs(R(i, j, k, l) - R(k, l, i, j)));
                    worst = std::max(worst,
                                     std::abs(R(i, j, k, l) + R(j, k, i, l) + R(k, i, j, l)));
                }
    return worst;
}

double trace_residual(const Tensor4& C, const MatrixXd& ginv) {
    const int n = C.dim();
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double t13 = 0.0, t14 = 0.0, t23 = 0.0, t24 = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    t13 += ginv(a, b) * C(a, j, b, l);
                    t14 += ginv(a, b) * C(a, j, l, b);
                    t23 += ginv(a, b) * C(j, a, b, l);
                    t24 += ginv(a, b) * C(j, a, l, b);
                }
            worst = std::max({worst, std::abs(t13), std::abs(t14), std::abs(t23), std::abs(t24)});
        }
    return worst;
}

}  // namespace

SurfaceAnalysis analyze_surface(const ImmersionPatch& patch, const GridSpec& grid,
                                const AnalysisConfig& config) {
    const int n = patch.chart_dim();
    SurfaceAnalysis out;
    out.name = patch.name();
    out.n = n;
    out.grid_points = grid.total();

    CurvatureOptions opts;
    opts.with_gauss = true;
    opts.with_weyl = (n >= 3);
    opts.with_cotton = (n == 3);

    int umbilic = 0, quasi = 0, generic = 0;
    bool first = true;
    bool any_above_floor = false;
    double sign_seen = 0.0;

    for (int idx = 0; idx < grid.total(); ++idx) {
        const VectorXd u = grid.point(idx);
        const CurvaturePack pack = curvature_pack(patch, u, opts);
        const double rn = pack.riemann.frobenius_norm();
        const double denom = std::max(rn, pack.floor);

        if (first) {
            out.tau_min = out.tau_max = pack.tau;
            out.eps_normal = pack.pg.eps_normal;
            Eigen::SelfAdjointEigenSolver<MatrixXd> eig(pack.jets.g);
            out.metric_indefinite =
                eig.eigenvalues().minCoeff() < 0 && eig.eigenvalues().maxCoeff() > 0;
            first = false;
        }
        out.tau_min = std::min(out.tau_min, pack.tau);
        out.tau_max = std::max(out.tau_max, pack.tau);
        out.max_riemann_norm = std::max(out.max_riemann_norm, rn);

        out.max_gauss_residual = std::max(
            out.max_gauss_residual, (pack.riemann - pack.riemann_gauss).frobenius_norm() / denom);
        if (pack.gauss_sign_determinate) {
            if (sign_seen == 0.0) sign_seen = pack.gauss_sign;
            else if (sign_seen != pack.gauss_sign) out.gauss_sign_consistent = false;
        }

        out.max_symmetry_residual =
            std::max(out.max_symmetry_residual, symmetry_residual(pack.riemann) / std::max(rn, pack.floor));

        const double test_norm =
            (n == 3) ? pack.cotton3.frobenius_norm() : pack.weyl.frobenius_norm();
        if (rn >= pack.floor || test_norm >= pack.floor) any_above_floor = true;
        out.max_flatness_ratio = std::max(out.max_flatness_ratio, test_norm / denom);

        if (n >= 3) {
            // the contractions cancel terms of size ||R||, so normalize by that
            // scale when C itself vanishes (always, in dimension 3)
            const double cn = std::max({pack.weyl.frobenius_norm(), rn, pack.floor});
            out.max_weyl_trace_residual =
                std::max(out.max_weyl_trace_residual, trace_residual(pack.weyl, pack.jets.ginv) / cn);
            out.max_weyl_ratio = std::max(out.max_weyl_ratio, pack.weyl.frobenius_norm() / denom);
        }

        const CodazziReport codazzi = codazzi_residual(patch, u);
        out.max_codazzi_residual =
            std::max(out.max_codazzi_residual, codazzi.residual.max_abs() / codazzi.scale);

        switch (classify_point(pack.pg, config.classify_tol()).kind) {
            case PointKind::Umbilic: ++umbilic; break;
            case PointKind::QuasiUmbilic: ++quasi; break;
            case PointKind::Generic: ++generic; break;
        }
    }
    out.gauss_sign = sign_seen == 0.0 ? 1.0 : sign_seen;

    out.density.total = grid.total();
    out.density.umbilic_fraction = static_cast<double>(umbilic) / grid.total();
    out.density.quasi_umbilic_fraction = static_cast<double>(quasi) / grid.total();
    out.density.generic_fraction = static_cast<double>(generic) / grid.total();

    out.flatness.tol = config.flatness_tol();
    out.flatness.used_cotton = (n == 3);
    out.flatness.max_ratio = out.max_flatness_ratio;
    out.flatness.worst_u = grid.point(0);
    if (!any_above_floor)
        out.flatness.verdict = FlatnessVerdict::Indeterminate;
    else
        out.flatness.verdict = out.max_flatness_ratio <= config.flatness_tol()
                                   ? FlatnessVerdict::ConformallyFlat
                                   : FlatnessVerdict::NotConformallyFlat;
    return out;
}

}  // namespace congruence
