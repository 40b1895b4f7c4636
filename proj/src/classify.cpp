#include "congruence/classify.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "congruence/rng.hpp"

namespace congruence {

const char* to_string(PointKind k) {
    switch (k) {
        case PointKind::Umbilic: return "umbilic";
        case PointKind::QuasiUmbilic: return "quasi_umbilic";
        case PointKind::Generic: return "generic";
    }
    return "?";
}

IsotropicSample sample_isotropic(const MatrixXd& g, int count, std::uint64_t seed) {
    const int n = static_cast<int>(g.rows());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g);
    if (eig.info() != Eigen::Success)
        throw GeometryError("sample_isotropic: eigendecomposition failed");
    const VectorXd& lam = eig.eigenvalues();  // ascending
    const MatrixXd& V = eig.eigenvectors();

    std::vector<int> neg, pos;
    const double floor = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
        if (lam[i] < -floor) neg.push_back(i);
        else if (lam[i] > floor) pos.push_back(i);
        else throw GeometryError("sample_isotropic: metric is numerically degenerate");
    }
    if (neg.empty() || pos.empty())
        throw GeometryError("sample_isotropic: metric is definite, the null cone is empty");

    IsotropicSample out;
    out.metric_used = g;
    out.vectors.reserve(static_cast<std::size_t>(count));
    Rng rng(seed);
    while (static_cast<int>(out.vectors.size()) < count) {
        // random directions in the negative and positive eigenspaces, scaled
        // so the quadratic contributions cancel
        VectorXd xn = VectorXd::Zero(n), xp = VectorXd::Zero(n);
        for (int i : neg) xn += rng.normal() * V.col(i);
        for (int i : pos) xp += rng.normal() * V.col(i);
        const double qnn = xn.dot(g * xn);  // < 0
        const double qpp = xp.dot(g * xp);  // > 0
        if (!(qnn < -floor) || !(qpp > floor)) continue;
        VectorXd x = xn + std::sqrt(-qnn / qpp) * xp;
        // one exact root along the positive part kills the remaining roundoff
        const double a = xp.dot(g * xp);
        const double b = xn.dot(g * xp);
        const double c0 = xn.dot(g * xn);
        const double disc = b * b - a * c0;
        if (disc > 0.0 && std::abs(a) > floor) {
            const double t = (-b + std::sqrt(disc)) / a;
            x = xn + t * xp;
        }
        const double nx = x.squaredNorm();
        if (!(nx > floor)) continue;
        if (std::abs(x.dot(g * x)) > 1e-10 * nx) continue;  // reject, keep invariant exact
        out.vectors.push_back(std::move(x));
    }
    return out;
}

Lemma1Result lemma1_fit(const MatrixXd& L, const MatrixXd& g, const IsotropicSample& samples,
                        double tol) {
    const int n = static_cast<int>(g.rows());
    const double Lnorm = std::max(L.cwiseAbs().maxCoeff(), 1e-300);

    Lemma1Result res;
    double worst = 0.0;
    const VectorXd* worst_xi = nullptr;
    for (const VectorXd& xi : samples.vectors) {
        const double v = std::abs(xi.dot(L * xi)) / (Lnorm * xi.squaredNorm());
        if (v > worst) {
            worst = v;
            worst_xi = &xi;
        }
    }
    if (worst > tol) {
        res.proportional = false;
        res.witness = *worst_xi;
        res.violation = worst;
        return res;
    }
    res.proportional = true;
    res.c = (g.inverse() * L).trace() / n;
    res.violation = worst;
    const double defect = (L - res.c * g).cwiseAbs().maxCoeff() / Lnorm;
    // The lemma guarantees that cone vanishing implies proportionality; a
    // large defect here means the sample set failed to witness L.
    const double consistency_tol = std::max(100.0 * tol, 1e-6);
    if (defect > consistency_tol)
        throw GeometryError(
            "lemma1_fit inconsistency: cone samples all pass but ||L - cg||/||L|| = " +
            std::to_string(defect) + " (insufficient sampling)");
    return res;
}

PointClass classify_point(const PointGeometry& pg, double tol) {
    const int n = static_cast<int>(pg.g.rows());
    PointClass out;
    out.scale = pg.h.cwiseAbs().maxCoeff() + pg.g.cwiseAbs().maxCoeff();
    out.alpha = pg.tr_h / n;

    if (pg.B.cwiseAbs().maxCoeff() <= tol * out.scale) {
        out.kind = PointKind::Umbilic;
        out.beta = 0.0;
        out.omega = VectorXd::Zero(n);
        out.residual = pg.B.cwiseAbs().maxCoeff();
        return out;
    }

    // candidate alphas: eigenvalues of the shape operator plus the mean;
    // for an exact rank-one defect the right alpha has multiplicity n-1.
    const MatrixXd A = pg.g_inv * pg.h;
    Eigen::EigenSolver<MatrixXd> eig(A);
    std::vector<double> candidates;
    for (int i = 0; i < n; ++i) candidates.push_back(eig.eigenvalues()[i].real());
    candidates.push_back(A.trace() / n);

    double best_sigma2 = std::numeric_limits<double>::infinity();
    double best_alpha = 0.0;
    for (double alpha : candidates) {
        Eigen::JacobiSVD<MatrixXd> svd(A - alpha * MatrixXd::Identity(n, n));
        const double s2 = svd.singularValues()[1];
        if (s2 < best_sigma2) {
            best_sigma2 = s2;
            best_alpha = alpha;
        }
    }

    if (best_sigma2 > tol * out.scale) {
        out.kind = PointKind::Generic;
        out.beta = 0.0;
        out.omega = VectorXd::Zero(n);
        out.residual = best_sigma2;
        return out;
    }

    out.kind = PointKind::QuasiUmbilic;
    out.alpha = best_alpha;
    // rank-one factor of the symmetric remainder M = h - alpha g
    const MatrixXd M = pg.h - best_alpha * pg.g;
    Eigen::SelfAdjointEigenSolver<MatrixXd> meig(M);
    int dominant = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(meig.eigenvalues()[i]) > std::abs(meig.eigenvalues()[dominant])) dominant = i;
    const double mu = meig.eigenvalues()[dominant];
    VectorXd w = meig.eigenvectors().col(dominant);
    const double wmax = w.cwiseAbs().maxCoeff();
    w /= wmax;  // ||omega||_inf = 1
    for (int i = 0; i < n; ++i) {
        if (std::abs(w[i]) > 1e-12) {
            if (w[i] < 0) w = -w;
            break;
        }
    }
    out.omega = w;
    out.beta = mu * wmax * wmax;
    out.residual = (M - out.beta * w * w.transpose()).cwiseAbs().maxCoeff();
    out.omega_g_norm2 = w.dot(pg.g_inv * w);
    return out;
}

DensityReport density_scan(const ImmersionPatch& patch, const GridSpec& grid, double tol,
                           const SurfaceTolerances& stol) {
    DensityReport rep;
    rep.total = grid.total();
    int umbilic = 0, quasi = 0, generic = 0;
    for (int idx = 0; idx < grid.total(); ++idx) {
        const PointGeometry pg = point_geometry(patch, grid.point(idx), 2, stol);
        switch (classify_point(pg, tol).kind) {
            case PointKind::Umbilic: ++umbilic; break;
            case PointKind::QuasiUmbilic: ++quasi; break;
            case PointKind::Generic: ++generic; break;
        }
    }
    rep.umbilic_fraction = static_cast<double>(umbilic) / rep.total;
    rep.quasi_umbilic_fraction = static_cast<double>(quasi) / rep.total;
    rep.generic_fraction = static_cast<double>(generic) / rep.total;
    return rep;
}

}  // namespace congruence
