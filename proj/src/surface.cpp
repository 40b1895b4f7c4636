#include "congruence/surface.hpp"

#include <algorithm>
#include <array>

#include "congruence/rng.hpp"

namespace congruence {

SymIndex::SymIndex(int n_) : n(n_) {
    r2.assign(static_cast<std::size_t>(n) * n, -1);
    r3.assign(static_cast<std::size_t>(n) * n * n, -1);
    r4.assign(static_cast<std::size_t>(n) * n * n * n, -1);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            r2[static_cast<std::size_t>(i * n + j)] = s2;
            r2[static_cast<std::size_t>(j * n + i)] = s2;
            ++s2;
        }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                std::array<int, 3> t{i, j, k};
                std::sort(t.begin(), t.end());
                do {
                    r3[static_cast<std::size_t>((t[0] * n + t[1]) * n + t[2])] = s3;
                } while (std::next_permutation(t.begin(), t.end()));
                ++s3;
            }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k)
                for (int l = k; l < n; ++l) {
                    std::array<int, 4> t{i, j, k, l};
                    std::sort(t.begin(), t.end());
                    do {
                        r4[static_cast<std::size_t>(((t[0] * n + t[1]) * n + t[2]) * n + t[3])] = s4;
                    } while (std::next_permutation(t.begin(), t.end()));
                    ++s4;
                }
}

ImmersionPatch::ImmersionPatch(AmbientSpace space, const SurfaceDef& def)
    : space_(space),
      name_(def.name),
      n_(space.surface_dim()),
      m_(space.dim_total),
      vars_(def.vars),
      domain_(def.domain),
      components_(def.embed),
      sym_(n_) {
    if (static_cast<int>(def.embed.size()) != m_)
        throw GeometryError("immersion component count does not match ambient dimension");
    if (static_cast<int>(def.vars.size()) != n_)
        throw GeometryError("chart variable count does not match n");

    d1_.resize(static_cast<std::size_t>(m_) * n_);
    d2_.resize(static_cast<std::size_t>(m_) * sym_.s2);
    d3_.resize(static_cast<std::size_t>(m_) * sym_.s3);
    d4_.resize(static_cast<std::size_t>(m_) * sym_.s4);
    for (int a = 0; a < m_; ++a) {
        for (int i = 0; i < n_; ++i)
            d1_[static_cast<std::size_t>(a) * n_ + i] = components_[static_cast<std::size_t>(a)].differentiate(i);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j)
                d2_[static_cast<std::size_t>(a) * sym_.s2 + sym_.idx2(i, j)] =
                    d1_[static_cast<std::size_t>(a) * n_ + i].differentiate(j);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j)
                for (int k = j; k < n_; ++k)
                    d3_[static_cast<std::size_t>(a) * sym_.s3 + sym_.idx3(i, j, k)] =
                        d2_[static_cast<std::size_t>(a) * sym_.s2 + sym_.idx2(i, j)].differentiate(k);
        for (int i = 0; i < n_; ++i)
            for (int j = i; j < n_; ++j)
                for (int k = j; k < n_; ++k)
                    for (int l = k; l < n_; ++l)
                        d4_[static_cast<std::size_t>(a) * sym_.s4 + sym_.idx4(i, j, k, l)] =
                            d3_[static_cast<std::size_t>(a) * sym_.s3 + sym_.idx3(i, j, k)].differentiate(l);
    }
}

FrameJet ImmersionPatch::jet(const VectorXd& u, int order) const {
    if (u.size() != n_) throw GeometryError("chart point dimension mismatch");
    FrameJet out;
    out.n = n_;
    out.m = m_;
    out.order = order;
    out.sym = &sym_;
    const std::span<const double> env(u.data(), static_cast<std::size_t>(n_));
    out.f.resize(m_);
    for (int a = 0; a < m_; ++a) out.f[a] = components_[static_cast<std::size_t>(a)].evaluate(env);
    if (order >= 1) {
        out.d1.resize(m_, n_);
        for (int a = 0; a < m_; ++a)
            for (int i = 0; i < n_; ++i)
                out.d1(a, i) = d1_[static_cast<std::size_t>(a) * n_ + i].evaluate(env);
    }
    if (order >= 2) {
        out.d2.resize(static_cast<std::size_t>(m_) * sym_.s2);
        for (std::size_t t = 0; t < out.d2.size(); ++t) out.d2[t] = d2_[t].evaluate(env);
    }
    if (order >= 3) {
        out.d3.resize(static_cast<std::size_t>(m_) * sym_.s3);
        for (std::size_t t = 0; t < out.d3.size(); ++t) out.d3[t] = d3_[t].evaluate(env);
    }
    if (order >= 4) {
        out.d4.resize(static_cast<std::size_t>(m_) * sym_.s4);
        for (std::size_t t = 0; t < out.d4.size(); ++t) out.d4[t] = d4_[t].evaluate(env);
    }
    return out;
}

namespace {

MatrixXd metric_from_jet(const AmbientSpace& space, const FrameJet& jet) {
    const int n = jet.n;
    MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int a = 0; a < jet.m; ++a)
                acc += space.eta(a) * jet.d1(a, i) * jet.d1(a, j);
            g(i, j) = acc;
            g(j, i) = acc;
        }
    return g;
}

void check_metric(const MatrixXd& g, double det, const ImmersionPatch& patch,
                  const VectorXd& u, const SurfaceTolerances& tol) {
    const double scale = std::pow(1.0 + g.cwiseAbs().maxCoeff(), g.rows());
    if (std::abs(det) <= tol.degenerate_metric * scale) {
        std::string msg = "degenerate induced metric on '" + patch.name() + "' at u = (";
        for (int i = 0; i < u.size(); ++i)
            msg += (i ? "," : "") + std::to_string(u[i]);
        throw GeometryError(msg + ")");
    }
}

}  // namespace

MatrixXd induced_metric(const ImmersionPatch& patch, const VectorXd& u,
                        const SurfaceTolerances& tol) {
    const FrameJet jet = patch.jet(u, 1);
    MatrixXd g = metric_from_jet(patch.space(), jet);
    check_metric(g, g.determinant(), patch, u, tol);
    return g;
}

std::pair<VectorXd, double> unit_normal(const ImmersionPatch& patch, const VectorXd& u,
                                        const SurfaceTolerances& tol) {
    const PointGeometry pg = point_geometry(patch, u, 2, tol);
    return {pg.normal, pg.eps_normal};
}

MatrixXd second_fundamental_form(const ImmersionPatch& patch, const VectorXd& u,
                                 const SurfaceTolerances& tol) {
    return point_geometry(patch, u, 2, tol).h;
}

PointGeometry point_geometry(const ImmersionPatch& patch, const VectorXd& u,
                             int jet_order, const SurfaceTolerances& tol) {
    const AmbientSpace& space = patch.space();
    const int n = patch.chart_dim();
    const int m = patch.ambient_dim();

    PointGeometry pg;
    pg.u = u;
    pg.jet = patch.jet(u, std::max(jet_order, 2));
    pg.g = metric_from_jet(space, pg.jet);
    pg.det_g = pg.g.determinant();
    check_metric(pg.g, pg.det_g, patch, u, tol);
    pg.g_inv = pg.g.inverse();

    // Normal: solve [J^T eta; random row] N = e_m. The first n rows force
    // tangency; the extra row pins the remaining degree of freedom.
    MatrixXd M(m, m);
    for (int i = 0; i < n; ++i)
        for (int a = 0; a < m; ++a) M(i, a) = space.eta(a) * pg.jet.d1(a, i);
    VectorXd rhs = VectorXd::Zero(m);
    rhs[m - 1] = 1.0;
    VectorXd N;
    bool solved = false;
    for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
        Rng rng(0x6a09e667f3bcc908ull + static_cast<std::uint64_t>(attempt));
        for (int a = 0; a < m; ++a) M(n, a) = rng.normal();
        Eigen::FullPivLU<MatrixXd> lu(M);
        if (lu.isInvertible()) {
            N = lu.solve(rhs);
            solved = true;
        }
    }
    if (!solved)
        throw GeometryError("normal solve failed on '" + patch.name() + "' (rank-deficient Jacobian)");

    const double q = inner(space, N, N);
    const double sup = N.cwiseAbs().maxCoeff();
    if (std::abs(q) <= tol.isotropic * sup * sup)
        throw GeometryError("isotropic normal direction on '" + patch.name() +
                            "' (degenerate hypersurface)");
    pg.eps_normal = q > 0 ? 1.0 : -1.0;
    N /= std::sqrt(std::abs(q));
    // orientation: positive last nonzero ambient entry
    const double entry_floor = 1e-12 * N.cwiseAbs().maxCoeff();
    for (int a = m - 1; a >= 0; --a) {
        if (std::abs(N[a]) > entry_floor) {
            if (N[a] < 0) N = -N;
            break;
        }
    }
    pg.normal = N;

    pg.h.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int a = 0; a < m; ++a)
                acc += space.eta(a) * pg.jet.d2v(a, i, j) * N[a];
            pg.h(i, j) = acc;
            pg.h(j, i) = acc;
        }
    pg.tr_h = (pg.g_inv * pg.h).trace();
    pg.B = pg.h - (pg.tr_h / n) * pg.g;
    return pg;
}

bool chart_isotropic(const MatrixXd& g, const VectorXd& x, double tol) {
    const double nx = x.squaredNorm();
    if (!(nx > 0.0)) return false;
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    return std::abs(x.dot(g * x)) <= tol * nx * scale;
}

double bending(const PointGeometry& pg, const VectorXd& x, const SurfaceTolerances& tol) {
    const double qg = x.dot(pg.g * x);
    const double scale = std::max(1.0, pg.g.cwiseAbs().maxCoeff());
    if (std::abs(qg) <= tol.isotropic * x.squaredNorm() * scale)
        throw GeometryError("bending undefined: direction is isotropic or zero");
    return x.dot(pg.h * x) / qg;
}

}  // namespace congruence
