#include "congruence/curvature.hpp"

#include <cmath>

namespace congruence {

double ratio_floor(const MatrixXd& g) {
    const double gn = g.cwiseAbs().maxCoeff();
    return 1e-12 * (1.0 + gn * gn * gn * gn);
}

MetricJets metric_jets(const AmbientSpace& space, const FrameJet& jet, int depth) {
    const int n = jet.n;
    const int m = jet.m;
    const SymIndex& sym = *jet.sym;
    if (jet.order < depth + 1)
        throw GeometryError("metric_jets: immersion jet order too low for requested depth");

    MetricJets out;
    out.n = n;
    out.depth = depth;
    out.sym = &sym;

    out.g.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int a = 0; a < m; ++a) acc += space.eta(a) * jet.d1(a, i) * jet.d1(a, j);
            out.g(i, j) = out.g(j, i) = acc;
        }
    out.ginv = out.g.inverse();

    // dg[k](i,j) = sum_a eta_a (f_aki f_aj + f_ai f_akj)
    out.dg.assign(static_cast<std::size_t>(n), MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double acc = 0.0;
                for (int a = 0; a < m; ++a)
                    acc += space.eta(a) * (jet.d2v(a, k, i) * jet.d1(a, j) +
                                           jet.d1(a, i) * jet.d2v(a, k, j));
                out.dg[static_cast<std::size_t>(k)](i, j) = acc;
                out.dg[static_cast<std::size_t>(k)](j, i) = acc;
            }

    out.dginv.assign(static_cast<std::size_t>(n), MatrixXd());
    for (int k = 0; k < n; ++k)
        out.dginv[static_cast<std::size_t>(k)] =
            -out.ginv * out.dg[static_cast<std::size_t>(k)] * out.ginv;

    // Gamma^k_ij = 1/2 g^{kl} (dg_i(j,l) + dg_j(i,l) - dg_l(i,j))
    auto gamma_rhs = [&](int i, int j, int l) {
        return out.dg[static_cast<std::size_t>(i)](j, l) +
               out.dg[static_cast<std::size_t>(j)](i, l) -
               out.dg[static_cast<std::size_t>(l)](i, j);
    };
    out.gamma.assign(static_cast<std::size_t>(n), MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                double acc = 0.0;
                for (int l = 0; l < n; ++l) acc += out.ginv(k, l) * gamma_rhs(i, j, l);
                out.gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
                out.gamma[static_cast<std::size_t>(k)](j, i) = 0.5 * acc;
            }

    if (depth < 2) return out;

    out.d2g.assign(static_cast<std::size_t>(sym.s2), MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
            MatrixXd& t = out.d2g[static_cast<std::size_t>(sym.idx2(k, l))];
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double acc = 0.0;
                    for (int a = 0; a < m; ++a)
                        acc += space.eta(a) *
                               (jet.d3v(a, l, k, i) * jet.d1(a, j) +
                                jet.d2v(a, k, i) * jet.d2v(a, l, j) +
                                jet.d2v(a, l, i) * jet.d2v(a, k, j) +
                                jet.d1(a, i) * jet.d3v(a, l, k, j));
                    t(i, j) = acc;
                    t(j, i) = acc;
                }
        }

    out.d2ginv.assign(static_cast<std::size_t>(sym.s2), MatrixXd());
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l) {
            const MatrixXd& dk = out.dg[static_cast<std::size_t>(k)];
            const MatrixXd& dl_inv = out.dginv[static_cast<std::size_t>(l)];
            out.d2ginv[static_cast<std::size_t>(sym.idx2(k, l))] =
                -(dl_inv * dk * out.ginv +
                  out.ginv * out.d2g[static_cast<std::size_t>(sym.idx2(k, l))] * out.ginv +
                  out.ginv * dk * dl_inv);
        }

    // dGamma[q][k](i,j)
    out.dgamma.assign(static_cast<std::size_t>(n),
                      std::vector<MatrixXd>(static_cast<std::size_t>(n), MatrixXd::Zero(n, n)));
    auto dgamma_rhs = [&](int q, int i, int j, int l) {
        return out.d2g[static_cast<std::size_t>(sym.idx2(q, i))](j, l) +
               out.d2g[static_cast<std::size_t>(sym.idx2(q, j))](i, l) -
               out.d2g[static_cast<std::size_t>(sym.idx2(q, l))](i, j);
    };
    for (int q = 0; q < n; ++q)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = i; j < n; ++j) {
                    double acc = 0.0;
                    for (int l = 0; l < n; ++l)
                        acc += out.dginv[static_cast<std::size_t>(q)](k, l) * gamma_rhs(i, j, l) +
                               out.ginv(k, l) * dgamma_rhs(q, i, j, l);
                    out.dgamma[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)](i, j) = 0.5 * acc;
                    out.dgamma[static_cast<std::size_t>(q)][static_cast<std::size_t>(k)](j, i) = 0.5 * acc;
                }

    // R(i,j,k,l) = g_{lm} Rup(m,k,i,j),
    // Rup(m,k,i,j) = d_i Gamma^m_jk - d_j Gamma^m_ik
    //              + Gamma^m_ip Gamma^p_jk - Gamma^m_jp Gamma^p_ik
    Tensor4 rup(n);
    for (int mm = 0; mm < n; ++mm)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double acc = out.dgamma[static_cast<std::size_t>(i)][static_cast<std::size_t>(mm)](j, k) -
                                 out.dgamma[static_cast<std::size_t>(j)][static_cast<std::size_t>(mm)](i, k);
                    for (int p = 0; p < n; ++p)
                        acc += out.gamma[static_cast<std::size_t>(mm)](i, p) *
                                   out.gamma[static_cast<std::size_t>(p)](j, k) -
                               out.gamma[static_cast<std::size_t>(mm)](j, p) *
                                   out.gamma[static_cast<std::size_t>(p)](i, k);
                    rup(mm, k, i, j) = acc;
                }
    out.riemann = Tensor4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double acc = 0.0;
                    for (int mm = 0; mm < n; ++mm) acc += out.g(l, mm) * rup(mm, k, i, j);
                    out.riemann(i, j, k, l) = acc;
                }

    auto [S, tau] = ricci_scalar(out.riemann, out.ginv);
    out.ricci = std::move(S);
    out.tau = tau;

    if (depth < 3) return out;

    out.d3g.assign(static_cast<std::size_t>(sym.s3), MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int l = k; l < n; ++l)
            for (int p = l; p < n; ++p) {
                MatrixXd& t = out.d3g[static_cast<std::size_t>(sym.idx3(k, l, p))];
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        double acc = 0.0;
                        for (int a = 0; a < m; ++a)
                            acc += space.eta(a) *
                                   (jet.d4v(a, p, l, k, i) * jet.d1(a, j) +
                                    jet.d3v(a, l, k, i) * jet.d2v(a, p, j) +
                                    jet.d3v(a, p, k, i) * jet.d2v(a, l, j) +
                                    jet.d2v(a, k, i) * jet.d3v(a, p, l, j) +
                                    jet.d3v(a, p, l, i) * jet.d2v(a, k, j) +
                                    jet.d2v(a, l, i) * jet.d3v(a, p, k, j) +
                                    jet.d2v(a, p, i) * jet.d3v(a, l, k, j) +
                                    jet.d1(a, i) * jet.d4v(a, p, l, k, j));
                        t(i, j) = acc;
                        t(j, i) = acc;
                    }
            }

    // d2Gamma[idx2(q,r)][k](i,j)
    out.d2gamma.assign(static_cast<std::size_t>(sym.s2),
                       std::vector<MatrixXd>(static_cast<std::size_t>(n), MatrixXd::Zero(n, n)));
    auto d2gamma_rhs = [&](int q, int r, int i, int j, int l) {
        return out.d3g[static_cast<std::size_t>(sym.idx3(q, r, i))](j, l) +
               out.d3g[static_cast<std::size_t>(sym.idx3(q, r, j))](i, l) -
               out.d3g[static_cast<std::size_t>(sym.idx3(q, r, l))](i, j);
    };
    for (int q = 0; q < n; ++q)
        for (int r = q; r < n; ++r)
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        double acc = 0.0;
                        for (int l = 0; l < n; ++l)
                            acc += out.d2ginv[static_cast<std::size_t>(sym.idx2(q, r))](k, l) *
                                       gamma_rhs(i, j, l) +
                                   out.dginv[static_cast<std::size_t>(q)](k, l) *
                                       dgamma_rhs(r, i, j, l) +
                                   out.dginv[static_cast<std::size_t>(r)](k, l) *
                                       dgamma_rhs(q, i, j, l) +
                                   out.ginv(k, l) * d2gamma_rhs(q, r, i, j, l);
                        out.d2gamma[static_cast<std::size_t>(sym.idx2(q, r))][static_cast<std::size_t>(k)](i, j) =
                            0.5 * acc;
                        out.d2gamma[static_cast<std::size_t>(sym.idx2(q, r))][static_cast<std::size_t>(k)](j, i) =
                            0.5 * acc;
                    }

    out.driemann.assign(static_cast<std::size_t>(n), Tensor4(n));
    for (int q = 0; q < n; ++q) {
        Tensor4 drup(n);
        for (int mm = 0; mm < n; ++mm)
            for (int k = 0; k < n; ++k)
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        double acc =
                            out.d2gamma[static_cast<std::size_t>(sym.idx2(q, i))][static_cast<std::size_t>(mm)](j, k) -
                            out.d2gamma[static_cast<std::size_t>(sym.idx2(q, j))][static_cast<std::size_t>(mm)](i, k);
                        for (int p = 0; p < n; ++p)
                            acc += out.dgamma[static_cast<std::size_t>(q)][static_cast<std::size_t>(mm)](i, p) *
                                       out.gamma[static_cast<std::size_t>(p)](j, k) +
                                   out.gamma[static_cast<std::size_t>(mm)](i, p) *
                                       out.dgamma[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)](j, k) -
                                   out.dgamma[static_cast<std::size_t>(q)][static_cast<std::size_t>(mm)](j, p) *
                                       out.gamma[static_cast<std::size_t>(p)](i, k) -
                                   out.gamma[static_cast<std::size_t>(mm)](j, p) *
                                       out.dgamma[static_cast<std::size_t>(q)][static_cast<std::size_t>(p)](i, k);
                        drup(mm, k, i, j) = acc;
                    }
        Tensor4& dr = out.driemann[static_cast<std::size_t>(q)];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        double acc = 0.0;
                        for (int mm = 0; mm < n; ++mm)
                            acc += out.dg[static_cast<std::size_t>(q)](l, mm) * rup(mm, k, i, j) +
                                   out.g(l, mm) * drup(mm, k, i, j);
                        dr(i, j, k, l) = acc;
                    }
    }

    out.dricci.assign(static_cast<std::size_t>(n), MatrixXd::Zero(n, n));
    out.dtau = VectorXd::Zero(n);
    for (int q = 0; q < n; ++q) {
        MatrixXd& ds = out.dricci[static_cast<std::size_t>(q)];
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int l = 0; l < n; ++l)
                        acc += out.dginv[static_cast<std::size_t>(q)](i, l) * out.riemann(i, j, k, l) +
                               out.ginv(i, l) * out.driemann[static_cast<std::size_t>(q)](i, j, k, l);
                ds(j, k) = acc;
            }
        double dt = 0.0;
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                dt += out.dginv[static_cast<std::size_t>(q)](j, k) * out.ricci(j, k) +
                      out.ginv(j, k) * ds(j, k);
        out.dtau[q] = dt;
    }

    return out;
}

std::pair<MatrixXd, double> ricci_scalar(const Tensor4& riemann, const MatrixXd& g_inv) {
    const int n = riemann.dim();
    MatrixXd S = MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l) acc += g_inv(i, l) * riemann(i, j, k, l);
            S(j, k) = acc;
        }
    double tau = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) tau += g_inv(j, k) * S(j, k);
    return {S, tau};
}

Tensor4 phi_op(const MatrixXd& T, const MatrixXd& g) {
    const int n = static_cast<int>(g.rows());
    Tensor4 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    out(i, j, k, l) = g(i, l) * T(j, k) - g(i, k) * T(j, l) +
                                      g(j, k) * T(i, l) - g(j, l) * T(i, k);
    return out;
}

Tensor4 pi1_op(const MatrixXd& g) {
    Tensor4 out = phi_op(g, g);
    out *= 0.5;
    return out;
}

Tensor4 weyl_tensor(const Tensor4& riemann, const MatrixXd& ricci, double tau,
                    const MatrixXd& g) {
    const int n = riemann.dim();
    if (n < 3) throw GeometryError("Weyl tensor requires n >= 3");
    Tensor4 out = riemann;
    out -= (1.0 / (n - 2)) * phi_op(ricci, g);
    out += (tau / ((n - 1.0) * (n - 2.0))) * pi1_op(g);
    return out;
}

namespace {

Tensor4 gauss_wedge(const MatrixXd& h) {
    const int n = static_cast<int>(h.rows());
    Tensor4 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    out(i, j, k, l) = h(i, l) * h(j, k) - h(i, k) * h(j, l);
    return out;
}

Tensor3 cotton_tensor(const MetricJets& jets) {
    const int n = jets.n;
    const MatrixXd P = jets.ricci - (jets.tau / 4.0) * jets.g;
    std::vector<MatrixXd> dP(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q)
        dP[static_cast<std::size_t>(q)] = jets.dricci[static_cast<std::size_t>(q)] -
                                          (jets.dtau[q] / 4.0) * jets.g -
                                          (jets.tau / 4.0) * jets.dg[static_cast<std::size_t>(q)];
    auto nablaP = [&](int i, int j, int k) {
        double acc = dP[static_cast<std::size_t>(i)](j, k);
        for (int mm = 0; mm < n; ++mm)
            acc -= jets.gamma[static_cast<std::size_t>(mm)](i, j) * P(mm, k) +
                   jets.gamma[static_cast<std::size_t>(mm)](i, k) * P(j, mm);
        return acc;
    };
    Tensor3 out(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) out(i, j, k) = nablaP(i, j, k) - nablaP(j, i, k);
    return out;
}

}  // namespace

CurvaturePack curvature_pack(const ImmersionPatch& patch, const VectorXd& u,
                             const CurvatureOptions& opts, const SurfaceTolerances& tol) {
    const int n = patch.chart_dim();
    const bool cotton = opts.with_cotton && n == 3;
    const int depth = cotton ? 3 : 2;

    CurvaturePack pack;
    pack.u = u;
    pack.pg = point_geometry(patch, u, depth + 1, tol);
    pack.jets = metric_jets(patch.space(), pack.pg.jet, depth);
    pack.riemann = pack.jets.riemann;
    pack.ricci = pack.jets.ricci;
    pack.tau = pack.jets.tau;
    pack.floor = ratio_floor(pack.jets.g);

    if (opts.with_gauss) {
        const Tensor4 wedge = gauss_wedge(pack.pg.h);
        const double plus = (pack.riemann - wedge).frobenius_norm();
        const double minus = (pack.riemann + wedge).frobenius_norm();
        pack.gauss_sign = plus <= minus ? 1.0 : -1.0;
        pack.gauss_sign_determinate =
            std::max(pack.riemann.frobenius_norm(), wedge.frobenius_norm()) > pack.floor;
        pack.riemann_gauss = pack.gauss_sign * wedge;
    }
    if (opts.with_weyl && n >= 3)
        pack.weyl = weyl_tensor(pack.riemann, pack.ricci, pack.tau, pack.jets.g);
    if (cotton) pack.cotton3 = cotton_tensor(pack.jets);
    return pack;
}

std::vector<MatrixXd> christoffel(const ImmersionPatch& patch, const VectorXd& u,
                                  const SurfaceTolerances& tol) {
    const PointGeometry pg = point_geometry(patch, u, 2, tol);
    return metric_jets(patch.space(), pg.jet, 1).gamma;
}

Tensor4 riemann(const ImmersionPatch& patch, const VectorXd& u, RiemannMethod method,
                const SurfaceTolerances& tol) {
    CurvatureOptions opts;
    opts.with_weyl = false;
    opts.with_cotton = false;
    opts.with_gauss = (method == RiemannMethod::Gauss);
    const CurvaturePack pack = curvature_pack(patch, u, opts, tol);
    return method == RiemannMethod::Intrinsic ? pack.riemann : pack.riemann_gauss;
}

CodazziReport codazzi_residual(const ImmersionPatch& patch, const VectorXd& u,
                               const SurfaceTolerances& tol) {
    const int n = patch.chart_dim();
    const int m = patch.ambient_dim();
    const AmbientSpace& space = patch.space();
    const PointGeometry pg = point_geometry(patch, u, 3, tol);
    const MetricJets jets = metric_jets(space, pg.jet, 1);

    // d_i h_jk = eta(f_ijk, N) + eta(f_jk, d_i N),  d_i N = -A^p_i f_p
    const MatrixXd A = pg.g_inv * pg.h;  // shape operator
    Tensor3 dh(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double acc = 0.0;
                for (int a = 0; a < m; ++a)
                    acc += space.eta(a) * pg.jet.d3v(a, i, j, k) * pg.normal[a];
                for (int p = 0; p < n; ++p) {
                    double tangential = 0.0;
                    for (int a = 0; a < m; ++a)
                        tangential += space.eta(a) * pg.jet.d2v(a, j, k) * pg.jet.d1(a, p);
                    acc -= A(p, i) * tangential;
                }
                dh(i, j, k) = acc;
            }

    auto nabla_h = [&](int i, int j, int k) {
        double acc = dh(i, j, k);
        for (int p = 0; p < n; ++p)
            acc -= jets.gamma[static_cast<std::size_t>(p)](i, j) * pg.h(p, k) +
                   jets.gamma[static_cast<std::size_t>(p)](i, k) * pg.h(j, p);
        return acc;
    };

    CodazziReport report;
    report.residual = Tensor3(n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                report.residual(i, j, k) = nabla_h(i, j, k) - nabla_h(j, i, k);
                scale = std::max(scale, std::abs(dh(i, j, k)));
            }
    double gnorm = 0.0;
    for (const auto& gk : jets.gamma) gnorm = std::max(gnorm, gk.cwiseAbs().maxCoeff());
    report.scale = scale + 2.0 * gnorm * pg.h.cwiseAbs().maxCoeff() + 1e-300;
    return report;
}

const char* to_string(FlatnessVerdict v) {
    switch (v) {
        case FlatnessVerdict::ConformallyFlat: return "conformally_flat";
        case FlatnessVerdict::NotConformallyFlat: return "not_conformally_flat";
        case FlatnessVerdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

FlatnessReport conformal_flatness(const ImmersionPatch& patch, const GridSpec& grid,
                                  double tol, const SurfaceTolerances& stol) {
    const int n = patch.chart_dim();
    if (n < 3) throw GeometryError("conformal flatness test requires n >= 3");

    FlatnessReport report;
    report.tol = tol;
    report.used_cotton = (n == 3);

    CurvatureOptions opts;
    opts.with_gauss = false;
    opts.with_weyl = (n > 3);
    opts.with_cotton = (n == 3);

    double max_ratio = 0.0;
    bool any_above_floor = false;
    VectorXd worst = grid.point(0);
    for (int idx = 0; idx < grid.total(); ++idx) {
        const VectorXd u = grid.point(idx);
        const CurvaturePack pack = curvature_pack(patch, u, opts, stol);
        const double rn = pack.riemann.frobenius_norm();
        const double tn = (n == 3) ? pack.cotton3.frobenius_norm() : pack.weyl.frobenius_norm();
        if (rn >= pack.floor || tn >= pack.floor) any_above_floor = true;
        const double ratio = tn / std::max(rn, pack.floor);
        if (ratio > max_ratio) {
            max_ratio = ratio;
            worst = u;
        }
    }
    report.max_ratio = max_ratio;
    report.worst_u = worst;
    if (!any_above_floor)
        report.verdict = FlatnessVerdict::Indeterminate;
    else
        report.verdict = max_ratio <= tol ? FlatnessVerdict::ConformallyFlat
                                          : FlatnessVerdict::NotConformallyFlat;
    return report;
}

}  // namespace congruence
