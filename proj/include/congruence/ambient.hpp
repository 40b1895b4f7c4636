#pragma once

#include <Eigen/Dense>

#include "congruence/errors.hpp"

namespace congruence {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Flat pseudo-Euclidean ambient space with metric
// eta = diag(-1,...,-1,+1,...,+1), the minus signs first.
struct AmbientSpace {
    int dim_total;  // n+1
    int neg_count;  // s

    AmbientSpace(int dim_total_, int neg_count_)
        : dim_total(dim_total_), neg_count(neg_count_) {
        if (dim_total < 4)
            throw GeometryError("ambient dimension must be at least 4 (n > 2)");
        if (neg_count < 0 || neg_count > dim_total)
            throw GeometryError("signature out of range");
    }

    int surface_dim() const { return dim_total - 1; }

    double eta(int i) const { return i < neg_count ? -1.0 : 1.0; }

    VectorXd eta_diagonal() const {
        VectorXd d(dim_total);
        for (int i = 0; i < dim_total; ++i) d[i] = eta(i);
        return d;
    }

    MatrixXd eta_matrix() const { return eta_diagonal().asDiagonal(); }
};

// Affine map p -> A p + b. A candidate motion until verified.
struct Motion {
    MatrixXd linear;
    VectorXd translation;

    Motion() = default;
    Motion(MatrixXd a, VectorXd b) : linear(std::move(a)), translation(std::move(b)) {}

    static Motion identity(const AmbientSpace& space) {
        return Motion(MatrixXd::Identity(space.dim_total, space.dim_total),
                      VectorXd::Zero(space.dim_total));
    }

    Motion compose(const Motion& inner) const {  // this after inner
        return Motion(linear * inner.linear, linear * inner.translation + translation);
    }

    Motion inverse() const {
        MatrixXd ainv = linear.inverse();
        return Motion(ainv, -ainv * translation);
    }
};

double inner(const AmbientSpace& space, const VectorXd& x, const VectorXd& y);

bool is_isotropic(const AmbientSpace& space, const VectorXd& x, double tol);

// true iff  ||A^T eta A - eta||_inf <= tol
bool verify_motion(const AmbientSpace& space, const Motion& m, double tol);

double motion_defect(const AmbientSpace& space, const Motion& m);

VectorXd apply_motion(const Motion& m, const VectorXd& p);

}  // namespace congruence
