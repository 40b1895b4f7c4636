#include "congruence/ambient.hpp"

namespace congruence {

double inner(const AmbientSpace& space, const VectorXd& x, const VectorXd& y) {
    if (x.size() != space.dim_total || y.size() != space.dim_total)
        throw GeometryError("inner: vector dimension does not match ambient space");
    double acc = 0.0;
    for (int i = 0; i < space.dim_total; ++i) acc += space.eta(i) * x[i] * y[i];
    return acc;
}

bool is_isotropic(const AmbientSpace& space, const VectorXd& x, double tol) {
    if (x.size() != space.dim_total) return false;
    const double sup = x.cwiseAbs().maxCoeff();
    if (!(sup > tol)) return false;  // isotropic vectors are nonzero
    return std::abs(inner(space, x, x)) <= tol * sup * sup;
}

double motion_defect(const AmbientSpace& space, const Motion& m) {
    const MatrixXd eta = space.eta_matrix();
    return (m.linear.transpose() * eta * m.linear - eta).cwiseAbs().maxCoeff();
}

bool verify_motion(const AmbientSpace& space, const Motion& m, double tol) {
    if (m.linear.rows() != space.dim_total || m.linear.cols() != space.dim_total ||
        m.translation.size() != space.dim_total)
        return false;
    return motion_defect(space, m) <= tol;
}

VectorXd apply_motion(const Motion& m, const VectorXd& p) {
    if (p.size() != m.linear.cols())
        throw GeometryError("apply_motion: dimension mismatch");
    return m.linear * p + m.translation;
}

}  // namespace congruence
