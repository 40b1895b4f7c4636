#pragma once

#include <cstdint>
#include <vector>

#include "congruence/surface.hpp"

namespace congruence {

enum class PointKind { Umbilic, QuasiUmbilic, Generic };

const char* to_string(PointKind k);

// Pointwise algebraic type of h relative to g, with the decomposition
// h = alpha g + beta omega (x) omega recovered when it exists.
struct PointClass {
    PointKind kind;
    double alpha = 0.0;
    double beta = 0.0;
    VectorXd omega;            // covector, ||omega||_inf = 1, first nonzero entry > 0
    double residual = 0.0;     // || h - alpha g - beta omega omega^T ||_inf
    double omega_g_norm2 = 0.0;  // g^{ij} omega_i omega_j; ~0 flags isotropic omega
    double scale = 0.0;        // ||h||_inf + ||g||_inf at the point
};

struct IsotropicSample {
    std::vector<VectorXd> vectors;
    MatrixXd metric_used;
};

// `count` vectors on the null cone of an indefinite g, exact to one quadratic
// root-polish. Deterministic for a fixed seed. Throws on definite metrics.
IsotropicSample sample_isotropic(const MatrixXd& g, int count, std::uint64_t seed);

struct Lemma1Result {
    bool proportional;
    double c = 0.0;          // when proportional
    VectorXd witness;        // when not: the worst violating cone vector
    double violation = 0.0;  // |L(xi,xi)| / (||L|| ||xi||^2) of the witness
};

// Executable content of the isotropic-restriction lemma: L vanishing on the
// cone forces L = c g. If all samples pass but L - cg is large, sampling was
// insufficient; that inconsistency throws rather than passing silently.
Lemma1Result lemma1_fit(const MatrixXd& L, const MatrixXd& g, const IsotropicSample& samples,
                        double tol);

PointClass classify_point(const PointGeometry& pg, double tol);

struct DensityReport {
    double umbilic_fraction = 0.0;
    double quasi_umbilic_fraction = 0.0;
    double generic_fraction = 0.0;
    int total = 0;
};

DensityReport density_scan(const ImmersionPatch& patch, const GridSpec& grid, double tol,
                           const SurfaceTolerances& stol = {});

}  // namespace congruence
