#pragma once

#include <string>

#include "congruence/classify.hpp"
#include "congruence/curvature.hpp"
#include "congruence/mapanalysis.hpp"

namespace congruence {

// Grid sweep of one patch: curvature consistency checks, classification
// fractions, conformal flatness. Residuals are normalized as documented on
// each field.
struct SurfaceAnalysis {
    std::string name;
    int n = 0;
    int grid_points = 0;
    DensityReport density;
    FlatnessReport flatness{};
    double tau_min = 0.0, tau_max = 0.0;
    double max_riemann_norm = 0.0;
    double max_flatness_ratio = 0.0;       // ||C|| (or cotton) / max(||R||, floor)
    double max_weyl_ratio = 0.0;           // ||C|| / max(||R||, floor), n >= 3
    double max_gauss_residual = 0.0;       // ||R - eps (h^h)|| / max(||R||, floor)
    double max_codazzi_residual = 0.0;     // max entry / cancellation scale
    double max_symmetry_residual = 0.0;    // Riemann symmetries + first Bianchi, / ||R||
    double max_weyl_trace_residual = 0.0;  // g-contractions of C, / max(||C||, floor)
    double gauss_sign = 1.0;               // resolved sign of the Gauss equation
    bool gauss_sign_consistent = true;     // across determinate grid points
    double eps_normal = 1.0;               // eta(N,N), first grid point
    bool metric_indefinite = false;
};

SurfaceAnalysis analyze_surface(const ImmersionPatch& patch, const GridSpec& grid,
                                const AnalysisConfig& config);

}  // namespace congruence
