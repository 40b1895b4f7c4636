#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace congruence {

// Regular sampling grid over a chart box, shrunk 10% from each boundary so
// that chart-degenerate edges (spherical poles and the like) are avoided.
class GridSpec {
public:
    GridSpec(std::vector<std::pair<double, double>> domain, int per_axis)
        : domain_(std::move(domain)), per_axis_(per_axis) {
        total_ = 1;
        for (std::size_t i = 0; i < domain_.size(); ++i) total_ *= per_axis_;
    }

    int axes() const { return static_cast<int>(domain_.size()); }
    int per_axis() const { return per_axis_; }
    int total() const { return total_; }

    double coord(int axis, int step) const {
        const auto [lo, hi] = domain_[static_cast<std::size_t>(axis)];
        const double margin = 0.1 * (hi - lo);
        const double a = lo + margin, b = hi - margin;
        if (per_axis_ == 1) return 0.5 * (a + b);
        return a + (b - a) * step / (per_axis_ - 1);
    }

    std::vector<int> steps_of(int flat) const {
        std::vector<int> s(static_cast<std::size_t>(axes()));
        for (int a = axes() - 1; a >= 0; --a) {
            s[static_cast<std::size_t>(a)] = flat % per_axis_;
            flat /= per_axis_;
        }
        return s;
    }

    int flat_of(const std::vector<int>& steps) const {
        int f = 0;
        for (int a = 0; a < axes(); ++a) f = f * per_axis_ + steps[static_cast<std::size_t>(a)];
        return f;
    }

    Eigen::VectorXd point(int flat) const {
        const auto s = steps_of(flat);
        Eigen::VectorXd u(axes());
        for (int a = 0; a < axes(); ++a) u[a] = coord(a, s[static_cast<std::size_t>(a)]);
        return u;
    }

    // Flat indices of the grid line through `flat` along `axis`, in step order.
    std::vector<int> line_through(int flat, int axis) const {
        auto s = steps_of(flat);
        std::vector<int> line(static_cast<std::size_t>(per_axis_));
        for (int k = 0; k < per_axis_; ++k) {
            s[static_cast<std::size_t>(axis)] = k;
            line[static_cast<std::size_t>(k)] = flat_of(s);
        }
        return line;
    }

    int nearest_index(const Eigen::VectorXd& u) const {
        std::vector<int> s(static_cast<std::size_t>(axes()));
        for (int a = 0; a < axes(); ++a) {
            int best = 0;
            double bestd = std::abs(coord(a, 0) - u[a]);
            for (int k = 1; k < per_axis_; ++k) {
                const double d = std::abs(coord(a, k) - u[a]);
                if (d < bestd) {
                    bestd = d;
                    best = k;
                }
            }
            s[static_cast<std::size_t>(a)] = best;
        }
        return flat_of(s);
    }

private:
    std::vector<std::pair<double, double>> domain_;
    int per_axis_;
    int total_;
};

}  // namespace congruence
