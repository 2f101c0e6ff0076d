#pragma once

#include <cstddef>
#include <vector>

namespace depgof {

/// Interior quantile lattice u_i = i / (m + 1), i = 1..m, each carrying the
/// quadrature weight 1 / (m + 1). The end points 0 and 1, where every bridge
/// vanishes, are excluded.
class QuantileGrid {
public:
    explicit QuantileGrid(std::size_t m = 100);

    std::size_t size() const { return points_.size(); }
    double weight() const { return 1.0 / static_cast<double>(points_.size() + 1); }
    double operator[](std::size_t i) const { return points_[i]; }
    const std::vector<double>& points() const { return points_; }

    /// Index of the grid point closest to u.
    std::size_t nearest(double u) const;

    friend bool operator==(const QuantileGrid& a, const QuantileGrid& b) { return a.size() == b.size(); }

private:
    std::vector<double> points_;
};

}  // namespace depgof
