#pragma once

#include <cstddef>
#include <vector>

namespace depgof {

/// Gauss-Hermite rule rescaled to the standard normal weight:
///   integral phi(w) f(w) dw  ~=  sum_k weights[k] * f(nodes[k]).
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    template <class F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) acc += weights[k] * f(nodes[k]);
        return acc;
    }
};

/// n-point rule computed by Newton iteration on the orthonormal Hermite
/// recurrence.
GaussHermiteRule gauss_hermite(std::size_t n);

}  // namespace depgof
