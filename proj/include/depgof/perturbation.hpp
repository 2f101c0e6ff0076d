#pragma once

#include "depgof/kernel_spectrum.hpp"
#include "depgof/lognormal_model.hpp"

#include <array>
#include <vector>

namespace depgof {

/// Projections of the normalized rank-one modes U0^A = A~/sqrt(Tr A) and
/// U0^R = R~/sqrt(Tr R) on the Brownian bridge eigenbasis |j> = sqrt(2) sin(j pi u).
struct ModeOverlaps {
    double tr_a = 0.0;
    double tr_r = 0.0;
    /// <U0^A|j> and <U0^R|j> for j = 1..size (index j - 1).
    std::vector<double> a_proj;
    std::vector<double> r_proj;

    std::size_t size() const { return a_proj.size(); }
    double a2() const { return a_proj.at(1); }
    double r1() const { return r_proj.at(0); }
    double eps_a() const;
    double eps_r() const;
};

/// Overlaps by quadrature on an interior lattice of `quad_points` nodes.
ModeOverlaps compute_mode_overlaps(const LognormalVolModel& model = reference_model(), std::size_t n_modes = 64,
                                   std::size_t quad_points = 400);

/// Effective strengths of the three rank-one perturbations of the bridge kernel:
/// H = I + alpha_bar P_A + rho_bar P_R - (beta_bar/2)(|U0^R><U0^A| + |U0^A><U0^R|).
struct PerturbativeInputs {
    double alpha_bar = 0.0;
    double rho_bar = 0.0;
    double beta_bar = 0.0;

    /// alpha_bar = 2 Tr A S_a, rho_bar = 2 Tr R S_r, beta_bar = 2 sqrt(Tr A Tr R) S_b.
    static PerturbativeInputs from_sums(const ExpansionSums& sums, double tr_a, double tr_r);

    /// Any strength above 0.5: the expansion is not guaranteed.
    bool outside_small_regime() const;
};

/// Exact operator the perturbative spectrum approximates, on a grid.
KernelMatrix build_kernel_perturbative(const PerturbativeInputs& in, const ModeOverlaps& ov, const QuantileGrid& grid,
                                       const LognormalVolModel& model = reference_model());

/// lambda_+ >= lambda_-: exact eigenvalues of H restricted to {|1>, |2>}.
std::array<double, 2> leading_block_eigenvalues(const PerturbativeInputs& in, const ModeOverlaps& ov);

/// Leading-order spectrum: the {|1>, |2>} block diagonalized exactly, all
/// eigenvalues corrected at second order through the couplings to |j >= 3>,
/// eigenvectors corrected at first order. Returns ov.size() modes evaluated
/// on `grid`, eigenvalues descending.
Spectrum perturbative_spectrum(const PerturbativeInputs& in, const ModeOverlaps& ov, const QuantileGrid& grid);

}  // namespace depgof
