#include "depgof/perturbation.hpp"

#include "depgof/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace depgof {

namespace {

double bridge_eigenvalue(std::size_t j) {
    const double x = static_cast<double>(j) * std::numbers::pi;
    return 1.0 / (x * x);
}

double sine_mode(std::size_t j, double u) {
    return std::numbers::sqrt2 * std::sin(static_cast<double>(j) * std::numbers::pi * u);
}

struct LeadingBlock {
    std::array<double, 2> eigenvalues{};
    std::array<std::array<double, 2>, 2> components{};  // on (|1>, |2>)
};

// Exact diagonalization of H restricted to {|1>, |2>}.
LeadingBlock leading_block(const PerturbativeInputs& in, const ModeOverlaps& ov) {
    const double a2 = ov.a2();
    const double r1 = ov.r1();
    const double d1 = bridge_eigenvalue(1) + in.rho_bar * r1 * r1;
    const double d2 = bridge_eigenvalue(2) + in.alpha_bar * a2 * a2;
    const double off = -0.5 * in.beta_bar * r1 * a2;
    const double mean = 0.5 * (d1 + d2);
    const double half_gap = std::sqrt(0.25 * (d1 - d2) * (d1 - d2) + off * off);
    LeadingBlock b;
    b.eigenvalues = {mean + half_gap, mean - half_gap};
    if (std::abs(off) < 1e-300) {
        if (d1 >= d2) b.components = {{{1.0, 0.0}, {0.0, 1.0}}};
        else b.components = {{{0.0, 1.0}, {1.0, 0.0}}};
        return b;
    }
    for (int i = 0; i < 2; ++i) {
        // (d1 - l) x + off y = 0  ->  (x, y) ~ (off, l - d1)
        const double x = off;
        const double y = b.eigenvalues[i] - d1;
        const double nrm = std::hypot(x, y);
        b.components[i] = {x / nrm, y / nrm};
    }
    return b;
}

}  // namespace

double ModeOverlaps::eps_a() const { return std::sqrt(std::max(0.0, 1.0 - a2() * a2())); }
double ModeOverlaps::eps_r() const { return std::sqrt(std::max(0.0, 1.0 - r1() * r1())); }

ModeOverlaps compute_mode_overlaps(const LognormalVolModel& model, std::size_t n_modes, std::size_t quad_points) {
    if (n_modes < 2) throw DomainError("mode overlaps need at least two modes");
    const QuantileGrid quad(quad_points);
    const auto& basis = model.basis(quad);
    const double w = quad.weight();

    ModeOverlaps ov;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        ov.tr_a += basis.a[i] * basis.a[i] * w;
        ov.tr_r += basis.r[i] * basis.r[i] * w;
    }
    const double na = std::sqrt(ov.tr_a);
    const double nr = std::sqrt(ov.tr_r);
    ov.a_proj.assign(n_modes, 0.0);
    ov.r_proj.assign(n_modes, 0.0);
    for (std::size_t j = 1; j <= n_modes; ++j) {
        double pa = 0.0;
        double pr = 0.0;
        for (std::size_t i = 0; i < quad.size(); ++i) {
            const double s = sine_mode(j, quad[i]);
            pa += basis.a[i] * s;
            pr += basis.r[i] * s;
        }
        ov.a_proj[j - 1] = pa * w / na;
        ov.r_proj[j - 1] = pr * w / nr;
    }
    return ov;
}

PerturbativeInputs PerturbativeInputs::from_sums(const ExpansionSums& sums, double tr_a, double tr_r) {
    return {2.0 * tr_a * sums.alpha, 2.0 * tr_r * sums.rho, 2.0 * std::sqrt(tr_a * tr_r) * sums.beta};
}

bool PerturbativeInputs::outside_small_regime() const {
    return std::abs(alpha_bar) > 0.5 || std::abs(rho_bar) > 0.5 || std::abs(beta_bar) > 0.5;
}

KernelMatrix build_kernel_perturbative(const PerturbativeInputs& in, const ModeOverlaps& ov, const QuantileGrid& grid,
                                       const LognormalVolModel& model) {
    ExpansionSums sums;
    sums.alpha = in.alpha_bar / (2.0 * ov.tr_a);
    sums.rho = in.rho_bar / (2.0 * ov.tr_r);
    sums.beta = in.beta_bar / (2.0 * std::sqrt(ov.tr_a * ov.tr_r));
    return build_kernel_expansion(sums, grid, model);
}

std::array<double, 2> leading_block_eigenvalues(const PerturbativeInputs& in, const ModeOverlaps& ov) {
    return leading_block(in, ov).eigenvalues;
}

Spectrum perturbative_spectrum(const PerturbativeInputs& in, const ModeOverlaps& ov, const QuantileGrid& grid) {
    const std::size_t n_modes = ov.size();
    const double a2 = ov.a2();
    const double r1 = ov.r1();
    const double al = in.alpha_bar;
    const double rh = in.rho_bar;
    const double be = in.beta_bar;

    const LeadingBlock block = leading_block(in, ov);
    const auto& lambda0 = block.eigenvalues;
    const auto& c = block.components;

    // Couplings V_{i,j} = <U_i^{H0}| H - H0 |j> for j >= 3.
    std::vector<std::array<double, 2>> v(n_modes + 1, {0.0, 0.0});
    for (std::size_t j = 3; j <= n_modes; ++j) {
        const double aj = ov.a_proj[j - 1];
        const double rj = ov.r_proj[j - 1];
        for (int i = 0; i < 2; ++i) {
            v[j][i] = (rh * r1 * c[i][0] - 0.5 * be * a2 * c[i][1]) * rj +
                      (al * a2 * c[i][1] - 0.5 * be * r1 * c[i][0]) * aj;
        }
    }
    const auto safe_ratio = [](double num, double den) { return std::abs(den) < 1e-14 ? 0.0 : num / den; };

    std::vector<double> eigenvalues(n_modes);
    for (int i = 0; i < 2; ++i) {
        double shift = 0.0;
        for (std::size_t j = 3; j <= n_modes; ++j) shift += safe_ratio(v[j][i] * v[j][i], lambda0[i] - bridge_eigenvalue(j));
        eigenvalues[i] = lambda0[i] + shift;
    }
    for (std::size_t j = 3; j <= n_modes; ++j) {
        const double lj = bridge_eigenvalue(j);
        const double aj = ov.a_proj[j - 1];
        const double rj = ov.r_proj[j - 1];
        double shift = al * aj * aj + rh * rj * rj - be * aj * rj;
        for (int i = 0; i < 2; ++i) shift += safe_ratio(v[j][i] * v[j][i], lj - lambda0[i]);
        eigenvalues[j - 1] = lj + shift;
    }

    // First-order eigenvectors on the grid.
    const auto m = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXd sines(m, static_cast<Eigen::Index>(n_modes));
    for (Eigen::Index r = 0; r < m; ++r) {
        for (std::size_t j = 1; j <= n_modes; ++j) sines(r, static_cast<Eigen::Index>(j - 1)) = sine_mode(j, grid[static_cast<std::size_t>(r)]);
    }
    Eigen::MatrixXd vectors(m, static_cast<Eigen::Index>(n_modes));
    std::array<Eigen::VectorXd, 2> base;
    for (int i = 0; i < 2; ++i) {
        base[i] = c[i][0] * sines.col(0) + c[i][1] * sines.col(1);
        Eigen::VectorXd col = base[i];
        for (std::size_t j = 3; j <= n_modes; ++j) {
            col += safe_ratio(v[j][i], lambda0[i] - bridge_eigenvalue(j)) * sines.col(static_cast<Eigen::Index>(j - 1));
        }
        vectors.col(i) = col;
    }
    for (std::size_t j = 3; j <= n_modes; ++j) {
        Eigen::VectorXd col = sines.col(static_cast<Eigen::Index>(j - 1));
        for (int i = 0; i < 2; ++i) col += safe_ratio(v[j][i], bridge_eigenvalue(j) - lambda0[i]) * base[i];
        vectors.col(static_cast<Eigen::Index>(j - 1)) = col;
    }

    std::vector<std::size_t> order(n_modes);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eigenvalues[a] > eigenvalues[b]; });

    Spectrum s{grid, Eigen::VectorXd(static_cast<Eigen::Index>(n_modes)), Eigen::MatrixXd(m, static_cast<Eigen::Index>(n_modes))};
    for (std::size_t k = 0; k < n_modes; ++k) {
        s.eigenvalues(static_cast<Eigen::Index>(k)) = eigenvalues[order[k]];
        s.eigenvectors.col(static_cast<Eigen::Index>(k)) = vectors.col(static_cast<Eigen::Index>(order[k]));
    }
    return s;
}

}  // namespace depgof
