#include "depgof/kernel_spectrum.hpp"

#include "depgof/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <iomanip>
#include <sstream>

namespace depgof {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

// Orient each eigenvector so that it leans positive on the left half of the
// unit interval; falls back to the sign of the largest entry.
void fix_signs(Eigen::MatrixXd& vectors, const QuantileGrid& grid) {
    for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
        double lean = 0.0;
        for (Eigen::Index i = 0; i < vectors.rows(); ++i) lean += vectors(i, j) * (1.0 - grid[static_cast<std::size_t>(i)]);
        double sign = lean;
        if (std::abs(lean) < 1e-8 * vectors.col(j).cwiseAbs().sum()) {
            Eigen::Index k = 0;
            vectors.col(j).cwiseAbs().maxCoeff(&k);
            sign = vectors(k, j);
        }
        if (sign < 0.0) vectors.col(j) *= -1.0;
    }
}

}  // namespace

Eigen::MatrixXd Spectrum::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

std::string Spectrum::digest() const {
    // FNV-1a over the raw bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    const auto feed = [&](const double* data, Eigen::Index count) {
        for (Eigen::Index k = 0; k < count; ++k) {
            std::uint64_t bits = 0;
            std::memcpy(&bits, data + k, sizeof bits);
            for (int b = 0; b < 8; ++b) {
                h ^= (bits >> (8 * b)) & 0xffU;
                h *= 0x100000001b3ULL;
            }
        }
    };
    feed(eigenvalues.data(), eigenvalues.size());
    feed(eigenvectors.data(), eigenvectors.size());
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

KernelMatrix brownian_bridge_kernel(const QuantileGrid& grid) {
    const auto m = static_cast<Eigen::Index>(grid.size());
    KernelMatrix k{grid, Eigen::MatrixXd(m, m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double u = grid[static_cast<std::size_t>(i)];
            const double v = grid[static_cast<std::size_t>(j)];
            k.values(i, j) = std::min(u, v) - u * v;
        }
    }
    return k;
}

KernelMatrix build_kernel_from_psi(const PsiSurface& psi) {
    if (!psi.values.allFinite()) throw NumericalError("psi surface contains non-finite values");
    KernelMatrix k = brownian_bridge_kernel(psi.grid);
    k.values.array() *= (1.0 + psi.values.array());
    return k;
}

double ar1_kernel_coefficient(const Ar1LogVolParams& params) {
    params.validate();
    const double g = params.g;
    return 2.0 * g * params.sigma2 / ((1.0 - g) * (1.0 - g) * (1.0 + g));
}

KernelMatrix build_kernel_ar1(const Ar1LogVolParams& params, const QuantileGrid& grid,
                              const LognormalVolModel& model) {
    return build_kernel_expansion({0.5 * ar1_kernel_coefficient(params), 0.0, 0.0}, grid, model);
}

double fgn_weighted_alpha_sum(const FgnLogVolParams& params, std::size_t n) {
    if (n < 2) throw DomainError("sample size must be at least 2");
    double sum = 0.0;
    const auto nd = static_cast<double>(n);
    for (std::size_t t = 1; t <= n; ++t) sum += (1.0 - static_cast<double>(t) / nd) * fgn_alpha(params, t);
    return sum;
}

KernelMatrix build_kernel_fgn(const FgnLogVolParams& params, std::size_t n, const QuantileGrid& grid,
                              const LognormalVolModel& model) {
    return build_kernel_expansion({fgn_weighted_alpha_sum(params, n), 0.0, 0.0}, grid, model);
}

ExpansionSums weighted_sums(const std::vector<LagCoefficients>& coeffs, std::size_t n) {
    ExpansionSums s;
    const auto nd = static_cast<double>(n);
    for (const auto& c : coeffs) {
        if (c.t < 1 || c.t >= n) continue;
        const double w = 1.0 - static_cast<double>(c.t) / nd;
        s.alpha += w * c.alpha;
        s.beta += w * c.beta;
        s.rho += w * c.rho;
    }
    return s;
}

KernelMatrix build_kernel_expansion(const ExpansionSums& sums, const QuantileGrid& grid,
                                    const LognormalVolModel& model) {
    const auto& basis = model.basis(grid);
    const auto a = as_vector(basis.a);
    const auto r = as_vector(basis.r);
    KernelMatrix k = brownian_bridge_kernel(grid);
    const Eigen::MatrixXd b = r * a.transpose();
    k.values += 2.0 * sums.alpha * (a * a.transpose()) + 2.0 * sums.rho * (r * r.transpose()) -
                sums.beta * (b + b.transpose());
    return k;
}

Spectrum eigendecompose(const KernelMatrix& kernel, const EigenOptions& options) {
    const auto& h = kernel.values;
    const auto m = static_cast<Eigen::Index>(kernel.grid.size());
    if (h.rows() != m || h.cols() != m) throw DomainError("kernel shape does not match its grid");
    if (!h.allFinite()) throw NumericalError("kernel contains non-finite values");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw DomainError("kernel is not symmetric");

    const double w = kernel.grid.weight();
    const Eigen::MatrixXd weighted = 0.5 * (h + h.transpose()) * w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weighted);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");

    Spectrum s{kernel.grid, solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse() / std::sqrt(w)};
    for (Eigen::Index j = 0; j < m; ++j) {
        double& lambda = s.eigenvalues(j);
        if (lambda < -options.clamp_tolerance) {
            std::ostringstream msg;
            msg << "kernel is indefinite: eigenvalue " << lambda
                << " below tolerance; the dependence correction is likely dominated by noise from large lags. "
                   "Try a semi-parametric truncation: sum the non-parametric copulas only up to the lag where short-ranged "
                   "effects vanish and model the remaining long-ranged mode parametrically.";
            throw NumericalError(msg.str());
        }
        if (lambda < 0.0) lambda = 0.0;
    }
    fix_signs(s.eigenvectors, s.grid);
    return s;
}

CmMoments cm_moments(const KernelMatrix& kernel) {
    const double w = kernel.grid.weight();
    return {kernel.values.trace() * w, 2.0 * kernel.values.squaredNorm() * w * w};
}

OperatorTraces operator_traces(const QuantileGrid& grid, const LognormalVolModel& model) {
    const auto& basis = model.basis(grid);
    const auto a = as_vector(basis.a);
    const auto r = as_vector(basis.r);
    const double w = grid.weight();
    const Eigen::MatrixXd i = brownian_bridge_kernel(grid).values;
    OperatorTraces t;
    t.tr_i = i.trace() * w;
    t.tr_a = a.squaredNorm() * w;
    t.tr_r = r.squaredNorm() * w;
    t.tr_i2 = i.squaredNorm() * w * w;
    t.tr_ia = a.dot(i * a) * w * w;
    t.tr_ir = r.dot(i * r) * w * w;
    t.tr_b_plus_bt = 2.0 * r.dot(a) * w;
    return t;
}

}  // namespace depgof
