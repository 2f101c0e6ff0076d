#include "depgof/kernel_spectrum.hpp"
#include "depgof/perturbation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace depgof;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

const ModeOverlaps& overlaps() {
    static const ModeOverlaps ov = compute_mode_overlaps();
    return ov;
}

}  // namespace

TEST(ModeOverlaps, NearAlignmentAndParity) {
    const auto& ov = overlaps();
    EXPECT_NEAR(ov.a2(), 0.9934, 1e-3);
    EXPECT_NEAR(ov.r1(), 0.9998, 5e-4);
    EXPECT_GE(std::abs(ov.a2()), 0.99);
    EXPECT_GE(std::abs(ov.r1()), 0.999);
    EXPECT_NEAR(ov.eps_a(), std::sqrt(1.0 - ov.a2() * ov.a2()), 1e-15);
    double na = 0.0, nr = 0.0;
    for (std::size_t j = 1; j <= ov.size(); ++j) {
        // A~ is odd about 1/2 and only sees even sines; R~ is even and only odd ones.
        if (j % 2 == 1) EXPECT_NEAR(ov.a_proj[j - 1], 0.0, 1e-12);
        else EXPECT_NEAR(ov.r_proj[j - 1], 0.0, 1e-12);
        na += ov.a_proj[j - 1] * ov.a_proj[j - 1];
        nr += ov.r_proj[j - 1] * ov.r_proj[j - 1];
    }
    EXPECT_NEAR(na, 1.0, 1e-3);
    EXPECT_NEAR(nr, 1.0, 1e-3);
}

TEST(Perturbative, UnperturbedIsTheBridge) {
    const QuantileGrid g(100);
    const Spectrum s = perturbative_spectrum({0.0, 0.0, 0.0}, overlaps(), g);
    ASSERT_EQ(s.modes(), overlaps().size());
    for (int j = 1; j <= 10; ++j) EXPECT_NEAR(s.eigenvalues(j - 1), 1.0 / (j * j * kPi2), 1e-15);
    const auto block = leading_block_eigenvalues({0.0, 0.0, 0.0}, overlaps());
    EXPECT_NEAR(block[0], 1.0 / kPi2, 1e-15);
    EXPECT_NEAR(block[1], 1.0 / (4.0 * kPi2), 1e-15);
}

TEST(Perturbative, PureVolatilityBlock) {
    const auto block = leading_block_eigenvalues({0.1, 0.0, 0.0}, overlaps());
    // lambda_2 = 1/(4 pi^2) + alpha a2^2 overtakes 1/pi^2.
    EXPECT_NEAR(block[0], 0.025330 + 0.1 * 0.98684, 2e-4);
    EXPECT_NEAR(block[1], 1.0 / kPi2, 1e-15);
}

TEST(Perturbative, AgreesWithNumericalEigensolver) {
    const QuantileGrid g(100);
    for (const PerturbativeInputs in : {PerturbativeInputs{0.05, 0.02, 0.01}, PerturbativeInputs{0.02, 0.05, -0.03},
                                        PerturbativeInputs{0.01, 0.0, 0.05}}) {
        ASSERT_FALSE(in.outside_small_regime());
        const Spectrum approx = perturbative_spectrum(in, overlaps(), g);
        const Spectrum exact = eigendecompose(build_kernel_perturbative(in, overlaps(), g));
        for (Eigen::Index j = 0; j < 5; ++j) EXPECT_NEAR(approx.eigenvalues(j), exact.eigenvalues(j), 5e-4) << j;
        // First-order eigenvectors align with the exact ones.
        for (Eigen::Index j = 0; j < 3; ++j) {
            const double dot = approx.eigenvectors.col(j).dot(exact.eigenvectors.col(j)) * g.weight();
            const double norm = approx.eigenvectors.col(j).squaredNorm() * g.weight();
            EXPECT_GE(std::abs(dot) / std::sqrt(norm), 0.999) << j;
        }
    }
}

TEST(Perturbative, InputsFromSums) {
    const auto& ov = overlaps();
    const ExpansionSums sums{0.4, -0.1, 0.2};
    const auto in = PerturbativeInputs::from_sums(sums, ov.tr_a, ov.tr_r);
    EXPECT_NEAR(in.alpha_bar, 2.0 * ov.tr_a * 0.4, 1e-15);
    EXPECT_NEAR(in.rho_bar, 2.0 * ov.tr_r * 0.2, 1e-15);
    EXPECT_NEAR(in.beta_bar, -2.0 * std::sqrt(ov.tr_a * ov.tr_r) * 0.1, 1e-15);
    const QuantileGrid g(30);
    EXPECT_LT((build_kernel_perturbative(in, ov, g).values - build_kernel_expansion(sums, g).values).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_TRUE((PerturbativeInputs{0.6, 0.0, 0.0}.outside_small_regime()));
    EXPECT_TRUE((PerturbativeInputs{0.0, 0.0, -0.51}.outside_small_regime()));
}
