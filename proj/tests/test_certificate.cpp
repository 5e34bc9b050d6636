#include <heatchain/certificate.hpp>
#include <heatchain/rng.hpp>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/zeta.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace heatchain;

namespace {

PolymerParams params(double zeta, double lambda)
{
    PolymerParams P;
    P.zeta = zeta;
    P.M = 3.0 * zeta * zeta / 4.0;
    P.lambda = lambda;
    P.J = 1.0;
    P.p = 2.0;
    P.T = 1.0;
    return P;
}

} // namespace

TEST(Certificate, DecayKernelExamples)
{
    EXPECT_DOUBLE_EQ(decay_kernel(1.0, {0, 0}, {0, 0}, 2.0), 1.0);
    EXPECT_DOUBLE_EQ(decay_kernel(1.0, {0, 0}, {2, 0}, 2.0), std::exp(-2.0));
    EXPECT_DOUBLE_EQ(decay_kernel(1.0, {0, 0}, {0, 2}, 2.0), 0.25);
    EXPECT_DOUBLE_EQ(decay_kernel(0.5, {3, 4}, {1, 1}, 3.0), std::exp(-1.0) / 27.0);
}

TEST(Certificate, TimeConvolutionConstantBruteForce)
{
    const double w1 = 2.0 / 3.0, w2 = 1.0;
    double worst = 0.0;
    for (int D = 0; D <= 60; ++D) {
        double s = 0.0;
        for (int t = -3000; t <= 3000; ++t)
            s += std::exp(-w1 * std::abs(t) - w2 * std::abs(D - t));
        worst = std::max(worst, s / std::exp(-w1 * D));
    }
    double c = time_convolution_constant(w1, w2);
    EXPECT_GE(c, worst * (1.0 - 1e-12));
    EXPECT_NEAR(c, worst, 1e-6 * worst);
    EXPECT_THROW(time_convolution_constant(1.0, 0.5), ValidationError);
}

TEST(Certificate, SpaceConvolutionConstant)
{
    for (double p : {1.5, 2.0, 3.0}) {
        double c = space_convolution_constant(p);
        double cx = space_convolution_constant(p, true);
        EXPECT_LT(cx, c);
        double z = boost::math::zeta(p);
        EXPECT_GE(c, 2.0 * (1.0 + 2.0 * z) - 1e-9);
        EXPECT_GE(cx, 4.0 * z - 1e-9);
        // direct sums at a few separations
        for (long d : {1L, 2L, 7L}) {
            double s = 0.0;
            for (long k = -200000; k <= 200000; ++k) {
                double a = k == 0 ? 1.0 : std::pow(double(std::labs(k)), -p);
                double b = k == d ? 1.0 : std::pow(double(std::labs(d - k)), -p);
                s += a * b;
            }
            EXPECT_LE(s * std::pow(double(d), p), c * (1.0 + 1e-9)) << p << " " << d;
        }
    }
}

TEST(Certificate, RowSumConstantBruteForce)
{
    const double p = 2.0;
    double sp = 1.0;
    for (long k = 1; k <= 1000000; ++k)
        sp += 2.0 * std::pow(double(k), -p);
    double s = -1.0; // drop y = x
    for (int t = -60; t <= 60; ++t)
        s += std::exp(-std::abs(t)) * sp;
    EXPECT_NEAR(row_sum_constant(p), s, 1e-5);
}

TEST(Certificate, BoxConvolutionBelowProductConstant)
{
    const double w1 = 2.0 / 3.0, w2 = 1.0, p = 2.0;
    double box = convolution_ratio_on_box(w1, w2, p, 5, 5);
    EXPECT_GT(box, 0.0);
    EXPECT_LE(box, time_convolution_constant(w1, w2) * space_convolution_constant(p));
}

TEST(Certificate, GammaRatioBruteForce)
{
    using boost::math::tgamma;
    double worst = 0.0;
    for (int d = 1; d <= 30; ++d)
        for (int n = 0; n <= 3 * d; ++n)
            for (int m = 0; m <= d; ++m)
                if (n + m >= d)
                    worst = std::max(worst, tgamma((1.0 + n) / 6.0) * tgamma((1.0 + m) / 2.0) / tgamma(double(d)));
    EXPECT_GE(gamma_ratio_constant(), worst * (1.0 - 1e-12));
    EXPECT_NEAR(gamma_ratio_constant(30), worst, 1e-12 * worst);
}

TEST(Certificate, CeilingsScaleWithLambda)
{
    auto a = kp_check(params(20.0, 1e6));
    auto b = kp_check(params(20.0, 8e6));
    const double expect[6] = {2.0, 4.0, 4.0, 2.0, 4.0, 1.0};
    for (int k = 0; k < 6; ++k)
        EXPECT_NEAR(a.A[k] / b.A[k], expect[k], 1e-9) << "A" << k + 1;
    EXPECT_DOUBLE_EQ(a.K, *std::max_element(a.A.begin(), a.A.end()));
}

TEST(Certificate, PassesInWeakCouplingRegime)
{
    auto c = kp_check(params(20.0, 1e6));
    EXPECT_TRUE(c.pass) << c.reason;
    EXPECT_TRUE(c.hypothesis_ok);
    EXPECT_LT(c.eps, 1.0);
    EXPECT_GT(c.margin, 0.0);
    EXPECT_NEAR(c.kp_sum, c.c * c.eps / (1.0 - c.eps), 1e-12);
    EXPECT_NEAR(c.m_prime, decay_rate(c.eps, 1.0 / 20.0), 1e-9);
    EXPECT_GT(c.m_prime, 0.0);
}

TEST(Certificate, EpsDecreasesWithLambda)
{
    for (double zeta : {20.0, 50.0}) {
        double prev = INFINITY;
        for (double lam = 1e6; lam <= 1e12; lam *= 10.0) {
            auto c = kp_check(params(zeta, lam));
            EXPECT_LT(c.eps, prev) << zeta << " " << lam;
            prev = c.eps;
        }
    }
}

TEST(Certificate, FailsWithReasonOutsideRegime)
{
    auto c = kp_check(params(20.0, 1e3));
    EXPECT_FALSE(c.pass);
    EXPECT_FALSE(c.reason.empty());
    EXPECT_NE(c.reason, "ok");
}

TEST(Certificate, StabilityPolynomialBoundsPairSum)
{
    auto P = params(20.0, 1e3);
    Lattice L;
    L.slices = 3;
    L.sites = 3;
    PolymerEngine E(P, L);
    Engine eng = make_engine(2, 0);
    std::normal_distribution<double> N(0.0, 3.0);
    const std::size_t n = L.size();
    std::vector<double> q(n), p(n);
    for (int rep = 0; rep < 500; ++rep) {
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = N(eng);
            p[i] = 10.0 * N(eng);
        }
        double pair = 0.0, bound = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            bound += stability_value(stability_poly(E, a), q[a], p[a]);
            for (std::size_t b = a + 1; b < n; ++b)
                pair += E.coeffs(a, b).G(q[a], p[a], q[b], p[b]);
        }
        EXPECT_LE(pair, bound + 1e-12);
    }
}
