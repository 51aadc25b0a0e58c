#include <gtest/gtest.h>

#include "hypmax/weights.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <vector>

using namespace hypmax;

namespace {

const Dimension d2(2);
const ExponentTriple kDefault = ExponentTriple::from_p(2, 1.0, 4.0 / 3.0);

double v2(double r) { return 2.0 * std::numbers::pi * (std::cosh(r) - 1.0); }

} // namespace

TEST(ExponentTriple, Defaults) {
    EXPECT_NEAR(kDefault.q, 4.0, 1e-12);
    EXPECT_NEAR(kDefault.p_prime(), 4.0, 1e-12);
    EXPECT_NEAR(kDefault.delta_bound(), 4.0 / 3.0, 1e-12);
    EXPECT_THROW(ExponentTriple(2, 1.0, 4.0 / 3.0, 3.0), RangeError);
    EXPECT_THROW(ExponentTriple::from_p(2, 1.0, 2.0), RangeError);
}

TEST(WeightEval, PowerVolume) {
    const auto w1 = WeightSpec::power_volume(d2, 1.0, 4.0);
    EXPECT_EQ(w1(HPoint::origin(d2)), 1.0);
    EXPECT_NEAR(w1.at(1.0), std::pow(1.0 + v2(1.0), -0.25), 1e-12);
    EXPECT_NEAR(w1.at(1.0), 0.68998, 1e-5);
    // theta = -q/p' gives [1 + V]^{1/p'}
    const auto wm = WeightSpec::power_volume(d2, -1.0, 4.0);
    for (double t : {0.5, 2.0, 7.0}) EXPECT_NEAR(wm.at(t), std::pow(1.0 + v2(t), 0.25), 1e-12 * wm.at(t));
    for (double t = 0.0; t < 10.0; t += 0.5) {
        EXPECT_LT(wm.at(t), wm.at(t + 0.5));
        EXPECT_GT(w1.at(t), w1.at(t + 0.5));
    }
}

// Exact shell measure against direct quadrature of w^e dmu.
TEST(WeightSpec, ShellMeasureAgainstQuadrature) {
    using boost::math::quadrature::gauss_kronrod;
    for (double theta : {-1.0, -0.5, 0.5, 1.0}) {
        const auto w = WeightSpec::power_volume(d2, theta, 4.0);
        for (double e : {4.0, -4.0, 4.0 / 3.0}) {
            auto g = [&](double s) { return std::pow(1.0 + v2(s), -theta * e / 4.0) * 2.0 * std::numbers::pi * std::sinh(s); };
            const double ref = gauss_kronrod<double, 61>::integrate(g, 1.0, 3.5, 15, 1e-13);
            EXPECT_NEAR(w.shell_measure(e, 1.0, 3.5) / ref, 1.0, 1e-10) << theta << " " << e;
        }
    }
}

TEST(WeightSpec, BallMeasureAgainstMonteCarlo) {
    for (std::uint64_t k = 0; k < 20; ++k) {
        CounterUniforms u(404, 1);
        const double theta = -1.0 + 2.0 * u.uniform(k, 0);
        const double t = 5.0 * u.uniform(k, 1);
        const double r = 0.5 + 3.0 * u.uniform(k, 2);
        const double lo = std::floor(4.0 * u.uniform(k, 3));
        const auto w = WeightSpec::power_volume(d2, theta, 4.0);
        const double quad = w.ball_measure(4.0, t, r, lo, lo + 1.0);
        const auto x = axis_point(d2, t);
        const auto est = mc_integrate_ball(
            d2, x, r,
            [&](const HPoint& y) {
                const double s = ScalarField::distance_from_origin(y);
                return s > lo && s <= lo + 1.0 ? w.pow_at(s, 4.0) : 0.0;
            },
            McConfig{k + 1, 40000, 1});
        EXPECT_NEAR(quad, est.value, 3.0 * est.std_error + 1e-12) << "case " << k;
    }
}

TEST(ApqLoc, ConstantWeightIsOne) {
    const auto w = WeightSpec::constant(d2, 2.0);
    const auto balls = local_ball_grid(d2, 4.0);
    const auto rep = apq_loc_sup(w, kDefault, balls);
    EXPECT_NEAR(rep.sup_ratio, 1.0, 1e-9);
    EXPECT_EQ(rep.verdict, Verdict::bounded);
}

TEST(ApqLoc, PowerWeightsAreBounded) {
    const auto balls = local_ball_grid(d2, 10.0);
    for (double theta : {-1.0, -0.5, 0.5, 1.0}) {
        const auto rep = apq_loc_sup(WeightSpec::power_volume(d2, theta, 4.0), kDefault, balls);
        EXPECT_EQ(rep.verdict, Verdict::bounded) << theta;
        EXPECT_TRUE(std::isfinite(rep.sup_ratio));
    }
}

TEST(ApqLoc, VanishingWeightDiverges) {
    const auto table = RadialProfile::tabulate([](double s) { return s > 1.0 && s <= 2.0 ? 0.0 : 1.0; },
                                               {1.0, 2.0, 3.0}, Interp::step, RadialProfile::kUnbounded);
    const auto w = WeightSpec::radial_table(d2, table);
    const auto rep = apq_loc_sup(w, kDefault, local_ball_grid(d2, 4.0));
    EXPECT_EQ(rep.verdict, Verdict::diverging);
    EXPECT_TRUE(std::isinf(rep.sup_ratio));
}

TEST(ApqGlobal, ConstantWeightStaysAtOne) {
    const std::vector<double> R{5, 10, 20, 30};
    const auto rows = apq_global_scan(WeightSpec::constant(d2, 1.0), kDefault, R);
    for (const auto& row : rows) {
        EXPECT_NEAR(row.centered, 1.0, 1e-12);
        EXPECT_NEAR(row.sup_product, 1.0, 1e-9);
    }
    EXPECT_EQ(global_scan_verdict(rows), Verdict::bounded);
    // w_0 is the constant weight
    EXPECT_EQ(global_scan_verdict(apq_global_scan(WeightSpec::power_volume(d2, 0.0, 4.0), kDefault, R)),
              Verdict::bounded);
}

TEST(ApqGlobal, PowerWeightsDiverge) {
    const std::vector<double> R{5, 10, 20, 30};
    for (double theta : {1.0, -1.0}) {
        const auto rows = apq_global_scan(WeightSpec::power_volume(d2, theta, 4.0), kDefault, R);
        for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_GT(rows[i].sup_product, rows[i - 1].sup_product);
        EXPECT_GT(rows.back().sup_product / rows.front().sup_product, 10.0);
        EXPECT_EQ(global_scan_verdict(rows), Verdict::diverging);
    }
}

TEST(AnnulusConditions, ConstantWeight) {
    const auto w = WeightSpec::constant(d2, 1.0);
    const auto a = cond_cj_check(w, kDefault, 0.0);
    const auto b = cond_cj2_check(w, kDefault, 0.0);
    EXPECT_EQ(a.verdict, Verdict::bounded);
    EXPECT_EQ(b.verdict, Verdict::bounded);
    EXPECT_LT(a.sup_ratio, 5.0);
    EXPECT_LT(b.sup_ratio, 5.0);
}

TEST(AnnulusConditions, Preconditions) {
    const auto w = WeightSpec::power_volume(d2, 1.0, 4.0);
    EXPECT_THROW(cond_cj_check(w, kDefault, 4.0 / 3.0), RangeError);
    EXPECT_THROW(cond_cj2_check(w, kDefault, 1.0), RangeError);
}

TEST(AnnulusConditions, WitnessReproducesSup) {
    const double theta = 0.5;
    const auto w = WeightSpec::power_volume(d2, theta, 4.0);
    const auto rep = cond_cj_check(w, kDefault, theta, AnnulusGrid{6, 6, 3});
    std::map<std::string, double> wit(rep.witness.begin(), rep.witness.end());
    const double j = wit["j"], l = wit["l"], r = wit["r"], t = wit["t"];
    const double lhs = w.ball_measure(4.0, t, r, l - 1.0, l);
    const double rhs = std::exp(0.5 * (r + l - j) * (kDefault.p - theta) + r * theta) * std::pow(w.at(t), 4.0);
    EXPECT_NEAR(lhs / rhs, rep.sup_ratio, 1e-9 * rep.sup_ratio);
}

TEST(ParamsFromDelta, DefaultTriple) {
    const auto bg = params_from_delta(kDefault, 0.0);
    EXPECT_NEAR(bg.beta, 8.0 / 13.0, 1e-14);
    EXPECT_NEAR(bg.gamma, 12.0 / 13.0, 1e-14);
    EXPECT_THROW(params_from_delta(kDefault, kDefault.delta_bound()), RangeError);
}

TEST(ParamsFromDelta, PEqualsOne) {
    const auto tr = ExponentTriple::from_p(3, 1.0, 1.0);
    for (double delta : {-1.0, 0.0, 0.3}) {
        const auto bg = params_from_delta(tr, delta);
        EXPECT_NEAR(bg.beta, tr.q / (tr.q + 1.0 - delta), 1e-12);
        EXPECT_NEAR(bg.gamma, bg.beta, 1e-12);
    }
}

// 100 admissible (n, alpha, p, delta): 0 < beta < 1, beta <= gamma < p, beta = gamma iff p = 1.
TEST(ParamsFromDelta, AdmissibleGrid) {
    CounterUniforms u(9, 4);
    for (std::uint64_t k = 0; k < 100; ++k) {
        const int n = 2 + static_cast<int>(3 * u.uniform(k, 0));
        const double alpha = n * (0.05 + 0.9 * u.uniform(k, 1));
        const bool one = k % 5 == 0;
        const double p = one ? 1.0 : 1.0 + (n / alpha - 1.0) * 0.98 * u.uniform(k, 2);
        const auto tr = ExponentTriple::from_p(n, alpha, p);
        const double delta = tr.delta_bound() - 0.01 - 3.0 * u.uniform(k, 3);
        const auto bg = params_from_delta(tr, delta);
        EXPECT_GT(bg.beta, 0.0);
        EXPECT_LT(bg.beta, 1.0);
        EXPECT_LE(bg.beta, bg.gamma * (1.0 + 1e-12));
        EXPECT_LT(bg.gamma, tr.p);
        EXPECT_EQ(std::abs(bg.beta - bg.gamma) < 1e-12, std::abs(p - 1.0) < 1e-12) << "case " << k;
    }
}

// beta = gamma = q/(q + 1 - delta)
TEST(ParamsWeakOnly, Arithmetic) {
    EXPECT_NEAR(params_weak_only(kDefault, 0.0).beta, 0.8, 1e-14);
    EXPECT_NEAR(params_weak_only(kDefault, -1.0).beta, 4.0 / 6.0, 1e-14);
    EXPECT_LT(params_weak_only(kDefault, 1.0 - 1e-12).beta, 1.0);
    EXPECT_THROW(params_weak_only(kDefault, 1.0), RangeError);
}

TEST(ThetaWindows, Defaults) {
    const auto win = theta_windows(kDefault);
    EXPECT_NEAR(win.strong.lo, -1.0 / 3.0, 1e-14);
    EXPECT_NEAR(win.strong.hi, 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(win.weak.lo, -1.0, 1e-14);
    EXPECT_NEAR(win.weak.hi, 1.0, 1e-14);
    EXPECT_NEAR(theta_windows(ExponentTriple::from_p(2, 1.0, 1.0)).strong.lo, 0.0, 1e-14);
    CounterUniforms u(12, 0);
    for (std::uint64_t k = 0; k < 50; ++k) {
        const int n = 2 + static_cast<int>(4 * u.uniform(k, 0));
        const double alpha = n * (0.05 + 0.9 * u.uniform(k, 1));
        const double p = 1.0 + (n / alpha - 1.0) * 0.98 * u.uniform(k, 2);
        const auto w = theta_windows(ExponentTriple::from_p(n, alpha, p));
        EXPECT_LT(w.strong.lo, w.strong.hi);
        EXPECT_LT(w.weak.lo, w.weak.hi);
    }
}

TEST(TestingCondition, EmptySets) {
    const auto w = WeightSpec::power_volume(d2, -1.0, 4.0);
    const auto bg = params_weak_only(kDefault, -1.0);
    const SetSpec E(RadialUnion{{{0.0, 2.0}}});
    EXPECT_EQ(testing_condition_check(w, kDefault, bg, SetSpec::empty(), E, 2.0, Engine::quad).sup_ratio, 0.0);
    EXPECT_EQ(testing_condition_check(w, kDefault, bg, E, SetSpec::empty(), 2.0, Engine::quad).sup_ratio, 0.0);
}

TEST(TestingCondition, QuadAgreesWithMonteCarlo) {
    const auto w = WeightSpec::power_volume(d2, -1.0, 4.0);
    const auto bg = params_weak_only(kDefault, -1.0);
    for (std::uint64_t k = 0; k < 20; ++k) {
        const SetSpec E = random_shell_union(55, 2 * k, 5.0);
        const SetSpec F = random_shell_union(55, 2 * k + 1, 5.0);
        const double r = 1.0 + static_cast<double>(k % 4);
        const auto quad = testing_condition_check(w, kDefault, bg, E, F, r, Engine::quad);
        const auto mc = testing_condition_check(w, kDefault, bg, E, F, r, Engine::mc, McConfig{k + 3, 4000, 1});
        EXPECT_NEAR(quad.sup_ratio, mc.sup_ratio, 3.0 * mc.std_error + 1e-12) << "case " << k;
    }
}

TEST(TestingCondition, OffCenterBallMonteCarloOnly) {
    const auto w = WeightSpec::power_volume(d2, -1.0, 4.0);
    const auto bg = params_weak_only(kDefault, -1.0);
    const SetSpec E(BallAt{2.0, 1.0});
    const SetSpec F(RadialUnion{{{1.0, 3.0}}});
    const auto rep = testing_condition_check(w, kDefault, bg, E, F, 2.0, Engine::quad, McConfig{8, 4000, 1});
    EXPECT_GT(rep.sup_ratio, 0.0);
    EXPECT_GT(rep.std_error, 0.0);
}
