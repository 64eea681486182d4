#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "itms/errors.hpp"
#include "itms/plant.hpp"

using namespace itms;

namespace {

ControlInput flows(double mb, double mc, double air_each) {
    return {mb, mc, {air_each, air_each, air_each, air_each}};
}

DisturbanceInput calm(double t_amb) {
    DisturbanceInput d;
    d.t_amb = t_amb;
    return d;
}

double max_abs_diff(const PlantState& a, const PlantState& b) {
    const auto x = a.to_array(), y = b.to_array();
    double m = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
    return m;
}

PlantState integrate(PlantState x, const PlantParams& p, const ControlInput& u,
                     const DisturbanceInput& d, double q_hp, double dt, double horizon) {
    const auto n = static_cast<int>(std::lround(horizon / dt));
    for (int i = 0; i < n; ++i) x = step(x, p, u, d, q_hp, dt);
    return x;
}

}  // namespace

TEST(LumpedCabin, UniformColdStateIsEquilibrium) {
    const PlantParams p;
    const auto r = lumped_cabin_deriv(PlantState::uniform(-7.0), p, flows(0.1, 0.1, 0.03),
                                      calm(-7.0));
    EXPECT_EQ(r.d_cab, 0.0);
    EXPECT_EQ(r.d_cb, 0.0);
}

TEST(LumpedCabin, OnlyAmbientTermActiveAtWarmUniformInterior) {
    const PlantParams p;
    const auto r = lumped_cabin_deriv(PlantState::uniform(23.0), p, flows(0.1, 0.1, 0.03),
                                      calm(-7.0));
    EXPECT_EQ(r.d_cab, 0.0);
    EXPECT_LT(r.d_cb, 0.0);
}

TEST(LumpedCabin, MatchesHandEvaluation) {
    PlantParams p;
    p.alpha_cab = 7.0;
    p.alpha_cb = 5.0;
    PlantState x = PlantState::uniform(0.0);
    x.t_cab = 10.0;
    x.t_ha = 40.0;
    x.t_cb = 4.0;
    ControlInput u{0.1, 0.1, {0.01, 0.02, 0.03, 0.04}};
    DisturbanceInput d;
    d.t_amb = -7.0;
    d.q_occ = 150.0;
    d.q_sol = 60.0;
    const auto r = lumped_cabin_deriv(x, p, u, d);
    // (7*10*(4-10) + 0.1*1005*(40-10) + 150) / (3.5*1005)
    const double d_cab = (-420.0 + 3015.0 + 150.0) / 3517.5;
    // (5*10*(10-4) + 5*10*(-7-4) + 60) / (150*500)
    const double d_cb = (300.0 - 550.0 + 60.0) / 75000.0;
    EXPECT_NEAR(r.d_cab, d_cab, 1e-12 * std::abs(d_cab));
    EXPECT_NEAR(r.d_cb, d_cb, 1e-12 * std::abs(d_cb));
}

TEST(LumpedCabin, NonFiniteInputNamesField) {
    const PlantParams p;
    DisturbanceInput d = calm(-7.0);
    d.q_sol = std::nan("");
    try {
        (void)lumped_cabin_deriv(PlantState::uniform(0.0), p, flows(0.1, 0.1, 0.03), d);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_EQ(e.field(), "q_sol");
    }
    PlantState x = PlantState::uniform(0.0);
    x.t_s[2] = INFINITY;
    try {
        (void)lumped_cabin_deriv(x, p, flows(0.1, 0.1, 0.03), calm(-7.0));
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_EQ(e.field(), "t_s3");
    }
}

TEST(HeatedAir, ZeroWhenDrivingDifferencesVanish) {
    const PlantParams p;
    PlantState x = PlantState::uniform(-3.0);
    x.t_ha = x.t_cab = x.t_c2 = 31.0;
    EXPECT_EQ(heated_air_deriv(x, p, flows(0.1, 0.1, 0.03)), 0.0);
}

TEST(HeatedAir, ExchangerHeatsWithoutAirflow) {
    const PlantParams p;
    PlantState x = PlantState::uniform(10.0);
    x.t_c2 = 40.0;
    EXPECT_GT(heated_air_deriv(x, p, flows(0.1, 0.1, 0.0)), 0.0);
}

TEST(HeatedAir, MatchesHandEvaluation) {
    PlantParams p;
    p.gamma_hx = 250.0;
    PlantState x = PlantState::uniform(0.0);
    x.t_cab = 12.0;
    x.t_ha = 30.0;
    x.t_c2 = 45.0;
    const ControlInput u{0.1, 0.1, {0.01, 0.02, 0.03, 0.05}};
    // (0.11*1005*(12-30) + 250*(45-30)) / (3.5*1005)
    const double expect = (-1989.9 + 3750.0) / 3517.5;
    EXPECT_NEAR(heated_air_deriv(x, p, u), expect, 1e-12 * std::abs(expect));
}

TEST(Sections, EquilibriumWithoutSources) {
    const PlantParams p;
    const auto ds = sections_deriv(PlantState::uniform(5.0), p, flows(0.1, 0.1, 0.03), calm(-7.0));
    for (double v : ds) EXPECT_EQ(v, 0.0);
}

TEST(Sections, DoorLossPenalisesOnlyItsSection) {
    const PlantParams p;
    DisturbanceInput d = calm(-7.0);
    d.q_add = {0.0, 0.0, 0.0, -500.0};
    PlantState x = PlantState::uniform(20.0);
    x.t_ha = 35.0;
    const auto ds = sections_deriv(x, p, flows(0.1, 0.1, 0.03), d);
    EXPECT_EQ(ds[0], ds[1]);
    EXPECT_EQ(ds[1], ds[2]);
    EXPECT_LT(ds[3], ds[2]);
}

TEST(Sections, MatchesHandEvaluationAsymmetric) {
    PlantParams p;
    p.alpha_cb = 4.0;
    p.a_cb_sec = {2.0, 2.5, 2.5, 3.0};
    p.m_s = {0.8, 0.9, 0.9, 0.9};
    PlantState x = PlantState::uniform(0.0);
    x.t_cb = 8.0;
    x.t_ha = 36.0;
    x.t_s = {21.0, 20.0, 18.0, 15.0};
    const ControlInput u{0.1, 0.1, {0.02, 0.03, 0.025, 0.045}};
    DisturbanceInput d;
    d.q_add = {0.0, -40.0, -100.0, -300.0};
    const auto ds = sections_deriv(x, p, u, d);
    const double expect[4] = {
        (4.0 * 2.0 * (8.0 - 21.0) + 0.02 * 1005.0 * (36.0 - 21.0) + 0.0) / (0.8 * 1005.0),
        (4.0 * 2.5 * (8.0 - 20.0) + 0.03 * 1005.0 * (36.0 - 20.0) - 40.0) / (0.9 * 1005.0),
        (4.0 * 2.5 * (8.0 - 18.0) + 0.025 * 1005.0 * (36.0 - 18.0) - 100.0) / (0.9 * 1005.0),
        (4.0 * 3.0 * (8.0 - 15.0) + 0.045 * 1005.0 * (36.0 - 15.0) - 300.0) / (0.9 * 1005.0),
    };
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(ds[i], expect[i], 1e-12 * std::abs(expect[i]));
}

TEST(Coolant, EquilibriumWithoutHeatPump) {
    const PlantParams p;
    const auto dc = coolant_deriv(PlantState::uniform(12.0), p, flows(0.08, 0.12, 0.03), 0.0);
    for (double v : dc) EXPECT_EQ(v, 0.0);
}

TEST(Coolant, HeatPumpDrivesOnlyNodeOne) {
    const PlantParams p;
    const auto dc = coolant_deriv(PlantState::uniform(12.0), p, flows(0.08, 0.12, 0.03), 3000.0);
    EXPECT_GT(dc[0], 0.0);
    EXPECT_EQ(dc[1], 0.0);
    EXPECT_EQ(dc[2], 0.0);
    EXPECT_EQ(dc[3], 0.0);
}

TEST(Coolant, MatchesHandEvaluation) {
    const PlantParams p;
    PlantState x = PlantState::uniform(0.0);
    x.t_c1 = 40.0;
    x.t_c2 = 30.0;
    x.t_c3 = 25.0;
    x.t_c4 = 28.0;
    x.t_ha = 20.0;
    x.t_bat = 10.0;
    const ControlInput u{0.06, 0.14, {0.03, 0.03, 0.03, 0.03}};
    const auto dc = coolant_deriv(x, p, u, 4000.0);
    const double cap = 1.5 * 3500.0;
    const double expect[4] = {
        (0.2 * 3500.0 * (28.0 - 40.0) + 4000.0) / cap,
        (0.14 * 3500.0 * (40.0 - 30.0) + 300.0 * (20.0 - 30.0)) / cap,
        (0.06 * 3500.0 * (40.0 - 25.0) + 400.0 * (10.0 - 25.0)) / cap,
        (0.14 * 3500.0 * 30.0 + 0.06 * 3500.0 * 25.0 - 0.2 * 3500.0 * 28.0) / cap,
    };
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(dc[i], expect[i], 1e-12 * std::abs(expect[i]));
}

TEST(Coolant, ZeroFlowIsDegenerate) {
    const PlantParams p;
    EXPECT_THROW((void)coolant_deriv(PlantState::uniform(0.0), p, flows(0.0, 0.0, 0.03), 0.0),
                 DegenerateFlowError);
}

TEST(Coolant, MergeNodeSettlesBetweenBranches) {
    const PlantParams p;
    PlantState x = PlantState::uniform(0.0);
    x.t_ha = 20.0;
    x.t_bat = 5.0;
    const ControlInput u = flows(0.07, 0.11, 0.03);
    // Hold the air and battery nodes fixed by integrating the loop alone.
    std::array<double, 4> c{x.t_c1, x.t_c2, x.t_c3, x.t_c4};
    for (int i = 0; i < 10000; ++i) {
        c = rk4_step(c, 1.0, [&](const std::array<double, 4>& a) {
            PlantState s = x;
            s.t_c1 = a[0];
            s.t_c2 = a[1];
            s.t_c3 = a[2];
            s.t_c4 = a[3];
            return coolant_deriv(s, p, u, 2500.0);
        });
    }
    EXPECT_GE(c[3], std::min(c[1], c[2]));
    EXPECT_LE(c[3], std::max(c[1], c[2]));
    PlantState s = x;
    s.t_c1 = c[0];
    s.t_c2 = c[1];
    s.t_c3 = c[2];
    s.t_c4 = c[3];
    for (double v : coolant_deriv(s, p, u, 2500.0)) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(Coolant, MergeBoundHoldsAfterEveryStep) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> temp(-20.0, 60.0), flow(0.02, 0.25);
    PlantParams p;
    for (int trial = 0; trial < 200; ++trial) {
        PlantState x = PlantState::uniform(temp(rng), 0.8);
        x.t_c1 = temp(rng);
        x.t_c2 = temp(rng);
        x.t_c3 = temp(rng);
        x.t_c4 = temp(rng);
        const ControlInput u = flows(flow(rng), flow(rng), 0.03);
        const PlantState y = step(x, p, u, calm(-7.0), 0.0, 1.0);
        const double lo = std::min({x.t_c4, x.t_c2, x.t_c3, y.t_c2, y.t_c3});
        const double hi = std::max({x.t_c4, x.t_c2, x.t_c3, y.t_c2, y.t_c3});
        EXPECT_GE(y.t_c4, lo - 1e-9);
        EXPECT_LE(y.t_c4, hi + 1e-9);
    }
}

TEST(Battery, RestWithoutSources) {
    PlantParams p;
    p.pump_power_coeff = 0.0;
    const auto r = battery_soc_deriv(PlantState::uniform(15.0), p, flows(0.1, 0.1, 0.03),
                                     calm(-7.0), 0.0);
    EXPECT_EQ(r.d_bat, 0.0);
    EXPECT_EQ(r.d_soc, 0.0);
}

TEST(Battery, SocRateForOneKilowattElectric) {
    PlantParams p;
    p.pump_power_coeff = 0.0;
    p.e_batt = 2.304e8;
    const auto r = battery_soc_deriv(PlantState::uniform(15.0), p, flows(0.1, 0.1, 0.03),
                                     calm(-7.0), p.cop * 1000.0);
    EXPECT_NEAR(r.d_soc, -1000.0 / 2.304e8, 1e-20);
    EXPECT_NEAR(r.d_soc, -4.34e-6, 0.005e-6);
}

TEST(Battery, WarmCoolantHeatsPack) {
    const PlantParams p;
    PlantState x = PlantState::uniform(0.0);
    x.t_c3 = 30.0;
    EXPECT_GT(battery_soc_deriv(x, p, flows(0.1, 0.1, 0.03), calm(-7.0), 0.0).d_bat, 0.0);
}

TEST(Battery, JouleLossMatchesFormula) {
    const PlantParams p;
    EXPECT_NEAR(battery_heat_loss(p, 35000.0), 0.05 * 100.0 * 100.0, 1e-9);
}

TEST(FullDeriv, ConcatenatesComponents) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> temp(-10.0, 50.0);
    const PlantParams p;
    PlantState x;
    auto a = x.to_array();
    for (std::size_t i = 0; i + 1 < a.size(); ++i) a[i] = temp(rng);
    a.back() = 0.6;
    x = PlantState::from_array(a);
    const ControlInput u{0.07, 0.13, {0.02, 0.03, 0.035, 0.04}};
    DisturbanceInput d = calm(-7.0);
    d.q_add = {10.0, -20.0, -80.0, -200.0};
    d.q_occ = 70.0;
    d.q_sol = 30.0;
    d.p_trac = 12000.0;
    const PlantState dx = full_deriv(x, p, u, d, 3200.0);
    const auto cab = lumped_cabin_deriv(x, p, u, d);
    const auto c = coolant_deriv(x, p, u, 3200.0);
    const auto b = battery_soc_deriv(x, p, u, d, 3200.0);
    EXPECT_EQ(dx.t_cab, cab.d_cab);
    EXPECT_EQ(dx.t_cb, cab.d_cb);
    EXPECT_EQ(dx.t_ha, heated_air_deriv(x, p, u));
    EXPECT_EQ(dx.t_s, sections_deriv(x, p, u, d));
    EXPECT_EQ(dx.t_c1, c[0]);
    EXPECT_EQ(dx.t_c4, c[3]);
    EXPECT_EQ(dx.t_bat, b.d_bat);
    EXPECT_EQ(dx.soc, b.d_soc);
}

TEST(FullDeriv, UniformZeroSourceStateIsExactlyStationary) {
    PlantParams p;
    p.pump_power_coeff = 0.0;
    const PlantState x = PlantState::uniform(-7.0, 0.8);
    const PlantState dx = full_deriv(x, p, flows(0.1, 0.1, 0.03), calm(-7.0), 0.0);
    for (double v : dx.to_array()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(step(x, p, flows(0.1, 0.1, 0.03), calm(-7.0), 0.0, 1.0), x);
}

TEST(Step, RejectsBadTimeStep) {
    const PlantParams p;
    const PlantState x = PlantState::uniform(0.0);
    EXPECT_THROW((void)step(x, p, flows(0.1, 0.1, 0.03), calm(-7.0), 0.0, 0.0), ArgumentError);
    EXPECT_THROW((void)step(x, p, flows(0.1, 0.1, 0.03), calm(-7.0), 0.0, 1.5), ArgumentError);
}

TEST(Step, RungeKuttaIsFourthOrder) {
    const PlantParams p;
    PlantState x0 = PlantState::uniform(-7.0, 0.8);
    x0.t_bat = 12.0;
    const ControlInput u{0.1, 0.12, {0.03, 0.03, 0.03, 0.03}};
    DisturbanceInput d = calm(-7.0);
    d.q_add = {0.0, 0.0, -60.0, -150.0};
    d.p_trac = 10000.0;
    const double horizon = 64.0;
    const PlantState ref = integrate(x0, p, u, d, 4000.0, 1.0 / 64.0, horizon);
    const double e1 = max_abs_diff(integrate(x0, p, u, d, 4000.0, 1.0, horizon), ref);
    const double e2 = max_abs_diff(integrate(x0, p, u, d, 4000.0, 0.5, horizon), ref);
    EXPECT_GE(e1 / e2, 12.0);
    EXPECT_LE(e1 / e2, 20.0);
}

TEST(Step, BodyCoolingMatchesExponential) {
    const PlantParams p;
    const double t_amb = -7.0, t0 = 23.0;
    const double k = p.alpha_cb * p.a_cb / (p.m_cb * p.c_cb);
    std::array<double, 1> tb{t0};
    auto deriv = [&](const std::array<double, 1>& a) {
        PlantState s = PlantState::uniform(a[0]);  // cabin tracks the body: only the ambient term acts
        return std::array<double, 1>{
            lumped_cabin_deriv(s, p, flows(0.1, 0.1, 0.03), calm(t_amb)).d_cb};
    };
    double worst = 0.0;
    for (int i = 1; i <= 600; ++i) {
        tb = rk4_step(tb, 1.0, deriv);
        const double exact = t_amb + (t0 - t_amb) * std::exp(-k * i);
        worst = std::max(worst, std::abs(tb[0] - exact));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Step, SymmetricSectionsTrackLumpedCabin) {
    const PlantParams p;  // uniform quarters, alpha_cab == alpha_cb
    PlantState x = PlantState::uniform(-7.0, 0.8);
    x.t_ha = 30.0;
    x.t_c1 = 45.0;
    x.t_c2 = 40.0;
    const ControlInput u = flows(0.1, 0.12, 0.03);
    DisturbanceInput d = calm(-7.0);
    d.q_occ = 200.0;
    d.q_add.fill(50.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        x = step(x, p, u, d, 3000.0, 1.0);
        for (double ts : x.t_s) worst = std::max(worst, std::abs(ts - x.t_cab));
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Step, DivergenceCarriesStepIndex) {
    PlantParams p;
    PlantState x = PlantState::uniform(140.0);
    try {
        (void)step(x, p, flows(0.02, 0.02, 0.03), calm(-7.0), 1e8, 1.0, 42);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.step_index(), 42u);
    }
}

TEST(Step, DepletionReportsTimeInsideStep) {
    PlantParams p;
    DisturbanceInput d = calm(-7.0);
    d.p_trac = 1e6;
    const PlantState x = PlantState::uniform(10.0, 1e-3);  // 230 kJ left, 1 MW drain
    try {
        (void)step(x, p, flows(0.1, 0.1, 0.03), d, 0.0, 1.0);
        FAIL() << "expected DepletionError";
    } catch (const DepletionError& e) {
        EXPECT_GT(e.time_in_step(), 0.0);
        EXPECT_LT(e.time_in_step(), 1.0);
        EXPECT_NEAR(e.time_in_step(), 2.304e5 / (1e6 + 200.0 * 0.2), 1e-6);
    }
}

TEST(Step, SocNeverIncreasesUnderNonNegativeLoads) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> temp(-20.0, 40.0), load(0.0, 40000.0),
        hp(0.0, 5000.0), fl(0.02, 0.25);
    const PlantParams p;
    for (int trial = 0; trial < 300; ++trial) {
        PlantState x = PlantState::uniform(temp(rng), 0.5);
        x.t_c1 = temp(rng);
        x.t_bat = temp(rng);
        DisturbanceInput d = calm(temp(rng));
        d.p_trac = load(rng);
        const PlantState y = step(x, p, flows(fl(rng), fl(rng), 0.03), d, hp(rng), 1.0);
        EXPECT_LE(y.soc, x.soc);
    }
}

TEST(Step, ExchangeTermsPullTowardPartners) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> temp(-20.0, 60.0);
    const PlantParams p;
    const ControlInput u = flows(0.1, 0.1, 0.03);
    for (int trial = 0; trial < 500; ++trial) {
        PlantState x;
        auto a = x.to_array();
        for (std::size_t i = 0; i + 1 < a.size(); ++i) a[i] = temp(rng);
        a.back() = 0.7;
        x = PlantState::from_array(a);
        const DisturbanceInput d = calm(x.t_cb);
        const auto ds = sections_deriv(x, p, u, d);
        for (std::size_t i = 0; i < kSections; ++i) {
            if (x.t_cb >= x.t_s[i] && x.t_ha >= x.t_s[i]) {
                EXPECT_GE(ds[i], 0.0);
            }
            if (x.t_cb <= x.t_s[i] && x.t_ha <= x.t_s[i]) {
                EXPECT_LE(ds[i], 0.0);
            }
        }
        const auto dc = coolant_deriv(x, p, u, 0.0);
        if (x.t_c1 >= x.t_c2 && x.t_ha >= x.t_c2) {
            EXPECT_GE(dc[1], 0.0);
        }
        if (x.t_c1 <= x.t_c3 && x.t_bat <= x.t_c3) {
            EXPECT_LE(dc[2], 0.0);
        }
        const double d_bat = battery_soc_deriv(x, p, u, d, 0.0).d_bat;
        EXPECT_EQ(d_bat > 0.0, x.t_c3 > x.t_bat);
    }
}

TEST(Step, Deterministic) {
    const PlantParams p;
    PlantState x = PlantState::uniform(-7.0, 0.8);
    DisturbanceInput d = calm(-7.0);
    d.p_trac = 9000.0;
    const PlantState a = integrate(x, p, flows(0.1, 0.1, 0.03), d, 5000.0, 1.0, 300.0);
    const PlantState b = integrate(x, p, flows(0.1, 0.1, 0.03), d, 5000.0, 1.0, 300.0);
    EXPECT_EQ(a, b);
}

TEST(Params, SectionPartitionsMustSumToLumped) {
    PlantParams p;
    EXPECT_NO_THROW(p.validate());
    p.m_s[0] = 1.0;
    EXPECT_THROW(p.validate(), ConfigError);
    p = PlantParams{};
    p.a_cb_sec = {2.0, 2.0, 2.0, 2.0};
    EXPECT_THROW(p.validate(), ConfigError);
    p = PlantParams{};
    p.cop = 0.0;
    EXPECT_THROW(p.validate(), ConfigError);
}

TEST(HeatPump, FullOutputWhileEitherNodeIsBelowSetpoint) {
    const PlantParams p;
    const HeatPumpLaw law{23.0, 18.0, 1.0};
    PlantState x = PlantState::uniform(25.0);
    x.t_bat = 17.0;
    EXPECT_EQ(law.command(x, p), p.q_hp_max);
    x = PlantState::uniform(25.0);
    x.t_cab = 22.9;
    EXPECT_EQ(law.command(x, p), p.q_hp_max);
}

TEST(HeatPump, ThrottlesOverBandOnceBothAreWarm) {
    const PlantParams p;
    const HeatPumpLaw law{23.0, 18.0, 1.0};
    PlantState x = PlantState::uniform(30.0);
    x.t_cab = 23.5;
    x.t_bat = 20.0;
    EXPECT_NEAR(law.command(x, p), 0.5 * p.q_hp_max, 1e-9);
    x.t_cab = 24.5;
    EXPECT_EQ(law.command(x, p), 0.0);
}
