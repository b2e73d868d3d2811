// Time integration contracts: conservation-form right-hand side, spectral
// IMEX stepping against scalar recurrences, the explicit reference scheme,
// and the mollified successive-linearization solver.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "mbe/diagnostics.hpp"
#include "mbe/noise.hpp"
#include "mbe/solver.hpp"

using namespace mbe;

namespace {

constexpr double kPi = std::numbers::pi;

// Discrete symbol of the five-point Laplacian for the Neumann cosine mode m.
double neumann_lambda(int m, int n, double d) {
    return -(2.0 / (d * d)) * (1.0 - std::cos(kPi * m / n));
}

Array2 neumann_mode(const Grid& g, int mx, int my, double amp) {
    Array2 out(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            out(i, j) = amp * std::cos(kPi * mx * (i + 0.5) / g.nx) *
                        std::cos(kPi * my * (j + 0.5) / g.ny);
    return out;
}

// L2 projection of the field onto the given mode shape.
double mode_amplitude(const Array2& field, const Array2& unit_mode) {
    return dot(field, unit_mode) / dot(unit_mode, unit_mode);
}

double l2_distance(const Array2& a, const Array2& b, double cell_area) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        double d = a.data[k] - b.data[k];
        acc += d * d;
    }
    return std::sqrt(acc * cell_area);
}

double l2_norm(const Array2& a, double cell_area) {
    return std::sqrt(dot(a, a) * cell_area);
}

}  // namespace

TEST(Rhs, ConstantFieldIsZero) {
    for (Bc bc : {Bc::Neumann, Bc::Periodic}) {
        Grid g(12, 10, 3.0, 2.5, bc);
        HeightField h(g, Array2(12, 10, 0.7));
        Array2 r = rhs(h, FluxModel::siegert_rotated(1.0, 1.0), 1.0);
        for (double v : r.data) EXPECT_EQ(v, 0.0);
    }
}

TEST(Rhs, CellSumVanishesForRandomData) {
    std::vector<FluxModel> models = {FluxModel::siegert_rotated(1.0, 1.0),
                                     FluxModel::cubic_anisotropic(2.0, 0.3)};
    for (Bc bc : {Bc::Neumann, Bc::Periodic}) {
        Grid g(24, 20, 24.0, 20.0, bc);
        HeightField h(g, white_noise(g.nx, g.ny, 1.0, 7));
        for (const auto& model : models) {
            Array2 r = rhs(h, model, 0.8);
            EXPECT_LE(std::abs(kahan_sum(r.data)), 1e-12 * g.nx * g.ny)
                << to_string(bc) << " " << to_string(model.kind);
        }
    }
}

// Small-amplitude Neumann mode: the conserved flux linearizes to alpha grad h
// for the reduced Siegert profile, so the right-hand side is the dispersion
// symbol (alpha k^2 - nu k^4) applied to h, with continuum k to 1%.
TEST(Rhs, LinearizedDispersionSymbol) {
    Grid g(128, 8, 16.0, 1.0, Bc::Neumann);
    const int m = 4;
    const double k = kPi * m / g.lx;
    Array2 mode = neumann_mode(g, m, 0, 1.0);
    HeightField h(g, mode);
    for (double& v : h.values.data) v *= 1e-4;
    Array2 r = rhs(h, FluxModel::siegert_reduced(1.0, 1.0), 1.0);

    const double sigma = k * k - std::pow(k, 4);
    Array2 expect = h.values;
    for (double& v : expect.data) v *= sigma;
    EXPECT_LE(l2_distance(r, expect, g.cell_area()),
              0.01 * l2_norm(expect, g.cell_area()));
}

// Same setup against the discrete symbol, which the staggered operators must
// reproduce to roundoff: the Laplacian factors through grad/div exactly.
TEST(Rhs, DiscreteDispersionSymbolIsSharp) {
    Grid g(128, 8, 16.0, 1.0, Bc::Neumann);
    const int m = 4;
    const double lam = neumann_lambda(m, g.nx, g.dx);
    HeightField h(g, neumann_mode(g, m, 0, 1e-6));
    Array2 r = rhs(h, FluxModel::siegert_reduced(1.0, 1.0), 1.0);

    const double sigma = -1.0 * lam - 1.0 * lam * lam;  // -alpha*lam - nu*lam^2, lam < 0
    Array2 expect = h.values;
    for (double& v : expect.data) v *= sigma;
    EXPECT_LE(l2_distance(r, expect, g.cell_area()),
              1e-9 * l2_norm(expect, g.cell_area()));
}

TEST(StepImex, ZeroDataRemainsZero) {
    for (Bc bc : {Bc::Neumann, Bc::Periodic}) {
        Grid g(16, 16, 4.0, 4.0, bc);
        SimulationState s{HeightField(g, Array2(16, 16, 0.0)), 0};
        SolverConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_end = 1e-3;
        SimulationState next = step_imex(s, FluxModel::siegert_rotated(1.0, 1.0), cfg);
        for (double v : next.h.values.data) EXPECT_EQ(v, 0.0);
        EXPECT_EQ(next.step_count, 1);
        EXPECT_DOUBLE_EQ(next.h.time, 1e-3);
    }
}

TEST(StepImex, MassDriftBelowToleranceOverManySteps) {
    Grid g(64, 64, 16.0, 16.0, Bc::Neumann);
    Array2 h0 = white_noise(g.nx, g.ny, 0.1, 11);
    for (double& v : h0.data) v += 0.3;
    HeightField h(g, h0);
    const double mass0 = mass(h);

    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.nu = 1.0;
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SpectralSolver spectral(g);
    for (int n = 0; n < 10000; ++n) step_imex_inplace(h, model, cfg, spectral);
    ASSERT_TRUE(h.values.finite());
    EXPECT_LE(std::abs(mass(h) - mass0), 1e-10 * std::abs(mass0));

    Grid gp(32, 32, 8.0, 8.0, Bc::Periodic);
    HeightField hp(gp, white_noise(gp.nx, gp.ny, 0.1, 12));
    const double massp0 = mass(hp);
    SpectralSolver spectral_p(gp);
    for (int n = 0; n < 2000; ++n) step_imex_inplace(hp, model, cfg, spectral_p);
    EXPECT_LE(std::abs(mass(hp) - massp0), 1e-10 * (std::abs(massp0) + 1.0));
}

// One Neumann mode under the reduced Siegert flux at tiny amplitude follows
// the scalar recurrence of the update exactly: each step multiplies the
// coefficient by (1 - dt(A + alpha)lam) / (1 + dt nu lam^2 - dt A lam).
TEST(StepImex, SingleModeMatchesScalarRecurrence) {
    Grid g(64, 8, 16.0, 2.0, Bc::Neumann);
    const int m = 5;
    const double lam = neumann_lambda(m, g.nx, g.dx);
    Array2 unit = neumann_mode(g, m, 0, 1.0);
    const double a0 = 1e-6;
    FluxModel model = FluxModel::siegert_reduced(1.0, 1.0);

    for (double stab : {0.0, 0.7}) {
        SolverConfig cfg;
        cfg.dt = 1e-3;
        cfg.nu = 1.0;
        cfg.stabilization = stab;
        HeightField h(g, neumann_mode(g, m, 0, a0));
        SpectralSolver spectral(g);
        const int nsteps = 200;
        for (int n = 0; n < nsteps; ++n) step_imex_inplace(h, model, cfg, spectral);

        const double factor = (1.0 - cfg.dt * (stab + model.alpha) * lam) /
                              (1.0 + cfg.dt * cfg.nu * lam * lam - cfg.dt * stab * lam);
        const double expect = a0 * std::pow(factor, nsteps);
        EXPECT_NEAR(mode_amplitude(h.values, unit), expect, 5e-9 * std::abs(expect))
            << "stab=" << stab;
    }
}

TEST(StepImex, SingleModeMatchesScalarRecurrencePeriodic) {
    Grid g(64, 8, 16.0, 2.0, Bc::Periodic);
    const int m = 5;
    const double lam = -(4.0 / (g.dx * g.dx)) * std::pow(std::sin(kPi * m / g.nx), 2);
    Array2 unit(g.nx, g.ny);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) unit(i, j) = std::cos(2.0 * kPi * m * i / g.nx);
    const double a0 = 1e-6;
    FluxModel model = FluxModel::siegert_reduced(1.0, 1.0);

    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.nu = 1.0;
    Array2 h = unit;
    for (double& v : h.data) v *= a0;
    SpectralSolver spectral(g);
    const int nsteps = 200;
    for (int n = 0; n < nsteps; ++n) {
        Array2 divj = divergence_of_flux(h, g, model);
        spectral.imex_advance(h, divj, cfg.dt, cfg.nu, cfg.stabilization);
    }
    const double factor =
        (1.0 - cfg.dt * model.alpha * lam) / (1.0 + cfg.dt * cfg.nu * lam * lam);
    const double expect = a0 * std::pow(factor, nsteps);
    EXPECT_NEAR(mode_amplitude(h, unit), expect, 5e-9 * std::abs(expect));
}

// Measured growth of the most unstable band matches exp((alpha k^2 - nu k^4)t)
// to 1%: the continuum dispersion relation of the linearized equation.
TEST(StepImex, GrowthRateMatchesContinuumDispersion) {
    const double kstar = std::sqrt(0.5);  // alpha/(2 nu) with alpha = nu = 1
    const int m = 4;
    const double lx = kPi * m / kstar;
    Grid g(128, 8, lx, lx / 16.0, Bc::Neumann);
    Array2 unit = neumann_mode(g, m, 0, 1.0);
    const double a0 = 1e-6;
    HeightField h(g, neumann_mode(g, m, 0, a0));
    FluxModel model = FluxModel::siegert_reduced(1.0, 1.0);

    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.nu = 1.0;
    SpectralSolver spectral(g);
    const int nsteps = 500;
    for (int n = 0; n < nsteps; ++n) step_imex_inplace(h, model, cfg, spectral);

    const double t = nsteps * cfg.dt;
    const double rate = std::log(mode_amplitude(h.values, unit) / a0) / t;
    const double sigma = kstar * kstar - std::pow(kstar, 4);
    EXPECT_NEAR(rate, sigma, 0.01 * std::abs(sigma));
}

TEST(ExplicitRk2, ConstantStateIsFixedPoint) {
    Grid g(16, 12, 4.0, 3.0, Bc::Neumann);
    SimulationState s{HeightField(g, Array2(16, 12, -1.25)), 3};
    SolverConfig cfg;
    cfg.scheme = Scheme::ExplicitRK2;
    cfg.nu = 1.0;
    FluxModel model = FluxModel::cubic_isotropic(1.0);
    cfg.dt = 0.5 * explicit_dt_limit(g, model, cfg.nu);
    cfg.t_end = cfg.dt;
    SimulationState next = step_explicit_rk2(s, model, cfg);
    for (double v : next.h.values.data) EXPECT_EQ(v, -1.25);
    EXPECT_EQ(next.step_count, 4);
}

TEST(ExplicitRk2, RejectsDtBeyondBound) {
    Grid g(32, 32, 4.0, 4.0, Bc::Neumann);
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SolverConfig cfg;
    cfg.scheme = Scheme::ExplicitRK2;
    cfg.nu = 1.0;
    cfg.dt = 2.0 * explicit_dt_limit(g, model, cfg.nu);
    cfg.t_end = 10 * cfg.dt;
    SimulationState s{HeightField(g, white_noise(32, 32, 0.01, 3)), 0};
    EXPECT_THROW(step_explicit_rk2(s, model, cfg), std::invalid_argument);
    EXPECT_THROW(run(s.h, model, cfg), std::invalid_argument);
}

TEST(ExplicitRk2, ConservesMass) {
    for (Bc bc : {Bc::Neumann, Bc::Periodic}) {
        Grid g(24, 24, 12.0, 12.0, bc);
        HeightField h(g, white_noise(24, 24, 0.2, 5));
        const double mass0 = mass(h);
        FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
        SolverConfig cfg;
        cfg.scheme = Scheme::ExplicitRK2;
        cfg.nu = 1.0;
        cfg.dt = 0.5 * explicit_dt_limit(g, model, cfg.nu);
        for (int n = 0; n < 200; ++n) step_rk2_inplace(h, model, cfg);
        EXPECT_LE(std::abs(mass(h) - mass0), 1e-10 * (std::abs(mass0) + 1.0));
    }
}

// Cross-validation of the two steppers on smooth data over a t = 0.1 horizon.
TEST(ExplicitRk2, AgreesWithImexOnSmoothData) {
    Grid g(64, 64, 8.0, 8.0, Bc::Neumann);
    Array2 h0 = neumann_mode(g, 2, 3, 0.05);
    {
        Array2 extra = neumann_mode(g, 1, 1, 0.03);
        for (std::size_t k = 0; k < h0.data.size(); ++k) h0.data[k] += extra.data[k];
    }
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SolverConfig cfg;
    cfg.dt = 1e-6;
    cfg.t_end = 0.1;
    cfg.nu = 1.0;
    ASSERT_LE(cfg.dt, explicit_dt_limit(g, model, cfg.nu));

    HeightField imex(g, h0);
    SpectralSolver spectral(g);
    const long nsteps = cfg.step_count();
    for (long n = 0; n < nsteps; ++n) step_imex_inplace(imex, model, cfg, spectral);

    HeightField rk2(g, h0);
    for (long n = 0; n < nsteps; ++n) step_rk2_inplace(rk2, model, cfg);
    ASSERT_TRUE(rk2.values.finite());

    EXPECT_LE(l2_distance(imex.values, rk2.values, g.cell_area()), 5e-3);
}

// Frozen trajectory of zeros: the flux vanishes and each step divides the
// mode coefficient by (1 + dt nu lam^2).
TEST(SolveLinearSmoothed, ZeroFrozenTrajectoryDecaysAsBilaplacian) {
    Grid g(64, 8, 16.0, 2.0, Bc::Neumann);
    const int m = 6;
    const double lam = neumann_lambda(m, g.nx, g.dx);
    const double a0 = 0.5;
    Array2 unit = neumann_mode(g, m, 0, 1.0);
    Array2 h0 = neumann_mode(g, m, 0, a0);

    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    cfg.nu = 2.0;
    const long nsteps = cfg.step_count();
    std::vector<Array2> frozen(nsteps + 1, Array2(g.nx, g.ny, 0.0));
    std::vector<Array2> out = solve_linear_smoothed(h0, frozen, g,
                                                    FluxModel::siegert_rotated(1.0, 1.0), cfg,
                                                    0.5 * g.dx);
    ASSERT_EQ(out.size(), static_cast<std::size_t>(nsteps) + 1);
    for (long n = 0; n <= nsteps; ++n) {
        const double expect = a0 / std::pow(1.0 + cfg.dt * cfg.nu * lam * lam, n);
        EXPECT_NEAR(mode_amplitude(out[n], unit), expect, 1e-12 * std::abs(expect) + 1e-300)
            << "slice " << n;
    }
}

TEST(SolveLinearSmoothed, ConservesMassForArbitraryFrozenTrajectory) {
    for (Bc bc : {Bc::Neumann, Bc::Periodic}) {
        Grid g(20, 16, 10.0, 8.0, bc);
        SolverConfig cfg;
        cfg.dt = 2e-3;
        cfg.t_end = 0.02;
        cfg.nu = 1.0;
        const long nsteps = cfg.step_count();
        std::vector<Array2> frozen;
        for (long n = 0; n <= nsteps; ++n)
            frozen.push_back(white_noise(g.nx, g.ny, 0.5, 100 + n));
        Array2 h0 = white_noise(g.nx, g.ny, 0.3, 42);
        const double mass0 = kahan_sum(h0.data) * g.cell_area();

        std::vector<Array2> out = solve_linear_smoothed(
            h0, frozen, g, FluxModel::siegert_rotated(1.5, 1.0), cfg, 2.2 * g.dx);
        for (const Array2& slice : out)
            EXPECT_LE(std::abs(kahan_sum(slice.data) * g.cell_area() - mass0),
                      1e-12 * (std::abs(mass0) + 1.0))
                << to_string(bc);
    }
}

TEST(SolveLinearSmoothed, RejectsWrongLatticeSize) {
    Grid g(8, 8, 2.0, 2.0, Bc::Neumann);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    std::vector<Array2> frozen(5, Array2(8, 8, 0.0));
    EXPECT_THROW(solve_linear_smoothed(Array2(8, 8, 0.0), frozen, g,
                                       FluxModel::cubic_isotropic(1.0), cfg, 0.1),
                 std::invalid_argument);
}

// With the true IMEX trajectory frozen, the gap of the linear solve shrinks
// as eps does and vanishes once the mollifier support falls below one cell.
TEST(SolveLinearSmoothed, SmallEpsReproducesImexTrajectory) {
    Grid g(32, 32, 8.0, 8.0, Bc::Neumann);
    Array2 h0 = white_noise(g.nx, g.ny, 0.05, 9);
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.02;
    cfg.nu = 1.0;
    const long nsteps = cfg.step_count();

    std::vector<Array2> truth;
    truth.reserve(nsteps + 1);
    truth.push_back(h0);
    {
        HeightField h(g, h0);
        SpectralSolver spectral(g);
        for (long n = 0; n < nsteps; ++n) {
            step_imex_inplace(h, model, cfg, spectral);
            truth.push_back(h.values);
        }
    }

    double prev_gap = -1.0;
    for (double eps : {3.0 * g.dx, 1.5 * g.dx, 0.5 * g.dx}) {
        std::vector<Array2> out = solve_linear_smoothed(h0, truth, g, model, cfg, eps);
        double gap = 0.0;
        for (long n = 0; n <= nsteps; ++n)
            gap = std::max(gap, l2_distance(out[n], truth[n], g.cell_area()));
        if (prev_gap >= 0.0) EXPECT_LE(gap, prev_gap);
        prev_gap = gap;
        if (eps < g.dx) EXPECT_LE(gap, 1e-8);
    }
}

TEST(RunConstructive, LinearFluxConvergesInOneIteration) {
    Grid g(16, 16, 4.0, 4.0, Bc::Neumann);
    HeightField h0(g, white_noise(16, 16, 0.2, 21));
    SolverConfig cfg;
    cfg.scheme = Scheme::ConstructiveIteration;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    cfg.nu = 1.0;
    cfg.mollifier_eps0 = 2.0 * g.dx;
    ConstructiveResult res = run_constructive(h0, FluxModel::cubic_isotropic(0.0), cfg);
    EXPECT_EQ(res.iterations, 1);
    ASSERT_EQ(res.residuals.size(), 1u);
    EXPECT_EQ(res.residuals[0], 0.0);
}

TEST(RunConstructive, ResidualsStrictlyDecrease) {
    Grid g(16, 16, 4.0, 4.0, Bc::Neumann);
    HeightField h0(g, white_noise(16, 16, 0.05, 33));
    SolverConfig cfg;
    cfg.scheme = Scheme::ConstructiveIteration;
    cfg.dt = 1e-3;
    cfg.t_end = 0.02;
    cfg.nu = 1.0;
    cfg.mollifier_eps0 = 2.0 * g.dx;
    ConstructiveResult res = run_constructive(h0, FluxModel::siegert_rotated(1.0, 1.0), cfg);
    ASSERT_GE(res.residuals.size(), 2u);
    for (std::size_t i = 1; i < res.residuals.size(); ++i)
        EXPECT_LT(res.residuals[i], res.residuals[i - 1]) << "iteration " << i;
}

TEST(RunConstructive, MatchesImexTrajectory) {
    Grid g(32, 32, 8.0, 8.0, Bc::Neumann);
    Array2 h0 = white_noise(g.nx, g.ny, 0.05, 17);
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SolverConfig cfg;
    cfg.scheme = Scheme::ConstructiveIteration;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    cfg.nu = 1.0;
    cfg.mollifier_eps0 = 2.0 * g.dx;
    ConstructiveResult res = run_constructive(HeightField(g, h0), model, cfg);

    SolverConfig direct = cfg;
    direct.scheme = Scheme::ImexSpectral;
    HeightField h(g, h0);
    SpectralSolver spectral(g);
    const long nsteps = cfg.step_count();
    double gap = 0.0;
    for (long n = 0; n < nsteps; ++n) {
        step_imex_inplace(h, model, direct, spectral);
        gap = std::max(gap, l2_distance(res.trajectory[n + 1], h.values, g.cell_area()));
    }
    EXPECT_LE(gap, 1e-4);
}

TEST(RunConstructive, ThrowsNoConvergenceWithResidualHistory) {
    Grid g(16, 16, 4.0, 4.0, Bc::Neumann);
    HeightField h0(g, white_noise(16, 16, 0.1, 55));
    SolverConfig cfg;
    cfg.scheme = Scheme::ConstructiveIteration;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    cfg.nu = 1.0;
    cfg.mollifier_eps0 = 2.0 * g.dx;
    cfg.fp_tol = 1e-300;
    cfg.max_iterations = 3;
    try {
        run_constructive(h0, FluxModel::siegert_rotated(1.0, 1.0), cfg);
        FAIL() << "expected NoConvergence";
    } catch (const NoConvergence& e) {
        EXPECT_EQ(e.residuals.size(), 3u);
    }
}

TEST(Run, ZeroHorizonReturnsInitialStateAndOneRecord) {
    Grid g(16, 16, 4.0, 4.0, Bc::Neumann);
    HeightField h0(g, white_noise(16, 16, 0.1, 2), 1.5);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.0;
    RunResult res = run(h0, FluxModel::siegert_rotated(1.0, 1.0), cfg);
    ASSERT_EQ(res.records.size(), 1u);
    EXPECT_DOUBLE_EQ(res.records[0].time, 1.5);
    EXPECT_EQ(res.records[0].energy_rate, 0.0);
    for (std::size_t k = 0; k < h0.values.data.size(); ++k)
        EXPECT_EQ(res.final_state.values.data[k], h0.values.data[k]);
}

TEST(Run, RerunIsBitIdentical) {
    Grid g(32, 32, 8.0, 8.0, Bc::Periodic);
    HeightField h0(g, white_noise(32, 32, 0.1, 77));
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.05;
    cfg.nu = 1.0;
    RunOptions opt;
    opt.sample_every = 10;
    RunResult a = run(h0, model, cfg, opt);
    RunResult b = run(h0, model, cfg, opt);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].time, b.records[i].time);
        EXPECT_EQ(a.records[i].mass, b.records[i].mass);
        EXPECT_EQ(a.records[i].energy, b.records[i].energy);
        EXPECT_EQ(a.records[i].energy_rate, b.records[i].energy_rate);
        EXPECT_EQ(a.records[i].max_slope, b.records[i].max_slope);
        EXPECT_EQ(a.records[i].length_scale, b.records[i].length_scale);
    }
    for (std::size_t k = 0; k < a.final_state.values.data.size(); ++k)
        EXPECT_EQ(a.final_state.values.data[k], b.final_state.values.data[k]);
}

// Sampling at cadence 3 over 10 steps lands on steps 0, 3, 6, 9, 10; each
// sampled energy_rate is the one-step difference quotient at that step, and
// the final record's rate is 0.
TEST(Run, SamplingCadenceAndEnergyRates) {
    Grid g(24, 24, 6.0, 6.0, Bc::Neumann);
    HeightField h0(g, white_noise(24, 24, 0.08, 13));
    FluxModel model = FluxModel::siegert_rotated(1.0, 1.0);
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    cfg.nu = 1.0;
    RunOptions opt;
    opt.sample_every = 3;
    RunResult res = run(h0, model, cfg, opt);
    ASSERT_EQ(res.records.size(), 5u);

    // Manual replay for the oracle energies.
    std::vector<double> e;
    {
        HeightField h = h0;
        SpectralSolver spectral(g);
        e.push_back(energy(h, model, cfg.nu));
        for (int n = 0; n < 10; ++n) {
            step_imex_inplace(h, model, cfg, spectral);
            e.push_back(energy(h, model, cfg.nu));
        }
    }
    const int steps[5] = {0, 3, 6, 9, 10};
    for (int s = 0; s < 5; ++s) {
        EXPECT_DOUBLE_EQ(res.records[s].time, steps[s] * cfg.dt);
        EXPECT_DOUBLE_EQ(res.records[s].energy, e[steps[s]]);
        if (s < 4)
            EXPECT_DOUBLE_EQ(res.records[s].energy_rate,
                             (e[steps[s] + 1] - e[steps[s]]) / cfg.dt);
        else
            EXPECT_EQ(res.records[s].energy_rate, 0.0);
    }
}

TEST(Run, SnapshotCadence) {
    Grid g(16, 16, 4.0, 4.0, Bc::Neumann);
    HeightField h0(g, white_noise(16, 16, 0.1, 4));
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.01;
    cfg.nu = 1.0;
    RunOptions opt;
    opt.sample_every = 3;
    opt.snapshot_every = 2;
    std::vector<long> seen;
    opt.snapshot_sink = [&](const HeightField&, long n) { seen.push_back(n); };
    run(h0, FluxModel::siegert_rotated(1.0, 1.0), cfg, opt);
    ASSERT_EQ(seen.size(), 3u);
    EXPECT_EQ(seen[0], 0);
    EXPECT_EQ(seen[1], 6);
    EXPECT_EQ(seen[2], 10);
}

TEST(SolverConfig, ValidatesTimeLattice) {
    SolverConfig cfg;
    cfg.dt = 3e-3;
    cfg.t_end = 0.01;  // not an integer multiple
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.t_end = 0.012;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_EQ(cfg.step_count(), 4);
    cfg.dt = -1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(SolverConfig, DefaultStabilizationConstants) {
    EXPECT_DOUBLE_EQ(default_stabilization(FluxModel::siegert_rotated(2.0, 1.0)), 2.0);
    EXPECT_DOUBLE_EQ(default_stabilization(FluxModel::johnson(1.5, 1.0)), 1.5);
    EXPECT_DOUBLE_EQ(default_stabilization(FluxModel::cubic_isotropic(2.0)), 6.0);
    EXPECT_DOUBLE_EQ(default_stabilization(FluxModel::cubic_anisotropic(1.0, 0.5)), 3.0);
}
