#include <benchmark/benchmark.h>

#include "qcorr/langevin.hpp"
#include "qcorr/lindblad.hpp"
#include "qcorr/mixture.hpp"
#include "qcorr/weyl.hpp"

using namespace qcorr;

namespace {

Vec vec2(double a, double b)
{
    Vec v(2);
    v << a, b;
    return v;
}

DynamicsModel quartic_model(double hbar)
{
    ProbeOptions probes;
    probes.count = 200;
    return DynamicsModel(symbols::quartic(), {symbols::position(), symbols::momentum()}, hbar,
                         DomainBox::symmetric(vec2(2, 2)), Mat(), probes);
}

GridState coherent_on(const Grid1D& g, double hbar)
{
    return GridState::pure(g, hbar, gaussian_wavefunction(coherent_state(vec2(0.5, 0.0), hbar), g, hbar));
}

}  // namespace

static void BM_WeylQuantize(benchmark::State& state)
{
    const double hbar = 0.05;
    const Grid1D g = Grid1D::balanced(static_cast<int>(state.range(0)), hbar);
    const Symbol h = symbols::quartic();
    for (auto _ : state)
        benchmark::DoNotOptimize(weyl_quantize(h, g, hbar));
}
BENCHMARK(BM_WeylQuantize)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_WignerTransform(benchmark::State& state)
{
    const double hbar = 0.05;
    const Grid1D g = Grid1D::balanced(static_cast<int>(state.range(0)), hbar);
    const GridState rho = coherent_on(g, hbar);
    for (auto _ : state)
        benchmark::DoNotOptimize(wigner_transform(rho));
}
BENCHMARK(BM_WignerTransform)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_LindbladSplitStep(benchmark::State& state)
{
    const double hbar = 0.05, dt = 0.01;
    const DynamicsModel m = quartic_model(hbar);
    const Grid1D g = Grid1D::balanced(static_cast<int>(state.range(0)), hbar);
    const LindbladSolver solver(LindbladOperators::quantize(m, g), LindbladScheme::split, dt);
    GridState rho = coherent_on(g, hbar);
    double t = 0.0;
    for (auto _ : state) {
        solver.evolve(rho, t, t + dt);
        t += dt;
    }
}
BENCHMARK(BM_LindbladSplitStep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_MixtureStep(benchmark::State& state)
{
    const double hbar = 0.05;
    const DynamicsModel m = quartic_model(hbar);
    const MixturePropagator prop(m);
    ParticleEnsemble e;
    e.hbar = hbar;
    for (long i = 0; i < state.range(0); ++i) {
        GaussianState c = coherent_state(vec2(0.5, 0.0), hbar);
        c.weight = 1.0 / static_cast<double>(state.range(0));
        e.particles.push_back(c);
    }
    for (auto _ : state)
        e = prop.step(e, 0.01);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MixtureStep)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_LangevinStep(benchmark::State& state)
{
    const double hbar = 0.05;
    const DynamicsModel m = quartic_model(hbar);
    ClassicalEnsemble c = ClassicalEnsemble::sample(coherent_state(vec2(0.5, 0.0), hbar), state.range(0), 7);
    LangevinOptions opts;
    opts.scheme = LangevinScheme::stratonovich_heun;
    for (auto _ : state)
        c = langevin_step(c, m, 0.01, opts);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LangevinStep)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
