#include <doctest.h>

#include <cmath>

#include "qcorr/config.hpp"

using namespace qcorr;

TEST_CASE("emitted configs parse back to the same scenario")
{
    for (const std::string& name : preset_names()) {
        const ScenarioConfig c = preset_config(name);
        CHECK(parse_config(emit_config(c)) == c);
    }
    ScenarioConfig c = preset_config("quartic");
    c.coherent = false;
    c.cov_xx = 0.03;
    c.cov_xp = 0.01;
    c.cov_pp = 0.1 / 3.0;
    c.lambda_star = 0.125;
    c.observables = {"x", "xp"};
    c.run_mixture = false;
    const ScenarioConfig back = parse_config(emit_config(c));
    CHECK(back == c);
    CHECK(back.cov_pp == c.cov_pp);
}

TEST_CASE("preset line applies before the other keys")
{
    const ScenarioConfig c = parse_config("model.hbar = 0.2\n# comment\npreset = quartic\n");
    CHECK(c.hamiltonian == HamiltonianKind::quartic);
    CHECK(c.hbar == 0.2);
    CHECK(c.box_x == 2.0);
}

TEST_CASE("malformed configs are rejected")
{
    CHECK_THROWS_AS(parse_config("model.hbarr = 0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.hbar = 0.1\nmodel.hbar = 0.2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("model.hbar = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("solvers = quantum exact\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("initial.cov = 1 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("preset = nosuch\n"), ConfigError);
    ScenarioConfig c = preset_config("damped");
    c.hbar = -1.0;
    CHECK_THROWS_AS(validate_config(c), ConfigError);
}

TEST_CASE("lambda_star auto round trip")
{
    const ScenarioConfig c = parse_config("mixture.lambda_star = auto\n");
    CHECK(std::isnan(c.lambda_star));
    CHECK(emit_config(c).find("mixture.lambda_star = auto") != std::string::npos);
}

TEST_CASE("sweep specs")
{
    const SweepSpec s = parse_sweep("preset = quartic\nsweep.hbar = 0.1 0.05\nsweep.gamma = 1\nsweep.window = 0.3 0.9\n");
    CHECK(s.hbar == std::vector<double>{0.1, 0.05});
    CHECK(s.gamma == std::vector<double>{1.0});
    CHECK(s.window_lo == 0.3);
    CHECK(s.window_hi == 0.9);
    CHECK(s.base.hamiltonian == HamiltonianKind::quartic);
    const SweepSpec back = parse_sweep(emit_sweep(s));
    CHECK(back.hbar == s.hbar);
    CHECK(back.base == s.base);
    CHECK_THROWS_AS(parse_sweep("sweep.nosuch = 1\n"), ConfigError);
}
