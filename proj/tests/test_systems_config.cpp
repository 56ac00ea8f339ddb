#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "obham/config.hpp"
#include "obham/io.hpp"
#include "oracles.hpp"

using namespace obham;

namespace {

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(const char* name)
        : path((std::filesystem::temp_directory_path() / name).string())
    {
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_SUITE("systems_config")
{
    TEST_CASE("built-in systems validate and start where configured")
    {
        auto osc = systems::oscillator();
        CHECK_NOTHROW(validate_spec_at(osc.spec, osc.initial.x));
        CHECK(osc.initial.x[0] == 1.0);
        CHECK(osc.spec.hamiltonian.value(osc.initial) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK_FALSE(osc.spec.constrained());

        auto circ = systems::circle();
        CHECK_NOTHROW(validate_spec_at(circ.spec, circ.initial.x));
        CHECK(circ.spec.constrained());
        CHECK(circ.spec.constraint.value(circ.initial) == 0.0); // starts on the level set

        auto toda = systems::toda_chain();
        CHECK_NOTHROW(validate_spec_at(toda.spec, toda.initial.x));
        CHECK(toda.initial.x.head(3)[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(toda.initial.x.tail(3)[0] == doctest::Approx(0.4).epsilon(1e-15));
        CHECK(toda.spec.constraint.value(toda.initial) > 0.0); // strictly feasible start
    }

    TEST_CASE("surface samplers stay on their constraint surfaces")
    {
        auto circ = systems::circle();
        auto osc = systems::oscillator({.position_constraint = true});
        auto toda = systems::toda_chain();
        for (int i = 0; i < 32; ++i) {
            CHECK(std::abs(circ.spec.constraint.value(circ.surface_sample(i))) <= 1e-12);
            CHECK(std::abs(osc.spec.constraint.value(osc.surface_sample(i))) <= 1e-12);
            CHECK(std::abs(toda.spec.constraint.value(toda.surface_sample(i))) <= 1e-9);
        }
        // samples differ from each other: the classification sweep sees variety
        const Vec a = circ.surface_sample(0).flat();
        const Vec b = circ.surface_sample(1).flat();
        CHECK((a - b).cwiseAbs().maxCoeff() > 1e-3);
    }

    TEST_CASE("configuration defaults parse from an empty document")
    {
        const auto cfg = config::parse("{}");
        CHECK(cfg.system_name == "oscillator");
        CHECK(cfg.integrator.h0 == 1e-2);
        CHECK(cfg.integrator.backend == poisson::Backend::Tabulated);
        CHECK(cfg.mixing_mode == MixingModel::Mode::Zero);
        CHECK(config::digest(cfg).size() == 16);
    }

    TEST_CASE("strict parsing: unknown keys, wrong types, bad values")
    {
        CHECK_THROWS_AS(config::parse("not json"), InvalidInput);
        CHECK_THROWS_AS(config::parse("[1,2]"), InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"systm": {}})"), InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"system": {"name": "pendulum"}})"), InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"system": {"name": "circle", "radius": 2}})"),
                        InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"integrator": {"h0": "fast"}})"), InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"integrator": {"h0": -0.1}})"), InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"integrator": {"adapt": 1}})"), InvalidInput);
        CHECK_THROWS_AS(
            config::parse(R"({"system": {"name": "toda", "q0": [1, 2], "p0": [0, 0, 0]}})"),
            InvalidInput);
        CHECK_THROWS_AS(config::parse(R"({"constraint": {"eps": 0}})"), InvalidInput);

        try {
            config::parse(R"({"mixing": {"mode": "sideways"}})");
            FAIL("expected InvalidInput");
        } catch (const InvalidInput& e) {
            CHECK(std::string(e.what()).find("mixing.mode") != std::string::npos);
        }
    }

    TEST_CASE("serialization is canonical and round-trips byte for byte")
    {
        const std::string text = R"({
            "system": {"name": "circle", "level": 2.5, "q0": 1.2},
            "integrator": {"h0": 0.005, "t_final": 2.0, "adapt": false},
            "constraint": {"alpha": 0.5},
            "mixing": {"mode": "curvature", "complete_compatible": true}
        })";
        const auto cfg = config::parse(text);
        const std::string canon = config::serialize(cfg);
        const auto cfg2 = config::parse(canon);
        CHECK(config::serialize(cfg2) == canon);
        CHECK(config::digest(cfg2) == config::digest(cfg));

        // the canonical form spells out everything, including untouched defaults
        CHECK(canon.find("\"h_min\"") != std::string::npos);
        CHECK(canon.find("\"force_first_class_zero\"") != std::string::npos);
        CHECK(canon.find("\"level\": 2.5") != std::string::npos);

        // any semantic change moves the digest
        auto moved = cfg;
        moved.integrator.h0 = 0.006;
        CHECK(config::digest(moved) != config::digest(cfg));
    }

    TEST_CASE("toda defaults are resolved to concrete arrays at parse time")
    {
        const auto cfg = config::parse(R"({"system": {"name": "toda"}})");
        REQUIRE(cfg.toda.q0.size() == 3);
        CHECK(cfg.toda.q0[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cfg.toda.q0[2] == doctest::Approx(-0.5).epsilon(1e-15));
        CHECK(cfg.toda.p0[0] == doctest::Approx(0.4).epsilon(1e-15));
        const std::string canon = config::serialize(cfg);
        CHECK(canon.find("\"q0\": [") != std::string::npos);

        auto sys = config::build_system(cfg);
        CHECK(sys.spec.n == 3);
        CHECK(sys.spec.constrained());
    }

    TEST_CASE("mixing installation: curvature mode lands in the built system")
    {
        const auto cfg = config::parse(
            R"({"mixing": {"mode": "curvature", "complete_compatible": true}})");
        auto sys = config::build_system(cfg);
        CHECK(sys.spec.mixing.mode == MixingModel::Mode::Curvature);
        CHECK(sys.spec.mixing.complete_compatible);
    }

    TEST_CASE("shortest round-trip formatting of doubles")
    {
        for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 5.0, 0.0, -0.125}) {
            const std::string s = io::format_double(v);
            CHECK(std::stod(s) == v);
        }
        CHECK(io::format_double(0.25) == "0.25");
        CHECK(io::format_double(5.0) == "5");
    }

    TEST_CASE("hash primitives match the published FNV-1a vectors")
    {
        CHECK(io::fnv1a64("") == 0xcbf29ce484222325ull);
        CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
        CHECK(io::fnv1a64("foobar") == 0x85944171f73967e8ull);
        CHECK(io::hex16(0) == "0000000000000000");
        CHECK(io::hex16(0xdeadbeefull) == "00000000deadbeef");
        CHECK(io::hex16(io::fnv1a64("a")) == "af63dc4c8601ec8c");
    }

    TEST_CASE("trajectory outputs: digest stamp, shape, and exact value round-trip")
    {
        auto sys = systems::circle();
        integrate::IntegratorConfig icfg;
        icfg.h0 = 0.01;
        icfg.t_final = 0.05;
        icfg.adapt = false;
        icfg.compute_geo_error = false;
        icfg.reg.alpha = 0.0;
        const auto traj = integrate::integrate(sys.spec, sys.initial, icfg);

        TempFile csv("obham_test_traj.csv");
        io::write_csv(csv.path, "00deadbeef000000", sys.spec, traj);
        const std::string text = slurp(csv.path);
        std::istringstream lines(text);
        std::string line;
        std::getline(lines, line);
        CHECK(line == "# config_digest=00deadbeef000000");
        std::getline(lines, line);
        CHECK(line == "t,x1,x2,xi1,pi1,phi,energy,h_used");
        int rows = 0;
        std::string first_row;
        while (std::getline(lines, line)) {
            if (rows == 0) first_row = line;
            ++rows;
        }
        CHECK(rows == 6); // initial state plus five steps
        // initial row: t=0, q=1, p=1, h_used=0, energy exactly 1
        CHECK(first_row == "0,1,1,0,0,0,1,0");

        TempFile jsonl("obham_test_traj.jsonl");
        io::write_jsonl(jsonl.path, "00deadbeef000000", traj);
        std::istringstream jl(slurp(jsonl.path));
        int jrows = 0;
        std::string jfirst, second, jlast;
        while (std::getline(jl, line)) {
            if (jrows == 0) jfirst = line;
            if (jrows == 1) second = line;
            jlast = line;
            ++jrows;
        }
        CHECK(jrows == 7); // meta, five steps, final
        CHECK(jfirst.find("\"config_digest\":\"00deadbeef000000\"") != std::string::npos);
        CHECK(jfirst.find("\"type\":\"meta\"") != std::string::npos);
        CHECK(jlast.find("\"type\":\"final\"") != std::string::npos);
        // energy-level constraints are bracket-flat, so every step row snaps
        CHECK(second.find("\"class_flag\":true") != std::string::npos);

        CHECK_THROWS_AS(io::write_csv("/nonexistent_dir_zzz/x.csv", "d", sys.spec, traj),
                        InvalidInput);
    }
}
