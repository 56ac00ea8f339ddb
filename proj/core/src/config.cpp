#include "obham/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "obham/io.hpp"

namespace obham::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw InvalidInput("config: " + msg); }

void check_keys(const json& block, const char* name, std::initializer_list<const char*> allowed)
{
    if (!block.is_object()) fail(std::string(name) + " must be an object");
    for (const auto& item : block.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) fail(std::string("unknown key ") + name + "." + item.key());
    }
}

double as_double(const json& block, const char* name, const char* key, double fallback)
{
    auto it = block.find(key);
    if (it == block.end()) return fallback;
    if (!it->is_number()) fail(std::string(name) + "." + key + " must be a number");
    return it->get<double>();
}

int as_int(const json& block, const char* name, const char* key, int fallback)
{
    auto it = block.find(key);
    if (it == block.end()) return fallback;
    if (!it->is_number_integer()) fail(std::string(name) + "." + key + " must be an integer");
    return it->get<int>();
}

bool as_bool(const json& block, const char* name, const char* key, bool fallback)
{
    auto it = block.find(key);
    if (it == block.end()) return fallback;
    if (!it->is_boolean()) fail(std::string(name) + "." + key + " must be a boolean");
    return it->get<bool>();
}

std::string as_string(const json& block, const char* name, const char* key,
                      const std::string& fallback)
{
    auto it = block.find(key);
    if (it == block.end()) return fallback;
    if (!it->is_string()) fail(std::string(name) + "." + key + " must be a string");
    return it->get<std::string>();
}

Vec as_vec(const json& block, const char* name, const char* key)
{
    auto it = block.find(key);
    if (it == block.end()) return Vec();
    if (!it->is_array()) fail(std::string(name) + "." + key + " must be an array of numbers");
    Vec v(it->size());
    int i = 0;
    for (const auto& entry : *it) {
        if (!entry.is_number()) fail(std::string(name) + "." + key + " must be an array of numbers");
        v[i++] = entry.get<double>();
    }
    return v;
}

void parse_system(const json& block, RunConfig& cfg)
{
    const std::string name = as_string(block, "system", "name", "oscillator");
    cfg.system_name = name;

    if (name == "oscillator") {
        check_keys(block, "system",
                   {"name", "spring", "kappa_fiber", "delta", "constraint", "q0", "p0", "xi0",
                    "pi0"});
        auto& o = cfg.oscillator;
        o.spring = as_double(block, "system", "spring", o.spring);
        o.kappa_fiber = as_double(block, "system", "kappa_fiber", o.kappa_fiber);
        o.delta = as_double(block, "system", "delta", o.delta);
        const std::string c = as_string(block, "system", "constraint", "none");
        if (c == "none")
            o.position_constraint = false;
        else if (c == "position")
            o.position_constraint = true;
        else
            fail("system.constraint must be \"none\" or \"position\"");
        o.q0 = as_double(block, "system", "q0", o.q0);
        o.p0 = as_double(block, "system", "p0", o.p0);
        o.xi0 = as_double(block, "system", "xi0", o.xi0);
        o.pi0 = as_double(block, "system", "pi0", o.pi0);
    } else if (name == "circle") {
        check_keys(block, "system", {"name", "level", "q0", "p0"});
        auto& c = cfg.circle;
        c.level = as_double(block, "system", "level", c.level);
        c.q0 = as_double(block, "system", "q0", c.q0);
        c.p0 = as_double(block, "system", "p0", c.p0);
    } else if (name == "toda") {
        check_keys(block, "system",
                   {"name", "n", "delta0", "alpha_noise", "beta_weight", "kappa",
                    "alpha_momentum", "constraint", "q0", "p0", "xi0_scale"});
        auto& t = cfg.toda;
        t.params.n = as_int(block, "system", "n", t.params.n);
        t.params.delta0 = as_double(block, "system", "delta0", t.params.delta0);
        t.params.alpha_noise = as_double(block, "system", "alpha_noise", t.params.alpha_noise);
        t.params.beta_weight = as_double(block, "system", "beta_weight", t.params.beta_weight);
        t.params.kappa = as_double(block, "system", "kappa", t.params.kappa);
        t.params.alpha_momentum =
            as_double(block, "system", "alpha_momentum", t.params.alpha_momentum);
        const std::string c = as_string(block, "system", "constraint", "ellipsoid");
        if (c == "none")
            t.ellipsoid_constraint = false;
        else if (c == "ellipsoid")
            t.ellipsoid_constraint = true;
        else
            fail("system.constraint must be \"none\" or \"ellipsoid\"");
        t.q0 = as_vec(block, "system", "q0");
        t.p0 = as_vec(block, "system", "p0");
        t.xi0_scale = as_double(block, "system", "xi0_scale", t.xi0_scale);
        if (t.params.n < 2) fail("system.n must be at least 2");
        // canonical form carries the resolved initial profile
        if (t.q0.size() == 0) {
            t.q0 = Vec(t.params.n);
            for (int i = 0; i < t.params.n; ++i)
                t.q0[i] = 0.5 * (1.0 - 2.0 * i / (t.params.n - 1.0));
        }
        if (t.p0.size() == 0) t.p0 = 0.8 * t.q0;
        if (t.q0.size() != t.params.n || t.p0.size() != t.params.n)
            fail("system.q0 and system.p0 must have one entry per particle");
    } else {
        fail("system.name must be \"oscillator\", \"circle\" or \"toda\"");
    }
}

void parse_integrator(const json& block, integrate::IntegratorConfig& ic)
{
    check_keys(block, "integrator",
               {"h0", "h_min", "h_max", "tol_geo", "t_final", "adapt", "growth_factor",
                "max_projection_iters", "tol_constraint", "enable_projection",
                "compute_geo_error", "backend"});
    ic.h0 = as_double(block, "integrator", "h0", ic.h0);
    ic.h_min = as_double(block, "integrator", "h_min", ic.h_min);
    ic.h_max = as_double(block, "integrator", "h_max", ic.h_max);
    ic.tol_geo = as_double(block, "integrator", "tol_geo", ic.tol_geo);
    ic.t_final = as_double(block, "integrator", "t_final", ic.t_final);
    ic.adapt = as_bool(block, "integrator", "adapt", ic.adapt);
    ic.growth_factor = as_double(block, "integrator", "growth_factor", ic.growth_factor);
    ic.max_projection_iters =
        as_int(block, "integrator", "max_projection_iters", ic.max_projection_iters);
    ic.tol_constraint = as_double(block, "integrator", "tol_constraint", ic.tol_constraint);
    ic.enable_projection = as_bool(block, "integrator", "enable_projection", ic.enable_projection);
    ic.compute_geo_error =
        as_bool(block, "integrator", "compute_geo_error", ic.compute_geo_error);
    const std::string backend = as_string(block, "integrator", "backend", "table");
    if (backend == "table")
        ic.backend = poisson::Backend::Tabulated;
    else if (backend == "exact")
        ic.backend = poisson::Backend::ExactInverse;
    else
        fail("integrator.backend must be \"table\" or \"exact\"");
}

void parse_regularization(const json& block, constraints::RegularizationParams& reg)
{
    check_keys(block, "constraint", {"alpha", "eps", "mu", "t_char", "force_first_class_zero"});
    reg.alpha = as_double(block, "constraint", "alpha", reg.alpha);
    reg.eps = as_double(block, "constraint", "eps", reg.eps);
    reg.mu = as_double(block, "constraint", "mu", reg.mu);
    reg.t_char = as_double(block, "constraint", "t_char", reg.t_char);
    reg.force_first_class_zero =
        as_bool(block, "constraint", "force_first_class_zero", reg.force_first_class_zero);
}

void parse_mixing(const json& block, RunConfig& cfg)
{
    check_keys(block, "mixing", {"mode", "complete_compatible"});
    const std::string mode = as_string(block, "mixing", "mode", "zero");
    if (mode == "zero")
        cfg.mixing_mode = MixingModel::Mode::Zero;
    else if (mode == "curvature")
        cfg.mixing_mode = MixingModel::Mode::Curvature;
    else
        fail("mixing.mode must be \"zero\" or \"curvature\"");
    cfg.mixing_complete_compatible =
        as_bool(block, "mixing", "complete_compatible", cfg.mixing_complete_compatible);
}

void parse_output(const json& block, RunConfig& cfg)
{
    check_keys(block, "output", {"csv", "jsonl", "report"});
    cfg.csv_path = as_string(block, "output", "csv", cfg.csv_path);
    cfg.jsonl_path = as_string(block, "output", "jsonl", cfg.jsonl_path);
    cfg.report_path = as_string(block, "output", "report", cfg.report_path);
}

} // namespace

RunConfig parse(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("not valid JSON (") + e.what() + ")");
    }
    if (!doc.is_object()) fail("document root must be an object");
    check_keys(doc, "root", {"system", "integrator", "constraint", "mixing", "output"});

    RunConfig cfg;
    if (doc.contains("system")) parse_system(doc["system"], cfg);
    if (doc.contains("integrator")) parse_integrator(doc["integrator"], cfg.integrator);
    if (doc.contains("constraint")) parse_regularization(doc["constraint"], cfg.integrator.reg);
    if (doc.contains("mixing")) parse_mixing(doc["mixing"], cfg);
    if (doc.contains("output")) parse_output(doc["output"], cfg);

    try {
        cfg.integrator.validate();
        build_system(cfg);
    } catch (const InvalidInput& e) {
        fail(e.what());
    }
    return cfg;
}

RunConfig load(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string serialize(const RunConfig& cfg)
{
    json doc;

    json sys;
    sys["name"] = cfg.system_name;
    if (cfg.system_name == "oscillator") {
        const auto& o = cfg.oscillator;
        sys["spring"] = o.spring;
        sys["kappa_fiber"] = o.kappa_fiber;
        sys["delta"] = o.delta;
        sys["constraint"] = o.position_constraint ? "position" : "none";
        sys["q0"] = o.q0;
        sys["p0"] = o.p0;
        sys["xi0"] = o.xi0;
        sys["pi0"] = o.pi0;
    } else if (cfg.system_name == "circle") {
        sys["level"] = cfg.circle.level;
        sys["q0"] = cfg.circle.q0;
        sys["p0"] = cfg.circle.p0;
    } else {
        const auto& t = cfg.toda;
        sys["n"] = t.params.n;
        sys["delta0"] = t.params.delta0;
        sys["alpha_noise"] = t.params.alpha_noise;
        sys["beta_weight"] = t.params.beta_weight;
        sys["kappa"] = t.params.kappa;
        sys["alpha_momentum"] = t.params.alpha_momentum;
        sys["constraint"] = t.ellipsoid_constraint ? "ellipsoid" : "none";
        sys["q0"] = std::vector<double>(t.q0.data(), t.q0.data() + t.q0.size());
        sys["p0"] = std::vector<double>(t.p0.data(), t.p0.data() + t.p0.size());
        sys["xi0_scale"] = t.xi0_scale;
    }
    doc["system"] = sys;

    const auto& ic = cfg.integrator;
    json integ;
    integ["h0"] = ic.h0;
    integ["h_min"] = ic.h_min;
    integ["h_max"] = ic.h_max;
    integ["tol_geo"] = ic.tol_geo;
    integ["t_final"] = ic.t_final;
    integ["adapt"] = ic.adapt;
    integ["growth_factor"] = ic.growth_factor;
    integ["max_projection_iters"] = ic.max_projection_iters;
    integ["tol_constraint"] = ic.tol_constraint;
    integ["enable_projection"] = ic.enable_projection;
    integ["compute_geo_error"] = ic.compute_geo_error;
    integ["backend"] = ic.backend == poisson::Backend::Tabulated ? "table" : "exact";
    doc["integrator"] = integ;

    json reg;
    reg["alpha"] = ic.reg.alpha;
    reg["eps"] = ic.reg.eps;
    reg["mu"] = ic.reg.mu;
    reg["t_char"] = ic.reg.t_char;
    reg["force_first_class_zero"] = ic.reg.force_first_class_zero;
    doc["constraint"] = reg;

    json mixing;
    mixing["mode"] = cfg.mixing_mode == MixingModel::Mode::Zero ? "zero" : "curvature";
    mixing["complete_compatible"] = cfg.mixing_complete_compatible;
    doc["mixing"] = mixing;

    json output;
    output["csv"] = cfg.csv_path;
    output["jsonl"] = cfg.jsonl_path;
    output["report"] = cfg.report_path;
    doc["output"] = output;

    return doc.dump(2) + "\n";
}

std::string digest(const RunConfig& cfg) { return io::hex16(io::fnv1a64(serialize(cfg))); }

systems::SystemBundle build_system(const RunConfig& cfg)
{
    systems::SystemBundle sys;
    if (cfg.system_name == "oscillator")
        sys = systems::oscillator(cfg.oscillator);
    else if (cfg.system_name == "circle")
        sys = systems::circle(cfg.circle);
    else if (cfg.system_name == "toda")
        sys = systems::toda_chain(cfg.toda);
    else
        fail("system.name must be \"oscillator\", \"circle\" or \"toda\"");

    sys.spec.mixing.mode = cfg.mixing_mode;
    sys.spec.mixing.complete_compatible = cfg.mixing_complete_compatible;
    return sys;
}

} // namespace obham::config
