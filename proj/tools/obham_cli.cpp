// Command-line front end: simulate | converge | classify | lax | validate.
//
// Exit codes: 0 on success, 2 for configuration or argument problems, 3 for
// numerical failures (projection stall, step-size collapse, singular or
// degenerate structures). A malformed configuration never creates output
// files: everything is parsed and validated before any file is opened.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "obham/bundle_geometry.hpp"
#include "obham/config.hpp"
#include "obham/constraints.hpp"
#include "obham/integrator.hpp"
#include "obham/io.hpp"
#include "obham/lax_toda.hpp"
#include "obham/systems.hpp"

namespace {

using nlohmann::json;
using namespace obham;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct CommonArgs {
    std::string config_path;
    std::string csv_override;
    std::string jsonl_override;
    std::string report_override;
};

void add_common(CLI::App* sub, CommonArgs& args, bool with_outputs)
{
    sub->add_option("--config", args.config_path, "configuration JSON file")->required();
    if (with_outputs) {
        sub->add_option("--csv", args.csv_override, "override output.csv");
        sub->add_option("--jsonl", args.jsonl_override, "override output.jsonl");
    }
    sub->add_option("--report", args.report_override, "override output.report");
}

// Loads and fully validates the configuration; applies CLI output overrides.
// Throws InvalidInput (exit 2 at the call site) before any file is created.
config::RunConfig load_config(const CommonArgs& args)
{
    config::RunConfig cfg = config::load(args.config_path);
    if (!args.csv_override.empty()) cfg.csv_path = args.csv_override;
    if (!args.jsonl_override.empty()) cfg.jsonl_path = args.jsonl_override;
    if (!args.report_override.empty()) cfg.report_path = args.report_override;
    return cfg;
}

void write_report(const std::string& path, const json& doc)
{
    if (!path.empty()) io::write_text(path, doc.dump(2) + "\n");
}

int cmd_simulate(const CommonArgs& args)
{
    config::RunConfig cfg;
    std::string dig;
    systems::SystemBundle sys;
    try {
        cfg = load_config(args);
        dig = config::digest(cfg);
        sys = config::build_system(cfg);
        validate_spec_at(sys.spec, sys.initial.x);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const integrate::Trajectory traj = integrate::integrate(sys.spec, sys.initial, cfg.integrator);

        if (!cfg.csv_path.empty()) io::write_csv(cfg.csv_path, dig, sys.spec, traj);
        if (!cfg.jsonl_path.empty()) io::write_jsonl(cfg.jsonl_path, dig, traj);

        double max_violation = 0.0, max_eps_geo = 0.0;
        int clamp_events = 0, projection_total = 0;
        for (const auto& d : traj.diag) {
            max_violation = std::max(max_violation, -std::min(0.0, d.phi_pre));
            max_eps_geo = std::max(max_eps_geo, d.eps_geo);
            clamp_events += d.clamped ? 1 : 0;
            projection_total += d.projection_iters;
        }
        const auto& first = traj.states.front();
        const auto& last = traj.states.back();

        json rep;
        rep["config_digest"] = dig;
        rep["system"] = cfg.system_name;
        rep["steps"] = traj.diag.size();
        rep["t_final"] = last.t;
        rep["energy_initial"] = sys.spec.hamiltonian.value(first);
        rep["energy_final"] = sys.spec.hamiltonian.value(last);
        rep["max_violation_pre"] = max_violation;
        rep["max_eps_geo"] = max_eps_geo;
        rep["clamp_events"] = clamp_events;
        rep["projection_iters_total"] = projection_total;
        write_report(cfg.report_path, rep);

        std::cout << "system=" << cfg.system_name << " digest=" << dig
                  << " steps=" << traj.diag.size() << " t=" << io::format_double(last.t)
                  << " energy=" << io::format_double(rep["energy_final"].get<double>())
                  << " max_violation_pre=" << io::format_double(max_violation) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

int cmd_converge(const CommonArgs& args, int levels)
{
    config::RunConfig cfg;
    std::string dig;
    systems::SystemBundle sys;
    try {
        cfg = load_config(args);
        if (levels < 3) throw InvalidInput("converge: --levels must be at least 3");
        dig = config::digest(cfg);
        sys = config::build_system(cfg);
        validate_spec_at(sys.spec, sys.initial.x);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const integrate::OrderReport rep =
            integrate::convergence_study(sys.spec, sys.initial, cfg.integrator, levels);

        std::cout << "level h e_phi e_glob\n";
        for (size_t i = 0; i < rep.hs.size(); ++i)
            std::cout << i << " " << io::format_double(rep.hs[i]) << " "
                      << io::format_double(rep.e_phi[i]) << " "
                      << io::format_double(rep.e_glob[i]) << "\n";
        if (rep.exact)
            std::cout << "exact=true\n";
        else
            std::cout << "p_glob=" << io::format_double(rep.p_glob) << " p_phi="
                      << (rep.phi_order_defined ? io::format_double(rep.p_phi) : "undefined")
                      << "\n";

        json doc;
        doc["config_digest"] = dig;
        doc["system"] = cfg.system_name;
        doc["levels"] = levels;
        doc["h"] = rep.hs;
        doc["e_phi"] = rep.e_phi;
        doc["e_glob"] = rep.e_glob;
        doc["exact"] = rep.exact;
        if (!rep.exact) {
            doc["p_glob"] = rep.p_glob;
            if (rep.phi_order_defined) doc["p_phi"] = rep.p_phi;
        }
        write_report(cfg.report_path, doc);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

int cmd_classify(const CommonArgs& args, int samples)
{
    config::RunConfig cfg;
    std::string dig;
    systems::SystemBundle sys;
    try {
        cfg = load_config(args);
        if (samples < 1) throw InvalidInput("classify: --samples must be positive");
        dig = config::digest(cfg);
        sys = config::build_system(cfg);
        if (!sys.spec.constrained() || !sys.surface_sample)
            throw InvalidInput("classify: the configured system has no constraint surface");
        validate_spec_at(sys.spec, sys.initial.x);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        std::vector<BundleState> pts;
        pts.reserve(samples);
        for (int i = 0; i < samples; ++i) pts.push_back(sys.surface_sample(i));

        const constraints::DiracReport rep =
            constraints::classify_dirac(sys.spec, pts, 8, cfg.integrator.backend);

        const char* label = rep.classification == constraints::DiracClass::FirstClass
                                ? "first_class"
                                : rep.classification == constraints::DiracClass::SecondClass
                                      ? "second_class"
                                      : "indeterminate";
        std::cout << "classification=" << label
                  << " max_bracket=" << io::format_double(rep.max_abs_bracket)
                  << " tolerance=" << io::format_double(rep.tolerance)
                  << " samples=" << rep.samples_used << "\n";

        json doc;
        doc["config_digest"] = dig;
        doc["system"] = cfg.system_name;
        doc["classification"] = label;
        doc["max_abs_bracket"] = rep.max_abs_bracket;
        doc["tolerance"] = rep.tolerance;
        doc["samples"] = rep.samples_used;
        write_report(cfg.report_path, doc);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

int cmd_lax(const CommonArgs& args, double lambda, bool flip_eps_sign)
{
    config::RunConfig cfg;
    std::string dig;
    try {
        cfg = load_config(args);
        if (cfg.system_name != "toda")
            throw InvalidInput("lax: the configured system must be a toda chain");
        dig = config::digest(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const toda::TodaParams& params = cfg.toda.params;
        const int n = params.n;
        Vec q = cfg.toda.q0, p = cfg.toda.p0;
        Vec eps = Vec::Constant(n - 1, cfg.toda.xi0_scale * params.delta0);

        const Mat resid = toda::zero_curvature_matrix(q, p, eps, lambda, params, flip_eps_sign);
        double offdiag = 0.0, diag = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double v = std::abs(resid(i, j));
                if (i == j)
                    diag = std::max(diag, v);
                else
                    offdiag = std::max(offdiag, v);
            }

        const Vec spec0 = toda::symmetric_spectrum(toda::flaschka_lax(q, p));
        Vec q1 = q, p1 = p;
        const double dt = std::min(cfg.integrator.h0, 1e-3);
        toda::reference_flow(q1, p1, &eps, cfg.integrator.t_final, dt, flip_eps_sign);
        const Vec spec1 = toda::symmetric_spectrum(toda::flaschka_lax(q1, p1));
        const double drift = (spec1 - spec0).cwiseAbs().maxCoeff();
        const double eps_crit = toda::epsilon_crit(p, params);

        std::cout << "offdiag_residual=" << io::format_double(offdiag)
                  << " diag_residual=" << io::format_double(diag)
                  << " spectrum_drift=" << io::format_double(drift)
                  << " eps_crit=" << io::format_double(eps_crit) << "\n";

        json doc;
        doc["config_digest"] = dig;
        doc["lambda"] = lambda;
        doc["flip_eps_sign"] = flip_eps_sign;
        doc["offdiag_residual"] = offdiag;
        doc["diag_residual"] = diag;
        doc["spectrum_initial"] = std::vector<double>(spec0.data(), spec0.data() + spec0.size());
        doc["spectrum_final"] = std::vector<double>(spec1.data(), spec1.data() + spec1.size());
        doc["spectrum_drift"] = drift;
        doc["eps_crit"] = eps_crit;
        write_report(cfg.report_path, doc);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

int cmd_validate(const CommonArgs& args, int grid)
{
    config::RunConfig cfg;
    std::string dig;
    systems::SystemBundle sys;
    try {
        cfg = load_config(args);
        if (grid < 1) throw InvalidInput("validate: --grid must be positive");
        dig = config::digest(cfg);
        sys = config::build_system(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const int d2n = sys.spec.base_dim();
        std::vector<BundleState> cloud;
        for (int j = 0; j < grid; ++j) {
            BundleState s;
            s.x = sys.initial.x;
            for (int i = 0; i < d2n; ++i) s.x[i] += 0.3 * std::sin(0.7 * j + 0.4 * i + 0.1);
            validate_spec_at(sys.spec, s.x);

            // sample fibers across radii, deliberately including infeasible
            // ones: the properness checks probe growth, not feasibility
            const double r = (0.2 + 1.3 * (j + 1.0) / grid) * sys.spec.delta(s.x);
            s.xi = Vec::Constant(sys.spec.k, r / std::sqrt(double(sys.spec.k)));
            s.pi = Vec::Zero(sys.spec.k);
            cloud.push_back(s);
        }

        const geometry::PropernessReport rep = geometry::validate_properness(sys.spec, cloud);

        std::cout << "structure_ok=true grid=" << grid << "\n";
        std::cout << "c1_sup_delta=" << io::format_double(rep.c1_sup_delta) << "\n";
        std::cout << "c2_min_quotient="
                  << (rep.c2_samples > 0 ? io::format_double(rep.c2_min_quotient) : "undefined")
                  << " c2_flag=" << (rep.c2_flag ? "true" : "false") << "\n";
        std::cout << "c3_lipschitz="
                  << (rep.c3_available ? io::format_double(rep.c3_lipschitz) : "undefined")
                  << "\n";
        std::cout << "c4b_exponent="
                  << (rep.c4b_available ? io::format_double(rep.c4b_exponent) : "undefined")
                  << "\n";

        json doc;
        doc["config_digest"] = dig;
        doc["system"] = cfg.system_name;
        doc["grid"] = grid;
        doc["structure_ok"] = true;
        doc["c1_sup_delta"] = rep.c1_sup_delta;
        if (rep.c2_samples > 0) doc["c2_min_quotient"] = rep.c2_min_quotient;
        doc["c2_samples"] = rep.c2_samples;
        doc["c2_flag"] = rep.c2_flag;
        if (rep.c3_available) doc["c3_lipschitz"] = rep.c3_lipschitz;
        if (rep.c4b_available) doc["c4b_exponent"] = rep.c4b_exponent;
        doc["samples"] = rep.samples;
        write_report(cfg.report_path, doc);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"constrained Hamiltonian flows on observation bundles"};
    app.require_subcommand(1);

    CommonArgs sim_args, conv_args, cls_args, lax_args, val_args;
    int levels = 4, samples = 100, grid = 5;
    double lambda = 1.0;
    bool flip_eps_sign = false;

    CLI::App* sim = app.add_subcommand("simulate", "integrate the configured system");
    add_common(sim, sim_args, true);

    CLI::App* conv = app.add_subcommand("converge", "fixed-step order study");
    add_common(conv, conv_args, false);
    conv->add_option("--levels", levels, "number of halving levels (>= 3)");

    CLI::App* cls = app.add_subcommand("classify", "Dirac classification of the constraint");
    add_common(cls, cls_args, false);
    cls->add_option("--samples", samples, "surface sample count");

    CLI::App* lax = app.add_subcommand("lax", "zero-curvature and spectrum checks (toda)");
    add_common(lax, lax_args, false);
    lax->add_option("--lambda", lambda, "spectral-noise parameter");
    lax->add_flag("--flip-eps-sign", flip_eps_sign, "flip the sign of the eps evolution law");

    CLI::App* val = app.add_subcommand("validate", "structural and properness checks");
    add_common(val, val_args, false);
    val->add_option("--grid", grid, "base-point grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (sim->parsed()) return cmd_simulate(sim_args);
    if (conv->parsed()) return cmd_converge(conv_args, levels);
    if (cls->parsed()) return cmd_classify(cls_args, samples);
    if (lax->parsed()) return cmd_lax(lax_args, lambda, flip_eps_sign);
    if (val->parsed()) return cmd_validate(val_args, grid);
    return kExitConfig;
}
