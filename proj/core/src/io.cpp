#include "obham/io.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

namespace obham::io {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

uint64_t fnv1a64(std::string_view s)
{
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex16(uint64_t v)
{
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

namespace {

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("io: cannot open " + path + " for writing");
    return out;
}

} // namespace

void write_csv(const std::string& path, const std::string& config_digest,
               const ObservationSystemSpec& spec, const integrate::Trajectory& traj)
{
    if (traj.states.empty()) throw InvalidInput("write_csv: empty trajectory");
    std::ofstream out = open_out(path);

    out << "# config_digest=" << config_digest << "\n";
    out << "t";
    for (int i = 1; i <= spec.base_dim(); ++i) out << ",x" << i;
    for (int a = 1; a <= spec.k; ++a) out << ",xi" << a;
    for (int a = 1; a <= spec.k; ++a) out << ",pi" << a;
    out << ",phi,energy,h_used\n";

    auto row = [&](const BundleState& s, double h_used) {
        out << format_double(s.t);
        const Vec z = s.flat();
        for (int i = 0; i < z.size(); ++i) out << "," << format_double(z[i]);
        out << "," << format_double(spec.phi(s));
        out << "," << format_double(spec.hamiltonian ? spec.hamiltonian.value(s) : 0.0);
        out << "," << format_double(h_used) << "\n";
    };

    row(traj.states.front(), 0.0);
    for (size_t i = 0; i < traj.diag.size(); ++i) row(traj.states[i + 1], traj.diag[i].h_used);
}

void write_jsonl(const std::string& path, const std::string& config_digest,
                 const integrate::Trajectory& traj)
{
    if (traj.states.empty()) throw InvalidInput("write_jsonl: empty trajectory");
    std::ofstream out = open_out(path);

    nlohmann::json meta;
    meta["type"] = "meta";
    meta["config_digest"] = config_digest;
    out << meta.dump() << "\n";

    for (const auto& d : traj.diag) {
        nlohmann::json rec;
        rec["type"] = "step";
        rec["t"] = d.t;
        rec["h_used"] = d.h_used;
        rec["phi_pre"] = d.phi_pre;
        rec["phi"] = d.phi_value;
        rec["energy"] = d.energy;
        rec["eps_geo"] = d.eps_geo;
        rec["projection_iters"] = d.projection_iters;
        rec["clamped"] = d.clamped;
        rec["lambda"] = d.lambda_value;
        rec["class_flag"] = d.class_flag;
        rec["halvings"] = d.halvings;
        out << rec.dump() << "\n";
    }

    const BundleState& last = traj.states.back();
    const Vec z = last.flat();
    nlohmann::json fin;
    fin["type"] = "final";
    fin["t"] = last.t;
    fin["z"] = std::vector<double>(z.data(), z.data() + z.size());
    out << fin.dump() << "\n";
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out = open_out(path);
    out << text;
}

} // namespace obham::io
