// dvz: command-line front end for the covering experiments.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvz/errors.hpp"
#include "dvz/experiment.hpp"

using nlohmann::json;

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> family;
    std::optional<double> alpha, c, beta, a, ratio;
    std::optional<std::string> lengths_file, omegas_file;
    std::optional<std::int64_t> n, grid, k_max, seeds, mc;
    std::optional<std::uint64_t> seed, mc_seed;
    std::optional<int> d, band_lo, threads;
    std::optional<double> delta, eta, anchor;
    std::optional<std::string> n_list, delta_list, check, scales, t_hat, t_hat_prime;
    std::optional<std::string> emit, manifest;
};

template <class T>
std::vector<T> split_list(const std::string& s, const char* what)
{
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::istringstream is(item);
        T v{};
        if (!(is >> v) || !(is >> std::ws).eof())
            throw dvz::ValidationError(std::string(what) + ": cannot parse '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw dvz::ValidationError(std::string(what) + ": empty list");
    return out;
}

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config, "JSON config file; flags override it");
    sub->add_option("--family", f.family, "alpha | power | geometric | explicit");
    sub->add_option("--alpha", f.alpha, "l_n = alpha/n");
    sub->add_option("--c", f.c, "l_n = c n^-beta");
    sub->add_option("--beta", f.beta);
    sub->add_option("--a", f.a, "l_n = a ratio^n");
    sub->add_option("--ratio", f.ratio);
    sub->add_option("--lengths-file", f.lengths_file, "JSON list of explicit lengths");
    sub->add_option("--omegas-file", f.omegas_file, "JSON list of fixed omegas in [0,1)");
    sub->add_option("--n", f.n, "truncation level / number of intervals");
    sub->add_option("--n-list", f.n_list, "comma-separated levels");
    sub->add_option("--grid", f.grid, "grid resolution G (power of two)");
    sub->add_option("--kmax", f.k_max, "largest Fourier index");
    sub->add_option("--band-lo", f.band_lo, "first dyadic band exponent");
    sub->add_option("--d", f.d, "convolution order");
    sub->add_option("--delta", f.delta);
    sub->add_option("--delta-list", f.delta_list, "comma-separated delta ladder");
    sub->add_option("--eta", f.eta);
    sub->add_option("--seed", f.seed, "base seed");
    sub->add_option("--seeds", f.seeds, "number of seeds");
    sub->add_option("--mc", f.mc, "Monte Carlo size");
    sub->add_option("--mc-seed", f.mc_seed);
    sub->add_option("--check", f.check, "conditions: comma list of A,B,shepp,eq3; verify: one check");
    sub->add_option("--scales", f.scales, "lo:hi, boxes 2^-lo .. 2^-hi");
    sub->add_option("--anchor", f.anchor, "box grid origin");
    sub->add_option("--t-hat", f.t_hat, "comma-separated tuple");
    sub->add_option("--t-hat-prime", f.t_hat_prime, "comma-separated tuple");
    sub->add_option("--emit", f.emit, "output file");
    sub->add_option("--manifest", f.manifest, "manifest path (default <emit>.manifest.json)");
    sub->add_option("--threads", f.threads, "worker threads (default $DVZ_THREADS or all cores)");
}

json family_json(const Flags& f, const json& base)
{
    const bool any = f.family || f.alpha || f.c || f.beta || f.a || f.ratio || f.lengths_file;
    if (!any)
        return base;
    std::string name;
    if (f.family)
        name = *f.family;
    else if (f.lengths_file)
        name = "explicit";
    else if (f.alpha)
        name = "alpha";
    else if (f.c || f.beta)
        name = "power";
    else if (f.a || f.ratio)
        name = "geometric";
    json j = base.value("family", std::string()) == name ? base : json{{"family", name}};
    j["family"] = name;
    auto put = [&](const char* key, const std::optional<double>& v) {
        if (v)
            j[key] = *v;
    };
    put("alpha", f.alpha);
    put("c", f.c);
    put("beta", f.beta);
    put("a", f.a);
    put("ratio", f.ratio);
    if (f.lengths_file) {
        try {
            j["values"] = json::parse(dvz::read_text_file(*f.lengths_file));
        } catch (const json::parse_error& e) {
            throw dvz::ValidationError("lengths file: " + std::string(e.what()));
        }
    }
    return j;
}

dvz::ExperimentConfig build_config(const std::string& command, const Flags& f)
{
    json j = json::object();
    if (f.config) {
        try {
            j = json::parse(dvz::read_text_file(*f.config));
        } catch (const json::parse_error& e) {
            throw dvz::ValidationError("config file: " + std::string(e.what()));
        }
    }
    j["command"] = command;
    auto base_family = j.contains("family") ? j["family"] : json{{"family", "alpha"}, {"alpha", 0.5}};
    j["family"] = family_json(f, base_family);

    auto put = [&](const char* key, const auto& v) {
        if (v)
            j[key] = *v;
    };
    put("n", f.n);
    put("grid", f.grid);
    put("k_max", f.k_max);
    put("band_lo", f.band_lo);
    put("d", f.d);
    put("delta", f.delta);
    put("eta", f.eta);
    put("seed", f.seed);
    put("seeds", f.seeds);
    put("mc", f.mc);
    put("mc_seed", f.mc_seed);
    put("anchor", f.anchor);
    put("emit", f.emit);
    put("manifest", f.manifest);
    put("threads", f.threads);
    if (f.n_list)
        j["n_list"] = split_list<std::int64_t>(*f.n_list, "--n-list");
    if (f.delta_list)
        j["delta_list"] = split_list<double>(*f.delta_list, "--delta-list");
    if (f.t_hat)
        j["t_hat"] = split_list<double>(*f.t_hat, "--t-hat");
    if (f.t_hat_prime)
        j["t_hat_prime"] = split_list<double>(*f.t_hat_prime, "--t-hat-prime");
    if (f.check) {
        if (command == "conditions")
            j["checks"] = split_list<std::string>(*f.check, "--check");
        else
            j["check"] = *f.check;
    }
    if (f.scales) {
        const auto colon = f.scales->find(':');
        if (colon == std::string::npos)
            throw dvz::ValidationError("--scales: expected lo:hi");
        try {
            j["scale_lo"] = std::stoi(f.scales->substr(0, colon));
            j["scale_hi"] = std::stoi(f.scales->substr(colon + 1));
        } catch (const std::exception&) {
            throw dvz::ValidationError("--scales: expected integers lo:hi");
        }
    }
    if (f.omegas_file) {
        const auto sample = dvz::load_omegas_file(*f.omegas_file);
        json w = json::array();
        for (auto p : sample.omegas)
            w.push_back(p.position());
        j["omegas"] = w;
    }
    return dvz::ExperimentConfig::from_json(j);
}

void apply_threads(int threads)
{
    if (threads > 0)
        setenv("DVZ_THREADS", std::to_string(threads).c_str(), 1);
}

void report(const dvz::RunManifest& m)
{
    json out = {{"config_hash", m.config_hash}, {"summary", m.summary}};
    json files = json::array();
    for (const auto& o : m.outputs)
        files.push_back(o.path);
    out["outputs"] = files;
    std::cout << out.dump(2) << "\n";
}

int run_main(int argc, char** argv)
{
    CLI::App app{"Random covering of the circle: simulation and verification"};
    app.set_version_flag("--version", std::string(DVZ_VERSION));
    app.require_subcommand(1);

    Flags flags;
    const char* commands[][2] = {
        {"cover", "non-covered set E_n as JSON arcs"},
        {"density", "grid density M_n as CSV plus a JSON header"},
        {"fourier", "Fourier band maxima over seeds"},
        {"convolve", "L2 norm of the d-fold self-convolution across levels"},
        {"kernel", "K(t) and K_n(t) on a log grid"},
        {"conditions", "classify conditions A, B, Shepp and the integrability condition"},
        {"dimension", "box-counting dimension of E_N"},
        {"verify", "moment and product checks"},
    };
    for (auto& [name, help] : commands)
        add_common(app.add_subcommand(name, help), flags);

    std::string manifest_path;
    std::optional<std::string> out_dir;
    auto* rerun = app.add_subcommand("rerun", "re-execute a manifest and compare checksums");
    rerun->add_option("manifest", manifest_path, "manifest JSON")->required();
    rerun->add_option("--out-dir", out_dir, "write outputs here instead of the original paths");
    std::optional<int> rerun_threads;
    rerun->add_option("--threads", rerun_threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (rerun->parsed()) {
        apply_threads(rerun_threads.value_or(0));
        const auto r = dvz::rerun_manifest(manifest_path, out_dir);
        report(r.rerun);
        if (!r.identical()) {
            for (const auto& p : r.mismatched)
                std::cerr << "checksum mismatch: " << p << "\n";
            return 3;
        }
        std::cerr << "rerun identical\n";
        return 0;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    const auto config = build_config(command, flags);
    apply_threads(config.threads);
    report(dvz::run(config));
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run_main(argc, argv);
    } catch (const dvz::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const dvz::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const dvz::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
