#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "dvz/errors.hpp"
#include "dvz/experiment.hpp"
#include "dvz/stats.hpp"
#include "dvz/table.hpp"

using namespace dvz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("dvz_test_experiment_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string random_string(std::mt19937_64& gen)
{
    static const std::vector<std::string> pieces = {"a", "b c", ",", "\"", "1", "2.5", "-3e4", "x,y", "", "nan", "é", " "};
    std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1), len(0, 4);
    std::string s;
    for (std::size_t i = len(gen); i > 0; --i)
        s += pieces[pick(gen)];
    return s;
}

Cell random_cell(std::mt19937_64& gen)
{
    std::uniform_int_distribution<int> kind(0, 2);
    switch (kind(gen)) {
    case 0: return std::uniform_int_distribution<std::int64_t>(-1'000'000'000'000, 1'000'000'000'000)(gen);
    case 1: {
        std::uniform_real_distribution<double> m(-1.0, 1.0);
        std::uniform_int_distribution<int> e(-300, 300);
        return std::ldexp(m(gen), e(gen));
    }
    default: return random_string(gen);
    }
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream(p) << text;
}

ExperimentConfig small(Command cmd, const fs::path& dir, const std::string& stem)
{
    ExperimentConfig c;
    c.command = cmd;
    c.emit = (dir / stem).string();
    c.family = {{"family", "alpha"}, {"alpha", 0.5}};
    c.n = 200;
    c.grid = 1024;
    c.seeds = 3;
    c.mc = 500;
    switch (cmd) {
    case Command::cover: c.emit += ".json"; break;
    case Command::conditions: c.emit += ".json"; c.n = 2000; break;
    case Command::convolve: c.n_list = {10, 100}; c.d = 2; c.emit += ".csv"; break;
    case Command::dimension: c.n = 2000; c.scale_lo = 4; c.scale_hi = 8; c.emit += ".csv"; break;
    default: c.emit += ".csv"; break;
    }
    return c;
}

#ifdef DVZ_CLI_PATH
struct CliResult {
    int status = 0;
    std::string out;
};

CliResult run_cli(const std::string& args)
{
    const std::string cmd = std::string(DVZ_CLI_PATH) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe))
        r.out.append(buf, got);
    const int st = pclose(pipe);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}
#endif

} // namespace

TEST_CASE("format_double")
{
    CHECK(format_double(1.0) == "1.0");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(1e300).find('e') != std::string::npos);
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV examples")
{
    Table t({"name", "k", "x"});
    t.add_row({std::string("plain"), std::int64_t{3}, 0.25});
    t.add_row({std::string("with, comma"), std::int64_t{-7}, 1.0});
    t.add_row({std::string("say \"hi\""), std::int64_t{0}, -1e-300});
    t.add_row({std::string("42"), std::int64_t{1}, 3.0});
    CHECK(to_csv(t).substr(0, 9) == "name,k,x\n");
    CHECK(parse_csv(to_csv(t)) == t);
    CHECK(t.number(1, "k") == -7.0);
    CHECK(t.number(0, "x") == 0.25);
    CHECK_THROWS(t.column("missing"));
    CHECK_THROWS(t.add_row({std::int64_t{1}}));
    CHECK_THROWS(parse_csv(""));
    CHECK_THROWS(to_csv(Table{}));
}

TEST_CASE("property: every table round-trips through CSV")
{
    std::mt19937_64 gen(77);
    std::uniform_int_distribution<int> cols(1, 6), rows(0, 20);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<std::string> header;
        const int c = cols(gen);
        for (int i = 0; i < c; ++i)
            header.push_back("col" + std::to_string(i) + (i % 2 ? ",q" : ""));
        Table t(header);
        for (int r = rows(gen); r > 0; --r) {
            std::vector<Cell> row;
            for (int i = 0; i < c; ++i)
                row.push_back(random_cell(gen));
            t.add_row(row);
        }
        const std::string text = to_csv(t);
        const Table back = parse_csv(text);
        CHECK(back == t);
        CHECK(to_csv(back) == text);
    }
}

TEST_CASE("config validation names the field")
{
    auto message = [](ExperimentConfig c) {
        try {
            c.validate();
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    ExperimentConfig c;
    CHECK(message(c).find("emit") != std::string::npos);
    c.emit = "out.json";
    CHECK(message(c).empty());
    c.grid = 1000;
    CHECK(message(c).find("grid") != std::string::npos);
    c = {};
    c.emit = "out.json";
    c.n = -1;
    CHECK(message(c).find("'n'") != std::string::npos);
    c = {};
    c.emit = "out.json";
    c.seeds = 0;
    CHECK(message(c).find("seeds") != std::string::npos);
    c = {};
    c.emit = "out.json";
    c.command = Command::verify;
    c.check = "bogus";
    CHECK(message(c).find("check") != std::string::npos);
    c = {};
    c.emit = "out.json";
    c.family = {{"family", "alpha"}, {"alpha", -1.0}};
    CHECK_FALSE(message(c).empty());

    CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"nn", 3}}), ValidationError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ValidationError);
    CHECK_THROWS(command_from_string("plot"));
}

TEST_CASE("config JSON round trip preserves the hash")
{
    ExperimentConfig c;
    c.command = Command::verify;
    c.check = "h-product";
    c.eta = 0.05;
    c.t_hat = {0.25};
    c.t_hat_prime = {0.4};
    c.emit = "x.csv";
    const auto back = ExperimentConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(back.hash() == c.hash());
}

TEST_CASE("config hash changes iff a meaningful field changes")
{
    ExperimentConfig base;
    base.command = Command::density;
    base.emit = "a.csv";
    const auto h = base.hash();

    auto same = [&](auto&& edit) {
        ExperimentConfig c = base;
        edit(c);
        return c.hash() == h;
    };
    // output plumbing and fields the command ignores
    CHECK(same([](ExperimentConfig& c) { c.emit = "b.csv"; }));
    CHECK(same([](ExperimentConfig& c) { c.manifest = "m.json"; }));
    CHECK(same([](ExperimentConfig& c) { c.threads = 4; }));
    CHECK(same([](ExperimentConfig& c) { c.delta = 0.05; }));
    CHECK(same([](ExperimentConfig& c) { c.mc = 17; }));
    // the family in an equivalent spelling
    CHECK(same([](ExperimentConfig& c) { c.family = {{"alpha", 0.5}, {"family", "alpha"}}; }));

    CHECK_FALSE(same([](ExperimentConfig& c) { c.n = 999; }));
    CHECK_FALSE(same([](ExperimentConfig& c) { c.grid = 2048; }));
    CHECK_FALSE(same([](ExperimentConfig& c) { c.seed = 2; }));
    CHECK_FALSE(same([](ExperimentConfig& c) { c.family = {{"family", "alpha"}, {"alpha", 0.6}}; }));
    CHECK_FALSE(same([](ExperimentConfig& c) { c.omegas = {0.3}; }));
    CHECK_FALSE(same([](ExperimentConfig& c) { c.command = Command::cover; }));

    // defaults spelled out hash like the defaults
    ExperimentConfig f = base;
    f.command = Command::fourier;
    ExperimentConfig g = f;
    g.k_max = g.grid / 2;
    CHECK(f.hash() == g.hash());
    g.k_max = 64;
    CHECK(f.hash() != g.hash());
}

TEST_CASE("omegas files")
{
    const auto dir = scratch("omegas");
    write_file(dir / "one.json", "[0.3]");
    const auto s = load_omegas_file((dir / "one.json").string());
    REQUIRE(s.omegas.size() == 1);
    CHECK(s.omegas[0].position() == 0.3);
    CHECK(s.synthetic);

    write_file(dir / "empty.json", "[]");
    try {
        load_omegas_file((dir / "empty.json").string());
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("empty sample") != std::string::npos);
    }
    write_file(dir / "big.json", "[0.1, 1.2]");
    try {
        load_omegas_file((dir / "big.json").string());
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("outside [0, 1)") != std::string::npos);
    }
    write_file(dir / "obj.json", "{\"a\": 1}");
    CHECK_THROWS_AS(load_omegas_file((dir / "obj.json").string()), ValidationError);
    write_file(dir / "junk.json", "[0.1,");
    CHECK_THROWS(load_omegas_file((dir / "junk.json").string()));
    CHECK_THROWS_AS(load_omegas_file((dir / "absent.json").string()), IoError);
}

TEST_CASE("cover with a fixture sample gives the single gap")
{
    const auto dir = scratch("cover");
    ExperimentConfig c = small(Command::cover, dir, "arcs");
    c.n = 1;
    c.omegas = {0.3};
    const auto m = run(c);
    const json out = json::parse(read_text_file(c.emit));
    CHECK(out.at("synthetic") == true);
    CHECK(out.at("seed").is_null());
    REQUIRE(out.at("noncovered").size() == 1);
    CHECK(out.at("noncovered")[0].at("start").get<double>() == doctest::Approx(0.8));
    CHECK(out.at("noncovered")[0].at("length").get<double>() == doctest::Approx(0.5));
    CHECK(out.at("measure").get<double>() == doctest::Approx(0.5));
    REQUIRE(m.outputs.size() == 1);
    CHECK(m.outputs[0].checksum == file_checksum(c.emit));
    CHECK(fs::exists(c.emit + ".manifest.json"));
}

TEST_CASE("conditions verdict for the shepp check")
{
    const auto dir = scratch("conditions");
    ExperimentConfig c = small(Command::conditions, dir, "verdicts");
    c.checks = {"shepp"};
    run(c);
    const json out = json::parse(read_text_file(c.emit));
    REQUIRE(out.size() == 1);
    CHECK(out[0].at("kind") == "shepp");
    CHECK(out[0].at("classification") == "violated");
    CHECK(out[0].at("method") == "analytic");
}

TEST_CASE("every command reruns to identical outputs")
{
    const auto dir = scratch("rerun");
    std::vector<ExperimentConfig> configs;
    for (Command cmd : {Command::cover, Command::density, Command::fourier, Command::convolve, Command::kernel,
                        Command::conditions, Command::dimension})
        configs.push_back(small(cmd, dir, to_string(cmd)));
    for (const char* check : {"ln-delta", "jn-cauchy", "h-product", "dominated-bound", "pair-correlation"}) {
        ExperimentConfig c = small(Command::verify, dir, std::string("verify-") + check);
        c.check = check;
        c.family = {{"family", "alpha"}, {"alpha", 0.3}};
        if (c.check == "jn-cauchy")
            c.n_list = {10, 100};
        if (c.check == "h-product") {
            c.n = 20;
            c.eta = 0.05;
            c.t_hat = {0.25};
            c.t_hat_prime = {0.4};
        }
        configs.push_back(c);
    }
    for (const auto& c : configs) {
        CAPTURE(c.emit);
        const auto first = run(c);
        CHECK(first.config_hash == hex64(c.hash()));
        for (const auto& o : first.outputs) {
            CHECK(fs::exists(o.path));
            CHECK(o.checksum == file_checksum(o.path));
            CHECK(o.bytes == fs::file_size(o.path));
        }
        const fs::path other = dir / ("again-" + fs::path(c.emit).stem().string());
        const auto again = rerun_manifest(c.emit + ".manifest.json", other.string());
        CHECK(again.identical());
        CHECK(again.rerun.config_hash == first.config_hash);
        for (const auto& o : first.outputs)
            CHECK(read_text_file(o.path) == read_text_file((other / fs::path(o.path).filename()).string()));
        CHECK(rerun_manifest(c.emit + ".manifest.json").identical());
    }
}

TEST_CASE("every emitted CSV parses back to itself")
{
    const auto dir = scratch("csv");
    for (Command cmd : {Command::density, Command::fourier, Command::convolve, Command::kernel, Command::dimension}) {
        const auto m = run(small(cmd, dir, to_string(cmd)));
        for (const auto& o : m.outputs) {
            if (fs::path(o.path).extension() != ".csv")
                continue;
            const std::string text = read_text_file(o.path);
            CHECK(to_csv(parse_csv(text)) == text);
        }
    }
}

TEST_CASE("rerun detects tampering and missing manifests")
{
    const auto dir = scratch("tamper");
    const auto c = small(Command::kernel, dir, "kernel");
    run(c);
    json m = json::parse(read_text_file(c.emit + ".manifest.json"));
    m["outputs"][0]["checksum"] = "0000000000000000";
    write_text_file((dir / "bad.manifest.json").string(), m.dump());
    CHECK_FALSE(rerun_manifest((dir / "bad.manifest.json").string(), (dir / "out").string()).identical());
    CHECK_THROWS_AS(rerun_manifest((dir / "nope.json").string()), IoError);
}

#ifdef DVZ_CLI_PATH
TEST_CASE("CLI flags override the config file")
{
    const auto dir = scratch("cli");
    ExperimentConfig c = small(Command::cover, dir, "arcs");
    c.n = 50;
    write_file(dir / "cfg.json", c.to_json().dump());

    const auto r = run_cli("cover --config " + (dir / "cfg.json").string() + " --n 7");
    REQUIRE(r.status == 0);
    const json out = json::parse(r.out);
    const json manifest = json::parse(read_text_file(c.emit + ".manifest.json"));
    CHECK(manifest.at("config").at("n") == 7);
    CHECK(manifest.at("config").at("seed") == c.seed);
    CHECK(out.at("config_hash") == manifest.at("config_hash"));
    CHECK(json::parse(read_text_file(c.emit)).at("n") == 7);

    const auto plain = run_cli("cover --config " + (dir / "cfg.json").string());
    REQUIRE(plain.status == 0);
    CHECK(json::parse(read_text_file(c.emit + ".manifest.json")).at("config").at("n") == 50);
}

TEST_CASE("CLI exit codes")
{
    const auto dir = scratch("cli_codes");
    const std::string emit = (dir / "k.csv").string();
    CHECK(run_cli("kernel --alpha 0.5 --n 10 --emit " + emit).status == 0);
    CHECK(run_cli("kernel --alpha -1 --n 10 --emit " + emit).status == 2);
    CHECK(run_cli("cover --alpha 0.5 --n 10 --grid 1000 --emit " + emit).status == 2);
    CHECK(run_cli("verify --check jn-cauchy --d 20 --delta 0.0238 --alpha 0.3 --n 10 --emit " + emit).status == 3);
    CHECK(run_cli("kernel --alpha 0.5 --n 10 --emit /proc/dvz/k.csv").status == 4);
    CHECK(run_cli("rerun " + (dir / "missing.json").string()).status == 4);
}
#endif
