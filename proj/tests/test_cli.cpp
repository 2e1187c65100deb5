#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "heavytail/cli.hpp"
#include "heavytail/errors.hpp"

using namespace heavytail;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "heavytail");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("heavytail_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    os << text;
}

}  // namespace

TEST_CASE("bounds command") {
    auto r = cli({"bounds", "--thm", "lower", "--alpha", "0", "--d", "2", "--nu", "1", "--h", "0.01", "--delta0", "5"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["value"].get<double>() == doctest::Approx(7420.65795512883017106).epsilon(1e-12));
    CHECK(j["citation"] == "three-step-phase-transition");
    CHECK(j["intermediates"].contains("T_lower"));

    r = cli({"bounds", "--thm", "beta-cauchy", "--d", "1", "--nu", "2", "--r", "1"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["value"].get<double>() == doctest::Approx(4.0).epsilon(1e-14));

    auto dir = scratch("bounds");
    write_file(dir / "q.json", R"({"thm": "beta-cauchy", "d": 1, "nu": 2, "r": 0.5})");
    r = cli({"bounds", "--query", (dir / "q.json").string()});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["value"].get<double>() == doctest::Approx(7.0));
    // Flags override the file.
    r = cli({"bounds", "--query", (dir / "q.json").string(), "--r", "1"});
    CHECK(nlohmann::json::parse(r.out)["value"].get<double>() == doctest::Approx(4.0));

    write_file(dir / "bad.json", R"({"thm": "lower", "alpha": )");
    r = cli({"bounds", "--query", (dir / "bad.json").string()});
    CHECK(r.code == 2);
    CHECK(r.out.empty());

    write_file(dir / "typed.json", R"({"thm": "beta-cauchy", "d": 1, "nu": "two", "r": 1})");
    r = cli({"bounds", "--query", (dir / "typed.json").string()});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find("'nu'") != std::string::npos);

    r = cli({"bounds", "--thm", "beta-cauchy", "--d", "1", "--nu", "-1", "--r", "1"});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(cli({"bounds", "--thm", "unknown"}).code == 2);
    CHECK(cli({"bounds", "--thm", "lower", "--delta0", "abc"}).code == 2);

    r = cli({"bounds", "--thm", "step-size", "--family", "gaussian", "--d", "1", "--q", "2", "--eps", "0.1"});
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(r.out)["value"].get<double>() == doctest::Approx(0.90161487140683993863));
}

TEST_CASE("verify command exit codes") {
    auto dir = scratch("verify");
    auto report = (dir / "wpi.json").string();
    auto r = cli({"verify", "wpi", "--family", "gen_cauchy", "--nu", "2", "--report", report});
    CHECK(r.code == 0);
    auto j = nlohmann::json::parse(slurp(report));
    CHECK(j["check"]["n_violations"] == 0);
    CHECK(j["falsification"]["n_violations"].get<int>() > 0);

    auto fpath = (dir / "falsify.json").string();
    r = cli({"verify", "wpi", "--falsify", "--report", fpath});
    CHECK(r.code == 1);
    CHECK(r.err.find(fpath) != std::string::npos);
    CHECK(fs::exists(fpath));

    CHECK(cli({"verify", "converse", "--nu", "3"}).code == 0);
    CHECK(cli({"verify", "weighted", "--alpha", "0.5"}).code == 0);
    CHECK(cli({"verify", "nonsense"}).code == 2);
    CHECK(cli({"verify", "converse", "--family", "gaussian"}).code == 2);
    CHECK(cli({"verify"}).code == 2);
}

TEST_CASE("experiment config") {
    auto c = ExperimentConfig::phase_default();
    CHECK(c.families.size() == 3);
    CHECK_NOTHROW(validate(c));
    auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    auto j = to_json(c);
    j["sigma2_list"] = {4, 4};
    CHECK_THROWS_AS(config_from_json(j), DomainError);
    j = to_json(c);
    j["n_chains"] = 0;
    CHECK_THROWS_AS(config_from_json(j), DomainError);
    j = to_json(c);
    j["h"] = "x";
    CHECK_THROWS_AS(config_from_json(j), DomainError);
}

TEST_CASE("phase transition command") {
    auto dir = scratch("phase");
    write_file(dir / "cfg.json", R"({"spec": {"family": "gaussian", "d": 2}, "sigma2_list": [4, 16, 64],
                                    "n_chains": 400, "n_iters": 5000, "seed": 3})");
    auto run = [&](const std::string& out) {
        return cli({"phase-transition", "--config", (dir / "cfg.json").string(), "--out-dir", (dir / out).string()});
    };
    REQUIRE(run("a").code == 0);
    REQUIRE(run("b").code == 0);
    const auto csv = slurp(dir / "a" / "phase.csv");
    CHECK(csv == slurp(dir / "b" / "phase.csv"));
    CHECK(slurp(dir / "a" / "phase.svg") == slurp(dir / "b" / "phase.svg"));
    CHECK(csv.rfind("family,alpha,nu,d,h,sigma2,delta0_bound,iters_measured,iters_lower_bound,iters_upper_bound\n", 0) ==
          0);

    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int n = 0;
    while (std::getline(lines, line)) {
        ++n;
        CHECK(line.rfind("gaussian,2,,2,0.01,", 0) == 0);
    }
    CHECK(n == 3);
    CHECK(slurp(dir / "a" / "phase.svg").find("<polyline") != std::string::npos);

    // A failing point aborts with nonzero exit but keeps the rows written so far.
    write_file(dir / "cauchy.json", R"({"families": [{"family": "gaussian", "d": 2}, {"family": "gen_cauchy", "d": 2, "nu": 2}],
                                       "sigma2_list": [4], "n_chains": 200, "n_iters": 2000})");
    auto r = cli({"phase-transition", "--config", (dir / "cauchy.json").string(), "--out-dir", (dir / "c").string()});
    CHECK(r.code != 0);
    CHECK(!r.err.empty());
    const auto partial = slurp(dir / "c" / "phase.csv");
    CHECK(partial.find("\ngaussian,") != std::string::npos);
    CHECK(partial.find("gen_cauchy") == std::string::npos);

    write_file(dir / "bad.json", R"({"sigma2_list": [16, 4]})");
    CHECK(cli({"phase-transition", "--config", (dir / "bad.json").string()}).code == 2);
}

TEST_CASE("sample and fp-evolve are deterministic") {
    auto dir = scratch("determinism");
    for (const char* name : {"s1.csv", "s2.csv"}) {
        auto r = cli({"sample", "--family", "sublinear", "--alpha", "0.5", "--d", "2", "--chains", "300", "--iters",
                      "200", "--record-every", "20", "--seed", "9", "--out", (dir / name).string()});
        REQUIRE(r.code == 0);
    }
    const auto s = slurp(dir / "s1.csv");
    CHECK(s == slurp(dir / "s2.csv"));
    CHECK(s.rfind("iter,m2,se,n_chains\n", 0) == 0);

    for (const char* name : {"f1.csv", "f2.csv"})
        REQUIRE(cli({"fp-evolve", "--t-final", "0.5", "--cells", "600", "--out", (dir / name).string()}).code == 0);
    CHECK(slurp(dir / "f1.csv") == slurp(dir / "f2.csv"));
    CHECK(slurp(dir / "f1.csv").rfind("t,R_q,F_q,G_q,mass,m2\n", 0) == 0);

    CHECK(cli({"sample", "--h", "-1", "--out", (dir / "x.csv").string()}).code == 2);
    CHECK(cli({"fp-evolve", "--family", "gen_cauchy", "--d", "2", "--out", (dir / "x.csv").string()}).code == 2);
}
