#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "stc/cli.hpp"
#include "stc/numfield.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace stc;

namespace {

struct Run {
    int code = -1;
    std::string out, err;
    std::vector<std::string> header, csv;
    nlohmann::ordered_json json;
};

Run run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    const auto brace = r.out.find("\n{");
    std::istringstream lines(r.out.substr(0, brace == std::string::npos ? r.out.size() : brace + 1));
    for (std::string line; std::getline(lines, line);) (line.rfind("# ", 0) == 0 ? r.header : r.csv).push_back(line);
    if (brace != std::string::npos) r.json = nlohmann::ordered_json::parse(r.out.substr(brace + 1));
    return r;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "stc_dmt_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("count reproduces the ball counts and the scaling fit") {
    const auto r = run_cli({"count", "--field", "Q(zeta8)", "--radii", "4:24:4"});
    REQUIRE(r.code == 0);
    REQUIRE(r.csv.size() == 7);
    CHECK(r.csv[0] == "R,count");
    const auto lattice = field_lattice(catalog_field("Q(zeta8)"));
    for (int i = 1; i <= 6; ++i) {
        const double R = 4.0 * i;
        CHECK(r.csv[std::size_t(i)] == std::to_string(int(R)) + "," + std::to_string(count_ball(lattice, R)));
    }
    const double k_hat = r.json["summary"]["k_hat"];
    CHECK(std::abs(k_hat - 4.0) < 0.2);
    CHECK(r.json["summary"].contains("c_hat"));
}

TEST_CASE("header block") {
    const auto r = run_cli({"count", "--alamouti", "--radii", "2,3,4,5", "--budget", "5000"});
    REQUIRE(r.code == 0);
    REQUIRE(r.header.size() == 3);
    CHECK(r.header[0] == std::string("# stc_dmt ") + STC_VERSION);
    CHECK(r.header[2] == "# master_seed: 1");
    const auto config = nlohmann::ordered_json::parse(r.header[1].substr(std::string("# config: ").size()));
    CHECK(config == r.json["config"]);
    CHECK(config["budget"] == 5000);
    CHECK(config["radii"] == "2,3,4,5");
    CHECK(r.json["version"] == STC_VERSION);
    CHECK(r.csv.size() == 5);
}

TEST_CASE("curves endpoints") {
    const auto r = run_cli({"curves", "--n", "2", "--nr", "2", "--K", "2"});
    REQUIRE(r.code == 0);
    CHECK(r.csv[0] == "curve,r,d");
    const auto& s = r.json["summary"];
    std::vector<std::vector<double>> joint, user;
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (it.key().rfind("joint", 0) == 0) joint = it.value().get<std::vector<std::vector<double>>>();
        if (it.key().rfind("per-user", 0) == 0) user = it.value().get<std::vector<std::vector<double>>>();
    }
    REQUIRE(joint.size() >= 2);
    REQUIRE(user.size() >= 2);
    CHECK(joint.front() == std::vector<double>{0, 4});
    CHECK(joint.back() == std::vector<double>{2, 0});
    CHECK(user.front() == std::vector<double>{0, 4});
    CHECK(user.back() == std::vector<double>{1, 0});
}

TEST_CASE("exit codes") {
    CHECK(run_cli({"simulate", "--trials", "0"}).code == 1);
    CHECK(run_cli({"simulate", "--frobnicate"}).code == 1);
    CHECK(run_cli({}).code == 1);
    CHECK(run_cli({"count", "--field", "/nonexistent/field.json"}).code == 1);
    CHECK(run_cli({"count", "--radii", "8:4:1"}).code == 1);
    CHECK(run_cli({"mac", "--K", "3", "--nr", "2", "--trials", "10", "--snr", "10"}).code == 1);
    CHECK(run_cli({"--help"}).code == 0);

    const auto budget = run_cli({"count", "--alamouti", "--radii", "4:10:2", "--budget", "100"});
    CHECK(budget.code == 2);
    CHECK(budget.err.find("budget") != std::string::npos);

    ::setenv("STC_DMT_BUDGET", "100", 1);
    CHECK(run_cli({"units", "--radii", "40"}).code == 2);
    CHECK(run_cli({"count", "--alamouti", "--radii", "4:10:2", "--budget", "100000"}).code == 0);
    ::setenv("STC_DMT_BUDGET", "lots", 1);
    CHECK(run_cli({"count", "--alamouti", "--radii", "1:4:1"}).code == 1);
    ::unsetenv("STC_DMT_BUDGET");

    const auto bad = scratch("broken.json");
    std::ofstream(bad) << "{\"n\": 2, \"mul_tensor\": [";
    const auto malformed = run_cli({"count", "--field", bad.string()});
    CHECK(malformed.code == 1);
    CHECK(malformed.err.find("malformed field spec") != std::string::npos);
}

TEST_CASE("field spec files are accepted") {
    const auto path = scratch("zeta8.json");
    std::ofstream(path) << field_spec_to_json(catalog_field("Q(zeta8)")).dump(2);
    const auto from_file = run_cli({"count", "--field", path.string(), "--radii", "3:12:3"});
    const auto from_id = run_cli({"count", "--field", "Q(zeta8)", "--radii", "3:12:3"});
    REQUIRE(from_file.code == 0);
    CHECK(from_file.csv == from_id.csv);
    CHECK(run_cli({"check", "--field", path.string()}).code == 0);

    auto doc = field_spec_to_json(catalog_field("Q(zeta8)"));
    doc["mul_tensor"][1][2][3] = doc["mul_tensor"][1][2][3].get<int>() + 1;
    const auto broken = scratch("zeta8_broken.json");
    std::ofstream(broken) << doc.dump();
    const auto r = run_cli({"count", "--field", broken.string(), "--radii", "3:12:3"});
    CHECK(r.code == 1);
    CHECK(r.err.find("inconsistent field spec") != std::string::npos);
}

TEST_CASE("check reports every property") {
    const auto r = run_cli({"check"});
    CHECK(r.code == 0);
    REQUIRE(r.csv.size() > 10);
    CHECK(r.csv[0] == "property,pass,detail");
    for (std::size_t i = 1; i < r.csv.size(); ++i) CHECK(r.csv[i].find(",true,") != std::string::npos);
    CHECK(r.json["summary"]["failed"] == 0);
}

TEST_CASE("output files reproduce byte for byte") {
    const auto a = scratch("sim_a"), b = scratch("sim_b");
    const std::vector<std::string> base{"simulate", "--snr", "4:8:2", "--trials", "6000", "--seed", "17"};
    auto with_out = [&](const std::filesystem::path& stem, std::vector<std::string> extra = {}) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        args.push_back("--out");
        args.push_back(stem.string());
        return run_cli(args).code;
    };
    REQUIRE(with_out(a) == 0);
    REQUIRE(with_out(b) == 0);
    CHECK(slurp(a.string() + ".csv") == slurp(b.string() + ".csv"));
    CHECK(slurp(a.string() + ".json") == slurp(b.string() + ".json"));

    // Other worker counts change only the config echo.
    const auto c = scratch("sim_c");
    REQUIRE(with_out(c, {"--workers", "3"}) == 0);
    auto data_rows = [](const std::string& text) {
        std::istringstream in(text);
        std::vector<std::string> rows;
        for (std::string line; std::getline(in, line);)
            if (line.rfind("# ", 0) != 0) rows.push_back(line);
        return rows;
    };
    CHECK(data_rows(slurp(a.string() + ".csv")) == data_rows(slurp(c.string() + ".csv")));
    CHECK(slurp(a.string() + ".csv") != slurp(c.string() + ".csv"));

    const auto csv = slurp(a.string() + ".csv");
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(csv.find("rho_db,code_size,errors,trials,p_e,degenerate\n") != std::string::npos);
}

TEST_CASE("simulation subcommands") {
    const auto sim = run_cli({"simulate", "--code", "Q(zeta8)", "--snr", "6,9", "--trials", "4096"});
    REQUIRE(sim.code == 0);
    CHECK(sim.csv.size() == 3);
    CHECK(sim.json["summary"]["code"] == "Q(zeta8)");

    const auto mac = run_cli({"mac", "--K", "2", "--snr", "6:10:4", "--trials", "2000"});
    REQUIRE(mac.code == 0);
    CHECK(mac.csv[0] == "rho_db,code_size,trials,joint_errors,joint_p_e,user1_errors,user1_p_e,user2_errors,user2_p_e");
    CHECK(mac.json["summary"]["per_user_le_joint"] == true);

    const auto pep = run_cli({"pep", "--snr", "6:12:3", "--trials", "20000"});
    REQUIRE(pep.code == 0);
    CHECK(pep.csv.size() == 4);
    CHECK(pep.json["summary"]["fit"]["d_hat"].get<double>() > 1.5);

    const auto bound = run_cli({"bound", "--snr", "10:40:10"});
    REQUIRE(bound.code == 0);
    CHECK(bound.csv.size() == 5);
    CHECK(bound.json["summary"]["slope_below_one"].get<double>() < -3.5);
}

TEST_CASE("field sums") {
    const auto zeta = run_cli({"zeta", "--field", "Q(i,sqrt5)", "--radii", "3,6", "--nr", "2"});
    REQUIRE(zeta.code == 0);
    CHECK(zeta.json["summary"]["violations"] == 0);

    const auto elem = run_cli({"elemsum", "--radii", "4,8,12", "--nr", "2"});
    REQUIRE(elem.code == 0);
    CHECK(elem.json["summary"]["identity_exact"] == true);
    CHECK(elem.json["summary"]["m_per_radius"].size() == 3);

    const auto units = run_cli({"units", "--radii", "4,8,16"});
    REQUIRE(units.code == 0);
    CHECK(units.csv.size() == 4);
}
