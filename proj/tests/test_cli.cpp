#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wpcn/cli.hpp"
#include "wpcn/table_io.hpp"

using namespace wpcn;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

struct TempFile {
    std::string path;
    explicit TempFile(std::string p) : path(std::move(p)) {}
    ~TempFile() { std::remove(path.c_str()); }
};

cli::RunManifest base_manifest(cli::Command cmd, const std::string& out) {
    cli::RunManifest m;
    m.command = cmd;
    m.output_path = out;
    m.seed = 9;
    m.trials = 40;
    return m;
}

}  // namespace

TEST_CASE("csv escaping follows RFC 4180") {
    Table t;
    t.columns = {"a", "b"};
    t.add_row({"plain", "with,comma"});
    t.add_row({"quote\"inside", "line\nbreak"});
    std::ostringstream os;
    write_csv(t, os);
    const std::string expected =
        "a,b\n"
        "plain,\"with,comma\"\n"
        "\"quote\"\"inside\",\"line\nbreak\"\n";
    CHECK(os.str() == expected);
}

TEST_CASE("forward: deterministic bytes, header, metadata") {
    TempFile f1("cli_fwd_1.csv"), f2("cli_fwd_2.csv");
    auto m = base_manifest(cli::Command::forward, f1.path);
    REQUIRE(cli::run(m) == cli::kExitOk);
    m.output_path = f2.path;
    REQUIRE(cli::run(m) == cli::kExitOk);
    const std::string body = slurp(f1.path);
    CHECK(body == slurp(f2.path));
    CHECK(body.find("# seed = 9") != std::string::npos);
    CHECK(body.find("# version = ") != std::string::npos);
    CHECK(body.find("scenario,method,rw_Mbps_wd1") != std::string::npos);
    // five sub-scenarios, two methods each
    int data_rows = 0;
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] != '#' && line[0] != 's') ++data_rows;
    }
    CHECK(data_rows == 10);
}

TEST_CASE("malformed config exits 2 and leaves no partial output") {
    TempFile cfg("cli_bad_config.json");
    {
        std::ofstream out(cfg.path);
        out << "{\"M\": 4, \"K\": 4}";  // violates M > K
    }
    TempFile out("cli_bad_out.csv");
    auto m = base_manifest(cli::Command::forward, out.path);
    m.config_path = cfg.path;
    CHECK(cli::run(m) == cli::kExitConfig);
    CHECK(!exists(out.path));

    {
        std::ofstream outj(cfg.path);
        outj << "{\"unknown_key\": 1}";
    }
    CHECK(cli::run(m) == cli::kExitConfig);
    {
        std::ofstream outj(cfg.path);
        outj << "not json at all";
    }
    CHECK(cli::run(m) == cli::kExitConfig);
}

TEST_CASE("optimize emits the converged point as JSON") {
    TempFile out("cli_opt.json");
    auto m = base_manifest(cli::Command::optimize, out.path);
    m.format = cli::Format::json;
    REQUIRE(cli::run(m) == cli::kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out.path));
    CHECK(doc["meta"]["seed"] == 9);
    CHECK(doc["meta"]["command"] == "optimize");
    REQUIRE(doc["rows"].size() == 1);
    const auto& row = doc["rows"][0];
    const auto& cols = doc["columns"];
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (cols[i] == name) return row[i];
        }
        FAIL("missing column " << name);
        return row[0];
    };
    CHECK(col("alpha").get<double>() == doctest::Approx(0.0558).epsilon(0.01));
    CHECK(col("beta").get<double>() == doctest::Approx(0.1786).epsilon(0.01));
    CHECK(col("converged").get<bool>());
    CHECK(col("fair_wd1").get<bool>() == false);
    CHECK(col("fair_wd4").get<bool>() == true);
}

TEST_CASE("optimize honors a K=1 config file") {
    TempFile cfg("cli_k1.json");
    {
        std::ofstream out(cfg.path);
        out << R"({"K": 1, "d": [6.0]})";
    }
    TempFile out("cli_k1_out.json");
    auto m = base_manifest(cli::Command::optimize, out.path);
    m.config_path = cfg.path;
    m.format = cli::Format::json;
    REQUIRE(cli::run(m) == cli::kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out.path));
    const auto& row = doc["rows"][0];
    // xi_wd1 is the 8th column for K = 1
    CHECK(doc["columns"][7] == "xi_wd1");
    CHECK(row[7].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("sweep-m: single antenna count gives a single row") {
    TempFile out("cli_sweep.json");
    auto m = base_manifest(cli::Command::sweep_m, out.path);
    m.format = cli::Format::json;
    m.m_list = {16};
    REQUIRE(cli::run(m) == cli::kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out.path));
    REQUIRE(doc["rows"].size() == 1);
    CHECK(doc["rows"][0][0] == 16);

    m.m_list = {3};  // M <= K
    CHECK(cli::run(m) == cli::kExitConfig);
}

TEST_CASE("surface: degenerate grid on a one-WD network is a single row") {
    TempFile cfg("cli_surf_cfg.json");
    {
        std::ofstream out(cfg.path);
        out << R"({"K": 1, "d": [6.0]})";
    }
    TempFile out("cli_surface.json");
    auto m = base_manifest(cli::Command::surface, out.path);
    m.config_path = cfg.path;
    m.format = cli::Format::json;
    m.grid_alpha = 1;
    m.grid_beta = 1;
    REQUIRE(cli::run(m) == cli::kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out.path));
    REQUIRE(doc["rows"].size() == 1);
    CHECK(doc["rows"][0][2] == 1);  // wd column
}

TEST_CASE("surface argmax agrees with the grid oracle on the same grid") {
    TempFile out("cli_surface_grid.json");
    auto m = base_manifest(cli::Command::surface, out.path);
    m.format = cli::Format::json;
    m.grid_alpha = 21;
    m.grid_beta = 20;
    REQUIRE(cli::run(m) == cli::kExitOk);
    const auto doc = nlohmann::json::parse(slurp(out.path));

    // min over WDs per grid point, then argmax in row order
    std::map<std::pair<double, double>, double> min_rate;
    std::vector<std::pair<double, double>> order;
    for (const auto& row : doc["rows"]) {
        const std::pair<double, double> key{row[0].get<double>(), row[1].get<double>()};
        const double rate = row[3].get<double>();
        if (!min_rate.count(key)) order.push_back(key);
        auto it = min_rate.find(key);
        if (it == min_rate.end()) {
            min_rate[key] = rate;
        } else {
            it->second = std::min(it->second, rate);
        }
    }
    std::pair<double, double> best_cell{-1, -1};
    double best = -1.0;
    for (const auto& key : order) {
        if (min_rate[key] > best) {
            best = min_rate[key];
            best_cell = key;
        }
    }
    const auto oracle = opt::grid_oracle(SystemConfig{}, 21, 20);
    CHECK(best_cell.first == doctest::Approx(oracle.alpha).epsilon(1e-12));
    CHECK(best_cell.second == doctest::Approx(oracle.beta).epsilon(1e-12));
}

TEST_CASE("asymptotics and oracle commands emit one row") {
    TempFile out("cli_asym.json");
    auto m = base_manifest(cli::Command::asymptotics, out.path);
    m.format = cli::Format::json;
    REQUIRE(cli::run(m) == cli::kExitOk);
    auto doc = nlohmann::json::parse(slurp(out.path));
    REQUIRE(doc["rows"].size() == 1);
    CHECK(doc["rows"][0][0] == 10);

    TempFile out2("cli_oracle.json");
    auto m2 = base_manifest(cli::Command::oracle, out2.path);
    m2.format = cli::Format::json;
    m2.grid_alpha = 11;
    m2.grid_beta = 10;
    REQUIRE(cli::run(m2) == cli::kExitOk);
    doc = nlohmann::json::parse(slurp(out2.path));
    REQUIRE(doc["rows"].size() == 1);
    CHECK(doc["rows"][0][3] == 11);
    CHECK(doc["rows"][0][4] == 10);
}
