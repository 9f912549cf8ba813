#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out_dir;
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const std::string& tag) {
    RunResult r;
    r.out_dir = (fs::temp_directory_path() / ("mmll_cli_" + tag)).string();
    fs::remove_all(r.out_dir);
    std::string cmd = std::string(MMLL_CLI_PATH) + " --out-dir " + r.out_dir + " " + args +
                      " > " + r.out_dir + ".stdout 2> " + r.out_dir + ".stderr";
    fs::create_directories(r.out_dir);
    int rc = std::system(cmd.c_str());
    r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    return r;
}

}  // namespace

TEST_CASE("cli survival: exact greedy L=4 reports the rational and decimal") {
    auto r = run_cli("survival --algo greedy --delta 2 --model discrete:4", "surv1");
    CHECK(r.exit_code == 0);
    auto report = slurp(fs::path(r.out_dir) / "survival.json");
    CHECK(report.find("\"exact\": \"9/16\"") != std::string::npos);
    CHECK(report.find("0.5625") != std::string::npos);
    CHECK(slurp(fs::path(r.out_dir) / "resolved_config.json").find("\"survival\"") !=
          std::string::npos);
}

TEST_CASE("cli survival: missing table file exits 2 with error json") {
    auto r = run_cli("survival --algo table:/nonexistent/t.mmca", "surv2");
    CHECK(r.exit_code == 2);
    auto err = slurp(fs::path(r.out_dir) / "error.json");
    CHECK(err.find("\"error\"") != std::string::npos);
}

TEST_CASE("cli: fixed seed twice gives byte-identical outputs") {
    auto a = run_cli("--seed 42 survival --algo greedy --delta 3 --model continuous --mode mc "
                     "--trials 20000", "det_a");
    auto b = run_cli("--seed 42 survival --algo greedy --delta 3 --model continuous --mode mc "
                     "--trials 20000", "det_b");
    CHECK(a.exit_code == 0);
    CHECK(slurp(fs::path(a.out_dir) / "survival.json") ==
          slurp(fs::path(b.out_dir) / "survival.json"));
    // and across worker counts
    auto c = run_cli("--seed 42 --workers 4 survival --algo greedy --delta 3 --model continuous "
                     "--mode mc --trials 20000", "det_c");
    CHECK(slurp(fs::path(a.out_dir) / "survival.json") ==
          slurp(fs::path(c.out_dir) / "survival.json"));
}

TEST_CASE("cli eliminate: greedy delta=2 L=2 gives an all-zero g and passing audit") {
    auto r = run_cli("eliminate --algo greedy --delta 2 --model discrete:2", "elim1");
    CHECK(r.exit_code == 0);
    auto summary = slurp(fs::path(r.out_dir) / "eliminate.json");
    CHECK(summary.find("\"all_pass\": true") != std::string::npos);
    auto audit = slurp(fs::path(r.out_dir) / "audit_r1.csv");
    CHECK(audit.find("id,lhs,rhs,method,pass") == 0);
    CHECK(fs::exists(fs::path(r.out_dir) / "g_r0.mmca"));
    // survival of the radius-0 table is 1 (constant zero)
    CHECK(summary.find("\"exact\": \"1/1\"") != std::string::npos);
}

TEST_CASE("cli eliminate: chained from a lifted r=2 table reaches constant zero") {
    auto r = run_cli("eliminate --algo greedy --delta 2 --model discrete:2 --lift 2 --chain",
                     "elim2");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(fs::path(r.out_dir) / "g_r1.mmca"));
    CHECK(fs::exists(fs::path(r.out_dir) / "g_r0.mmca"));
    auto summary = slurp(fs::path(r.out_dir) / "eliminate.json");
    CHECK(summary.find("\"all_pass\": true") != std::string::npos);
}

TEST_CASE("cli eliminate: c5 override outside (0,1] is a validation error") {
    auto r = run_cli("eliminate --algo greedy --delta 2 --model discrete:2 --c5-override 1.5",
                     "elim3");
    CHECK(r.exit_code == 2);
}

TEST_CASE("cli graphgen: writes graph file and certificate") {
    auto r = run_cli("--seed 7 graphgen --n 64 --delta 3 --girth 4 --max-tries 20000", "gen1");
    CHECK(r.exit_code == 0);
    auto text = slurp(fs::path(r.out_dir) / "graph.txt");
    CHECK(text.rfind("mmll-graph v1 n=64 delta=3 simple=1", 0) == 0);
    auto cert = slurp(fs::path(r.out_dir) / "certificate.json");
    CHECK(cert.find("\"regular\": true") != std::string::npos);
    // a larger target where auto picks the repair path
    auto r2 = run_cli("--seed 8 graphgen --n 1000 --delta 4 --girth 5", "gen2");
    CHECK(r2.exit_code == 0);
    auto cert2 = slurp(fs::path(r2.out_dir) / "certificate.json");
    CHECK(cert2.find("\"girth\": 5") != std::string::npos);
}

TEST_CASE("cli verify: 6/6 exact at (3,1,L=2)") {
    auto r = run_cli("verify --delta 3 --radius 1 --model discrete:2", "ver1");
    CHECK(r.exit_code == 0);
    auto eq = slurp(fs::path(r.out_dir) / "equivalences.json");
    CHECK(eq.find("\"pass\": false") == std::string::npos);
}

TEST_CASE("cli simulate: row count and summary") {
    auto gen = run_cli("--seed 9 graphgen --n 60 --delta 3 --girth 6 --max-tries 200000", "sim_gen");
    REQUIRE(gen.exit_code == 0);
    auto r = run_cli("--seed 3 simulate --graph " + (fs::path(gen.out_dir) / "graph.txt").string() +
                         " --algo greedy --model continuous --trials 100",
                     "sim1");
    CHECK(r.exit_code == 0);
    auto csv = slurp(fs::path(r.out_dir) / "outcomes.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);  // header + 100 rows
    CHECK(slurp(fs::path(r.out_dir) / "summary.json").find("mean_unmatched_fraction") !=
          std::string::npos);
}

TEST_CASE("cli pmf: exact values at n=4") {
    auto r = run_cli("pmf --n 4 --k 2 --format csv", "pmf1");
    CHECK(r.exit_code == 0);
    auto csv = slurp(fs::path(r.out_dir) / "pmf.csv");
    CHECK(csv.find("0,0.66") != std::string::npos);
    CHECK(csv.find("2/3") != std::string::npos);
    CHECK(csv.find("1/3") != std::string::npos);
}

TEST_CASE("cli config file: flags win over config values") {
    auto dir = fs::temp_directory_path() / "mmll_cli_cfg";
    fs::create_directories(dir);
    std::ofstream cfg(dir / "config.json");
    cfg << R"({"seed": 5, "survival": {"algo": "greedy", "delta": 2, "model": "discrete:2"}})";
    cfg.close();
    // config supplies the model; the flag overrides delta
    auto r = run_cli("--config " + (dir / "config.json").string() +
                         " survival --delta 3 --model discrete:2",
                     "cfg1");
    CHECK(r.exit_code == 0);
    auto resolved = slurp(fs::path(r.out_dir) / "resolved_config.json");
    CHECK(resolved.find("\"delta\": 3") != std::string::npos);
    CHECK(resolved.find("\"seed\": 5") != std::string::npos);
    auto report = slurp(fs::path(r.out_dir) / "survival.json");
    CHECK(report.find("\"exact\": \"29/32\"") != std::string::npos);
}

TEST_CASE("cli: capacity overflow exits 3 with the exact count") {
    auto r = run_cli("--budget 1000 survival --algo greedy --delta 3 --model discrete:3", "cap1");
    CHECK(r.exit_code == 3);
    auto err = slurp(fs::path(r.out_dir) / "error.json");
    CHECK(err.find("capacity") != std::string::npos);
    CHECK(err.find("exact_count") != std::string::npos);
}

TEST_CASE("cli simulate --trace-views logs binary flower views") {
    auto gen = run_cli("--seed 11 graphgen --n 40 --delta 3 --girth 5 --max-tries 400000",
                       "trace_gen");
    REQUIRE(gen.exit_code == 0);
    auto r = run_cli("--seed 4 simulate --graph " + (fs::path(gen.out_dir) / "graph.txt").string() +
                         " --algo greedy --model continuous --trials 5 --trace-views",
                     "trace1");
    CHECK(r.exit_code == 0);
    auto views = slurp(fs::path(r.out_dir) / "views.bin");
    CHECK(views.size() >= 16);
    CHECK(views.substr(0, 4) == "MMLL");
    auto cert = slurp(fs::path(gen.out_dir) / "certificate.json");
    CHECK(cert.find("subgraph_checks") != std::string::npos);
}

TEST_CASE("MMLL_BUDGET environment variable caps enumeration") {
    auto dir = (fs::temp_directory_path() / "mmll_cli_env").string();
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::string cmd = std::string("MMLL_BUDGET=1000 ") + MMLL_CLI_PATH + " --out-dir " + dir +
                      " survival --algo greedy --delta 3 --model discrete:3 > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(rc) == 3);
}

TEST_CASE("cli eliminate emits intermediate artifacts") {
    auto r = run_cli("eliminate --algo greedy --delta 2 --model discrete:4", "artifacts");
    CHECK(r.exit_code == 0);
    auto arts = slurp(fs::path(r.out_dir) / "artifacts_r1.json");
    CHECK(arts.find("good_bitmap") != std::string::npos);
    CHECK(arts.find("i_max") != std::string::npos);
}
