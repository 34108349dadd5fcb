// End-to-end checks of the command-line binary and its exit-code contract:
//   0 success, 1 usage, 2 validation, 3 runtime, 4 warm-up unsatisfiable.
#include "ecsim/ledger_io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "ecsim-cli-tests";

std::string scenario(const std::string& name) {
    return std::string(ECSIM_SCENARIO_DIR) + "/" + name;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ECSIM_CLI_PATH) + " " + args +
                            " >/dev/null 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

} // namespace

TEST_CASE("usage errors exit 1; help exits 0") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("no-such-subcommand") == 1);
    CHECK(run_cli("validate") == 1);            // missing required argument
    CHECK(run_cli("simulate --bogus-flag x") == 1);
}

TEST_CASE("validate: clean scenarios pass, broken ones exit 2") {
    CHECK(run_cli("validate " + scenario("minimal.json")) == 0);
    CHECK(run_cli("validate " + scenario("street_corner.json")) == 0);
    CHECK(run_cli("validate /nonexistent/nowhere.json") == 2);

    fs::create_directories(work);
    const fs::path bad = work / "bad.json";
    std::ofstream(bad) << "{\"name\": \"broken\"";
    CHECK(run_cli("validate " + q(bad)) == 2);

    const fs::path invalid = work / "invalid.json";
    std::ofstream(invalid) << "{\"name\": \"x\", \"calendar\": {\"days\": 0}}";
    CHECK(run_cli("validate " + q(invalid)) == 2);
}

TEST_CASE("simulate: writes the full artifact set and honours the seed") {
    fs::create_directories(work);
    const fs::path out1 = work / "sim1";
    const fs::path out2 = work / "sim2";
    const fs::path out3 = work / "sim3";
    fs::remove_all(out1);
    fs::remove_all(out2);
    fs::remove_all(out3);

    REQUIRE(run_cli("simulate " + scenario("minimal.json") + " -o " + q(out1) +
                    " --seed 777") == 0);
    CHECK(fs::exists(out1 / "ledger.tsv"));
    CHECK(fs::exists(out1 / "denials.tsv"));
    CHECK(fs::exists(out1 / "summary.json"));

    REQUIRE(run_cli("simulate " + scenario("minimal.json") + " -o " + q(out2) +
                    " --seed 777") == 0);
    REQUIRE(run_cli("simulate " + scenario("minimal.json") + " -o " + q(out3) +
                    " --seed 778") == 0);

    const auto sha = [](const fs::path& p) {
        return ecsim::sha256_hex_file((p / "ledger.tsv").string());
    };
    CHECK(sha(out1) == sha(out2)); // same seed, same history
    CHECK(sha(out1) != sha(out3)); // the override really takes effect

    CHECK(run_cli("simulate /nonexistent/nowhere.json -o " + q(work / "x")) == 2);
}

TEST_CASE("detect: weekly window evaluates a two-week ledger, monthly cannot") {
    const fs::path sim = work / "sim1"; // produced by the simulate test above
    REQUIRE(fs::exists(sim / "ledger.tsv"));

    const fs::path det = work / "det";
    CHECK(run_cli("detect " + q(sim / "ledger.tsv") +
                  " --system currency --window weekly -o " + q(det)) == 0);
    CHECK(fs::exists(det / "alarm_report.tsv"));

    CHECK(run_cli("detect " + q(sim / "ledger.tsv") +
                  " --system currency --window monthly -o " + q(det)) == 4);
    CHECK(run_cli("detect " + q(sim / "ledger.tsv") +
                  " --system merchant --window weekly --log -o " + q(det)) == 0);

    CHECK(run_cli("detect /nonexistent/ledger.tsv -o " + q(det)) == 3);
}

TEST_CASE("report: renders a summary for a finished ledger") {
    const fs::path sim = work / "sim1";
    REQUIRE(fs::exists(sim / "ledger.tsv"));

    const fs::path rep = work / "rep";
    CHECK(run_cli("report " + q(sim / "ledger.tsv") + " -o " + q(rep) +
                  " --scenario " + scenario("minimal.json")) == 0);
    CHECK(fs::exists(rep / "summary.json"));
}
