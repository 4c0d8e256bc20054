#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(BATCHMAC_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = fs::current_path() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("cli exit codes") {
    const auto good = write("cli_good.cfg", "N=2,3\nL=2\ntrials=200\nseed=4\n");
    const auto unknown = write("cli_unknown.cfg", "frobnicate=1\n");
    const auto cw2 = write("cli_cw2.cfg", "N=2\nL=2\ncw=2\n");

    CHECK(run("run --config " + good.string() + " --out cli_out.csv") == 0);
    CHECK(run("profile --config " + good.string()) == 0);
    CHECK(run("run --config " + unknown.string()) == 1);
    CHECK(run("run --config " + cw2.string()) == 1);
    CHECK(run("run --config does-not-exist.cfg") == 2);
    CHECK(run("run --config " + good.string() + " --out /nonexistent-dir/x.csv") == 2);
    CHECK(run("run") == 1);
    CHECK(run("bogus") == 1);
}

TEST_CASE("cli run output") {
    const auto cfg = write("cli_fmt.cfg", "N=2\nL=1\ntrials=100\nformat=json\n");
    REQUIRE(run("run --config " + cfg.string() + " --out cli_fmt.json") == 0);
    CHECK(slurp("cli_fmt.json").front() == '[');
    REQUIRE(run("run --config " + cfg.string() + " --format csv --out cli_fmt.csv") == 0);
    CHECK(slurp("cli_fmt.csv").rfind("N,L,method,S_N,S_N_leibnitz,residual_mass,p50,p90,max,stderr\n", 0) == 0);
}
