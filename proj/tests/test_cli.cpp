#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "fremond/cli.hpp"
#include "fremond/harness.hpp"
#include "support.hpp"

using namespace fremond;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = fs::path(FREMOND_SOURCE_DIR) / "presets";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.is_regular_file())
            out[fs::relative(entry.path(), root).string()] = testing::slurp(entry.path());
    return out;
}

std::string preset(const std::string& name) { return (kPresets / name).string(); }

} // namespace

TEST_CASE("usage and verbs")
{
    Result r = invoke({"frobnicate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("unknown verb") != std::string::npos);
    CHECK(r.err.find("usage: fremond") != std::string::npos);

    CHECK(invoke({}).code == 2);
    r = invoke({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("weakstrong") != std::string::npos);
    CHECK(invoke({"simulate", "--help"}).code == 0);
    CHECK(invoke({"check"}).code == 2);
    CHECK(invoke({"relenergy", "a"}).code == 2);
    CHECK(invoke({"simulate", "--config", "/no/such/file.cfg"}).code == 2);
    CHECK(invoke({"check", "x", "--config", preset("steady.cfg")}).code == 2);
}

TEST_CASE("simulate matches the library output byte for byte")
{
    const fs::path dir = testing::scratch_dir("cli_sim");
    const std::vector<std::string> ov{"run.t_end=0.01"};
    const Result r = invoke({"simulate", "--config", preset("random.cfg"), "--override", ov[0], "--out",
                             (dir / "cli").string()});
    REQUIRE(r.code == 0);
    simulate_run(load_config(preset("random.cfg"), ov), dir / "api");
    const auto a = tree(dir / "cli"), b = tree(dir / "api");
    CHECK(a.size() == 24);
    CHECK(a == b);

    // check: same CSVs as the library
    REQUIRE(invoke({"check", (dir / "cli").string(), "--out", (dir / "check_cli").string()}).code == 0);
    const LoadedTrajectory lt = load_trajectory(dir / "api");
    write_thermo_csvs(dir / "check_api", thermo_suite(lt.trajectory, lt.config));
    CHECK(tree(dir / "check_cli") == tree(dir / "check_api"));
    CHECK(tree(dir / "check_cli").count("entropy_cosine.csv") == 1);
    fs::remove_all(dir);
}

TEST_CASE("steady preset stays put")
{
    const fs::path dir = testing::scratch_dir("cli_steady");
    REQUIRE(invoke({"simulate", "--config", preset("steady.cfg"), "--out", (dir / "s").string()}).code == 0);
    const LoadedTrajectory lt = load_trajectory(dir / "s");
    REQUIRE(lt.trajectory.size() == 101);
    const State& a = lt.trajectory.front();
    const State& b = lt.trajectory.back();
    for (std::size_t k = 0; k < a.theta.size(); ++k) {
        CHECK(std::abs(a.theta[k] - b.theta[k]) < 1e-12);
        CHECK(std::abs(a.phi[k] - b.phi[k]) < 1e-12);
    }
    CHECK(invoke({"check", (dir / "s").string(), "--out", (dir / "c").string()}).code == 0);
    fs::remove_all(dir);
}

TEST_CASE("check reports a negative temperature")
{
    const fs::path dir = testing::scratch_dir("cli_neg");
    REQUIRE(invoke({"simulate", "--config", preset("cosine.cfg"), "--override", "grid.n=[16]", "--override",
                    "run.t_end=0.01", "--out", (dir / "s").string()})
                .code == 0);
    const CsvData index = load_csv(dir / "s" / "index.csv");
    const fs::path victim = dir / "s" / index.rows[4][index.column("file")];
    State s = load_state(victim);
    s.theta[3] = -0.25;
    save_state(victim, s);
    const Result r = invoke({"check", (dir / "s").string(), "--out", (dir / "c").string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("NonpositiveTemperature at step 4") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("relenergy matches the library")
{
    const fs::path dir = testing::scratch_dir("cli_rel");
    const std::string base = preset("cosine.cfg");
    REQUIRE(invoke({"simulate", "--config", base, "--override", "grid.n=[16]", "--override", "run.t_end=0.02",
                    "--out", (dir / "ref").string()})
                .code == 0);
    REQUIRE(invoke({"simulate", "--config", base, "--override", "grid.n=[16]", "--override", "run.t_end=0.02",
                    "--override", "initial.phi_amp=0.55", "--out", (dir / "run").string()})
                .code == 0);
    const Result r =
        invoke({"relenergy", (dir / "run").string(), (dir / "ref").string(), "--out", (dir / "rel").string()});
    CHECK(r.code == 0);
    const LoadedTrajectory run = load_trajectory(dir / "run"), ref = load_trajectory(dir / "ref");
    const RelEnergySuite suite = relenergy_suite(run.trajectory, ref.trajectory, run.config);
    CHECK(testing::slurp(dir / "rel" / "relenergy.csv") == relenergy_csv(suite.gronwall).str());
    CHECK(testing::slurp(dir / "rel" / "relenergy.csv").rfind("# multiplier=", 0) == 0);

    REQUIRE(invoke({"simulate", "--config", base, "--override", "grid.n=[20]", "--override", "run.t_end=0.02",
                    "--out", (dir / "other").string()})
                .code == 0);
    CHECK(invoke({"relenergy", (dir / "run").string(), (dir / "other").string(), "--out", (dir / "x").string()})
              .code == 2);

    const Result p = invoke({"plot", (dir / "rel").string(), "--out", (dir / "svg").string()});
    CHECK(p.code == 0);
    CHECK(fs::exists(dir / "svg" / "relenergy.svg"));
    CHECK(invoke({"plot", (dir / "missing").string(), "--out", (dir / "svg2").string()}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("experiment verbs print their summaries")
{
    const fs::path dir = testing::scratch_dir("cli_exp");
    const Result r = invoke({"sweep", "--override", "grid.n=[16]", "--override", "run.t_end=0.02", "--out",
                             (dir / "sweep").string()});
    CHECK(r.code == 0);
    CHECK(r.out.rfind(testing::slurp(dir / "sweep" / "summary.csv"), 0) == 0);
    CHECK(fs::exists(dir / "sweep" / "manifest.txt"));

    const Result f = invoke({"refine", "--config", preset("refine_manufactured.cfg"), "--override",
                             "experiment.levels=[16, 32, 64]", "--out", (dir / "refine").string()});
    CHECK(f.code == 0);
    CHECK(f.out.find("refine: pass") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("output directory defaults to FREMOND_OUTDIR")
{
    const fs::path dir = testing::scratch_dir("cli_env");
    ::setenv("FREMOND_OUTDIR", dir.c_str(), 1);
    const Result r = invoke({"simulate", "--config", preset("steady.cfg"), "--override", "run.t_end=0.002"});
    ::unsetenv("FREMOND_OUTDIR");
    CHECK(r.code == 0);
    CHECK(fs::exists(dir / "simulate" / "manifest.txt"));
    fs::remove_all(dir);
}

TEST_CASE("exit codes for bad input and solver failure")
{
    const fs::path dir = testing::scratch_dir("cli_codes");
    CHECK(invoke({"simulate", "--override", "scheme.nonsense=1", "--out", dir.string()}).code == 2);
    CHECK(invoke({"simulate", "--override", "scheme.dt=0.3", "--out", dir.string()}).code == 2);
    CHECK(invoke({"check", (dir / "nothing").string(), "--out", dir.string()}).code == 2);
    const Result r = invoke({"simulate", "--config", preset("cosine.cfg"), "--override", "scheme.newton_max_iter=1",
                             "--override", "grid.n=[16]", "--out", (dir / "s").string()});
    CHECK(r.code == 3);
    CHECK(r.err.find("solver error at step 1") != std::string::npos);
    fs::remove_all(dir);
}
