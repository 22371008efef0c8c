#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "fremond/config.hpp"
#include "fremond/errors.hpp"
#include "fremond/initial.hpp"
#include "fremond/io.hpp"
#include "support.hpp"

using namespace fremond;
namespace fs = std::filesystem;

namespace {

const fs::path kPresets = fs::path(FREMOND_SOURCE_DIR) / "presets";

RunConfig from_text(const std::string& text) { return build_config(ConfigDocument::parse(text)); }

void check_same_fields(const Field& a, const Field& b)
{
    REQUIRE(a.grid() == b.grid());
    for (std::size_t k = 0; k < a.size(); ++k)
        CHECK(a[k] == b[k]);
}

} // namespace

TEST_CASE("config grammar")
{
    const ConfigDocument doc = ConfigDocument::parse(R"(
# leading comment
[grid]
dim = 2          # trailing comment
n = [8, 12]
extent = [1, 2.5]

[initial]
preset = "random_smooth"
theta_file = "a # b.field"

[scheme]
freeze_phase = true
)");
    CHECK(doc.get_int("grid.dim", 1) == 2);
    CHECK(doc.get_list("grid.n", {}) == std::vector<double>{8, 12});
    CHECK(doc.get_string("initial.preset", "") == "random_smooth");
    CHECK(doc.get_string("initial.theta_file", "") == "a # b.field");
    CHECK(doc.get_bool("scheme.freeze_phase", false));
    CHECK(doc.get_double("scheme.kappa", 7.0) == 7.0);

    CHECK_THROWS_AS(ConfigDocument::parse("dim = 2\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[grid\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[]\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[grid]\ndim\n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[grid]\ndim = \n"), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[grid]\ndim = two\n").get_int("grid.dim", 1), ConfigError);
    CHECK_THROWS_AS(ConfigDocument::parse("[a]\nb = maybe\n").get_bool("a.b", false), ConfigError);
}

TEST_CASE("build_config validates and rejects unknown keys")
{
    const RunConfig c = from_text("[grid]\nn = [32]\n[run]\nt_end = 0.5\n");
    CHECK(c.grid.n == std::vector<std::size_t>{32});
    CHECK(c.t_end == 0.5);
    CHECK(c.scheme.epsilon == 1e-3);
    CHECK(c.potential.is_double_well());

    CHECK_THROWS_AS(from_text("[grid]\nnn = [32]\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[grid]\ndim = 3\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[grid]\ndim = 2\nn = [8, 8, 8]\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[scheme]\ndt = 1e-3\ndt_over_h2 = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[scheme]\np = 3\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[potential]\nlambda = 1\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[potential]\npotential = [0, 1, 0, 0, 1]\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[potential]\npotential = quartic\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[initial]\npreset = spiral\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[checks]\ntest_functions = [\"sine\"]\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[experiment]\nperturb = psi\n"), ConfigError);
    CHECK_THROWS_AS(from_text("[experiment]\nsnapshot_every = -1\n"), ConfigError);

    const RunConfig q = from_text("[potential]\npotential = [0, 0, 0, 0, 1]\nlambda = 0\n");
    CHECK(q.potential.degree() == 4);
}

TEST_CASE("dt_over_h2 is shrunk to divide the run")
{
    const RunConfig c = from_text("[grid]\nn = [64]\n[scheme]\ndt_over_h2 = 0.1\n[run]\nt_end = 0.1\n");
    const double target = 0.1 / (64.0 * 64.0);
    CHECK(c.scheme.dt <= target);
    CHECK(c.scheme.dt > target * (1 - 1e-3));
    CHECK_NOTHROW(step_count(c.t0, c.t_end, c.scheme.dt));

    const RunConfig l = at_level(c, 128, 0.5);
    CHECK(l.grid.n == std::vector<std::size_t>{128});
    CHECK(l.scheme.dt <= 0.5 / (128.0 * 128.0));
    CHECK_NOTHROW(step_count(l.t0, l.t_end, l.scheme.dt));
}

TEST_CASE("overrides")
{
    ConfigDocument doc = ConfigDocument::parse("[grid]\nn = [16]\n");
    doc.apply_override("grid.n=[32]");
    doc.apply_override("scheme.epsilon = 0.01");
    const RunConfig c = build_config(doc);
    CHECK(c.grid.n == std::vector<std::size_t>{32});
    CHECK(c.scheme.epsilon == 0.01);
    CHECK_THROWS_AS(doc.apply_override("epsilon=1"), ConfigError);
    CHECK_THROWS_AS(doc.apply_override("scheme.epsilon"), ConfigError);

    ConfigDocument typo = ConfigDocument::parse("");
    typo.apply_override("scheme.epsilom=1");
    CHECK_THROWS_AS(build_config(typo), ConfigError);
}

TEST_CASE("render round-trips")
{
    for (const auto& entry : fs::directory_iterator(kPresets)) {
        CAPTURE(entry.path().string());
        const RunConfig a = load_config(entry.path().string());
        const std::string text = render_config(a);
        const RunConfig b = build_config(ConfigDocument::parse(text));
        CHECK(render_config(b) == text);
        CHECK(b.scheme.dt == a.scheme.dt);
        CHECK(b.grid.n == a.grid.n);
        CHECK(b.potential.describe() == a.potential.describe());
    }
    RunConfig odd = from_text("[potential]\npotential = [0.25, 0, -1, 0, 0.5]\nlambda = 5\n[scheme]\nkappa = 0.1\n");
    CHECK(render_config(build_config(ConfigDocument::parse(render_config(odd)))) == render_config(odd));
}

TEST_CASE("every preset builds an admissible initial state")
{
    for (const auto& entry : fs::directory_iterator(kPresets)) {
        CAPTURE(entry.path().string());
        const RunConfig c = load_config(entry.path().string());
        const State s = build_initial_state(c);
        CHECK_NOTHROW(validate_state(s));
        CHECK(s.theta.grid() == c.grid.make());
        CHECK(s.t == c.t0);
    }
}

TEST_CASE("initial presets")
{
    RunConfig c = from_text("[grid]\nn = [40]\n[initial]\npreset = random_smooth\nseed = 9\n");
    const State a = build_initial_state(c);
    const State b = build_initial_state(c);
    check_same_fields(a.theta, b.theta);
    check_same_fields(a.phi, b.phi);
    const Field r = random_smooth_field(Grid::box(10, 10), 3, 4);
    CHECK(std::max(std::abs(r.min()), std::abs(r.max())) <= 1.0 + 1e-15);
    c.initial.seed = 10;
    CHECK(build_initial_state(c).theta[5] != a.theta[5]);

    const State st = build_initial_state(from_text("[initial]\npreset = steady\nphi_star = 1.2\n"));
    CHECK(st.phi.min() == 1.2);
    CHECK(st.theta.min() == doctest::Approx(Potential::double_well().eval(1.2, 1)));

    const State eq = build_initial_state(from_text("[initial]\npreset = uniform\ntheta_mean = 2\nphi_mean = 0.5\nphi_t0 = equation\n"));
    CHECK(eq.phi_t[0] == doctest::Approx(2.0 - Potential::double_well().eval(0.5, 1)));

    CHECK_THROWS_AS(build_initial_state(from_text("[initial]\ntheta_mean = 0.2\ntheta_amp = 0.5\n")), NonpositiveTemperature);

    const Field bump = gaussian_bump(Grid::line(100), 0.25, 0.2);
    CHECK(bump.max() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(bump[24] == doctest::Approx(std::exp(-std::pow(0.005 / 0.2, 2))));
}

TEST_CASE("file preset")
{
    const fs::path dir = testing::scratch_dir("filepreset");
    const Grid g = Grid::line(12);
    const Field th = Field::sample(g, [](double x, double) { return 1 + x; });
    const Field ph = Field::sample(g, [](double x, double) { return x * x; });
    save_field(dir / "theta.field", th, 0.0);
    save_field(dir / "phi.field", ph, 0.0);
    const RunConfig c = from_text("[grid]\nn = [12]\n[initial]\npreset = file\ntheta_file = \"" +
                                  (dir / "theta.field").string() + "\"\nphi_file = \"" + (dir / "phi.field").string() +
                                  "\"\n");
    const State s = build_initial_state(c);
    check_same_fields(s.theta, th);
    check_same_fields(s.phi, ph);

    const RunConfig wrong = from_text("[grid]\nn = [13]\n[initial]\npreset = file\ntheta_file = \"" +
                                      (dir / "theta.field").string() + "\"\nphi_file = \"" +
                                      (dir / "phi.field").string() + "\"\n");
    CHECK_THROWS_AS(build_initial_state(wrong), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("field and state files round-trip exactly")
{
    testing::Rng rng(71);
    const fs::path dir = testing::scratch_dir("roundtrip");
    for (const Grid& g : {Grid::line(17, 0.3), Grid::box(5, 9, 2.0, 1.0 / 3.0)}) {
        const State s{1.0 / 3.0, testing::random_field(g, rng, 0.1, 2), testing::random_field(g, rng, -1e-300, 1e300),
                      testing::random_field(g, rng, -1, 1)};
        save_state(dir / "s.state", s);
        const State back = load_state(dir / "s.state");
        CHECK(back.t == s.t);
        check_same_fields(back.theta, s.theta);
        check_same_fields(back.phi, s.phi);
        check_same_fields(back.phi_t, s.phi_t);
    }
    CHECK(format_double(0.1) == "0.10000000000000001");
    fs::remove_all(dir);
}

TEST_CASE("trajectory round-trip")
{
    const fs::path dir = testing::scratch_dir("traj");
    RunConfig c = load_config((kPresets / "random.cfg").string(), {"grid.n=[16]", "run.t_end=0.005"});
    const SimulationResult r = simulate(build_initial_state(c), c.scheme, c.potential, c.t_end);
    REQUIRE(r.ok());
    save_trajectory(dir, r.trajectory, c);
    CHECK(fs::exists(dir / "manifest.txt"));
    CHECK(fs::exists(dir / "index.csv"));

    const LoadedTrajectory back = load_trajectory(dir);
    REQUIRE(back.trajectory.size() == r.trajectory.size());
    CHECK(render_config(back.config) == render_config(c));
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
        CHECK(back.trajectory.states[i].t == r.trajectory.states[i].t);
        check_same_fields(back.trajectory.states[i].theta, r.trajectory.states[i].theta);
        check_same_fields(back.trajectory.states[i].phi_t, r.trajectory.states[i].phi_t);
    }
    CHECK(load_trajectory(dir, {"checks.energy_tol=0.5"}).config.checks.energy_tol == 0.5);
    CHECK_THROWS_AS(load_trajectory(dir, {"checks.nonsense=1"}), IoError);
    CHECK_THROWS_AS(load_trajectory(dir / "missing"), IoError);
    fs::remove_all(dir);
}

TEST_CASE("malformed field files")
{
    auto read = [](const std::string& text) {
        std::istringstream in(text);
        return read_field(in);
    };
    CHECK(read("FIELD dim=1 n=2 h=0.5 t=0\n1\n2\n").field[1] == 2.0);
    CHECK_THROWS_AS(read("FELD dim=1 n=2 h=0.5 t=0\n1\n2\n"), IoError);
    CHECK_THROWS_AS(read("FIELD dim=1 n=2 t=0\n1\n2\n"), IoError);
    CHECK_THROWS_AS(read("FIELD dim=1 n=2 h=0.5 t=0 color=red\n1\n2\n"), IoError);
    CHECK_THROWS_AS(read("FIELD dim=1 n=2 h=0.5 t=0\n1\n"), IoError);
    CHECK_THROWS_AS(read("FIELD dim=1 n=2 h=0.5 t=0\n1\nx\n"), IoError);
    CHECK_THROWS_AS(load_field("/nonexistent/file.field"), IoError);
}

TEST_CASE("csv tables")
{
    CsvTable t({"a", "b"});
    t.add_comment("note");
    t.add_row({"1", "2.5"});
    t.add_row({"3", "4"});
    CHECK(t.str() == "# note\na,b\n1,2.5\n3,4\n");
    CHECK_THROWS_AS(t.add_row({"1"}), IoError);

    const fs::path dir = testing::scratch_dir("csv");
    t.save(dir / "sub" / "t.csv");
    const CsvData d = load_csv(dir / "sub" / "t.csv");
    CHECK(d.comments == std::vector<std::string>{"note"});
    CHECK(d.numeric("b") == std::vector<double>{2.5, 4.0});
    CHECK_THROWS_AS(d.column("c"), IoError);
    fs::remove_all(dir);
}
