#include "magest/io.hpp"
#include "magest/scenario.hpp"
#include "magest/truth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace magest;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "magest_io_tests";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_SUITE("io")
{

TEST_CASE("numbers round-trip exactly")
{
    for (double v : {0.0, -0.0, 1.0, 0.1, 1e-300, 6.02214076e23, -3.14159265358979, 4.9e-324,
                     std::numeric_limits<double>::max()}) {
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(parse_double(" +2.5 ") == 2.5);
    CHECK_THROWS_AS(parse_double("abc"), ContractError);
    CHECK_THROWS_AS(parse_double("1.0x"), ContractError);
}

TEST_CASE("table write and read")
{
    FileHeader h;
    h.kind = "demo";
    h.set("alpha", 0.1);
    h.set("name", std::string("x"));
    h.columns = {"a", "b"};
    std::stringstream ss;
    write_table(ss, h, {{1.0, 2.0}, {0.30000000000000004, -1e-9}});
    const auto t = read_table(ss);
    CHECK(t.header.kind == "demo");
    CHECK(t.header.get_double("alpha") == 0.1);
    CHECK(t.header.get("name").value() == "x");
    CHECK_FALSE(t.header.get("missing").has_value());
    CHECK(t.column("b")[0] == 0.30000000000000004);
    CHECK(t.rows() == 2);
    CHECK_THROWS_AS(t.column("c"), ContractError);

    std::stringstream bad;
    CHECK_THROWS_AS(write_table(bad, h, {{1.0}}), ContractError);
    CHECK_THROWS_AS(write_table(bad, h, {{1.0}, {1.0, 2.0}}), ContractError);
}

TEST_CASE("malformed files are rejected")
{
    std::stringstream a("not a header\n");
    CHECK_THROWS_AS(read_table(a), ContractError);
    std::stringstream b("# magest x\n1 2\n");
    CHECK_THROWS_AS(read_table(b), ContractError);
    std::stringstream c("# magest x\n# columns: a b\n1\n");
    CHECK_THROWS_AS(read_table(c), ContractError);
    std::stringstream d("");
    CHECK_THROWS_AS(read_table(d), ContractError);
    CHECK_THROWS_AS(read_table_file("/nonexistent/dir/file.dat"), IoError);
}

TEST_CASE("record files round-trip byte for byte")
{
    const PhysicsParams p = table1_params();
    const auto rec = run_truth(p, OUParams{}, 5e-6, 77);
    ScenarioConfig c;
    const auto path = scratch("record.dat");
    write_record(path, rec, scenario_header(c));
    const auto loaded = read_record(path);
    CHECK(loaded.record.outcomes == rec.outcomes);
    CHECK(loaded.record.true_field == rec.true_field);
    CHECK(loaded.record.tau == rec.tau);
    CHECK(loaded.record.seed == 77);

    const auto again = scratch("record2.dat");
    write_record(again, loaded.record, loaded.header);
    CHECK(slurp(path) == slurp(again));

    const auto empty = run_truth(p, OUParams{}, 0.0, 1);
    write_record(again, empty, scenario_header(c));
    CHECK(read_record(again).record.size() == 0);
}

TEST_CASE("reading a file of the wrong kind")
{
    EstimateTrace tr;
    tr.tau = 1e-8;
    const auto path = scratch("trace.dat");
    write_trace(path, tr, FileHeader{});
    CHECK_THROWS_AS(read_record(path), ContractError);
    CHECK(read_trace(path).size() == 0);
}

TEST_CASE("configuration text")
{
    ScenarioConfig c;
    apply_config_text(c, "gamma_b: 10\nsigma_b = 20\n\n# a comment\n# seed: 9\nduration: 2e-4\n");
    CHECK(c.ou.gamma_b == 10.0);
    CHECK(c.ou.sigma_b == 20.0);
    CHECK(c.seed == 9);
    CHECK(c.duration == 2e-4);
    CHECK_THROWS_AS(apply_config_text(c, "bogus: 1\n"), ContractError);
    CHECK_NOTHROW(apply_config_text(c, "# bogus: 1\n# magest record\n"));
    CHECK_THROWS_AS(apply_config_text(c, "gamma_b 10\n"), ContractError);
    CHECK_THROWS_AS(apply_config_text(c, "realizations: -1\n"), ContractError);
    apply_config_text(c, "step_cap: 1e8\n");
    CHECK(c.step_cap == 100000000);
}

TEST_CASE("scenario header feeds back as configuration")
{
    ScenarioConfig c;
    c.ou = {123.0, 456.5};
    c.estimator_ou = OUParams{1230.0, 456.5};
    c.seed = 31;
    c.duration = 3e-5;
    c.lag = {7, 9, 64};
    c.physics.constituents->n_atoms = 3e12;
    std::stringstream ss;
    FileHeader h = scenario_header(c);
    h.kind = "x";
    write_table(ss, h, {});
    ScenarioConfig back;
    apply_config_text(back, ss.str());
    CHECK(scenario_header(back).entries == scenario_header(c).entries);
    CHECK(back.model_ou().gamma_b == 1230.0);
}

TEST_CASE("config validation")
{
    ScenarioConfig c;
    CHECK_NOTHROW(c.validate());
    c.realizations = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = ScenarioConfig{};
    c.duration = 1.5e-8;
    CHECK_THROWS_AS(c.validate(), ContractError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), IoError);
}

TEST_CASE("worker pool covers every index once and propagates errors")
{
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 5) throw ContractError("boom");
                    }),
                    ContractError);
    CHECK(realization_seed(10, 3) == 13);
}

} // TEST_SUITE
