#include "modfoot/error.hpp"
#include "modfoot/pipeline.hpp"
#include "modfoot/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <regex>
#include <sstream>

using namespace modfoot;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("modfoot_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Minimal structural XML check: balanced tags, quoted attributes, no stray '<' in text.
bool well_formed(const std::string& doc) {
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool root_seen = false;
    while ((i = doc.find('<', i)) != std::string::npos) {
        const auto close = doc.find('>', i);
        if (close == std::string::npos) return false;
        std::string tag = doc.substr(i + 1, close - i - 1);
        i = close + 1;
        if (tag.empty()) return false;
        if (tag.front() == '?') {
            if (tag.back() != '?') return false;
            continue;
        }
        if (tag.find('<') != std::string::npos) return false;
        std::size_t quotes = 0;
        for (const char c : tag) quotes += c == '"';
        if (quotes % 2) return false;
        if (tag.front() == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        const auto name = tag.substr(0, tag.find_first_of(" /"));
        if (stack.empty()) {
            if (root_seen) return false;
            root_seen = true;
        }
        if (!self_closing) stack.push_back(name);
    }
    return root_seen && stack.empty();
}

std::vector<std::vector<std::pair<double, double>>> polylines(const std::string& svg) {
    std::vector<std::vector<std::pair<double, double>>> out;
    const std::regex re("<polyline[^>]*points=\"([^\"]*)\"");
    for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
        std::vector<std::pair<double, double>> pts;
        std::istringstream in((*it)[1].str());
        std::string pair;
        while (in >> pair) {
            const auto c = pair.find(',');
            pts.emplace_back(std::stod(pair.substr(0, c)), std::stod(pair.substr(c + 1)));
        }
        out.push_back(pts);
    }
    return out;
}

pipeline::PipelineConfig small_config(const fs::path& dir) {
    pipeline::PipelineConfig c;
    c.dims = {2};
    c.seeds = 2;
    c.budget_mult = 200;
    c.ela_reps = 2;
    c.ela_n_mult = 50;
    c.trials = 5;
    c.out_dir = dir.string();
    c.threads = 1;
    return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = io::read_file(e.path());
    return files;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(MODFOOT_CLI) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config validation") {
    pipeline::PipelineConfig c;
    CHECK_NOTHROW(c.validate());
    CHECK(c.fids.size() == 24);
    CHECK(c.presets.size() == 6);
    auto bad = [&](auto mutate) {
        auto x = c;
        mutate(x);
        CHECK_THROWS_AS(x.validate(), InvalidArgument);
    };
    bad([](auto& x) { x.dims = {4}; });
    bad([](auto& x) { x.dims = {}; });
    bad([](auto& x) { x.dims = {5, 5}; });
    bad([](auto& x) { x.fids = {0}; });
    bad([](auto& x) { x.fids = {25}; });
    bad([](auto& x) { x.instances = {5}; });
    bad([](auto& x) { x.holdout_iid = 6; });
    bad([](auto& x) { x.presets = {"Default"}; });
    bad([](auto& x) { x.presets = {"Default", "Nonsense"}; });
    bad([](auto& x) { x.seeds = 0; });
    bad([](auto& x) { x.ela_n_mult = 9; });
    bad([](auto& x) { x.out_dir = ""; });

    const auto back = pipeline::PipelineConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
    CHECK(pipeline::PipelineConfig::from_json(R"({"dims":[2,5],"seed":9})").dims == std::vector<int>{2, 5});
    CHECK_THROWS_AS(pipeline::PipelineConfig::from_json(R"({"dimz":[5]})"), InvalidArgument);
    CHECK_THROWS_AS(pipeline::PipelineConfig::from_json(R"({"dims":"5"})"), InvalidArgument);
    CHECK_THROWS_AS(pipeline::PipelineConfig::from_json("[1]"), InvalidArgument);
    CHECK_THROWS_AS(pipeline::PipelineConfig::from_json("{"), InvalidArgument);
}

TEST_CASE("run seeds") {
    CHECK(pipeline::run_seed(1, 0) + 3 == pipeline::run_seed(1, 3));
    CHECK(pipeline::run_seed(1, 0) != pipeline::run_seed(2, 0));
    CHECK(pipeline::run_seed(1, 0) % 1000 == 0);
}

TEST_CASE("sha256") {
    CHECK(pipeline::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(pipeline::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("csv tables") {
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::parse_double(io::format_double(1.0 / 3), "x") == 1.0 / 3);
    CHECK_THROWS_AS(io::parse_double("1.5x", "x"), SchemaError);
    CHECK_THROWS_AS(io::parse_int("", "x"), SchemaError);
    CHECK_THROWS_AS(io::parse_csv("a,b\n1\n", "t.csv"), SchemaError);
    CHECK_THROWS_AS(io::parse_csv("", "t.csv"), SchemaError);
    CHECK(io::parse_csv("a,b\r\n1,2\r\n\r\n", "t.csv").rows.size() == 1);

    std::vector<cma::RunResult> runs(2);
    runs[0] = {"Default", 3, 1, 5, 1000, 12.5, 1e-3, 7500, 2};
    runs[1] = {"Worst", 3, 1, 5, 1001, -4.0, 0.0, 100, 0};
    const auto text = io::performance_table(runs).to_string();
    const auto back = io::read_performance(io::parse_csv(text, "p.csv"));
    REQUIRE(back.size() == 2);
    CHECK(back[0].precision == 1e-3);
    CHECK(back[1].config_name == "Worst");
    CHECK(io::performance_table(back).to_string() == text);

    auto broken = text;
    broken.replace(broken.find("1e-03") != std::string::npos ? broken.find("1e-03") : broken.find("0.001"), 5, "abc");
    try {
        io::read_performance(io::parse_csv(broken, "p.csv"));
        FAIL("expected a schema error");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("p.csv row 2 column 'precision'") != std::string::npos);
    }
    CHECK_THROWS_AS(io::read_performance(io::parse_csv("config_name,fid\nA,1\n", "p.csv")), SchemaError);

    io::FeatureTable f;
    f.names = ela::feature_names();
    f.keys = {{1, 1, 2}, {2, 1, 2}};
    f.values = Eigen::MatrixXd::Random(2, static_cast<Eigen::Index>(f.names.size()));
    const auto ft = io::features_table(f).to_string();
    const auto fb = io::read_features(io::parse_csv(ft, "f.csv"));
    CHECK(fb.values == f.values);
    auto renamed = io::parse_csv(ft, "f.csv");
    renamed.header[5] = "other";
    CHECK_THROWS_AS(io::read_features(renamed), SchemaError);
    auto nan = io::parse_csv(ft, "f.csv");
    nan.rows[1][4] = "nan";
    CHECK_THROWS_AS(io::read_features(nan), SchemaError);

    io::MetaTable m;
    m.features = {"a", "b"};
    m.rows.push_back({{1, 5, 2}, "Default", Eigen::Vector2d(0.5, -0.25), -1.0, -0.75});
    const auto mt = io::meta_table(m).to_string();
    const auto mb = io::read_meta(io::parse_csv(mt, "m.csv"));
    CHECK(mb.features == m.features);
    CHECK(mb.rows[0].shap == m.rows[0].shap);
    CHECK(io::meta_table(mb).to_string() == mt);
    CHECK_THROWS_AS(io::read_meta(io::parse_csv("fid,iid\n1,2\n", "m.csv")), SchemaError);
}

TEST_CASE("decision curves start at the base value and end at the prediction") {
    io::MetaTable m;
    m.features = {"small", "large"};
    m.rows.push_back({{7, 5, 2}, "A", Eigen::Vector2d(1.0, 2.0), 0.0, 3.0});
    m.rows.push_back({{7, 5, 2}, "B", Eigen::Vector2d(-0.5, -1.5), 0.0, -2.0});
    const auto svg = report::decision_svg(m, 7, 5, 2);
    CHECK(well_formed(svg));
    const auto lines = polylines(svg);
    REQUIRE(lines.size() == 2);
    // Axis spans [-2, 3] over 380 px from x = 230.
    auto px = [](double v) { return 230.0 + (v + 2.0) / 5.0 * 380.0; };
    CHECK(lines[0].front().first == doctest::Approx(px(0.0)).epsilon(1e-4));
    CHECK(lines[0].back().first == doctest::Approx(px(3.0)).epsilon(1e-4));
    CHECK(lines[1].back().first == doctest::Approx(px(-2.0)).epsilon(1e-4));
    // Least important feature first: after one step A sits at 1, B at -0.5.
    CHECK(lines[0][1].first == doctest::Approx(px(1.0)).epsilon(1e-4));
    CHECK(lines[1][1].first == doctest::Approx(px(-0.5)).epsilon(1e-4));
    CHECK(lines[0][0].second > lines[0][2].second);
    CHECK_THROWS_AS(report::decision_svg(m, 8, 5, 2), SchemaError);
}

TEST_CASE("pipeline runs, resumes and reproduces") {
    const auto a = scratch("run_a");
    const auto b = scratch("run_b");
    const auto config = small_config(a);
    std::ostringstream log;
    const auto first = pipeline::run_pipeline(config, &log);
    REQUIRE(first.size() == 6);
    for (const auto& s : first) CHECK_FALSE(s.skipped);
    for (const char* f : {"performance.csv", "features.csv", "model_d2.json", "meta_d2.csv", "footprint_d2.json", "pipeline_state.json",
                          "report_d2/summary.txt", "report_d2/coverage.svg", "report_d2/scatter_truth.svg", "report_d2/scatter_clusters.svg"})
        CHECK_MESSAGE(fs::exists(a / f), f);

    const auto runs = io::read_performance(io::read_csv(a / "performance.csv"));
    CHECK(runs.size() == 24 * 5 * 6 * 2);
    const auto meta = io::read_meta(io::read_csv(a / "meta_d2.csv"));
    CHECK(meta.rows.size() == 24 * 6);
    for (const auto& r : meta.rows) CHECK(r.base_value + r.shap.sum() == doctest::Approx(r.prediction).epsilon(1e-9));

    for (const auto& e : fs::directory_iterator(a / "report_d2"))
        if (e.path().extension() == ".svg") CHECK_MESSAGE(well_formed(io::read_file(e.path())), e.path().string());

    // Nothing changed, nothing reruns.
    const auto before = snapshot(a);
    const auto second = pipeline::run_pipeline(config, &log);
    for (const auto& s : second) CHECK(s.skipped);
    CHECK(snapshot(a) == before);

    // Re-rendering from the stored files reproduces the figures exactly.
    const auto rep = footprint::FootprintReport::from_json(io::read_file(a / "footprint_d2.json"));
    const auto rerender = scratch("rerender");
    report::render_report(rep, meta, rerender);
    for (const auto& [name, content] : snapshot(rerender)) CHECK_MESSAGE(before.at("report_d2/" + name) == content, name);

    // A changed downstream parameter reruns only the stages that depend on it.
    auto changed = config;
    changed.trials = 6;
    const auto third = pipeline::run_pipeline(changed, &log);
    CHECK(third[0].skipped);
    CHECK(third[1].skipped);
    CHECK_FALSE(third[2].skipped);

    // Deleting an output forces that stage to run again.
    pipeline::run_pipeline(config, &log);
    fs::remove(a / "footprint_d2.json");
    const auto fourth = pipeline::run_pipeline(config, &log);
    CHECK(fourth[3].skipped);
    CHECK_FALSE(fourth[4].skipped);
    CHECK(snapshot(a) == before);

    // A second directory with another thread count gives byte-identical files.
    auto other = small_config(b);
    other.threads = 2;
    pipeline::run_pipeline(other, &log);
    CHECK(snapshot(b) == before);
}

TEST_CASE("command line") {
    const auto dir = scratch("cli");
    const auto log = dir / "log.txt";
    CHECK(run_cli("--help", log) == 0);
    CHECK(run_cli("", log) == 2);
    CHECK(run_cli("compute-features --n-mult 5", log) == 2);
    CHECK(run_cli("frobnicate", log) == 2);
    CHECK(run_cli("--out-dir " + dir.string() + " run-performance --dims 4 --fids 1", log) == 2);
    CHECK(run_cli("--out-dir " + dir.string() + " run-performance --dims 2 --fids 1..x", log) == 2);
    CHECK(run_cli("--out-dir " + dir.string() + " run-performance --dims 2 --presets Default,Nope", log) == 2);

    CHECK(run_cli("--out-dir " + dir.string() + " instances export --dims 2 --fids 1,3 --instances 1..2", log) == 0);
    CHECK(io::read_file(dir / "instances.json").find("\"fid\"") != std::string::npos);

    // A corrupted numeric cell fails the training stage with the file, row and column.
    io::write_file(dir / "perf.csv", "config_name,fid,iid,dim,seed,best_f,precision,evals_used,restarts\nA,1,1,2,1,0,1,10,0\n");
    std::string bad = "fid,iid,dim";
    for (const auto& n : ela::feature_names()) bad += "," + n;
    bad += "\n1,1,2";
    for (std::size_t i = 0; i < ela::feature_names().size(); ++i) bad += i == 2 ? ",abc" : ",0.5";
    io::write_file(dir / "bad.csv", bad + "\n");
    CHECK(run_cli("--out-dir " + dir.string() + " train --features bad.csv --performance perf.csv", log) == 3);
    const auto msg = io::read_file(log);
    CHECK(msg.find("stage 'train' failed") != std::string::npos);
    CHECK(msg.find("bad.csv row 2 column '" + ela::feature_names()[2] + "': expected a number, got 'abc'") != std::string::npos);

    CHECK(run_cli("--out-dir " + dir.string() + " report --meta none.csv --footprint none.json", log) == 3);
    CHECK(io::read_file(log).find("missing inputs") != std::string::npos);
    io::write_file(dir / "cfg.json", R"({"dims":[4]})");
    CHECK(run_cli("pipeline --config " + (dir / "cfg.json").string(), log) == 2);
}
