#include "modfoot/pipeline.hpp"
#include "modfoot/report.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <set>

namespace fs = std::filesystem;
using namespace modfoot;

namespace {

// Accepts "5", "5,30", "1..5" and mixes such as "1..3,7".
std::vector<int> parse_list(const std::string& text, const std::string& flag) {
    std::vector<int> out;
    auto number = [&](std::string_view s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw InvalidArgument(flag + ": bad integer '" + std::string(s) + "'");
        return v;
    };
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        const auto item = rest.substr(0, comma);
        if (const auto dots = item.find(".."); dots != std::string_view::npos) {
            const int lo = number(item.substr(0, dots));
            const int hi = number(item.substr(dots + 2));
            if (hi < lo) throw InvalidArgument(flag + ": empty range '" + std::string(item) + "'");
            for (int v = lo; v <= hi; ++v) out.push_back(v);
        } else {
            out.push_back(number(item));
        }
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

std::vector<int> parse_dims(const std::string& text) {
    auto dims = parse_list(text, "--dims");
    pipeline::validate_dims(dims);
    return dims;
}

std::vector<std::string> split_names(const std::string& text) {
    std::vector<std::string> out;
    std::size_t s = 0;
    while (true) {
        const auto c = text.find(',', s);
        out.push_back(text.substr(s, c == std::string::npos ? std::string::npos : c - s));
        if (c == std::string::npos) break;
        s = c + 1;
    }
    return out;
}

struct Globals {
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out_dir = ".";
};

fs::path resolve(const Globals& g, const std::string& name) {
    const fs::path p = name;
    return p.is_absolute() ? p : fs::path(g.out_dir) / p;
}

std::vector<cma::RunResult> load_runs(const fs::path& path, const std::string& stage) {
    try {
        return io::read_performance(io::read_csv(path));
    } catch (const SchemaError& e) {
        throw pipeline::StageFailure(stage, path.string(), e.what());
    }
}

template <class F>
auto in_stage(const std::string& stage, const fs::path& file, F&& body) {
    try {
        return body();
    } catch (const pipeline::StageFailure&) {
        throw;
    } catch (const InvalidArgument&) {
        throw;
    } catch (const std::exception& e) {
        throw pipeline::StageFailure(stage, file.string(), e.what());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Algorithm footprints of modular CMA-ES variants from landscape features"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "master seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads, 0 = hardware concurrency")->check(CLI::NonNegativeNumber);
    app.add_option("--out-dir", g.out_dir, "directory for relative output paths")->capture_default_str();

    std::string dims = "5", fids = "1..24", iids = "1..5", presets_arg;

    auto* inst = app.add_subcommand("instances", "BBOB instance utilities");
    auto* inst_export = inst->add_subcommand("export", "write instance parameters as JSON");
    std::string inst_out = "instances.json";
    inst->require_subcommand(1);
    inst_export->add_option("--dims", dims);
    inst_export->add_option("--fids", fids);
    inst_export->add_option("--instances", iids);
    inst_export->add_option("--out", inst_out);

    auto* perf = app.add_subcommand("run-performance", "fixed-budget runs of every preset");
    int seeds = 5, budget_mult = 1500;
    std::string perf_out = "performance.csv";
    perf->add_option("--dims", dims);
    perf->add_option("--fids", fids);
    perf->add_option("--instances", iids);
    perf->add_option("--presets", presets_arg, "comma separated preset names (default: all six)");
    perf->add_option("--seeds", seeds)->check(CLI::PositiveNumber);
    perf->add_option("--budget-mult", budget_mult)->check(CLI::PositiveNumber);
    perf->add_option("--out", perf_out);

    auto* feat = app.add_subcommand("compute-features", "ELA feature table");
    int n_mult = 100, reps = 10;
    std::string feat_out = "features.csv";
    feat->add_option("--dims", dims);
    feat->add_option("--fids", fids);
    feat->add_option("--instances", iids);
    feat->add_option("--n-mult", n_mult)->check(CLI::Range(10, 100000));
    feat->add_option("--reps", reps)->check(CLI::PositiveNumber);
    feat->add_option("--out", feat_out);

    auto* train = app.add_subcommand("train", "fit the multi-output surrogate");
    std::string train_features = "features.csv", train_perf = "performance.csv", model_out = "model.json";
    int holdout = 5, trials = 50, dim = 0;
    train->add_option("--features", train_features);
    train->add_option("--performance", train_perf);
    train->add_option("--holdout-iid", holdout);
    train->add_option("--trials", trials)->check(CLI::PositiveNumber);
    train->add_option("--dim", dim, "dimension to train on (default: the only one present)");
    train->add_option("--out", model_out);

    auto* expl = app.add_subcommand("explain", "exact Shapley values of the test split");
    std::string expl_model = "model.json", meta_out = "meta.csv";
    expl->add_option("--model", expl_model);
    expl->add_option("--out", meta_out);

    auto* foot = app.add_subcommand("footprint", "cluster the meta representations");
    std::string foot_meta = "meta.csv", foot_perf = "performance.csv", foot_out = "footprint.json";
    foot->add_option("--meta", foot_meta);
    foot->add_option("--performance", foot_perf);
    foot->add_option("--out", foot_out);

    auto* rep = app.add_subcommand("report", "render figures and the summary");
    std::string rep_meta = "meta.csv", rep_foot = "footprint.json", rep_out = "report";
    rep->add_option("--meta", rep_meta);
    rep->add_option("--footprint", rep_foot);
    rep->add_option("--out", rep_out);

    auto* pipe = app.add_subcommand("pipeline", "run every stage from a config file");
    std::string config_path;
    pipe->add_option("--config", config_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*inst_export) {
            const auto path = resolve(g, inst_out);
            io::write_file(path, pipeline::export_instances(parse_dims(dims), parse_list(fids, "--fids"), parse_list(iids, "--instances")));
        } else if (*perf) {
            std::vector<std::string> names;
            if (presets_arg.empty())
                for (const auto& p : cma::presets()) names.push_back(p.name);
            else
                names = split_names(presets_arg);
            for (const auto& n : names) (void)cma::preset(n);
            const auto path = resolve(g, perf_out);
            const auto runs = pipeline::run_performance(parse_dims(dims), parse_list(fids, "--fids"), parse_list(iids, "--instances"),
                                                        names, seeds, budget_mult, g.seed, g.threads);
            io::write_file(path, io::performance_table(runs).to_string());
        } else if (*feat) {
            const auto path = resolve(g, feat_out);
            const auto t = pipeline::compute_feature_table(parse_dims(dims), parse_list(fids, "--fids"), parse_list(iids, "--instances"),
                                                           n_mult, reps, g.seed, g.threads);
            io::write_file(path, io::features_table(t).to_string());
        } else if (*train) {
            const auto fpath = resolve(g, train_features);
            const auto features = in_stage("train", fpath, [&] { return io::read_features(io::read_csv(fpath)); });
            const auto runs = load_runs(resolve(g, train_perf), "train");
            if (dim == 0) {
                std::set<int> present;
                for (const auto& k : features.keys) present.insert(k.dim);
                if (present.size() != 1) throw InvalidArgument("train: features cover several dimensions, pass --dim");
                dim = *present.begin();
            }
            surrogate::TrainOptions opt;
            opt.holdout_iid = holdout;
            opt.trials = trials;
            opt.seed = g.seed;
            opt.threads = g.threads;
            const auto model = in_stage("train", fpath, [&] { return surrogate::train(pipeline::dataset_for(features, runs, dim), opt); });
            io::write_file(resolve(g, model_out), model.to_json() + "\n");
        } else if (*expl) {
            const auto mpath = resolve(g, expl_model);
            const auto model = in_stage("explain", mpath, [&] { return surrogate::TrainedModel::from_json(io::read_file(mpath)); });
            io::write_file(resolve(g, meta_out), io::meta_table(pipeline::explain(model, g.threads)).to_string());
        } else if (*foot) {
            const auto mpath = resolve(g, foot_meta);
            const auto meta = in_stage("footprint", mpath, [&] { return io::read_meta(io::read_csv(mpath)); });
            const auto runs = load_runs(resolve(g, foot_perf), "footprint");
            const auto report = in_stage("footprint", mpath, [&] { return pipeline::build_footprint(meta, runs, g.threads); });
            io::write_file(resolve(g, foot_out), report.to_json() + "\n");
        } else if (*rep) {
            const auto mpath = resolve(g, rep_meta);
            const auto fpath = resolve(g, rep_foot);
            std::vector<std::string> missing;
            for (const auto& p : {mpath, fpath})
                if (!fs::exists(p)) missing.push_back(p.string());
            if (!missing.empty()) {
                std::string msg = "missing inputs:";
                for (const auto& m : missing) msg += " " + m;
                throw pipeline::StageFailure("report", missing.front(), msg);
            }
            const auto meta = in_stage("report", mpath, [&] { return io::read_meta(io::read_csv(mpath)); });
            const auto fp = in_stage("report", fpath, [&] { return footprint::FootprintReport::from_json(io::read_file(fpath)); });
            const auto files = in_stage("report", fpath, [&] { return report::render_report(fp, meta, resolve(g, rep_out)); });
            for (const auto& f : files) std::cout << (resolve(g, rep_out) / f).string() << "\n";
        } else if (*pipe) {
            auto config = pipeline::PipelineConfig::from_json(io::read_file(config_path));
            // Command-line globals override the file only when given.
            if (app.count("--seed")) config.seed = g.seed;
            if (app.count("--threads")) config.threads = g.threads;
            if (app.count("--out-dir")) config.out_dir = g.out_dir;
            pipeline::run_pipeline(config, &std::cerr);
        }
    } catch (const pipeline::StageFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
