#include "modfoot/pipeline.hpp"

#include "modfoot/bbob.hpp"
#include "modfoot/ela.hpp"
#include "modfoot/parallel.hpp"
#include "modfoot/report.hpp"
#include "modfoot/rng.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

namespace modfoot::pipeline {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kRunSeedTag = 0x5EED'0001ULL;
const char* const kStateFile = "pipeline_state.json";

std::vector<int> iota_range(int lo, int hi) {
    std::vector<int> v;
    for (int i = lo; i <= hi; ++i) v.push_back(i);
    return v;
}

template <class T>
bool unique_values(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
}

std::string dim_name(const char* stem, int dim, const char* ext) { return std::string(stem) + "_d" + std::to_string(dim) + ext; }

// Stage bookkeeping: input hash plus output file hashes, persisted between runs.
class StateStore {
public:
    explicit StateStore(fs::path dir) : dir_(std::move(dir)) {
        const auto path = dir_ / kStateFile;
        if (!fs::exists(path)) return;
        try {
            state_ = nlohmann::json::parse(io::read_file(path));
        } catch (const std::exception&) {
            state_ = nlohmann::json::object();  // unreadable state only costs a rerun
        }
        if (!state_.is_object()) state_ = nlohmann::json::object();
    }

    bool up_to_date(const std::string& stage, const std::string& input_hash) const {
        if (!state_.contains(stage)) return false;
        const auto& rec = state_.at(stage);
        if (!rec.is_object() || rec.value("inputs", "") != input_hash || !rec.contains("outputs") || !rec.at("outputs").is_object()) return false;
        for (const auto& [name, hash] : rec.at("outputs").items()) {
            const auto path = dir_ / name;
            if (!fs::exists(path) || !hash.is_string() || sha256_hex(io::read_file(path)) != hash.get<std::string>()) return false;
        }
        return !rec.at("outputs").empty();
    }

    void record(const std::string& stage, const std::string& input_hash, const std::vector<std::string>& outputs) {
        nlohmann::json out = nlohmann::json::object();
        for (const auto& name : outputs) out[name] = sha256_hex(io::read_file(dir_ / name));
        state_[stage] = {{"inputs", input_hash}, {"outputs", out}};
        io::write_file(dir_ / kStateFile, state_.dump(1) + "\n");
    }

private:
    fs::path dir_;
    nlohmann::json state_ = nlohmann::json::object();
};

std::string input_hash(const std::string& stage, const nlohmann::json& params, const fs::path& dir, const std::vector<std::string>& inputs) {
    std::string blob = stage + "\n" + params.dump() + "\n";
    for (const auto& name : inputs) {
        const auto path = dir / name;
        if (!fs::exists(path)) throw StageFailure(stage, name, "missing input file");
        blob += name + "\n" + sha256_hex(io::read_file(path)) + "\n";
    }
    return sha256_hex(blob);
}

}  // namespace

StageFailure::StageFailure(std::string stage, std::string file, const std::string& message)
    : Error("stage '" + stage + "' failed on " + file + ": " + message), stage_(std::move(stage)), file_(std::move(file)) {}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void validate_dims(const std::vector<int>& dims) {
    static const std::set<int> allowed = {2, 3, 5, 10, 20, 30, 40};
    if (dims.empty()) throw InvalidArgument("dims must not be empty");
    for (const int d : dims)
        if (!allowed.contains(d)) throw InvalidArgument("dimension " + std::to_string(d) + " not in {2,3,5,10,20,30,40}");
    if (!unique_values(dims)) throw InvalidArgument("duplicate dims");
}

PipelineConfig::PipelineConfig() : fids(iota_range(1, 24)) {
    for (const auto& p : cma::presets()) presets.push_back(p.name);
}

void PipelineConfig::validate() const {
    validate_dims(dims);
    if (fids.empty() || !unique_values(fids)) throw InvalidArgument("config: fids must be non-empty and unique");
    for (const int f : fids)
        if (f < 1 || f > 24) throw InvalidArgument("config: fid " + std::to_string(f) + " outside 1..24");
    if (instances.size() < 2 || !unique_values(instances)) throw InvalidArgument("config: need at least two distinct instances");
    for (const int i : instances)
        if (i < 1) throw InvalidArgument("config: instance ids must be >= 1");
    if (std::find(instances.begin(), instances.end(), holdout_iid) == instances.end())
        throw InvalidArgument("config: holdout_iid " + std::to_string(holdout_iid) + " is not among the instances");
    if (presets.size() < 2 || !unique_values(presets)) throw InvalidArgument("config: need at least two distinct presets");
    for (const auto& p : presets) (void)cma::preset(p);
    if (budget_mult < 1 || seeds < 1 || ela_reps < 1 || trials < 1) throw InvalidArgument("config: budget_mult, seeds, ela_reps and trials must be >= 1");
    if (ela_n_mult < 10) throw InvalidArgument("config: ela_n_mult must be >= 10");
    if (out_dir.empty()) throw InvalidArgument("config: out_dir must not be empty");
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
    static const std::set<std::string> known = {"dims", "fids", "instances", "presets", "budget_mult", "seeds", "ela_n_mult",
                                                "ela_reps", "holdout_iid", "trials", "out_dir", "seed", "threads"};
    PipelineConfig c;
    try {
        const auto j = nlohmann::json::parse(text);
        if (!j.is_object()) throw InvalidArgument("config: top level must be an object");
        for (const auto& [key, value] : j.items())
            if (!known.contains(key)) throw InvalidArgument("config: unknown field '" + key + "'");
        if (j.contains("dims")) c.dims = j.at("dims").get<std::vector<int>>();
        if (j.contains("fids")) c.fids = j.at("fids").get<std::vector<int>>();
        if (j.contains("instances")) c.instances = j.at("instances").get<std::vector<int>>();
        if (j.contains("presets")) c.presets = j.at("presets").get<std::vector<std::string>>();
        if (j.contains("budget_mult")) c.budget_mult = j.at("budget_mult").get<int>();
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<int>();
        if (j.contains("ela_n_mult")) c.ela_n_mult = j.at("ela_n_mult").get<int>();
        if (j.contains("ela_reps")) c.ela_reps = j.at("ela_reps").get<int>();
        if (j.contains("holdout_iid")) c.holdout_iid = j.at("holdout_iid").get<int>();
        if (j.contains("trials")) c.trials = j.at("trials").get<int>();
        if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j.at("threads").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string PipelineConfig::to_json() const {
    nlohmann::json j = {{"dims", dims}, {"fids", fids}, {"instances", instances}, {"presets", presets}, {"budget_mult", budget_mult},
                        {"seeds", seeds}, {"ela_n_mult", ela_n_mult}, {"ela_reps", ela_reps}, {"holdout_iid", holdout_iid},
                        {"trials", trials}, {"out_dir", out_dir}, {"seed", seed}, {"threads", threads}};
    return j.dump(1);
}

std::uint64_t run_seed(std::uint64_t master_seed, int s) {
    // Keeps seeds short and readable in the CSV while still depending on the master seed.
    return (combine_keys({kRunSeedTag, master_seed}) % 1000000ULL) * 1000ULL + static_cast<std::uint64_t>(s);
}

std::vector<cma::RunResult> run_performance(const std::vector<int>& dims, const std::vector<int>& fids,
                                            const std::vector<int>& iids, const std::vector<std::string>& presets,
                                            int seeds, int budget_mult, std::uint64_t master_seed, int threads) {
    if (seeds < 1 || budget_mult < 1) throw InvalidArgument("run_performance: seeds and budget_mult must be >= 1");
    std::vector<const cma::ModularConfig*> configs;
    for (const auto& p : presets) configs.push_back(&cma::preset(p));
    std::vector<bbob::ProblemInstance> instances;
    for (const int d : dims)
        for (const int f : fids)
            for (const int i : iids) instances.push_back(bbob::make_instance(f, i, d));
    const std::size_t per_instance = configs.size() * static_cast<std::size_t>(seeds);
    std::vector<cma::RunResult> out(instances.size() * per_instance);
    parallel_for(out.size(), threads, [&](std::size_t job) {
        const auto& inst = instances[job / per_instance];
        const auto rest = job % per_instance;
        const auto& cfg = *configs[rest / static_cast<std::size_t>(seeds)];
        const int s = static_cast<int>(rest % static_cast<std::size_t>(seeds));
        out[job] = cma::run(inst, cfg, static_cast<long>(budget_mult) * inst.dim(), run_seed(master_seed, s));
    });
    return out;
}

io::FeatureTable compute_feature_table(const std::vector<int>& dims, const std::vector<int>& fids, const std::vector<int>& iids,
                                       int n_mult, int reps, std::uint64_t master_seed, int threads) {
    io::FeatureTable t;
    t.names = ela::feature_names();
    for (const int d : dims)
        for (const int f : fids)
            for (const int i : iids) t.keys.push_back({f, i, d});
    t.values.resize(static_cast<Eigen::Index>(t.keys.size()), static_cast<Eigen::Index>(t.names.size()));
    ela::FeatureOptions opt;
    opt.n_mult = n_mult;
    opt.reps = reps;
    opt.master_seed = master_seed;
    opt.threads = 1;
    parallel_for(t.keys.size(), threads, [&](std::size_t r) {
        const auto& k = t.keys[r];
        const auto fv = ela::compute_features(bbob::make_instance(k.fid, k.iid, k.dim), opt);
        for (std::size_t c = 0; c < fv.values.size(); ++c) t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = fv.values[c];
    });
    return t;
}

std::string export_instances(const std::vector<int>& dims, const std::vector<int>& fids, const std::vector<int>& iids) {
    auto matrix = [](const Eigen::MatrixXd& M) {
        std::vector<std::vector<double>> rows(static_cast<std::size_t>(M.rows()));
        for (Eigen::Index r = 0; r < M.rows(); ++r)
            for (Eigen::Index c = 0; c < M.cols(); ++c) rows[static_cast<std::size_t>(r)].push_back(M(r, c));
        return rows;
    };
    nlohmann::json out = nlohmann::json::array();
    for (const int d : dims)
        for (const int f : fids)
            for (const int i : iids) {
                const auto inst = bbob::make_instance(f, i, d);
                out.push_back({{"fid", f},
                               {"iid", i},
                               {"dim", d},
                               {"name", bbob::function_name(f)},
                               {"f_opt", inst.f_opt()},
                               {"x_opt", std::vector<double>(inst.x_opt().data(), inst.x_opt().data() + inst.x_opt().size())},
                               {"rot_R", matrix(inst.rot_R())},
                               {"rot_Q", matrix(inst.rot_Q())}});
            }
    return out.dump(1) + "\n";
}

surrogate::Dataset dataset_for(const io::FeatureTable& features, const std::vector<cma::RunResult>& runs, int dim,
                               std::vector<std::string> presets) {
    if (presets.empty()) {
        for (const auto& r : runs)
            if (r.dim == dim && std::find(presets.begin(), presets.end(), r.config_name) == presets.end()) presets.push_back(r.config_name);
    }
    std::vector<int> rows;
    for (std::size_t i = 0; i < features.keys.size(); ++i)
        if (features.keys[i].dim == dim) rows.push_back(static_cast<int>(i));
    if (rows.empty()) throw SchemaError("no feature rows for dimension " + std::to_string(dim));
    std::vector<surrogate::InstanceKey> keys;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), features.values.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        keys.push_back(features.keys[static_cast<std::size_t>(rows[r])]);
        X.row(static_cast<Eigen::Index>(r)) = features.values.row(rows[r]);
    }
    return surrogate::assemble(keys, features.names, X, runs, presets);
}

io::MetaTable explain(const surrogate::TrainedModel& model, int threads) {
    io::MetaTable m;
    m.features = model.features;
    m.rows = shap::build_meta(model, threads);
    return m;
}

footprint::FootprintReport build_footprint(const io::MetaTable& meta, const std::vector<cma::RunResult>& runs, int threads) {
    std::vector<std::string> configs;
    std::vector<footprint::MetaRow> rows;
    std::map<std::tuple<int, int, int, std::string>, double> truth;
    for (const auto& m : meta.rows) {
        if (std::find(configs.begin(), configs.end(), m.config_name) == configs.end()) configs.push_back(m.config_name);
        const auto key = std::make_tuple(m.key.fid, m.key.iid, m.key.dim, m.config_name);
        if (!truth.count(key)) truth[key] = surrogate::median_target(runs, m.key, m.config_name);
        rows.push_back({m.key, m.config_name, m.shap, truth[key]});
    }
    return footprint::build_report(rows, meta.features, configs, 2, 15, threads);
}

std::vector<StageOutcome> run_pipeline(const PipelineConfig& config, std::ostream* log) {
    config.validate();
    const fs::path dir = config.out_dir;
    fs::create_directories(dir);
    StateStore state(dir);
    std::vector<StageOutcome> outcomes;
    const int threads = config.threads;

    auto stage = [&](const std::string& name, const nlohmann::json& params, const std::vector<std::string>& inputs,
                     const std::string& primary_output, auto&& body) {
        const auto hash = input_hash(name, params, dir, inputs);
        if (state.up_to_date(name, hash)) {
            if (log) *log << "[skip] " << name << "\n";
            outcomes.push_back({name, true});
            return;
        }
        if (log) *log << "[run]  " << name << std::endl;
        std::vector<std::string> outputs;
        try {
            outputs = body();
        } catch (const StageFailure&) {
            throw;
        } catch (const SchemaError& e) {
            // Schema problems come from reading an input file; name the first one.
            throw StageFailure(name, inputs.empty() ? primary_output : inputs.front(), e.what());
        } catch (const std::exception& e) {
            throw StageFailure(name, primary_output, e.what());
        }
        state.record(name, hash, outputs);
        outcomes.push_back({name, false});
    };

    const std::string perf = "performance.csv";
    const std::string feats = "features.csv";
    stage("run-performance",
          {{"dims", config.dims}, {"fids", config.fids}, {"instances", config.instances}, {"presets", config.presets},
           {"budget_mult", config.budget_mult}, {"seeds", config.seeds}, {"seed", config.seed}},
          {}, perf, [&] {
              const auto runs = run_performance(config.dims, config.fids, config.instances, config.presets, config.seeds,
                                                config.budget_mult, config.seed, threads);
              io::write_file(dir / perf, io::performance_table(runs).to_string());
              return std::vector<std::string>{perf};
          });
    stage("compute-features",
          {{"dims", config.dims}, {"fids", config.fids}, {"instances", config.instances}, {"ela_n_mult", config.ela_n_mult},
           {"ela_reps", config.ela_reps}, {"seed", config.seed}},
          {}, feats, [&] {
              const auto t = compute_feature_table(config.dims, config.fids, config.instances, config.ela_n_mult, config.ela_reps, config.seed, threads);
              io::write_file(dir / feats, io::features_table(t).to_string());
              return std::vector<std::string>{feats};
          });

    for (const int d : config.dims) {
        const auto model = dim_name("model", d, ".json");
        const auto meta = dim_name("meta", d, ".csv");
        const auto foot = dim_name("footprint", d, ".json");
        const auto report_dir = "report_d" + std::to_string(d);
        stage("train_d" + std::to_string(d),
              {{"dim", d}, {"holdout_iid", config.holdout_iid}, {"trials", config.trials}, {"seed", config.seed}, {"presets", config.presets}},
              {feats, perf}, model, [&] {
                  const auto features = io::read_features(io::read_csv(dir / feats));
                  std::vector<cma::RunResult> runs;
                  try {
                      runs = io::read_performance(io::read_csv(dir / perf));
                  } catch (const SchemaError& e) {
                      throw StageFailure("train_d" + std::to_string(d), perf, e.what());
                  }
                  surrogate::TrainOptions opt;
                  opt.holdout_iid = config.holdout_iid;
                  opt.trials = config.trials;
                  opt.seed = config.seed;
                  opt.threads = threads;
                  const auto m = surrogate::train(dataset_for(features, runs, d, config.presets), opt);
                  io::write_file(dir / model, m.to_json() + "\n");
                  return std::vector<std::string>{model};
              });
        stage("explain_d" + std::to_string(d), {{"dim", d}}, {model}, meta, [&] {
            const auto m = surrogate::TrainedModel::from_json(io::read_file(dir / model));
            io::write_file(dir / meta, io::meta_table(explain(m, threads)).to_string());
            return std::vector<std::string>{meta};
        });
        stage("footprint_d" + std::to_string(d), {{"dim", d}}, {meta, perf}, foot, [&] {
            const auto mt = io::read_meta(io::read_csv(dir / meta));
            std::vector<cma::RunResult> runs;
            try {
                runs = io::read_performance(io::read_csv(dir / perf));
            } catch (const SchemaError& e) {
                throw StageFailure("footprint_d" + std::to_string(d), perf, e.what());
            }
            io::write_file(dir / foot, build_footprint(mt, runs, threads).to_json() + "\n");
            return std::vector<std::string>{foot};
        });
        stage("report_d" + std::to_string(d), {{"dim", d}}, {foot, meta}, report_dir, [&] {
            const auto rep = footprint::FootprintReport::from_json(io::read_file(dir / foot));
            const auto mt = io::read_meta(io::read_csv(dir / meta));
            auto files = report::render_report(rep, mt, dir / report_dir);
            for (auto& f : files) f = report_dir + "/" + f;
            return files;
        });
    }
    return outcomes;
}

}  // namespace modfoot::pipeline
