#include "modfoot/surrogate.hpp"

#include "modfoot/error.hpp"
#include "modfoot/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace modfoot::surrogate {

namespace {

Eigen::MatrixXd take(const Eigen::MatrixXd& M, const std::vector<int>& rows, const std::vector<int>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < cols.size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = M(rows[r], cols[c]);
    return out;
}

std::vector<int> all_columns(Eigen::Index n) {
    std::vector<int> c(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = static_cast<int>(i);
    return c;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& M) {
    auto out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(M.cols()));
        for (Eigen::Index c = 0; c < M.cols(); ++c) row[static_cast<std::size_t>(c)] = M(r, c);
        out.push_back(row);
    }
    return out;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& j, Eigen::Index cols) {
    Eigen::MatrixXd M(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const auto row = j[r].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(row.size()) != cols) throw SchemaError("model json: row width mismatch");
        for (Eigen::Index c = 0; c < cols; ++c) M(static_cast<Eigen::Index>(r), c) = row[static_cast<std::size_t>(c)];
    }
    return M;
}

nlohmann::json keys_json(const std::vector<InstanceKey>& keys) {
    auto out = nlohmann::json::array();
    for (const auto& k : keys) out.push_back({k.fid, k.iid, k.dim});
    return out;
}

std::vector<InstanceKey> keys_from(const nlohmann::json& j) {
    std::vector<InstanceKey> keys;
    for (const auto& k : j) {
        const auto v = k.get<std::vector<int>>();
        if (v.size() != 3) throw SchemaError("model json: instance key needs 3 entries");
        keys.push_back({v[0], v[1], v[2]});
    }
    return keys;
}

nlohmann::json cv_json(const CvScore& s) {
    return {{"mae", std::vector<double>(s.mae.data(), s.mae.data() + s.mae.size())},
            {"r2", std::vector<double>(s.r2.data(), s.r2.data() + s.r2.size())}};
}

CvScore cv_from(const nlohmann::json& j) {
    const auto mae = j.at("mae").get<std::vector<double>>();
    const auto r2 = j.at("r2").get<std::vector<double>>();
    CvScore s;
    s.mae = Eigen::Map<const Eigen::VectorXd>(mae.data(), static_cast<Eigen::Index>(mae.size()));
    s.r2 = Eigen::Map<const Eigen::VectorXd>(r2.data(), static_cast<Eigen::Index>(r2.size()));
    return s;
}

}  // namespace

std::uint64_t InstanceKey::row_id() const {
    return (static_cast<std::uint64_t>(dim) << 40) | (static_cast<std::uint64_t>(fid) << 20) | static_cast<std::uint64_t>(iid);
}

double target_transform(double precision) { return std::log10(precision + kPrecisionFloor); }

std::vector<int> Dataset::indices(Split s) const {
    std::vector<int> out;
    for (int i = 0; i < rows(); ++i)
        if (split[i] == s) out.push_back(i);
    return out;
}

Dataset Dataset::subset(const std::vector<int>& rows_) const {
    Dataset d;
    d.feature_names = feature_names;
    d.target_names = target_names;
    d.X = take(X, rows_, all_columns(X.cols()));
    d.Y = take(Y, rows_, all_columns(Y.cols()));
    for (const int r : rows_) {
        d.keys.push_back(keys[r]);
        d.split.push_back(split[r]);
    }
    return d;
}

Dataset Dataset::with_features(const std::vector<std::string>& names) const {
    std::vector<int> cols;
    for (const auto& n : names) {
        const auto it = std::find(feature_names.begin(), feature_names.end(), n);
        if (it == feature_names.end()) throw SchemaError("dataset: missing feature '" + n + "'");
        cols.push_back(static_cast<int>(it - feature_names.begin()));
    }
    Dataset d = *this;
    d.feature_names = names;
    d.X = take(X, all_columns(X.rows()), cols);
    return d;
}

std::vector<std::uint64_t> Dataset::row_ids(const std::vector<int>& rows_) const {
    std::vector<std::uint64_t> ids;
    ids.reserve(rows_.size());
    for (const int r : rows_) ids.push_back(keys[r].row_id());
    return ids;
}

double median_target(const std::vector<cma::RunResult>& runs, const InstanceKey& key, const std::string& config) {
    std::vector<double> p;
    for (const auto& r : runs)
        if (r.fid == key.fid && r.iid == key.iid && r.dim == key.dim && r.config_name == config) p.push_back(r.precision);
    if (p.empty())
        throw SchemaError("no runs for config '" + config + "' on f" + std::to_string(key.fid) + " iid " + std::to_string(key.iid) +
                          " d" + std::to_string(key.dim));
    std::sort(p.begin(), p.end());
    const std::size_t n = p.size();
    const double med = n % 2 == 1 ? p[n / 2] : 0.5 * (p[n / 2 - 1] + p[n / 2]);
    return target_transform(med);
}

Dataset assemble(const std::vector<InstanceKey>& keys, const std::vector<std::string>& feature_names,
                 const Eigen::MatrixXd& features, const std::vector<cma::RunResult>& runs,
                 const std::vector<std::string>& config_names) {
    if (static_cast<Eigen::Index>(keys.size()) != features.rows() || static_cast<Eigen::Index>(feature_names.size()) != features.cols())
        throw ShapeError("assemble: feature table shape does not match keys/names");
    std::set<InstanceKey> seen;
    for (const auto& k : keys)
        if (!seen.insert(k).second)
            throw SchemaError("assemble: duplicate instance f" + std::to_string(k.fid) + " iid " + std::to_string(k.iid));
    if (!features.allFinite()) throw SchemaError("assemble: non-finite feature value");

    // Group precisions once instead of scanning all runs per cell.
    std::map<std::tuple<int, int, int, std::string>, std::vector<double>> groups;
    for (const auto& r : runs) groups[{r.fid, r.iid, r.dim, r.config_name}].push_back(r.precision);

    Dataset d;
    d.keys = keys;
    d.feature_names = feature_names;
    d.X = features;
    d.target_names = config_names;
    d.Y.resize(static_cast<Eigen::Index>(keys.size()), static_cast<Eigen::Index>(config_names.size()));
    d.split.assign(keys.size(), Split::train);
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (std::size_t c = 0; c < config_names.size(); ++c) {
            const auto it = groups.find({keys[i].fid, keys[i].iid, keys[i].dim, config_names[c]});
            if (it == groups.end())
                throw SchemaError("assemble: no runs for config '" + config_names[c] + "' on f" + std::to_string(keys[i].fid) +
                                  " iid " + std::to_string(keys[i].iid) + " d" + std::to_string(keys[i].dim));
            auto p = it->second;
            std::sort(p.begin(), p.end());
            const std::size_t n = p.size();
            const double med = n % 2 == 1 ? p[n / 2] : 0.5 * (p[n / 2 - 1] + p[n / 2]);
            d.Y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = target_transform(med);
        }
    }
    return d;
}

Dataset split_holdout(Dataset data, int holdout_iid) {
    std::map<int, std::set<int>> per_class;
    std::set<InstanceKey> seen;
    for (const auto& k : data.keys) {
        if (!seen.insert(k).second)
            throw SchemaError("split_holdout: duplicate instance f" + std::to_string(k.fid) + " iid " + std::to_string(k.iid));
        per_class[k.fid].insert(k.iid);
    }
    if (per_class.empty()) throw SchemaError("split_holdout: empty dataset");
    const auto& reference = per_class.begin()->second;
    for (const auto& [fid, iids] : per_class) {
        if (iids != reference) throw SchemaError("split_holdout: incomplete suite, f" + std::to_string(fid) + " has a different instance set");
        if (!iids.contains(holdout_iid))
            throw SchemaError("split_holdout: incomplete suite, f" + std::to_string(fid) + " lacks iid " + std::to_string(holdout_iid));
    }
    if (reference.size() < 2) throw SchemaError("split_holdout: need at least two instances per class");
    for (int i = 0; i < data.rows(); ++i) data.split[i] = data.keys[i].iid == holdout_iid ? Split::test : Split::train;
    return data;
}

std::vector<std::string> non_constant_features(const Dataset& data, const std::vector<int>& rows) {
    std::vector<std::string> out;
    if (rows.empty()) return out;
    for (Eigen::Index c = 0; c < data.X.cols(); ++c) {
        const double first = data.X(rows.front(), c);
        for (const int r : rows) {
            if (data.X(r, c) != first) {
                out.push_back(data.feature_names[static_cast<std::size_t>(c)]);
                break;
            }
        }
    }
    return out;
}

Scaler Scaler::fit(const Eigen::MatrixXd& X, std::vector<std::string> names) {
    if (static_cast<Eigen::Index>(names.size()) != X.cols()) throw ShapeError("scaler: names do not match columns");
    if (X.rows() < 1) throw InvalidArgument("scaler: no rows");
    Scaler s;
    s.names = std::move(names);
    s.min = X.colwise().minCoeff().transpose();
    s.max = X.colwise().maxCoeff().transpose();
    for (Eigen::Index c = 0; c < X.cols(); ++c)
        if (!(s.max[c] > s.min[c])) throw ContractError("scaler: constant feature '" + s.names[static_cast<std::size_t>(c)] + "' must be dropped first");
    return s;
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& X) const {
    if (X.cols() != min.size()) throw ShapeError("scaler: column count mismatch");
    return ((X.rowwise() - min.transpose()).array().rowwise() / (max - min).transpose().array()).matrix();
}

Folds stratified_cv_folds(const Dataset& data, int k) {
    if (k < 2) throw InvalidArgument("stratified_cv_folds: k must be >= 2");
    std::map<int, std::vector<std::pair<int, int>>> per_class;  // fid -> (iid, row)
    for (const int r : data.indices(Split::train)) per_class[data.keys[r].fid].push_back({data.keys[r].iid, r});
    Folds folds(static_cast<std::size_t>(k));
    for (auto& [fid, members] : per_class) {
        if (static_cast<int>(members.size()) != k)
            throw SchemaError("stratified_cv_folds: class f" + std::to_string(fid) + " has " + std::to_string(members.size()) +
                              " train instances, expected " + std::to_string(k));
        std::sort(members.begin(), members.end());
        for (int j = 0; j < k; ++j) folds[j].push_back(members[j].second);
    }
    return folds;
}

Score score(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols()) throw ShapeError("score: shape mismatch");
    if (truth.rows() < 2) throw InvalidArgument("score: need at least 2 rows");
    Score s;
    const auto t = truth.cols();
    s.mae.resize(t);
    s.r2.resize(t);
    s.r2_undefined.assign(static_cast<std::size_t>(t), false);
    for (Eigen::Index j = 0; j < t; ++j) {
        s.mae[j] = (pred.col(j) - truth.col(j)).cwiseAbs().mean();
        const double ss_tot = (truth.col(j).array() - truth.col(j).mean()).square().sum();
        const double ss_res = (pred.col(j) - truth.col(j)).squaredNorm();
        if (ss_tot == 0.0) {
            s.r2[j] = 0.0;
            s.r2_undefined[static_cast<std::size_t>(j)] = true;
        } else {
            s.r2[j] = 1.0 - ss_res / ss_tot;
        }
    }
    return s;
}

CvScore cross_validate(const Dataset& data, const Folds& folds, const std::vector<int>& columns,
                       const rf::ForestParams& params, std::uint64_t seed) {
    const auto t = data.Y.cols();
    CvScore out{Eigen::VectorXd::Zero(t), Eigen::VectorXd::Zero(t)};
    const auto targets = all_columns(t);
    for (std::size_t j = 0; j < folds.size(); ++j) {
        std::vector<int> train;
        for (std::size_t o = 0; o < folds.size(); ++o)
            if (o != j) train.insert(train.end(), folds[o].begin(), folds[o].end());
        const auto forest = rf::Forest::fit(take(data.X, train, columns), take(data.Y, train, targets), params, seed, data.row_ids(train));
        const Score s = score(forest.predict_rows(take(data.X, folds[j], columns)), take(data.Y, folds[j], targets));
        out.mae += s.mae;
        out.r2 += s.r2;
    }
    out.mae /= static_cast<double>(folds.size());
    out.r2 /= static_cast<double>(folds.size());
    return out;
}

CvScore baseline_cv(const Dataset& data, const Folds& folds) {
    const auto t = data.Y.cols();
    CvScore out{Eigen::VectorXd::Zero(t), Eigen::VectorXd::Zero(t)};
    const auto targets = all_columns(t);
    for (std::size_t j = 0; j < folds.size(); ++j) {
        std::vector<int> train;
        for (std::size_t o = 0; o < folds.size(); ++o)
            if (o != j) train.insert(train.end(), folds[o].begin(), folds[o].end());
        const Eigen::RowVectorXd mean = take(data.Y, train, targets).colwise().mean();
        const Eigen::MatrixXd truth = take(data.Y, folds[j], targets);
        const Eigen::MatrixXd pred = mean.replicate(truth.rows(), 1);
        const Score s = score(pred, truth);
        out.mae += s.mae;
        out.r2 += s.r2;
    }
    out.mae /= static_cast<double>(folds.size());
    out.r2 /= static_cast<double>(folds.size());
    return out;
}

Selection forward_select(const Dataset& data, const Folds& folds, const rf::ForestParams& params,
                         std::uint64_t seed, int n_max, double min_gain, int threads) {
    if (data.X.cols() < 1) throw InvalidArgument("forward_select: no candidate features");
    if (n_max < 1) throw InvalidArgument("forward_select: n_max must be >= 1");
    std::vector<int> by_name = all_columns(data.X.cols());
    std::sort(by_name.begin(), by_name.end(), [&](int a, int b) { return data.feature_names[a] < data.feature_names[b]; });

    Selection sel;
    std::vector<int> chosen;
    std::vector<char> taken(static_cast<std::size_t>(data.X.cols()), 0);
    double current = -std::numeric_limits<double>::infinity();
    while (static_cast<int>(chosen.size()) < n_max) {
        std::vector<int> candidates;
        for (const int c : by_name)
            if (!taken[c]) candidates.push_back(c);
        if (candidates.empty()) break;
        std::vector<double> scores(candidates.size());
        parallel_for(candidates.size(), threads, [&](std::size_t i) {
            auto cols = chosen;
            cols.push_back(candidates[i]);
            scores[i] = cross_validate(data, folds, cols, params, seed).mean_r2();
        });
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i)
            if (scores[i] > scores[best]) best = i;
        if (!chosen.empty() && !(scores[best] - current >= min_gain)) break;
        chosen.push_back(candidates[best]);
        taken[candidates[best]] = 1;
        current = scores[best];
        sel.features.push_back(data.feature_names[candidates[best]]);
        sel.path.push_back(current);
    }
    return sel;
}

tpe::SearchSpace forest_space() {
    return {
        {"n_trees", tpe::DimKind::integer, 50, 500, 0},
        {"max_depth", tpe::DimKind::integer, 2, 32, 0},
        {"min_samples_leaf", tpe::DimKind::integer, 1, 8, 0},
        {"max_features_fraction", tpe::DimKind::real, 0.2, 1.0, 0},
    };
}

rf::ForestParams params_from(const tpe::Point& p) {
    if (p.size() != 4) throw ShapeError("params_from: expected 4 values");
    rf::ForestParams f;
    f.n_trees = static_cast<int>(p[0]);
    f.max_depth = static_cast<int>(p[1]);
    f.min_samples_leaf = static_cast<int>(p[2]);
    f.max_features_fraction = p[3];
    return f;
}

TuneResult tune(const Dataset& data, const Folds& folds, int trials, std::uint64_t seed, int threads) {
    const auto columns = all_columns(data.X.cols());
    tpe::SearchOptions opt;
    opt.trials = trials;
    opt.seed = seed;
    opt.threads = threads;
    TuneResult out;
    out.history = tpe::search(forest_space(), [&](const tpe::Point& p) {
        try {
            return cross_validate(data, folds, columns, params_from(p), seed).mean_r2();
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    }, opt);
    if (out.history.completed() < 2) {
        out.fallback = true;
        out.params = rf::ForestParams{};
        out.cv_r2 = cross_validate(data, folds, columns, out.params, seed).mean_r2();
    } else {
        out.params = params_from(out.history.trials[static_cast<std::size_t>(out.history.best)].params);
        out.cv_r2 = out.history.trials[static_cast<std::size_t>(out.history.best)].score;
    }
    return out;
}

Eigen::VectorXd TrainedModel::predict_raw(const std::vector<std::string>& names, const std::vector<double>& values) const {
    if (names.size() != values.size()) throw ShapeError("predict: names and values differ in length");
    Eigen::MatrixXd row(1, static_cast<Eigen::Index>(features.size()));
    for (std::size_t f = 0; f < features.size(); ++f) {
        const auto it = std::find(names.begin(), names.end(), features[f]);
        if (it == names.end()) throw SchemaError("predict: missing feature '" + features[f] + "'");
        row(0, static_cast<Eigen::Index>(f)) = values[static_cast<std::size_t>(it - names.begin())];
    }
    return forest.predict(Eigen::VectorXd(scaler.apply(row).row(0).transpose()));
}

TrainedModel train(const Dataset& input, const TrainOptions& options) {
    Dataset data = split_holdout(input, options.holdout_iid);
    const auto train_rows = data.indices(Split::train);
    const auto test_rows = data.indices(Split::test);
    const auto kept = non_constant_features(data, train_rows);
    if (kept.empty()) throw ContractError("train: every feature is constant on the training split");

    Dataset scaled = data.with_features(kept);
    const Scaler full_scaler = Scaler::fit(take(scaled.X, train_rows, all_columns(scaled.X.cols())), kept);
    scaled.X = full_scaler.apply(scaled.X);

    const Dataset train_set = scaled.subset(train_rows);
    // One fold per remaining training instance of a class (4 with five instances).
    std::set<int> classes;
    for (const auto& key : train_set.keys) classes.insert(key.fid);
    const Folds folds = stratified_cv_folds(train_set, static_cast<int>(train_rows.size() / classes.size()));

    const Selection sel = forward_select(train_set, folds, rf::ForestParams{}, options.seed, options.n_max, options.min_gain, options.threads);
    const Dataset selected = train_set.with_features(sel.features);
    const TuneResult tuned = tune(selected, folds, options.trials, options.seed, options.threads);

    TrainedModel m;
    m.dim = data.keys.front().dim;
    m.holdout_iid = options.holdout_iid;
    m.seed = options.seed;
    m.features = sel.features;
    m.targets = data.target_names;
    m.selection_path = sel.path;
    m.tuning_trials = static_cast<int>(tuned.history.trials.size());
    m.tuning_fallback = tuned.fallback;
    const auto columns = all_columns(selected.X.cols());
    m.cv = cross_validate(selected, folds, columns, tuned.params, options.seed);
    m.baseline = baseline_cv(selected, folds);
    m.forest = rf::Forest::fit(selected.X, selected.Y, tuned.params, options.seed, selected.row_ids(all_columns(selected.rows())));

    m.scaler.names = sel.features;
    m.scaler.min.resize(static_cast<Eigen::Index>(sel.features.size()));
    m.scaler.max.resize(static_cast<Eigen::Index>(sel.features.size()));
    for (std::size_t f = 0; f < sel.features.size(); ++f) {
        const auto pos = std::find(kept.begin(), kept.end(), sel.features[f]) - kept.begin();
        m.scaler.min[static_cast<Eigen::Index>(f)] = full_scaler.min[pos];
        m.scaler.max[static_cast<Eigen::Index>(f)] = full_scaler.max[pos];
    }
    m.train_keys = selected.keys;
    m.train_X = selected.X;
    m.train_Y = selected.Y;
    const Dataset test_set = scaled.subset(test_rows).with_features(sel.features);
    m.test_keys = test_set.keys;
    m.test_X = test_set.X;
    m.test_Y = test_set.Y;
    return m;
}

std::string TrainedModel::to_json() const {
    nlohmann::json j;
    j["format"] = "modfoot-model-1";
    j["dim"] = dim;
    j["holdout_iid"] = holdout_iid;
    j["seed"] = seed;
    j["features"] = features;
    j["targets"] = targets;
    j["scaler"] = {{"min", std::vector<double>(scaler.min.data(), scaler.min.data() + scaler.min.size())},
                   {"max", std::vector<double>(scaler.max.data(), scaler.max.data() + scaler.max.size())}};
    j["selection_path"] = selection_path;
    j["tuning"] = {{"trials", tuning_trials}, {"fallback", tuning_fallback}};
    j["cv"] = cv_json(cv);
    j["baseline_cv"] = cv_json(baseline);
    j["train"] = {{"keys", keys_json(train_keys)}, {"X", matrix_json(train_X)}, {"Y", matrix_json(train_Y)}};
    j["test"] = {{"keys", keys_json(test_keys)}, {"X", matrix_json(test_X)}, {"Y", matrix_json(test_Y)}};
    j["forest"] = nlohmann::json::parse(forest.to_json());
    return j.dump(1);
}

TrainedModel TrainedModel::from_json(const std::string& text) {
    TrainedModel m;
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.value("format", "") != "modfoot-model-1") throw SchemaError("model json: unknown format tag");
        m.dim = j.at("dim").get<int>();
        m.holdout_iid = j.at("holdout_iid").get<int>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.features = j.at("features").get<std::vector<std::string>>();
        m.targets = j.at("targets").get<std::vector<std::string>>();
        const auto lo = j.at("scaler").at("min").get<std::vector<double>>();
        const auto hi = j.at("scaler").at("max").get<std::vector<double>>();
        if (lo.size() != m.features.size() || hi.size() != m.features.size()) throw SchemaError("model json: scaler width mismatch");
        m.scaler.names = m.features;
        m.scaler.min = Eigen::Map<const Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
        m.scaler.max = Eigen::Map<const Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
        m.selection_path = j.at("selection_path").get<std::vector<double>>();
        m.tuning_trials = j.at("tuning").at("trials").get<int>();
        m.tuning_fallback = j.at("tuning").at("fallback").get<bool>();
        m.cv = cv_from(j.at("cv"));
        m.baseline = cv_from(j.at("baseline_cv"));
        const auto nf = static_cast<Eigen::Index>(m.features.size());
        const auto nt = static_cast<Eigen::Index>(m.targets.size());
        m.train_keys = keys_from(j.at("train").at("keys"));
        m.train_X = matrix_from(j.at("train").at("X"), nf);
        m.train_Y = matrix_from(j.at("train").at("Y"), nt);
        m.test_keys = keys_from(j.at("test").at("keys"));
        m.test_X = matrix_from(j.at("test").at("X"), nf);
        m.test_Y = matrix_from(j.at("test").at("Y"), nt);
        m.forest = rf::Forest::from_json(j.at("forest").dump());
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("model json: ") + e.what());
    }
    if (m.forest.n_features() != static_cast<int>(m.features.size()) || m.forest.n_targets() != static_cast<int>(m.targets.size()))
        throw SchemaError("model json: forest shape does not match feature/target lists");
    if (static_cast<std::size_t>(m.train_X.rows()) != m.train_keys.size() || static_cast<std::size_t>(m.test_X.rows()) != m.test_keys.size())
        throw SchemaError("model json: row counts do not match keys");
    return m;
}

}  // namespace modfoot::surrogate
