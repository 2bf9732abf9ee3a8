#pragma once

#include "modfoot/error.hpp"
#include "modfoot/footprint.hpp"
#include "modfoot/modcma.hpp"
#include "modfoot/shapley.hpp"
#include "modfoot/surrogate.hpp"
#include "modfoot/table_io.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace modfoot::pipeline {

/// A stage that could not complete. `file` names the offending input or the
/// output being produced.
class StageFailure : public Error {
public:
    StageFailure(std::string stage, std::string file, const std::string& message);
    const std::string& stage() const { return stage_; }
    const std::string& file() const { return file_; }

private:
    std::string stage_;
    std::string file_;
};

struct PipelineConfig {
    std::vector<int> dims = {5};
    std::vector<int> fids;       // defaults to 1..24
    std::vector<int> instances = {1, 2, 3, 4, 5};
    std::vector<std::string> presets;  // defaults to the six presets
    int budget_mult = 1500;
    int seeds = 5;
    int ela_n_mult = 100;
    int ela_reps = 10;
    int holdout_iid = 5;
    int trials = 50;
    std::string out_dir = "artifacts";
    std::uint64_t seed = 1;
    int threads = 0;  // never affects results

    PipelineConfig();
    /// Throws InvalidArgument describing the first violated rule.
    void validate() const;
    static PipelineConfig from_json(const std::string& text);
    std::string to_json() const;
};

/// Throws InvalidArgument unless dims is a non-empty, duplicate-free subset of
/// {2,3,5,10,20,30,40}.
void validate_dims(const std::vector<int>& dims);

/// Seed of run s (0-based) under a master seed.
std::uint64_t run_seed(std::uint64_t master_seed, int s);

std::vector<cma::RunResult> run_performance(const std::vector<int>& dims, const std::vector<int>& fids,
                                            const std::vector<int>& iids, const std::vector<std::string>& presets,
                                            int seeds, int budget_mult, std::uint64_t master_seed, int threads);

io::FeatureTable compute_feature_table(const std::vector<int>& dims, const std::vector<int>& fids, const std::vector<int>& iids,
                                       int n_mult, int reps, std::uint64_t master_seed, int threads);

/// Instance parameters for audit: fid, iid, dim, x_opt, f_opt, rotations.
std::string export_instances(const std::vector<int>& dims, const std::vector<int>& fids, const std::vector<int>& iids);

/// Rows of one dimension joined with their targets. Config order follows
/// `presets` when given, otherwise first appearance in the runs.
surrogate::Dataset dataset_for(const io::FeatureTable& features, const std::vector<cma::RunResult>& runs, int dim,
                               std::vector<std::string> presets = {});

/// Meta rows of a model's test split.
io::MetaTable explain(const surrogate::TrainedModel& model, int threads);

/// Footprint of a meta table with ground truth taken from the runs.
footprint::FootprintReport build_footprint(const io::MetaTable& meta, const std::vector<cma::RunResult>& runs, int threads);

struct StageOutcome {
    std::string name;
    bool skipped = false;
};

/// Runs every stage in order, skipping a stage when its recorded input hash
/// matches and its outputs are unchanged. Throws StageFailure.
std::vector<StageOutcome> run_pipeline(const PipelineConfig& config, std::ostream* log = nullptr);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace modfoot::pipeline
