#pragma once

#include "modfoot/ela.hpp"
#include "modfoot/modcma.hpp"
#include "modfoot/shapley.hpp"
#include "modfoot/surrogate.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace modfoot::io {

/// Shortest text that parses back to the same double.
std::string format_double(double v);
/// Throws SchemaError naming `where` on malformed or trailing text.
double parse_double(std::string_view text, const std::string& where);
int parse_int(std::string_view text, const std::string& where);
std::uint64_t parse_u64(std::string_view text, const std::string& where);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename so readers never see a partial file.
void write_file(const std::filesystem::path& path, std::string_view content);

/// Plain comma-separated table. Fields never contain commas, quotes or newlines.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string source;  // file name for diagnostics

    /// Column index; throws SchemaError when absent.
    int column(std::string_view name) const;
    std::string to_string() const;
};

/// Throws SchemaError on ragged rows, empty input or an empty header.
CsvTable parse_csv(std::string_view text, const std::string& source);
CsvTable read_csv(const std::filesystem::path& path);

// performance.csv: config_name,fid,iid,dim,seed,best_f,precision,evals_used,restarts
CsvTable performance_table(const std::vector<cma::RunResult>& runs);
std::vector<cma::RunResult> read_performance(const CsvTable& table);

// features.csv: fid,iid,dim,<46 feature columns in catalogue order>
struct FeatureTable {
    std::vector<surrogate::InstanceKey> keys;
    std::vector<std::string> names;
    Eigen::MatrixXd values;
};
CsvTable features_table(const FeatureTable& features);
/// Validates the exact feature catalogue and finite values.
FeatureTable read_features(const CsvTable& table);

// meta_d{d}.csv: fid,iid,dim,config_name,base_value,prediction,<selected features>
struct MetaTable {
    std::vector<std::string> features;
    std::vector<shap::MetaRepresentation> rows;
};
CsvTable meta_table(const MetaTable& meta);
MetaTable read_meta(const CsvTable& table);

}  // namespace modfoot::io
