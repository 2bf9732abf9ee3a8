#include "modfoot/table_io.hpp"

#include "modfoot/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace modfoot::io {

namespace {

const std::vector<std::string> kPerformanceHeader = {"config_name", "fid", "iid", "dim", "seed", "best_f", "precision", "evals_used", "restarts"};
const std::vector<std::string> kMetaPrefix = {"fid", "iid", "dim", "config_name", "base_value", "prediction"};

std::string where(const CsvTable& t, std::size_t row, std::string_view col) {
    return t.source + " row " + std::to_string(row + 2) + " column '" + std::string(col) + "'";
}

template <class T>
T parse_integer(std::string_view text, const std::string& where) {
    T v{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) throw SchemaError(where + ": expected an integer, got '" + std::string(text) + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw ContractError("format_double: conversion failed");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty()) throw SchemaError(where + ": expected a number, got '" + std::string(text) + "'");
    return v;
}

int parse_int(std::string_view text, const std::string& where) { return parse_integer<int>(text, where); }
std::uint64_t parse_u64(std::string_view text, const std::string& where) { return parse_integer<std::uint64_t>(text, where); }

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw SchemaError(source + ": missing column '" + std::string(name) + "'");
}

std::string CsvTable::to_string() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

CsvTable parse_csv(std::string_view text, const std::string& source) {
    CsvTable t;
    t.source = source;
    std::size_t pos = 0;
    bool first = true;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t s = 0;
        while (true) {
            const auto c = line.find(',', s);
            cells.emplace_back(line.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
            if (c == std::string_view::npos) break;
            s = c + 1;
        }
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw SchemaError(source + " line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                                  " fields, found " + std::to_string(cells.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (t.header.empty()) throw SchemaError(source + ": empty file");
    return t;
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path), path.filename().string()); }

CsvTable performance_table(const std::vector<cma::RunResult>& runs) {
    CsvTable t;
    t.header = kPerformanceHeader;
    for (const auto& r : runs)
        t.rows.push_back({r.config_name, std::to_string(r.fid), std::to_string(r.iid), std::to_string(r.dim), std::to_string(r.seed),
                          format_double(r.best_f), format_double(r.precision), std::to_string(r.evals_used), std::to_string(r.restarts)});
    return t;
}

std::vector<cma::RunResult> read_performance(const CsvTable& t) {
    if (t.header != kPerformanceHeader) throw SchemaError(t.source + ": performance header must be config_name,fid,iid,dim,seed,best_f,precision,evals_used,restarts");
    std::vector<cma::RunResult> runs;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        cma::RunResult x;
        x.config_name = r[0];
        if (x.config_name.empty()) throw SchemaError(where(t, i, "config_name") + ": empty");
        x.fid = parse_int(r[1], where(t, i, "fid"));
        x.iid = parse_int(r[2], where(t, i, "iid"));
        x.dim = parse_int(r[3], where(t, i, "dim"));
        x.seed = parse_u64(r[4], where(t, i, "seed"));
        x.best_f = parse_double(r[5], where(t, i, "best_f"));
        x.precision = parse_double(r[6], where(t, i, "precision"));
        x.evals_used = parse_int(r[7], where(t, i, "evals_used"));
        x.restarts = parse_int(r[8], where(t, i, "restarts"));
        if (!std::isfinite(x.precision) || x.precision < 0.0) throw SchemaError(where(t, i, "precision") + ": must be finite and >= 0");
        runs.push_back(std::move(x));
    }
    return runs;
}

CsvTable features_table(const FeatureTable& f) {
    CsvTable t;
    t.header = {"fid", "iid", "dim"};
    t.header.insert(t.header.end(), f.names.begin(), f.names.end());
    for (std::size_t i = 0; i < f.keys.size(); ++i) {
        std::vector<std::string> row = {std::to_string(f.keys[i].fid), std::to_string(f.keys[i].iid), std::to_string(f.keys[i].dim)};
        for (Eigen::Index c = 0; c < f.values.cols(); ++c) row.push_back(format_double(f.values(static_cast<Eigen::Index>(i), c)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

FeatureTable read_features(const CsvTable& t) {
    const auto& names = ela::feature_names();
    if (t.header.size() != names.size() + 3 || t.header[0] != "fid" || t.header[1] != "iid" || t.header[2] != "dim")
        throw SchemaError(t.source + ": expected fid,iid,dim followed by " + std::to_string(names.size()) + " feature columns, found " +
                          std::to_string(t.header.size()) + " columns");
    for (std::size_t i = 0; i < names.size(); ++i)
        if (t.header[i + 3] != names[i])
            throw SchemaError(t.source + ": column " + std::to_string(i + 4) + " should be '" + names[i] + "', found '" + t.header[i + 3] + "'");
    FeatureTable f;
    f.names = names;
    f.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        f.keys.push_back({parse_int(r[0], where(t, i, "fid")), parse_int(r[1], where(t, i, "iid")), parse_int(r[2], where(t, i, "dim"))});
        for (std::size_t c = 0; c < names.size(); ++c) {
            const double v = parse_double(r[c + 3], where(t, i, names[c]));
            if (!std::isfinite(v)) throw SchemaError(where(t, i, names[c]) + ": non-finite value");
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = v;
        }
    }
    return f;
}

CsvTable meta_table(const MetaTable& m) {
    CsvTable t;
    t.header = kMetaPrefix;
    t.header.insert(t.header.end(), m.features.begin(), m.features.end());
    for (const auto& r : m.rows) {
        std::vector<std::string> row = {std::to_string(r.key.fid), std::to_string(r.key.iid), std::to_string(r.key.dim), r.config_name,
                                        format_double(r.base_value), format_double(r.prediction)};
        for (Eigen::Index c = 0; c < r.shap.size(); ++c) row.push_back(format_double(r.shap[c]));
        t.rows.push_back(std::move(row));
    }
    return t;
}

MetaTable read_meta(const CsvTable& t) {
    if (t.header.size() <= kMetaPrefix.size() || !std::equal(kMetaPrefix.begin(), kMetaPrefix.end(), t.header.begin()))
        throw SchemaError(t.source + ": meta header must start with fid,iid,dim,config_name,base_value,prediction and list features");
    MetaTable m;
    m.features.assign(t.header.begin() + static_cast<std::ptrdiff_t>(kMetaPrefix.size()), t.header.end());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        shap::MetaRepresentation x;
        x.key = {parse_int(r[0], where(t, i, "fid")), parse_int(r[1], where(t, i, "iid")), parse_int(r[2], where(t, i, "dim"))};
        x.config_name = r[3];
        x.base_value = parse_double(r[4], where(t, i, "base_value"));
        x.prediction = parse_double(r[5], where(t, i, "prediction"));
        x.shap.resize(static_cast<Eigen::Index>(m.features.size()));
        for (std::size_t c = 0; c < m.features.size(); ++c) x.shap[static_cast<Eigen::Index>(c)] = parse_double(r[c + kMetaPrefix.size()], where(t, i, m.features[c]));
        m.rows.push_back(std::move(x));
    }
    return m;
}

}  // namespace modfoot::io
