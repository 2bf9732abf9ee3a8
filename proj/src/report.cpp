#include "modfoot/report.hpp"

#include "modfoot/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

namespace modfoot::report {

namespace {

std::string num(double v, int digits = 2) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string rgb(double r, double g, double b) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r)), static_cast<int>(std::lround(g)), static_cast<int>(std::lround(b)));
    return buf;
}

// Sequential ramp from dark blue (good, low values) to yellow (poor).
std::string ramp(double t) {
    static constexpr std::array<std::array<double, 3>, 5> stops = {{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
    if (!std::isfinite(t)) t = 0.0;
    t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
    const double f = t - static_cast<double>(i);
    return rgb(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]), stops[i][1] + f * (stops[i + 1][1] - stops[i][1]),
               stops[i][2] + f * (stops[i + 1][2] - stops[i][2]));
}

const char* category(int i) {
    static constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                              "#bcbd22", "#17becf", "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173"};
    return palette[static_cast<std::size_t>(i) % std::size(palette)];
}

struct Svg {
    std::string body;
    double width;
    double height;

    Svg(double w, double h) : width(w), height(h) {}

    void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "start") {
        body += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const char* stroke = "none") {
        body += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill) {
        body += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\" fill-opacity=\"0.85\"/>\n";
    }
    void line(double x1, double y1, double x2, double y2, const char* stroke = "#999", double w = 1.0) {
        body += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(w) + "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
        body += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i) body += (i ? " " : "") + num(pts[i].first) + "," + num(pts[i].second);
        body += "\"/>\n";
    }
    std::string str() const {
        return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
               num(height, 0) + "\" viewBox=\"0 0 " + num(width, 0) + " " + num(height, 0) + "\" font-family=\"sans-serif\">\n" +
               "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body + "</svg>\n";
    }
};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    double frac(double v) const { return hi > lo ? (v - lo) / (hi - lo) : 0.5; }
};

void colour_bar(Svg& svg, double x, double y, double h, const Range& r, const std::string& title) {
    constexpr int steps = 40;
    for (int i = 0; i < steps; ++i) svg.rect(x, y + h * (steps - 1 - i) / steps, 12, h / steps + 0.5, ramp(static_cast<double>(i) / (steps - 1)));
    svg.text(x + 16, y + 8, num(r.hi), 9);
    svg.text(x + 16, y + h, num(r.lo), 9);
    svg.text(x, y - 6, title, 9);
}

}  // namespace

std::string truth_scatter_svg(const footprint::FootprintReport& rep) {
    constexpr double panel = 240, pad = 40;
    const int cols = 3;
    const int rows = static_cast<int>((rep.configs.size() + cols - 1) / cols);
    Svg svg(cols * (panel + pad) + 80, rows * (panel + pad) + 40);
    Range u, v, t;
    for (const auto& e : rep.entries) {
        u.add(e.u);
        v.add(e.v);
        t.add(e.target);
    }
    svg.text(10, 18, "Projected meta-representations coloured by log10 precision (d=" + std::to_string(rep.dim) + ")", 13);
    for (std::size_t c = 0; c < rep.configs.size(); ++c) {
        const double x0 = pad / 2 + static_cast<double>(c % cols) * (panel + pad);
        const double y0 = 40 + static_cast<double>(c / cols) * (panel + pad);
        svg.rect(x0, y0, panel, panel, "none", "#ccc");
        svg.text(x0 + panel / 2, y0 - 4, rep.configs[c], 11, "middle");
        for (const auto& e : rep.entries) {
            if (e.config_name != rep.configs[c]) continue;
            svg.circle(x0 + 6 + u.frac(e.u) * (panel - 12), y0 + panel - 6 - v.frac(e.v) * (panel - 12), 3.5, ramp(t.frac(e.target)));
        }
    }
    colour_bar(svg, cols * (panel + pad) + 20, 60, 200, t, "target");
    return svg.str();
}

std::string cluster_scatter_svg(const footprint::FootprintReport& rep) {
    constexpr double panel = 420;
    Svg svg(panel + 160, panel + 70);
    Range u, v;
    for (const auto& e : rep.entries) {
        u.add(e.u);
        v.add(e.v);
    }
    svg.text(10, 18, "Clusters (" + footprint::to_string(rep.metric) + ", k=" + std::to_string(rep.k) + ", silhouette " + num(rep.silhouette, 3) + ")", 13);
    svg.rect(20, 40, panel, panel, "none", "#ccc");
    for (const auto& e : rep.entries) svg.circle(26 + u.frac(e.u) * (panel - 12), 40 + panel - 6 - v.frac(e.v) * (panel - 12), 3.5, category(e.label - 1));
    for (int c = 1; c <= rep.k; ++c) {
        svg.rect(panel + 40, 40 + 18.0 * (c - 1), 10, 10, category(c - 1));
        const double mean = static_cast<std::size_t>(c - 1) < rep.cluster_means.size() ? rep.cluster_means[static_cast<std::size_t>(c - 1)] : 0.0;
        svg.text(panel + 56, 49 + 18.0 * (c - 1), "C" + std::to_string(c) + " mean " + num(mean), 10);
    }
    return svg.str();
}

std::string coverage_svg(const footprint::FootprintReport& rep) {
    const auto& cov = rep.coverage;
    constexpr double cell = 18, left = 200, top = 50;
    const auto n_rows = cov.cells.size();
    Svg svg(left + cell * static_cast<double>(cov.fids.size()) + 90, top + cell * static_cast<double>(n_rows) + 30);
    Range t;
    for (const auto& row : cov.cells)
        for (const auto& c : row)
            if (c) t.add(*c);
    svg.text(10, 18, "Coverage matrix: rows (config, cluster ascending), columns problem id", 13);
    for (std::size_t f = 0; f < cov.fids.size(); ++f) svg.text(left + cell * (static_cast<double>(f) + 0.5), top - 6, std::to_string(cov.fids[f]), 9, "middle");
    for (std::size_t r = 0; r < n_rows; ++r) {
        const double y = top + cell * static_cast<double>(r);
        const auto cfg = r / static_cast<std::size_t>(cov.k);
        const int cluster = static_cast<int>(r % static_cast<std::size_t>(cov.k)) + 1;
        svg.text(left - 6, y + cell - 5, cov.configs[cfg] + " / C" + std::to_string(cluster), 9, "end");
        for (std::size_t f = 0; f < cov.fids.size(); ++f) {
            const auto& c = cov.cells[r][f];
            svg.rect(left + cell * static_cast<double>(f), y, cell - 1, cell - 1, c ? ramp(t.frac(*c)) : std::string("#f2f2f2"));
        }
        if (cluster == cov.k) svg.line(left, y + cell - 0.5, left + cell * static_cast<double>(cov.fids.size()), y + cell - 0.5, "#333", 1.0);
    }
    if (t.hi >= t.lo) colour_bar(svg, left + cell * static_cast<double>(cov.fids.size()) + 20, top + 10, 160, t, "target");
    return svg.str();
}

std::string decision_svg(const io::MetaTable& meta, int fid, int iid, int dim) {
    std::vector<const shap::MetaRepresentation*> rows;
    for (const auto& r : meta.rows)
        if (r.key.fid == fid && r.key.iid == iid && r.key.dim == dim) rows.push_back(&r);
    if (rows.empty()) throw SchemaError("decision plot: no meta rows for f" + std::to_string(fid) + " iid " + std::to_string(iid));
    const auto n = meta.features.size();
    std::vector<double> importance(n, 0.0);
    for (const auto* r : rows)
        for (std::size_t f = 0; f < n; ++f) importance[f] += std::abs(r->shap[static_cast<Eigen::Index>(f)]);
    std::vector<std::size_t> order(n);
    for (std::size_t f = 0; f < n; ++f) order[f] = f;
    // Bottom to top: least important first, so the curve ends at the most important feature.
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return importance[a] < importance[b]; });

    Range x, pred;
    for (const auto* r : rows) {
        double acc = r->base_value;
        x.add(acc);
        for (const auto f : order) {
            acc += r->shap[static_cast<Eigen::Index>(f)];
            x.add(acc);
        }
        x.add(r->prediction);
        pred.add(r->prediction);
    }
    constexpr double left = 230, top = 40, width = 380, step = 26;
    const double height = step * static_cast<double>(n);
    Svg svg(left + width + 200, top + height + 60);
    svg.text(10, 18, "Decision plot f" + std::to_string(fid) + " instance " + std::to_string(iid) + " (d=" + std::to_string(dim) + ")", 13);
    auto px = [&](double v) { return left + x.frac(v) * width; };
    auto py = [&](std::size_t level) { return top + height - step * static_cast<double>(level); };
    for (std::size_t l = 0; l < n; ++l) {
        svg.line(left, py(l + 1), left + width, py(l + 1), "#eee");
        svg.text(left - 6, py(l + 1) + 4, meta.features[order[l]], 10, "end");
    }
    svg.line(left, top + height, left + width, top + height, "#333");
    svg.text(left, top + height + 16, num(x.lo), 9, "middle");
    svg.text(left + width, top + height + 16, num(x.hi), 9, "middle");
    svg.text(left + width / 2, top + height + 32, "predicted log10 precision", 10, "middle");
    for (std::size_t c = 0; c < rows.size(); ++c) {
        const auto* r = rows[c];
        std::vector<std::pair<double, double>> pts;
        double acc = r->base_value;
        pts.emplace_back(px(acc), py(0));
        for (std::size_t l = 0; l < n; ++l) {
            acc += r->shap[static_cast<Eigen::Index>(order[l])];
            pts.emplace_back(px(acc), py(l + 1));
        }
        const auto colour = ramp(pred.frac(r->prediction));
        svg.polyline(pts, colour);
        svg.rect(left + width + 20, top + 16.0 * static_cast<double>(c), 10, 10, colour);
        svg.text(left + width + 36, top + 9 + 16.0 * static_cast<double>(c), r->config_name + " (" + num(r->prediction) + ")", 10);
    }
    return svg.str();
}

std::string summary_text(const footprint::FootprintReport& rep, int top) {
    std::string out;
    out += "dimension: " + std::to_string(rep.dim) + "\n";
    out += "clustering: " + footprint::to_string(rep.metric) + ", k=" + std::to_string(rep.k) + ", silhouette=" + num(rep.silhouette, 4) + "\n";
    out += "pairs: " + std::to_string(rep.entries.size()) + "\n\n";
    for (int c = 1; c <= rep.k; ++c) {
        const auto i = static_cast<std::size_t>(c - 1);
        out += "cluster " + std::to_string(c) + ": size " + std::to_string(rep.cluster_sizes.at(i)) + ", mean target " + num(rep.cluster_means.at(i), 3) + "\n";
        std::map<std::string, int> per_config;
        for (const auto& e : rep.entries)
            if (e.label == c) ++per_config[e.config_name];
        out += "  members:";
        for (const auto& cfg : rep.configs)
            if (per_config.count(cfg)) out += " " + cfg + "=" + std::to_string(per_config[cfg]);
        out += "\n";
        const auto& table = rep.cluster_features.at(i);
        for (int r = 0; r < top && r < static_cast<int>(table.size()); ++r) {
            const auto& f = table[static_cast<std::size_t>(r)];
            out += "  " + std::to_string(r + 1) + ". " + f.name + "  mean|shap|=" + num(f.mean_abs, 4) + "  mean shap=" + num(f.mean_signed, 4) + "\n";
        }
    }
    out += "\ncluster agreement between configs:\n";
    for (std::size_t a = 0; a < rep.configs.size(); ++a) {
        out += "  " + rep.configs[a] + ":";
        for (std::size_t b = 0; b < rep.configs.size(); ++b) out += " " + num(rep.similarity[a][b].agreement, 3);
        out += "\n";
    }
    out += "\nmean cosine similarity between configs:\n";
    for (std::size_t a = 0; a < rep.configs.size(); ++a) {
        out += "  " + rep.configs[a] + ":";
        for (std::size_t b = 0; b < rep.configs.size(); ++b) out += " " + num(rep.similarity[a][b].cosine, 3);
        out += "\n";
    }
    return out;
}

std::vector<std::string> render_report(const footprint::FootprintReport& rep, const io::MetaTable& meta, const std::filesystem::path& out_dir) {
    if (meta.features != rep.features) throw SchemaError("report: meta features differ from the footprint feature list");
    if (meta.rows.size() != rep.entries.size()) throw SchemaError("report: meta rows and footprint labels differ in count");
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        io::write_file(out_dir / name, content);
        written.push_back(name);
    };
    emit("scatter_truth.svg", truth_scatter_svg(rep));
    emit("scatter_clusters.svg", cluster_scatter_svg(rep));
    emit("coverage.svg", coverage_svg(rep));
    std::set<surrogate::InstanceKey> instances;
    for (const auto& r : meta.rows) instances.insert(r.key);
    for (const auto& k : instances) {
        char name[64];
        std::snprintf(name, sizeof name, "decision_f%02d_i%d.svg", k.fid, k.iid);
        emit(name, decision_svg(meta, k.fid, k.iid, k.dim));
    }
    emit("summary.txt", summary_text(rep));
    std::sort(written.begin(), written.end());
    return written;
}

}  // namespace modfoot::report
