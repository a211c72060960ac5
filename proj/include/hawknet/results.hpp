// Serialization of optimizer results and comparison reports: per-run CSV
// traces, JSON run summaries with deterministic file stems, the winner table
// (Wilcoxon verdicts plus Friedman footer) and simple SVG convergence plots.

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawknet/io.hpp"
#include "hawknet/optimizer.hpp"
#include "hawknet/stats.hpp"

namespace hawknet::results {

inline std::string run_file_stem(const opt::RunRecord& rec) {
    return rec.algorithm + "_" + rec.objective_id + "_d" + std::to_string(rec.dim) + "_s" +
           std::to_string(rec.seed);
}

inline std::string run_trace_csv(const opt::RunRecord& rec) {
    io::CsvWriter csv({"iter", "best_fitness"});
    for (std::size_t t = 0; t < rec.best_trace.size(); ++t)
        csv.row(t, io::format_double(rec.best_trace[t]));
    return csv.str();
}

inline nlohmann::json run_summary_json(const opt::RunRecord& rec) {
    return nlohmann::json{{"algorithm", rec.algorithm},
                          {"function", rec.objective_id},
                          {"dim", rec.dim},
                          {"seed", rec.seed},
                          {"final_fitness", rec.final_fitness},
                          {"evaluations", rec.evaluations},
                          {"wall_time", rec.wall_time_s}};
}

struct RunSummary {
    std::string algorithm;
    std::string function;
    int dim = 0;
    std::uint64_t seed = 0;
    double final_fitness = 0.0;
};

inline RunSummary run_summary_from_json(const nlohmann::json& j) {
    return RunSummary{j.at("algorithm").get<std::string>(), j.at("function").get<std::string>(),
                      j.at("dim").get<int>(), j.at("seed").get<std::uint64_t>(),
                      j.at("final_fitness").get<double>()};
}

// function -> algorithm -> final fitness samples
using ResultGrid = std::map<std::string, std::map<std::string, Vec>>;

inline ResultGrid collect_summaries(const std::filesystem::path& dir) {
    ResultGrid grid;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        if (entry.path().filename() == "manifest.json") continue;
        const auto j = nlohmann::json::parse(io::read_file(entry.path()));
        if (!j.contains("final_fitness")) continue;
        const auto s = run_summary_from_json(j);
        grid[s.function][s.algorithm].push_back(s.final_fitness);
    }
    return grid;
}

struct ComparisonReport {
    std::vector<stats::ComparisonRow> rows;  // one per (function, other algorithm)
    stats::RankTable rank_table;
    stats::FriedmanResult friedman;
    std::string reference;
};

inline ComparisonReport build_comparison(const ResultGrid& grid, const std::string& reference,
                                         double alpha = 0.05) {
    ComparisonReport report;
    report.reference = reference;

    std::set<std::string> algorithms;
    for (const auto& [fn, by_alg] : grid)
        for (const auto& [alg, values] : by_alg) algorithms.insert(alg);
    if (!algorithms.count(reference))
        throw std::invalid_argument("comparison: reference algorithm '" + reference +
                                    "' not present");
    for (const auto& [fn, by_alg] : grid)
        if (by_alg.size() != algorithms.size())
            throw std::invalid_argument("comparison: function '" + fn +
                                        "' is missing results for some algorithms");

    report.rank_table.algorithms.assign(algorithms.begin(), algorithms.end());
    for (const auto& [fn, by_alg] : grid) {
        report.rank_table.functions.push_back(fn);
        Vec row;
        for (const auto& alg : report.rank_table.algorithms)
            row.push_back(stats::summarize(by_alg.at(alg)).mean);
        report.rank_table.cells.push_back(std::move(row));

        const stats::SampleSet ref{by_alg.at(reference), reference};
        for (const auto& [alg, values] : by_alg) {
            if (alg == reference) continue;
            report.rows.push_back(stats::compare_samples(fn, ref, {values, alg}, alpha));
        }
    }
    report.friedman = stats::friedman_mean_rank(report.rank_table);
    return report;
}

inline std::string comparison_csv(const ComparisonReport& report) {
    io::CsvWriter csv({"function", "other_algorithm", "p_value", "verdict"});
    for (const auto& row : report.rows)
        csv.row(row.function, row.other,
                row.degenerate ? std::string("NaN") : io::format_double(row.p_value),
                std::string(1, row.verdict));
    std::ostringstream out;
    out << csv.str();
    out << "\n# Friedman mean rank (lower is better)\n";
    for (std::size_t i = 0; i < report.friedman.ordering.size(); ++i) {
        const std::size_t a = report.friedman.ordering[i];
        out << "# rank " << (i + 1) << ": " << report.rank_table.algorithms[a] << " = "
            << io::format_double(report.friedman.mean_rank[a]) << "\n";
    }
    return out.str();
}

// Log-scale convergence curves, one polyline per algorithm. Fitness values
// are floored at 1e-300 so zero-reaching runs stay plottable.
inline std::string svg_convergence_plot(const std::string& title,
                                        const std::map<std::string, Vec>& traces_by_algorithm) {
    constexpr int W = 760, H = 420, ML = 70, MR = 160, MT = 40, MB = 50;
    const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                             "#ff7f0e", "#8c564b", "#17becf"};

    double lo = 0.0, hi = -300.0;
    std::size_t t_max = 2;
    for (const auto& [alg, trace] : traces_by_algorithm) {
        t_max = std::max(t_max, trace.size());
        for (double v : trace) {
            const double lv = std::log10(std::max(v, 1e-300));
            lo = std::min(lo, lv);
            hi = std::max(hi, lv);
        }
    }
    if (hi <= lo) hi = lo + 1.0;

    auto xm = [&](std::size_t t) {
        return ML + (W - ML - MR) * static_cast<double>(t) / static_cast<double>(t_max - 1);
    };
    auto ym = [&](double lv) { return MT + (H - MT - MB) * (hi - lv) / (hi - lo); };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title
        << "</text>\n";
    svg << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
        << H - MB << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << (ML + W - MR) / 2 << "\" y=\"" << H - 14
        << "\" text-anchor=\"middle\" font-size=\"12\">iteration</text>\n";
    svg << "<text x=\"18\" y=\"" << (MT + H - MB) / 2
        << "\" font-size=\"12\" transform=\"rotate(-90 18 " << (MT + H - MB) / 2
        << ")\" text-anchor=\"middle\">log10 best fitness</text>\n";
    for (int g = 0; g <= 4; ++g) {
        const double lv = hi - (hi - lo) * g / 4.0;
        svg << "<text x=\"" << ML - 8 << "\" y=\"" << ym(lv) + 4
            << "\" text-anchor=\"end\" font-size=\"10\">" << static_cast<int>(std::round(lv))
            << "</text>\n";
    }

    int color = 0;
    for (const auto& [alg, trace] : traces_by_algorithm) {
        svg << "<polyline fill=\"none\" stroke=\"" << palette[color % 7]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t t = 0; t < trace.size(); ++t)
            svg << xm(t) << "," << ym(std::log10(std::max(trace[t], 1e-300))) << " ";
        svg << "\"/>\n";
        svg << "<text x=\"" << W - MR + 10 << "\" y=\"" << MT + 16 + 16 * color
            << "\" font-size=\"12\" fill=\"" << palette[color % 7] << "\">" << alg << "</text>\n";
        ++color;
    }
    svg << "</svg>\n";
    return svg.str();
}

}  // namespace hawknet::results
