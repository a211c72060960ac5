// Nonparametric comparison machinery: two-sample Wilcoxon rank-sum test and
// Friedman mean-rank ordering.
//
// The rank-sum test uses exact enumeration of the null distribution (dynamic
// programming over tie groups, counting subsets by their doubled rank sum)
// when the smaller sample has at most eight observations, and the tie-corrected
// normal approximation with a 0.5 continuity correction otherwise. Two-sided
// p-values are twice the smaller tail, capped at 1. When every pooled value is
// identical the test is undefined and the result carries a degenerate flag
// instead of a p-value.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawknet/linalg.hpp"

namespace hawknet::stats {

struct SampleSet {
    Vec values;  // one final fitness per run
    std::string label;
};

struct WilcoxonResult {
    double p_value = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;  // all pooled values equal; p undefined
    double rank_sum = 0.0;    // observed rank sum of the first sample
};

enum class WilcoxonMethod { automatic, exact, normal_approx };

namespace detail {

struct PooledRanks {
    Vec ranks_a;       // average ranks of sample a in the pooled ordering
    double w = 0.0;    // rank sum of sample a
    // tie groups over the pooled sample: (count, doubled average rank)
    std::vector<std::pair<long, long>> groups;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    bool constant = false;
};

inline PooledRanks pool_and_rank(const Vec& a, const Vec& b) {
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, int>> pooled;
    pooled.reserve(n);
    for (double v : a) pooled.emplace_back(v, 0);
    for (double v : b) pooled.emplace_back(v, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    PooledRanks out;
    out.constant = pooled.front().first == pooled.back().first;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && pooled[j].first == pooled[i].first) ++j;
        const long count = static_cast<long>(j - i);
        // ranks i+1 .. j averaged; doubled value keeps integer arithmetic
        const long doubled_rank = static_cast<long>(i + 1 + j);
        const double rank = 0.5 * static_cast<double>(doubled_rank);
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].second == 0) {
                out.w += rank;
                out.ranks_a.push_back(rank);
            }
        out.groups.emplace_back(count, doubled_rank);
        out.tie_term += static_cast<double>(count) * count * count - count;
        i = j;
    }
    return out;
}

// Null distribution of the doubled rank sum of an n_a-subset, as subset
// counts indexed by doubled-rank-sum. Counts are held in doubles; they are
// exact integers until they exceed 2^53. Any k-subset's doubled sum is at
// most k times the largest doubled rank, which bounds the table width.
inline std::vector<Vec> rank_sum_distribution(const PooledRanks& pr, long n_a) {
    long max_dr = 0;
    for (const auto& [count, dr] : pr.groups) max_dr = std::max(max_dr, dr);
    const long bound = n_a * max_dr;
    std::vector<Vec> ways(static_cast<std::size_t>(n_a) + 1,
                          Vec(static_cast<std::size_t>(bound) + 1, 0.0));
    ways[0][0] = 1.0;
    long used = 0;
    for (const auto& [count, dr] : pr.groups) {
        used += count;
        const long k_hi = std::min<long>(n_a, used);
        for (long k = k_hi; k >= 1; --k) {
            const long take_hi = std::min<long>(count, k);
            for (long take = 1; take <= take_hi; ++take) {
                // choose(count, take) ways to pick `take` tied elements
                double comb = 1.0;
                for (long c = 0; c < take; ++c)
                    comb = comb * static_cast<double>(count - c) / static_cast<double>(c + 1);
                const long shift = take * dr;
                Vec& dst = ways[static_cast<std::size_t>(k)];
                const Vec& src = ways[static_cast<std::size_t>(k - take)];
                for (long s = bound - shift; s >= 0; --s) {
                    const double add = src[static_cast<std::size_t>(s)];
                    if (add != 0.0) dst[static_cast<std::size_t>(s + shift)] += comb * add;
                }
            }
        }
    }
    return ways;
}

inline double exact_two_sided_p(const PooledRanks& pr, long n_a, double w_obs) {
    const auto ways = rank_sum_distribution(pr, n_a);
    const Vec& dist = ways[static_cast<std::size_t>(n_a)];
    const long dw_obs = std::llround(2.0 * w_obs);
    double total = 0.0, lo = 0.0, hi = 0.0;
    for (long s = 0; s < static_cast<long>(dist.size()); ++s) {
        const double c = dist[static_cast<std::size_t>(s)];
        if (c == 0.0) continue;
        total += c;
        if (s <= dw_obs) lo += c;
        if (s >= dw_obs) hi += c;
    }
    return std::min(1.0, 2.0 * std::min(lo, hi) / total);
}

inline double approx_two_sided_p(const PooledRanks& pr, long n_a, long n_b, double w_obs,
                                 bool* degenerate) {
    const double n = static_cast<double>(n_a + n_b);
    const double mu = static_cast<double>(n_a) * (n + 1.0) / 2.0;
    const double correction = pr.tie_term / (n * (n - 1.0));
    const double var =
        static_cast<double>(n_a) * static_cast<double>(n_b) / 12.0 * ((n + 1.0) - correction);
    if (var <= 0.0) {
        *degenerate = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    // continuity correction: shift half a rank toward the mean
    const double z = std::max(std::abs(w_obs - mu) - 0.5, 0.0) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::numbers::sqrt2));
}

}  // namespace detail

inline WilcoxonResult wilcoxon_rank_sum(const SampleSet& a, const SampleSet& b,
                                        WilcoxonMethod method = WilcoxonMethod::automatic) {
    if (a.values.empty() || b.values.empty())
        throw std::invalid_argument("wilcoxon_rank_sum: both samples must be non-empty");
    for (const auto* s : {&a, &b})
        for (double v : s->values)
            if (!std::isfinite(v))
                throw std::invalid_argument("wilcoxon_rank_sum: samples must be finite");

    const auto pr = detail::pool_and_rank(a.values, b.values);
    WilcoxonResult res;
    res.rank_sum = pr.w;
    if (pr.constant) {
        res.degenerate = true;
        return res;
    }
    const long n_a = static_cast<long>(a.values.size());
    const long n_b = static_cast<long>(b.values.size());
    const bool exact = method == WilcoxonMethod::exact ||
                       (method == WilcoxonMethod::automatic && std::min(n_a, n_b) <= 8);
    if (exact) {
        res.p_value = detail::exact_two_sided_p(pr, n_a, pr.w);
    } else {
        res.p_value = detail::approx_two_sided_p(pr, n_a, n_b, pr.w, &res.degenerate);
    }
    return res;
}

// Mean-rank table across functions (rows) and algorithms (columns); cells are
// mean final fitnesses, smaller is better.
struct RankTable {
    std::vector<std::string> functions;
    std::vector<std::string> algorithms;
    std::vector<Vec> cells;  // cells[f][a]
};

struct FriedmanResult {
    Vec mean_rank;                            // per algorithm
    std::vector<std::size_t> ordering;        // algorithm indices, best first
    std::vector<Vec> per_function_ranks;      // ranks[f][a], average-rank ties
};

// Average-rank assignment of one row, rank 1 for the smallest value.
inline Vec rank_row(const Vec& row) {
    const std::size_t n = row.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return row[i] < row[j]; });
    Vec ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && row[order[j]] == row[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
        i = j;
    }
    return ranks;
}

inline FriedmanResult friedman_mean_rank(const RankTable& table) {
    const std::size_t n_alg = table.algorithms.size();
    const std::size_t n_fun = table.functions.size();
    if (n_alg < 2 || n_fun < 2)
        throw std::invalid_argument("friedman_mean_rank: need >= 2 algorithms and >= 2 functions");
    if (table.cells.size() != n_fun)
        throw std::invalid_argument("friedman_mean_rank: row count mismatch");

    FriedmanResult res;
    res.mean_rank.assign(n_alg, 0.0);
    for (const Vec& row : table.cells) {
        if (row.size() != n_alg)
            throw std::invalid_argument("friedman_mean_rank: column count mismatch");
        for (double v : row)
            if (!std::isfinite(v))
                throw std::invalid_argument("friedman_mean_rank: cells must be finite");
        Vec ranks = rank_row(row);
        for (std::size_t a = 0; a < n_alg; ++a) res.mean_rank[a] += ranks[a];
        res.per_function_ranks.push_back(std::move(ranks));
    }
    for (double& r : res.mean_rank) r /= static_cast<double>(n_fun);

    res.ordering.resize(n_alg);
    std::iota(res.ordering.begin(), res.ordering.end(), 0);
    std::stable_sort(res.ordering.begin(), res.ordering.end(), [&](std::size_t i, std::size_t j) {
        return res.mean_rank[i] < res.mean_rank[j];
    });
    return res;
}

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation (n-1); 0 when n == 1
    std::size_t n = 0;
};

inline Summary summarize(const Vec& values) {
    if (values.empty()) throw std::invalid_argument("summarize: need at least one value");
    Summary s;
    s.n = values.size();
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double acc = 0.0;
        for (double v : values) acc += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(acc / static_cast<double>(s.n - 1));
    }
    return s;
}

// One row of a reference-vs-other comparison: '+' means the reference
// algorithm is significantly better at level alpha, '-' significantly worse,
// '=' not significant or degenerate.
struct ComparisonRow {
    std::string function;
    std::string other;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    char verdict = '=';
};

inline char comparison_verdict(const WilcoxonResult& w, double mean_ref, double mean_other,
                               double alpha = 0.05) {
    if (w.degenerate || !(w.p_value < alpha)) return '=';
    return mean_ref <= mean_other ? '+' : '-';
}

inline ComparisonRow compare_samples(const std::string& function, const SampleSet& reference,
                                     const SampleSet& other, double alpha = 0.05) {
    const auto w = wilcoxon_rank_sum(reference, other);
    ComparisonRow row;
    row.function = function;
    row.other = other.label;
    row.p_value = w.p_value;
    row.degenerate = w.degenerate;
    row.verdict = comparison_verdict(w, summarize(reference.values).mean,
                                     summarize(other.values).mean, alpha);
    return row;
}

}  // namespace hawknet::stats
