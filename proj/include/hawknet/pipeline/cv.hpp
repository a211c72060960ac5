// Stratified k-fold assignment: per-class shuffle then round-robin, giving a
// disjoint exhaustive partition whose per-fold class counts differ from the
// ideal proportion by at most one sample. The grouped variant assigns whole
// subjects to folds so no subject spans train and test.

#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawknet/rng.hpp"

namespace hawknet::pipeline {

struct FoldAssignment {
    std::vector<std::vector<int>> folds;  // segment indices per fold

    std::vector<int> train_indices(std::size_t test_fold) const {
        std::vector<int> out;
        for (std::size_t f = 0; f < folds.size(); ++f)
            if (f != test_fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
        return out;
    }
};

inline FoldAssignment stratified_kfold(std::span<const int> labels, int k, Rng& rng) {
    if (k < 1) throw std::invalid_argument("stratified_kfold: k must be >= 1");
    std::map<int, std::vector<int>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        by_class[labels[i]].push_back(static_cast<int>(i));
    for (const auto& [label, idx] : by_class)
        if (static_cast<int>(idx.size()) < k)
            throw std::invalid_argument("stratified_kfold: class " + std::to_string(label) +
                                        " has fewer samples than folds");

    FoldAssignment out;
    out.folds.assign(static_cast<std::size_t>(k), {});
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            out.folds[i % static_cast<std::size_t>(k)].push_back(idx[i]);
    }
    for (auto& fold : out.folds) std::sort(fold.begin(), fold.end());
    return out;
}

// Whole-subject assignment, stratified by each subject's majority label.
inline FoldAssignment stratified_group_kfold(std::span<const int> labels,
                                             std::span<const int> subjects, int k, Rng& rng) {
    if (labels.size() != subjects.size())
        throw std::invalid_argument("stratified_group_kfold: size mismatch");
    if (k < 1) throw std::invalid_argument("stratified_group_kfold: k must be >= 1");

    std::map<int, std::vector<int>> members;  // subject -> segment indices
    std::map<int, long> positive;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[subjects[i]].push_back(static_cast<int>(i));
        if (labels[i] == 1) ++positive[subjects[i]];
    }
    if (static_cast<int>(members.size()) < k)
        throw std::invalid_argument("stratified_group_kfold: fewer subjects than folds");

    std::map<int, std::vector<int>> subjects_by_label;  // majority label -> subject ids
    for (const auto& [subject, segs] : members) {
        const bool mostly_abnormal = 2 * positive[subject] >= static_cast<long>(segs.size());
        subjects_by_label[mostly_abnormal ? 1 : 0].push_back(subject);
    }

    FoldAssignment out;
    out.folds.assign(static_cast<std::size_t>(k), {});
    std::size_t next_fold = 0;
    for (auto& [label, subj] : subjects_by_label) {
        rng.shuffle(subj);
        for (int s : subj) {
            auto& fold = out.folds[next_fold % static_cast<std::size_t>(k)];
            fold.insert(fold.end(), members[s].begin(), members[s].end());
            ++next_fold;
        }
    }
    for (auto& fold : out.folds) std::sort(fold.begin(), fold.end());
    return out;
}

}  // namespace hawknet::pipeline
