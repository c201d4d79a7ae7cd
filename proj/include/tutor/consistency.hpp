#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/llm_gateway.hpp"
#include "tutor/prompting.hpp"

namespace tutor {

using TokenSet = std::set<std::string>;

/// Code removed (fenced blocks and inline spans), lowercased, split on
/// non-alphanumerics.
TokenSet canonicalize(std::string_view text);

/// Jaccard index; two empty sets are identical (1.0).
double similarity(const TokenSet& a, const TokenSet& b);

inline constexpr double kDefaultSimilarityThreshold = 0.6;

struct VoteOutcome {
    std::string chosen;
    std::size_t chosen_index = 0;
    std::size_t cluster_size = 0;
    std::size_t n = 0;
    std::vector<std::size_t> cluster_members;  // ascending
    double total_latency_ms = 0.0;
};

/// Single-linkage clusters over pairs with similarity >= threshold; the
/// largest cluster wins (ties: the one holding the lowest index) and its
/// medoid is returned verbatim. Throws NoCandidates.
VoteOutcome majority_vote(const std::vector<std::string>& candidates,
                          double threshold = kDefaultSimilarityThreshold);

struct ConsistencyOptions {
    std::size_t samples = 5;
    double threshold = kDefaultSimilarityThreshold;
    double temperature = 0.7;
    int max_output_tokens = 1024;
};

struct SelfConsistencyRound {
    VoteOutcome vote;
    BatchResult batch;
    bool degraded = false;  // at least one slot failed
    std::vector<std::string> warnings;
};

/// Samples `options.samples` completions and votes over the survivors.
/// total_latency = batch wall-clock + voting time. Throws BatchFailed.
SelfConsistencyRound run_self_consistency(const PromptBundle& bundle, const Gateway& gateway,
                                          const ConsistencyOptions& options = {});

}  // namespace tutor
