#include "tutor/consistency.hpp"

#include <cctype>
#include <chrono>
#include <numeric>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/text.hpp"

namespace tutor {

TokenSet canonicalize(std::string_view text) {
    const std::string prose = strip_code(text).text;
    TokenSet tokens;
    std::string current;
    for (unsigned char c : prose) {
        if (std::isalnum(c)) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.insert(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.insert(std::move(current));
    return tokens;
}

double similarity(const TokenSet& a, const TokenSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t shared = 0;
    for (const auto& t : a) shared += b.count(t);
    return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    // the smaller index becomes the root, so each root is its cluster's minimum
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (b < a) std::swap(a, b);
        parent_[b] = a;
    }

private:
    std::vector<std::size_t> parent_;
};

}  // namespace

VoteOutcome majority_vote(const std::vector<std::string>& candidates, double threshold) {
    const std::size_t n = candidates.size();
    if (n == 0) throw Error(ErrorCode::NoCandidates, "majority vote needs at least one candidate");

    std::vector<TokenSet> tokens;
    tokens.reserve(n);
    for (const auto& c : candidates) tokens.push_back(canonicalize(c));

    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    DisjointSets sets(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            sim[i][j] = sim[j][i] = similarity(tokens[i], tokens[j]);
            if (sim[i][j] >= threshold) sets.unite(i, j);
        }
    }

    std::vector<std::vector<std::size_t>> members(n);
    for (std::size_t i = 0; i < n; ++i) members[sets.find(i)].push_back(i);

    // roots are cluster minima, so scanning roots in ascending order and
    // keeping strictly larger clusters implements the lowest-index tie-break
    std::size_t winner = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (members[root].size() > members[winner].size()) winner = root;
    }
    const auto& cluster = members[winner];

    std::size_t medoid = cluster.front();
    double best = -1.0;
    for (std::size_t i : cluster) {
        double total = 0.0;
        for (std::size_t j : cluster) {
            if (i != j) total += sim[i][j];
        }
        const double mean = cluster.size() > 1 ? total / static_cast<double>(cluster.size() - 1) : 1.0;
        if (mean > best) {
            best = mean;
            medoid = i;
        }
    }

    VoteOutcome out;
    out.chosen = candidates[medoid];
    out.chosen_index = medoid;
    out.cluster_size = cluster.size();
    out.n = n;
    out.cluster_members = cluster;
    return out;
}

SelfConsistencyRound run_self_consistency(const PromptBundle& bundle, const Gateway& gateway,
                                          const ConsistencyOptions& options) {
    if (options.samples == 0) {
        throw Error(ErrorCode::InvalidArgument, "self-consistency needs at least one sample");
    }
    GenerationRequest request;
    request.prompt_text = render(bundle);
    request.temperature = options.temperature;
    request.max_output_tokens = options.max_output_tokens;

    SelfConsistencyRound round;
    round.batch = gateway.generate_batch(request, options.samples);

    const auto vote_start = std::chrono::steady_clock::now();
    std::vector<std::string> survivors;
    std::vector<std::size_t> slot_of;
    for (const auto& s : round.batch.slots) {
        if (s.ok()) {
            survivors.push_back(s.result->text);
            slot_of.push_back(s.slot);
        }
    }
    VoteOutcome vote = majority_vote(survivors, options.threshold);
    const double voting_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - vote_start)
            .count();

    // report indices in slot terms so they line up with the batch
    vote.chosen_index = slot_of[vote.chosen_index];
    for (auto& m : vote.cluster_members) m = slot_of[m];
    vote.n = options.samples;
    // simulated timing keeps the whole round reproducible, so voting is free there
    vote.total_latency_ms = round.batch.wall_clock_ms + (round.batch.simulated ? 0.0 : voting_ms);
    round.vote = std::move(vote);

    if (survivors.size() < options.samples) {
        round.degraded = true;
        round.warnings.push_back(fmt::format("DegradedVote: {} of {} generations succeeded",
                                             survivors.size(), options.samples));
    }
    return round;
}

}  // namespace tutor
