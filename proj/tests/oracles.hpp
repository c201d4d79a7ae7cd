#pragma once

// Brute-force reference implementations. Written from the rules, not from the
// library code, so agreement means something.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tutor/knowledge_base.hpp"

namespace oracle {

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t inter = 0;
    for (const auto& x : a) inter += b.count(x);
    std::set<std::string> uni = a;
    uni.insert(b.begin(), b.end());
    if (uni.empty()) return 0.0;
    return static_cast<double>(inter) / static_cast<double>(uni.size());
}

struct Ranked {
    std::string id;
    double score;
};

// score every snippet, keep positives, sort, cut
inline std::vector<Ranked> retrieve(const std::vector<tutor::KnowledgeSnippet>& store,
                                    const tutor::RetrievalQuery& q) {
    std::vector<Ranked> all;
    for (const auto& s : store) {
        const double v = 0.7 * jaccard(s.skill_tags, q.task_skill_tags) +
                         0.3 * jaccard(s.ilo_ids, q.weak_ilo_ids);
        if (v > 0.0) all.push_back({s.snippet_id, v});
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            const bool swap = all[j].score > all[i].score ||
                              (all[j].score == all[i].score && all[j].id < all[i].id);
            if (swap) std::swap(all[i], all[j]);
        }
    }
    if (all.size() > q.k) all.resize(q.k);
    return all;
}

// lowercase alphanumeric runs; fixture candidates carry no code
inline std::set<std::string> tokens(const std::string& text) {
    std::set<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!cur.empty()) {
            out.insert(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

inline double similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    return jaccard(a, b);
}

struct Vote {
    std::size_t chosen_index;
    std::size_t cluster_size;
};

// Transitive closure of the >= threshold relation (Warshall), then the
// largest class, ties to the class containing the smallest index; medoid by
// highest summed similarity, ties to the smallest index.
inline Vote vote(const std::vector<std::string>& texts, double threshold) {
    const std::size_t n = texts.size();
    std::vector<std::set<std::string>> tok;
    for (const auto& t : texts) tok.push_back(tokens(t));
    std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
    std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            sim[i][j] = similarity(tok[i], tok[j]);
            reach[i][j] = i == j || sim[i][j] >= threshold;
        }
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (reach[i][k] && reach[k][j]) reach[i][j] = true;

    std::size_t best_rep = 0, best_size = 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t size = 0;
        for (std::size_t j = 0; j < n; ++j) size += reach[i][j];
        if (size > best_size) {
            best_size = size;
            best_rep = i;
        }
    }
    std::size_t medoid = n;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!reach[best_rep][i]) continue;
        double total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && reach[best_rep][j]) total += sim[i][j];
        }
        if (total > best) {
            best = total;
            medoid = i;
        }
    }
    return {medoid, best_size};
}

inline double flesch(double words, double sentences, double syllables) {
    return 206.835 - 1.015 * (words / sentences) - 84.6 * (syllables / words);
}

struct GoldenText {
    const char* text;
    int words;
    int sentences;
    int syllables;
};

// counted by hand
inline const std::vector<GoldenText>& golden_corpus() {
    static const std::vector<GoldenText> corpus = {
        {"The cat sat on the mat.", 6, 1, 6},
        {"I like tea. I like it a lot.", 8, 2, 8},
        {"Split your data before you train the model.", 8, 1, 11},
        {"Use a simple table. Check each row.", 7, 2, 9},
        {"Readability matters! Short words help readers.", 6, 2, 12},
        {"Is the model ready? Yes, it is.", 7, 2, 9},
        {"Call fit on the training set. ```model.fit(X, y)``` Then score it.", 9, 2, 10},
        {"Machine learning helps us find patterns in data.", 8, 1, 12},
        {"Good work. Now add a test set, and measure the error again.", 12, 2, 15},
        {"Plot the results. Do they look right? Try again with more data!", 12, 3, 15},
    };
    return corpus;
}

// random word soup over a small vocabulary so clusters actually form
inline std::vector<std::string> random_candidates(std::mt19937_64& rng) {
    static const char* vocab[] = {"split", "data", "model", "train", "test", "score",
                                  "fit",   "scale", "tune",  "plot",  "error", "loss"};
    std::uniform_int_distribution<std::size_t> count(1, 6);
    std::uniform_int_distribution<std::size_t> len(0, 5);
    std::uniform_int_distribution<std::size_t> word(0, std::size(vocab) - 1);
    std::vector<std::string> out(count(rng));
    for (auto& text : out) {
        const std::size_t words = len(rng);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) text += (w % 3 == 0) ? ". " : " ";
            std::string v = vocab[word(rng)];
            if (rng() % 4 == 0) v[0] = static_cast<char>(std::toupper(v[0]));
            text += v;
        }
    }
    return out;
}

}  // namespace oracle
