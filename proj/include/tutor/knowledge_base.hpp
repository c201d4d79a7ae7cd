#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tutor/portfolio.hpp"

namespace tutor {

inline constexpr std::size_t kMaxSnippetBody = 2000;

struct KnowledgeSnippet {
    std::string snippet_id;
    std::string subject_code;
    std::set<std::string> ilo_ids;
    std::set<std::string> skill_tags;  // lowercase
    std::string body;

    friend bool operator==(const KnowledgeSnippet&, const KnowledgeSnippet&) = default;
};

/// Lowercases the tags (the set dedups them) and validates the snippet.
/// Throws InvalidSnippet.
KnowledgeSnippet normalize_snippet(KnowledgeSnippet snippet);

struct RetrievalQuery {
    std::set<std::string> task_skill_tags;
    std::set<std::string> weak_ilo_ids;
    SkillTier tier = SkillTier::Average;  // carried for future tier-filtered variants
    std::size_t k = 3;
};

struct ScoreWeights {
    double skills = 0.7;
    double ilos = 0.3;
};

/// |a ∩ b| / |a ∪ b|, with two empty sets scoring 0.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

double score(const KnowledgeSnippet& snippet, const RetrievalQuery& query,
             const ScoreWeights& weights = {});

struct ScoredSnippet {
    KnowledgeSnippet snippet;
    double score = 0.0;
};

/// Tag- and ILO-indexed snippet store. Reads may run concurrently; writes
/// are serialized and a snippet becomes visible only once fully indexed.
class KnowledgeBase {
public:
    explicit KnowledgeBase(ScoreWeights weights = {}) : weights_(weights) {}

    KnowledgeBase(const KnowledgeBase& other);
    KnowledgeBase& operator=(const KnowledgeBase& other);

    /// Throws DuplicateSnippet or InvalidSnippet.
    void add_snippet(KnowledgeSnippet snippet);

    /// Positive-score snippets ordered by score descending then id ascending,
    /// truncated to query.k.
    std::vector<ScoredSnippet> retrieve(const RetrievalQuery& query) const;

    std::vector<KnowledgeSnippet> snippets() const;
    std::size_t size() const;
    bool contains(const std::string& snippet_id) const;

    /// Ids indexed under a tag or an ILO id.
    std::set<std::string> ids_for_tag(const std::string& tag) const;
    std::set<std::string> ids_for_ilo(const std::string& ilo) const;

    const ScoreWeights& weights() const noexcept { return weights_; }

private:
    ScoreWeights weights_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, KnowledgeSnippet> by_id_;
    std::map<std::string, std::set<std::string>> by_tag_;
    std::map<std::string, std::set<std::string>> by_ilo_;
};

/// Reads line-delimited JSON snippet records
/// ({snippet_id, subject_code, ilo_ids, skill_tags, body}) into `kb`.
/// Returns the number loaded.
std::size_t load_snippets_file(KnowledgeBase& kb, const std::string& path);

}  // namespace tutor
