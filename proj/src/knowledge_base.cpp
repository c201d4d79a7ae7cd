#include "tutor/knowledge_base.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <mutex>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/json_codec.hpp"

namespace tutor {

KnowledgeSnippet normalize_snippet(KnowledgeSnippet snippet) {
    if (snippet.snippet_id.empty()) {
        throw Error(ErrorCode::InvalidSnippet, "snippet_id must be nonempty");
    }
    if (snippet.ilo_ids.empty()) {
        throw Error(ErrorCode::InvalidSnippet,
                    fmt::format("snippet {} has no ILO ids", snippet.snippet_id));
    }
    if (snippet.body.size() > kMaxSnippetBody) {
        throw Error(ErrorCode::InvalidSnippet,
                    fmt::format("snippet {} body has {} characters (max {})", snippet.snippet_id,
                                snippet.body.size(), kMaxSnippetBody));
    }
    std::set<std::string> tags;
    for (std::string tag : snippet.skill_tags) {
        std::transform(tag.begin(), tag.end(), tag.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (!tag.empty()) tags.insert(std::move(tag));
    }
    snippet.skill_tags = std::move(tags);
    return snippet;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    std::size_t shared = 0;
    for (const auto& x : a) shared += b.count(x);
    return static_cast<double>(shared) / static_cast<double>(a.size() + b.size() - shared);
}

double score(const KnowledgeSnippet& snippet, const RetrievalQuery& query,
             const ScoreWeights& weights) {
    return weights.skills * jaccard(snippet.skill_tags, query.task_skill_tags) +
           weights.ilos * jaccard(snippet.ilo_ids, query.weak_ilo_ids);
}

KnowledgeBase::KnowledgeBase(const KnowledgeBase& other) {
    std::shared_lock lock(other.mutex_);
    weights_ = other.weights_;
    by_id_ = other.by_id_;
    by_tag_ = other.by_tag_;
    by_ilo_ = other.by_ilo_;
}

KnowledgeBase& KnowledgeBase::operator=(const KnowledgeBase& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_);
    std::shared_lock other_lock(other.mutex_);
    weights_ = other.weights_;
    by_id_ = other.by_id_;
    by_tag_ = other.by_tag_;
    by_ilo_ = other.by_ilo_;
    return *this;
}

void KnowledgeBase::add_snippet(KnowledgeSnippet snippet) {
    snippet = normalize_snippet(std::move(snippet));
    std::unique_lock lock(mutex_);
    if (by_id_.count(snippet.snippet_id)) {
        throw Error(ErrorCode::DuplicateSnippet,
                    fmt::format("snippet {} already exists", snippet.snippet_id));
    }
    for (const auto& tag : snippet.skill_tags) by_tag_[tag].insert(snippet.snippet_id);
    for (const auto& ilo : snippet.ilo_ids) by_ilo_[ilo].insert(snippet.snippet_id);
    const std::string id = snippet.snippet_id;
    by_id_.emplace(id, std::move(snippet));
}

std::vector<ScoredSnippet> KnowledgeBase::retrieve(const RetrievalQuery& query) const {
    std::shared_lock lock(mutex_);

    // Only snippets sharing a tag or an ILO with the query can score above 0.
    std::set<std::string> candidates;
    for (const auto& tag : query.task_skill_tags) {
        if (auto it = by_tag_.find(tag); it != by_tag_.end()) {
            candidates.insert(it->second.begin(), it->second.end());
        }
    }
    for (const auto& ilo : query.weak_ilo_ids) {
        if (auto it = by_ilo_.find(ilo); it != by_ilo_.end()) {
            candidates.insert(it->second.begin(), it->second.end());
        }
    }

    std::vector<ScoredSnippet> out;
    for (const auto& id : candidates) {
        const auto& snippet = by_id_.at(id);
        const double s = score(snippet, query, weights_);
        if (s > 0.0) out.push_back({snippet, s});
    }
    std::sort(out.begin(), out.end(), [](const ScoredSnippet& a, const ScoredSnippet& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.snippet.snippet_id < b.snippet.snippet_id;
    });
    if (out.size() > query.k) out.resize(query.k);
    return out;
}

std::vector<KnowledgeSnippet> KnowledgeBase::snippets() const {
    std::shared_lock lock(mutex_);
    std::vector<KnowledgeSnippet> out;
    out.reserve(by_id_.size());
    for (const auto& [id, s] : by_id_) out.push_back(s);
    return out;
}

std::size_t KnowledgeBase::size() const {
    std::shared_lock lock(mutex_);
    return by_id_.size();
}

bool KnowledgeBase::contains(const std::string& snippet_id) const {
    std::shared_lock lock(mutex_);
    return by_id_.count(snippet_id) > 0;
}

std::set<std::string> KnowledgeBase::ids_for_tag(const std::string& tag) const {
    std::shared_lock lock(mutex_);
    auto it = by_tag_.find(tag);
    return it == by_tag_.end() ? std::set<std::string>{} : it->second;
}

std::set<std::string> KnowledgeBase::ids_for_ilo(const std::string& ilo) const {
    std::shared_lock lock(mutex_);
    auto it = by_ilo_.find(ilo);
    return it == by_ilo_.end() ? std::set<std::string>{} : it->second;
}

std::size_t load_snippets_file(KnowledgeBase& kb, const std::string& path) {
    std::size_t loaded = 0;
    for (const auto& record : read_json_lines(path)) {
        kb.add_snippet(snippet_from_json(record));
        ++loaded;
    }
    return loaded;
}

}  // namespace tutor
