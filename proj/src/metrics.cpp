#include "tutor/metrics.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "tutor/error.hpp"
#include "tutor/json_codec.hpp"
#include "tutor/text.hpp"

namespace tutor {

namespace {

bool is_vowel(char c) {
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
        default: return false;
    }
}

bool has_alnum(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c); });
}

}  // namespace

std::size_t count_syllables(std::string_view word) {
    auto alnum = [](unsigned char c) { return std::isalnum(c) != 0; };
    auto first = std::find_if(word.begin(), word.end(), alnum);
    auto last = std::find_if(word.rbegin(), word.rend(), alnum).base();
    if (first >= last) return 1;

    std::string w;
    for (auto it = first; it != last; ++it) {
        const auto c = static_cast<unsigned char>(*it);
        if (c == '\'') continue;
        if (!std::isalpha(c)) return 1;
        w += static_cast<char>(std::tolower(c));
    }

    const bool consonant_le = w.size() >= 3 && w.compare(w.size() - 2, 2, "le") == 0 &&
                              !is_vowel(w[w.size() - 3]);
    if (w.size() > 1 && w.back() == 'e' && !consonant_le) w.pop_back();

    std::size_t groups = 0;
    bool in_group = false;
    for (char c : w) {
        const bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    return std::max<std::size_t>(groups, 1);
}

SentenceSplit split_sentences_excluding_code(std::string_view text) {
    const StrippedText prose = strip_code(text);
    SentenceSplit out;
    out.unbalanced_fence = prose.unbalanced_fence;
    const std::string& s = prose.text;

    auto emit = [&](std::size_t begin, std::size_t end) {
        std::string_view seg(s.data() + begin, end - begin);
        while (!seg.empty() && std::isspace(static_cast<unsigned char>(seg.front()))) seg.remove_prefix(1);
        while (!seg.empty() && std::isspace(static_cast<unsigned char>(seg.back()))) seg.remove_suffix(1);
        if (has_alnum(seg)) out.sentences.emplace_back(seg);
    };

    std::size_t begin = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c != '.' && c != '!' && c != '?') continue;
        const bool boundary =
            i + 1 == s.size() || std::isspace(static_cast<unsigned char>(s[i + 1]));
        if (boundary) {
            emit(begin, i + 1);
            begin = i + 1;
        }
    }
    if (begin < s.size()) emit(begin, s.size());
    return out;
}

std::vector<std::string> split_words(std::string_view sentence) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < sentence.size()) {
        while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
        std::size_t j = i;
        while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
        if (j > i && has_alnum(sentence.substr(i, j - i))) words.emplace_back(sentence.substr(i, j - i));
        i = j;
    }
    return words;
}

TextStats text_stats(std::string_view text) {
    TextStats stats;
    for (const auto& sentence : split_sentences_excluding_code(text).sentences) {
        ++stats.sentences;
        for (const auto& w : split_words(sentence)) {
            ++stats.words;
            stats.syllables += count_syllables(w);
        }
    }
    return stats;
}

double flesch_reading_ease(const TextStats& stats) {
    if (stats.sentences == 0 || stats.words == 0) {
        throw Error(ErrorCode::NoProse, "no prose sentences left after removing code");
    }
    const double words = static_cast<double>(stats.words);
    return 206.835 - 1.015 * (words / static_cast<double>(stats.sentences)) -
           84.6 * (static_cast<double>(stats.syllables) / words);
}

double flesch_reading_ease(std::string_view text) { return flesch_reading_ease(text_stats(text)); }

bool ReadabilityBand::contains(double score) const noexcept {
    if (lower && (lower_inclusive ? score < *lower : score <= *lower)) return false;
    if (upper && (upper_inclusive ? score > *upper : score >= *upper)) return false;
    return true;
}

BandTable::BandTable(std::vector<ReadabilityBand> bands) : bands_(std::move(bands)) {
    if (bands_.empty()) throw Error(ErrorCode::ConfigurationError, "band table is empty");
}

BandTable BandTable::load(const std::filesystem::path& file) {
    std::vector<ReadabilityBand> bands;
    const Json doc = read_json_file(file.string());
    for (const auto& b : doc.at("bands")) {
        ReadabilityBand band;
        if (!b.at("lower").is_null()) band.lower = b.at("lower").get<double>();
        if (!b.at("upper").is_null()) band.upper = b.at("upper").get<double>();
        band.lower_inclusive = b.value("lower_inclusive", true);
        band.upper_inclusive = b.value("upper_inclusive", false);
        band.label = b.at("label").get<std::string>();
        bands.push_back(std::move(band));
    }
    return BandTable(std::move(bands));
}

const std::string& BandTable::interpret(double score) const {
    for (const auto& band : bands_) {
        if (band.contains(score)) return band.label;
    }
    throw Error(ErrorCode::ConfigurationError, fmt::format("no readability band covers {}", score));
}

MetricReading measure(const SelfConsistencyRound& round, Condition condition, std::string task_id) {
    MetricReading reading;
    reading.condition = condition;
    reading.task_id = std::move(task_id);
    reading.response_time_ms = round.vote.total_latency_ms;
    reading.warnings = round.warnings;

    const auto split = split_sentences_excluding_code(round.vote.chosen);
    if (split.unbalanced_fence) reading.warnings.emplace_back("UnbalancedFence");
    reading.specificity_sentences = split.sentences.size();
    try {
        reading.fkrs = flesch_reading_ease(round.vote.chosen);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NoProse) throw;
        reading.warnings.emplace_back("NoProse");
    }
    return reading;
}

}  // namespace tutor
