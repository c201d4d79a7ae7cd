#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tutor/consistency.hpp"
#include "tutor/portfolio.hpp"

namespace tutor {

struct TextStats {
    std::size_t sentences = 0;
    std::size_t words = 0;
    std::size_t syllables = 0;

    friend bool operator==(const TextStats&, const TextStats&) = default;
};

/// Vowel groups (a e i o u y) after dropping a silent trailing 'e' (kept for a
/// consonant + "le" ending), minimum 1. Words that are not purely alphabetic
/// once edge punctuation and apostrophes are removed count as 1.
std::size_t count_syllables(std::string_view word);

struct SentenceSplit {
    std::vector<std::string> sentences;
    bool unbalanced_fence = false;
};

/// Drops code, then splits on '.', '!' or '?' followed by whitespace or the
/// end of the text. Segments without a single word are discarded.
SentenceSplit split_sentences_excluding_code(std::string_view text);

/// Whitespace-separated tokens carrying at least one letter or digit.
std::vector<std::string> split_words(std::string_view sentence);

TextStats text_stats(std::string_view text);

/// 206.835 - 1.015 * words/sentences - 84.6 * syllables/words, unclamped.
/// Throws NoProse when there are no sentences.
double flesch_reading_ease(const TextStats& stats);
double flesch_reading_ease(std::string_view text);

struct ReadabilityBand {
    std::optional<double> lower;  // nullopt = unbounded
    std::optional<double> upper;
    bool lower_inclusive = true;
    bool upper_inclusive = false;
    std::string label;

    bool contains(double score) const noexcept;
};

class BandTable {
public:
    explicit BandTable(std::vector<ReadabilityBand> bands);
    /// Reads `[{lower, upper, lower_inclusive, upper_inclusive, label}, ...]`.
    static BandTable load(const std::filesystem::path& file);

    /// First band containing the score. Throws ConfigurationError if the
    /// table has a gap at `score`.
    const std::string& interpret(double score) const;
    const std::vector<ReadabilityBand>& bands() const noexcept { return bands_; }

private:
    std::vector<ReadabilityBand> bands_;
};

struct MetricReading {
    std::optional<double> fkrs;
    double response_time_ms = 0.0;
    std::size_t specificity_sentences = 0;
    Condition condition = Condition::General;
    std::string task_id;
    std::vector<std::string> warnings;
};

/// Readability and specificity of the chosen feedback, with the round's
/// total latency as response time. NoProse becomes a null fkrs plus a warning.
MetricReading measure(const SelfConsistencyRound& round, Condition condition,
                      std::string task_id);

}  // namespace tutor
