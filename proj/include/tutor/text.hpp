#pragma once

#include <string>
#include <string_view>

namespace tutor {

struct StrippedText {
    std::string text;
    bool unbalanced_fence = false;
};

/// Replaces every ```fenced``` block and `inline` span with one space. An
/// unclosed fence swallows the rest of the text; an unclosed single
/// backtick is kept as ordinary text.
StrippedText strip_code(std::string_view text);

}  // namespace tutor
