#include "tutor/text.hpp"

namespace tutor {

StrippedText strip_code(std::string_view text) {
    constexpr std::string_view kFence = "```";
    StrippedText out;
    out.text.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text.compare(i, kFence.size(), kFence) == 0) {
            const auto close = text.find(kFence, i + kFence.size());
            out.text += ' ';
            if (close == std::string_view::npos) {
                out.unbalanced_fence = true;
                break;
            }
            i = close + kFence.size();
            continue;
        }
        if (text[i] == '`') {
            const auto close = text.find('`', i + 1);
            // a span ends before any fence; otherwise the backtick is literal
            const auto fence = text.find(kFence, i + 1);
            if (close != std::string_view::npos && (fence == std::string_view::npos || close < fence)) {
                out.text += ' ';
                i = close + 1;
                continue;
            }
        }
        out.text += text[i];
        ++i;
    }
    return out;
}

}  // namespace tutor
