#pragma once

#include <locale.h>
#include <wctype.h>

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "viewpoint/error.hpp"

namespace viewpoint {

namespace detail {

    // Character classification for non-ASCII code points goes through the
    // C.UTF-8 locale so results do not depend on the process-global locale.
    inline locale_t utf8_locale()
    {
        static locale_t loc = [] {
            locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", locale_t{});
            if (l == locale_t{}) {
                l = newlocale(LC_CTYPE_MASK, "en_US.UTF-8", locale_t{});
            }
            return l;
        }();
        return loc;
    }

    constexpr char32_t replacement_char = 0xFFFD;

    /// Decodes one code point starting at `pos` and advances `pos`. Invalid
    /// sequences decode to U+FFFD and consume a single byte.
    inline char32_t decode_utf8(std::string_view s, std::size_t& pos)
    {
        auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
        unsigned char lead = byte(pos);
        if (lead < 0x80) {
            ++pos;
            return lead;
        }
        int extra = 0;
        char32_t cp = 0;
        if ((lead & 0xE0) == 0xC0) {
            extra = 1;
            cp = lead & 0x1F;
        } else if ((lead & 0xF0) == 0xE0) {
            extra = 2;
            cp = lead & 0x0F;
        } else if ((lead & 0xF8) == 0xF0) {
            extra = 3;
            cp = lead & 0x07;
        } else {
            ++pos;
            return replacement_char;
        }
        if (pos + static_cast<std::size_t>(extra) >= s.size()) {
            ++pos;
            return replacement_char;
        }
        for (int i = 1; i <= extra; ++i) {
            unsigned char c = byte(pos + i);
            if ((c & 0xC0) != 0x80) {
                ++pos;
                return replacement_char;
            }
            cp = (cp << 6) | (c & 0x3F);
        }
        pos += extra + 1;
        return cp;
    }

    inline void encode_utf8(char32_t cp, std::string& out)
    {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }

}  // namespace detail

inline bool is_letter_or_digit(char32_t cp)
{
    if (cp < 0x80) {
        return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
    }
    if (cp == detail::replacement_char) {
        return false;
    }
    locale_t loc = detail::utf8_locale();
    return loc != locale_t{} && iswalnum_l(static_cast<wint_t>(cp), loc) != 0;
}

inline bool is_uppercase(char32_t cp)
{
    if (cp < 0x80) {
        return cp >= 'A' && cp <= 'Z';
    }
    locale_t loc = detail::utf8_locale();
    return loc != locale_t{} && iswupper_l(static_cast<wint_t>(cp), loc) != 0;
}

inline char32_t to_lower(char32_t cp)
{
    if (cp < 0x80) {
        return (cp >= 'A' && cp <= 'Z') ? cp + ('a' - 'A') : cp;
    }
    locale_t loc = detail::utf8_locale();
    return loc == locale_t{} ? cp : static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc));
}

inline bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s)
{
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_space(s[begin])) {
        ++begin;
    }
    while (end > begin && is_space(s[end - 1])) {
        --end;
    }
    return s.substr(begin, end - begin);
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

/// Collapses every whitespace run to one space and trims both ends. This is
/// the key under which texts are compared for identity (gold lookup, dedup,
/// feedback on expansion candidates).
inline std::string normalize_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : trim(s)) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(c);
    }
    return out;
}

inline std::uint64_t fnv1a64(std::string_view s) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t v)
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

/// Lowercasing splitter: every code point that is not a letter or digit is a
/// separator. Tokens found in the stopword set are dropped; order is kept.
class Tokenizer {
  public:
    Tokenizer() = default;

    explicit Tokenizer(std::set<std::string, std::less<>> stopwords)
        : m_stopwords(std::move(stopwords))
    {}

    /// One stopword per line; blank lines and lines starting with '#' are skipped.
    static Tokenizer from_stopword_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw Error(ErrorCode::io_failure, "cannot open stopword file: " + path);
        }
        std::set<std::string, std::less<>> words;
        std::string line;
        Tokenizer plain;
        while (std::getline(in, line)) {
            auto t = trim(line);
            if (t.empty() || t.front() == '#') {
                continue;
            }
            for (auto& tok : plain.tokenize(t)) {
                words.insert(std::move(tok));
            }
        }
        return Tokenizer(std::move(words));
    }

    std::vector<std::string> tokenize(std::string_view text) const
    {
        std::vector<std::string> tokens;
        std::string current;
        auto flush = [&] {
            if (!current.empty()) {
                if (!m_stopwords.contains(current)) {
                    tokens.push_back(current);
                }
                current.clear();
            }
        };
        std::size_t pos = 0;
        while (pos < text.size()) {
            char32_t cp = detail::decode_utf8(text, pos);
            if (is_letter_or_digit(cp)) {
                detail::encode_utf8(to_lower(cp), current);
            } else {
                flush();
            }
        }
        flush();
        return tokens;
    }

    const std::set<std::string, std::less<>>& stopwords() const noexcept { return m_stopwords; }

  private:
    std::set<std::string, std::less<>> m_stopwords;
};

}  // namespace viewpoint
