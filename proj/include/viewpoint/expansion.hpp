#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "viewpoint/error.hpp"
#include "viewpoint/retrieval.hpp"
#include "viewpoint/text.hpp"

namespace viewpoint {

struct ExternalDocument {
    std::string uri;
    std::string title;
    std::vector<std::string> paragraphs;

    bool operator==(const ExternalDocument&) const = default;
};

struct ExpansionCandidate {
    std::string text;
    std::string uri;

    bool operator==(const ExpansionCandidate&) const = default;
};

struct ExpansionCandidates {
    std::vector<ExpansionCandidate> perspectives;
    std::vector<ExpansionCandidate> evidence;
};

/// Rule-based sentence splitter. A boundary follows '.', '!' or '?' when the
/// next characters are whitespace and then an uppercase letter, or whitespace
/// up to the end of the text. Abbreviations such as "Dr. Smith" split too.
/// Sentences come back trimmed; dropping whitespace from the input and from
/// the joined output yields the same character sequence.
inline std::vector<std::string> split_sentences(std::string_view paragraph)
{
    std::vector<std::string> sentences;
    auto emit = [&](std::string_view s) {
        auto t = trim(s);
        if (!t.empty()) {
            sentences.emplace_back(t);
        }
    };
    std::size_t start = 0;
    std::size_t i = 0;
    while (i < paragraph.size()) {
        char c = paragraph[i];
        if ((c == '.' || c == '!' || c == '?') && i + 1 < paragraph.size() && is_space(paragraph[i + 1])) {
            std::size_t next = i + 1;
            while (next < paragraph.size() && is_space(paragraph[next])) {
                ++next;
            }
            bool boundary = next == paragraph.size();
            if (!boundary) {
                std::size_t pos = next;
                boundary = is_uppercase(detail::decode_utf8(paragraph, pos));
            }
            if (boundary) {
                emit(paragraph.substr(start, i + 1 - start));
                start = next;
                i = next;
                continue;
            }
        }
        ++i;
    }
    if (start < paragraph.size()) {
        emit(paragraph.substr(start));
    }
    return sentences;
}

/// First sentence of each paragraph becomes a candidate perspective; the
/// remaining sentences, joined by single spaces, become one evidence entry.
inline ExpansionCandidates extract_candidates(const std::vector<ExternalDocument>& docs)
{
    ExpansionCandidates out;
    for (const auto& doc : docs) {
        for (const auto& paragraph : doc.paragraphs) {
            auto sentences = split_sentences(paragraph);
            if (sentences.empty()) {
                continue;
            }
            out.perspectives.push_back({sentences.front(), doc.uri});
            if (sentences.size() < 2) {
                continue;
            }
            std::string rest = sentences[1];
            for (std::size_t i = 2; i < sentences.size(); ++i) {
                rest += ' ';
                rest += sentences[i];
            }
            out.evidence.push_back({std::move(rest), doc.uri});
        }
    }
    return out;
}

/// Splits plain text into paragraphs at blank lines; whitespace inside each
/// paragraph is collapsed.
inline std::vector<std::string> split_paragraphs(std::string_view text)
{
    std::vector<std::string> paragraphs;
    std::string current;
    auto flush = [&] {
        auto p = normalize_whitespace(current);
        if (!p.empty()) {
            paragraphs.push_back(std::move(p));
        }
        current.clear();
    };
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto eol = text.find('\n', pos);
        auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        if (is_blank(line)) {
            flush();
        } else {
            current.append(line).push_back(' ');
        }
        if (eol == std::string_view::npos) {
            break;
        }
        pos = eol + 1;
    }
    flush();
    return paragraphs;
}

/// Where expansion documents come from. A live web search client would be
/// another implementation of this interface.
class DocumentSource {
  public:
    virtual ~DocumentSource() = default;
    virtual std::vector<ExternalDocument> fetch_documents(std::string_view query, std::size_t limit) const = 0;
};

/// Serves documents from a local directory. The directory holds a `manifest`
/// with lines "<filename>\t<uri>\t<title>" and one UTF-8 text file per entry,
/// paragraphs separated by blank lines. Documents are ranked by BM25 of the
/// query over their full text.
class FileDocumentSource final : public DocumentSource {
  public:
    static constexpr std::size_t default_limit = 10;

    /// An empty path means "not configured": every fetch returns nothing and
    /// a notice is printed once.
    explicit FileDocumentSource(const std::filesystem::path& dir, const Tokenizer& tokenizer = {})
    {
        if (dir.empty()) {
            return;
        }
        m_configured = true;
        auto manifest = dir / "manifest";
        std::ifstream in(manifest);
        if (!in) {
            if (!std::filesystem::is_directory(dir)) {
                throw Error(ErrorCode::io_failure, "expansion source directory missing: " + dir.string());
            }
            m_index = InvertedIndex::build({}, tokenizer);
            return;
        }
        std::vector<std::pair<std::string, std::string>> texts;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (is_blank(line)) {
                continue;
            }
            auto t1 = line.find('\t');
            auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
            if (t2 == std::string::npos) {
                throw Error(ErrorCode::malformed_input,
                            "manifest line " + std::to_string(line_no) + ": expected <filename>\\t<uri>\\t<title>");
            }
            auto filename = line.substr(0, t1);
            ExternalDocument doc{line.substr(t1 + 1, t2 - t1 - 1), std::string(trim(line.substr(t2 + 1))), {}};
            std::ifstream file(dir / filename, std::ios::binary);
            if (!file) {
                throw Error(ErrorCode::io_failure, "expansion document missing: " + (dir / filename).string());
            }
            std::stringstream buffer;
            buffer << file.rdbuf();
            doc.paragraphs = split_paragraphs(buffer.str());
            if (doc.paragraphs.empty()) {
                continue;
            }
            if (m_by_key.contains(filename)) {
                throw Error(ErrorCode::duplicate_id, "manifest lists '" + filename + "' twice");
            }
            texts.emplace_back(filename, buffer.str());
            m_by_key.emplace(filename, m_docs.size());
            m_docs.push_back(std::move(doc));
        }
        m_index = InvertedIndex::build(std::move(texts), tokenizer);
    }

    bool configured() const noexcept { return m_configured; }
    std::size_t size() const noexcept { return m_docs.size(); }

    std::vector<ExternalDocument> fetch_documents(std::string_view query, std::size_t limit) const override
    {
        if (!m_configured) {
            std::call_once(m_notice, [] { std::cerr << "expansion source not configured; expansion disabled\n"; });
            return {};
        }
        if (limit == 0 || m_docs.empty()) {
            return {};
        }
        std::vector<ExternalDocument> out;
        for (const auto& hit : m_index.search(query, limit)) {
            out.push_back(m_docs[m_by_key.at(hit.doc_id)]);
        }
        return out;
    }

  private:
    bool m_configured = false;
    std::vector<ExternalDocument> m_docs;
    std::unordered_map<std::string, std::size_t> m_by_key;
    InvertedIndex m_index;
    mutable std::once_flag m_notice;
};

}  // namespace viewpoint
