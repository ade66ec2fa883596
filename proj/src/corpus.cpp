#include "tierank/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace tierank {

namespace {

bool is_token_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c >= 0x80;
}

std::string trim(std::string_view s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

/// Shared bookkeeping for both readers: uniqueness of external ids and
/// all-or-nothing timestamp presence.
class DocumentValidator {
  public:
    void check(const Document& doc, const std::string& where) {
        if (doc.external_id.empty()) {
            throw CorpusError("empty document id at " + where);
        }
        if (!seen_.insert(doc.external_id).second) {
            throw CorpusError("duplicate document id \"" + doc.external_id + "\" at " + where);
        }
        if (!chronological_.has_value()) {
            chronological_ = doc.timestamp.has_value();
        } else if (*chronological_ != doc.timestamp.has_value()) {
            throw CorpusError("mixed timestamp presence at " + where + " (document \"" +
                              doc.external_id + "\"): a corpus is either fully timestamped or not");
        }
    }

  private:
    std::unordered_set<std::string> seen_;
    std::optional<bool> chronological_;
};

class JsonlReader: public CorpusReader {
  public:
    explicit JsonlReader(const std::string& path): path_(path), in_(path) {
        if (!in_) {
            throw CorpusError("cannot open corpus file: " + path);
        }
    }

    std::optional<Document> next() override {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            if (trim(line).empty()) {
                continue;
            }
            return parse_line(line);
        }
        if (in_.bad()) {
            throw CorpusError("read error in " + path_);
        }
        return std::nullopt;
    }

  private:
    Document parse_line(const std::string& line) {
        const std::string where = path_ + ":" + std::to_string(lineno_);
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw CorpusError("malformed JSON at " + where + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() ||
            !rec.contains("text") || !rec["text"].is_string()) {
            throw CorpusError("record at " + where + " needs string fields \"id\" and \"text\"");
        }
        Document doc;
        doc.external_id = rec["id"].get<std::string>();
        doc.text = rec["text"].get<std::string>();
        if (rec.contains("timestamp")) {
            if (!rec["timestamp"].is_number_integer()) {
                throw CorpusError("non-integer timestamp at " + where);
            }
            doc.timestamp = rec["timestamp"].get<std::int64_t>();
        }
        validator_.check(doc, where);
        return doc;
    }

    std::string path_;
    std::ifstream in_;
    std::size_t lineno_ = 0;
    DocumentValidator validator_;
};

/// Minimal TRECTEXT reader: <DOC> blocks with <DOCNO> and <TEXT> children,
/// tags case-insensitive, DOCNO whitespace-trimmed. No timestamps.
class TrecTextReader: public CorpusReader {
  public:
    explicit TrecTextReader(const std::string& path): path_(path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw CorpusError("cannot open corpus file: " + path);
        }
        content_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }

    std::optional<Document> next() override {
        size_t doc_open = find_tag(pos_, "<doc>");
        if (doc_open == std::string::npos) {
            // Anything left besides whitespace is junk outside a <DOC> block.
            if (!trim(std::string_view(content_).substr(pos_)).empty()) {
                throw CorpusError("stray content outside <DOC> at " + at(pos_));
            }
            return std::nullopt;
        }
        size_t body = doc_open + 5;
        size_t doc_close = find_tag(body, "</doc>");
        if (doc_close == std::string::npos) {
            throw CorpusError("unterminated <DOC> at " + at(doc_open));
        }
        Document doc;
        doc.external_id = trim(field(body, doc_close, "docno", doc_open));
        doc.text = field(body, doc_close, "text", doc_open);
        pos_ = doc_close + 6;
        validator_.check(doc, at(doc_open));
        return doc;
    }

  private:
    // Case-insensitive search for `tag` starting at `from`.
    size_t find_tag(size_t from, std::string_view tag) const {
        auto it = std::search(content_.begin() + static_cast<std::ptrdiff_t>(from), content_.end(),
                              tag.begin(), tag.end(), [](char a, char b) {
                                  return std::tolower(static_cast<unsigned char>(a)) ==
                                         std::tolower(static_cast<unsigned char>(b));
                              });
        return it == content_.end() ? std::string::npos
                                    : static_cast<size_t>(it - content_.begin());
    }

    std::string field(size_t from, size_t until, const std::string& name, size_t doc_at) const {
        const std::string open = "<" + name + ">";
        const std::string close = "</" + name + ">";
        size_t o = find_tag(from, open);
        if (o == std::string::npos || o >= until) {
            throw CorpusError("missing <" + name + "> in document at " + at(doc_at));
        }
        size_t start = o + open.size();
        size_t c = find_tag(start, close);
        if (c == std::string::npos || c >= until) {
            throw CorpusError("unterminated <" + name + "> in document at " + at(doc_at));
        }
        return content_.substr(start, c - start);
    }

    std::string at(size_t offset) const {
        size_t line = 1 + static_cast<size_t>(std::count(content_.begin(),
                                                         content_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
        return path_ + ":" + std::to_string(line) + " (offset " + std::to_string(offset) + ")";
    }

    std::string path_;
    std::string content_;
    size_t pos_ = 0;
    DocumentValidator validator_;
};

}  // namespace

CorpusFormat corpus_format_from_string(std::string_view name) {
    if (name == "jsonl") {
        return CorpusFormat::jsonl;
    }
    if (name == "trectext") {
        return CorpusFormat::trectext;
    }
    throw std::invalid_argument("unknown corpus format: " + std::string(name));
}

std::string_view to_string(CorpusFormat format) {
    return format == CorpusFormat::jsonl ? "jsonl" : "trectext";
}

std::vector<std::string> analyze(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
        if (is_token_byte(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        terms.push_back(std::move(current));
    }
    return terms;
}

std::unique_ptr<CorpusReader> open_corpus(const std::string& path, CorpusFormat format) {
    if (format == CorpusFormat::jsonl) {
        return std::make_unique<JsonlReader>(path);
    }
    return std::make_unique<TrecTextReader>(path);
}

std::vector<Document> load_corpus(const std::string& path, CorpusFormat format) {
    auto reader = open_corpus(path, format);
    std::vector<Document> docs;
    while (auto doc = reader->next()) {
        docs.push_back(std::move(*doc));
    }
    return docs;
}

std::vector<std::uint32_t> shuffled_order(std::uint32_t doc_count, std::uint64_t seed) {
    if (doc_count == 0) {
        throw std::invalid_argument("shuffled_order: doc_count must be >= 1");
    }
    std::vector<std::uint32_t> perm(doc_count);
    for (std::uint32_t i = 0; i < doc_count; ++i) {
        perm[i] = i;
    }
    std::mt19937_64 rng(seed);
    for (std::uint32_t i = doc_count - 1; i > 0; --i) {
        std::uint32_t j = static_cast<std::uint32_t>(rng() % (static_cast<std::uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
    }
    return perm;
}

}  // namespace tierank
