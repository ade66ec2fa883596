#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tierank {

/// One collection document as ingested from disk. The external id is the
/// collection-assigned identifier (e.g. a TREC DOCNO) and is the only stable
/// handle a document has across index builds. Timestamps are present exactly
/// when the corpus is chronological (tweet-like); mixed presence is a load
/// error.
struct Document {
    std::string external_id;
    std::optional<std::int64_t> timestamp;  // epoch milliseconds
    std::string text;
};

enum class CorpusFormat { jsonl, trectext };

/// Parses "jsonl" or "trectext"; throws std::invalid_argument otherwise.
CorpusFormat corpus_format_from_string(std::string_view name);
std::string_view to_string(CorpusFormat format);

/// Analyzes raw text into index terms: ASCII letters are lowercased, the text
/// is split on every non-alphanumeric byte (bytes >= 0x80 are kept so UTF-8
/// sequences survive intact), empty fragments are dropped. No stemming, no
/// stopword removal. Pure: equal inputs always yield equal outputs.
std::vector<std::string> analyze(std::string_view text);

/// Streaming reader over one corpus file. next() yields documents in file
/// order and throws CorpusError on malformed input, duplicate external ids,
/// or mixed timestamp presence.
class CorpusReader {
  public:
    virtual ~CorpusReader() = default;
    virtual std::optional<Document> next() = 0;
};

class CorpusError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::unique_ptr<CorpusReader> open_corpus(const std::string& path, CorpusFormat format);

/// Drains open_corpus() into a vector.
std::vector<Document> load_corpus(const std::string& path, CorpusFormat format);

/// Deterministic permutation of [0, doc_count) used to simulate the arrival
/// order a multi-threaded indexer would produce. Fisher-Yates driven by
/// std::mt19937_64 seeded with `seed`; the swap partner for position i is
/// drawn as next() % (i + 1). Both the generator and the reduction are fixed
/// by the standard, so the permutation is stable across platforms.
std::vector<std::uint32_t> shuffled_order(std::uint32_t doc_count, std::uint64_t seed);

}  // namespace tierank
