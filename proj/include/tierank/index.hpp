#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tierank/corpus.hpp"

namespace tierank {

/// Dense 0-based document id assigned at commit time by arrival order. This
/// is the id Lucene-style engines use to break score ties, and it is a
/// build-local artifact: the same external document may hold different
/// internal ids in different Index instances of the same collection.
using InternalId = std::uint32_t;

struct Posting {
    InternalId doc;
    std::uint32_t tf;  // >= 1
};

/// One entry of a stored document vector, kept sorted by term.
struct TermFreq {
    std::string term;
    std::uint32_t tf;
};

struct CollectionStats {
    std::uint32_t doc_count = 0;    // N
    std::uint64_t total_terms = 0;  // |C|
    double avg_doc_len = 0.0;       // |C| / N
};

struct BuildOptions {
    unsigned workers = 1;
    // Pre-shuffles documents with shuffled_order() before a single-threaded
    // commit pass: a deterministic surrogate for thread-arrival
    // non-determinism. Rejected together with workers > 1.
    std::optional<std::uint64_t> order_seed;
};

/// Immutable inverted index over one build of a collection. Internal ids
/// reflect commit arrival order; everything else observable (statistics,
/// document lengths, df/cf) is arrival-order independent. Safe to share
/// across threads once built.
class Index {
  public:
    std::uint32_t num_docs() const { return stats_.doc_count; }
    const CollectionStats& stats() const { return stats_; }

    /// Sorted posting list for a term; the empty list for unseen terms.
    const std::vector<Posting>& postings(const std::string& term) const;
    std::uint32_t df(const std::string& term) const;
    std::uint64_t cf(const std::string& term) const;

    std::uint32_t doc_len(InternalId d) const { return doc_lens_.at(d); }
    const std::string& external_id(InternalId d) const { return external_ids_.at(d); }
    InternalId internal_id(const std::string& external) const;
    const std::vector<TermFreq>& doc_vector(InternalId d) const { return doc_vectors_.at(d); }

    bool has_timestamps() const { return !timestamps_.empty(); }
    std::int64_t timestamp(InternalId d) const;

    /// Terms in lexicographic order (the serialization order).
    std::vector<std::string> terms() const;

    /// Single-file versioned little-endian binary layout (see format notes in
    /// README). Byte-deterministic given identical arrival order.
    void save(const std::string& path) const;
    static Index load(const std::string& path);

  private:
    friend class IndexBuilder;

    struct TermEntry {
        std::vector<Posting> postings;  // strictly increasing InternalId
        std::uint64_t cf = 0;
    };

    CollectionStats stats_;
    std::unordered_map<std::string, TermEntry> terms_;
    std::vector<std::uint32_t> doc_lens_;
    std::vector<std::string> external_ids_;
    std::unordered_map<std::string, InternalId> internal_ids_;
    std::vector<std::int64_t> timestamps_;  // empty unless corpus is chronological
    std::vector<std::vector<TermFreq>> doc_vectors_;
};

class IndexError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Builds an index, assigning internal ids in arrival order. With one worker
/// and no order seed, arrival order is file order; with several workers,
/// analysis runs concurrently and ids follow whatever interleaving the
/// threads produce; with an order seed, documents are shuffled first and
/// committed single-threaded.
Index build_index(std::vector<Document> docs, const BuildOptions& options = {});

}  // namespace tierank
