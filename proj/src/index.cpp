#include "tierank/index.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace tierank {

namespace {

constexpr std::uint32_t kMagic = 0x31'4B'52'54;  // "TRK1" little-endian
constexpr std::uint32_t kVersion = 1;

// ---- little-endian primitives ----------------------------------------------

void put_u8(std::string& out, std::uint8_t v) {
    out.push_back(static_cast<char>(v));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
}

void put_i64(std::string& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

void put_str(std::string& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.append(s);
}

class ByteReader {
  public:
    ByteReader(const std::string& data, const std::string& path): data_(data), path_(path) {}

    std::uint8_t u8() {
        need(1);
        return static_cast<std::uint8_t>(data_[pos_++]);
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
        }
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_++])) << (8 * i);
        }
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    std::string str() {
        std::uint32_t n = u32();
        need(n);
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n) {
        if (pos_ + n > data_.size()) {
            throw IndexError("truncated index file: " + path_);
        }
    }

    const std::string& data_;
    std::string path_;
    std::size_t pos_ = 0;
};

}  // namespace

struct AnalyzedDoc {
    Document doc;
    std::vector<TermFreq> vector;  // sorted by term
    std::uint32_t length = 0;
};

static AnalyzedDoc analyze_doc(Document doc) {
    AnalyzedDoc out;
    std::map<std::string, std::uint32_t> counts;
    std::uint32_t length = 0;
    for (auto& term : analyze(doc.text)) {
        ++counts[term];
        ++length;
    }
    out.vector.reserve(counts.size());
    for (auto& [term, tf] : counts) {
        out.vector.push_back(TermFreq{term, tf});
    }
    out.length = length;
    out.doc = std::move(doc);
    return out;
}

/// Arrival-ordered commit point plus the derivation pass that follows it.
/// All internal id assignment happens in commit(), under one mutex: ids mean
/// nothing more than "the order documents reached the index", which is
/// exactly what makes them unstable under concurrent ingestion.
class IndexBuilder {
  public:
    explicit IndexBuilder(Index& index): index_(index) {}

    void commit(AnalyzedDoc&& analyzed) {
        std::lock_guard<std::mutex> lock(mutex_);
        commit_unlocked(std::move(analyzed.doc), std::move(analyzed.vector), analyzed.length);
    }

    void commit_raw(std::string external_id, std::optional<std::int64_t> timestamp,
                    std::vector<TermFreq> vec, std::uint32_t length) {
        std::lock_guard<std::mutex> lock(mutex_);
        Document doc;
        doc.external_id = std::move(external_id);
        doc.timestamp = timestamp;
        commit_unlocked(std::move(doc), std::move(vec), length);
    }

    /// Derives postings and collection statistics from the committed document
    /// vectors. Everything here is a pure function of the committed state, so
    /// two builds that committed the same documents in different orders agree
    /// on all of it except the id maps.
    void finalize() {
        const std::uint32_t n = static_cast<std::uint32_t>(index_.external_ids_.size());
        std::uint64_t total = 0;
        for (InternalId d = 0; d < n; ++d) {
            for (const TermFreq& entry : index_.doc_vectors_[d]) {
                auto& term = index_.terms_[entry.term];
                term.postings.push_back(Posting{d, entry.tf});
                term.cf += entry.tf;
            }
            total += index_.doc_lens_[d];
        }
        index_.stats_.doc_count = n;
        index_.stats_.total_terms = total;
        index_.stats_.avg_doc_len = static_cast<double>(total) / static_cast<double>(n);
    }

  private:
    void commit_unlocked(Document doc, std::vector<TermFreq> vec, std::uint32_t length) {
        const InternalId id = static_cast<InternalId>(index_.external_ids_.size());
        if (!index_.internal_ids_.emplace(doc.external_id, id).second) {
            throw IndexError("duplicate document id \"" + doc.external_id + "\"");
        }
        if (id == 0) {
            chronological_ = doc.timestamp.has_value();
        } else if (chronological_ != doc.timestamp.has_value()) {
            throw IndexError("mixed timestamp presence at document \"" + doc.external_id + "\"");
        }
        index_.external_ids_.push_back(std::move(doc.external_id));
        if (chronological_) {
            index_.timestamps_.push_back(*doc.timestamp);
        }
        index_.doc_lens_.push_back(length);
        index_.doc_vectors_.push_back(std::move(vec));
    }

    Index& index_;
    std::mutex mutex_;
    bool chronological_ = false;
};

const std::vector<Posting>& Index::postings(const std::string& term) const {
    static const std::vector<Posting> kEmpty;
    auto it = terms_.find(term);
    return it == terms_.end() ? kEmpty : it->second.postings;
}

std::uint32_t Index::df(const std::string& term) const {
    auto it = terms_.find(term);
    return it == terms_.end() ? 0 : static_cast<std::uint32_t>(it->second.postings.size());
}

std::uint64_t Index::cf(const std::string& term) const {
    auto it = terms_.find(term);
    return it == terms_.end() ? 0 : it->second.cf;
}

InternalId Index::internal_id(const std::string& external) const {
    auto it = internal_ids_.find(external);
    if (it == internal_ids_.end()) {
        throw IndexError("unknown external document id \"" + external + "\"");
    }
    return it->second;
}

std::int64_t Index::timestamp(InternalId d) const {
    if (!has_timestamps()) {
        throw IndexError("index has no timestamps");
    }
    return timestamps_.at(d);
}

std::vector<std::string> Index::terms() const {
    std::vector<std::string> out;
    out.reserve(terms_.size());
    for (const auto& [term, entry] : terms_) {
        (void)entry;
        out.push_back(term);
    }
    std::sort(out.begin(), out.end());
    return out;
}

Index build_index(std::vector<Document> docs, const BuildOptions& options) {
    if (docs.empty()) {
        throw IndexError("cannot build an index over an empty collection");
    }
    if (options.workers < 1) {
        throw std::invalid_argument("build_index: workers must be >= 1");
    }
    if (options.workers > 1 && options.order_seed.has_value()) {
        throw std::invalid_argument(
            "build_index: workers > 1 with order_seed is ambiguous; pick one source of ordering");
    }

    Index index;
    IndexBuilder builder(index);

    if (options.order_seed.has_value()) {
        auto perm = shuffled_order(static_cast<std::uint32_t>(docs.size()), *options.order_seed);
        for (std::uint32_t pos : perm) {
            builder.commit(analyze_doc(std::move(docs[pos])));
        }
    } else if (options.workers == 1) {
        for (auto& doc : docs) {
            builder.commit(analyze_doc(std::move(doc)));
        }
    } else {
        std::atomic<std::size_t> cursor{0};
        std::mutex error_mutex;
        std::exception_ptr error;
        auto work = [&] {
            try {
                for (;;) {
                    std::size_t i = cursor.fetch_add(1);
                    if (i >= docs.size()) {
                        return;
                    }
                    builder.commit(analyze_doc(std::move(docs[i])));
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                cursor.store(docs.size());
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(options.workers);
        for (unsigned w = 0; w < options.workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    builder.finalize();
    return index;
}

void Index::save(const std::string& path) const {
    std::string out;
    put_u32(out, kMagic);
    put_u32(out, kVersion);
    put_u8(out, has_timestamps() ? 1 : 0);
    put_u32(out, stats_.doc_count);
    put_u64(out, stats_.total_terms);
    for (InternalId d = 0; d < stats_.doc_count; ++d) {
        put_str(out, external_ids_[d]);
        if (has_timestamps()) {
            put_i64(out, timestamps_[d]);
        }
        const auto& vec = doc_vectors_[d];
        put_u32(out, static_cast<std::uint32_t>(vec.size()));
        for (const TermFreq& entry : vec) {
            put_str(out, entry.term);
            put_u32(out, entry.tf);
        }
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw IndexError("cannot open index file for writing: " + path);
    }
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) {
        throw IndexError("write error on index file: " + path);
    }
}

Index Index::load(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw IndexError("cannot open index file: " + path);
    }
    std::string data(std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>{});
    ByteReader in(data, path);
    if (in.u32() != kMagic) {
        throw IndexError("not an index file: " + path);
    }
    if (std::uint32_t v = in.u32(); v != kVersion) {
        throw IndexError("unsupported index version " + std::to_string(v) + " in " + path);
    }
    const bool chronological = in.u8() != 0;
    const std::uint32_t n = in.u32();
    const std::uint64_t total = in.u64();
    if (n == 0) {
        throw IndexError("index file holds an empty collection: " + path);
    }

    Index index;
    IndexBuilder builder(index);
    index.external_ids_.reserve(n);
    index.doc_vectors_.reserve(n);
    index.doc_lens_.reserve(n);
    for (InternalId d = 0; d < n; ++d) {
        std::string external = in.str();
        std::optional<std::int64_t> timestamp;
        if (chronological) {
            timestamp = in.i64();
        }
        const std::uint32_t vec_len = in.u32();
        std::vector<TermFreq> vec;
        vec.reserve(vec_len);
        std::uint32_t length = 0;
        for (std::uint32_t i = 0; i < vec_len; ++i) {
            std::string term = in.str();
            std::uint32_t tf = in.u32();
            if (tf == 0 || (i > 0 && !(vec.back().term < term))) {
                throw IndexError("corrupt document vector in " + path);
            }
            length += tf;
            vec.push_back(TermFreq{std::move(term), tf});
        }
        builder.commit_raw(std::move(external), timestamp, std::move(vec), length);
    }
    if (!in.done()) {
        throw IndexError("trailing bytes in index file: " + path);
    }
    builder.finalize();
    if (index.stats_.total_terms != total) {
        throw IndexError("corrupt index file (term count mismatch): " + path);
    }
    return index;
}

}  // namespace tierank
