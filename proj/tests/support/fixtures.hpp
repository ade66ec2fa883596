#pragma once

// Deterministic fixture builders shared by the unit and acceptance tests.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "tierank/corpus.hpp"
#include "tierank/search.hpp"

namespace fixtures {

/// Throwaway directory under the system temp path, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& label) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("tierank-" + label + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
}

inline tierank::Document doc(std::string id, std::string text) {
    tierank::Document d;
    d.external_id = std::move(id);
    d.text = std::move(text);
    return d;
}

inline tierank::Document timestamped_doc(std::string id, std::int64_t ts, std::string text) {
    tierank::Document d = doc(std::move(id), std::move(text));
    d.timestamp = ts;
    return d;
}

/// Small random corpus with a controllable share of exact-duplicate texts
/// (duplicates guarantee score ties under both models).
inline std::vector<tierank::Document> random_corpus(std::mt19937_64& rng, std::uint32_t num_docs,
                                                    std::uint32_t vocab, double duplicate_share,
                                                    bool timestamps = false) {
    auto draw = [&rng](std::uint64_t bound) {
        return static_cast<std::uint32_t>(rng() % bound);
    };
    std::vector<std::string> texts;
    const auto num_dups = static_cast<std::uint32_t>(duplicate_share * num_docs);
    const std::uint32_t num_base = num_docs - std::min(num_dups, num_docs - 1);
    for (std::uint32_t i = 0; i < num_base; ++i) {
        std::string text;
        const std::uint32_t length = 3 + draw(10);
        for (std::uint32_t t = 0; t < length; ++t) {
            if (t > 0) {
                text += ' ';
            }
            text += 'v';
            text += std::to_string(draw(vocab));
        }
        texts.push_back(std::move(text));
    }
    while (texts.size() < num_docs) {
        texts.push_back(texts[draw(num_base)]);
    }
    std::vector<tierank::Document> docs;
    for (std::uint32_t i = 0; i < num_docs; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "R%04u", i);
        auto d = doc(id, texts[i]);
        if (timestamps) {
            d.timestamp = 1000 + draw(500);  // collisions intended
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

inline tierank::WeightedQuery random_query(std::mt19937_64& rng, std::uint32_t vocab,
                                           std::uint32_t max_terms) {
    tierank::WeightedQuery query;
    const std::uint32_t count = 1 + static_cast<std::uint32_t>(rng() % max_terms);
    for (std::uint32_t i = 0; i < count; ++i) {
        query.terms["v" + std::to_string(rng() % vocab)] += 1.0;
    }
    return query;
}

}  // namespace fixtures
