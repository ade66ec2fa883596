#include "tierank/search.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace tierank {

namespace {

std::uint32_t tf_in_doc(const Index& index, InternalId doc, const std::string& term) {
    const auto& vec = index.doc_vector(doc);
    auto it = std::lower_bound(vec.begin(), vec.end(), term,
                               [](const TermFreq& e, const std::string& t) { return e.term < t; });
    if (it == vec.end() || it->term != term) {
        return 0;
    }
    return it->tf;
}

std::strong_ordering from_int(int c) {
    if (c < 0) {
        return std::strong_ordering::less;
    }
    if (c > 0) {
        return std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
}

/// The one definition of the ranking order. Score descending; exact
/// floating-point equality is a tie, resolved by the policy key. Policy keys
/// look their data up through the index, so the repeatable policies touch the
/// id (and timestamp) maps on every comparison.
std::strong_ordering order_docs(InternalId a, double score_a, InternalId b, double score_b,
                                TieBreakPolicy policy, const Index& index) {
    if (score_a != score_b) {
        return score_a > score_b ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    switch (policy) {
        case TieBreakPolicy::internal_id:
            return a <=> b;
        case TieBreakPolicy::external_id:
            return from_int(index.external_id(a).compare(index.external_id(b)));
        case TieBreakPolicy::reverse_chronological: {
            const std::int64_t ta = index.timestamp(a);
            const std::int64_t tb = index.timestamp(b);
            if (ta != tb) {
                return ta > tb ? std::strong_ordering::less : std::strong_ordering::greater;
            }
            return from_int(index.external_id(a).compare(index.external_id(b)));
        }
    }
    throw std::logic_error("unreachable tie-break policy");
}

double bm25_term(std::uint32_t tf, std::uint32_t df, std::uint32_t n, double doc_len,
                 double avgdl, double k1, double b) {
    const double idf = std::log(1.0 + (static_cast<double>(n) - df + 0.5) / (df + 0.5));
    const double norm = 1.0 - b + b * doc_len / avgdl;
    const double tfd = static_cast<double>(tf);
    return idf * tfd * (k1 + 1.0) / (tfd + k1 * norm);
}

double ql_term(std::uint32_t tf, std::uint64_t cf, std::uint64_t collection_len, double doc_len,
               double mu) {
    const double prior = mu * static_cast<double>(cf) / static_cast<double>(collection_len);
    return std::log((static_cast<double>(tf) + prior) / (doc_len + mu));
}

double normalized_sum(const std::map<std::string, double>& weights) {
    double sum = 0.0;
    for (const auto& [term, w] : weights) {
        (void)term;
        sum += w;
    }
    return sum;
}

}  // namespace

Model model_from_string(std::string_view name) {
    if (name == "bm25") {
        return Model::bm25;
    }
    if (name == "ql") {
        return Model::ql;
    }
    throw std::invalid_argument("unknown ranking model: " + std::string(name));
}

std::string_view to_string(Model model) {
    return model == Model::bm25 ? "bm25" : "ql";
}

TieBreakPolicy policy_from_string(std::string_view name) {
    if (name == "internal_id") {
        return TieBreakPolicy::internal_id;
    }
    if (name == "external_id") {
        return TieBreakPolicy::external_id;
    }
    if (name == "reverse_chronological") {
        return TieBreakPolicy::reverse_chronological;
    }
    throw std::invalid_argument("unknown tie-break policy: " + std::string(name));
}

std::string_view to_string(TieBreakPolicy policy) {
    switch (policy) {
        case TieBreakPolicy::internal_id: return "internal_id";
        case TieBreakPolicy::external_id: return "external_id";
        case TieBreakPolicy::reverse_chronological: return "reverse_chronological";
    }
    return "?";
}

WeightedQuery query_from_text(std::string_view text) {
    WeightedQuery query;
    for (auto& term : analyze(text)) {
        query.terms[term] += 1.0;
    }
    return query;
}

double score_doc(const Index& index, InternalId doc, const WeightedQuery& query,
                 const ScoringParams& params) {
    const CollectionStats& stats = index.stats();
    const double doc_len = static_cast<double>(index.doc_len(doc));
    double score = 0.0;
    for (const auto& [term, weight] : query.terms) {
        if (params.model == Model::bm25) {
            const std::uint32_t tf = tf_in_doc(index, doc, term);
            if (tf == 0) {
                continue;
            }
            score += weight * bm25_term(tf, index.df(term), stats.doc_count, doc_len,
                                        stats.avg_doc_len, params.k1, params.b);
        } else {
            const std::uint64_t cf = index.cf(term);
            if (cf == 0) {
                continue;
            }
            const std::uint32_t tf = tf_in_doc(index, doc, term);
            score += weight * ql_term(tf, cf, stats.total_terms, doc_len, params.mu);
        }
    }
    return score;
}

std::strong_ordering compare(const ScoredDoc& a, const ScoredDoc& b, TieBreakPolicy policy,
                             const Index& index) {
    return order_docs(a.doc, a.score, b.doc, b.score, policy, index);
}

RankedList search(const Index& index, const WeightedQuery& query, const ScoringParams& params,
                  TieBreakPolicy policy, std::uint32_t k) {
    if (k == 0) {
        throw std::invalid_argument("search: k must be >= 1");
    }
    if (policy == TieBreakPolicy::reverse_chronological && !index.has_timestamps()) {
        throw SearchError("reverse_chronological tie-breaking needs a timestamped index");
    }

    // Candidate set: every document holding at least one query term.
    std::vector<InternalId> candidates;
    for (const auto& [term, weight] : query.terms) {
        (void)weight;
        for (const Posting& p : index.postings(term)) {
            candidates.push_back(p.doc);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    struct Candidate {
        InternalId doc;
        double score;
    };
    // Max-heap under "ranks before", so top() is the worst kept candidate and
    // every eviction decision runs through the policy's full order.
    auto ranks_before = [&](const Candidate& a, const Candidate& b) {
        return order_docs(a.doc, a.score, b.doc, b.score, policy, index) ==
               std::strong_ordering::less;
    };
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(ranks_before)> heap(
        ranks_before);

    for (InternalId doc : candidates) {
        Candidate c{doc, score_doc(index, doc, query, params)};
        if (heap.size() < k) {
            heap.push(c);
        } else if (ranks_before(c, heap.top())) {
            heap.pop();
            heap.push(c);
        }
    }

    RankedList out;
    out.entries.resize(heap.size());
    for (std::size_t i = heap.size(); i-- > 0;) {
        const Candidate& c = heap.top();
        out.entries[i] = ScoredDoc{c.doc, index.external_id(c.doc), c.score};
        heap.pop();
    }
    return out;
}

WeightedQuery estimate_rm3(const Index& index, const RankedList& initial,
                           const WeightedQuery& original, const Rm3Params& rm3) {
    if (initial.entries.empty()) {
        throw SearchError("estimate_rm3: initial ranked list is empty");
    }
    const std::size_t fb_count =
        std::min<std::size_t>(rm3.fb_docs, initial.entries.size());

    // Softmax document weights over retrieval scores, shifted by the maximum
    // for scale stability (QL scores live in the log domain).
    double max_score = initial.entries[0].score;
    for (std::size_t i = 1; i < fb_count; ++i) {
        max_score = std::max(max_score, initial.entries[i].score);
    }
    std::vector<double> doc_weight(fb_count);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < fb_count; ++i) {
        doc_weight[i] = std::exp(initial.entries[i].score - max_score);
        weight_sum += doc_weight[i];
    }
    for (double& w : doc_weight) {
        w /= weight_sum;
    }

    // Relevance model P(t|R) from stored document vectors.
    std::map<std::string, double> relevance;
    for (std::size_t i = 0; i < fb_count; ++i) {
        const InternalId doc = initial.entries[i].doc;
        const double len = static_cast<double>(index.doc_len(doc));
        for (const TermFreq& entry : index.doc_vector(doc)) {
            relevance[entry.term] += doc_weight[i] * static_cast<double>(entry.tf) / len;
        }
    }

    // Keep the fb_terms most probable terms; exact P ties break by term.
    std::vector<std::pair<std::string, double>> ranked(relevance.begin(), relevance.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    if (ranked.size() > rm3.fb_terms) {
        ranked.resize(rm3.fb_terms);
    }
    std::map<std::string, double> expansion(ranked.begin(), ranked.end());

    std::map<std::string, double> original_norm = original.terms;
    const double original_sum = normalized_sum(original_norm);
    for (auto& [term, w] : original_norm) {
        (void)term;
        w /= original_sum;
    }

    if (expansion.empty()) {
        // No usable feedback terms (only possible with hand-built input whose
        // feedback documents are all empty); fall back to the original query.
        return WeightedQuery{std::move(original_norm)};
    }
    const double expansion_sum = normalized_sum(expansion);
    for (auto& [term, w] : expansion) {
        (void)term;
        w /= expansion_sum;
    }

    const double alpha = rm3.original_weight;
    WeightedQuery out;
    for (const auto& [term, w] : original_norm) {
        out.terms[term] += alpha * w;
    }
    for (const auto& [term, w] : expansion) {
        out.terms[term] += (1.0 - alpha) * w;
    }
    // Interpolation endpoints leave exact zeros behind; weights must stay
    // positive.
    for (auto it = out.terms.begin(); it != out.terms.end();) {
        it = it->second <= 0.0 ? out.terms.erase(it) : std::next(it);
    }
    return out;
}

RankedList search_rm3(const Index& index, const WeightedQuery& original,
                      const ScoringParams& params, const Rm3Params& rm3, TieBreakPolicy policy,
                      std::uint32_t k) {
    RankedList first_pass = search(index, original, params, policy, k);
    WeightedQuery expanded = estimate_rm3(index, first_pass, original, rm3);
    RankedList final_pass = search(index, expanded, params, policy, k);
    final_pass.topic_id = first_pass.topic_id;
    return final_pass;
}

}  // namespace tierank
