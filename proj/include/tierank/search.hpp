#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tierank/index.hpp"

namespace tierank {

enum class Model { bm25, ql };

Model model_from_string(std::string_view name);
std::string_view to_string(Model model);

/// Ranking-model parameters. BM25 uses k1 and b, query likelihood uses the
/// Dirichlet smoothing parameter mu; defaults follow the values commonly used
/// for TREC-style reproductions.
struct ScoringParams {
    Model model = Model::bm25;
    double k1 = 0.9;
    double b = 0.4;
    double mu = 1000.0;
};

/// Total-order rule applied to documents whose scores are exactly equal.
/// internal_id reproduces the non-repeatable engine default; external_id and
/// reverse_chronological are the repeatable alternatives.
enum class TieBreakPolicy { internal_id, external_id, reverse_chronological };

TieBreakPolicy policy_from_string(std::string_view name);
std::string_view to_string(TieBreakPolicy policy);

struct ScoredDoc {
    InternalId doc;
    std::string external_id;
    double score;
};

/// Fully ordered top-k result for one topic: scores non-increasing, ties
/// ordered by the policy, no duplicate documents.
struct RankedList {
    std::string topic_id;
    std::vector<ScoredDoc> entries;
};

/// Bag-of-words query with positive per-term weights. RM3 interpolation
/// produces weights that sum to 1 (within 1e-9).
struct WeightedQuery {
    std::map<std::string, double> terms;
};

/// Analyzes query text and uses within-query term counts as weights.
WeightedQuery query_from_text(std::string_view text);

struct Rm3Params {
    std::uint32_t fb_docs = 10;
    std::uint32_t fb_terms = 10;
    double original_weight = 0.5;  // alpha
};

class SearchError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Model score of one document for a weighted query.
///
///   BM25:  sum over query terms with tf > 0 of
///          w_t * ln(1 + (N - df + 0.5)/(df + 0.5))
///              * tf*(k1+1) / (tf + k1*(1 - b + b*|D|/avgdl))
///   QL:    sum over query terms with cf > 0 of
///          w_t * ln((tf + mu*cf/|C|) / (|D| + mu))
///
/// Terms unseen in the collection contribute nothing and never produce
/// NaN or infinity. Summation runs in term-lexicographic order, so the value
/// is bit-identical across index builds of the same collection.
double score_doc(const Index& index, InternalId doc, const WeightedQuery& query,
                 const ScoringParams& params);

/// Strict total order over scored documents: score descending first (a tie is
/// exact floating-point equality), then the policy key. reverse_chronological
/// orders by timestamp descending with external id ascending as the final
/// key, and requires a timestamped index.
std::strong_ordering compare(const ScoredDoc& a, const ScoredDoc& b, TieBreakPolicy policy,
                             const Index& index);

/// Top-k retrieval over all documents matching at least one query term. The
/// bounded top-k structure is keyed by the full compare order, so the tie
/// policy takes part in candidate eviction inside the collection loop; this
/// is where a repeatable policy pays its external-id lookup cost.
RankedList search(const Index& index, const WeightedQuery& query, const ScoringParams& params,
                  TieBreakPolicy policy, std::uint32_t k);

/// Relevance-model estimation for RM3. The feedback set is the first
/// min(fb_docs, |initial|) entries of the initial list -- and is therefore
/// sensitive to how ties were ordered there. Feedback documents are weighted
/// by a softmax of their retrieval scores, P(t|R) is accumulated from stored
/// document vectors, the fb_terms best terms are kept (P ties broken by term,
/// ascending), renormalized, and interpolated with the normalized original
/// query at weight alpha.
WeightedQuery estimate_rm3(const Index& index, const RankedList& initial,
                           const WeightedQuery& original, const Rm3Params& rm3);

/// Two-stage RM3 retrieval: an initial search with the original query, then a
/// final search with the expanded query. Both stages use the same tie policy,
/// so score ties can shift both the feedback set and the final ranking.
RankedList search_rm3(const Index& index, const WeightedQuery& original,
                      const ScoringParams& params, const Rm3Params& rm3, TieBreakPolicy policy,
                      std::uint32_t k);

}  // namespace tierank
