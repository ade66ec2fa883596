#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "tierank/trec_io.hpp"

namespace tierank {

struct MetricValues {
    double ap = 0.0;
    double p30 = 0.0;
    double ndcg20 = 0.0;
};

/// Per-topic metric values plus their means. Means are taken over topics that
/// are present in the qrels with at least one positively judged document;
/// topics without a positive judgment are reported per-topic but excluded
/// from the aggregate.
struct TopicScores {
    std::map<std::string, MetricValues> per_topic;
    MetricValues mean;
    std::uint32_t aggregated_topics = 0;
};

class EvalError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// AP = (1/R) * sum over relevant retrieved ranks i <= cutoff of
/// (relevant count through i)/i, with R the number of positively judged
/// documents for the topic. Unjudged documents count as non-relevant.
/// Returns 0 when R = 0 (such topics are excluded from aggregation).
double average_precision(const std::vector<std::string>& run,
                         const std::unordered_map<std::string, int>& judgments,
                         std::uint32_t cutoff = 1000);

/// Fraction of the first k ranks holding a relevant document; the denominator
/// stays k even when fewer documents were retrieved.
double precision_at(const std::vector<std::string>& run,
                    const std::unordered_map<std::string, int>& judgments, std::uint32_t k = 30);

/// NDCG@k with gain 2^grade - 1 and discount log2(rank + 1); unjudged grade
/// is 0 and negative grades clamp to 0. The ideal ranking comes from the
/// topic's qrels grades sorted descending, truncated at k. Returns 0 when the
/// ideal DCG is 0 (such topics are excluded from aggregation).
double ndcg_at(const std::vector<std::string>& run,
               const std::unordered_map<std::string, int>& judgments, std::uint32_t k = 20);

/// Evaluates a run file against a qrels file. Per-topic entries are re-sorted
/// by written score descending with document id descending as tie-break,
/// matching what trec_eval does internally when it loads a run; for runs
/// written by this project the re-sort is a no-op because the perturbation
/// already made written scores strictly decreasing. Topics in the run that
/// are absent from the qrels are skipped with a warning on stderr.
TopicScores evaluate_run(const std::string& run_path, const std::string& qrels_path);

/// Evaluates in-memory ranked lists in their given order (no re-sort).
TopicScores evaluate_ranked_lists(const std::map<std::string, RankedList>& run,
                                  const Qrels& qrels);

}  // namespace tierank
