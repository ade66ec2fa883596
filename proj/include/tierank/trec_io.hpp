#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "tierank/search.hpp"

namespace tierank {

struct Topic {
    std::string topic_id;
    std::string query_text;
};

/// Graded relevance judgments keyed by (topic, external document id).
/// grade > 0 means relevant for the binary metrics; the graded values feed
/// NDCG.
struct Qrels {
    std::map<std::string, std::unordered_map<std::string, int>> topics;

    bool has_topic(const std::string& topic_id) const {
        return topics.find(topic_id) != topics.end();
    }
    /// Grade for (topic, doc); unjudged documents are grade 0.
    int grade(const std::string& topic_id, const std::string& doc_id) const;
};

/// One line of a TREC run file. Within a topic, ranks are 1..n contiguous and
/// written_score is strictly decreasing -- that is what the perturbation
/// guarantees.
struct RunEntry {
    std::string topic_id;
    std::string external_id;
    std::uint32_t rank = 0;
    double written_score = 0.0;
    std::string tag;
};

class TrecIoError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Tab-separated `topic_id<TAB>query` lines; blank lines and lines starting
/// with '#' are skipped. Order preserved; duplicate topic ids rejected.
std::vector<Topic> read_topics(const std::string& path);

/// Standard TREC qrels: whitespace-separated `topic 0 docid grade` lines.
/// A later duplicate (topic, doc) line overwrites the earlier one.
Qrels read_qrels(const std::string& path);

/// Applies the score perturbation that makes external evaluators respect our
/// tie ordering: the first score is written as-is; every later score that is
/// not strictly below its predecessor's written value is replaced by the
/// largest double strictly below it (one ULP down, cascading through a tie
/// run). Input must already be in final tie-broken, non-increasing order.
std::vector<RunEntry> perturb_scores(const std::string& topic_id,
                                     const std::vector<ScoredDoc>& entries,
                                     const std::string& tag);

/// Renders a whole run as TREC text: `topic Q0 docid rank score tag` with
/// single spaces and LF endings, topics in ascending id order, scores printed
/// with 17 significant digits so they round-trip double precision exactly.
std::string format_run(const std::map<std::string, RankedList>& run, const std::string& tag);

void write_run(const std::map<std::string, RankedList>& run, const std::string& tag,
               const std::string& path);

/// Parses a run file (ours or foreign), preserving per-topic file order.
std::map<std::string, std::vector<RunEntry>> read_run(const std::string& path);

}  // namespace tierank
