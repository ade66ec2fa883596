#include "tierank/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_set>

namespace tierank {

namespace {

void require_no_duplicates(const std::vector<std::string>& run, const std::string& topic_id) {
    std::unordered_set<std::string> seen;
    for (const auto& doc : run) {
        if (!seen.insert(doc).second) {
            throw EvalError("duplicate document \"" + doc + "\" in run for topic " + topic_id);
        }
    }
}

std::uint32_t count_relevant(const std::unordered_map<std::string, int>& judgments) {
    std::uint32_t r = 0;
    for (const auto& [doc, grade] : judgments) {
        (void)doc;
        if (grade > 0) {
            ++r;
        }
    }
    return r;
}

double gain(int grade) {
    if (grade <= 0) {
        return 0.0;
    }
    return std::exp2(static_cast<double>(grade)) - 1.0;
}

/// Metrics for one topic whose run order is already final.
MetricValues score_topic(const std::vector<std::string>& run,
                         const std::unordered_map<std::string, int>& judgments,
                         const std::string& topic_id) {
    require_no_duplicates(run, topic_id);
    MetricValues values;
    values.ap = average_precision(run, judgments);
    values.p30 = precision_at(run, judgments);
    values.ndcg20 = ndcg_at(run, judgments);
    return values;
}

TopicScores aggregate(std::map<std::string, MetricValues> per_topic,
                      const std::map<std::string, std::uint32_t>& relevant_counts) {
    TopicScores scores;
    scores.per_topic = std::move(per_topic);
    for (const auto& [topic_id, values] : scores.per_topic) {
        if (relevant_counts.at(topic_id) == 0) {
            continue;  // nothing positively judged: excluded from the means
        }
        scores.mean.ap += values.ap;
        scores.mean.p30 += values.p30;
        scores.mean.ndcg20 += values.ndcg20;
        ++scores.aggregated_topics;
    }
    if (scores.aggregated_topics > 0) {
        scores.mean.ap /= scores.aggregated_topics;
        scores.mean.p30 /= scores.aggregated_topics;
        scores.mean.ndcg20 /= scores.aggregated_topics;
    }
    return scores;
}

}  // namespace

double average_precision(const std::vector<std::string>& run,
                         const std::unordered_map<std::string, int>& judgments,
                         std::uint32_t cutoff) {
    const std::uint32_t relevant_total = count_relevant(judgments);
    if (relevant_total == 0) {
        return 0.0;
    }
    std::uint32_t relevant_seen = 0;
    double sum = 0.0;
    const std::size_t limit = std::min<std::size_t>(run.size(), cutoff);
    for (std::size_t i = 0; i < limit; ++i) {
        auto it = judgments.find(run[i]);
        if (it != judgments.end() && it->second > 0) {
            ++relevant_seen;
            sum += static_cast<double>(relevant_seen) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant_total);
}

double precision_at(const std::vector<std::string>& run,
                    const std::unordered_map<std::string, int>& judgments, std::uint32_t k) {
    std::uint32_t relevant = 0;
    const std::size_t limit = std::min<std::size_t>(run.size(), k);
    for (std::size_t i = 0; i < limit; ++i) {
        auto it = judgments.find(run[i]);
        if (it != judgments.end() && it->second > 0) {
            ++relevant;
        }
    }
    return static_cast<double>(relevant) / static_cast<double>(k);
}

double ndcg_at(const std::vector<std::string>& run,
               const std::unordered_map<std::string, int>& judgments, std::uint32_t k) {
    double dcg = 0.0;
    const std::size_t limit = std::min<std::size_t>(run.size(), k);
    for (std::size_t i = 0; i < limit; ++i) {
        auto it = judgments.find(run[i]);
        const int grade = it == judgments.end() ? 0 : it->second;
        dcg += gain(grade) / std::log2(static_cast<double>(i) + 2.0);
    }

    std::vector<int> grades;
    grades.reserve(judgments.size());
    for (const auto& [doc, grade] : judgments) {
        (void)doc;
        if (grade > 0) {
            grades.push_back(grade);
        }
    }
    std::sort(grades.begin(), grades.end(), std::greater<>());
    double ideal = 0.0;
    const std::size_t ideal_limit = std::min<std::size_t>(grades.size(), k);
    for (std::size_t i = 0; i < ideal_limit; ++i) {
        ideal += gain(grades[i]) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (ideal == 0.0) {
        return 0.0;
    }
    return dcg / ideal;
}

TopicScores evaluate_run(const std::string& run_path, const std::string& qrels_path) {
    auto run = read_run(run_path);
    const Qrels qrels = read_qrels(qrels_path);

    std::map<std::string, MetricValues> per_topic;
    std::map<std::string, std::uint32_t> relevant_counts;
    for (auto& [topic_id, entries] : run) {
        auto topic_judgments = qrels.topics.find(topic_id);
        if (topic_judgments == qrels.topics.end()) {
            std::cerr << "warning: topic " << topic_id << " has no judgments; skipped\n";
            continue;
        }
        // trec_eval sorts by score and breaks ties by document id, descending.
        std::stable_sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
            if (a.written_score != b.written_score) {
                return a.written_score > b.written_score;
            }
            return a.external_id > b.external_id;
        });
        std::vector<std::string> ordered;
        ordered.reserve(entries.size());
        for (const RunEntry& entry : entries) {
            ordered.push_back(entry.external_id);
        }
        per_topic[topic_id] = score_topic(ordered, topic_judgments->second, topic_id);
        relevant_counts[topic_id] = count_relevant(topic_judgments->second);
    }
    if (per_topic.empty()) {
        std::cerr << "warning: no topic in the run has judgments; empty report\n";
    }
    return aggregate(std::move(per_topic), relevant_counts);
}

TopicScores evaluate_ranked_lists(const std::map<std::string, RankedList>& run,
                                  const Qrels& qrels) {
    std::map<std::string, MetricValues> per_topic;
    std::map<std::string, std::uint32_t> relevant_counts;
    for (const auto& [topic_id, list] : run) {
        auto topic_judgments = qrels.topics.find(topic_id);
        if (topic_judgments == qrels.topics.end()) {
            std::cerr << "warning: topic " << topic_id << " has no judgments; skipped\n";
            continue;
        }
        std::vector<std::string> ordered;
        ordered.reserve(list.entries.size());
        for (const ScoredDoc& entry : list.entries) {
            ordered.push_back(entry.external_id);
        }
        per_topic[topic_id] = score_topic(ordered, topic_judgments->second, topic_id);
        relevant_counts[topic_id] = count_relevant(topic_judgments->second);
    }
    return aggregate(std::move(per_topic), relevant_counts);
}

}  // namespace tierank
