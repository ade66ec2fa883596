#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "tierank/eval.hpp"

#include "support/fixtures.hpp"

using namespace tierank;
using fixtures::TempDir;
using fixtures::write_file;

namespace {

using Judgments = std::unordered_map<std::string, int>;

std::vector<std::string> run_of(std::initializer_list<const char*> ids) {
    return {ids.begin(), ids.end()};
}

}  // namespace

TEST_SUITE_BEGIN("eval");

TEST_CASE("average precision on the worked example") {
    // R=2, run = [rel, nonrel, rel] -> (1/2)(1/1 + 2/3) = 5/6
    Judgments judgments{{"r1", 1}, {"r2", 1}};
    CHECK(std::abs(average_precision(run_of({"r1", "x", "r2"}), judgments) - 5.0 / 6.0) <= 1e-12);
}

TEST_CASE("average precision corner cases") {
    Judgments judgments{{"r1", 1}, {"r2", 2}, {"r3", 1}};
    // no relevant retrieved
    CHECK(average_precision(run_of({"x", "y"}), judgments) == 0.0);
    // all R relevant docs at ranks 1..R
    CHECK(average_precision(run_of({"r1", "r2", "r3"}), judgments) == 1.0);
    // topic with no positive judgments at all
    CHECK(average_precision(run_of({"x"}), Judgments{{"x", 0}}) == 0.0);
    // unjudged docs count as non-relevant: same value either way
    CHECK(average_precision(run_of({"u", "r1", "r2", "r3"}), judgments) ==
          average_precision(run_of({"n", "r1", "r2", "r3"}),
                            [&] {
                                auto j = judgments;
                                j["n"] = 0;
                                return j;
                            }()));
}

TEST_CASE("average precision honors the cutoff") {
    Judgments judgments{{"r1", 1}};
    // relevant document sits beyond the cutoff
    std::vector<std::string> run(10, "");
    for (int i = 0; i < 10; ++i) {
        run[i] = "filler" + std::to_string(i);
    }
    run.push_back("r1");  // rank 11
    CHECK(average_precision(run, judgments, 10) == 0.0);
    CHECK(std::abs(average_precision(run, judgments, 11) - 1.0 / 11.0) <= 1e-12);
}

TEST_CASE("average precision rejects duplicate documents via evaluate") {
    TempDir tmp("dup-run");
    write_file(tmp.file("run.txt"), "1 Q0 d1 1 2.0 t\n1 Q0 d1 2 1.0 t\n");
    write_file(tmp.file("qrels.txt"), "1 0 d1 1\n");
    CHECK_THROWS_AS(evaluate_run(tmp.file("run.txt"), tmp.file("qrels.txt")), EvalError);
}

TEST_CASE("precision at 30 divides by k always") {
    Judgments judgments;
    std::vector<std::string> run;
    for (int i = 0; i < 30; ++i) {
        const std::string id = "d" + std::to_string(i);
        run.push_back(id);
        if (i < 10) {
            judgments[id] = 1;
        }
    }
    CHECK(std::abs(precision_at(run, judgments) - 1.0 / 3.0) <= 1e-12);

    // run shorter than k, all relevant
    Judgments short_judgments;
    std::vector<std::string> short_run;
    for (int i = 0; i < 15; ++i) {
        const std::string id = "s" + std::to_string(i);
        short_run.push_back(id);
        short_judgments[id] = 1;
    }
    CHECK(precision_at(short_run, short_judgments) == 0.5);

    CHECK(precision_at({}, judgments) == 0.0);
}

TEST_CASE("ndcg on the worked examples") {
    // one judged doc, grade 1, retrieved at rank 1 -> ideal achieved
    CHECK(ndcg_at(run_of({"d"}), Judgments{{"d", 1}}) == 1.0);
    // same doc at rank 2: (1/log2(3)) / (1/log2(2)) = log(2)/log(3)
    const double expected = std::log(2.0) / std::log(3.0);
    CHECK(std::abs(ndcg_at(run_of({"x", "d"}), Judgments{{"d", 1}}) - expected) <= 1e-12);
    // no judged docs retrieved for a judged topic
    CHECK(ndcg_at(run_of({"x", "y"}), Judgments{{"d", 1}}) == 0.0);
    // IDCG = 0 topic
    CHECK(ndcg_at(run_of({"x"}), Judgments{{"x", 0}}) == 0.0);
    // negative grades clamp to gain 0
    CHECK(ndcg_at(run_of({"neg", "d"}), Judgments{{"neg", -2}, {"d", 1}}) ==
          ndcg_at(run_of({"unj", "d"}), Judgments{{"d", 1}}));
}

TEST_CASE("ndcg matches a term-by-term brute force") {
    std::mt19937_64 rng(55);
    for (int round = 0; round < 40; ++round) {
        Judgments judgments;
        const int judged = 1 + static_cast<int>(rng() % 25);
        for (int i = 0; i < judged; ++i) {
            judgments["d" + std::to_string(rng() % 40)] = static_cast<int>(rng() % 4) - 1;
        }
        std::vector<std::string> run;
        std::set<std::string> used;
        const int retrieved = static_cast<int>(rng() % 35);
        for (int i = 0; i < retrieved; ++i) {
            std::string id = "d" + std::to_string(rng() % 40);
            if (used.insert(id).second) {
                run.push_back(id);
            }
        }
        const std::uint32_t k = 1 + static_cast<std::uint32_t>(rng() % 25);

        // brute force, written independently: explicit rank loop over gains
        double dcg = 0.0;
        for (std::size_t rank = 1; rank <= run.size() && rank <= k; ++rank) {
            auto it = judgments.find(run[rank - 1]);
            int grade = it == judgments.end() ? 0 : std::max(0, it->second);
            dcg += (std::pow(2.0, grade) - 1.0) / (std::log(1.0 + rank) / std::log(2.0));
        }
        std::vector<int> grades;
        for (const auto& [id, grade] : judgments) {
            (void)id;
            if (grade > 0) {
                grades.push_back(grade);
            }
        }
        std::sort(grades.rbegin(), grades.rend());
        double idcg = 0.0;
        for (std::size_t rank = 1; rank <= grades.size() && rank <= k; ++rank) {
            idcg += (std::pow(2.0, grades[rank - 1]) - 1.0) /
                    (std::log(1.0 + rank) / std::log(2.0));
        }
        const double expected = idcg == 0.0 ? 0.0 : dcg / idcg;
        CHECK(std::abs(ndcg_at(run, judgments, k) - expected) <= 1e-12);
    }
}

TEST_CASE("metrics stay within [0,1] on random inputs") {
    std::mt19937_64 rng(66);
    for (int round = 0; round < 30; ++round) {
        Judgments judgments;
        for (int i = 0; i < 20; ++i) {
            judgments["d" + std::to_string(rng() % 30)] = static_cast<int>(rng() % 3);
        }
        std::vector<std::string> run;
        std::set<std::string> used;
        for (int i = 0; i < 25; ++i) {
            std::string id = "d" + std::to_string(rng() % 30);
            if (used.insert(id).second) {
                run.push_back(id);
            }
        }
        for (double v : {average_precision(run, judgments), precision_at(run, judgments),
                         ndcg_at(run, judgments)}) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("AP and P30 ignore permutations of trailing non-relevant documents") {
    Judgments judgments{{"r1", 1}, {"r2", 1}};
    std::vector<std::string> run = {"r1", "x1", "r2", "x2", "x3", "x4"};
    std::vector<std::string> permuted = {"r1", "x1", "r2", "x4", "x2", "x3"};
    CHECK(average_precision(run, judgments) == average_precision(permuted, judgments));
    CHECK(precision_at(run, judgments) == precision_at(permuted, judgments));
}

TEST_CASE("evaluating a written run equals evaluating the in-memory lists") {
    std::mt19937_64 rng(88);
    TempDir tmp("eval-roundtrip");
    for (int round = 0; round < 10; ++round) {
        std::map<std::string, RankedList> run;
        Qrels qrels;
        for (int t = 0; t < 3; ++t) {
            const std::string topic = "t" + std::to_string(t);
            RankedList list;
            double score = 3.0;
            for (int i = 0; i < 20; ++i) {
                if (rng() % 2 == 0) {
                    score -= 0.5;  // tie-heavy
                }
                const std::string id = "d" + std::to_string(i);
                list.entries.push_back(ScoredDoc{static_cast<InternalId>(i), id, score});
                if (rng() % 3 == 0) {
                    qrels.topics[topic][id] = 1 + static_cast<int>(rng() % 2);
                }
            }
            qrels.topics[topic]["guaranteed"] = 1;  // ensure R >= 1
            run[topic] = std::move(list);
        }
        const std::string run_path = tmp.file("run" + std::to_string(round) + ".txt");
        const std::string qrels_path = tmp.file("qrels" + std::to_string(round) + ".txt");
        write_run(run, "t", run_path);
        std::string qrels_text;
        for (const auto& [topic, docs] : qrels.topics) {
            for (const auto& [id, grade] : docs) {
                qrels_text += topic + " 0 " + id + " " + std::to_string(grade) + "\n";
            }
        }
        write_file(qrels_path, qrels_text);

        const TopicScores from_file = evaluate_run(run_path, qrels_path);
        const TopicScores in_memory = evaluate_ranked_lists(run, qrels);
        REQUIRE(from_file.per_topic.size() == in_memory.per_topic.size());
        for (const auto& [topic, values] : from_file.per_topic) {
            const auto& expected = in_memory.per_topic.at(topic);
            CHECK(values.ap == expected.ap);
            CHECK(values.p30 == expected.p30);
            CHECK(values.ndcg20 == expected.ndcg20);
        }
        CHECK(from_file.mean.ap == in_memory.mean.ap);
    }
}

TEST_CASE("foreign runs with score ties re-sort by docid descending") {
    TempDir tmp("foreign");
    // two tied lines, file order dA then dZ; trec_eval semantics put dZ first,
    // so with only dA relevant the AP must see dA at rank 2
    write_file(tmp.file("run.txt"),
               "1 Q0 dA 1 1.0 x\n"
               "1 Q0 dZ 2 1.0 x\n");
    write_file(tmp.file("qrels.txt"), "1 0 dA 1\n");
    const TopicScores scores = evaluate_run(tmp.file("run.txt"), tmp.file("qrels.txt"));
    CHECK(std::abs(scores.per_topic.at("1").ap - 0.5) <= 1e-12);
}

TEST_CASE("run topics missing from the qrels are skipped") {
    TempDir tmp("skip");
    write_file(tmp.file("run.txt"),
               "1 Q0 d1 1 2.0 x\n"
               "2 Q0 d1 1 2.0 x\n");
    write_file(tmp.file("qrels.txt"), "1 0 d1 1\n");
    const TopicScores scores = evaluate_run(tmp.file("run.txt"), tmp.file("qrels.txt"));
    CHECK(scores.per_topic.size() == 1);
    CHECK(scores.per_topic.count("1") == 1);
    CHECK(scores.aggregated_topics == 1);
}

TEST_CASE("empty intersection of run and qrels topics yields an empty report") {
    TempDir tmp("empty");
    write_file(tmp.file("run.txt"), "7 Q0 d1 1 2.0 x\n");
    write_file(tmp.file("qrels.txt"), "1 0 d1 1\n");
    const TopicScores scores = evaluate_run(tmp.file("run.txt"), tmp.file("qrels.txt"));
    CHECK(scores.per_topic.empty());
    CHECK(scores.aggregated_topics == 0);
}

TEST_CASE("topics without positive judgments are excluded from the means") {
    TempDir tmp("zero-rel");
    write_file(tmp.file("run.txt"),
               "1 Q0 d1 1 2.0 x\n"
               "2 Q0 d1 1 2.0 x\n");
    write_file(tmp.file("qrels.txt"),
               "1 0 d1 1\n"
               "2 0 d1 0\n");  // topic 2 judged but nothing relevant
    const TopicScores scores = evaluate_run(tmp.file("run.txt"), tmp.file("qrels.txt"));
    CHECK(scores.per_topic.size() == 2);
    CHECK(scores.aggregated_topics == 1);
    CHECK(scores.mean.ap == scores.per_topic.at("1").ap);
}

TEST_SUITE_END();
