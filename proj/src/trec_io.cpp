#include "tierank/trec_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace tierank {

namespace {

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", score);
    return buf;
}

std::ifstream open_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw TrecIoError("cannot open file: " + path);
    }
    return in;
}

}  // namespace

int Qrels::grade(const std::string& topic_id, const std::string& doc_id) const {
    auto topic = topics.find(topic_id);
    if (topic == topics.end()) {
        return 0;
    }
    auto judgment = topic->second.find(doc_id);
    return judgment == topic->second.end() ? 0 : judgment->second;
}

std::vector<Topic> read_topics(const std::string& path) {
    auto in = open_text(path);
    std::vector<Topic> topics;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw TrecIoError(path + ":" + std::to_string(lineno) +
                              ": expected `topic_id<TAB>query`");
        }
        Topic topic{line.substr(0, tab), line.substr(tab + 1)};
        if (!seen.insert(topic.topic_id).second) {
            throw TrecIoError(path + ":" + std::to_string(lineno) + ": duplicate topic id \"" +
                              topic.topic_id + "\"");
        }
        topics.push_back(std::move(topic));
    }
    return topics;
}

Qrels read_qrels(const std::string& path) {
    auto in = open_text(path);
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        std::string topic;
        std::string iteration;
        std::string doc;
        std::string grade_text;
        if (!(fields >> topic >> iteration >> doc >> grade_text)) {
            throw TrecIoError(path + ":" + std::to_string(lineno) +
                              ": expected `topic 0 docid grade`");
        }
        int grade = 0;
        try {
            std::size_t used = 0;
            grade = std::stoi(grade_text, &used);
            if (used != grade_text.size()) {
                throw std::invalid_argument(grade_text);
            }
        } catch (const std::exception&) {
            throw TrecIoError(path + ":" + std::to_string(lineno) + ": non-integer grade \"" +
                              grade_text + "\"");
        }
        qrels.topics[topic][doc] = grade;  // later lines overwrite
    }
    return qrels;
}

std::vector<RunEntry> perturb_scores(const std::string& topic_id,
                                     const std::vector<ScoredDoc>& entries,
                                     const std::string& tag) {
    std::vector<RunEntry> out;
    out.reserve(entries.size());
    double previous_written = 0.0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        double written = entries[i].score;
        if (i > 0) {
            if (entries[i].score > entries[i - 1].score) {
                throw TrecIoError("perturb_scores: scores for topic " + topic_id +
                                  " are not non-increasing");
            }
            if (!(written < previous_written)) {
                written = std::nextafter(previous_written,
                                         -std::numeric_limits<double>::infinity());
            }
        }
        out.push_back(RunEntry{topic_id, entries[i].external_id,
                               static_cast<std::uint32_t>(i + 1), written, tag});
        previous_written = written;
    }
    return out;
}

std::string format_run(const std::map<std::string, RankedList>& run, const std::string& tag) {
    std::string out;
    for (const auto& [topic_id, list] : run) {
        for (const RunEntry& entry : perturb_scores(topic_id, list.entries, tag)) {
            out += entry.topic_id;
            out += " Q0 ";
            out += entry.external_id;
            out += ' ';
            out += std::to_string(entry.rank);
            out += ' ';
            out += format_score(entry.written_score);
            out += ' ';
            out += entry.tag;
            out += '\n';
        }
    }
    return out;
}

void write_run(const std::map<std::string, RankedList>& run, const std::string& tag,
               const std::string& path) {
    std::string text = format_run(run, tag);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw TrecIoError("cannot open run file for writing: " + path);
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw TrecIoError("write error on run file: " + path);
    }
}

std::map<std::string, std::vector<RunEntry>> read_run(const std::string& path) {
    auto in = open_text(path);
    std::map<std::string, std::vector<RunEntry>> run;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream fields(line);
        RunEntry entry;
        std::string q0;
        std::string rank_text;
        std::string score_text;
        if (!(fields >> entry.topic_id >> q0 >> entry.external_id >> rank_text >> score_text >>
              entry.tag)) {
            throw TrecIoError(path + ":" + std::to_string(lineno) +
                              ": expected `topic Q0 docid rank score tag`");
        }
        // from_chars rather than stod: written scores may be subnormal after
        // ULP perturbation near zero, and stod reports those as out of range.
        auto rank_result = std::from_chars(rank_text.data(), rank_text.data() + rank_text.size(),
                                           entry.rank);
        auto score_result = std::from_chars(
            score_text.data(), score_text.data() + score_text.size(), entry.written_score);
        if (rank_result.ec != std::errc{} || rank_result.ptr != rank_text.data() + rank_text.size() ||
            score_result.ec != std::errc{} ||
            score_result.ptr != score_text.data() + score_text.size()) {
            throw TrecIoError(path + ":" + std::to_string(lineno) + ": bad rank or score");
        }
        run[entry.topic_id].push_back(std::move(entry));
    }
    return run;
}

}  // namespace tierank
