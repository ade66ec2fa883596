#include "tierank/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

namespace tierank {

namespace {

namespace fs = std::filesystem;

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_display(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw HarnessError("cannot open file for writing: " + path);
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw HarnessError("write error: " + path);
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw HarnessError("cannot open file: " + path);
    }
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>{});
}

ScoringParams scoring_params(const ExperimentConfig& config, const ModelSpec& spec) {
    ScoringParams params;
    params.model = spec.model;
    params.k1 = config.k1;
    params.b = config.b;
    params.mu = config.mu;
    return params;
}

struct PreparedTopic {
    std::string topic_id;
    WeightedQuery query;
};

std::vector<PreparedTopic> prepare_topics(const std::string& topics_path) {
    std::vector<PreparedTopic> prepared;
    for (const Topic& topic : read_topics(topics_path)) {
        prepared.push_back(PreparedTopic{topic.topic_id, query_from_text(topic.query_text)});
    }
    return prepared;
}

RankedList run_topic(const Index& index, const PreparedTopic& topic, const ModelSpec& spec,
                     const ScoringParams& params, const Rm3Params& rm3, TieBreakPolicy policy,
                     std::uint32_t k) {
    RankedList list = spec.rm3 ? search_rm3(index, topic.query, params, rm3, policy, k)
                               : search(index, topic.query, params, policy, k);
    list.topic_id = topic.topic_id;
    return list;
}

std::map<std::string, RankedList> make_run(const Index& index,
                                           const std::vector<PreparedTopic>& topics,
                                           const ModelSpec& spec, const ScoringParams& params,
                                           const Rm3Params& rm3, TieBreakPolicy policy,
                                           std::uint32_t k) {
    std::map<std::string, RankedList> run;
    for (const PreparedTopic& topic : topics) {
        try {
            run[topic.topic_id] = run_topic(index, topic, spec, params, rm3, policy, k);
        } catch (const SearchError& e) {
            throw HarnessError("topic " + topic.topic_id + ": " + e.what());
        }
    }
    return run;
}

Index build_nth_index(const ExperimentConfig& config, const std::vector<Document>& docs,
                      std::uint32_t ordinal) {
    BuildOptions options;
    if (config.true_threads) {
        options.workers = config.workers;
    } else {
        options.order_seed = config.seeds[ordinal];
    }
    return build_index(docs, options);
}

struct MetricRow {
    double ap;
    double p30;
    double ndcg20;
};

MetricRow metric_row(const TopicScores& scores) {
    return MetricRow{scores.mean.ap, scores.mean.p30, scores.mean.ndcg20};
}

double pick(const MetricRow& row, const std::string& metric) {
    if (metric == "ap") {
        return row.ap;
    }
    if (metric == "p30") {
        return row.p30;
    }
    return row.ndcg20;
}

const std::vector<std::string> kMetrics = {"ap", "p30", "ndcg20"};

}  // namespace

ModelSpec model_spec_from_string(std::string_view name) {
    ModelSpec spec;
    std::string_view base = name;
    if (auto plus = name.find('+'); plus != std::string_view::npos) {
        if (name.substr(plus + 1) != "rm3") {
            throw std::invalid_argument("unknown model condition: " + std::string(name));
        }
        spec.rm3 = true;
        base = name.substr(0, plus);
    }
    spec.model = model_from_string(base);
    return spec;
}

std::string to_string(const ModelSpec& spec) {
    std::string out(to_string(spec.model));
    if (spec.rm3) {
        out += "+rm3";
    }
    return out;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw HarnessError("config " + path + ": " + e.what());
    }
    if (!doc.is_object()) {
        throw HarnessError("config " + path + ": expected a JSON object");
    }
    ExperimentConfig config;
    for (const auto& [key, value] : doc.items()) {
        try {
            if (key == "corpus") {
                config.corpus_path = value.get<std::string>();
            } else if (key == "format") {
                config.format = corpus_format_from_string(value.get<std::string>());
            } else if (key == "topics") {
                config.topics_path = value.get<std::string>();
            } else if (key == "qrels") {
                config.qrels_path = value.get<std::string>();
            } else if (key == "models") {
                config.models.clear();
                for (const auto& name : value) {
                    config.models.push_back(model_spec_from_string(name.get<std::string>()));
                }
            } else if (key == "num_indexes") {
                config.num_indexes = value.get<std::uint32_t>();
            } else if (key == "seeds") {
                config.seeds = value.get<std::vector<std::uint64_t>>();
            } else if (key == "repeatable_policy") {
                config.repeatable_policy = policy_from_string(value.get<std::string>());
            } else if (key == "k") {
                config.k = value.get<std::uint32_t>();
            } else if (key == "k1") {
                config.k1 = value.get<double>();
            } else if (key == "b") {
                config.b = value.get<double>();
            } else if (key == "mu") {
                config.mu = value.get<double>();
            } else if (key == "fb_docs") {
                config.rm3.fb_docs = value.get<std::uint32_t>();
            } else if (key == "fb_terms") {
                config.rm3.fb_terms = value.get<std::uint32_t>();
            } else if (key == "original_weight") {
                config.rm3.original_weight = value.get<double>();
            } else if (key == "tag") {
                config.tag = value.get<std::string>();
            } else if (key == "output_dir") {
                config.output_dir = value.get<std::string>();
            } else if (key == "trials") {
                config.trials = value.get<std::uint32_t>();
            } else if (key == "warmup_trials") {
                config.warmup_trials = value.get<std::uint32_t>();
            } else if (key == "true_threads") {
                config.true_threads = value.get<bool>();
            } else if (key == "workers") {
                config.workers = value.get<unsigned>();
            } else {
                throw HarnessError("config " + path + ": unknown key \"" + key + "\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw HarnessError("config " + path + ", key \"" + key + "\": " + e.what());
        }
    }
    return config;
}

void validate_config(ExperimentConfig& config) {
    if (config.corpus_path.empty() || config.topics_path.empty() || config.qrels_path.empty()) {
        throw HarnessError("config needs corpus, topics, and qrels paths");
    }
    if (config.models.empty()) {
        config.models = {model_spec_from_string("bm25"), model_spec_from_string("bm25+rm3"),
                         model_spec_from_string("ql"), model_spec_from_string("ql+rm3")};
    }
    if (config.num_indexes < 1) {
        throw HarnessError("num_indexes must be >= 1");
    }
    if (config.seeds.empty()) {
        for (std::uint32_t i = 1; i <= config.num_indexes; ++i) {
            config.seeds.push_back(i);
        }
    }
    if (config.seeds.size() != config.num_indexes) {
        throw HarnessError("seeds must have exactly num_indexes entries");
    }
    std::unordered_set<std::uint64_t> distinct(config.seeds.begin(), config.seeds.end());
    if (distinct.size() != config.seeds.size()) {
        throw HarnessError("seeds must be pairwise distinct");
    }
    if (config.repeatable_policy == TieBreakPolicy::internal_id) {
        throw HarnessError("the repeatable policy must be external_id or reverse_chronological");
    }
    if (config.k < 1) {
        throw HarnessError("k must be >= 1");
    }
    if (config.trials < 1) {
        throw HarnessError("trials must be >= 1");
    }
    if (config.true_threads && config.workers < 2) {
        throw HarnessError("true_threads needs workers >= 2");
    }
    if (config.output_dir.empty()) {
        throw HarnessError("output_dir must not be empty");
    }
}

std::string internal_run_filename(const ModelSpec& spec, std::uint32_t ordinal) {
    return "run-" + to_string(spec) + "-internal-" + std::to_string(ordinal) + ".txt";
}

std::string repeatable_run_filename(const ModelSpec& spec, std::uint32_t ordinal) {
    return "run-" + to_string(spec) + "-repeatable-" + std::to_string(ordinal) + ".txt";
}

std::string repeatable_run_filename(const ModelSpec& spec) {
    return "run-" + to_string(spec) + "-repeatable.txt";
}

VariabilityReport run_variability_experiment(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    validate_config(config);
    fs::create_directories(config.output_dir);

    const std::vector<Document> docs = load_corpus(config.corpus_path, config.format);
    const std::vector<PreparedTopic> topics = prepare_topics(config.topics_path);
    read_qrels(config.qrels_path);  // fail fast before the expensive part

    // One index in memory at a time; runs go to disk, evaluation reads them
    // back afterwards.
    std::map<std::string, std::string> canonical_texts;
    for (std::uint32_t i = 0; i < config.num_indexes; ++i) {
        const Index index = build_nth_index(config, docs, i);
        for (const ModelSpec& spec : config.models) {
            const ScoringParams params = scoring_params(config, spec);
            auto internal_run =
                make_run(index, topics, spec, params, config.rm3, TieBreakPolicy::internal_id,
                         config.k);
            write_run(internal_run, config.tag,
                      (fs::path(config.output_dir) / internal_run_filename(spec, i + 1)).string());

            // The repeatable run, produced from every index and verified
            // byte-identical across all of them.
            auto repeatable_run = make_run(index, topics, spec, params, config.rm3,
                                           config.repeatable_policy, config.k);
            std::string text = format_run(repeatable_run, config.tag);
            auto [it, fresh] = canonical_texts.emplace(to_string(spec), text);
            if (!fresh && it->second != text) {
                throw HarnessError("repeatable runs differ across index builds for model " +
                                   to_string(spec) + "; the repeatability guarantee is violated");
            }
            write_text_file(
                (fs::path(config.output_dir) / repeatable_run_filename(spec, i + 1)).string(),
                text);
        }
    }

    VariabilityReport report;
    for (const ModelSpec& spec : config.models) {
        const std::string model_name = to_string(spec);
        const std::string canonical_path =
            (fs::path(config.output_dir) / repeatable_run_filename(spec)).string();
        write_text_file(canonical_path, canonical_texts.at(model_name));
        const MetricRow repeatable_row =
            metric_row(evaluate_run(canonical_path, config.qrels_path));

        std::vector<MetricRow> internal_rows;
        for (std::uint32_t i = 0; i < config.num_indexes; ++i) {
            const std::string path =
                (fs::path(config.output_dir) / internal_run_filename(spec, i + 1)).string();
            internal_rows.push_back(metric_row(evaluate_run(path, config.qrels_path)));
        }

        for (const std::string& metric : kMetrics) {
            MetricSpread spread;
            spread.repeatable = pick(repeatable_row, metric);
            spread.min_value = pick(internal_rows[0], metric);
            spread.max_value = spread.min_value;
            for (const MetricRow& row : internal_rows) {
                spread.min_value = std::min(spread.min_value, pick(row, metric));
                spread.max_value = std::max(spread.max_value, pick(row, metric));
            }
            // Largest absolute observed difference, repeatable run included.
            spread.delta = std::max(spread.max_value, spread.repeatable) -
                           std::min(spread.min_value, spread.repeatable);
            report.cells[model_name][metric] = spread;
        }
    }

    write_variability_tsv(report,
                          (fs::path(config.output_dir) / "variability.tsv").string());
    return report;
}

LatencyReport run_latency_benchmark(const ExperimentConfig& config_in) {
    ExperimentConfig config = config_in;
    validate_config(config);
    fs::create_directories(config.output_dir);

    using Clock = std::chrono::steady_clock;
    static_assert(Clock::is_steady);
    constexpr double tick_seconds =
        static_cast<double>(Clock::period::num) / static_cast<double>(Clock::period::den);
    if (tick_seconds > 1e-6) {
        throw HarnessError("steady clock resolution is coarser than 1 microsecond");
    }

    const std::vector<Document> docs = load_corpus(config.corpus_path, config.format);
    const std::vector<PreparedTopic> topics = prepare_topics(config.topics_path);
    if (topics.empty()) {
        throw HarnessError("no topics to benchmark");
    }
    const Index index = build_index(docs, BuildOptions{});

    auto timed_pass = [&](const ModelSpec& spec, const ScoringParams& params,
                          TieBreakPolicy policy) {
        double seconds = 0.0;
        std::size_t sink = 0;
        for (const PreparedTopic& topic : topics) {
            const auto start = Clock::now();
            RankedList list = run_topic(index, topic, spec, params, config.rm3, policy, config.k);
            const auto stop = Clock::now();
            sink += list.entries.size();
            seconds += std::chrono::duration<double>(stop - start).count();
        }
        if (sink == 0) {
            throw HarnessError("benchmark produced empty rankings for every topic");
        }
        return seconds / static_cast<double>(topics.size());
    };

    LatencyReport report;
    report.trials = config.trials;
    report.warmup_trials = config.warmup_trials;
    for (const ModelSpec& spec : config.models) {
        const ScoringParams params = scoring_params(config, spec);
        LatencyMeasurement measurement;
        for (const TieBreakPolicy policy :
             {TieBreakPolicy::internal_id, config.repeatable_policy}) {
            for (std::uint32_t w = 0; w < config.warmup_trials; ++w) {
                timed_pass(spec, params, policy);
            }
            double mean_over_trials = 0.0;
            for (std::uint32_t t = 0; t < config.trials; ++t) {
                mean_over_trials += timed_pass(spec, params, policy);
            }
            mean_over_trials /= static_cast<double>(config.trials);
            if (policy == TieBreakPolicy::internal_id) {
                measurement.nonrepeatable_seconds = mean_over_trials;
            } else {
                measurement.repeatable_seconds = mean_over_trials;
            }
        }
        measurement.delta_percent =
            (measurement.repeatable_seconds / measurement.nonrepeatable_seconds - 1.0) * 100.0;
        report.per_model[to_string(spec)] = measurement;
    }

    write_latency_tsv(report, (fs::path(config.output_dir) / "latency.tsv").string());
    return report;
}

void generate_tie_corpus(const TieCorpusSpec& spec, const std::string& output_dir) {
    if (spec.num_docs < 2) {
        throw HarnessError("gen-corpus: need at least 2 documents");
    }
    if (spec.vocab < 8) {
        throw HarnessError("gen-corpus: vocab too small (need >= 8 terms)");
    }
    if (spec.tie_fraction < 0.0 || spec.tie_fraction > 1.0) {
        throw HarnessError("gen-corpus: tie_fraction must lie in [0,1]");
    }
    if (spec.num_topics < 1) {
        throw HarnessError("gen-corpus: need at least 1 topic");
    }
    fs::create_directories(output_dir);

    std::mt19937_64 rng(spec.seed);
    auto draw = [&rng](std::uint64_t bound) {
        return static_cast<std::uint32_t>(rng() % bound);
    };

    std::vector<std::string> vocab;
    vocab.reserve(spec.vocab);
    for (std::uint32_t v = 0; v < spec.vocab; ++v) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "w%05u", v);
        vocab.push_back(buf);
    }

    // Base documents get pairwise distinct lengths, which makes their token
    // multisets (and hence their scores) structurally distinct. Duplicates
    // copy a base document verbatim, guaranteeing exact score ties.
    std::uint32_t num_dups =
        static_cast<std::uint32_t>(spec.tie_fraction * static_cast<double>(spec.num_docs));
    num_dups = std::min(num_dups, spec.num_docs - 1);
    const std::uint32_t num_base = spec.num_docs - num_dups;

    std::vector<std::string> texts;
    texts.reserve(spec.num_docs);
    for (std::uint32_t i = 0; i < num_base; ++i) {
        const std::uint32_t length = 4 + i;
        std::string text;
        for (std::uint32_t t = 0; t < length; ++t) {
            if (t > 0) {
                text += ' ';
            }
            text += vocab[draw(spec.vocab)];
        }
        texts.push_back(std::move(text));
    }
    for (std::uint32_t j = 0; j < num_dups; ++j) {
        texts.push_back(texts[draw(num_base)]);
    }

    // Spread the duplicates through the file, then assign ids by position.
    std::vector<std::uint32_t> order(spec.num_docs);
    for (std::uint32_t i = 0; i < spec.num_docs; ++i) {
        order[i] = i;
    }
    for (std::uint32_t i = spec.num_docs - 1; i > 0; --i) {
        std::swap(order[i], order[draw(i + 1)]);
    }

    std::string corpus;
    std::vector<std::vector<std::string>> doc_terms(spec.num_docs);
    for (std::uint32_t pos = 0; pos < spec.num_docs; ++pos) {
        const std::string& text = texts[order[pos]];
        char id[16];
        std::snprintf(id, sizeof(id), "D%06u", pos);
        corpus += "{\"id\":\"";
        corpus += id;
        corpus += "\",\"text\":\"";
        corpus += text;  // vocabulary terms need no JSON escaping
        corpus += '"';
        if (spec.timestamps) {
            corpus += ",\"timestamp\":";
            corpus += std::to_string(1500000000000LL + static_cast<std::int64_t>(pos) * 60000);
        }
        corpus += "}\n";
        doc_terms[pos] = analyze(text);
    }
    write_text_file((fs::path(output_dir) / "corpus.jsonl").string(), corpus);

    std::string topics_text;
    std::vector<std::string> topic_ids;
    for (std::uint32_t t = 0; t < spec.num_topics; ++t) {
        const std::uint32_t doc = draw(spec.num_docs);
        std::vector<std::string> distinct = doc_terms[doc];
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        const std::uint32_t want =
            std::min<std::uint32_t>(1 + draw(3), static_cast<std::uint32_t>(distinct.size()));
        // Partial Fisher-Yates: the first `want` entries become the query.
        for (std::uint32_t i = 0; i < want; ++i) {
            const std::uint32_t j =
                i + draw(static_cast<std::uint64_t>(distinct.size()) - i);
            std::swap(distinct[i], distinct[j]);
        }
        char id[16];
        std::snprintf(id, sizeof(id), "T%03u", t + 1);
        topic_ids.push_back(id);
        topics_text += id;
        topics_text += '\t';
        for (std::uint32_t i = 0; i < want; ++i) {
            if (i > 0) {
                topics_text += ' ';
            }
            topics_text += distinct[i];
        }
        topics_text += '\n';
    }
    write_text_file((fs::path(output_dir) / "topics.tsv").string(), topics_text);

    // Independent judgments per (topic, document): mixed-relevance duplicate
    // clusters are what turn tie reordering into metric movement.
    std::string qrels_text;
    for (const std::string& topic_id : topic_ids) {
        for (std::uint32_t pos = 0; pos < spec.num_docs; ++pos) {
            if (draw(100) < 12) {
                const int grade = 1 + static_cast<int>(draw(2));
                char id[16];
                std::snprintf(id, sizeof(id), "D%06u", pos);
                qrels_text += topic_id;
                qrels_text += " 0 ";
                qrels_text += id;
                qrels_text += ' ';
                qrels_text += std::to_string(grade);
                qrels_text += '\n';
            }
        }
    }
    write_text_file((fs::path(output_dir) / "qrels.txt").string(), qrels_text);
}

void write_variability_tsv(const VariabilityReport& report, const std::string& path) {
    std::string out = "model\tmetric\trepeatable\tmin\tmax\tdelta\n";
    for (const auto& [model, metrics] : report.cells) {
        for (const std::string& metric : kMetrics) {
            const MetricSpread& spread = metrics.at(metric);
            out += model + '\t' + metric + '\t' + format_full(spread.repeatable) + '\t' +
                   format_full(spread.min_value) + '\t' + format_full(spread.max_value) + '\t' +
                   format_full(spread.delta) + '\n';
        }
    }
    write_text_file(path, out);
}

std::string render_variability_table(const VariabilityReport& report) {
    std::ostringstream out;
    char line[256];
    const char* headers[] = {"AP", "P30", "NDCG@20"};
    std::snprintf(line, sizeof(line), "%-11s", "Model");
    out << line;
    for (const char* name : headers) {
        std::snprintf(line, sizeof(line), "%-8s%-19s%-8s", name, "min --- max", "delta");
        out << line;
    }
    out << '\n';
    for (const auto& [model, metrics] : report.cells) {
        std::snprintf(line, sizeof(line), "%-11s", model.c_str());
        out << line;
        for (const std::string& metric : kMetrics) {
            const MetricSpread& spread = metrics.at(metric);
            const std::string range =
                format_display(spread.min_value) + " --- " + format_display(spread.max_value);
            std::snprintf(line, sizeof(line), "%-8s%-19s%-8s",
                          format_display(spread.repeatable).c_str(), range.c_str(),
                          format_display(spread.delta).c_str());
            out << line;
        }
        out << '\n';
    }
    return out.str();
}

void write_latency_tsv(const LatencyReport& report, const std::string& path) {
    std::string out =
        "model\tnonrepeatable_seconds\trepeatable_seconds\tdelta_percent\ttrials\twarmup_trials\n";
    for (const auto& [model, m] : report.per_model) {
        out += model + '\t' + format_full(m.nonrepeatable_seconds) + '\t' +
               format_full(m.repeatable_seconds) + '\t' + format_full(m.delta_percent) + '\t' +
               std::to_string(report.trials) + '\t' + std::to_string(report.warmup_trials) + '\n';
    }
    write_text_file(path, out);
}

std::string render_latency_table(const LatencyReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof(line), "%-10s %16s %12s %8s\n", "Model", "Non-Repeatable",
                  "Repeatable", "delta");
    out << line;
    for (const auto& [model, m] : report.per_model) {
        std::snprintf(line, sizeof(line), "%-10s %15.6fs %11.6fs %+7.1f%%\n", model.c_str(),
                      m.nonrepeatable_seconds, m.repeatable_seconds, m.delta_percent);
        out << line;
    }
    return out.str();
}

}  // namespace tierank
