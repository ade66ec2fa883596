// Command-line front end: index building, single retrieval runs, run
// evaluation, the variability experiment, the latency benchmark, and
// synthetic corpus generation.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tierank/corpus.hpp"
#include "tierank/eval.hpp"
#include "tierank/harness.hpp"
#include "tierank/index.hpp"
#include "tierank/search.hpp"
#include "tierank/trec_io.hpp"

namespace {

using namespace tierank;

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct ConfigFlags {
    std::string config_path;
    std::string corpus;
    std::string format;
    std::string topics;
    std::string qrels;
    std::vector<std::string> models;
    std::optional<std::uint32_t> num_indexes;
    std::vector<std::uint64_t> seeds;
    std::string repeatable_policy;
    std::optional<std::uint32_t> k;
    std::string tag;
    std::string output_dir;
    std::optional<std::uint32_t> trials;
    std::optional<std::uint32_t> warmup_trials;
    bool true_threads = false;
    std::optional<unsigned> workers;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file (flags override it)");
    cmd->add_option("--corpus", flags.corpus, "corpus file");
    cmd->add_option("--format", flags.format, "corpus format: jsonl or trectext");
    cmd->add_option("--topics", flags.topics, "topics file (tab-separated)");
    cmd->add_option("--qrels", flags.qrels, "qrels file");
    cmd->add_option("--models", flags.models,
                    "conditions from bm25, bm25+rm3, ql, ql+rm3 (default: all)")
        ->delimiter(',');
    cmd->add_option("--num-indexes", flags.num_indexes, "number of index builds (default 5)");
    cmd->add_option("--seeds", flags.seeds, "order seeds, one per index")->delimiter(',');
    cmd->add_option("--repeatable-policy", flags.repeatable_policy,
                    "external_id or reverse_chronological (default external_id)");
    cmd->add_option("--k", flags.k, "hits per topic (default 1000)");
    cmd->add_option("--tag", flags.tag, "run tag (default tierank)");
    cmd->add_option("--output-dir", flags.output_dir, "where run files and reports go");
    cmd->add_option("--trials", flags.trials, "measured trials (default 5)");
    cmd->add_option("--warmup-trials", flags.warmup_trials, "warmup trials (default 2)");
    cmd->add_flag("--true-threads", flags.true_threads,
                  "use genuine multi-threaded arrival order instead of order seeds");
    cmd->add_option("--workers", flags.workers, "worker threads for --true-threads");
}

ExperimentConfig resolve_config(const ConfigFlags& flags) {
    ExperimentConfig config;
    if (!flags.config_path.empty()) {
        config = config_from_json_file(flags.config_path);
    }
    if (!flags.corpus.empty()) {
        config.corpus_path = flags.corpus;
    }
    if (!flags.format.empty()) {
        config.format = corpus_format_from_string(flags.format);
    }
    if (!flags.topics.empty()) {
        config.topics_path = flags.topics;
    }
    if (!flags.qrels.empty()) {
        config.qrels_path = flags.qrels;
    }
    if (!flags.models.empty()) {
        config.models.clear();
        for (const auto& name : flags.models) {
            config.models.push_back(model_spec_from_string(name));
        }
    }
    if (flags.num_indexes) {
        config.num_indexes = *flags.num_indexes;
    }
    if (!flags.seeds.empty()) {
        config.seeds = flags.seeds;
    }
    if (!flags.repeatable_policy.empty()) {
        config.repeatable_policy = policy_from_string(flags.repeatable_policy);
    }
    if (flags.k) {
        config.k = *flags.k;
    }
    if (!flags.tag.empty()) {
        config.tag = flags.tag;
    }
    if (!flags.output_dir.empty()) {
        config.output_dir = flags.output_dir;
    }
    if (flags.trials) {
        config.trials = *flags.trials;
    }
    if (flags.warmup_trials) {
        config.warmup_trials = *flags.warmup_trials;
    }
    if (flags.true_threads) {
        config.true_threads = true;
    }
    if (flags.workers) {
        config.workers = *flags.workers;
    }
    return config;
}

int cmd_index(const std::string& input, const std::string& format, unsigned workers,
              std::optional<std::uint64_t> order_seed, const std::string& output) {
    auto docs = load_corpus(input, corpus_format_from_string(format));
    BuildOptions options;
    options.workers = workers;
    options.order_seed = order_seed;
    Index index = build_index(std::move(docs), options);
    index.save(output);
    std::cout << "indexed " << index.num_docs() << " documents, " << index.terms().size()
              << " terms -> " << output << "\n";
    return 0;
}

int cmd_search(const std::string& index_path, const std::string& topics_path,
               const std::string& model, const std::string& policy_name, std::uint32_t k,
               const std::string& tag, const std::string& output, double k1, double b, double mu,
               std::uint32_t fb_docs, std::uint32_t fb_terms, double alpha) {
    const Index index = Index::load(index_path);
    const ModelSpec spec = model_spec_from_string(model);
    const TieBreakPolicy policy = policy_from_string(policy_name);
    ScoringParams params;
    params.model = spec.model;
    params.k1 = k1;
    params.b = b;
    params.mu = mu;
    Rm3Params rm3;
    rm3.fb_docs = fb_docs;
    rm3.fb_terms = fb_terms;
    rm3.original_weight = alpha;

    std::map<std::string, RankedList> run;
    for (const Topic& topic : read_topics(topics_path)) {
        WeightedQuery query = query_from_text(topic.query_text);
        RankedList list = spec.rm3 ? search_rm3(index, query, params, rm3, policy, k)
                                   : search(index, query, params, policy, k);
        list.topic_id = topic.topic_id;
        run[topic.topic_id] = std::move(list);
    }
    write_run(run, tag, output);
    std::cout << "wrote " << run.size() << " topics -> " << output << "\n";
    return 0;
}

int cmd_eval(const std::string& run_path, const std::string& qrels_path,
             const std::vector<std::string>& metrics, const std::string& output) {
    const TopicScores scores = evaluate_run(run_path, qrels_path);
    std::string tsv = "topic";
    for (const auto& metric : metrics) {
        tsv += '\t';
        tsv += metric;
    }
    tsv += '\n';
    auto append_row = [&](const std::string& topic_id, const MetricValues& values) {
        tsv += topic_id;
        for (const auto& metric : metrics) {
            tsv += '\t';
            if (metric == "ap") {
                tsv += format_full(values.ap);
            } else if (metric == "p30") {
                tsv += format_full(values.p30);
            } else if (metric == "ndcg20") {
                tsv += format_full(values.ndcg20);
            } else {
                throw EvalError("unknown metric: " + metric);
            }
        }
        tsv += '\n';
    };
    for (const auto& [topic_id, values] : scores.per_topic) {
        append_row(topic_id, values);
    }
    append_row("all", scores.mean);
    if (output.empty()) {
        std::cout << tsv;
    } else {
        std::ofstream out(output, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw EvalError("cannot open report file: " + output);
        }
        out << tsv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tierank: repeatable document ranking experiments"};
    app.require_subcommand(1);

    // index
    auto* index_cmd = app.add_subcommand("index", "build an index from a corpus");
    std::string in_path;
    std::string in_format = "jsonl";
    unsigned workers = 1;
    std::optional<std::uint64_t> order_seed;
    std::string out_path;
    index_cmd->add_option("--input", in_path, "corpus file")->required();
    index_cmd->add_option("--format", in_format, "jsonl or trectext");
    index_cmd->add_option("--workers", workers, "indexing worker threads");
    index_cmd->add_option("--order-seed", order_seed,
                          "shuffle documents with this seed before a single-threaded build");
    index_cmd->add_option("--output", out_path, "index file to write")->required();

    // search
    auto* search_cmd = app.add_subcommand("search", "run topics against an index");
    std::string search_index;
    std::string search_topics;
    std::string search_model = "bm25";
    std::string search_policy = "external_id";
    std::uint32_t search_k = 1000;
    std::string search_tag = "tierank";
    std::string search_output;
    double opt_k1 = 0.9;
    double opt_b = 0.4;
    double opt_mu = 1000.0;
    std::uint32_t opt_fb_docs = 10;
    std::uint32_t opt_fb_terms = 10;
    double opt_alpha = 0.5;
    search_cmd->add_option("--index", search_index, "index file")->required();
    search_cmd->add_option("--topics", search_topics, "topics file")->required();
    search_cmd->add_option("--model", search_model, "bm25, bm25+rm3, ql, or ql+rm3");
    search_cmd->add_option("--policy", search_policy,
                           "internal_id, external_id, or reverse_chronological");
    search_cmd->add_option("--k", search_k, "hits per topic");
    search_cmd->add_option("--tag", search_tag, "run tag");
    search_cmd->add_option("--output", search_output, "run file to write")->required();
    search_cmd->add_option("--k1", opt_k1, "BM25 k1");
    search_cmd->add_option("--b", opt_b, "BM25 b");
    search_cmd->add_option("--mu", opt_mu, "QL Dirichlet mu");
    search_cmd->add_option("--fb-docs", opt_fb_docs, "RM3 feedback documents");
    search_cmd->add_option("--fb-terms", opt_fb_terms, "RM3 expansion terms");
    search_cmd->add_option("--alpha", opt_alpha, "RM3 original-query weight");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a run file against qrels");
    std::string eval_run;
    std::string eval_qrels;
    std::vector<std::string> eval_metrics = {"ap", "p30", "ndcg20"};
    std::string eval_output;
    eval_cmd->add_option("--run", eval_run, "run file")->required();
    eval_cmd->add_option("--qrels", eval_qrels, "qrels file")->required();
    eval_cmd->add_option("--metrics", eval_metrics, "subset of ap,p30,ndcg20")->delimiter(',');
    eval_cmd->add_option("--output", eval_output, "write the TSV report here instead of stdout");

    // experiment
    auto* experiment_cmd =
        app.add_subcommand("experiment", "effectiveness variability across index builds");
    ConfigFlags experiment_flags;
    add_config_flags(experiment_cmd, experiment_flags);

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "query latency under both tie policies");
    ConfigFlags bench_flags;
    add_config_flags(bench_cmd, bench_flags);

    // gen-corpus
    auto* gen_cmd = app.add_subcommand("gen-corpus", "generate a synthetic tie-heavy corpus");
    TieCorpusSpec gen_spec;
    std::string gen_output = ".";
    gen_cmd->add_option("--docs", gen_spec.num_docs, "number of documents");
    gen_cmd->add_option("--vocab", gen_spec.vocab, "vocabulary size");
    gen_cmd->add_option("--tie-fraction", gen_spec.tie_fraction,
                        "share of documents that duplicate another document");
    gen_cmd->add_option("--seed", gen_spec.seed, "generator seed");
    gen_cmd->add_option("--topics", gen_spec.num_topics, "number of topics");
    gen_cmd->add_flag("--timestamps", gen_spec.timestamps, "emit per-document timestamps");
    gen_cmd->add_option("--output-dir", gen_output, "directory for corpus/topics/qrels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (index_cmd->parsed()) {
            return cmd_index(in_path, in_format, workers, order_seed, out_path);
        }
        if (search_cmd->parsed()) {
            return cmd_search(search_index, search_topics, search_model, search_policy, search_k,
                              search_tag, search_output, opt_k1, opt_b, opt_mu, opt_fb_docs,
                              opt_fb_terms, opt_alpha);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_run, eval_qrels, eval_metrics, eval_output);
        }
        if (experiment_cmd->parsed()) {
            ExperimentConfig config = resolve_config(experiment_flags);
            VariabilityReport report = run_variability_experiment(config);
            std::cout << render_variability_table(report);
            std::cout << "report: " << config.output_dir << "/variability.tsv\n";
            return 0;
        }
        if (bench_cmd->parsed()) {
            ExperimentConfig config = resolve_config(bench_flags);
            LatencyReport report = run_latency_benchmark(config);
            std::cout << render_latency_table(report);
            std::cout << "report: " << config.output_dir << "/latency.tsv\n";
            return 0;
        }
        if (gen_cmd->parsed()) {
            generate_tie_corpus(gen_spec, gen_output);
            std::cout << "wrote corpus.jsonl, topics.tsv, qrels.txt -> " << gen_output << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
