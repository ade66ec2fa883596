#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tierank/corpus.hpp"
#include "tierank/eval.hpp"
#include "tierank/index.hpp"
#include "tierank/search.hpp"
#include "tierank/trec_io.hpp"

namespace tierank {

/// Ranking condition: a base model, optionally wrapped in RM3 expansion.
struct ModelSpec {
    Model model = Model::bm25;
    bool rm3 = false;
};

/// Parses "bm25", "bm25+rm3", "ql", "ql+rm3".
ModelSpec model_spec_from_string(std::string_view name);
std::string to_string(const ModelSpec& spec);

/// Everything the two experiments need. The non-repeatable condition is
/// always internal_id tie-breaking; the repeatable condition is one of the
/// two stable policies. Index-build arrival orders come from the seeds
/// (deterministic surrogate) unless true_threads asks for genuine
/// multi-threaded arrival order.
struct ExperimentConfig {
    std::string corpus_path;
    CorpusFormat format = CorpusFormat::jsonl;
    std::string topics_path;
    std::string qrels_path;
    std::vector<ModelSpec> models;  // empty = all four conditions
    std::uint32_t num_indexes = 5;
    std::vector<std::uint64_t> seeds;  // empty = 1..num_indexes; must be pairwise distinct
    TieBreakPolicy repeatable_policy = TieBreakPolicy::external_id;
    std::uint32_t k = 1000;
    double k1 = 0.9;
    double b = 0.4;
    double mu = 1000.0;
    Rm3Params rm3;
    std::string tag = "tierank";
    std::string output_dir = "tierank-out";
    std::uint32_t trials = 5;
    std::uint32_t warmup_trials = 2;
    bool true_threads = false;
    unsigned workers = 4;
};

class HarnessError: public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Loads a declarative JSON config (key set documented in the README).
/// Unknown keys are rejected.
ExperimentConfig config_from_json_file(const std::string& path);

/// Fills defaulted fields (models, seeds) and rejects inconsistent ones.
void validate_config(ExperimentConfig& config);

/// Run files written by the variability experiment, relative to output_dir.
/// Ordinals are 1-based index numbers.
std::string internal_run_filename(const ModelSpec& spec, std::uint32_t ordinal);
std::string repeatable_run_filename(const ModelSpec& spec, std::uint32_t ordinal);
std::string repeatable_run_filename(const ModelSpec& spec);

struct MetricSpread {
    double repeatable = 0.0;
    double min_value = 0.0;  // across the non-repeatable runs
    double max_value = 0.0;
    double delta = 0.0;  // max - min over all runs including the repeatable one
};

/// Per model x metric ("ap", "p30", "ndcg20") spread across index builds.
struct VariabilityReport {
    std::map<std::string, std::map<std::string, MetricSpread>> cells;
};

/// Builds num_indexes indexes, produces one non-repeatable run per index and
/// the repeatable run for every model, evaluates everything, and persists all
/// run files plus variability.tsv under output_dir. Repeatable runs that
/// differ across index builds are a hard failure: that would break the core
/// guarantee the repeatable policy exists to provide.
VariabilityReport run_variability_experiment(const ExperimentConfig& config);

struct LatencyMeasurement {
    double nonrepeatable_seconds = 0.0;
    double repeatable_seconds = 0.0;
    double delta_percent = 0.0;  // (repeatable/nonrepeatable - 1) * 100
};

struct LatencyReport {
    std::map<std::string, LatencyMeasurement> per_model;
    std::uint32_t trials = 0;
    std::uint32_t warmup_trials = 0;
};

/// Measures single-threaded query evaluation latency per model under both
/// tie policies: warmup passes first, then `trials` measured passes over all
/// topics on a monotonic clock. Query parsing and run writing sit outside the
/// timed region. Persists latency.tsv under output_dir.
LatencyReport run_latency_benchmark(const ExperimentConfig& config);

struct TieCorpusSpec {
    std::uint32_t num_docs = 1000;
    std::uint32_t vocab = 64;
    double tie_fraction = 0.3;
    std::uint64_t seed = 42;
    std::uint32_t num_topics = 25;
    bool timestamps = false;
};

/// Deterministically generates a synthetic corpus under output_dir:
/// corpus.jsonl, topics.tsv, qrels.txt. A tie_fraction share of documents are
/// exact token-multiset copies of some other document, which guarantees score
/// ties under both ranking models for any query; the remaining documents all
/// have pairwise distinct lengths, so a tie_fraction of 0 yields a corpus
/// with no engineered ties at all. Same spec, same bytes.
void generate_tie_corpus(const TieCorpusSpec& spec, const std::string& output_dir);

void write_variability_tsv(const VariabilityReport& report, const std::string& path);
std::string render_variability_table(const VariabilityReport& report);
void write_latency_tsv(const LatencyReport& report, const std::string& path);
std::string render_latency_table(const LatencyReport& report);

}  // namespace tierank
