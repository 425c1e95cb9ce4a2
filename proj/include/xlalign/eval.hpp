#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xlalign/encoder.hpp"
#include "xlalign/matrix.hpp"
#include "xlalign/pipeline.hpp"
#include "xlalign/trainer.hpp"

namespace xlalign {

/// Five seeds fixed before any experiment; every objective reuses the same
/// list.
extern const std::vector<std::uint64_t> kDefaultSeeds;

/// Synthetic rotation task: per target language, word embeddings are an
/// orthogonal rotation of the source embeddings plus Gaussian noise, and
/// parallel sentences are sampled with a known word-level matching. The
/// final `heldout` words of each vocabulary never appear in sentences.
struct SyntheticSpec {
    int vocab_size = 500;
    std::size_t dim = 32;
    double noise_sigma = 0.01;
    int sentences = 400;
    int sentence_len = 8;
    int heldout = 100;
    int target_languages = 2;
    std::uint64_t seed = 13;
};

struct SyntheticLanguage {
    std::string name;
    Matrix rotation; // ground-truth Q, orthogonal to ~1e-10
    std::vector<SentencePair> bitext;
    std::vector<AlignedWordPair> gold_links;
};

struct SyntheticTask {
    SyntheticSpec spec;
    Matrix src_embed;
    std::vector<Matrix> tgt_embed;
    std::vector<SyntheticLanguage> languages;
    Vocab vocab;
    EncoderParams encoder;                      // embedding-only (0 mixing layers)
    std::vector<int> src_unit_ids;              // vocab id of each source word
    std::vector<std::vector<int>> tgt_unit_ids; // per language
};

SyntheticTask gen_synthetic(const SyntheticSpec& spec);

/// Fraction of gold pairs (i, j) whose source row i has target row j as its
/// cosine nearest neighbour among all target rows (after optionally mapping
/// the targets); ties resolve to the lowest index. Throws DataError on an
/// empty gold list.
double retrieval_p_at_1(const Matrix& src_states, const Matrix& tgt_states,
                        const std::vector<std::pair<int, int>>& gold, const Matrix* mapping);

struct RunResult {
    std::string task;
    std::string objective;
    std::uint64_t seed = 0;
    std::string metric;
    double value = 0.0;
    bool ok = true;
    std::string error;
};

struct EvalConfig {
    SyntheticSpec synthetic;
    std::vector<std::string> objectives = {"none", "procrustes", "linear", "l2", "weak", "strong"};
    std::vector<std::uint64_t> seeds = kDefaultSeeds;
    RunConfig finetune;        // shared by l2/weak/strong (mode overridden)
    RunConfig linear;          // decay-only schedule for the mapping route
    PipelineOptions pipeline;
    bool parallel_seeds = false;

    static EvalConfig desk();
    void validate() const;
};

/// Train + evaluate one seed across every configured objective. Failures
/// are recorded per (task, objective) rather than thrown.
std::vector<RunResult> run_single_seed(const EvalConfig& config, std::uint64_t seed);

/// The full protocol: identical hyperparameters across seeds, optional
/// seed-level parallelism, deterministic result order.
std::vector<RunResult> multi_seed_run(const EvalConfig& config);

struct SummaryStats {
    std::string task;
    std::string objective;
    int n = 0;
    double mean = 0.0;
    double stddev = 0.0; // sample (n-1); 0 when n == 1
    std::vector<double> values;
    bool single_flag = false; // n == 1: stddev reported as 0
    int failed = 0;           // runs excluded from the aggregation
};

/// Groups by (task, objective) in sorted order; rejects duplicate
/// (task, objective, seed) triples; failed results are excluded and counted.
std::vector<SummaryStats> summarize(const std::vector<RunResult>& results);

enum class ReportFormat { Tsv, Markdown };

/// Tsv: task, objective, n, mean, std, then the per-seed values, full
/// precision. Markdown: objectives as rows, tasks as columns, cells
/// "mean +/- std" rounded to one decimal.
std::string emit_report(const std::vector<SummaryStats>& summaries, ReportFormat format);

/// Line-delimited RunResult records (tab-separated) for resumable
/// aggregation.
void write_results(std::ostream& out, const std::vector<RunResult>& results);
std::vector<RunResult> read_results(std::istream& in);

/// Parses the TSV report back into (task, objective, n, mean, std, values).
std::vector<SummaryStats> parse_report_tsv(const std::string& text);

} // namespace xlalign
