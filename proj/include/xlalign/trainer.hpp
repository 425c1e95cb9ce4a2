#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "xlalign/bitext.hpp"
#include "xlalign/encoder.hpp"
#include "xlalign/objectives.hpp"
#include "xlalign/optim.hpp"

namespace xlalign {

/// Hyperparameters of one training run. `paper` carries the published
/// schedule; `desk` shrinks it so the whole suite runs in minutes (step
/// counts scaled down, learning rates scaled up to keep the synthetic tasks
/// trainable within the shorter budget).
struct RunConfig {
    std::uint64_t seed = 13;
    ObjectiveConfig::Mode mode = ObjectiveConfig::Mode::Weak;
    ObjectiveConfig::Regularizer regularizer = ObjectiveConfig::Regularizer::Param;
    int batch_size = 128;
    long total_steps = 100000;
    long warmup_steps = 4000;
    double peak_rate = 1e-4;
    int max_seq_len = 96;
    double lambda = 1.0;
    double tau = 0.1;
    double beta = 0.01;

    static RunConfig paper();
    static RunConfig desk();
    /// Linear-mapping schedules: decay-only (no warmup).
    static RunConfig paper_linear();
    static RunConfig desk_linear();

    ObjectiveConfig objective() const;
    LrSchedule schedule() const;

    /// Throws ConfigError on invalid combinations (warmup > total, batch
    /// size < 2 in contrastive modes, bad lambda/tau/beta).
    void validate() const;
};

struct BatchItem {
    int language = 0;
    long pair_id = 0;
    int src_word_idx = 0;
    int tgt_word_idx = 0;
};

struct BatchPlan {
    std::vector<std::vector<BatchItem>> batches;
    bool short_final = false;      // last batch smaller than batch_size
    bool single_language = false;  // only one language present
    long truncated_pairs = 0;      // dropped by the max-sequence-length rule
};

/// An aligned word pair labelled with its target language and the unit
/// indices of the two words' first units within their sentences.
struct LabeledPair {
    int language = 0;
    AlignedWordPair pair;
    int src_first_unit = 0;
    int tgt_first_unit = 0;
};

/// Seeded, language-stratified batch plan. Every batch allots at least one
/// slot per language still holding pairs, remaining slots go to the language
/// with the most unscheduled pairs. Pairs whose first unit falls beyond
/// max_seq_len are dropped and counted. Deterministic in (pairs, config,
/// epoch).
BatchPlan build_batches(const std::vector<LabeledPair>& pairs, const RunConfig& config,
                        std::uint64_t epoch = 0);

struct LossLogRow {
    long step = 0;
    double loss = 0.0;
    double lr = 0.0;
};

void write_loss_log(std::ostream& out, const std::vector<LossLogRow>& rows);

struct LinearMapResult {
    Matrix w;
    std::vector<LossLogRow> log;
};

/// Gradient-descent route to the mapping problem: per step one Adam update
/// on the batch residual ||s_b - t_b w||^2 / batch_rows, then one
/// orthogonality_update. w starts at the identity. Throws NumericError when
/// the loss leaves the finite range.
LinearMapResult train_linear_mapping(const Matrix& s, const Matrix& t, const RunConfig& config);

struct LanguageCorpus {
    std::string name;
    std::vector<SentencePair> sentences; // indexed by pair id
    std::vector<AlignedWordPair> pairs;
};

struct FinetuneData {
    std::vector<LanguageCorpus> languages;
};

struct FinetuneResult {
    EncoderParams params;
    SimilarityHead head; // contrastive modes train one jointly
    bool has_head = false;
    std::vector<LossLogRow> log;
    BatchPlan plan_info; // flags from the first epoch's plan
};

/// Fine-tunes the encoder under the configured objective plus
/// lambda * regularizer; a pretrained snapshot is taken before step 0.
/// The similarity head (contrastive modes) trains jointly but is excluded
/// from the parameter regularizer. Deterministic in (init, data, config).
FinetuneResult train_finetune(const EncoderParams& init, const Vocab& vocab,
                              const FinetuneData& data, const RunConfig& config);

struct StaticFeatures {
    Matrix s;
    Matrix t;
};

/// Frozen-encoder feature rows for every aligned pair of one corpus, taken
/// at the given layer with the first-unit convention.
StaticFeatures collect_static_features(const EncoderParams& params, const Vocab& vocab,
                                       const LanguageCorpus& corpus, std::size_t layer,
                                       int max_seq_len);

/// Labels corpus pairs and resolves first-unit indices for batching.
std::vector<LabeledPair> label_pairs(const FinetuneData& data);

} // namespace xlalign
