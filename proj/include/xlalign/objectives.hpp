#pragma once

#include <string>
#include <vector>

#include "xlalign/matrix.hpp"
#include "xlalign/param_vector.hpp"
#include "xlalign/rng.hpp"

namespace xlalign {

/// Paired hidden-state rows for corresponding words: row i of s aligns with
/// row i of t. sbar / sbar_pretrained optionally carry the full source
/// sentence states (every unit, aligned or not) for the hidden-state
/// regularizer.
struct AlignedStateBatch {
    Matrix s; // B x d
    Matrix t; // B x d
    std::vector<int> language; // per-row target language id; may be empty
    Matrix sbar;
    Matrix sbar_pretrained;
    bool has_sbar = false;
};

/// Square per-target-language, per-layer mapping applied on the right:
/// mapped target features are t W.
struct MappingMatrix {
    Matrix w;
    std::string language;
    int layer = 0;
};

/// Feed-forward feature extractor f(x) = relu(x w1 + b1) w2 + b2 used by the
/// learned cosine similarity. Default widths are (d, d, ceil(d/6)), which
/// reproduces 768-768-128 at d = 768.
struct SimilarityHead {
    Matrix w1; // d x h
    Matrix b1; // 1 x h
    Matrix w2; // h x p
    Matrix b2; // 1 x p

    std::size_t in_dim() const { return w1.rows(); }
    std::size_t hidden_dim() const { return w1.cols(); }
    std::size_t out_dim() const { return w2.cols(); }

    static std::size_t default_out_dim(std::size_t dim) { return (dim + 5) / 6; }
    static SimilarityHead init(std::size_t dim, Rng& rng);
    static SimilarityHead init_widths(std::size_t dim, std::size_t hidden, std::size_t out, Rng& rng);

    Matrix forward(const Matrix& x) const;

    /// Segments "head.w1", "head.b1", "head.w2", "head.b2".
    ParamVector to_params() const;
    static SimilarityHead from_params(const ParamVector& pv);
};

struct ObjectiveConfig {
    enum class Mode { Linear, L2, Weak, Strong };
    enum class Regularizer { Param, Hidden, None };

    double lambda = 1.0;
    double tau = 0.1;
    double beta = 0.01;
    Mode mode = Mode::L2;
    Regularizer regularizer = Regularizer::Param;

    /// Throws ConfigError unless tau > 0, lambda >= 0 and 0 < beta < 1.
    void validate() const;
};

// ---------------------------------------------------------------------------
// linear mapping
// ---------------------------------------------------------------------------

struct LinearMapLoss {
    double loss = 0.0;
    Matrix d_w;
};

/// Squared Frobenius residual ||s - t w||^2 with its gradient in w.
LinearMapLoss linear_map_loss(const Matrix& s, const Matrix& t, const Matrix& w);

/// One step of the orthogonality-restoring iteration
/// (1 + beta) w - beta (w w^T) w. Orthogonal matrices are fixed points.
Matrix orthogonality_update(const Matrix& w, double beta);

struct ProcrustesResult {
    Matrix w;
    bool degenerate = false; // t^T s was rank deficient; w completed arbitrarily
};

/// Closed-form orthogonal minimizer of ||s - t w||: w = u v^T from the SVD
/// u diag(sigma) v^T of t^T s.
ProcrustesResult procrustes_svd(const Matrix& s, const Matrix& t);

// ---------------------------------------------------------------------------
// L2 alignment and regularizers
// ---------------------------------------------------------------------------

struct PairLoss {
    double loss = 0.0;
    Matrix d_s;
    Matrix d_t;
};

/// mean_i ||s_i - t_i||^2 over the batch.
PairLoss l2_loss(const AlignedStateBatch& batch);

struct HiddenRegLoss {
    double loss = 0.0;
    Matrix d_sbar;
};

/// ||sbar - sbar_pretrained||^2 over all source-sentence states.
HiddenRegLoss reg_hidden(const Matrix& sbar, const Matrix& sbar_pretrained);

struct ParamRegLoss {
    double loss = 0.0;
    ParamVector grad;
};

/// ||theta - theta_pretrained||^2 over all segments.
ParamRegLoss reg_param(const ParamVector& theta, const ParamVector& theta_pretrained);

/// l2_loss plus lambda times the configured regularizer (param uses theta,
/// hidden uses the batch's sbar pair, none adds nothing).
double combined_l2(const AlignedStateBatch& batch, const ParamVector& theta,
                   const ParamVector& theta_pretrained, const ObjectiveConfig& config);

// ---------------------------------------------------------------------------
// contrastive alignment
// ---------------------------------------------------------------------------

/// Learned cosine similarity cos(f(a), f(b)) for two row vectors, with a
/// 1e-12 guard in each norm denominator. Result lies in [-1, 1].
double sim(const Matrix& a, const Matrix& b, const SimilarityHead& head);

struct ContrastiveLoss {
    double loss = 0.0;
    Matrix d_s;
    Matrix d_t;
    ParamVector d_head;
};

/// Negative log-likelihood of each aligned pair against in-batch negatives
/// drawn from the other language only: row-wise softmax over targets plus
/// column-wise softmax over sources, coefficient 1/(2B). Minimizing this
/// pulls aligned pairs together. All-equal similarities give ln B.
ContrastiveLoss weak_loss(const AlignedStateBatch& batch, const SimilarityHead& head, double tau);

/// Same with negatives from both languages: each of the 2B states scores its
/// aligned partner against the 2B - 1 other states. All-equal similarities
/// give ln(2B - 1).
ContrastiveLoss strong_loss(const AlignedStateBatch& batch, const SimilarityHead& head, double tau);

} // namespace xlalign
