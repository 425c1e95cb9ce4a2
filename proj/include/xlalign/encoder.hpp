#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xlalign/matrix.hpp"
#include "xlalign/param_vector.hpp"
#include "xlalign/rng.hpp"

namespace xlalign {

/// Unit-string <-> id table. Id 0 is reserved for the unknown unit; lookups
/// of unseen strings return it.
class Vocab {
public:
    Vocab();

    /// Adds the unit if new; returns its id either way.
    int add_unit(const std::string& unit);

    int id_of(const std::string& unit) const;
    const std::string& unit_of(int id) const;
    int unk_id() const { return 0; }
    std::size_t size() const { return id_to_unit_.size(); }

    void save(const std::string& path) const;
    static Vocab load(const std::string& path);

private:
    std::vector<std::string> id_to_unit_;
    std::unordered_map<std::string, int> unit_to_id_;
};

/// Deterministic word splitter standing in for a subword tokenizer: words of
/// more than 6 bytes break into 3-byte units, shorter words stay whole.
std::vector<std::string> split_word(const std::string& word);

/// Unit sequence for a token list plus, per word, its [begin, end) unit span.
struct UnitSpans {
    std::vector<std::string> units;
    std::vector<std::pair<std::size_t, std::size_t>> spans;
};
UnitSpans units_of_words(const std::vector<std::string>& words);

/// Parameters of the toy contextual encoder: an embedding table and L mixing
/// layers. Forward rule per layer k (position term added before mixing):
///
///   H_0     = embedding rows of the unit ids
///   H_{k+1} = tanh((H_k + P) M_k + b_k)
///
/// where P is the fixed sinusoidal position table
/// P(i, 2j) = sin(i / 10000^(2j/d)), P(i, 2j+1) = cos(i / 10000^(2j/d)).
struct EncoderParams {
    Matrix embedding;          // |V| x d
    std::vector<Matrix> mix;   // L matrices, d x d
    std::vector<Matrix> bias;  // L row vectors, 1 x d

    std::size_t dim() const { return embedding.cols(); }
    std::size_t vocab_size() const { return embedding.rows(); }
    std::size_t layer_count() const { return mix.size(); }

    static EncoderParams init_gaussian(std::size_t vocab_size, std::size_t dim,
                                       std::size_t layers, double sigma, Rng& rng);

    /// Segments "embedding", "layerNN.bias", "layerNN.mix" (zero-padded
    /// layer index, so lexicographic order is layer order).
    ParamVector to_params() const;
    static EncoderParams from_params(const ParamVector& pv);
};

/// Frozen deep copy of the encoder parameters at snapshot time.
struct PretrainedSnapshot {
    EncoderParams params;
};

PretrainedSnapshot snapshot(const EncoderParams& params);

/// Per-layer hidden states for one sentence; layers[0] is the embedding
/// lookup, layers[L] the final layer. Row count equals the unit count.
struct ContextualStates {
    std::vector<Matrix> layers;
    const Matrix& final_layer() const { return layers.back(); }
};

/// Fixed sinusoidal position table for a sentence of the given length.
Matrix position_table(std::size_t length, std::size_t dim);

/// Pure function of (params, unit_ids). Throws std::out_of_range for ids
/// outside the vocabulary.
ContextualStates encode(const EncoderParams& params, const std::vector<int>& unit_ids);

/// Accumulates d loss / d params into grads given the gradient at the final
/// layer. grads must have the structure of params.to_params().
void encode_backward(const EncoderParams& params, const std::vector<int>& unit_ids,
                     const ContextualStates& states, const Matrix& d_final,
                     ParamVector& grads);

/// Row i of the result is the state row of the first unit of word i at the
/// given layer. Throws std::invalid_argument for empty or out-of-range spans.
Matrix first_unit_select(const ContextualStates& states,
                         const std::vector<std::pair<std::size_t, std::size_t>>& word_spans,
                         std::size_t layer);

} // namespace xlalign
