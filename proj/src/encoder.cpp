#include "xlalign/encoder.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "xlalign/errors.hpp"

namespace xlalign {

Vocab::Vocab() {
    id_to_unit_.push_back("<unk>");
    unit_to_id_["<unk>"] = 0;
}

int Vocab::add_unit(const std::string& unit) {
    auto it = unit_to_id_.find(unit);
    if (it != unit_to_id_.end()) {
        return it->second;
    }
    const int id = static_cast<int>(id_to_unit_.size());
    id_to_unit_.push_back(unit);
    unit_to_id_[unit] = id;
    return id;
}

int Vocab::id_of(const std::string& unit) const {
    auto it = unit_to_id_.find(unit);
    return it == unit_to_id_.end() ? unk_id() : it->second;
}

const std::string& Vocab::unit_of(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_unit_.size()) {
        throw std::out_of_range("Vocab: id " + std::to_string(id) + " out of range");
    }
    return id_to_unit_[static_cast<std::size_t>(id)];
}

void Vocab::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("vocab: cannot open '" + path + "' for writing");
    }
    // One unit per line, id order; line 0 is the unknown unit.
    for (const std::string& u : id_to_unit_) {
        out << u << '\n';
    }
}

Vocab Vocab::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("vocab: cannot open '" + path + "'");
    }
    Vocab v;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false; // slot 0 already holds <unk>
            continue;
        }
        v.add_unit(line);
    }
    return v;
}

std::vector<std::string> split_word(const std::string& word) {
    if (word.size() <= 6) {
        return {word};
    }
    std::vector<std::string> units;
    for (std::size_t off = 0; off < word.size(); off += 3) {
        units.push_back(word.substr(off, 3));
    }
    return units;
}

UnitSpans units_of_words(const std::vector<std::string>& words) {
    UnitSpans out;
    for (const std::string& w : words) {
        const std::size_t begin = out.units.size();
        for (std::string& u : split_word(w)) {
            out.units.push_back(std::move(u));
        }
        out.spans.emplace_back(begin, out.units.size());
    }
    return out;
}

EncoderParams EncoderParams::init_gaussian(std::size_t vocab_size, std::size_t dim,
                                           std::size_t layers, double sigma, Rng& rng) {
    EncoderParams p;
    p.embedding = Matrix::gaussian(vocab_size, dim, sigma, rng);
    for (std::size_t k = 0; k < layers; ++k) {
        p.mix.push_back(Matrix::gaussian(dim, dim, sigma, rng));
        p.bias.push_back(Matrix::gaussian(1, dim, sigma, rng));
    }
    return p;
}

namespace {

std::string layer_name(std::size_t k, const char* part) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "layer%02zu.%s", k, part);
    return buf;
}

} // namespace

ParamVector EncoderParams::to_params() const {
    ParamVector pv;
    pv.add("embedding", embedding);
    for (std::size_t k = 0; k < mix.size(); ++k) {
        pv.add(layer_name(k, "mix"), mix[k]);
        pv.add(layer_name(k, "bias"), bias[k]);
    }
    return pv;
}

EncoderParams EncoderParams::from_params(const ParamVector& pv) {
    EncoderParams p;
    p.embedding = pv.seg("embedding");
    for (std::size_t k = 0;; ++k) {
        const std::string mix_name = layer_name(k, "mix");
        if (!pv.has(mix_name)) {
            break;
        }
        p.mix.push_back(pv.seg(mix_name));
        p.bias.push_back(pv.seg(layer_name(k, "bias")));
    }
    return p;
}

PretrainedSnapshot snapshot(const EncoderParams& params) {
    ensure_finite(params.embedding, "encoder embedding");
    return PretrainedSnapshot{params};
}

Matrix position_table(std::size_t length, std::size_t dim) {
    Matrix p(length, dim);
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double exponent = static_cast<double>(j - (j % 2)) / static_cast<double>(dim);
            const double angle = static_cast<double>(i) / std::pow(10000.0, exponent);
            p(i, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return p;
}

ContextualStates encode(const EncoderParams& params, const std::vector<int>& unit_ids) {
    const std::size_t len = unit_ids.size();
    const std::size_t d = params.dim();

    ContextualStates states;
    Matrix h(len, d);
    for (std::size_t i = 0; i < len; ++i) {
        const int id = unit_ids[i];
        if (id < 0 || static_cast<std::size_t>(id) >= params.vocab_size()) {
            throw std::out_of_range("encode: unit id " + std::to_string(id) +
                                    " outside vocabulary of " + std::to_string(params.vocab_size()));
        }
        h.set_row(i, params.embedding, static_cast<std::size_t>(id));
    }
    states.layers.push_back(h);

    const Matrix pos = position_table(len, d);
    for (std::size_t k = 0; k < params.layer_count(); ++k) {
        Matrix x = states.layers.back() + pos;
        Matrix a = matmul(x, params.mix[k]);
        for (std::size_t i = 0; i < len; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                a(i, j) = std::tanh(a(i, j) + params.bias[k](0, j));
            }
        }
        states.layers.push_back(std::move(a));
    }
    return states;
}

void encode_backward(const EncoderParams& params, const std::vector<int>& unit_ids,
                     const ContextualStates& states, const Matrix& d_final,
                     ParamVector& grads) {
    const std::size_t len = unit_ids.size();
    const std::size_t d = params.dim();
    if (d_final.rows() != len || d_final.cols() != d) {
        throw std::invalid_argument("encode_backward: gradient shape mismatch");
    }
    const Matrix pos = position_table(len, d);

    Matrix dh = d_final;
    for (std::size_t k = params.layer_count(); k-- > 0;) {
        const Matrix& out = states.layers[k + 1]; // tanh output
        Matrix da(len, d);
        for (std::size_t i = 0; i < len; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                da(i, j) = dh(i, j) * (1.0 - out(i, j) * out(i, j));
            }
        }
        const Matrix x = states.layers[k] + pos;
        grads.seg(layer_name(k, "mix")) += matmul(transpose(x), da);
        Matrix& db = grads.seg(layer_name(k, "bias"));
        for (std::size_t i = 0; i < len; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                db(0, j) += da(i, j);
            }
        }
        dh = matmul(da, transpose(params.mix[k]));
    }

    Matrix& de = grads.seg("embedding");
    for (std::size_t i = 0; i < len; ++i) {
        de.add_to_row(static_cast<std::size_t>(unit_ids[i]), dh, i);
    }
}

Matrix first_unit_select(const ContextualStates& states,
                         const std::vector<std::pair<std::size_t, std::size_t>>& word_spans,
                         std::size_t layer) {
    if (layer >= states.layers.size()) {
        throw std::invalid_argument("first_unit_select: layer out of range");
    }
    const Matrix& h = states.layers[layer];
    Matrix out(word_spans.size(), h.cols());
    for (std::size_t w = 0; w < word_spans.size(); ++w) {
        const auto [begin, end] = word_spans[w];
        if (begin >= end) {
            throw std::invalid_argument("first_unit_select: empty span for word " + std::to_string(w));
        }
        if (end > h.rows()) {
            throw std::invalid_argument("first_unit_select: span out of range for word " + std::to_string(w));
        }
        out.set_row(w, h, begin);
    }
    return out;
}

} // namespace xlalign
