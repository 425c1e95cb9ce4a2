#include "xlalign/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <stdexcept>

#include "xlalign/errors.hpp"
#include "xlalign/textio.hpp"

namespace xlalign {

RunConfig RunConfig::paper() {
    RunConfig c;
    c.batch_size = 128;
    c.total_steps = 100000;
    c.warmup_steps = 4000;
    c.peak_rate = 1e-4;
    c.max_seq_len = 96;
    return c;
}

RunConfig RunConfig::desk() {
    RunConfig c;
    c.batch_size = 32;
    c.total_steps = 2000;
    c.warmup_steps = 80;
    c.peak_rate = 0.02;
    c.max_seq_len = 96;
    return c;
}

RunConfig RunConfig::paper_linear() {
    RunConfig c;
    c.mode = ObjectiveConfig::Mode::Linear;
    c.batch_size = 128;
    c.total_steps = 20000;
    c.warmup_steps = 0;
    c.peak_rate = 1e-4;
    return c;
}

RunConfig RunConfig::desk_linear() {
    RunConfig c;
    c.mode = ObjectiveConfig::Mode::Linear;
    c.batch_size = 128;
    c.total_steps = 2000;
    c.warmup_steps = 0;
    c.peak_rate = 0.01;
    return c;
}

ObjectiveConfig RunConfig::objective() const {
    ObjectiveConfig o;
    o.lambda = lambda;
    o.tau = tau;
    o.beta = beta;
    o.mode = mode;
    o.regularizer = regularizer;
    return o;
}

LrSchedule RunConfig::schedule() const {
    return LrSchedule{peak_rate, warmup_steps, total_steps, 0.0};
}

void RunConfig::validate() const {
    objective().validate();
    if (warmup_steps < 0 || total_steps < 0 || warmup_steps > total_steps) {
        throw ConfigError("run config: need 0 <= warmup_steps <= total_steps");
    }
    const bool contrastive =
        mode == ObjectiveConfig::Mode::Weak || mode == ObjectiveConfig::Mode::Strong;
    if (batch_size < (contrastive ? 2 : 1)) {
        throw ConfigError("run config: batch size too small for this objective");
    }
    if (max_seq_len < 1) {
        throw ConfigError("run config: max_seq_len must be >= 1");
    }
    if (peak_rate < 0.0) {
        throw ConfigError("run config: peak_rate must be non-negative");
    }
}

BatchPlan build_batches(const std::vector<LabeledPair>& pairs, const RunConfig& config,
                        std::uint64_t epoch) {
    if (pairs.empty()) {
        throw DataError("build_batches: no aligned pairs");
    }
    BatchPlan plan;

    std::map<int, std::vector<std::size_t>> by_language;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (pairs[k].src_first_unit >= config.max_seq_len ||
            pairs[k].tgt_first_unit >= config.max_seq_len) {
            ++plan.truncated_pairs;
            continue;
        }
        by_language[pairs[k].language].push_back(k);
    }
    if (by_language.empty()) {
        throw DataError("build_batches: every pair exceeded max_seq_len");
    }
    plan.single_language = by_language.size() == 1;

    Rng base(config.seed);
    struct Queue {
        int language;
        std::vector<std::size_t> order;
        std::size_t next = 0;
        std::size_t remaining() const { return order.size() - next; }
    };
    std::vector<Queue> queues;
    for (auto& [lang, idx] : by_language) {
        Queue q;
        q.language = lang;
        q.order = idx;
        base.fork(epoch * 131 + static_cast<std::uint64_t>(lang)).shuffle(q.order);
        queues.push_back(std::move(q));
    }

    std::size_t total_remaining = 0;
    for (const Queue& q : queues) {
        total_remaining += q.remaining();
    }

    while (total_remaining > 0) {
        const std::size_t size = std::min<std::size_t>(
            static_cast<std::size_t>(config.batch_size), total_remaining);
        std::vector<std::size_t> quota(queues.size(), 0);
        std::size_t given = 0;
        // floor: one slot per language that still has pairs, while slots last
        for (std::size_t qi = 0; qi < queues.size() && given < size; ++qi) {
            if (queues[qi].remaining() > 0) {
                quota[qi] = 1;
                ++given;
            }
        }
        // remaining slots to the language with the most unscheduled pairs
        while (given < size) {
            std::size_t best = queues.size();
            std::size_t best_left = 0;
            for (std::size_t qi = 0; qi < queues.size(); ++qi) {
                const std::size_t left = queues[qi].remaining() - quota[qi];
                if (left > best_left) {
                    best_left = left;
                    best = qi;
                }
            }
            if (best == queues.size()) {
                break;
            }
            ++quota[best];
            ++given;
        }

        std::vector<BatchItem> batch;
        for (std::size_t qi = 0; qi < queues.size(); ++qi) {
            for (std::size_t n = 0; n < quota[qi]; ++n) {
                const LabeledPair& lp = pairs[queues[qi].order[queues[qi].next++]];
                batch.push_back({lp.language, lp.pair.pair_id, lp.pair.src_idx, lp.pair.tgt_idx});
            }
        }
        total_remaining -= batch.size();
        if (batch.size() < static_cast<std::size_t>(config.batch_size)) {
            plan.short_final = true;
        }
        plan.batches.push_back(std::move(batch));
    }
    return plan;
}

void write_loss_log(std::ostream& out, const std::vector<LossLogRow>& rows) {
    out << "step\tloss\tlr\n";
    for (const LossLogRow& r : rows) {
        out << r.step << '\t' << format_double(r.loss) << '\t' << format_double(r.lr) << '\n';
    }
}

LinearMapResult train_linear_mapping(const Matrix& s, const Matrix& t, const RunConfig& config) {
    config.validate();
    if (!s.same_shape(t) || s.rows() == 0) {
        throw std::invalid_argument("train_linear_mapping: feature matrices must be non-empty and same-shape");
    }
    const std::size_t d = s.cols();
    const std::size_t n = s.rows();

    LinearMapResult out;
    ParamVector pv;
    pv.add("w", Matrix::identity(d));
    AdamState adam = AdamState::init(pv);
    const LrSchedule schedule = config.schedule();

    Rng base(config.seed);
    std::vector<std::size_t> order(n);
    std::size_t cursor = n; // forces a shuffle on first use
    std::uint64_t epoch = 0;

    const std::size_t batch_rows = std::min<std::size_t>(
        static_cast<std::size_t>(config.batch_size), n);
    Matrix sb(batch_rows, d), tb(batch_rows, d);

    for (long step = 0; step < config.total_steps; ++step) {
        for (std::size_t r = 0; r < batch_rows; ++r) {
            if (cursor >= n) {
                for (std::size_t k = 0; k < n; ++k) {
                    order[k] = k;
                }
                base.fork(epoch++).shuffle(order);
                cursor = 0;
            }
            sb.set_row(r, s, order[cursor]);
            tb.set_row(r, t, order[cursor]);
            ++cursor;
        }

        LinearMapLoss lm = linear_map_loss(sb, tb, pv.seg("w"));
        const double mean_loss = lm.loss / static_cast<double>(batch_rows);
        if (!std::isfinite(mean_loss)) {
            throw NumericError("train_linear_mapping: non-finite loss at step " +
                               std::to_string(step));
        }
        ParamVector grads = ParamVector::zeros_like(pv);
        grads.seg("w") = (1.0 / static_cast<double>(batch_rows)) * lm.d_w;

        const double lr = lr_at(schedule, step);
        adam_step(adam, pv, grads, lr);
        pv.seg("w") = orthogonality_update(pv.seg("w"), config.beta);
        out.log.push_back({step, mean_loss, lr});
    }
    out.w = pv.seg("w");
    return out;
}

namespace {

struct TokenizedSentence {
    std::vector<int> src_ids, tgt_ids;
    std::vector<std::pair<std::size_t, std::size_t>> src_spans, tgt_spans;
};

TokenizedSentence tokenize_pair(const SentencePair& pair, const Vocab& vocab, int max_seq_len) {
    TokenizedSentence ts;
    UnitSpans src = units_of_words(pair.src);
    UnitSpans tgt = units_of_words(pair.tgt);
    const std::size_t cap = static_cast<std::size_t>(max_seq_len);
    if (src.units.size() > cap) {
        src.units.resize(cap);
    }
    if (tgt.units.size() > cap) {
        tgt.units.resize(cap);
    }
    for (const std::string& u : src.units) {
        ts.src_ids.push_back(vocab.id_of(u));
    }
    for (const std::string& u : tgt.units) {
        ts.tgt_ids.push_back(vocab.id_of(u));
    }
    ts.src_spans = std::move(src.spans);
    ts.tgt_spans = std::move(tgt.spans);
    return ts;
}

} // namespace

std::vector<LabeledPair> label_pairs(const FinetuneData& data) {
    std::vector<LabeledPair> out;
    for (std::size_t lang = 0; lang < data.languages.size(); ++lang) {
        const LanguageCorpus& corpus = data.languages[lang];
        std::vector<UnitSpans> src_cache(corpus.sentences.size());
        std::vector<UnitSpans> tgt_cache(corpus.sentences.size());
        std::vector<bool> cached(corpus.sentences.size(), false);
        for (const AlignedWordPair& p : corpus.pairs) {
            if (p.pair_id < 0 || static_cast<std::size_t>(p.pair_id) >= corpus.sentences.size()) {
                throw DataError("label_pairs: pair id " + std::to_string(p.pair_id) +
                                " outside corpus '" + corpus.name + "'");
            }
            const std::size_t sid = static_cast<std::size_t>(p.pair_id);
            if (!cached[sid]) {
                src_cache[sid] = units_of_words(corpus.sentences[sid].src);
                tgt_cache[sid] = units_of_words(corpus.sentences[sid].tgt);
                cached[sid] = true;
            }
            if (p.src_idx < 0 || static_cast<std::size_t>(p.src_idx) >= src_cache[sid].spans.size() ||
                p.tgt_idx < 0 || static_cast<std::size_t>(p.tgt_idx) >= tgt_cache[sid].spans.size()) {
                throw DataError("label_pairs: word index out of range in pair " +
                                std::to_string(p.pair_id));
            }
            LabeledPair lp;
            lp.language = static_cast<int>(lang);
            lp.pair = p;
            lp.src_first_unit = static_cast<int>(src_cache[sid].spans[static_cast<std::size_t>(p.src_idx)].first);
            lp.tgt_first_unit = static_cast<int>(tgt_cache[sid].spans[static_cast<std::size_t>(p.tgt_idx)].first);
            out.push_back(std::move(lp));
        }
    }
    return out;
}

StaticFeatures collect_static_features(const EncoderParams& params, const Vocab& vocab,
                                       const LanguageCorpus& corpus, std::size_t layer,
                                       int max_seq_len) {
    std::map<long, std::vector<std::size_t>> by_sentence;
    for (std::size_t k = 0; k < corpus.pairs.size(); ++k) {
        by_sentence[corpus.pairs[k].pair_id].push_back(k);
    }

    std::vector<std::pair<Matrix, Matrix>> rows(corpus.pairs.size()); // (s_row, t_row)
    std::vector<bool> usable(corpus.pairs.size(), false);
    for (const auto& [pair_id, indices] : by_sentence) {
        const SentencePair& sentence = corpus.sentences.at(static_cast<std::size_t>(pair_id));
        const TokenizedSentence ts = tokenize_pair(sentence, vocab, max_seq_len);
        const ContextualStates src_states = encode(params, ts.src_ids);
        const ContextualStates tgt_states = encode(params, ts.tgt_ids);
        for (std::size_t k : indices) {
            const AlignedWordPair& p = corpus.pairs[k];
            const std::size_t su = ts.src_spans[static_cast<std::size_t>(p.src_idx)].first;
            const std::size_t tu = ts.tgt_spans[static_cast<std::size_t>(p.tgt_idx)].first;
            if (su >= ts.src_ids.size() || tu >= ts.tgt_ids.size()) {
                continue; // first unit truncated away
            }
            rows[k] = {src_states.layers[layer].row(su), tgt_states.layers[layer].row(tu)};
            usable[k] = true;
        }
    }

    std::size_t count = 0;
    for (bool u : usable) {
        count += u ? 1 : 0;
    }
    StaticFeatures f;
    f.s = Matrix(count, params.dim());
    f.t = Matrix(count, params.dim());
    std::size_t r = 0;
    for (std::size_t k = 0; k < corpus.pairs.size(); ++k) {
        if (!usable[k]) {
            continue;
        }
        f.s.set_row(r, rows[k].first, 0);
        f.t.set_row(r, rows[k].second, 0);
        ++r;
    }
    return f;
}

FinetuneResult train_finetune(const EncoderParams& init, const Vocab& vocab,
                              const FinetuneData& data, const RunConfig& config) {
    config.validate();
    const std::size_t d = init.dim();
    const bool contrastive = config.mode == ObjectiveConfig::Mode::Weak ||
                             config.mode == ObjectiveConfig::Mode::Strong;
    if (config.mode == ObjectiveConfig::Mode::Linear) {
        throw ConfigError("train_finetune: linear mapping trains via train_linear_mapping");
    }

    std::vector<LabeledPair> labeled = label_pairs(data);
    if (labeled.empty()) {
        throw DataError("train_finetune: no aligned pairs");
    }

    // Tokenize every referenced sentence once; ids and spans are immutable.
    std::vector<std::vector<TokenizedSentence>> tokenized(data.languages.size());
    for (std::size_t lang = 0; lang < data.languages.size(); ++lang) {
        tokenized[lang].reserve(data.languages[lang].sentences.size());
        for (const SentencePair& sp : data.languages[lang].sentences) {
            tokenized[lang].push_back(tokenize_pair(sp, vocab, config.max_seq_len));
        }
    }

    EncoderParams enc = init;
    ParamVector enc_pv = enc.to_params();
    const PretrainedSnapshot pre = snapshot(init);
    const ParamVector theta_pre = pre.params.to_params();
    AdamState enc_adam = AdamState::init(enc_pv);

    Rng base(config.seed);
    SimilarityHead head;
    ParamVector head_pv;
    AdamState head_adam;
    if (contrastive) {
        Rng head_rng = base.fork(0xA11EAD);
        head = SimilarityHead::init(d, head_rng);
        head_pv = head.to_params();
        head_adam = AdamState::init(head_pv);
    }

    // Frozen-encoder states for the hidden regularizer, cached per sentence.
    std::map<std::pair<int, long>, Matrix> sbar_pre_cache;

    const LrSchedule schedule = config.schedule();
    FinetuneResult result;

    std::uint64_t epoch = 0;
    BatchPlan plan = build_batches(labeled, config, epoch);
    std::size_t batch_index = 0;

    result.plan_info.short_final = plan.short_final;
    result.plan_info.single_language = plan.single_language;
    result.plan_info.truncated_pairs = plan.truncated_pairs;

    std::size_t usable = 0;
    for (const auto& batch : plan.batches) {
        usable += batch.size();
    }
    if (contrastive && usable < 2) {
        throw DataError("train_finetune: contrastive objectives need at least 2 usable pairs");
    }

    auto next_batch = [&]() -> const std::vector<BatchItem>& {
        for (;;) {
            if (batch_index >= plan.batches.size()) {
                ++epoch;
                plan = build_batches(labeled, config, epoch);
                batch_index = 0;
            }
            const std::vector<BatchItem>& batch = plan.batches[batch_index++];
            if (contrastive && batch.size() < 2) {
                continue; // degenerate trailing batch: contrastive loss undefined
            }
            return batch;
        }
    };

    for (long step = 0; step < config.total_steps; ++step) {
        const std::vector<BatchItem>& batch = next_batch();
        const std::size_t b = batch.size();

        // Encode each distinct sentence pair once.
        std::map<std::pair<int, long>, std::pair<ContextualStates, ContextualStates>> states;
        for (const BatchItem& item : batch) {
            const std::pair<int, long> key{item.language, item.pair_id};
            if (states.count(key)) {
                continue;
            }
            const TokenizedSentence& ts =
                tokenized[static_cast<std::size_t>(item.language)][static_cast<std::size_t>(item.pair_id)];
            states.emplace(key, std::make_pair(encode(enc, ts.src_ids), encode(enc, ts.tgt_ids)));
        }

        AlignedStateBatch asb;
        asb.s = Matrix(b, d);
        asb.t = Matrix(b, d);
        for (std::size_t r = 0; r < b; ++r) {
            const BatchItem& item = batch[r];
            const TokenizedSentence& ts =
                tokenized[static_cast<std::size_t>(item.language)][static_cast<std::size_t>(item.pair_id)];
            const auto& [src_states, tgt_states] = states.at({item.language, item.pair_id});
            asb.s.set_row(r, src_states.final_layer(),
                          ts.src_spans[static_cast<std::size_t>(item.src_word_idx)].first);
            asb.t.set_row(r, tgt_states.final_layer(),
                          ts.tgt_spans[static_cast<std::size_t>(item.tgt_word_idx)].first);
            asb.language.push_back(item.language);
        }

        double loss = 0.0;
        Matrix d_s, d_t;
        ParamVector head_grads;
        if (config.mode == ObjectiveConfig::Mode::L2) {
            PairLoss pl = l2_loss(asb);
            loss = pl.loss;
            d_s = std::move(pl.d_s);
            d_t = std::move(pl.d_t);
        } else {
            ContrastiveLoss cl = contrastive
                ? (config.mode == ObjectiveConfig::Mode::Weak ? weak_loss(asb, head, config.tau)
                                                              : strong_loss(asb, head, config.tau))
                : ContrastiveLoss{};
            loss = cl.loss;
            d_s = std::move(cl.d_s);
            d_t = std::move(cl.d_t);
            head_grads = std::move(cl.d_head);
        }

        ParamVector enc_grads = ParamVector::zeros_like(enc_pv);

        // Scatter objective gradients (plus the hidden regularizer) back to
        // sentence-level gradients and run the encoder backward per sentence.
        for (const auto& [key, st] : states) {
            const TokenizedSentence& ts =
                tokenized[static_cast<std::size_t>(key.first)][static_cast<std::size_t>(key.second)];
            Matrix d_src(ts.src_ids.size(), d);
            Matrix d_tgt(ts.tgt_ids.size(), d);
            for (std::size_t r = 0; r < b; ++r) {
                const BatchItem& item = batch[r];
                if (item.language != key.first || item.pair_id != key.second) {
                    continue;
                }
                d_src.add_to_row(ts.src_spans[static_cast<std::size_t>(item.src_word_idx)].first, d_s, r);
                d_tgt.add_to_row(ts.tgt_spans[static_cast<std::size_t>(item.tgt_word_idx)].first, d_t, r);
            }
            if (config.regularizer == ObjectiveConfig::Regularizer::Hidden) {
                auto cached = sbar_pre_cache.find(key);
                if (cached == sbar_pre_cache.end()) {
                    cached = sbar_pre_cache
                                 .emplace(key, encode(pre.params, ts.src_ids).final_layer())
                                 .first;
                }
                HiddenRegLoss hr = reg_hidden(st.first.final_layer(), cached->second);
                loss += config.lambda * hr.loss;
                hr.d_sbar *= config.lambda;
                d_src += hr.d_sbar;
            }
            encode_backward(enc, ts.src_ids, st.first, d_src, enc_grads);
            encode_backward(enc, ts.tgt_ids, st.second, d_tgt, enc_grads);
        }

        if (config.regularizer == ObjectiveConfig::Regularizer::Param) {
            ParamRegLoss rp = reg_param(enc_pv, theta_pre);
            loss += config.lambda * rp.loss;
            enc_grads.axpy(config.lambda, rp.grad);
        }

        if (!std::isfinite(loss)) {
            throw NumericError("train_finetune: non-finite loss at step " + std::to_string(step));
        }

        const double lr = lr_at(schedule, step);
        adam_step(enc_adam, enc_pv, enc_grads, lr);
        enc = EncoderParams::from_params(enc_pv);
        if (contrastive) {
            adam_step(head_adam, head_pv, head_grads, lr);
            head = SimilarityHead::from_params(head_pv);
        }
        result.log.push_back({step, loss, lr});
    }

    result.params = std::move(enc);
    result.head = std::move(head);
    result.has_head = contrastive;
    return result;
}

} // namespace xlalign
