#include "xlalign/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "xlalign/errors.hpp"
#include "xlalign/svd.hpp"

namespace xlalign {

namespace {

constexpr double kNormEps = 1e-12;

Matrix vstack(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() + b.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        out.set_row(i, a, i);
    }
    for (std::size_t i = 0; i < b.rows(); ++i) {
        out.set_row(a.rows() + i, b, i);
    }
    return out;
}

struct HeadCache {
    Matrix x;
    Matrix a; // pre-activation, B x h
    Matrix r; // relu(a)
    Matrix f; // output, B x p
};

HeadCache head_forward_cached(const SimilarityHead& head, const Matrix& x) {
    if (x.cols() != head.in_dim()) {
        throw std::invalid_argument("similarity head: input width " + std::to_string(x.cols()) +
                                    " != " + std::to_string(head.in_dim()));
    }
    HeadCache c;
    c.x = x;
    c.a = matmul(x, head.w1);
    for (std::size_t i = 0; i < c.a.rows(); ++i) {
        for (std::size_t j = 0; j < c.a.cols(); ++j) {
            c.a(i, j) += head.b1(0, j);
        }
    }
    c.r = c.a;
    for (std::size_t k = 0; k < c.r.size(); ++k) {
        c.r.data()[k] = std::max(0.0, c.r.data()[k]);
    }
    c.f = matmul(c.r, head.w2);
    for (std::size_t i = 0; i < c.f.rows(); ++i) {
        for (std::size_t j = 0; j < c.f.cols(); ++j) {
            c.f(i, j) += head.b2(0, j);
        }
    }
    return c;
}

// d loss / d x for one head invocation; head gradients accumulate.
Matrix head_backward(const SimilarityHead& head, const HeadCache& c, const Matrix& d_f,
                     ParamVector& d_head) {
    d_head.seg("head.w2") += matmul(transpose(c.r), d_f);
    Matrix& db2 = d_head.seg("head.b2");
    for (std::size_t i = 0; i < d_f.rows(); ++i) {
        for (std::size_t j = 0; j < d_f.cols(); ++j) {
            db2(0, j) += d_f(i, j);
        }
    }
    Matrix d_a = matmul(d_f, transpose(head.w2));
    for (std::size_t k = 0; k < d_a.size(); ++k) {
        if (c.a.data()[k] <= 0.0) {
            d_a.data()[k] = 0.0;
        }
    }
    d_head.seg("head.w1") += matmul(transpose(c.x), d_a);
    Matrix& db1 = d_head.seg("head.b1");
    for (std::size_t i = 0; i < d_a.rows(); ++i) {
        for (std::size_t j = 0; j < d_a.cols(); ++j) {
            db1(0, j) += d_a(i, j);
        }
    }
    return matmul(d_a, transpose(head.w1));
}

struct UnitRows {
    Matrix hat;               // rows scaled to (near) unit norm
    std::vector<double> norm; // raw row norms
};

UnitRows normalize_rows(const Matrix& f) {
    UnitRows u;
    u.hat = f;
    u.norm.resize(f.rows());
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const double n = row_norm(f, i);
        u.norm[i] = n;
        const double r = n + kNormEps;
        for (std::size_t j = 0; j < f.cols(); ++j) {
            u.hat(i, j) /= r;
        }
    }
    return u;
}

Matrix normalize_rows_backward(const Matrix& f, const UnitRows& u, const Matrix& d_hat) {
    Matrix d_f(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.rows(); ++i) {
        const double r = u.norm[i] + kNormEps;
        double along = 0.0;
        for (std::size_t j = 0; j < f.cols(); ++j) {
            along += d_hat(i, j) * f(i, j);
        }
        for (std::size_t j = 0; j < f.cols(); ++j) {
            double g = d_hat(i, j) / r;
            if (u.norm[i] > 0.0) {
                g -= along * f(i, j) / (r * r * u.norm[i]);
            }
            d_f(i, j) = g;
        }
    }
    return d_f;
}

double logsumexp_row(const Matrix& logits, std::size_t row, std::size_t skip_col, bool use_skip) {
    double m = -1e300;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        if (use_skip && j == skip_col) {
            continue;
        }
        m = std::max(m, logits(row, j));
    }
    double s = 0.0;
    for (std::size_t j = 0; j < logits.cols(); ++j) {
        if (use_skip && j == skip_col) {
            continue;
        }
        s += std::exp(logits(row, j) - m);
    }
    return m + std::log(s);
}

void validate_batch(const AlignedStateBatch& batch, std::size_t min_rows) {
    if (!batch.s.same_shape(batch.t)) {
        throw std::invalid_argument("aligned batch: S and T shapes differ");
    }
    if (batch.s.rows() < min_rows) {
        throw std::invalid_argument("aligned batch: needs at least " + std::to_string(min_rows) +
                                    " rows, got " + std::to_string(batch.s.rows()));
    }
}

} // namespace

void ObjectiveConfig::validate() const {
    if (!(tau > 0.0)) {
        throw ConfigError("objective config: tau must be positive");
    }
    if (lambda < 0.0) {
        throw ConfigError("objective config: lambda must be non-negative");
    }
    if (!(beta > 0.0 && beta < 1.0)) {
        throw ConfigError("objective config: beta must lie in (0, 1)");
    }
}

SimilarityHead SimilarityHead::init(std::size_t dim, Rng& rng) {
    return init_widths(dim, dim, default_out_dim(dim), rng);
}

SimilarityHead SimilarityHead::init_widths(std::size_t dim, std::size_t hidden, std::size_t out,
                                           Rng& rng) {
    SimilarityHead h;
    h.w1 = Matrix::gaussian(dim, hidden, 1.0 / std::sqrt(static_cast<double>(dim)), rng);
    h.b1 = Matrix(1, hidden);
    h.w2 = Matrix::gaussian(hidden, out, 1.0 / std::sqrt(static_cast<double>(hidden)), rng);
    h.b2 = Matrix(1, out);
    return h;
}

Matrix SimilarityHead::forward(const Matrix& x) const {
    return head_forward_cached(*this, x).f;
}

ParamVector SimilarityHead::to_params() const {
    ParamVector pv;
    pv.add("head.w1", w1);
    pv.add("head.b1", b1);
    pv.add("head.w2", w2);
    pv.add("head.b2", b2);
    return pv;
}

SimilarityHead SimilarityHead::from_params(const ParamVector& pv) {
    SimilarityHead h;
    h.w1 = pv.seg("head.w1");
    h.b1 = pv.seg("head.b1");
    h.w2 = pv.seg("head.w2");
    h.b2 = pv.seg("head.b2");
    return h;
}

LinearMapLoss linear_map_loss(const Matrix& s, const Matrix& t, const Matrix& w) {
    if (t.cols() != w.rows() || s.rows() != t.rows() || s.cols() != w.cols()) {
        throw std::invalid_argument("linear_map_loss: incompatible shapes");
    }
    const Matrix residual = s - matmul(t, w);
    LinearMapLoss out;
    const double norm = residual.frobenius_norm();
    out.loss = norm * norm;
    out.d_w = -2.0 * matmul(transpose(t), residual);
    return out;
}

Matrix orthogonality_update(const Matrix& w, double beta) {
    if (w.rows() != w.cols()) {
        throw std::invalid_argument("orthogonality_update: matrix must be square");
    }
    return (1.0 + beta) * w - beta * matmul(matmul(w, transpose(w)), w);
}

ProcrustesResult procrustes_svd(const Matrix& s, const Matrix& t) {
    if (s.rows() != t.rows() || s.cols() != t.cols()) {
        throw std::invalid_argument("procrustes_svd: S and T shapes differ");
    }
    const Matrix m = matmul(transpose(t), s);
    const SvdResult svd = svd_small(m);
    ProcrustesResult out;
    out.w = matmul(svd.u, transpose(svd.v));
    const double smax = svd.singular_values.empty() ? 0.0 : svd.singular_values.front();
    for (double sv : svd.singular_values) {
        if (sv <= smax * 1e-10) {
            out.degenerate = true;
        }
    }
    ensure_finite(out.w, "procrustes mapping");
    return out;
}

PairLoss l2_loss(const AlignedStateBatch& batch) {
    validate_batch(batch, 1);
    const std::size_t b = batch.s.rows();
    PairLoss out;
    Matrix diff = batch.s - batch.t;
    double total = 0.0;
    for (std::size_t k = 0; k < diff.size(); ++k) {
        total += diff.data()[k] * diff.data()[k];
    }
    out.loss = total / static_cast<double>(b);
    out.d_s = (2.0 / static_cast<double>(b)) * diff;
    out.d_t = -1.0 * out.d_s;
    return out;
}

HiddenRegLoss reg_hidden(const Matrix& sbar, const Matrix& sbar_pretrained) {
    if (!sbar.same_shape(sbar_pretrained)) {
        throw std::invalid_argument("reg_hidden: shape mismatch");
    }
    HiddenRegLoss out;
    Matrix diff = sbar - sbar_pretrained;
    const double norm = diff.frobenius_norm();
    out.loss = norm * norm;
    out.d_sbar = 2.0 * diff;
    return out;
}

ParamRegLoss reg_param(const ParamVector& theta, const ParamVector& theta_pretrained) {
    if (!theta.same_structure(theta_pretrained)) {
        throw std::invalid_argument("reg_param: parameter structure mismatch");
    }
    ParamRegLoss out;
    out.loss = theta.squared_distance(theta_pretrained);
    out.grad = theta;
    out.grad.axpy(-1.0, theta_pretrained);
    auto it = out.grad.begin();
    for (; it != out.grad.end(); ++it) {
        it->second *= 2.0;
    }
    return out;
}

double combined_l2(const AlignedStateBatch& batch, const ParamVector& theta,
                   const ParamVector& theta_pretrained, const ObjectiveConfig& config) {
    config.validate();
    double loss = l2_loss(batch).loss;
    switch (config.regularizer) {
        case ObjectiveConfig::Regularizer::Param:
            loss += config.lambda * reg_param(theta, theta_pretrained).loss;
            break;
        case ObjectiveConfig::Regularizer::Hidden:
            if (!batch.has_sbar) {
                throw std::invalid_argument("combined_l2: hidden regularizer needs sbar states");
            }
            loss += config.lambda * reg_hidden(batch.sbar, batch.sbar_pretrained).loss;
            break;
        case ObjectiveConfig::Regularizer::None:
            break;
    }
    return loss;
}

double sim(const Matrix& a, const Matrix& b, const SimilarityHead& head) {
    if (a.rows() != 1 || b.rows() != 1) {
        throw std::invalid_argument("sim: expects row vectors");
    }
    const Matrix fa = head.forward(a);
    const Matrix fb = head.forward(b);
    const double na = row_norm(fa, 0) + kNormEps;
    const double nb = row_norm(fb, 0) + kNormEps;
    return dot(fa, 0, fb, 0) / (na * nb);
}

ContrastiveLoss weak_loss(const AlignedStateBatch& batch, const SimilarityHead& head, double tau) {
    if (!(tau > 0.0)) {
        throw ConfigError("weak_loss: tau must be positive");
    }
    validate_batch(batch, 2);
    const std::size_t b = batch.s.rows();

    const HeadCache cs = head_forward_cached(head, batch.s);
    const HeadCache ct = head_forward_cached(head, batch.t);
    const UnitRows us = normalize_rows(cs.f);
    const UnitRows ut = normalize_rows(ct.f);

    Matrix logits = matmul(us.hat, transpose(ut.hat)); // c_ij = sim(s_i, t_j)
    logits *= 1.0 / tau;

    double loss = 0.0;
    const Matrix logits_t = transpose(logits);
    for (std::size_t i = 0; i < b; ++i) {
        loss += -logits(i, i) + logsumexp_row(logits, i, 0, false);
        loss += -logits(i, i) + logsumexp_row(logits_t, i, 0, false);
    }
    loss /= 2.0 * static_cast<double>(b);

    // d loss / d c_ij = (row softmax + column softmax - 2 I) / (2 B tau)
    Matrix d_c(b, b);
    for (std::size_t i = 0; i < b; ++i) {
        const double lse = logsumexp_row(logits, i, 0, false);
        for (std::size_t j = 0; j < b; ++j) {
            d_c(i, j) += std::exp(logits(i, j) - lse);
        }
    }
    for (std::size_t j = 0; j < b; ++j) {
        const double lse = logsumexp_row(logits_t, j, 0, false);
        for (std::size_t i = 0; i < b; ++i) {
            d_c(i, j) += std::exp(logits(i, j) - lse);
        }
    }
    for (std::size_t i = 0; i < b; ++i) {
        d_c(i, i) -= 2.0;
    }
    d_c *= 1.0 / (2.0 * static_cast<double>(b) * tau);

    const Matrix d_shat = matmul(d_c, ut.hat);
    const Matrix d_that = matmul(transpose(d_c), us.hat);

    ContrastiveLoss out;
    out.loss = loss;
    out.d_head = ParamVector::zeros_like(head.to_params());
    const Matrix d_fs = normalize_rows_backward(cs.f, us, d_shat);
    const Matrix d_ft = normalize_rows_backward(ct.f, ut, d_that);
    out.d_s = head_backward(head, cs, d_fs, out.d_head);
    out.d_t = head_backward(head, ct, d_ft, out.d_head);
    return out;
}

ContrastiveLoss strong_loss(const AlignedStateBatch& batch, const SimilarityHead& head, double tau) {
    if (!(tau > 0.0)) {
        throw ConfigError("strong_loss: tau must be positive");
    }
    validate_batch(batch, 2);
    const std::size_t b = batch.s.rows();
    const std::size_t n = 2 * b;

    const Matrix stacked = vstack(batch.s, batch.t);
    const HeadCache ch = head_forward_cached(head, stacked);
    const UnitRows uh = normalize_rows(ch.f);

    Matrix logits = matmul(uh.hat, transpose(uh.hat));
    logits *= 1.0 / tau;

    auto aligned = [b, n](std::size_t h) { return (h + b) % n; };

    double loss = 0.0;
    Matrix d_g(n, n);
    for (std::size_t h = 0; h < n; ++h) {
        const double lse = logsumexp_row(logits, h, h, true);
        loss += -logits(h, aligned(h)) + lse;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == h) {
                continue;
            }
            d_g(h, j) += std::exp(logits(h, j) - lse);
        }
        d_g(h, aligned(h)) -= 1.0;
    }
    loss /= 2.0 * static_cast<double>(b);
    d_g *= 1.0 / (2.0 * static_cast<double>(b) * tau);

    // g = hhat hhat^T, so d hhat = (d_g + d_g^T) hhat
    const Matrix d_hat = matmul(d_g + transpose(d_g), uh.hat);
    const Matrix d_f = normalize_rows_backward(ch.f, uh, d_hat);

    ContrastiveLoss out;
    out.loss = loss;
    out.d_head = ParamVector::zeros_like(head.to_params());
    const Matrix d_stacked = head_backward(head, ch, d_f, out.d_head);
    out.d_s = Matrix(b, batch.s.cols());
    out.d_t = Matrix(b, batch.s.cols());
    for (std::size_t i = 0; i < b; ++i) {
        out.d_s.set_row(i, d_stacked, i);
        out.d_t.set_row(i, d_stacked, b + i);
    }
    return out;
}

} // namespace xlalign
