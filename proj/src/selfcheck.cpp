#include "xlalign/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "xlalign/finite_diff.hpp"
#include "xlalign/gdfa.hpp"
#include "xlalign/objectives.hpp"
#include "xlalign/rng.hpp"
#include "xlalign/textio.hpp"

namespace xlalign {

namespace {

constexpr double kGradTolerance = 1e-4;
constexpr int kGradInstances = 5;

// Tiny string hash so each check gets its own deterministic seed stream.
std::uint64_t fnv_like(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

struct GradInstance {
    ParamVector x;
    ParamVector analytic;
    std::function<double(const ParamVector&)> f;
};

using InstanceBuilder = std::function<GradInstance(Rng&)>;

CheckResult gradient_check(const std::string& name, const InstanceBuilder& build,
                           const std::string& break_op) {
    CheckResult result;
    result.name = name;
    result.max_error = 0.0;
    Rng rng(0x5EED0 + fnv_like(name));
    for (int k = 0; k < kGradInstances; ++k) {
        GradInstance inst = build(rng);
        if (break_op == name) {
            std::vector<double> flat = inst.analytic.flatten();
            flat[0] += 0.5;
            inst.analytic.assign_flat(flat);
        }
        const ParamVector numeric = finite_diff_gradient(inst.f, inst.x, 1e-4);
        result.max_error = std::max(result.max_error, max_relative_error(inst.analytic, numeric));
    }
    result.passed = result.max_error < kGradTolerance;
    result.detail = "max relative error " + format_double(result.max_error);
    return result;
}

AlignedStateBatch random_batch(std::size_t rows, std::size_t dim, Rng& rng) {
    AlignedStateBatch b;
    b.s = Matrix::gaussian(rows, dim, 1.0, rng);
    b.t = Matrix::gaussian(rows, dim, 1.0, rng);
    return b;
}

// Finite differences need the loss differentiable and well-conditioned in
// the probed neighbourhood: pre-activations clear of the rectifier's kink,
// and head-output rows with norms bounded away from zero (the cosine's
// curvature scales like 1 / norm^2).
bool gradcheck_friendly(const SimilarityHead& head, const AlignedStateBatch& b, double margin) {
    for (const Matrix* x : {&b.s, &b.t}) {
        Matrix a = matmul(*x, head.w1);
        for (std::size_t i = 0; i < a.rows(); ++i) {
            for (std::size_t j = 0; j < a.cols(); ++j) {
                if (std::fabs(a(i, j) + head.b1(0, j)) < margin) {
                    return false;
                }
            }
        }
        const Matrix f = head.forward(*x);
        for (std::size_t i = 0; i < f.rows(); ++i) {
            if (row_norm(f, i) < 0.5) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

std::vector<CheckResult> run_selfchecks(const std::string& break_op) {
    std::vector<CheckResult> out;

    out.push_back(gradient_check("l2_loss", [](Rng& rng) {
        GradInstance inst;
        AlignedStateBatch b = random_batch(5, 4, rng);
        PairLoss pl = l2_loss(b);
        inst.x.add("batch.s", b.s);
        inst.x.add("batch.t", b.t);
        inst.analytic = ParamVector::zeros_like(inst.x);
        inst.analytic.seg("batch.s") = pl.d_s;
        inst.analytic.seg("batch.t") = pl.d_t;
        inst.f = [](const ParamVector& pv) {
            AlignedStateBatch bb;
            bb.s = pv.seg("batch.s");
            bb.t = pv.seg("batch.t");
            return l2_loss(bb).loss;
        };
        return inst;
    }, break_op));

    out.push_back(gradient_check("reg_hidden", [](Rng& rng) {
        GradInstance inst;
        Matrix sbar = Matrix::gaussian(6, 3, 1.0, rng);
        Matrix pre = Matrix::gaussian(6, 3, 1.0, rng);
        HiddenRegLoss hr = reg_hidden(sbar, pre);
        inst.x.add("sbar", sbar);
        inst.analytic = ParamVector::zeros_like(inst.x);
        inst.analytic.seg("sbar") = hr.d_sbar;
        inst.f = [pre](const ParamVector& pv) { return reg_hidden(pv.seg("sbar"), pre).loss; };
        return inst;
    }, break_op));

    out.push_back(gradient_check("reg_param", [](Rng& rng) {
        GradInstance inst;
        ParamVector theta;
        theta.add("a", Matrix::gaussian(2, 3, 1.0, rng));
        theta.add("b", Matrix::gaussian(1, 4, 1.0, rng));
        ParamVector pre = ParamVector::zeros_like(theta);
        pre.seg("a") = Matrix::gaussian(2, 3, 1.0, rng);
        ParamRegLoss rp = reg_param(theta, pre);
        inst.x = theta;
        inst.analytic = rp.grad;
        inst.f = [pre](const ParamVector& pv) { return reg_param(pv, pre).loss; };
        return inst;
    }, break_op));

    out.push_back(gradient_check("combined_l2", [](Rng& rng) {
        GradInstance inst;
        AlignedStateBatch b = random_batch(4, 3, rng);
        ParamVector theta;
        theta.add("p", Matrix::gaussian(2, 2, 1.0, rng));
        ParamVector pre = ParamVector::zeros_like(theta);
        ObjectiveConfig cfg;
        cfg.lambda = 0.5;
        cfg.regularizer = ObjectiveConfig::Regularizer::Param;

        PairLoss pl = l2_loss(b);
        ParamRegLoss rp = reg_param(theta, pre);
        inst.x.add("batch.s", b.s);
        inst.x.add("batch.t", b.t);
        inst.x.add("p", theta.seg("p"));
        inst.analytic = ParamVector::zeros_like(inst.x);
        inst.analytic.seg("batch.s") = pl.d_s;
        inst.analytic.seg("batch.t") = pl.d_t;
        inst.analytic.seg("p") = 0.5 * rp.grad.seg("p");
        inst.f = [cfg, pre](const ParamVector& pv) {
            AlignedStateBatch bb;
            bb.s = pv.seg("batch.s");
            bb.t = pv.seg("batch.t");
            ParamVector th;
            th.add("p", pv.seg("p"));
            return combined_l2(bb, th, pre, cfg);
        };
        return inst;
    }, break_op));

    out.push_back(gradient_check("linear_map_loss", [](Rng& rng) {
        GradInstance inst;
        Matrix s = Matrix::gaussian(6, 3, 1.0, rng);
        Matrix t = Matrix::gaussian(6, 3, 1.0, rng);
        Matrix w = Matrix::gaussian(3, 3, 1.0, rng);
        LinearMapLoss lm = linear_map_loss(s, t, w);
        inst.x.add("w", w);
        inst.analytic = ParamVector::zeros_like(inst.x);
        inst.analytic.seg("w") = lm.d_w;
        inst.f = [s, t](const ParamVector& pv) { return linear_map_loss(s, t, pv.seg("w")).loss; };
        return inst;
    }, break_op));

    const auto contrastive_builder = [](bool weak) {
        return [weak](Rng& rng) {
            GradInstance inst;
            AlignedStateBatch b;
            SimilarityHead head;
            do {
                b = random_batch(4, 6, rng);
                Rng head_rng = rng.fork(7 + rng.bounded(1000));
                head = SimilarityHead::init_widths(6, 6, 3, head_rng);
            } while (!gradcheck_friendly(head, b, 1e-3));
            ContrastiveLoss cl = weak ? weak_loss(b, head, 0.1) : strong_loss(b, head, 0.1);
            inst.x = head.to_params();
            inst.x.add("batch.s", b.s);
            inst.x.add("batch.t", b.t);
            inst.analytic = cl.d_head;
            inst.analytic.add("batch.s", cl.d_s);
            inst.analytic.add("batch.t", cl.d_t);
            inst.f = [weak](const ParamVector& pv) {
                AlignedStateBatch bb;
                bb.s = pv.seg("batch.s");
                bb.t = pv.seg("batch.t");
                SimilarityHead h = SimilarityHead::from_params(pv);
                return weak ? weak_loss(bb, h, 0.1).loss : strong_loss(bb, h, 0.1).loss;
            };
            return inst;
        };
    };
    out.push_back(gradient_check("weak_loss", contrastive_builder(true), break_op));
    out.push_back(gradient_check("strong_loss", contrastive_builder(false), break_op));

    // orthogonality fixed point and convergence
    {
        CheckResult r;
        r.name = "orthogonality_update";
        r.passed = true;
        Rng rng(0xF1CED);
        Matrix q = random_orthogonal(6, rng);
        r.max_error = (orthogonality_update(q, 0.01) - q).frobenius_norm();
        if (r.max_error > 1e-12) {
            r.passed = false;
        }
        for (double c : {0.6, 0.9, 1.4}) {
            Matrix w = c * q;
            bool converged = false;
            for (int step = 0; step < 2000; ++step) {
                if ((matmul(w, transpose(w)) - Matrix::identity(6)).frobenius_norm() < 1e-6) {
                    converged = true;
                    break;
                }
                w = orthogonality_update(w, 0.01);
            }
            if (!converged) {
                r.passed = false;
                r.detail = "no convergence from scale " + std::to_string(c);
            }
        }
        if (r.detail.empty()) {
            r.detail = "fixed-point residual " + std::to_string(r.max_error);
        }
        out.push_back(std::move(r));
    }

    // GDFA equivalence against the dense reference on random cases
    {
        CheckResult r;
        r.name = "symmetrize_gdfa";
        r.passed = true;
        Rng rng(0x6DFA);
        int mismatches = 0;
        const int cases = 500;
        for (int trial = 0; trial < cases; ++trial) {
            const int m = 1 + static_cast<int>(rng.bounded(6));
            const int n = 1 + static_cast<int>(rng.bounded(6));
            AlignmentSet fwd(m, n), bwd(m, n);
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (rng.uniform() < 0.3) {
                        fwd.add(i, j);
                    }
                    if (rng.uniform() < 0.3) {
                        bwd.add(i, j);
                    }
                }
            }
            if (symmetrize_gdfa(fwd, bwd).links != gdfa_reference(fwd, bwd).links) {
                ++mismatches;
            }
        }
        r.max_error = static_cast<double>(mismatches);
        r.passed = mismatches == 0;
        r.detail = std::to_string(mismatches) + " mismatches in " + std::to_string(cases) + " cases";
        out.push_back(std::move(r));
    }

    return out;
}

} // namespace xlalign
