// Command-line entry point: pipeline, train, eval, report, selftest.
//
// Exit codes: 0 success, 2 usage/config errors, 3 data errors,
// 1 internal errors or failed checks.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "xlalign/checkpoint.hpp"
#include "xlalign/config.hpp"
#include "xlalign/errors.hpp"
#include "xlalign/eval.hpp"
#include "xlalign/pipeline.hpp"
#include "xlalign/selfcheck.hpp"
#include "xlalign/textio.hpp"
#include "xlalign/trainer.hpp"

namespace fs = std::filesystem;
using namespace xlalign;

namespace {

// --------------------------- shared plumbing ---------------------------

fs::path resolve_output(const std::string& dir) {
    fs::path p(dir);
    const char* root = std::getenv("XLALIGN_OUT");
    if (root && *root && p.is_relative()) {
        p = fs::path(root) / p;
    }
    return p;
}

void require_readable(const std::string& path) {
    if (!fs::exists(path)) {
        throw ConfigError("input file does not exist: '" + path + "'");
    }
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    return hex64(fnv1a64(bytes.data(), bytes.size()));
}

void write_manifest(const fs::path& path, const std::map<std::string, std::string>& entries) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write manifest '" + path.string() + "'");
    }
    for (const auto& [key, value] : entries) {
        out << key << " = " << value << '\n';
    }
}

std::vector<SentencePair> load_bitext(const std::string& path, ParseStats& stats) {
    require_readable(path);
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot read '" + path + "'");
    }
    return parse_bitext(in, stats);
}

ObjectiveConfig::Mode parse_mode(const std::string& name) {
    if (name == "linear") {
        return ObjectiveConfig::Mode::Linear;
    }
    if (name == "l2") {
        return ObjectiveConfig::Mode::L2;
    }
    if (name == "weak") {
        return ObjectiveConfig::Mode::Weak;
    }
    if (name == "strong") {
        return ObjectiveConfig::Mode::Strong;
    }
    throw ConfigError("unknown objective '" + name + "' (valid: linear, l2, weak, strong)");
}

ObjectiveConfig::Regularizer parse_regularizer(const std::string& name) {
    if (name == "param") {
        return ObjectiveConfig::Regularizer::Param;
    }
    if (name == "hidden") {
        return ObjectiveConfig::Regularizer::Hidden;
    }
    if (name == "none") {
        return ObjectiveConfig::Regularizer::None;
    }
    throw ConfigError("unknown regularizer '" + name + "' (valid: param, hidden, none)");
}

// --------------------------- pipeline ---------------------------

struct PipelineArgs {
    std::string bitext;
    std::string out;
    std::vector<std::string> pharaoh; // fwd, bwd
    int em_iterations = 5;
    int workers = 1;
};

int cmd_pipeline(const PipelineArgs& args) {
    ParseStats stats;
    std::vector<SentencePair> pairs = load_bitext(args.bitext, stats);

    for (const auto& [line, message] : stats.errors) {
        std::cerr << "parse error, line " << line << ": " << message << '\n';
    }
    if (pairs.empty()) {
        std::cerr << "no usable sentence pairs in '" << args.bitext << "' (" << stats.lines_read
                  << " lines, " << stats.skipped_empty << " empty-side, " << stats.errors.size()
                  << " parse errors)\n";
        throw DataError("empty corpus");
    }

    PipelineCounts counts;
    std::vector<AlignedWordPair> aligned;
    if (!args.pharaoh.empty()) {
        // Sidecars carry one line per accepted sentence pair, in order.
        std::vector<AlignmentSet> fwd, bwd;
        for (int side = 0; side < 2; ++side) {
            const std::string& path = args.pharaoh[static_cast<std::size_t>(side)];
            require_readable(path);
            std::ifstream in(path);
            std::string line;
            std::size_t k = 0;
            std::vector<AlignmentSet>& dst = side == 0 ? fwd : bwd;
            while (std::getline(in, line)) {
                if (k >= pairs.size()) {
                    throw DataError("alignment file '" + path + "' has more lines than sentence pairs");
                }
                dst.push_back(parse_pharaoh(line, static_cast<int>(pairs[k].src.size()),
                                            static_cast<int>(pairs[k].tgt.size())));
                ++k;
            }
        }
        aligned = align_corpus_external(pairs, fwd, bwd, counts);
    } else {
        PipelineOptions opts;
        opts.em_iterations = args.em_iterations;
        opts.workers = args.workers;
        aligned = align_corpus(pairs, opts, counts);
    }

    const fs::path out_path = resolve_output(args.out);
    if (out_path.has_parent_path()) {
        fs::create_directories(out_path.parent_path());
    }
    std::ofstream out(out_path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write '" + out_path.string() + "'");
    }
    write_aligned_pairs(out, aligned);

    std::map<std::string, std::string> manifest;
    manifest["subcommand"] = "pipeline";
    manifest["input.bitext"] = args.bitext;
    manifest["input.bitext.digest"] = digest_file(args.bitext);
    if (!args.pharaoh.empty()) {
        manifest["input.forward"] = args.pharaoh[0];
        manifest["input.forward.digest"] = digest_file(args.pharaoh[0]);
        manifest["input.backward"] = args.pharaoh[1];
        manifest["input.backward.digest"] = digest_file(args.pharaoh[1]);
    } else {
        manifest["pipeline.em_iterations"] = std::to_string(args.em_iterations);
        manifest["pipeline.workers"] = std::to_string(args.workers);
    }
    manifest["counts.pairs_in"] = std::to_string(counts.pairs_in);
    manifest["counts.links_kept"] = std::to_string(counts.pairs_out);
    manifest["counts.trivial_dropped"] = std::to_string(counts.trivial_dropped);
    manifest["output.pairs"] = out_path.string();
    write_manifest(out_path.string() + ".manifest", manifest);

    std::cout << "pairs in:        " << counts.pairs_in << '\n'
              << "skipped (empty): " << stats.skipped_empty << '\n'
              << "parse errors:    " << stats.errors.size() << '\n'
              << "symmetrized:     " << counts.symmetrized_links << '\n'
              << "one-to-one:      " << counts.one_to_one_links << '\n'
              << "trivial dropped: " << counts.trivial_dropped << '\n'
              << "links kept:      " << counts.pairs_out << '\n'
              << "wrote " << out_path.string() << '\n';
    return 0;
}

// --------------------------- train ---------------------------

struct TrainArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string preset = "desk";
};

RunConfig preset_run_config(const std::string& preset, ObjectiveConfig::Mode mode) {
    const bool linear = mode == ObjectiveConfig::Mode::Linear;
    if (preset == "desk") {
        return linear ? RunConfig::desk_linear() : RunConfig::desk();
    }
    if (preset == "paper") {
        return linear ? RunConfig::paper_linear() : RunConfig::paper();
    }
    throw ConfigError("unknown preset '" + preset + "' (valid: desk, paper)");
}

int cmd_train(const TrainArgs& args) {
    require_readable(args.config);
    KvConfig cfg = KvConfig::parse_file(args.config);
    for (const std::string& assignment : args.sets) {
        cfg.set_override(assignment);
    }
    cfg.ensure_known(
        {"run.objective", "run.seed", "run.batch_size", "run.total_steps", "run.warmup_steps",
         "run.peak_rate", "run.max_seq_len", "run.lambda", "run.tau", "run.beta",
         "run.regularizer", "encoder.dim", "encoder.layers", "encoder.init_sigma", "encoder.seed",
         "data.languages", "output.dir"},
        {"data.bitext.", "data.pairs."});

    const ObjectiveConfig::Mode mode = parse_mode(cfg.require("run.objective"));
    RunConfig run = preset_run_config(args.preset, mode);
    run.mode = mode;
    run.seed = static_cast<std::uint64_t>(cfg.get_long("run.seed", 13));
    run.batch_size = static_cast<int>(cfg.get_long("run.batch_size", run.batch_size));
    run.total_steps = cfg.get_long("run.total_steps", run.total_steps);
    run.warmup_steps = cfg.get_long("run.warmup_steps", run.warmup_steps);
    run.peak_rate = cfg.get_double("run.peak_rate", run.peak_rate);
    run.max_seq_len = static_cast<int>(cfg.get_long("run.max_seq_len", run.max_seq_len));
    run.lambda = cfg.get_double("run.lambda", run.lambda);
    run.tau = cfg.get_double("run.tau", run.tau);
    run.beta = cfg.get_double("run.beta", run.beta);
    run.regularizer = parse_regularizer(cfg.get_string("run.regularizer", "param"));
    run.validate();

    // data
    const std::vector<std::string> languages = cfg.get_list("data.languages", {});
    if (languages.empty()) {
        throw ConfigError("config: data.languages must list at least one language");
    }
    std::map<std::string, std::string> manifest;
    FinetuneData data;
    for (const std::string& lang : languages) {
        const std::string bitext_path = cfg.require("data.bitext." + lang);
        const std::string pairs_path = cfg.require("data.pairs." + lang);
        ParseStats stats;
        LanguageCorpus corpus;
        corpus.name = lang;
        corpus.sentences = load_bitext(bitext_path, stats);
        require_readable(pairs_path);
        std::ifstream pin(pairs_path);
        corpus.pairs = read_aligned_pairs(pin);
        if (corpus.sentences.empty() || corpus.pairs.empty()) {
            throw DataError("language '" + lang + "': empty bitext or aligned-pair file");
        }
        manifest["input.bitext." + lang + ".digest"] = digest_file(bitext_path);
        manifest["input.pairs." + lang + ".digest"] = digest_file(pairs_path);
        data.languages.push_back(std::move(corpus));
    }

    // vocabulary over every unit in the corpora, in deterministic order
    Vocab vocab;
    for (const LanguageCorpus& corpus : data.languages) {
        for (const SentencePair& sentence : corpus.sentences) {
            for (const UnitSpans& us :
                 {units_of_words(sentence.src), units_of_words(sentence.tgt)}) {
                for (const std::string& unit : us.units) {
                    vocab.add_unit(unit);
                }
            }
        }
    }

    const std::size_t dim = static_cast<std::size_t>(cfg.get_long("encoder.dim", 16));
    const std::size_t layers = static_cast<std::size_t>(cfg.get_long("encoder.layers", 2));
    const double init_sigma = cfg.get_double("encoder.init_sigma", 0.1);
    Rng enc_rng(static_cast<std::uint64_t>(cfg.get_long("encoder.seed", 7)));
    const EncoderParams encoder =
        EncoderParams::init_gaussian(vocab.size(), dim, layers, init_sigma, enc_rng);

    const fs::path out_dir = resolve_output(cfg.require("output.dir"));
    fs::create_directories(out_dir);

    if (mode == ObjectiveConfig::Mode::Linear) {
        ParamVector sections;
        for (const LanguageCorpus& corpus : data.languages) {
            for (std::size_t layer = 0; layer <= layers; ++layer) {
                const StaticFeatures f =
                    collect_static_features(encoder, vocab, corpus, layer, run.max_seq_len);
                LinearMapResult r = train_linear_mapping(f.s, f.t, run);
                char name[64];
                std::snprintf(name, sizeof(name), "mapping.%s.layer%02zu", corpus.name.c_str(),
                              layer);
                sections.add(name, r.w);
                std::ofstream log(out_dir / (std::string("loss_log_") + corpus.name + "_layer" +
                                             std::to_string(layer) + ".tsv"),
                                  std::ios::trunc);
                write_loss_log(log, r.log);
            }
        }
        save_checkpoint((out_dir / "checkpoint.bin").string(), sections);
    } else {
        FinetuneResult r = train_finetune(encoder, vocab, data, run);
        ParamVector sections = r.params.to_params();
        if (r.has_head) {
            for (const auto& [name, m] : r.head.to_params()) {
                sections.add(name, m);
            }
        }
        save_checkpoint((out_dir / "checkpoint.bin").string(), sections);
        std::ofstream log(out_dir / "loss_log.tsv", std::ios::trunc);
        write_loss_log(log, r.log);
        if (r.plan_info.single_language && data.languages.size() > 1) {
            std::cerr << "warning: batches drew from a single language\n";
        }
    }
    vocab.save((out_dir / "vocab.txt").string());

    manifest["subcommand"] = "train";
    manifest["config.file"] = args.config;
    manifest["config.file.digest"] = digest_file(args.config);
    manifest["preset"] = args.preset;
    manifest["run.objective"] = cfg.require("run.objective");
    manifest["run.seed"] = std::to_string(run.seed);
    manifest["run.batch_size"] = std::to_string(run.batch_size);
    manifest["run.total_steps"] = std::to_string(run.total_steps);
    manifest["run.warmup_steps"] = std::to_string(run.warmup_steps);
    manifest["run.peak_rate"] = format_double(run.peak_rate);
    manifest["run.max_seq_len"] = std::to_string(run.max_seq_len);
    manifest["run.lambda"] = format_double(run.lambda);
    manifest["run.tau"] = format_double(run.tau);
    manifest["run.beta"] = format_double(run.beta);
    manifest["run.regularizer"] = cfg.get_string("run.regularizer", "param");
    manifest["encoder.dim"] = std::to_string(dim);
    manifest["encoder.layers"] = std::to_string(layers);
    manifest["output.dir"] = out_dir.string();
    write_manifest(out_dir / "manifest.txt", manifest);

    std::cout << "wrote " << (out_dir / "checkpoint.bin").string() << '\n';
    return 0;
}

// --------------------------- eval ---------------------------

struct EvalArgs {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
};

int cmd_eval(const EvalArgs& args) {
    KvConfig cfg;
    if (!args.config.empty()) {
        require_readable(args.config);
        cfg = KvConfig::parse_file(args.config);
    }
    for (const std::string& assignment : args.sets) {
        cfg.set_override(assignment);
    }
    cfg.ensure_known({"eval.seeds", "eval.objectives", "eval.parallel", "synthetic.vocab_size",
                      "synthetic.dim", "synthetic.noise_sigma", "synthetic.sentences",
                      "synthetic.sentence_len", "synthetic.heldout", "synthetic.target_languages",
                      "train.batch_size", "train.total_steps", "train.warmup_steps",
                      "train.peak_rate", "train.lambda", "train.tau", "train.beta",
                      "train.max_seq_len", "linear.batch_size", "linear.total_steps",
                      "linear.peak_rate", "pipeline.em_iterations", "pipeline.workers",
                      "output.dir"});

    EvalConfig ec = EvalConfig::desk();
    ec.seeds = cfg.get_u64_list("eval.seeds", ec.seeds);
    ec.objectives = cfg.get_list("eval.objectives", ec.objectives);
    ec.parallel_seeds = cfg.get_bool("eval.parallel", true);
    ec.synthetic.vocab_size = static_cast<int>(cfg.get_long("synthetic.vocab_size", ec.synthetic.vocab_size));
    ec.synthetic.dim = static_cast<std::size_t>(cfg.get_long("synthetic.dim", static_cast<long>(ec.synthetic.dim)));
    ec.synthetic.noise_sigma = cfg.get_double("synthetic.noise_sigma", ec.synthetic.noise_sigma);
    ec.synthetic.sentences = static_cast<int>(cfg.get_long("synthetic.sentences", ec.synthetic.sentences));
    ec.synthetic.sentence_len = static_cast<int>(cfg.get_long("synthetic.sentence_len", ec.synthetic.sentence_len));
    ec.synthetic.heldout = static_cast<int>(cfg.get_long("synthetic.heldout", ec.synthetic.heldout));
    ec.synthetic.target_languages =
        static_cast<int>(cfg.get_long("synthetic.target_languages", ec.synthetic.target_languages));
    ec.finetune.batch_size = static_cast<int>(cfg.get_long("train.batch_size", ec.finetune.batch_size));
    ec.finetune.total_steps = cfg.get_long("train.total_steps", ec.finetune.total_steps);
    ec.finetune.warmup_steps = cfg.get_long("train.warmup_steps", ec.finetune.warmup_steps);
    ec.finetune.peak_rate = cfg.get_double("train.peak_rate", ec.finetune.peak_rate);
    ec.finetune.lambda = cfg.get_double("train.lambda", ec.finetune.lambda);
    ec.finetune.tau = cfg.get_double("train.tau", ec.finetune.tau);
    ec.finetune.beta = cfg.get_double("train.beta", ec.finetune.beta);
    ec.finetune.max_seq_len = static_cast<int>(cfg.get_long("train.max_seq_len", ec.finetune.max_seq_len));
    ec.linear.batch_size = static_cast<int>(cfg.get_long("linear.batch_size", ec.linear.batch_size));
    ec.linear.total_steps = cfg.get_long("linear.total_steps", ec.linear.total_steps);
    ec.linear.peak_rate = cfg.get_double("linear.peak_rate", ec.linear.peak_rate);
    ec.pipeline.em_iterations = static_cast<int>(cfg.get_long("pipeline.em_iterations", ec.pipeline.em_iterations));
    ec.pipeline.workers = static_cast<int>(cfg.get_long("pipeline.workers", ec.pipeline.workers));

    const std::string out_key = args.out.empty() ? cfg.get_string("output.dir", "eval-out") : args.out;
    const fs::path out_dir = resolve_output(out_key);
    fs::create_directories(out_dir);

    const std::vector<RunResult> results = multi_seed_run(ec);
    long failures = 0;
    for (const RunResult& r : results) {
        if (!r.ok) {
            ++failures;
            std::cerr << "warning: run failed (" << r.task << ", " << r.objective << ", seed "
                      << r.seed << "): " << r.error << '\n';
        }
    }

    {
        std::ofstream out(out_dir / "results.tsv", std::ios::trunc);
        write_results(out, results);
    }
    const std::vector<SummaryStats> summaries = summarize(results);
    {
        std::ofstream out(out_dir / "report.tsv", std::ios::trunc);
        out << emit_report(summaries, ReportFormat::Tsv);
    }
    {
        std::ofstream out(out_dir / "report.md", std::ios::trunc);
        out << emit_report(summaries, ReportFormat::Markdown);
    }

    std::map<std::string, std::string> manifest;
    manifest["subcommand"] = "eval";
    if (!args.config.empty()) {
        manifest["config.file"] = args.config;
        manifest["config.file.digest"] = digest_file(args.config);
    }
    for (const auto& [key, value] : cfg.entries()) {
        manifest["config." + key] = value;
    }
    manifest["seeds.count"] = std::to_string(ec.seeds.size());
    manifest["results.failed"] = std::to_string(failures);
    manifest["output.dir"] = out_dir.string();
    write_manifest(out_dir / "manifest.txt", manifest);

    std::cout << emit_report(summaries, ReportFormat::Markdown);
    std::cout << "wrote " << (out_dir / "results.tsv").string() << '\n';
    return 0;
}

// --------------------------- report ---------------------------

struct ReportArgs {
    std::vector<std::string> results;
    std::string out;
    std::string format = "md";
};

int cmd_report(const ReportArgs& args) {
    std::vector<RunResult> all;
    for (const std::string& path : args.results) {
        require_readable(path);
        std::ifstream in(path);
        for (RunResult& r : read_results(in)) {
            all.push_back(std::move(r));
        }
    }
    if (all.empty()) {
        throw DataError("no results found in the given files");
    }
    long failures = 0;
    for (const RunResult& r : all) {
        if (!r.ok) {
            ++failures;
        }
    }
    if (failures > 0) {
        std::cerr << "warning: " << failures << " failed runs excluded from the summary\n";
    }
    const std::vector<SummaryStats> summaries = summarize(all);

    if (!args.out.empty()) {
        const fs::path out_dir = resolve_output(args.out);
        fs::create_directories(out_dir);
        std::ofstream tsv(out_dir / "report.tsv", std::ios::trunc);
        tsv << emit_report(summaries, ReportFormat::Tsv);
        std::ofstream md(out_dir / "report.md", std::ios::trunc);
        md << emit_report(summaries, ReportFormat::Markdown);
        std::cout << "wrote " << (out_dir / "report.tsv").string() << " and report.md\n";
        return 0;
    }
    if (args.format == "tsv") {
        std::cout << emit_report(summaries, ReportFormat::Tsv);
    } else if (args.format == "md") {
        std::cout << emit_report(summaries, ReportFormat::Markdown);
    } else {
        throw ConfigError("unknown format '" + args.format + "' (valid: tsv, md)");
    }
    return 0;
}

// --------------------------- selftest ---------------------------

int cmd_selftest(const std::string& break_op) {
    const std::vector<CheckResult> checks = run_selfchecks(break_op);
    bool all_passed = true;
    std::string failing;
    for (const CheckResult& c : checks) {
        std::cout << (c.passed ? "PASS" : "FAIL") << ' ' << c.name << " (" << c.detail << ")\n";
        if (!c.passed) {
            all_passed = false;
            failing += failing.empty() ? c.name : ", " + c.name;
        }
    }
    if (!all_passed) {
        std::cout << "selftest FAILED: " << failing << '\n';
        return 1;
    }
    std::cout << "selftest passed (" << checks.size() << " checks)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-lingual alignment laboratory"};
    app.require_subcommand(1);

    PipelineArgs pipeline_args;
    CLI::App* pipeline = app.add_subcommand(
        "pipeline", "Bitext -> word alignments -> symmetrize -> filter -> aligned pairs");
    pipeline->add_option("--bitext", pipeline_args.bitext, "UTF-8 'src ||| tgt' file")->required();
    pipeline->add_option("--out", pipeline_args.out, "Output aligned-pair TSV")->required();
    pipeline->add_option("--from-pharaoh", pipeline_args.pharaoh,
                         "Forward and backward .align files (skips the built-in aligner)")
        ->expected(2);
    pipeline->add_option("--em-iterations", pipeline_args.em_iterations, "EM iterations (default 5)");
    pipeline->add_option("--workers", pipeline_args.workers, "Worker threads for per-sentence stages");

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "Train an alignment objective from a config file");
    train->add_option("--config", train_args.config, "key=value config file")->required();
    train->add_option("--set", train_args.sets, "Override, e.g. --set run.lambda=0");
    train->add_option("--preset", train_args.preset, "desk or paper (default desk)");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "Multi-seed synthetic evaluation harness");
    eval->add_option("--config", eval_args.config, "key=value config file (optional)");
    eval->add_option("--set", eval_args.sets, "Override, e.g. --set eval.seeds=1,2,3");
    eval->add_option("--out", eval_args.out, "Output directory (default eval-out)");

    ReportArgs report_args;
    CLI::App* report = app.add_subcommand("report", "Aggregate results records into mean±std tables");
    report->add_option("--results", report_args.results, "results.tsv files")->required();
    report->add_option("--out", report_args.out, "Directory for report.tsv/report.md");
    report->add_option("--format", report_args.format, "stdout format: md or tsv (default md)");

    std::string break_op;
    CLI::App* selftest = app.add_subcommand("selftest", "Run built-in verification checks");
    selftest->add_option("--break", break_op, "Intentionally corrupt a named op's gradient (testing hook)")
        ->group(""); // hidden

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(pipeline)) {
            return cmd_pipeline(pipeline_args);
        }
        if (app.got_subcommand(train)) {
            return cmd_train(train_args);
        }
        if (app.got_subcommand(eval)) {
            return cmd_eval(eval_args);
        }
        if (app.got_subcommand(report)) {
            return cmd_report(report_args);
        }
        if (app.got_subcommand(selftest)) {
            return cmd_selftest(break_op);
        }
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
