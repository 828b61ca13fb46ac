#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "madegan/checkpoint.hpp"
#include "madegan/classifier.hpp"
#include "madegan/config.hpp"
#include "madegan/fir.hpp"
#include "madegan/qrs.hpp"
#include "madegan/synth.hpp"
#include "madegan/train.hpp"
#include "madegan/wfdb.hpp"

namespace fs = std::filesystem;
using namespace madegan;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_given = false;
};

RunConfig resolve_config(const GlobalOpts& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = load_run_config(g.config_path);
    if (g.seed_given) cfg.seed = g.seed;
    return cfg;
}

void emit_sidecar(const GlobalOpts& g, const RunConfig& cfg, const std::string& command) {
    fs::create_directories(g.out_dir);
    std::ofstream os(fs::path(g.out_dir) / (command + ".config.resolved"));
    if (!os) throw ConfigError("cannot write resolved config sidecar");
    os << "# resolved configuration for '" << command << "'\n";
    write_run_config(os, cfg);
}

std::map<BeatClass, double> parse_mix(const std::string& text) {
    std::map<BeatClass, double> mix;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto colon = part.find(':');
        if (colon == std::string::npos || colon != 1)
            throw ConfigError("mix: expected <class>:<prob> entries, got '" + part + "'");
        BeatClass cls;
        if (!map_annotation_symbol(part[0], cls))
            throw ConfigError("mix: unknown class symbol '" + part.substr(0, 1) + "'");
        mix[cls] = std::stod(part.substr(colon + 1));
    }
    return mix;
}

void print_class_table(const std::vector<BeatRecord>& beats, std::ostream& os) {
    auto counts = class_counts(beats);
    os << "class counts:\n";
    const char* names[4] = {"N", "S", "V", "F"};
    for (std::size_t c = 0; c < 4; ++c) os << "  " << names[c] << "  " << counts[c] << "\n";
    os << "  total  " << beats.size() << "\n";
}

void write_scores_csv(const std::string& path, const std::vector<BeatRecord>& beats,
                      const std::vector<double>& raw, const std::vector<double>& scaled) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot write " + path);
    os << "index,label,score_raw,score_scaled\n" << std::setprecision(10);
    for (std::size_t i = 0; i < beats.size(); ++i)
        os << i << "," << beat_class_symbol(beats[i].label) << "," << raw[i] << "," << scaled[i]
           << "\n";
}

Level1Model load_level1(const std::string& ckpt_path, const RunConfig& cfg) {
    ParamSet saved = load_checkpoint(ckpt_path);
    std::mt19937_64 rng(0);
    Level1Model model;
    model.generator = std::make_unique<GeneratorNet>(cfg.to_train_config().arch, rng);
    model.discriminator = std::make_unique<DiscriminatorNet>(cfg.to_train_config().arch, rng);
    for (auto* ps : {&model.generator->params(), &model.discriminator->params()})
        for (auto& name : ps->names()) {
            if (!saved.has(name))
                throw TensorError("checkpoint missing parameter '" + name +
                                  "' (architecture mismatch?)");
            const Tensor& src = saved.at(name);
            Tensor& dst = ps->at(name);
            if (src.shape() != dst.shape())
                throw TensorError("checkpoint shape mismatch for '" + name + "'");
            std::copy(src.data(), src.data() + src.numel(), dst.data());
        }
    return model;
}

int cmd_synth(const GlobalOpts& g, std::size_t n_beats, const std::string& mix_text,
              double recording_s) {
    RunConfig cfg = resolve_config(g);
    emit_sidecar(g, cfg, "synth");
    auto mix = parse_mix(mix_text);
    std::mt19937_64 rng(cfg.seed);
    if (n_beats > 0) {
        auto beats = render_beats(n_beats, mix, rng);
        write_csv_beats_file((fs::path(g.out_dir) / "beats.csv").string(), beats);
        print_class_table(beats, std::cout);
        std::cout << "wrote " << beats.size() << " beats to " << g.out_dir << "/beats.csv\n";
    }
    if (recording_s > 0.0) {
        auto synth = render_recording(72.0, recording_s, mix, rng, {}, cfg.sample_rate);
        // store at the conventional 200 units/mV so the 12-bit samples keep
        // the waveform instead of truncating millivolt values to ~1 unit
        for (auto& ch : synth.recording.channels)
            for (auto& v : ch) v = std::round(v * 200.0);
        auto base = fs::path(g.out_dir) / "synth";
        write_wfdb_212_files(synth.recording, base.string() + ".dat", base.string() + ".hea");
        write_annotations_text(synth.annotations, base.string() + ".ann.txt");
        std::cout << "wrote " << recording_s << " s recording with "
                  << synth.ground_truth_peaks.indices.size() << " beats to " << base.string()
                  << ".{dat,hea,ann.txt}\n";
    }
    return 0;
}

int cmd_preprocess(const GlobalOpts& g, const std::vector<std::string>& records,
                   const std::string& data_dir, bool no_exclude) {
    RunConfig cfg = resolve_config(g);
    emit_sidecar(g, cfg, "preprocess");
    std::vector<std::string> kept = records;
    if (!no_exclude) {
        const std::vector<std::string> exclusion = {"102", "104", "107", "217"};
        std::erase_if(kept, [&](const std::string& r) {
            bool drop = std::find(exclusion.begin(), exclusion.end(), r) != exclusion.end();
            if (drop) std::cout << "excluding record " << r << "\n";
            return drop;
        });
    }
    FirFilter hp = design_highpass_fir(cfg.highpass_cutoff_hz, cfg.sample_rate, cfg.highpass_taps);
    std::vector<BeatRecord> all;
    for (auto& rec_name : kept) {
        auto base = (fs::path(data_dir) / rec_name).string();
        std::vector<std::string> warnings;
        EcgRecording rec = read_wfdb_212_files(base + ".dat", base + ".hea", &warnings);
        for (auto& w : warnings) std::cout << rec_name << ": " << w << "\n";
        auto anns = read_annotations_text(base + ".ann.txt");
        std::vector<double> sig = apply_filter(hp, rec.channels.at(0));
        if (cfg.notch_enabled) {
            FirFilter notch = design_notch_fir(cfg.notch_hz, 2.0, cfg.sample_rate, 301);
            sig = apply_filter(notch, sig);
        }
        PeakList peaks = pan_tompkins(sig, rec.sample_rate);
        SegmentationResult seg = segment_beats(sig, peaks, anns, rec_name);
        std::cout << rec_name << ": " << peaks.indices.size() << " peaks, "
                  << seg.beats.size() << " beats, " << seg.dropped << " dropped ("
                  << seg.unlabeled << " unlabeled)\n";
        all.insert(all.end(), seg.beats.begin(), seg.beats.end());
    }
    write_csv_beats_file((fs::path(g.out_dir) / "beats.csv").string(), all);
    print_class_table(all, std::cout);
    return 0;
}

int cmd_train_level1(const GlobalOpts& g, const std::string& beats_path) {
    RunConfig cfg = resolve_config(g);
    emit_sidecar(g, cfg, "train-level1");
    auto all = read_csv_beats_file(beats_path);
    std::mt19937_64 split_rng(cfg.seed);
    Level1Split split = make_level1_split(all, cfg.level1_train_fraction, split_rng);
    std::cout << "level-1 training normals: " << split.train_normals.size()
              << ", test pool: " << split.test.beats.size() << "\n";
    std::ofstream log(fs::path(g.out_dir) / "level1_train.csv");
    TrainConfig tc = cfg.to_train_config();
    Level1EvalSet* eval = split.test.beats.empty() ? nullptr : &split.test;
    Level1Model model = train_level1(split.train_normals, tc, eval, &log);
    save_checkpoint((fs::path(g.out_dir) / "level1.ckpt").string(), model.checkpoint_params());
    if (!split.test.beats.empty()) {
        write_csv_beats_file((fs::path(g.out_dir) / "level1_test_pool.csv").string(),
                             split.test.beats);
        auto raw = anomaly_scores(split.test.beats, *model.generator, tc.memory_enabled);
        auto scaled = scale_scores(raw);
        write_scores_csv((fs::path(g.out_dir) / "level1_test_scores.csv").string(),
                         split.test.beats, raw, scaled);
        ScoredSet set{scaled, split.test.labels};
        std::cout << "test-pool AUROC " << auroc(set) << ", AUPRC " << auprc(set) << "\n";
    }
    std::cout << "wrote " << g.out_dir << "/level1.ckpt\n";
    return 0;
}

int cmd_train_level2(const GlobalOpts& g, const std::string& beats_path,
                     const std::string& ckpt_path) {
    RunConfig cfg = resolve_config(g);
    emit_sidecar(g, cfg, "train-level2");
    auto all = read_csv_beats_file(beats_path);
    std::vector<BeatRecord> abnormal;
    std::size_t skipped_normals = 0;
    for (auto& b : all)
        if (b.label == BeatClass::Normal) ++skipped_normals;
        else abnormal.push_back(b);
    if (skipped_normals)
        std::cout << "warning: skipped " << skipped_normals << " normal beats\n";
    ParamSet level1 = load_checkpoint(ckpt_path);
    FeatureExtractor extractor(cfg.to_train_config().arch, level1);
    std::ofstream log(fs::path(g.out_dir) / "level2_train.csv");
    SecondLevelModel model =
        train_second_level(abnormal, extractor, cfg.to_second_level_config(), &log);

    ParamSet combined;
    for (auto& name : level1.names()) combined.add(name, level1.at(name));
    merge_params(combined, "", model.head->params());
    save_checkpoint((fs::path(g.out_dir) / "level2.ckpt").string(), combined);

    std::ofstream pred(fs::path(g.out_dir) / "level2_predictions.csv");
    write_predictions_csv(pred, model.report);
    std::cout << "test accuracy " << model.report.accuracy << ", macro recall "
              << model.report.macro_recall << ", macro F1 " << model.report.macro_f1 << "\n";
    std::cout << "confusion (rows true S/V/F):\n";
    for (auto& row : model.report.confusion_matrix) {
        for (auto v : row) std::cout << "  " << v;
        std::cout << "\n";
    }
    std::cout << "wrote " << g.out_dir << "/level2.ckpt\n";
    return 0;
}

int cmd_score(const GlobalOpts& g, const std::string& beats_path, const std::string& ckpt_path) {
    RunConfig cfg = resolve_config(g);
    emit_sidecar(g, cfg, "score");
    auto beats = read_csv_beats_file(beats_path);
    Level1Model model = load_level1(ckpt_path, cfg);
    auto raw = anomaly_scores(beats, *model.generator, cfg.memory_enabled);
    auto scaled = scale_scores(raw);
    write_scores_csv((fs::path(g.out_dir) / "scores.csv").string(), beats, raw, scaled);
    std::cout << "wrote " << beats.size() << " scores to " << g.out_dir << "/scores.csv\n";
    return 0;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& beats_path, const std::string& ckpt_path,
                 std::size_t folds, bool fixed_threshold) {
    RunConfig cfg = resolve_config(g);
    emit_sidecar(g, cfg, "evaluate");
    auto beats = read_csv_beats_file(beats_path);
    Level1Model model = load_level1(ckpt_path, cfg);
    auto scaled = scale_scores(anomaly_scores(beats, *model.generator, cfg.memory_enabled));
    std::vector<int> labels;
    for (auto& b : beats) labels.push_back(b.label == BeatClass::Normal ? 0 : 1);
    ScoredSet set{scaled, labels};

    if (folds >= 2) {
        std::mt19937_64 rng(cfg.seed);
        auto splits = kfold_stratified(labels, folds, rng);
        std::vector<double> a_roc, a_prc, fsc;
        for (auto& fold : splits) {
            ScoredSet fold_set;
            for (auto i : fold.test) {
                fold_set.scores.push_back(scaled[i]);
                fold_set.labels.push_back(labels[i]);
            }
            double thr = fixed_threshold ? 0.5 : best_fscore_threshold(fold_set);
            a_roc.push_back(auroc(fold_set));
            a_prc.push_back(auprc(fold_set));
            fsc.push_back(point_metrics(fold_set, thr).f_score);
        }
        auto r = mean_std(a_roc);
        auto p = mean_std(a_prc);
        auto f = mean_std(fsc);
        std::cout << folds << "-fold AUROC " << r.mean << " +- " << r.std << "\n"
                  << folds << "-fold AUPRC " << p.mean << " +- " << p.std << "\n"
                  << folds << "-fold f-score " << f.mean << " +- " << f.std << "\n";
        return 0;
    }

    double thr = fixed_threshold ? 0.5 : best_fscore_threshold(set);
    EvalReport report = evaluate_scored(set, thr);
    std::ofstream js(fs::path(g.out_dir) / "report.json");
    write_report_json(js, report);
    auto dump_curve = [&](const std::vector<CurvePoint>& c, const std::string& name,
                          const std::string& xl, const std::string& yl, bool log_axes) {
        std::ofstream cs(fs::path(g.out_dir) / (name + ".csv"));
        write_curve_csv(cs, c, xl, yl);
        std::ofstream sv(fs::path(g.out_dir) / (name + ".svg"));
        write_curve_svg(sv, c, name, log_axes);
    };
    dump_curve(report.roc, "roc", "fpr", "tpr", false);
    dump_curve(report.pr, "pr", "recall", "precision", false);
    dump_curve(report.det, "det", "fpr", "fnr", true);
    std::cout << "AUROC " << report.auroc << ", AUPRC " << report.auprc << ", f-score "
              << report.point.f_score << " at threshold " << thr << "\n";
    std::cout << "wrote report.json and roc/pr/det curves to " << g.out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-level ECG pipeline: memory-augmented adversarial anomaly "
                 "detection and multi-branch arrhythmia classification"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "key=value configuration file");
    app.add_option("--out-dir", g.out_dir, "output directory");
    auto* seed_opt = app.add_option("--seed", g.seed, "random seed override");

    std::size_t n_beats = 0;
    std::string mix_text = "N:0.9,S:0.04,V:0.05,F:0.01";
    double recording_s = 0.0;
    auto* synth = app.add_subcommand("synth", "generate synthetic beats and recordings");
    synth->add_option("--beats", n_beats, "number of independent beats");
    synth->add_option("--mix", mix_text, "class mix, e.g. N:0.9,V:0.05,S:0.04,F:0.01");
    synth->add_option("--recording", recording_s, "also write a recording of this many seconds");

    std::vector<std::string> records;
    std::string data_dir = ".";
    bool no_exclude = false;
    auto* pre = app.add_subcommand("preprocess", "ingest, filter, detect and segment beats");
    pre->add_option("--records", records, "record names (expects <name>.dat/.hea/.ann.txt)")
        ->required();
    pre->add_option("--data-dir", data_dir, "directory holding the records");
    pre->add_flag("--no-exclude", no_exclude, "keep records on the default exclusion list");

    std::string beats_path, ckpt_path;
    auto* t1 = app.add_subcommand("train-level1", "train the anomaly detector on normal beats");
    t1->add_option("--beats", beats_path, "beat CSV")->required();

    auto* t2 = app.add_subcommand("train-level2", "train the arrhythmia classifier head");
    t2->add_option("--beats", beats_path, "abnormal beat CSV")->required();
    t2->add_option("--checkpoint", ckpt_path, "level-1 checkpoint")->required();

    auto* sc = app.add_subcommand("score", "per-beat anomaly scores");
    sc->add_option("--beats", beats_path, "beat CSV")->required();
    sc->add_option("--checkpoint", ckpt_path, "level-1 checkpoint")->required();

    std::size_t folds = 0;
    bool fixed_threshold = false;
    auto* ev = app.add_subcommand("evaluate", "full evaluation report");
    ev->add_option("--beats", beats_path, "beat CSV")->required();
    ev->add_option("--checkpoint", ckpt_path, "level-1 checkpoint")->required();
    ev->add_option("--folds", folds, "k-fold mode: report mean +- std per metric");
    ev->add_flag("--fixed-threshold", fixed_threshold, "use threshold 0.5 instead of best f-score");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    g.seed_given = seed_opt->count() > 0;

    try {
        if (synth->parsed()) return cmd_synth(g, n_beats, mix_text, recording_s);
        if (pre->parsed()) return cmd_preprocess(g, records, data_dir, no_exclude);
        if (t1->parsed()) return cmd_train_level1(g, beats_path);
        if (t2->parsed()) return cmd_train_level2(g, beats_path, ckpt_path);
        if (sc->parsed()) return cmd_score(g, beats_path, ckpt_path);
        if (ev->parsed()) return cmd_evaluate(g, beats_path, ckpt_path, folds, fixed_threshold);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
