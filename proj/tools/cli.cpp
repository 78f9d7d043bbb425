#include "cli.hpp"

#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "glap/error.hpp"
#include "glap/io.hpp"
#include "glap/model.hpp"
#include "glap/prototype.hpp"
#include "glap/synth.hpp"
#include "glap/transfer.hpp"

namespace glap::cli {

namespace {

const std::map<std::string, Strategy> kStrategies{{"baseline", Strategy::Baseline},
                                                  {"glap1", Strategy::Glap1},
                                                  {"glap2", Strategy::Glap2},
                                                  {"glap3", Strategy::Glap3}};
const std::map<std::string, Metric> kMetrics{{"euclidean", Metric::Euclidean}, {"cosine", Metric::Cosine}};
const std::map<std::string, RegularizerKind> kRegularizers{{"l2", RegularizerKind::L2}, {"l1", RegularizerKind::L1}};
const std::map<std::string, Mixing> kMixing{{"convex", Mixing::ConvexCombination},
                                            {"gaussian", Mixing::GaussianPrototypes}};

// Source data flags shared by `train` and `generate`.
struct SourceArgs {
    std::string features;
    std::string labels;
    std::string seen_sem;
    std::string per_image_sem;
    std::string unseen_sem;
    bool normalize_features = false;
    bool normalize_semantics = false;

    void add(CLI::App* cmd) {
        cmd->add_option("--features", features, "source features CSV, one instance per row")->required();
        cmd->add_option("--labels", labels, "source labels, one class id per line")->required();
        auto* seen = cmd->add_option("--seen-sem", seen_sem, "seen semantic table CSV (class_id, values...)");
        auto* per_image =
            cmd->add_option("--per-image-sem", per_image_sem, "per-image semantics CSV, averaged per class");
        seen->excludes(per_image);
        cmd->add_option("--unseen-sem", unseen_sem, "unseen semantic table CSV");
        cmd->add_flag("--normalize-features", normalize_features, "scale each instance to unit l2 norm");
        cmd->add_flag("--normalize-semantics", normalize_semantics, "scale each semantic vector to unit l2 norm");
    }

    ZslSplit load(const char* unseen_missing_message) const {
        if (seen_sem.empty() && per_image_sem.empty()) {
            throw InputError("one of --seen-sem or --per-image-sem is required");
        }
        if (unseen_sem.empty()) throw InputError(unseen_missing_message);
        ZslSplit split;
        split.source.features = io::read_features(features);
        if (normalize_features) split.source.features = normalize_columns(split.source.features);
        split.source.labels = io::read_labels(labels);
        if (!seen_sem.empty()) {
            split.seen = io::read_semantic_table(seen_sem);
        } else {
            split.seen = aggregate_per_image_semantics(split.source.features, split.source.labels,
                                                       io::read_matrix_rows(per_image_sem));
        }
        split.unseen = io::read_semantic_table(unseen_sem);
        if (normalize_semantics) {
            split.seen = split.seen.normalized();
            split.unseen = split.unseen.normalized();
        }
        const ValidationReport report = validate_split(split);
        if (!report.ok()) throw InputError("invalid input: " + report.summary());
        return split;
    }
};

struct StrategyArgs {
    Strategy strategy = Strategy::Glap2;
    std::optional<double> lambda;
    int npc = 50;
    std::optional<double> sigma2;
    RegularizerKind reg = RegularizerKind::L2;
    double reg_weight = RegularizerSpec{}.weight;
    std::optional<double> ridge_eps;
    std::uint64_t seed = 0;
    Metric metric = Metric::Euclidean;
    LassoOptions lasso;

    void add_sampling(CLI::App* cmd, bool with_seed = true) {
        cmd->add_option("--npc", npc, "virtual instances per unseen class")->check(CLI::PositiveNumber);
        cmd->add_option("--sigma2", sigma2, "virtual instance variance (default: 0.1 x within-class variance)")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--reg", reg, "reconstruction regularizer")
            ->transform(CLI::CheckedTransformer(kRegularizers, CLI::ignore_case));
        cmd->add_option("--reg-weight", reg_weight, "reconstruction regularizer weight")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--lasso-max-iter", lasso.max_iter, "coordinate descent sweeps")->check(CLI::PositiveNumber);
        cmd->add_option("--lasso-tol", lasso.tol, "coordinate descent KKT tolerance")->check(CLI::PositiveNumber);
        if (with_seed) cmd->add_option("--seed", seed, "sampling seed");
    }

    void add_fit(CLI::App* cmd) {
        cmd->add_option("--strategy", strategy, "baseline, glap1, glap2 or glap3")
            ->transform(CLI::CheckedTransformer(kStrategies, CLI::ignore_case));
        cmd->add_option("--lambda", lambda, "source/virtual trade-off")->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--ridge-eps", ridge_eps, "gram ridge (default: 1e-6 x trace / d)")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--metric", metric, "euclidean or cosine")
            ->transform(CLI::CheckedTransformer(kMetrics, CLI::ignore_case));
    }

    StrategyConfig config() const {
        StrategyConfig c = StrategyConfig::for_strategy(strategy);
        if (lambda) c.lambda = *lambda;
        c.npc = npc;
        c.sigma2 = sigma2;
        c.reg = {reg, reg_weight};
        c.ridge_eps = ridge_eps;
        c.seed = seed;
        c.metric = metric;
        c.lasso = lasso;
        validate_config(c);
        return c;
    }
};

struct WorldArgs {
    SyntheticConfig cfg;
    int trials = 10;
    int threads = 1;

    void add(CLI::App* cmd) {
        cmd->add_option("--latent-dim", cfg.latent_dim, "prototype dimension m")->check(CLI::PositiveNumber);
        cmd->add_option("--feature-dim", cfg.feature_dim, "feature dimension d")->check(CLI::PositiveNumber);
        cmd->add_option("--semantic-dim", cfg.semantic_dim, "semantic dimension a")->check(CLI::PositiveNumber);
        cmd->add_option("--n-seen", cfg.n_seen, "seen classes")->check(CLI::Range(2, 1 << 20));
        cmd->add_option("--n-unseen", cfg.n_unseen, "unseen classes")->check(CLI::Range(2, 1 << 20));
        cmd->add_option("--samples-per-class", cfg.samples_per_class, "instances per class")->check(CLI::PositiveNumber);
        cmd->add_option("--obs-noise", cfg.obs_noise, "feature noise standard deviation")->check(CLI::NonNegativeNumber);
        cmd->add_option("--mixing", cfg.mixing, "convex or gaussian")
            ->transform(CLI::CheckedTransformer(kMixing, CLI::ignore_case));
        cmd->add_option("--trials", trials, "independent synthetic worlds")->check(CLI::PositiveNumber);
        cmd->add_option("--threads", threads, "worker threads (output does not depend on it)")
            ->check(CLI::PositiveNumber);
    }
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
    } else {
        io::write_file(path, content);
    }
}

std::string features_csv(const Eigen::MatrixXd& m) {
    std::ostringstream os;
    io::write_columns(os, m);
    return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Zero-shot classification with generative latent prototypes", "glap"};
    app.require_subcommand(1);

    // train
    SourceArgs train_src;
    StrategyArgs train_strat;
    std::string train_out;
    auto* train_cmd = app.add_subcommand("train", "fit a model and write it as JSON");
    train_src.add(train_cmd);
    train_strat.add_sampling(train_cmd);
    train_strat.add_fit(train_cmd);
    train_cmd->add_option("--out", train_out, "model JSON path")->required();

    // predict
    std::string predict_model, predict_features, predict_out;
    auto* predict_cmd = app.add_subcommand("predict", "classify instances with a trained model");
    predict_cmd->add_option("--model", predict_model, "model JSON written by train")->required();
    predict_cmd->add_option("--features", predict_features, "test features CSV, one instance per row")->required();
    predict_cmd->add_option("--out", predict_out, "predictions CSV path ('-' for stdout)");

    // check-transfer
    std::string ct_seen, ct_unseen, ct_out;
    double ct_tol = kDefaultTransferTolerance;
    auto* ct_cmd = app.add_subcommand("check-transfer", "test unseen semantics against the seen column space");
    ct_cmd->add_option("--seen-sem", ct_seen)->required();
    ct_cmd->add_option("--unseen-sem", ct_unseen)->required();
    ct_cmd->add_option("--tolerance", ct_tol, "relative residual threshold")->check(CLI::PositiveNumber);
    ct_cmd->add_option("--out", ct_out, "report JSON path ('-' for stdout)");

    // generate
    SourceArgs gen_src;
    StrategyArgs gen_strat;
    std::string gen_out, gen_labels_out, gen_sem_out;
    auto* gen_cmd = app.add_subcommand("generate", "sample virtual unseen-class instances");
    gen_src.add(gen_cmd);
    gen_strat.add_sampling(gen_cmd);
    gen_cmd->add_option("--out", gen_out, "virtual features CSV, one instance per row")->required();
    gen_cmd->add_option("--labels-out", gen_labels_out, "virtual labels, one per line");
    gen_cmd->add_option("--semantics-out", gen_sem_out, "virtual semantic vectors, one per row");

    // synth-bench
    WorldArgs bench_world;
    StrategyArgs bench_strat;
    std::uint64_t bench_seed = 7;
    std::vector<std::string> bench_strategies{"baseline", "glap1", "glap2", "glap3"};
    std::string bench_out;
    auto* bench_cmd = app.add_subcommand("synth-bench", "compare strategies on synthetic worlds");
    bench_world.add(bench_cmd);
    bench_strat.add_sampling(bench_cmd, false);
    bench_cmd->add_option("--seed", bench_seed, "master seed")->default_val(7);
    bench_cmd->add_option("--strategies", bench_strategies, "strategies to compare")
        ->delimiter(',')
        ->check(CLI::IsMember({"baseline", "glap1", "glap2", "glap3"}));
    bench_cmd->add_option("--lambda", bench_strat.lambda, "glap2 trade-off")->check(CLI::Range(0.0, 1.0));
    bench_cmd->add_option("--ridge-eps", bench_strat.ridge_eps)->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--metric", bench_strat.metric)
        ->transform(CLI::CheckedTransformer(kMetrics, CLI::ignore_case));
    bench_cmd->add_option("--out", bench_out, "report JSON path ('-' for stdout)");

    // npc-sweep
    WorldArgs sweep_world;
    StrategyArgs sweep_strat;
    std::uint64_t sweep_seed = 7;
    std::vector<int> sweep_npcs = kDefaultNpcValues;
    std::string sweep_out, sweep_report;
    auto* sweep_cmd = app.add_subcommand("npc-sweep", "accuracy against virtual instances per class");
    sweep_world.add(sweep_cmd);
    sweep_strat.add_sampling(sweep_cmd, false);
    sweep_cmd->add_option("--seed", sweep_seed, "master seed")->default_val(7);
    sweep_cmd->add_option("--npc-values", sweep_npcs, "ascending npc values")->delimiter(',');
    sweep_cmd->add_option("--lambda", sweep_strat.lambda, "glap2 trade-off")->check(CLI::Range(0.0, 1.0));
    sweep_cmd->add_option("--ridge-eps", sweep_strat.ridge_eps)->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--metric", sweep_strat.metric)
        ->transform(CLI::CheckedTransformer(kMetrics, CLI::ignore_case));
    sweep_cmd->add_option("--out", sweep_out, "series CSV path ('-' for stdout)");
    sweep_cmd->add_option("--report-out", sweep_report, "full per-npc JSON report");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
        err << "glap: " << e.what() << "\n";
        if (e.get_exit_code() == 0) {
            out << (sub ? sub->help() : app.help());
            return kExitOk;
        }
        return kExitInput;
    }

    try {
        if (train_cmd->parsed()) {
            const StrategyConfig config = train_strat.config();
            const ZslSplit split = train_src.load(config.strategy == Strategy::Baseline
                                                      ? "unseen semantics required for prediction"
                                                      : "unseen semantics required for virtual generation");
            GlapModel model = train(split, config);
            model.normalize_features = train_src.normalize_features;
            io::write_file(train_out, io::dump(io::to_json(model)));
        } else if (predict_cmd->parsed()) {
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(io::read_file(predict_model));
            } catch (const nlohmann::json::parse_error& e) {
                throw InputError(predict_model + ": " + e.what());
            }
            const GlapModel model = io::model_from_json(j);
            const FeatureMatrix X = io::read_features(predict_features);
            if (X.rows() != model.map.feature_dim()) {
                throw InputError(predict_features + ": feature dimension mismatch: expected d=" +
                                 std::to_string(model.map.feature_dim()) + ", got d=" + std::to_string(X.rows()));
            }
            std::ostringstream os;
            io::write_predictions(os, predict(model, X));
            emit(predict_out, os.str(), out);
        } else if (ct_cmd->parsed()) {
            const auto report = check_transferability(io::read_semantic_table(ct_seen),
                                                      io::read_semantic_table(ct_unseen), ct_tol);
            emit(ct_out, io::dump(io::to_json(report)), out);
        } else if (gen_cmd->parsed()) {
            const StrategyConfig config = gen_strat.config();
            const ZslSplit split = gen_src.load("unseen semantics required for virtual generation");
            const auto weights = reconstruct_weights(split.seen, split.unseen, config.reg, config.lasso);
            const auto means = compute_class_means(split.source.features, split.source.labels, split.seen);
            const double sigma2 =
                config.sigma2 ? *config.sigma2 : default_sigma2(split.source.features, split.source.labels, means);
            const auto virt = generate_virtual(means, weights, split.unseen, config.npc, sigma2, config.seed);
            io::write_file(gen_out, features_csv(virt.features));
            if (!gen_labels_out.empty()) {
                std::ostringstream os;
                io::write_labels(os, virt.labels);
                io::write_file(gen_labels_out, os.str());
            }
            if (!gen_sem_out.empty()) io::write_file(gen_sem_out, features_csv(virt.semantics));
        } else if (bench_cmd->parsed()) {
            validate_config(bench_world.cfg);
            std::vector<StrategyConfig> configs;
            for (const auto& name : bench_strategies) {
                StrategyArgs a = bench_strat;
                a.strategy = parse_strategy(name);
                if (a.strategy != Strategy::Glap2) a.lambda.reset();
                a.seed = bench_seed;
                configs.push_back(a.config());
            }
            const auto report =
                evaluate_trials(bench_world.cfg, configs, bench_seed, bench_world.trials, bench_world.threads);
            emit(bench_out, io::dump(io::to_json(report)), out);
        } else if (sweep_cmd->parsed()) {
            validate_config(sweep_world.cfg);
            StrategyArgs a = sweep_strat;
            a.strategy = Strategy::Glap2;
            a.seed = sweep_seed;
            const auto sweep =
                npc_sweep(sweep_world.cfg, a.config(), sweep_npcs, sweep_seed, sweep_world.trials, sweep_world.threads);
            std::ostringstream os;
            io::write_npc_series(os, sweep);
            emit(sweep_out, os.str(), out);
            if (!sweep_report.empty()) {
                nlohmann::json j = nlohmann::json::array();
                for (const auto& p : sweep) j.push_back({{"npc", p.npc}, {"report", io::to_json(p.report)}});
                io::write_file(sweep_report, io::dump(j));
            }
        }
    } catch (const InputError& e) {
        err << "glap: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericalError& e) {
        err << "glap: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace glap::cli
