// Command-line front end: reproducible benchmark grids, statistical
// comparisons, synthetic dataset generation, cross-validated training, and
// hyperparameter search. Every command writes a manifest.json with its full
// typed parameter set; --config replays a manifest (explicit command-line
// flags still win over config values).
//
// Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hawknet/hawknet.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hawknet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Field-by-field config merge: a manifest value applies only when the flag
// was not given on the command line.
class ConfigMerger {
  public:
    ConfigMerger(CLI::App* cmd, const std::string& config_path) : cmd_(cmd) {
        if (config_path.empty()) return;
        const json j = json::parse(io::read_file(config_path));
        params_ = j.contains("params") ? j.at("params") : j;
    }

    template <class T>
    void field(const std::string& key, T& value) {
        if (params_.is_null() || !params_.contains(key)) return;
        const CLI::Option* opt = cmd_->get_option_no_throw("--" + key);
        if (opt && opt->count() > 0) return;
        value = params_.at(key).get<T>();
    }

  private:
    CLI::App* cmd_;
    json params_;
};

void write_manifest(const fs::path& out_dir, const std::string& command, const json& params) {
    io::write_file_atomic(out_dir / "manifest.json",
                          json{{"command", command}, {"params", params}}.dump(2) + "\n");
}

template <class F>
void parallel_runs(int jobs, int n, F&& body) {
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::future<void>> futures;
    std::atomic<int> next{0};
    for (int w = 0; w < jobs; ++w)
        futures.push_back(std::async(std::launch::async, [&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        }));
    for (auto& f : futures) f.get();
}

pipeline::LabeledDataset load_dataset(const fs::path& dir) {
    return pipeline::make_labeled_dataset(pipeline::load_records(dir));
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string functions = "all";
    std::string algorithms = "hho_plus,hho";
    std::string seeds = "0,1,2,3,4";
    int dims = 30;
    int pop = 30;
    int iters = 500;
    int jobs = 1;
    bool svg = false;
    std::string catalog;  // optional catalog JSON export path
    std::string out = "bench_out";

    json manifest() const {
        return {{"functions", functions}, {"algorithms", algorithms}, {"seeds", seeds},
                {"dims", dims},           {"pop", pop},               {"iters", iters},
                {"jobs", jobs},           {"svg", svg},               {"catalog", catalog},
                {"out", out}};
    }
};

int run_bench(const BenchArgs& args) {
    const fs::path out_dir(args.out);

    if (!args.catalog.empty()) {
        json cat = json::array();
        for (const auto& f : bench::suite_catalog(args.dims))
            cat.push_back({{"id", f.id},
                           {"dim", f.dim},
                           {"lower", f.lower},
                           {"upper", f.upper},
                           {"known_optimum",
                            f.known_optimum ? json(*f.known_optimum) : json(nullptr)},
                           {"modality", bench::to_string(f.modality)}});
        io::write_file_atomic(args.catalog, cat.dump(2) + "\n");
    }

    const auto suite = bench::suite_catalog(args.dims);
    std::vector<std::string> fn_ids;
    if (args.functions == "all")
        for (const auto& f : suite) fn_ids.push_back(f.id);
    else
        fn_ids = split_list(args.functions);
    const auto algorithms = split_list(args.algorithms);
    std::vector<std::uint64_t> seeds;
    for (const auto& s : split_list(args.seeds)) seeds.push_back(std::stoull(s));
    if (fn_ids.empty() || algorithms.empty() || seeds.empty())
        throw std::invalid_argument("bench: empty function/algorithm/seed list");

    // Validate ids up front so usage errors beat long runs.
    for (const auto& fid : fn_ids) bench::find_function(suite, fid);
    for (const auto& alg : algorithms) opt::algorithm_from_string(alg);

    struct Cell {
        std::string function, algorithm;
        std::uint64_t seed;
    };
    std::vector<Cell> grid;
    for (const auto& fid : fn_ids)
        for (const auto& alg : algorithms)
            for (auto seed : seeds) grid.push_back({fid, alg, seed});

    std::vector<opt::RunRecord> records(grid.size());
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    parallel_runs(args.jobs, static_cast<int>(grid.size()), [&](int i) {
        if (failed.load()) return;
        try {
            const auto& cell = grid[static_cast<std::size_t>(i)];
            opt::OptimizerConfig cfg;
            cfg.population_size = args.pop;
            cfg.max_iterations = args.iters;
            cfg.seed = cell.seed;
            cfg.algorithm = opt::algorithm_from_string(cell.algorithm);
            records[static_cast<std::size_t>(i)] =
                opt::run(bench::find_function(suite, cell.function), cfg);
        } catch (const std::exception& e) {
            std::scoped_lock lk(failure_mutex);
            failed = true;
            failure = e.what();
        }
    });
    if (failed) throw std::runtime_error("bench: " + failure);

    for (const auto& rec : records) {
        const std::string stem = results::run_file_stem(rec);
        io::write_file_atomic(out_dir / "traces" / (stem + ".csv"), results::run_trace_csv(rec));
        io::write_file_atomic(out_dir / "summaries" / (stem + ".json"),
                              results::run_summary_json(rec).dump(2) + "\n");
    }

    std::map<std::pair<std::string, std::string>, Vec> cells;
    for (const auto& rec : records)
        cells[{rec.objective_id, rec.algorithm}].push_back(rec.final_fitness);
    io::CsvWriter summary({"function", "dim", "algorithm", "runs", "mean", "std"});
    for (const auto& [key, values] : cells) {
        const auto s = stats::summarize(values);
        summary.row(key.first, args.dims, key.second, s.n, io::format_double(s.mean),
                    io::format_double(s.stddev));
    }
    io::write_file_atomic(out_dir / "summary.csv", summary.str());

    if (args.svg) {
        for (const auto& fid : fn_ids) {
            std::map<std::string, Vec> mean_traces;
            for (const auto& alg : algorithms) {
                Vec mean_trace;
                int count = 0;
                for (const auto& rec : records) {
                    if (rec.objective_id != fid || rec.algorithm != alg) continue;
                    if (mean_trace.empty()) mean_trace.assign(rec.best_trace.size(), 0.0);
                    for (std::size_t t = 0; t < rec.best_trace.size(); ++t)
                        mean_trace[t] += std::log10(std::max(rec.best_trace[t], 1e-300));
                    ++count;
                }
                for (double& v : mean_trace) v = std::pow(10.0, v / count);
                mean_traces[alg] = std::move(mean_trace);
            }
            io::write_file_atomic(
                out_dir / "plots" / (fid + "_d" + std::to_string(args.dims) + ".svg"),
                results::svg_convergence_plot(fid + " (dim " + std::to_string(args.dims) + ")",
                                              mean_traces));
        }
    }

    write_manifest(out_dir, "bench", args.manifest());
    std::cout << "bench: wrote " << records.size() << " runs to " << out_dir.string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
    std::vector<std::string> runs_dirs;
    std::string reference = "hho_plus";
    double alpha = 0.05;
    std::string out = "compare_out";

    json manifest() const {
        return {{"runs-dir", runs_dirs}, {"reference", reference}, {"alpha", alpha}, {"out", out}};
    }
};

int run_compare(const CompareArgs& args) {
    if (args.runs_dirs.empty()) throw std::invalid_argument("compare: --runs-dir is required");
    results::ResultGrid grid;
    for (const auto& dir : args.runs_dirs) {
        const fs::path summaries = fs::path(dir) / "summaries";
        if (!fs::exists(summaries))
            throw std::invalid_argument("compare: no summaries under " + dir);
        for (auto& [fn, by_alg] : results::collect_summaries(summaries))
            for (auto& [alg, values] : by_alg) {
                auto& dst = grid[fn][alg];
                dst.insert(dst.end(), values.begin(), values.end());
            }
    }
    const auto report = results::build_comparison(grid, args.reference, args.alpha);
    const std::string csv = results::comparison_csv(report);
    io::write_file_atomic(fs::path(args.out) / "comparison.csv", csv);
    write_manifest(args.out, "compare", args.manifest());
    std::cout << csv;
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
    int subjects = 25;
    int segments_per_subject = 72;
    double abnormal_fraction = 459.0 / 1797.0;
    std::uint64_t seed = 0;
    std::string out = "dataset";

    json manifest() const {
        return {{"subjects", subjects},
                {"segments-per-subject", segments_per_subject},
                {"abnormal-fraction", abnormal_fraction},
                {"seed", seed},
                {"out", out}};
    }
};

int run_gen_data(const GenDataArgs& args) {
    pipeline::SyntheticConfig cfg;
    cfg.n_subjects = args.subjects;
    cfg.segments_per_subject = args.segments_per_subject;
    cfg.abnormal_fraction = args.abnormal_fraction;
    cfg.seed = args.seed;
    const auto data = pipeline::generate_synthetic(cfg);

    json provenance{{"generator", "synthetic_pulsatile"},
                    {"seed", args.seed},
                    {"subjects", args.subjects},
                    {"segments_per_subject", args.segments_per_subject},
                    {"abnormal_fraction", args.abnormal_fraction},
                    {"label_recovery_rate", data.label_recovery_rate},
                    {"intended_labels", data.intended_labels}};
    pipeline::save_records(data.records, args.out, provenance);
    write_manifest(args.out, "gen-data", args.manifest());
    std::cout << "gen-data: " << data.records.size() << " subjects, label recovery "
              << data.label_recovery_rate << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    std::string head = "fenn";
    std::string network;  // optional NetworkSpec JSON path
    int k = 5;
    bool subject_integrity = false;
    double ilr = 1e-3;
    double lrdf = 0.5;
    double dp = 0.2;
    int drop_period = 100;
    int batch_size = 0;
    int train_iters = 1000;
    std::uint64_t seed = 0;
    std::string save_model;
    std::string out = "train_out";

    json manifest() const {
        return {{"data", data},
                {"head", head},
                {"network", network},
                {"k", k},
                {"subject-integrity", subject_integrity},
                {"ilr", ilr},
                {"lrdf", lrdf},
                {"dp", dp},
                {"drop-period", drop_period},
                {"batch-size", batch_size},
                {"train-iters", train_iters},
                {"seed", seed},
                {"save-model", save_model},
                {"out", out}};
    }
};

int run_train(const TrainArgs& args) {
    if (args.data.empty()) throw std::invalid_argument("train: --data is required");
    const auto ds = load_dataset(args.data);

    nn::NetworkSpec spec;
    if (!args.network.empty()) {
        spec = nn::network_spec_from_json(json::parse(io::read_file(args.network)));
        spec.head = nn::head_from_string(args.head);
    } else {
        spec = nn::default_network_spec(nn::head_from_string(args.head));
    }

    Rng fold_rng(derive_seed(args.seed, 0x666f6c6473ULL));
    const auto folds =
        args.subject_integrity
            ? pipeline::stratified_group_kfold(ds.labels, ds.subject_ids, args.k, fold_rng)
            : pipeline::stratified_kfold(ds.labels, args.k, fold_rng);

    pipeline::TrainingHyperparameters hyper;
    hyper.ilr = args.ilr;
    hyper.lrdf = args.lrdf;
    hyper.dp = args.dp;
    hyper.drop_period = args.drop_period;
    hyper.batch_size = args.batch_size;
    hyper.max_training_iterations = args.train_iters;

    const auto result = pipeline::train_and_evaluate(spec, ds, folds, hyper, args.seed);

    io::CsvWriter fold_csv(
        {"fold", "status", "accuracy", "sensitivity", "specificity", "validation_loss"});
    auto opt_str = [](const std::optional<double>& v) {
        return v ? io::format_double(*v) : std::string("undefined");
    };
    for (const auto& f : result.folds)
        fold_csv.row(f.fold, f.failed ? "failed" : "ok", opt_str(f.metrics.accuracy),
                     opt_str(f.metrics.sensitivity), opt_str(f.metrics.specificity),
                     io::format_double(f.validation_loss));
    io::write_file_atomic(fs::path(args.out) / "folds.csv", fold_csv.str());

    io::CsvWriter summary_csv({"metric", "mean", "std", "folds"});
    summary_csv.row("accuracy", io::format_double(result.accuracy.mean),
                    io::format_double(result.accuracy.stddev), result.accuracy.n);
    summary_csv.row("sensitivity", io::format_double(result.sensitivity.mean),
                    io::format_double(result.sensitivity.stddev), result.sensitivity.n);
    summary_csv.row("specificity", io::format_double(result.specificity.mean),
                    io::format_double(result.specificity.stddev), result.specificity.n);
    io::write_file_atomic(fs::path(args.out) / "summary.csv", summary_csv.str());

    if (!args.save_model.empty()) {
        // Model retrained on everything except fold 0, saved for reuse.
        auto model = pipeline::train_network(spec, ds, folds.train_indices(0), hyper,
                                             derive_seed(args.seed, 0x6d6f64656cULL));
        if (!model.failed) model.net.save(args.save_model);
    }

    write_manifest(args.out, "train", args.manifest());
    std::cout << "train: accuracy " << result.accuracy.mean << " +/- " << result.accuracy.stddev
              << ", sensitivity " << result.sensitivity.mean << ", specificity "
              << result.specificity.mean << "\n";
    for (const auto& f : result.folds)
        if (f.failed) std::cout << "  fold " << f.fold << " FAILED: " << f.diagnostic << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct HpoArgs {
    std::string data;
    int pop = 6;
    int iters = 5;
    int repeats = 3;
    int train_iters = 120;
    std::uint64_t seed = 0;
    std::string out = "hpo_out";

    json manifest() const {
        return {{"data", data},           {"pop", pop},   {"iters", iters},
                {"repeats", repeats},     {"train-iters", train_iters},
                {"seed", seed},           {"out", out}};
    }
};

int run_hpo(const HpoArgs& args) {
    if (args.data.empty()) throw std::invalid_argument("hpo: --data is required");
    const auto ds = load_dataset(args.data);
    const auto spec = nn::default_network_spec(nn::HeadKind::fenn);

    pipeline::HpoSpace space;
    pipeline::HpoConfig cfg;
    cfg.population = args.pop;
    cfg.iterations = args.iters;
    cfg.repeats = args.repeats;
    cfg.seed = args.seed;
    cfg.train_base.max_training_iterations = args.train_iters;
    cfg.train_base.drop_period = std::max(1, args.train_iters / 4);

    const auto result = pipeline::hpo_search(space, spec, ds, cfg);

    io::CsvWriter trace({"iteration", "hawk", "ilr", "lrdf", "dp", "fitness"});
    for (const auto& row : result.trace)
        trace.row(row.iteration, row.hawk, io::format_double(row.ilr),
                  io::format_double(row.lrdf), io::format_double(row.dp),
                  io::format_double(row.fitness));
    io::write_file_atomic(fs::path(args.out) / "trace.csv", trace.str());

    json best{{"ilr", result.best.ilr},
              {"lrdf", result.best.lrdf},
              {"dp", result.best.dp},
              {"drop_period", result.best.drop_period},
              {"batch_size", result.best.batch_size},
              {"max_training_iterations", result.best.max_training_iterations},
              {"search_fitness", result.best_fitness},
              {"evaluations", result.record.evaluations}};
    io::write_file_atomic(fs::path(args.out) / "best.json", best.dump(2) + "\n");
    write_manifest(args.out, "hpo", args.manifest());
    std::cout << "hpo: best ilr=" << result.best.ilr << " lrdf=" << result.best.lrdf
              << " dp=" << result.best.dp << " fitness=" << result.best_fitness << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hawknet: metaheuristic optimization and recurrent classification workbench"};
    app.require_subcommand(1);

    BenchArgs bench_args;
    std::string bench_config;
    auto* bench_cmd = app.add_subcommand("bench", "run seeded optimizer grids");
    bench_cmd->add_option("--functions", bench_args.functions, "comma list or 'all'");
    bench_cmd->add_option("--dims", bench_args.dims, "problem dimension");
    bench_cmd->add_option("--algorithms", bench_args.algorithms, "comma list");
    bench_cmd->add_option("--seeds", bench_args.seeds, "comma list of run seeds");
    bench_cmd->add_option("--pop", bench_args.pop, "population size");
    bench_cmd->add_option("--iters", bench_args.iters, "iterations");
    bench_cmd->add_option("--jobs", bench_args.jobs, "parallel runs");
    bench_cmd->add_flag("--svg", bench_args.svg, "write convergence plots");
    bench_cmd->add_option("--catalog", bench_args.catalog, "export function catalog JSON here");
    bench_cmd->add_option("--out", bench_args.out, "output directory");
    bench_cmd->add_option("--config", bench_config, "JSON manifest overriding unset flags");

    CompareArgs compare_args;
    std::string compare_config;
    auto* compare_cmd = app.add_subcommand("compare", "Wilcoxon + Friedman comparison report");
    compare_cmd->add_option("--runs-dir", compare_args.runs_dirs, "bench output directory");
    compare_cmd->add_option("--reference", compare_args.reference, "reference algorithm");
    compare_cmd->add_option("--alpha", compare_args.alpha, "significance level");
    compare_cmd->add_option("--out", compare_args.out, "output directory");
    compare_cmd->add_option("--config", compare_config, "JSON manifest overriding unset flags");

    GenDataArgs gen_args;
    std::string gen_config;
    auto* gen_cmd = app.add_subcommand("gen-data", "generate the synthetic dataset");
    gen_cmd->add_option("--subjects", gen_args.subjects, "number of subjects");
    gen_cmd->add_option("--segments-per-subject", gen_args.segments_per_subject, "segments each");
    gen_cmd->add_option("--abnormal-fraction", gen_args.abnormal_fraction, "abnormal fraction");
    gen_cmd->add_option("--seed", gen_args.seed, "master seed");
    gen_cmd->add_option("--out", gen_args.out, "dataset directory");
    gen_cmd->add_option("--config", gen_config, "JSON manifest overriding unset flags");

    TrainArgs train_args;
    std::string train_config;
    auto* train_cmd = app.add_subcommand("train", "cross-validated training and evaluation");
    train_cmd->add_option("--data", train_args.data, "dataset directory");
    train_cmd->add_option("--head", train_args.head, "mlp | enn | fenn");
    train_cmd->add_option("--network", train_args.network, "NetworkSpec JSON path");
    train_cmd->add_option("--k", train_args.k, "folds");
    train_cmd->add_flag("--subject-integrity", train_args.subject_integrity,
                        "whole subjects per fold");
    train_cmd->add_option("--ilr", train_args.ilr, "initial learning rate");
    train_cmd->add_option("--lrdf", train_args.lrdf, "learning rate drop factor");
    train_cmd->add_option("--dp", train_args.dp, "dropout probability");
    train_cmd->add_option("--drop-period", train_args.drop_period, "iterations between drops");
    train_cmd->add_option("--batch-size", train_args.batch_size, "0 = one tenth of train set");
    train_cmd->add_option("--train-iters", train_args.train_iters, "training iterations");
    train_cmd->add_option("--seed", train_args.seed, "master seed");
    train_cmd->add_option("--save-model", train_args.save_model, "save model under this prefix");
    train_cmd->add_option("--out", train_args.out, "output directory");
    train_cmd->add_option("--config", train_config, "JSON manifest overriding unset flags");

    HpoArgs hpo_args;
    std::string hpo_config;
    auto* hpo_cmd = app.add_subcommand("hpo", "hyperparameter search via hho_plus");
    hpo_cmd->add_option("--data", hpo_args.data, "dataset directory");
    hpo_cmd->add_option("--pop", hpo_args.pop, "population size");
    hpo_cmd->add_option("--iters", hpo_args.iters, "iterations");
    hpo_cmd->add_option("--repeats", hpo_args.repeats, "training repetitions per evaluation");
    hpo_cmd->add_option("--train-iters", hpo_args.train_iters, "training iterations per repeat");
    hpo_cmd->add_option("--seed", hpo_args.seed, "master seed");
    hpo_cmd->add_option("--out", hpo_args.out, "output directory");
    hpo_cmd->add_option("--config", hpo_config, "JSON manifest overriding unset flags");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (bench_cmd->parsed()) {
            ConfigMerger cfg(bench_cmd, bench_config);
            cfg.field("functions", bench_args.functions);
            cfg.field("algorithms", bench_args.algorithms);
            cfg.field("seeds", bench_args.seeds);
            cfg.field("dims", bench_args.dims);
            cfg.field("pop", bench_args.pop);
            cfg.field("iters", bench_args.iters);
            cfg.field("jobs", bench_args.jobs);
            cfg.field("svg", bench_args.svg);
            cfg.field("catalog", bench_args.catalog);
            cfg.field("out", bench_args.out);
            return run_bench(bench_args);
        }
        if (compare_cmd->parsed()) {
            ConfigMerger cfg(compare_cmd, compare_config);
            cfg.field("runs-dir", compare_args.runs_dirs);
            cfg.field("reference", compare_args.reference);
            cfg.field("alpha", compare_args.alpha);
            cfg.field("out", compare_args.out);
            return run_compare(compare_args);
        }
        if (gen_cmd->parsed()) {
            ConfigMerger cfg(gen_cmd, gen_config);
            cfg.field("subjects", gen_args.subjects);
            cfg.field("segments-per-subject", gen_args.segments_per_subject);
            cfg.field("abnormal-fraction", gen_args.abnormal_fraction);
            cfg.field("seed", gen_args.seed);
            cfg.field("out", gen_args.out);
            return run_gen_data(gen_args);
        }
        if (train_cmd->parsed()) {
            ConfigMerger cfg(train_cmd, train_config);
            cfg.field("data", train_args.data);
            cfg.field("head", train_args.head);
            cfg.field("network", train_args.network);
            cfg.field("k", train_args.k);
            cfg.field("subject-integrity", train_args.subject_integrity);
            cfg.field("ilr", train_args.ilr);
            cfg.field("lrdf", train_args.lrdf);
            cfg.field("dp", train_args.dp);
            cfg.field("drop-period", train_args.drop_period);
            cfg.field("batch-size", train_args.batch_size);
            cfg.field("train-iters", train_args.train_iters);
            cfg.field("seed", train_args.seed);
            cfg.field("save-model", train_args.save_model);
            cfg.field("out", train_args.out);
            return run_train(train_args);
        }
        if (hpo_cmd->parsed()) {
            ConfigMerger cfg(hpo_cmd, hpo_config);
            cfg.field("data", hpo_args.data);
            cfg.field("pop", hpo_args.pop);
            cfg.field("iters", hpo_args.iters);
            cfg.field("repeats", hpo_args.repeats);
            cfg.field("train-iters", hpo_args.train_iters);
            cfg.field("seed", hpo_args.seed);
            cfg.field("out", hpo_args.out);
            return run_hpo(hpo_args);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
