/*
 * Copyright (c) 2026, The knnpr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "knnpr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "knnpr/embeddings.hpp"
#include "knnpr/errors.hpp"
#include "knnpr/metric.hpp"
#include "knnpr/realism.hpp"
#include "knnpr/report.hpp"
#include "knnpr/synthetic.hpp"
#include "seeding.hpp"

#ifndef KNNPR_VERSION
#define KNNPR_VERSION "0.0.0"
#endif

namespace knnpr::cli {

namespace {

struct OutputOptions {
    std::string out;
    std::string format;
};

void add_output_options(CLI::App* cmd, OutputOptions& o, const std::string& default_format) {
    o.format = default_format;
    cmd->add_option("--out", o.out, "Output path ('-' or omitted: standard output)");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

EmbeddingSet load(const std::string& path, RunManifest& manifest) {
    EmbeddingSet set = read_embeddings(path);
    manifest.add_input(path);
    return set;
}

// Keeps at most `cap` rows, chosen by seed, in their original order.
EmbeddingSet cap_rows(const EmbeddingSet& set, std::size_t cap, std::uint64_t seed, std::uint64_t stream) {
    if (cap == 0 || set.size() <= cap) return set;
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(detail::derive_seed(seed, stream));
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(cap);
    std::sort(order.begin(), order.end());
    return set.select(order);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Replaces "--config FILE" by the file's "key = value" lines rendered as
// flags. Flags already on the command line win over the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    std::string config;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ValidationError("--config needs a file argument");
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (config.empty()) return out;

    std::ifstream in(config);
    if (!in) throw IoError("cannot open config file '" + config + "'");
    std::string line;
    std::size_t line_no = 0;
    const std::vector<std::string> explicit_args = out;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line.substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config '" + config + "' line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        const std::string flag = "--" + key;
        if (has_flag(explicit_args, flag)) continue;
        if (value == "true") {
            out.push_back(flag);
        } else if (value != "false") {
            out.push_back(flag);
            out.push_back(value);
        }
    }
    return out;
}

std::vector<ScoredPoint> read_scored_points(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::string line;
    std::vector<std::string> header;
    std::vector<ScoredPoint> points;
    std::size_t line_no = 0;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        return cells;
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (header.empty()) {
            header = cells;
            if (header.size() < 3 || header[0] != "id" || header[1] != "precision" || header[2] != "recall") {
                throw ValidationError("'" + path + "': header must start with id,precision,recall");
            }
            continue;
        }
        if (cells.size() != header.size()) {
            throw ValidationError("'" + path + "' line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " cells");
        }
        ScoredPoint p;
        p.id = cells[0];
        try {
            std::size_t used = 0;
            p.precision = std::stod(cells[1], &used);
            p.recall = std::stod(cells[2]);
            if (header.size() > 3 && !cells[3].empty()) p.aux = std::stod(cells[3]);
        } catch (const std::exception&) {
            throw ValidationError("'" + path + "' line " + std::to_string(line_no) + ": unparseable number");
        }
        points.push_back(std::move(p));
    }
    return points;
}

LatentGaussianSpec seeded_covariance(std::size_t dim, std::uint64_t seed) {
    const auto d = static_cast<Eigen::Index>(dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd a(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = normal(rng) / std::sqrt(static_cast<double>(dim));
    }
    LatentGaussianSpec spec;
    spec.mean = Eigen::VectorXd::Zero(d);
    spec.covariance = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
    return spec;
}

class Timer {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"k-NN manifold precision, recall and realism toolkit", "pr"};
    app.require_subcommand(1);
    app.set_version_flag("--version", KNNPR_VERSION);

    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores)")
        ->envname(kThreadsEnv)
        ->check(CLI::NonNegativeNumber);

    // compute
    auto* compute = app.add_subcommand("compute", "Precision and recall of two embedding files");
    std::string real_path, gen_path;
    std::size_t k = 3;
    std::size_t max_samples = 50000;
    std::uint64_t seed = 0;
    BlockConfig blocks;
    OutputOptions compute_out;
    compute->add_option("--real", real_path, "Real embeddings (EPR1)")->required();
    compute->add_option("--gen", gen_path, "Generated embeddings (EPR1)")->required();
    compute->add_option("--k", k, "Neighbourhood size")->capture_default_str();
    compute->add_option("--max-samples", max_samples, "Seeded down-sampling cap per side (0 = none)")
        ->capture_default_str();
    compute->add_option("--seed", seed, "Down-sampling seed")->capture_default_str();
    compute->add_option("--query-block", blocks.query_block)->capture_default_str();
    compute->add_option("--reference-block", blocks.reference_block)->capture_default_str();
    add_output_options(compute, compute_out, "json");

    // realism
    auto* realism = app.add_subcommand("realism", "Per-sample realism scores");
    std::string queries_path;
    bool no_prune = false;
    OutputOptions realism_out;
    realism->add_option("--real", real_path, "Real embeddings (EPR1)")->required();
    realism->add_option("--queries", queries_path, "Embeddings to score (EPR1)")->required();
    realism->add_option("--k", k)->capture_default_str();
    realism->add_option("--max-samples", max_samples)->capture_default_str();
    realism->add_option("--seed", seed)->capture_default_str();
    realism->add_flag("--no-prune", no_prune, "Keep every hypersphere");
    add_output_options(realism, realism_out, "csv");

    // interp
    auto* interp = app.add_subcommand("interp", "Interpolation path realism statistics");
    std::string endpoints_path;
    std::size_t steps = 20;
    double r_threshold = 0.9;
    double frac_threshold = 0.25;
    OutputOptions interp_out;
    interp->add_option("--real", real_path, "Real embeddings (EPR1)")->required();
    interp->add_option("--endpoints", endpoints_path, "EPR1 file of consecutive (start, end) rows")->required();
    interp->add_option("--steps", steps)->capture_default_str();
    interp->add_option("--r-threshold", r_threshold)->capture_default_str();
    interp->add_option("--frac-threshold", frac_threshold)->capture_default_str();
    interp->add_option("--k", k)->capture_default_str();
    interp->add_option("--max-samples", max_samples)->capture_default_str();
    interp->add_option("--seed", seed)->capture_default_str();
    interp->add_flag("--no-prune", no_prune, "Keep every hypersphere");
    add_output_options(interp, interp_out, "json");

    // synth
    auto* synth = app.add_subcommand("synth", "Synthetic experiments");
    synth->require_subcommand(1);
    auto* modes = synth->add_subcommand("modes", "Mode drop / invention on a 2-D Gaussian mixture");
    std::size_t gen_modes = 5;
    bool all_modes = false;
    std::size_t n = 10000;
    std::uint64_t synth_seed = 1;
    ModeLayout layout;
    OutputOptions modes_out;
    modes->add_option("--gen-modes", gen_modes, "Generator modes (1..10)")->capture_default_str();
    modes->add_flag("--all", all_modes, "Run every generator mode count");
    modes->add_option("--n", n, "Samples per side")->capture_default_str();
    modes->add_option("--k", k)->capture_default_str();
    modes->add_option("--seed", synth_seed)->capture_default_str();
    modes->add_option("--radius", layout.radius)->capture_default_str();
    modes->add_option("--stddev", layout.stddev)->capture_default_str();
    add_output_options(modes, modes_out, "json");

    auto* truncate = synth->add_subcommand("truncate", "Truncation strategy sweep on synthetic latents");
    std::string strategy_letter = "D";
    std::vector<double> grid{1.0, 0.8, 0.6, 0.4, 0.2};
    std::size_t dim = 8;
    std::string latent = "gaussian";
    OutputOptions truncate_out;
    truncate->add_option("--strategy", strategy_letter, "Strategy letter A..G")->capture_default_str();
    truncate->add_option("--grid", grid, "Comma-separated parameter values")->delimiter(',');
    truncate->add_option("--dim", dim)->capture_default_str();
    truncate->add_option("--n", n)->capture_default_str();
    truncate->add_option("--k", k)->capture_default_str();
    truncate->add_option("--seed", synth_seed)->capture_default_str();
    truncate->add_option("--latent", latent, "Latent model")
        ->check(CLI::IsMember({"gaussian", "mapped"}))
        ->capture_default_str();
    add_output_options(truncate, truncate_out, "csv");

    // pareto
    auto* pareto = app.add_subcommand("pareto", "Pareto frontier of scored points");
    std::string points_path;
    OutputOptions pareto_out;
    pareto->add_option("--in", points_path, "CSV with header id,precision,recall[,aux]")->required();
    add_output_options(pareto, pareto_out, "csv");

    // convert
    auto* convert = app.add_subcommand("convert", "Convert between CSV and EPR1");
    std::string convert_in, convert_out, convert_to;
    convert->add_option("--in", convert_in)->required();
    convert->add_option("--out", convert_out)->required();
    convert->add_option("--to", convert_to, "Target format (default: from --out extension)")
        ->check(CLI::IsMember({"epr", "csv"}));

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }

    std::vector<const char*> argv{"pr"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << KNNPR_VERSION << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    set_thread_count(threads);
    const Timer timer;
    RunManifest manifest;
    manifest.version = KNNPR_VERSION;

    try {
        if (compute->parsed()) {
            manifest.command = "compute";
            manifest.seed = seed;
            manifest.parameters = {{"real", real_path},
                                   {"gen", gen_path},
                                   {"k", k},
                                   {"max_samples", max_samples},
                                   {"query_block", blocks.query_block},
                                   {"reference_block", blocks.reference_block}};
            const auto real = cap_rows(load(real_path, manifest), max_samples, seed, 0);
            const auto gen = cap_rows(load(gen_path, manifest), max_samples, seed, 1);
            auto result = precision_recall(real, gen, MetricConfig{k, blocks});
            result.provenance += " seed=" + std::to_string(seed);
            manifest.duration_seconds = timer.seconds();
            emit_report(to_json(result), manifest, parse_report_format(compute_out.format), compute_out.out, out);
        } else if (realism->parsed()) {
            manifest.command = "realism";
            manifest.seed = seed;
            manifest.parameters = {{"real", real_path},
                                   {"queries", queries_path},
                                   {"k", k},
                                   {"max_samples", max_samples},
                                   {"prune", !no_prune}};
            const auto real = cap_rows(load(real_path, manifest), max_samples, seed, 0);
            const auto queries = load(queries_path, manifest);
            const PrunedManifold manifold(ManifoldEstimate(real, k), !no_prune);
            const auto scores = realism_scores_batch(queries, manifold);
            manifest.duration_seconds = timer.seconds();
            emit_report(realism_records(scores), manifest, parse_report_format(realism_out.format), realism_out.out,
                        out);
        } else if (interp->parsed()) {
            manifest.command = "interp";
            manifest.seed = seed;
            manifest.parameters = {{"real", real_path},
                                   {"endpoints", endpoints_path},
                                   {"steps", steps},
                                   {"r_threshold", r_threshold},
                                   {"frac_threshold", frac_threshold},
                                   {"k", k},
                                   {"max_samples", max_samples},
                                   {"prune", !no_prune}};
            const auto real = cap_rows(load(real_path, manifest), max_samples, seed, 0);
            const auto ends = load(endpoints_path, manifest);
            if (ends.size() % 2 != 0) throw ValidationError("endpoint file must hold an even number of rows");
            std::vector<EndpointPair> pairs;
            for (std::size_t i = 0; i + 1 < ends.size(); i += 2) {
                auto a = ends.row(i);
                auto b = ends.row(i + 1);
                pairs.push_back({{a.begin(), a.end()}, {b.begin(), b.end()}});
            }
            const PrunedManifold manifold(ManifoldEstimate(real, k), !no_prune);
            const auto report = interpolation_path_stats(pairs, steps, manifold, r_threshold, frac_threshold);
            manifest.duration_seconds = timer.seconds();
            emit_report(to_json(report), manifest, parse_report_format(interp_out.format), interp_out.out, out);
        } else if (modes->parsed()) {
            manifest.command = "synth modes";
            manifest.seed = synth_seed;
            manifest.parameters = {{"gen_modes", all_modes ? ordered_json("all") : ordered_json(gen_modes)},
                                   {"n", n},
                                   {"k", k},
                                   {"radius", layout.radius},
                                   {"stddev", layout.stddev},
                                   {"total_modes", layout.total_modes},
                                   {"real_modes", layout.real_modes}};
            std::vector<std::size_t> counts;
            if (all_modes) {
                for (std::size_t m = 1; m <= layout.total_modes; ++m) counts.push_back(m);
            } else {
                counts.push_back(gen_modes);
            }
            ordered_json rows = ordered_json::array();
            for (std::size_t m : counts) {
                const auto r = mode_experiment(m, n, k, synth_seed, layout);
                ordered_json row;
                row["gen_modes"] = m;
                const ordered_json fields = to_json(r);
                for (const auto& [key, value] : fields.items()) row[key] = value;
                rows.push_back(std::move(row));
            }
            manifest.duration_seconds = timer.seconds();
            emit_report(all_modes ? rows : rows.front(), manifest, parse_report_format(modes_out.format),
                        modes_out.out, out);
        } else if (truncate->parsed()) {
            if (strategy_letter.size() != 1) throw ValidationError("--strategy takes a single letter A..G");
            const auto strategy = TruncationStrategy::from_letter(strategy_letter[0], grid.empty() ? 1.0 : grid[0]);
            manifest.command = "synth truncate";
            manifest.seed = synth_seed;
            manifest.parameters = {{"strategy", std::string(1, strategy.letter())},
                                   {"grid", grid},
                                   {"dim", dim},
                                   {"n", n},
                                   {"k", k},
                                   {"latent", latent}};
            if (dim == 0) throw ValidationError("--dim must be positive");

            std::optional<SyntheticMapping> mapping;
            EmbeddingSet real(1, 1, {0.0f});
            EmbeddingSet gen_w(1, 1, {0.0f});
            EmbeddingSet gen_input(1, 1, {0.0f});
            if (latent == "mapped") {
                mapping = SyntheticMapping::from_seed(dim, detail::derive_seed(synth_seed, 2));
                LatentGaussianSpec prior{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)),
                                         Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim),
                                                                   static_cast<Eigen::Index>(dim))};
                real = mapping->apply(sample_gaussian(prior, n, detail::derive_seed(synth_seed, 0)));
                const auto z_gen = sample_gaussian(prior, n, detail::derive_seed(synth_seed, 1));
                gen_w = mapping->apply(z_gen);
                gen_input = strategy.needs_mapping() ? z_gen : gen_w;
            } else {
                if (strategy.needs_mapping()) {
                    throw ValidationError(std::string("strategy ") + strategy.letter() + " needs --latent mapped");
                }
                const auto truth = seeded_covariance(dim, detail::derive_seed(synth_seed, 3));
                real = sample_gaussian(truth, n, detail::derive_seed(synth_seed, 0));
                gen_w = sample_gaussian(truth, n, detail::derive_seed(synth_seed, 1));
                gen_input = gen_w;
            }
            const auto fitted = fit_gaussian(gen_w);
            const auto sweep = truncation_sweep(strategy, grid, real, gen_input, fitted,
                                                mapping ? &*mapping : nullptr, MetricConfig{k, {}},
                                                detail::derive_seed(synth_seed, 4));
            ordered_json rows = ordered_json::array();
            for (const auto& p : sweep) rows.push_back(to_json(p));
            manifest.duration_seconds = timer.seconds();
            emit_report(rows, manifest, parse_report_format(truncate_out.format), truncate_out.out, out);
        } else if (pareto->parsed()) {
            manifest.command = "pareto";
            manifest.parameters = {{"in", points_path}};
            const auto points = read_scored_points(points_path);
            manifest.add_input(points_path);
            const auto frontier = pareto_frontier(points);
            ordered_json rows = ordered_json::array();
            for (const auto& p : frontier) rows.push_back(to_json(p));
            manifest.duration_seconds = timer.seconds();
            emit_report(rows, manifest, parse_report_format(pareto_out.format), pareto_out.out, out);
        } else if (convert->parsed()) {
            manifest.command = "convert";
            std::string target = convert_to;
            if (target.empty()) {
                const auto ext = std::filesystem::path(convert_out).extension().string();
                target = ext == ".csv" ? "csv" : "epr";
            }
            manifest.parameters = {{"in", convert_in}, {"to", target}};
            const bool from_csv = std::filesystem::path(convert_in).extension() == ".csv";
            const auto set = from_csv ? import_csv(convert_in) : read_embeddings(convert_in);
            manifest.add_input(convert_in);
            if (target == "csv") {
                export_csv(set, convert_out);
            } else {
                write_embeddings(set, convert_out);
            }
            manifest.duration_seconds = timer.seconds();
            std::ofstream sidecar(convert_out + ".manifest.json", std::ios::trunc);
            if (!sidecar) throw IoError("cannot write '" + convert_out + ".manifest.json'");
            sidecar << render_json(manifest.to_json());
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

}  // namespace knnpr::cli
