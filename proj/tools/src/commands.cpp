#include "tlamm_cli/cli.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include <tlamm/cox_model.hpp>
#include <tlamm/diagnostics.hpp>
#include <tlamm/parallel.hpp>

#include "config.hpp"

namespace tlamm::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* cv_criterion_name = "held-out partial-likelihood deviance";

struct Context
{
    json config;
    fs::path config_dir;
    fs::path out_dir;
    int threads = 1;
    std::uint64_t seed = 1;
    std::ostream& out;
};

std::string format_double(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

json vector_json(const Vector& v)
{
    json arr = json::array();
    for (Index j = 0; j < v.size(); ++j) {
        arr.push_back(v[j]);
    }
    return arr;
}

void write_json(const fs::path& path, const json& doc)
{
    write_text_file(path, doc.dump(2) + "\n");
}

const json& block(const json& config, const char* key)
{
    static const json empty = json::object();
    auto it = config.find(key);
    return it == config.end() ? empty : *it;
}

const json& required_block(const json& config, const char* key)
{
    auto it = config.find(key);
    if (it == config.end()) {
        throw ConfigError(std::string("missing required block '") + key + "'");
    }
    return *it;
}

int cmd_simulate(Context& ctx)
{
    check_keys(ctx.config, {"simulation", "seed"}, "config");
    const SimulationConfig sim = parse_simulation(block(ctx.config, "simulation"), ctx.seed);
    const SimulatedData data = simulate_dataset(sim);
    write_csv(data.dataset, ctx.out_dir / "data.csv");
    write_json(ctx.out_dir / "truth.json", json{{"true_beta", vector_json(data.true_beta)}, {"seed", ctx.seed}});
    ctx.out << "simulated n=" << sim.n << " p=" << sim.p << " censoring=" << censoring_rate(data.dataset) << "\n";
    return exit_ok;
}

json selection_json(const Vector& beta, const Vector& truth)
{
    const auto metrics = selection_metrics(beta, support_of(truth));
    return json{{"l2_error", l2_error(beta, truth)},
                {"tp", metrics.tp},
                {"fp", metrics.fp},
                {"fn", metrics.fn},
                {"tn", metrics.tn},
                {"sensitivity", metrics.sensitivity},
                {"specificity", metrics.specificity}};
}

int cmd_fit(Context& ctx)
{
    check_keys(ctx.config, {"data", "penalty", "solver", "method", "ilamm_max_stages", "seed"}, "config");
    const LoadedData data = load_data(required_block(ctx.config, "data"), ctx.config_dir, ctx.seed);
    const PenaltyRequest request = parse_penalty(required_block(ctx.config, "penalty"));
    const PenaltySpec spec = request.resolve(data.dataset.n(), data.dataset.p());
    const SolverConfig solver = parse_solver(block(ctx.config, "solver"));
    const std::string method = get_string(ctx.config, "method", "config", "tlamm");
    const auto max_stages = get_integer(ctx.config, "ilamm_max_stages", "config", 20);
    if (method != "tlamm" && method != "ilamm") {
        throw ConfigError("config.method must be tlamm or ilamm");
    }

    const auto start = std::chrono::steady_clock::now();
    const CoxObjective cox(data.dataset);
    const FitResult fit = method == "tlamm" ? fit_tlamm(cox, spec, solver)
                                            : fit_ilamm(cox, spec, solver, static_cast<int>(max_stages));
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::string beta_csv = "index,value\n";
    for (Index j = 0; j < fit.beta.size(); ++j) {
        if (fit.beta[j] != 0.0) {
            beta_csv += std::to_string(j + 1) + "," + format_double(fit.beta[j]) + "\n";
        }
    }
    write_text_file(ctx.out_dir / "beta.csv", beta_csv);

    std::ostringstream trace;
    fit.trace.write_csv(trace);
    write_text_file(ctx.out_dir / "trace.csv", trace.str());

    json summary{{"method", method},
                 {"penalty", {{"kind", to_string(spec.kind)}, {"shape", spec.shape}, {"lambda", spec.lambda}}},
                 {"n", data.dataset.n()},
                 {"p", data.dataset.p()},
                 {"events", data.dataset.event_count()},
                 {"iterations", {{"stage1", fit.iterations_stage1}, {"stage2", fit.iterations_stage2}}},
                 {"stages", fit.stages},
                 {"converged", fit.converged_stage1 && fit.converged_stage2},
                 {"converged_stage1", fit.converged_stage1},
                 {"converged_stage2", fit.converged_stage2},
                 {"objective", fit.objective},
                 {"omega", fit.omega},
                 {"support_size", static_cast<Index>(support_of(fit.beta).size())},
                 {"wall_seconds", seconds}};
    if (request.c) {
        summary["penalty"]["c"] = *request.c;
    }
    if (data.truth) {
        summary["truth"] = selection_json(fit.beta, *data.truth);
    }
    write_json(ctx.out_dir / "summary.json", summary);
    ctx.out << "fit " << method << " " << to_string(spec.kind) << ": support " << summary["support_size"]
            << ", F = " << fit.objective << ", omega = " << fit.omega << "\n";
    return exit_ok;
}

int cmd_cv(Context& ctx)
{
    check_keys(ctx.config, {"data", "penalty", "solver", "cv", "seed"}, "config");
    const LoadedData data = load_data(required_block(ctx.config, "data"), ctx.config_dir, ctx.seed);
    const PenaltyRequest request = parse_penalty(block(ctx.config, "penalty"));
    if (request.lambda || request.c) {
        throw ConfigError("cv tunes c itself; remove penalty.lambda / penalty.c");
    }
    CvConfig cv = parse_cv(block(ctx.config, "cv"), ctx.seed);
    cv.shape = request.shape;
    const SolverConfig solver = parse_solver(block(ctx.config, "solver"));

    const CvResult result = cross_validate(data.dataset, request.kind, cv, solver, ctx.threads);

    std::string csv = "c,criterion\n";
    for (std::size_t i = 0; i < result.c_grid.size(); ++i) {
        csv += format_double(result.c_grid[i]) + "," + format_double(result.criterion[i]) + "\n";
    }
    write_text_file(ctx.out_dir / "cv.csv", csv);
    write_json(ctx.out_dir / "cv.json", json{{"penalty", to_string(request.kind)},
                                             {"criterion", cv_criterion_name},
                                             {"folds", cv.folds},
                                             {"fold_seed", result.fold_seed},
                                             {"chosen_c", result.chosen_c},
                                             {"chosen_lambda", result.chosen_lambda}});
    ctx.out << "cv " << to_string(request.kind) << ": c = " << result.chosen_c
            << ", lambda = " << result.chosen_lambda << "\n";
    return exit_ok;
}

std::vector<Index> index_list(const json& node, std::string_view key, std::vector<Index> fallback)
{
    auto it = node.find(std::string(key));
    if (it == node.end()) {
        return fallback;
    }
    const json list = it->is_array() ? *it : json::array({*it});
    std::vector<Index> out;
    for (const auto& v : list) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw ConfigError("grid." + std::string(key) + " must hold positive integers");
        }
        out.push_back(v.get<Index>());
    }
    if (out.empty()) {
        throw ConfigError("grid." + std::string(key) + " must not be empty");
    }
    return out;
}

ExperimentGrid parse_grid(const json& node)
{
    constexpr std::string_view where = "grid";
    check_keys(node, {"n", "p", "designs", "methods", "reps", "support_size", "signal", "censoring"}, where);
    ExperimentGrid grid;
    grid.n_values = index_list(node, "n", grid.n_values);
    grid.p_values = index_list(node, "p", grid.p_values);
    if (auto it = node.find("designs"); it != node.end()) {
        if (!it->is_array() || it->empty()) {
            throw ConfigError("grid.designs must be a nonempty array");
        }
        grid.designs.clear();
        for (const auto& d : *it) {
            grid.designs.push_back(parse_design(d, "grid.designs[]"));
        }
    }
    if (auto it = node.find("methods"); it != node.end()) {
        if (!it->is_array() || it->empty()) {
            throw ConfigError("grid.methods must be a nonempty array");
        }
        grid.methods.clear();
        for (const auto& m : *it) {
            if (!m.is_string()) {
                throw ConfigError("grid.methods entries must be strings");
            }
            grid.methods.push_back(parse_method(m.get<std::string>()));
        }
    }
    grid.reps = static_cast<int>(get_integer(node, "reps", where, grid.reps));
    grid.support_size = static_cast<Index>(get_integer(node, "support_size", where, grid.support_size));
    grid.signal = get_number(node, "signal", where, grid.signal);
    if (auto it = node.find("censoring"); it != node.end()) {
        if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
            throw ConfigError("grid.censoring must be a two-number array [low, high]");
        }
        grid.censoring_low = (*it)[0].get<double>();
        grid.censoring_high = (*it)[1].get<double>();
    }
    if (grid.support_size < 1 || !(grid.censoring_low < grid.censoring_high)) {
        throw ConfigError("grid needs support_size >= 1 and censoring low < high");
    }
    return grid;
}

TuningSpec parse_tuning(const json& node, std::uint64_t seed)
{
    constexpr std::string_view where = "tuning";
    check_keys(node, {"n", "p", "datasets", "folds", "c_grid", "max_resplits"}, where);
    TuningSpec t;
    t.n = static_cast<Index>(get_integer(node, "n", where, t.n));
    t.p = static_cast<Index>(get_integer(node, "p", where, t.p));
    t.datasets = static_cast<int>(get_integer(node, "datasets", where, t.datasets));
    json cv = json::object();
    for (const char* key : {"folds", "c_grid", "max_resplits"}) {
        if (node.contains(key)) {
            cv[key] = node[key];
        }
    }
    t.cv = parse_cv(cv, seed);
    t.seed = seed;
    if (t.n < 2 || t.p < 1 || t.datasets < 1) {
        throw ConfigError("tuning needs n >= 2, p >= 1 and datasets >= 1");
    }
    return t;
}

/// One n, one p, one design, and the oracle, Lasso and a TLAMM method all present.
bool is_table1_shape(const ExperimentGrid& grid)
{
    auto has = [&](Method m) { return std::find(grid.methods.begin(), grid.methods.end(), m) != grid.methods.end(); };
    return grid.n_values.size() == 1 && grid.p_values.size() == 1 && grid.designs.size() == 1 && has(Method::Oracle)
           && has(Method::Lasso) && (has(Method::TlammMcp) || has(Method::TlammScad));
}

int cmd_experiment(Context& ctx)
{
    check_keys(ctx.config, {"grid", "c", "tuning", "solver", "ilamm_max_stages", "seed"}, "config");
    ExperimentGrid grid = parse_grid(block(ctx.config, "grid"));
    grid.seed = ctx.seed;
    grid.solver = parse_solver(block(ctx.config, "solver"));
    grid.ilamm_max_stages = static_cast<int>(get_integer(ctx.config, "ilamm_max_stages", "config", 20));

    const json& c_block = block(ctx.config, "c");
    check_keys(c_block, {"lasso", "scad", "mcp"}, "c");
    for (const auto& [key, value] : c_block.items()) {
        grid.c_values[parse_penalty_kind(key)] = get_number(c_block, key, "c", 0.0);
    }

    const TuningSpec tuning = parse_tuning(block(ctx.config, "tuning"), ctx.seed);
    json tuning_log = json::array();
    grid.design_c_values.assign(grid.designs.size(), {});
    for (Method m : grid.methods) {
        const auto kind = penalty_of(m);
        if (!kind || grid.c_values.contains(*kind)) {
            continue;
        }
        for (std::size_t d = 0; d < grid.designs.size(); ++d) {
            if (grid.design_c_values[d].contains(*kind)) {
                continue;
            }
            const CvResult cv = tune_c(grid, grid.designs[d], *kind, tuning, ctx.threads);
            grid.design_c_values[d][*kind] = cv.chosen_c;
            tuning_log.push_back(json{{"design", grid.designs[d].name()},
                                      {"penalty", to_string(*kind)},
                                      {"c_grid", cv.c_grid},
                                      {"criterion", cv.criterion},
                                      {"chosen_c", cv.chosen_c}});
            ctx.out << "tuned " << to_string(*kind) << " on " << grid.designs[d].name() << ": c = " << cv.chosen_c
                    << "\n";
        }
    }
    grid.validate();

    const fs::path results_path = ctx.out_dir / "results.csv";
    std::ofstream results(results_path, std::ios::binary);
    if (!results) {
        throw IoError("cannot write '" + results_path.string() + "'");
    }
    write_row_header(results);
    results.flush();
    const ExperimentResult result = run_experiment(grid, ctx.threads, [&](const ExperimentRow& row) {
        write_row(results, row);
        results.flush();
    });
    results.close();
    if (!results) {
        throw IoError("write failed for '" + results_path.string() + "'");
    }

    json c_used = json::array();
    for (std::size_t d = 0; d < grid.designs.size(); ++d) {
        json entry{{"design", grid.designs[d].name()}};
        for (Method m : grid.methods) {
            if (auto kind = penalty_of(m)) {
                entry[to_string(*kind)] = grid.c_for(d, *kind);
            }
        }
        c_used.push_back(entry);
    }
    json cells = json::array();
    for (const auto& s : result.summaries) {
        cells.push_back(json{{"design", s.design},
                             {"method", s.method},
                             {"n", s.n},
                             {"p", s.p},
                             {"reps", s.reps},
                             {"failures", s.failures},
                             {"median_l2", s.l2},
                             {"median_tp", s.tp},
                             {"median_fp", s.fp},
                             {"median_sensitivity", s.sensitivity},
                             {"median_specificity", s.specificity},
                             {"median_iters1", s.iters1},
                             {"median_iters2", s.iters2},
                             {"median_seconds", s.seconds}});
    }
    write_json(ctx.out_dir / "summary.json", json{{"seed", ctx.seed},
                                                  {"reps", grid.reps},
                                                  {"c", c_used},
                                                  {"cv_criterion", cv_criterion_name},
                                                  {"tuning", tuning_log},
                                                  {"failures", result.failures},
                                                  {"cells", cells}});

    if (is_table1_shape(grid)) {
        std::string table = "method,l2,tp,fp\n";
        for (const auto& s : result.summaries) {
            table += s.method + "," + format_double(s.l2) + "," + format_double(s.tp) + "," + format_double(s.fp) + "\n";
        }
        write_text_file(ctx.out_dir / "table1.csv", table);
    }

    ctx.out << "experiment: " << result.rows.size() << " rows, " << result.failures << " failed\n";
    return result.failures > 0 ? exit_partial : exit_ok;
}

int cmd_diagnose(Context& ctx)
{
    check_keys(ctx.config, {"data", "beta_star", "lse", "seed"}, "config");
    const LoadedData data = load_data(required_block(ctx.config, "data"), ctx.config_dir, ctx.seed);
    const json& lse = block(ctx.config, "lse");
    check_keys(lse, {"m", "r", "samples"}, "lse");
    const auto m = get_integer(lse, "m", "lse", 3);
    const double r = get_number(lse, "r", "lse", 0.5);
    const auto samples = get_integer(lse, "samples", "lse", 20);

    Vector beta_star;
    if (auto it = ctx.config.find("beta_star"); it != ctx.config.end()) {
        if (!it->is_array()) {
            throw ConfigError("beta_star must be an array of numbers");
        }
        beta_star.resize(static_cast<Index>(it->size()));
        for (std::size_t j = 0; j < it->size(); ++j) {
            if (!(*it)[j].is_number()) {
                throw ConfigError("beta_star entries must be numbers");
            }
            beta_star[static_cast<Index>(j)] = (*it)[j].get<double>();
        }
    } else if (data.truth) {
        beta_star = *data.truth;
    } else {
        throw ConfigError("diagnose needs beta_star or a truth sidecar");
    }
    if (beta_star.size() != data.dataset.p()) {
        throw ConfigError("beta_star length does not match the data");
    }

    const LseReport report = lse_probe(data.dataset, beta_star, static_cast<Index>(m), r,
                                       static_cast<int>(samples), ctx.seed);
    write_json(ctx.out_dir / "lse.json", json{{"m", report.m},
                                              {"r", report.r},
                                              {"rho_minus", report.rho_minus},
                                              {"rho_plus", report.rho_plus},
                                              {"probes", report.probes},
                                              {"beta_points", report.beta_points},
                                              {"seed", report.seed},
                                              {"grad_check", grad_check(data.dataset, beta_star)}});
    ctx.out << "lse: rho_minus = " << report.rho_minus << ", rho_plus = " << report.rho_plus << "\n";
    return exit_ok;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Two-stage LAMM for folded-concave penalized Cox regression", "tlamm"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = default_thread_count();
    std::uint64_t seed = 0;
    bool seed_given = false;

    struct Sub
    {
        const char* name;
        const char* help;
        int (*fn)(Context&);
    };
    const Sub subs[] = {
        {"simulate", "Simulate a survival dataset (data.csv, truth.json)", cmd_simulate},
        {"fit", "Fit TLAMM or I-LAMM (beta.csv, trace.csv, summary.json)", cmd_fit},
        {"cv", "Cross-validate c in lambda = c sqrt(log p / n) (cv.csv, cv.json)", cmd_cv},
        {"experiment", "Run a simulation grid (results.csv, summary.json, table1.csv)", cmd_experiment},
        {"diagnose", "Probe localized sparse eigenvalues (lse.json)", cmd_diagnose},
    };
    std::vector<std::pair<CLI::App*, int (*)(Context&)>> commands;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "Output directory")->required();
        sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Master seed (overrides the config)")->each([&](const std::string&) {
            seed_given = true;
        });
        commands.emplace_back(sub, s.fn);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_config;
    }

    try {
        for (const auto& [sub, fn] : commands) {
            if (!sub->parsed()) {
                continue;
            }
            const fs::path cfg(config_path);
            Context ctx{read_json_file(cfg), cfg.parent_path(), fs::path(out_dir), threads, 1, out};
            if (!ctx.config.is_object()) {
                throw ConfigError("configuration must be a JSON object");
            }
            ctx.seed = seed_given ? seed : get_seed(ctx.config, 1);
            std::error_code ec;
            fs::create_directories(ctx.out_dir, ec);
            if (ec) {
                throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
            }
            return fn(ctx);
        }
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const CapabilityError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const ParseError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const UndefinedMetricError& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const fs::filesystem_error& e) {
        err << "data error: " << e.what() << "\n";
        return exit_data;
    } catch (const Error& e) {
        err << "solver error: " << e.what() << "\n";
        return exit_solver;
    }
    return exit_config;
}

} // namespace tlamm::cli
