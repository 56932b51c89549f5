#include "config.hpp"

#include <fstream>
#include <sstream>

namespace tlamm::cli {

namespace {

std::string key_path(std::string_view where, std::string_view key)
{
    return std::string(where) + "." + std::string(key);
}

const json* find(const json& node, std::string_view key)
{
    auto it = node.find(std::string(key));
    return it == node.end() ? nullptr : &*it;
}

} // namespace

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out) {
        throw IoError("cannot write '" + path.string() + "'");
    }
}

void check_keys(const json& node, std::initializer_list<std::string_view> allowed, std::string_view where)
{
    if (!node.is_object()) {
        throw ConfigError(std::string(where) + " must be a JSON object");
    }
    for (const auto& [key, value] : node.items()) {
        bool known = false;
        for (auto a : allowed) {
            known = known || key == a;
        }
        if (!known) {
            throw ConfigError("unknown key '" + key_path(where, key) + "'");
        }
    }
}

double get_number(const json& node, std::string_view key, std::string_view where, double fallback)
{
    const json* v = find(node, key);
    if (!v) {
        return fallback;
    }
    if (!v->is_number()) {
        throw ConfigError(key_path(where, key) + " must be a number");
    }
    return v->get<double>();
}

std::int64_t get_integer(const json& node, std::string_view key, std::string_view where, std::int64_t fallback)
{
    const json* v = find(node, key);
    if (!v) {
        return fallback;
    }
    if (!v->is_number_integer()) {
        throw ConfigError(key_path(where, key) + " must be an integer");
    }
    return v->get<std::int64_t>();
}

std::string get_string(const json& node, std::string_view key, std::string_view where, std::string fallback)
{
    const json* v = find(node, key);
    if (!v) {
        return fallback;
    }
    if (!v->is_string()) {
        throw ConfigError(key_path(where, key) + " must be a string");
    }
    return v->get<std::string>();
}

std::uint64_t get_seed(const json& node, std::uint64_t fallback)
{
    const json* v = find(node, "seed");
    if (!v) {
        return fallback;
    }
    if (!v->is_number_unsigned()) {
        throw ConfigError("seed must be a non-negative integer");
    }
    return v->get<std::uint64_t>();
}

Design parse_design(const json& node, std::string_view where)
{
    if (node.is_string()) {
        return parse_design(json{{"kind", node}}, where);
    }
    check_keys(node, {"kind", "rho"}, where);
    const std::string kind = get_string(node, "kind", where, "independent");
    const double rho = get_number(node, "rho", where, 0.0);
    Design d;
    if (kind == "independent") {
        if (node.contains("rho")) {
            throw ConfigError(key_path(where, "rho") + " is not used by the independent design");
        }
        d = Design::independent();
    } else if (kind == "constant") {
        d = Design::constant_correlation(rho);
    } else if (kind == "autoregressive") {
        d = Design::autoregressive(rho);
    } else {
        throw ConfigError(key_path(where, "kind") + " must be independent, constant or autoregressive");
    }
    d.validate();
    return d;
}

namespace {

std::pair<double, double> parse_censoring(const json& node, std::string_view where)
{
    if (!node.is_array() || node.size() != 2 || !node[0].is_number() || !node[1].is_number()) {
        throw ConfigError(std::string(where) + " must be a two-number array [low, high]");
    }
    return {node[0].get<double>(), node[1].get<double>()};
}

Index positive_index(const json& node, std::string_view key, std::string_view where, Index fallback)
{
    const auto v = get_integer(node, key, where, fallback);
    if (v < 1) {
        throw ConfigError(key_path(where, key) + " must be a positive integer");
    }
    return static_cast<Index>(v);
}

} // namespace

SimulationConfig parse_simulation(const json& node, std::uint64_t seed)
{
    constexpr std::string_view where = "simulation";
    check_keys(node, {"n", "p", "support_size", "signal", "design", "censoring"}, where);
    SimulationConfig sim;
    sim.n = positive_index(node, "n", where, sim.n);
    sim.p = positive_index(node, "p", where, sim.p);
    sim.support_size = positive_index(node, "support_size", where, std::min<Index>(10, sim.p));
    sim.signal = SimulationConfig::constant_signal(sim.support_size, 0.8);
    if (const json* s = find(node, "signal")) {
        if (s->is_number()) {
            sim.signal = SimulationConfig::constant_signal(sim.support_size, s->get<double>());
        } else if (s->is_array()) {
            sim.signal.clear();
            for (const auto& v : *s) {
                if (!v.is_number()) {
                    throw ConfigError("simulation.signal entries must be numbers");
                }
                sim.signal.push_back(v.get<double>());
            }
        } else {
            throw ConfigError("simulation.signal must be a number or an array of numbers");
        }
    }
    if (const json* d = find(node, "design")) {
        sim.design = parse_design(*d, "simulation.design");
    }
    if (const json* c = find(node, "censoring")) {
        std::tie(sim.censoring_low, sim.censoring_high) = parse_censoring(*c, "simulation.censoring");
    }
    sim.seed = seed;
    sim.validate();
    return sim;
}

SolverConfig parse_solver(const json& node)
{
    constexpr std::string_view where = "solver";
    check_keys(node, {"phi0", "gamma_u", "eps1", "eps2", "max_iter_stage", "max_phi", "stop_mode"}, where);
    SolverConfig cfg;
    cfg.phi0 = get_number(node, "phi0", where, cfg.phi0);
    cfg.gamma_u = get_number(node, "gamma_u", where, cfg.gamma_u);
    cfg.eps1 = get_number(node, "eps1", where, cfg.eps1);
    cfg.eps2 = get_number(node, "eps2", where, cfg.eps2);
    cfg.max_iter_stage = static_cast<int>(get_integer(node, "max_iter_stage", where, cfg.max_iter_stage));
    cfg.max_phi = get_number(node, "max_phi", where, cfg.max_phi);
    cfg.stop_mode = parse_stop_mode(get_string(node, "stop_mode", where, to_string(cfg.stop_mode)));
    cfg.validate();
    return cfg;
}

PenaltySpec PenaltyRequest::resolve(Index n, Index p) const
{
    if (lambda.has_value() == c.has_value()) {
        throw ConfigError("penalty needs exactly one of 'lambda' or 'c'");
    }
    const double l = lambda ? *lambda : lambda_from_c(*c, n, p);
    PenaltySpec spec = PenaltySpec::make(kind, l, shape);
    spec.validate();
    return spec;
}

PenaltyRequest parse_penalty(const json& node)
{
    constexpr std::string_view where = "penalty";
    check_keys(node, {"kind", "a", "gamma", "lambda", "c"}, where);
    PenaltyRequest req;
    req.kind = parse_penalty_kind(get_string(node, "kind", where, "scad"));
    if (node.contains("a") && req.kind != PenaltyKind::Scad) {
        throw ConfigError("penalty.a applies to SCAD only");
    }
    if (node.contains("gamma") && req.kind != PenaltyKind::Mcp) {
        throw ConfigError("penalty.gamma applies to MCP only");
    }
    req.shape = req.kind == PenaltyKind::Scad ? get_number(node, "a", where, 0.0)
                                              : get_number(node, "gamma", where, 0.0);
    if (node.contains("lambda")) {
        req.lambda = get_number(node, "lambda", where, 0.0);
    }
    if (node.contains("c")) {
        req.c = get_number(node, "c", where, 0.0);
    }
    PenaltySpec::make(req.kind, 1.0, req.shape).validate();
    return req;
}

Vector read_truth(const std::filesystem::path& path)
{
    const json doc = read_json_file(path);
    if (!doc.is_object() || !doc.contains("true_beta") || !doc["true_beta"].is_array()) {
        throw DataError("'" + path.string() + "' has no true_beta array");
    }
    const auto& arr = doc["true_beta"];
    Vector beta(static_cast<Index>(arr.size()));
    for (std::size_t j = 0; j < arr.size(); ++j) {
        if (!arr[j].is_number()) {
            throw DataError("'" + path.string() + "': true_beta entries must be numbers");
        }
        beta[static_cast<Index>(j)] = arr[j].get<double>();
    }
    return beta;
}

LoadedData load_data(const json& node, const std::filesystem::path& base_dir, std::uint64_t seed)
{
    check_keys(node, {"csv", "truth", "simulation"}, "data");
    const bool has_csv = node.contains("csv");
    const bool has_sim = node.contains("simulation");
    if (has_csv == has_sim) {
        throw ConfigError("data needs exactly one of 'csv' or 'simulation'");
    }
    if (has_sim) {
        if (node.contains("truth")) {
            throw ConfigError("data.truth applies to csv input only");
        }
        SimulatedData sim = simulate_dataset(parse_simulation(node["simulation"], seed));
        return {std::move(sim.dataset), std::move(sim.true_beta)};
    }

    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    const auto csv = resolve(get_string(node, "csv", "data", ""));
    if (!std::filesystem::exists(csv)) {
        throw IoError("data file '" + csv.string() + "' does not exist");
    }
    LoadedData out{load_csv(csv), std::nullopt};
    std::filesystem::path truth;
    if (node.contains("truth")) {
        truth = resolve(get_string(node, "truth", "data", ""));
    } else if (auto sidecar = csv.parent_path() / "truth.json"; std::filesystem::exists(sidecar)) {
        truth = sidecar;
    }
    if (!truth.empty()) {
        out.truth = read_truth(truth);
        if (out.truth->size() != out.dataset.p()) {
            throw DataError("truth '" + truth.string() + "' has " + std::to_string(out.truth->size())
                            + " coefficients but the data has p = " + std::to_string(out.dataset.p()));
        }
    }
    return out;
}

CvConfig parse_cv(const json& node, std::uint64_t seed)
{
    constexpr std::string_view where = "cv";
    check_keys(node, {"folds", "c_grid", "max_resplits"}, where);
    CvConfig cv;
    cv.folds = static_cast<int>(get_integer(node, "folds", where, cv.folds));
    cv.max_resplits = static_cast<int>(get_integer(node, "max_resplits", where, cv.max_resplits));
    if (const json* g = find(node, "c_grid")) {
        if (!g->is_array() || g->empty()) {
            throw ConfigError("cv.c_grid must be a nonempty array of numbers");
        }
        cv.c_grid.clear();
        for (const auto& v : *g) {
            if (!v.is_number()) {
                throw ConfigError("cv.c_grid entries must be numbers");
            }
            cv.c_grid.push_back(v.get<double>());
        }
    }
    if (cv.max_resplits < 1) {
        throw ConfigError("cv.max_resplits must be at least 1");
    }
    cv.seed = seed;
    return cv;
}

} // namespace tlamm::cli
