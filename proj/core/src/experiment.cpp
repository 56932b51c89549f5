#include "tlamm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <limits>
#include <mutex>
#include <ostream>
#include <tuple>

#include "tlamm/cox_model.hpp"
#include "tlamm/error.hpp"
#include "tlamm/parallel.hpp"
#include "tlamm/random.hpp"

namespace tlamm {

std::string to_string(Method method)
{
    switch (method) {
    case Method::Oracle:
        return "oracle";
    case Method::Lasso:
        return "lasso";
    case Method::TlammScad:
        return "tlamm-scad";
    case Method::TlammMcp:
        return "tlamm-mcp";
    case Method::IlammScad:
        return "ilamm-scad";
    case Method::IlammMcp:
        return "ilamm-mcp";
    }
    return "unknown";
}

Method parse_method(const std::string& name)
{
    for (Method m : {Method::Oracle, Method::Lasso, Method::TlammScad, Method::TlammMcp, Method::IlammScad,
                     Method::IlammMcp}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ParameterError("unknown method '" + name
                         + "' (expected oracle, lasso, tlamm-scad, tlamm-mcp, ilamm-scad, ilamm-mcp)");
}

std::optional<PenaltyKind> penalty_of(Method method)
{
    switch (method) {
    case Method::Oracle:
        return std::nullopt;
    case Method::Lasso:
        return PenaltyKind::Lasso;
    case Method::TlammScad:
    case Method::IlammScad:
        return PenaltyKind::Scad;
    case Method::TlammMcp:
    case Method::IlammMcp:
        return PenaltyKind::Mcp;
    }
    return std::nullopt;
}

void ExperimentGrid::validate() const
{
    if (n_values.empty() || p_values.empty() || designs.empty() || methods.empty()) {
        throw ParameterError("experiment grid needs at least one n, p, design and method");
    }
    if (reps < 1) {
        throw ParameterError("experiment grid needs reps >= 1");
    }
    for (Index p : p_values) {
        if (p < support_size) {
            throw ParameterError("every p in the grid must be at least the support size");
        }
    }
    for (const auto& d : designs) {
        d.validate();
    }
    if (!design_c_values.empty() && design_c_values.size() != designs.size()) {
        throw ParameterError("per-design c values must list one entry per design");
    }
    for (Method m : methods) {
        if (auto kind = penalty_of(m)) {
            for (std::size_t d = 0; d < designs.size(); ++d) {
                if (!(c_for(d, *kind) > 0.0)) {
                    throw ParameterError("c for penalty '" + to_string(*kind) + "' must be positive");
                }
            }
        }
    }
    solver.validate();
}

double ExperimentGrid::c_for(std::size_t design_index, PenaltyKind kind) const
{
    if (design_index < design_c_values.size()) {
        if (auto it = design_c_values[design_index].find(kind); it != design_c_values[design_index].end()) {
            return it->second;
        }
    }
    if (auto it = c_values.find(kind); it != c_values.end()) {
        return it->second;
    }
    throw ParameterError("no c value configured for penalty '" + to_string(kind) + "'");
}

std::uint64_t dataset_seed(std::uint64_t master, std::size_t design_index, Index n, Index p, int rep)
{
    return derive_seed(master, {design_index, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(p),
                                static_cast<std::uint64_t>(rep)});
}

namespace {

struct Unit
{
    std::size_t design_index;
    Index n;
    Index p;
    int rep;
};

ExperimentRow run_method(const ExperimentGrid& grid, std::size_t design_index, Method method,
                         const CoxObjective& cox, const Vector& truth, const std::vector<Index>& support)
{
    ExperimentRow row;
    row.method = to_string(method);
    const Index n = cox.data().n();
    const Index p = cox.data().p();
    const auto start = std::chrono::steady_clock::now();
    try {
        Vector beta;
        if (method == Method::Oracle) {
            beta = fit_restricted(cox.data(), support);
        } else {
            const PenaltyKind kind = *penalty_of(method);
            const PenaltySpec spec = PenaltySpec::make(kind, lambda_from_c(grid.c_for(design_index, kind), n, p));
            const bool iterative = method == Method::IlammScad || method == Method::IlammMcp;
            const FitResult fit = iterative ? fit_ilamm(cox, spec, grid.solver, grid.ilamm_max_stages)
                                            : fit_tlamm(cox, spec, grid.solver);
            beta = fit.beta;
            row.iters1 = fit.iterations_stage1;
            row.iters2 = fit.iterations_stage2;
        }
        const auto metrics = selection_metrics(beta, support);
        row.l2 = l2_error(beta, truth);
        row.tp = metrics.tp;
        row.fp = metrics.fp;
        row.sensitivity = metrics.sensitivity;
        row.specificity = metrics.specificity;
    } catch (const Error& e) {
        row.failed = true;
        row.error = e.what();
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return row;
}

} // namespace

ExperimentResult run_experiment(const ExperimentGrid& grid, int threads, const RowSink& sink)
{
    grid.validate();

    std::vector<Unit> units;
    for (std::size_t d = 0; d < grid.designs.size(); ++d) {
        for (Index n : grid.n_values) {
            for (Index p : grid.p_values) {
                for (int rep = 0; rep < grid.reps; ++rep) {
                    units.push_back({d, n, p, rep});
                }
            }
        }
    }

    std::vector<std::vector<ExperimentRow>> results(units.size());
    std::vector<bool> done(units.size(), false);
    std::size_t flushed = 0;
    std::mutex merge;

    parallel_for(units.size(), threads, [&](std::size_t u) {
        const Unit& unit = units[u];
        SimulationConfig sim;
        sim.n = unit.n;
        sim.p = unit.p;
        sim.support_size = grid.support_size;
        sim.signal = SimulationConfig::constant_signal(grid.support_size, grid.signal);
        sim.design = grid.designs[unit.design_index];
        sim.censoring_low = grid.censoring_low;
        sim.censoring_high = grid.censoring_high;
        sim.seed = dataset_seed(grid.seed, unit.design_index, unit.n, unit.p, unit.rep);

        std::vector<ExperimentRow> rows;
        const SimulatedData simulated = simulate_dataset(sim);
        const std::vector<Index> support = support_of(simulated.true_beta);
        const CoxObjective cox(simulated.dataset);
        for (Method m : grid.methods) {
            ExperimentRow row = run_method(grid, unit.design_index, m, cox, simulated.true_beta, support);
            row.design = sim.design.name();
            row.n = unit.n;
            row.p = unit.p;
            row.rep = unit.rep;
            rows.push_back(std::move(row));
        }

        std::lock_guard lock(merge);
        results[u] = std::move(rows);
        done[u] = true;
        while (flushed < units.size() && done[flushed]) {
            if (sink) {
                for (const auto& row : results[flushed]) {
                    sink(row);
                }
            }
            ++flushed;
        }
    });

    ExperimentResult out;
    for (auto& rows : results) {
        for (auto& row : rows) {
            out.failures += row.failed;
            out.rows.push_back(std::move(row));
        }
    }
    out.summaries = summarize(out.rows);
    return out;
}

double median(std::vector<double> values)
{
    if (values.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<CellSummary> summarize(const std::vector<ExperimentRow>& rows)
{
    using Key = std::tuple<std::string, std::string, Index, Index>;
    std::vector<Key> keys;
    std::map<Key, std::vector<const ExperimentRow*>> groups;
    for (const auto& row : rows) {
        Key key{row.design, row.method, row.n, row.p};
        if (!groups.contains(key)) {
            keys.push_back(key);
        }
        groups[key].push_back(&row);
    }

    std::vector<CellSummary> out;
    for (const auto& key : keys) {
        CellSummary s;
        std::tie(s.design, s.method, s.n, s.p) = key;
        std::vector<double> l2, tp, fp, sens, spec, it1, it2, secs;
        for (const ExperimentRow* r : groups[key]) {
            if (r->failed) {
                ++s.failures;
                continue;
            }
            ++s.reps;
            l2.push_back(r->l2);
            tp.push_back(static_cast<double>(r->tp));
            fp.push_back(static_cast<double>(r->fp));
            sens.push_back(r->sensitivity);
            spec.push_back(r->specificity);
            it1.push_back(r->iters1);
            it2.push_back(r->iters2);
            secs.push_back(r->seconds);
        }
        s.l2 = median(l2);
        s.tp = median(tp);
        s.fp = median(fp);
        s.sensitivity = median(sens);
        s.specificity = median(spec);
        s.iters1 = median(it1);
        s.iters2 = median(it2);
        s.seconds = median(secs);
        out.push_back(std::move(s));
    }
    return out;
}

void write_row_header(std::ostream& out)
{
    out << "design,penalty,n,p,rep,l2,tp,fp,sens,spec,iters1,iters2,seconds\n";
}

namespace {

std::string format_double(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

void write_row(std::ostream& out, const ExperimentRow& row)
{
    out << row.design << ',' << row.method << ',' << row.n << ',' << row.p << ',' << row.rep << ',';
    if (row.failed) {
        out << "nan,,,,,,," << format_double(row.seconds) << '\n';
        return;
    }
    out << format_double(row.l2) << ',' << row.tp << ',' << row.fp << ',' << format_double(row.sensitivity)
        << ',' << format_double(row.specificity) << ',' << row.iters1 << ',' << row.iters2 << ','
        << format_double(row.seconds) << '\n';
}

CvResult tune_c(const ExperimentGrid& grid, const Design& design, PenaltyKind kind, const TuningSpec& tuning,
                int threads)
{
    if (tuning.datasets < 1) {
        throw ParameterError("tuning needs at least one dataset");
    }
    CvResult combined;
    for (int d = 0; d < tuning.datasets; ++d) {
        SimulationConfig sim;
        sim.n = tuning.n;
        sim.p = tuning.p;
        sim.support_size = grid.support_size;
        sim.signal = SimulationConfig::constant_signal(grid.support_size, grid.signal);
        sim.design = design;
        sim.censoring_low = grid.censoring_low;
        sim.censoring_high = grid.censoring_high;
        sim.seed = derive_seed(tuning.seed, {static_cast<std::uint64_t>(d), 0});
        const SimulatedData data = simulate_dataset(sim);

        CvConfig cv = tuning.cv;
        cv.seed = derive_seed(tuning.seed, {static_cast<std::uint64_t>(d), 1});
        CvResult one = cross_validate(data.dataset, kind, cv, grid.solver, threads);
        if (d == 0) {
            combined = std::move(one);
        } else {
            for (std::size_t i = 0; i < combined.criterion.size(); ++i) {
                combined.criterion[i] += one.criterion[i];
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < combined.criterion.size(); ++i) {
        if (combined.criterion[i] < combined.criterion[best]
            || (combined.criterion[i] == combined.criterion[best] && combined.c_grid[i] < combined.c_grid[best])) {
            best = i;
        }
    }
    combined.chosen_c = combined.c_grid[best];
    combined.chosen_lambda = lambda_from_c(combined.chosen_c, tuning.n, tuning.p);
    return combined;
}

} // namespace tlamm
