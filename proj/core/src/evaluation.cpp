#include "tlamm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tlamm/cox_model.hpp"
#include "tlamm/error.hpp"
#include "tlamm/parallel.hpp"
#include "tlamm/random.hpp"

namespace tlamm {

double l2_error(const Vector& estimate, const Vector& truth)
{
    if (estimate.size() != truth.size()) {
        throw ParameterError("l2_error: length mismatch (" + std::to_string(estimate.size()) + " vs "
                             + std::to_string(truth.size()) + ")");
    }
    return (estimate - truth).norm();
}

SelectionMetrics selection_metrics(const Vector& estimate, const std::vector<Index>& true_support,
                                   double zero_tol)
{
    const Index p = estimate.size();
    std::vector<bool> truth(static_cast<std::size_t>(p), false);
    for (Index j : true_support) {
        if (j < 0 || j >= p) {
            throw ParameterError("true support index out of range");
        }
        truth[static_cast<std::size_t>(j)] = true;
    }

    SelectionMetrics m;
    for (Index j = 0; j < p; ++j) {
        const bool selected = std::abs(estimate[j]) > zero_tol;
        const bool relevant = truth[static_cast<std::size_t>(j)];
        m.tp += selected && relevant;
        m.fp += selected && !relevant;
        m.fn += !selected && relevant;
        m.tn += !selected && !relevant;
    }
    m.sensitivity = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 1.0;
    m.specificity = m.tn + m.fp > 0 ? static_cast<double>(m.tn) / static_cast<double>(m.tn + m.fp) : 1.0;
    return m;
}

namespace {

class Fenwick
{
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

    void add(std::size_t i)
    {
        for (++i; i < tree_.size(); i += i & (~i + 1)) {
            ++tree_[i];
        }
    }

    /// Count of inserted ranks < i.
    std::int64_t prefix(std::size_t i) const
    {
        std::int64_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) {
            s += tree_[i];
        }
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

} // namespace

double concordance_index_scores(const Vector& scores, const SurvivalDataset& data)
{
    const Index n = data.n();
    if (scores.size() != n) {
        throw ParameterError("concordance: score length does not match the dataset");
    }
    const auto& t = data.times();
    const auto& d = data.status();

    // Dense ranks of the scores.
    std::vector<double> sorted(scores.data(), scores.data() + n);
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    auto rank = [&](Index i) {
        return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), scores[i]) - sorted.begin());
    };

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return t[a] > t[b]; });

    // Sweep descending time; the tree holds subjects with strictly larger times.
    Fenwick tree(sorted.size());
    std::int64_t inserted = 0;
    std::int64_t concordant = 0;
    std::int64_t discordant = 0;
    std::size_t pos = 0;
    while (pos < order.size()) {
        std::size_t end = pos;
        while (end < order.size() && t[order[end]] == t[order[pos]]) {
            ++end;
        }
        for (std::size_t k = pos; k < end; ++k) {
            const Index i = order[k];
            if (d[i] != 1) {
                continue;
            }
            const std::size_t r = rank(i);
            const std::int64_t lower = tree.prefix(r);
            const std::int64_t not_higher = tree.prefix(r + 1);
            concordant += lower;
            discordant += inserted - not_higher;
        }
        for (std::size_t k = pos; k < end; ++k) {
            tree.add(rank(order[k]));
            ++inserted;
        }
        pos = end;
    }

    if (concordant + discordant == 0) {
        throw UndefinedMetricError("concordance index undefined: no concordant or discordant pairs");
    }
    return static_cast<double>(concordant) / static_cast<double>(concordant + discordant);
}

double concordance_index(const Vector& beta, const SurvivalDataset& data)
{
    if (beta.size() != data.p()) {
        throw ParameterError("concordance: coefficient length does not match the dataset");
    }
    return concordance_index_scores(data.covariates() * beta, data);
}

double lambda_from_c(double c, Index n, Index p)
{
    return c * std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n));
}

std::vector<double> default_c_grid()
{
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k) {
        grid.push_back(0.05 * k);
    }
    return grid;
}

std::vector<int> assign_folds(Index n, int folds, std::uint64_t seed)
{
    if (folds < 2 || folds > n) {
        throw ParameterError("fold count must lie in [2, n]");
    }
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with an explicit index draw keeps the split identical across standard libraries.
    for (std::size_t i = perm.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[j]);
    }
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < perm.size(); ++k) {
        fold_of[static_cast<std::size_t>(perm[k])] = static_cast<int>(k % static_cast<std::size_t>(folds));
    }
    return fold_of;
}

CvResult cross_validate(const SurvivalDataset& data, PenaltyKind kind, const CvConfig& cv,
                        const SolverConfig& solver, int threads)
{
    if (cv.c_grid.empty()) {
        throw ParameterError("cross-validation grid is empty");
    }
    for (double c : cv.c_grid) {
        if (!(c > 0.0)) {
            throw ParameterError("cross-validation grid values must be positive");
        }
    }
    solver.validate();
    data.require_events();

    CvResult result;
    result.c_grid = cv.c_grid;

    const Index n = data.n();
    std::vector<std::vector<Index>> train_rows;
    bool ok = false;
    for (int attempt = 0; attempt < cv.max_resplits && !ok; ++attempt) {
        const std::uint64_t seed = attempt == 0 ? cv.seed : derive_seed(cv.seed, {static_cast<std::uint64_t>(attempt)});
        result.fold_of = assign_folds(n, cv.folds, seed);
        result.fold_seed = seed;
        train_rows.assign(static_cast<std::size_t>(cv.folds), {});
        for (Index i = 0; i < n; ++i) {
            for (int k = 0; k < cv.folds; ++k) {
                if (result.fold_of[static_cast<std::size_t>(i)] != k) {
                    train_rows[static_cast<std::size_t>(k)].push_back(i);
                }
            }
        }
        ok = std::all_of(train_rows.begin(), train_rows.end(), [&](const std::vector<Index>& rows) {
            return std::any_of(rows.begin(), rows.end(), [&](Index i) { return data.status()[i] == 1; });
        });
    }
    if (!ok) {
        throw DataError("cross-validation: a training fold has no events after "
                        + std::to_string(cv.max_resplits) + " splits");
    }

    std::vector<SurvivalDataset> train_sets;
    for (const auto& rows : train_rows) {
        train_sets.push_back(data.subset(rows));
    }
    const CoxObjective full(data);
    std::vector<CoxObjective> train_objectives;
    train_objectives.reserve(train_sets.size());
    for (const auto& set : train_sets) {
        train_objectives.emplace_back(set);
    }

    const std::size_t folds = train_sets.size();
    const std::size_t cells = cv.c_grid.size() * folds;
    std::vector<double> contribution(cells, 0.0);
    parallel_for(cells, threads, [&](std::size_t cell) {
        const std::size_t ci = cell / folds;
        const std::size_t k = cell % folds;
        const double lambda = lambda_from_c(cv.c_grid[ci], n, data.p());
        const PenaltySpec spec = PenaltySpec::make(kind, lambda, cv.shape);
        const FitResult fit = fit_tlamm(train_objectives[k], spec, solver);
        const double n_all = static_cast<double>(n);
        const double n_train = static_cast<double>(train_sets[k].n());
        contribution[cell] = n_all * full.value(fit.beta) - n_train * train_objectives[k].value(fit.beta);
    });

    result.criterion.assign(cv.c_grid.size(), 0.0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        result.criterion[cell / folds] += contribution[cell];
    }

    // Smallest c among the minimizers.
    std::vector<std::size_t> idx(cv.c_grid.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::size_t best = idx.front();
    for (std::size_t i : idx) {
        const double ci = result.criterion[i];
        const double cb = result.criterion[best];
        if (ci < cb || (ci == cb && cv.c_grid[i] < cv.c_grid[best])) {
            best = i;
        }
    }
    result.chosen_c = cv.c_grid[best];
    result.chosen_lambda = lambda_from_c(result.chosen_c, n, data.p());
    return result;
}

} // namespace tlamm
