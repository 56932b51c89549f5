#include "tlamm/survival_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include "tlamm/error.hpp"
#include "tlamm/random.hpp"

namespace tlamm {

SurvivalDataset::SurvivalDataset(Vector times, Eigen::VectorXi status, Matrix covariates)
    : times_(std::move(times)), status_(std::move(status)), covariates_(std::move(covariates))
{
    if (times_.size() == 0) {
        throw DataError("dataset must contain at least one observation");
    }
    if (status_.size() != times_.size() || covariates_.rows() != times_.size()) {
        throw DataError("times, status and covariate rows must have equal length (times="
                        + std::to_string(times_.size()) + ", status=" + std::to_string(status_.size())
                        + ", rows=" + std::to_string(covariates_.rows()) + ")");
    }
    if (covariates_.cols() == 0) {
        throw DataError("dataset must contain at least one covariate");
    }
    for (Index i = 0; i < n(); ++i) {
        if (!std::isfinite(times_[i]) || times_[i] <= 0.0) {
            throw DataError("observation " + std::to_string(i) + ": time must be finite and positive");
        }
        if (status_[i] != 0 && status_[i] != 1) {
            throw DataError("observation " + std::to_string(i) + ": status must be 0 or 1");
        }
        events_ += status_[i];
    }
    if (!covariates_.allFinite()) {
        throw DataError("covariates contain non-finite values");
    }
}

void SurvivalDataset::require_events() const
{
    if (events_ == 0) {
        throw DataError("no events: every observation is censored");
    }
}

SurvivalDataset SurvivalDataset::subset(std::span<const Index> rows) const
{
    const auto m = static_cast<Index>(rows.size());
    Vector t(m);
    Eigen::VectorXi d(m);
    Matrix x(m, p());
    for (Index k = 0; k < m; ++k) {
        const Index i = rows[static_cast<std::size_t>(k)];
        t[k] = times_[i];
        d[k] = status_[i];
        x.row(k) = covariates_.row(i);
    }
    return SurvivalDataset(std::move(t), std::move(d), std::move(x));
}

SurvivalDataset SurvivalDataset::select_columns(std::span<const Index> cols) const
{
    Matrix x(n(), static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        x.col(static_cast<Index>(k)) = covariates_.col(cols[k]);
    }
    return SurvivalDataset(times_, status_, std::move(x));
}

double censoring_rate(const SurvivalDataset& data)
{
    return 1.0 - static_cast<double>(data.event_count()) / static_cast<double>(data.n());
}

RiskSetCache build_risk_cache(const SurvivalDataset& data)
{
    const Index n = data.n();
    const auto& t = data.times();
    const auto& d = data.status();

    RiskSetCache cache;
    cache.order.resize(static_cast<std::size_t>(n));
    std::iota(cache.order.begin(), cache.order.end(), Index{0});
    // Stable so that equal times keep file order; the numerics do not depend on it.
    std::stable_sort(cache.order.begin(), cache.order.end(),
                     [&](Index a, Index b) { return t[a] > t[b]; });

    // Walk ascending time (reverse of `order`); a block of equal times starting
    // at descending position k has risk set order[0, k + block).
    std::size_t pos = static_cast<std::size_t>(n);
    while (pos > 0) {
        std::size_t start = pos - 1;
        const double value = t[cache.order[start]];
        while (start > 0 && t[cache.order[start - 1]] == value) {
            --start;
        }
        EventGroup group{value, {}, static_cast<Index>(pos)};
        for (std::size_t k = start; k < pos; ++k) {
            const Index i = cache.order[k];
            if (d[i] == 1) {
                group.members.push_back(i);
            }
        }
        if (!group.members.empty()) {
            std::sort(group.members.begin(), group.members.end());
            cache.event_groups.push_back(std::move(group));
        }
        pos = start;
    }
    return cache;
}

void Design::validate() const
{
    if (kind == Kind::Independent) {
        return;
    }
    if (!(rho >= 0.0 && rho < 1.0)) {
        throw ParameterError("correlation rho must lie in [0, 1), got " + std::to_string(rho));
    }
}

std::string Design::name() const
{
    switch (kind) {
    case Kind::Independent:
        return "independent";
    case Kind::ConstantCorrelation:
        return "constant";
    case Kind::Autoregressive:
        return "autoregressive";
    }
    return "unknown";
}

void SimulationConfig::validate() const
{
    if (n < 1 || p < 1) {
        throw ParameterError("simulation requires n >= 1 and p >= 1");
    }
    if (support_size < 0 || support_size > p) {
        throw ParameterError("support size must lie in [0, p]");
    }
    if (static_cast<Index>(signal.size()) != support_size) {
        throw ParameterError("signal must list exactly support_size values");
    }
    for (double v : signal) {
        if (!std::isfinite(v)) {
            throw ParameterError("signal values must be finite");
        }
    }
    if (!(censoring_low < censoring_high) || !(censoring_low > 0.0)) {
        throw ParameterError("censoring window must satisfy 0 < low < high");
    }
    design.validate();
}

Matrix generate_covariates(const Design& design, Index n, Index p, std::uint64_t seed)
{
    if (n < 1 || p < 1) {
        throw ParameterError("generate_covariates requires n >= 1 and p >= 1");
    }
    design.validate();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix x(n, p);

    switch (design.kind) {
    case Design::Kind::Independent:
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < p; ++j) {
                x(i, j) = normal(rng);
            }
        }
        break;
    case Design::Kind::ConstantCorrelation: {
        const double shared = std::sqrt(design.rho);
        const double own = std::sqrt(1.0 - design.rho);
        for (Index i = 0; i < n; ++i) {
            const double z = normal(rng);
            for (Index j = 0; j < p; ++j) {
                x(i, j) = shared * z + own * normal(rng);
            }
        }
        break;
    }
    case Design::Kind::Autoregressive: {
        const double innovation = std::sqrt(1.0 - design.rho * design.rho);
        for (Index i = 0; i < n; ++i) {
            x(i, 0) = normal(rng);
            for (Index j = 1; j < p; ++j) {
                x(i, j) = design.rho * x(i, j - 1) + innovation * normal(rng);
            }
        }
        break;
    }
    }
    return x;
}

namespace {

double positive_exponential(std::mt19937_64& rng)
{
    std::exponential_distribution<double> exp1(1.0);
    double e = 0.0;
    while (e <= 0.0) {
        e = exp1(rng);
    }
    return e;
}

} // namespace

SimulatedData simulate_dataset(const SimulationConfig& config)
{
    config.validate();
    const Index n = config.n;
    const Index p = config.p;

    Matrix x = generate_covariates(config.design, n, p, derive_seed(config.seed, {0}));

    Vector beta = Vector::Zero(p);
    for (Index j = 0; j < config.support_size; ++j) {
        beta[j] = config.signal[static_cast<std::size_t>(j)];
    }
    const Vector eta = x.leftCols(config.support_size) * beta.head(config.support_size);

    std::mt19937_64 rng(derive_seed(config.seed, {1}));
    std::uniform_real_distribution<double> window(config.censoring_low, config.censoring_high);

    Vector times(n);
    Eigen::VectorXi status(n);
    for (Index i = 0; i < n; ++i) {
        const double scale = std::exp(eta[i]);
        const double event_time = positive_exponential(rng) / scale;
        const double u = window(rng);
        const double censor_time = positive_exponential(rng) * u * scale;
        times[i] = std::min(event_time, censor_time);
        status[i] = event_time <= censor_time ? 1 : 0;
    }
    return {SurvivalDataset(std::move(times), std::move(status), std::move(x)), std::move(beta)};
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_number(std::string_view field, std::size_t line, const char* column)
{
    field = trim(field);
    if (!field.empty() && field.front() == '+') {
        field.remove_prefix(1);
    }
    double value = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (field.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError("malformed number in column '" + std::string(column) + "': '"
                             + std::string(field) + "'",
                         line);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value in column '" + std::string(column) + "'", line);
    }
    return value;
}

} // namespace

SurvivalDataset load_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open '" + path.string() + "'", 0);
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("empty file '" + path.string() + "'", 1);
    }
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
    }
    const auto header = split_fields(line);
    if (header.size() < 3 || trim(header[0]) != "time" || trim(header[1]) != "status") {
        throw ParseError("header must be 'time,status,x1,...,xp'", 1);
    }
    const std::size_t p = header.size() - 2;
    std::vector<std::string> names;
    for (const auto& h : header) {
        names.emplace_back(trim(h));
    }

    std::vector<double> times;
    std::vector<int> status;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != p + 2) {
            throw ParseError("expected " + std::to_string(p + 2) + " fields, found "
                                 + std::to_string(fields.size()),
                             line_no);
        }
        const double t = parse_number(fields[0], line_no, "time");
        if (t <= 0.0) {
            throw ParseError("time must be positive", line_no);
        }
        const double d = parse_number(fields[1], line_no, "status");
        if (d != 0.0 && d != 1.0) {
            throw ParseError("status must be 0 or 1", line_no);
        }
        times.push_back(t);
        status.push_back(static_cast<int>(d));
        for (std::size_t j = 0; j < p; ++j) {
            values.push_back(parse_number(fields[j + 2], line_no, names[j + 2].c_str()));
        }
    }
    if (times.empty()) {
        throw ParseError("no data rows in '" + path.string() + "'", 0);
    }

    const auto n = static_cast<Index>(times.size());
    Matrix x(n, static_cast<Index>(p));
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < static_cast<Index>(p); ++j) {
            x(i, j) = values[static_cast<std::size_t>(i) * p + static_cast<std::size_t>(j)];
        }
    }
    return SurvivalDataset(Eigen::Map<Vector>(times.data(), n),
                           Eigen::Map<Eigen::VectorXi>(status.data(), n), std::move(x));
}

namespace {

void append_double(std::string& out, double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, ptr);
}

} // namespace

void write_csv(const SurvivalDataset& data, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path.string() + "'");
    }
    std::string buf = "time,status";
    for (Index j = 0; j < data.p(); ++j) {
        buf += ",x" + std::to_string(j + 1);
    }
    buf += '\n';
    for (Index i = 0; i < data.n(); ++i) {
        append_double(buf, data.times()[i]);
        buf += data.status()[i] == 1 ? ",1" : ",0";
        for (Index j = 0; j < data.p(); ++j) {
            buf += ',';
            append_double(buf, data.covariates()(i, j));
        }
        buf += '\n';
    }
    out << buf;
    if (!out) {
        throw DataError("write failed for '" + path.string() + "'");
    }
}

std::vector<Index> support_of(const Vector& beta, double zero_tol)
{
    std::vector<Index> s;
    for (Index j = 0; j < beta.size(); ++j) {
        if (std::abs(beta[j]) > zero_tol) {
            s.push_back(j);
        }
    }
    return s;
}

} // namespace tlamm
