// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "stackevo/error.hpp"

namespace stackevo {

Dataset::Dataset(Matrix features, Vector targets, std::string name,
                 std::vector<std::string> feature_names)
    : features_(std::move(features))
    , targets_(std::move(targets))
    , name_(std::move(name))
    , feature_names_(std::move(feature_names))
{
    if (features_.rows() < 1 || features_.cols() < 1) {
        throw DataError(fmt::format("dataset '{}' needs at least one row and one feature column (got {}x{})",
                                    name_, features_.rows(), features_.cols()));
    }
    if (targets_.size() != features_.rows()) {
        throw DataError(fmt::format("dataset '{}': {} feature rows but {} targets", name_,
                                    features_.rows(), targets_.size()));
    }
    if (!features_.allFinite() || !targets_.allFinite()) {
        throw DataError(fmt::format("dataset '{}' contains non-finite values", name_));
    }
    if (feature_names_.empty()) {
        for (Eigen::Index j = 0; j < features_.cols(); ++j) {
            feature_names_.push_back(fmt::format("x{}", j + 1));
        }
    } else if (feature_names_.size() != cols()) {
        throw DataError(fmt::format("dataset '{}': {} feature names for {} columns", name_,
                                    feature_names_.size(), cols()));
    }
}

Dataset Dataset::select(std::span<const std::size_t> indices) const
{
    Matrix x(static_cast<Eigen::Index>(indices.size()), features_.cols());
    Vector y(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t r = 0; r < indices.size(); ++r) {
        const auto src = static_cast<Eigen::Index>(indices[r]);
        x.row(static_cast<Eigen::Index>(r)) = features_.row(src);
        y[static_cast<Eigen::Index>(r)] = targets_[src];
    }
    return Dataset(std::move(x), std::move(y), name_, feature_names_);
}

TargetScaler fit_scaler(std::span<const double> targets)
{
    if (targets.empty()) {
        throw ConfigError("cannot fit a target scaler on an empty target vector");
    }
    const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
    if (!(*lo < *hi)) {
        throw ConfigError(fmt::format("degenerate target range: all targets equal {}", *lo));
    }
    return { *lo, *hi };
}

TargetScaler fit_scaler(const Vector& targets)
{
    return fit_scaler(std::span<const double>(targets.data(), static_cast<std::size_t>(targets.size())));
}

std::vector<std::size_t> FoldAssignment::test_indices(int fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < membership.size(); ++i) {
        if (membership[i] == fold) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::train_indices(int fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < membership.size(); ++i) {
        if (membership[i] != fold) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> FoldAssignment::fold_sizes() const
{
    std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
    for (int f : membership) {
        ++sizes[static_cast<std::size_t>(f)];
    }
    return sizes;
}

namespace {

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

std::vector<std::string_view> split_commas(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            cells.push_back(trim(line.substr(start)));
            break;
        }
        cells.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return cells;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open '{}'", path.string()));
    }
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty() || trim(line).starts_with('#')) {
            continue;
        }
        auto cells = split_commas(line);
        if (!have_header) {
            for (auto c : cells) {
                table.header.emplace_back(c);
            }
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw DataError(fmt::format("{}:{}: ragged row with {} cells, header has {}", path.string(),
                                        line_no, cells.size(), table.header.size()));
        }
        std::vector<double> values(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const auto cell = cells[j];
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw DataError(fmt::format("{}:{}: column '{}': cannot parse '{}' as a finite number",
                                            path.string(), line_no, table.header[j], cell));
            }
            values[j] = v;
        }
        table.rows.push_back(std::move(values));
    }
    if (!have_header) {
        throw DataError(fmt::format("'{}' is empty", path.string()));
    }
    if (table.rows.empty()) {
        throw DataError(fmt::format("'{}' has a header but no data rows", path.string()));
    }
    return table;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path, std::string_view target_column)
{
    auto table = read_table(path);
    const auto it = std::find(table.header.begin(), table.header.end(), target_column);
    if (it == table.header.end()) {
        throw DataError(fmt::format("'{}' has no column named '{}'", path.string(), target_column));
    }
    const auto target_idx = static_cast<std::size_t>(it - table.header.begin());
    const std::size_t p = table.header.size() - 1;
    if (p == 0) {
        throw DataError(fmt::format("'{}' has no feature columns besides '{}'", path.string(), target_column));
    }

    Matrix x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(p));
    Vector y(static_cast<Eigen::Index>(table.rows.size()));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (j != target_idx) {
            names.push_back(table.header[j]);
        }
    }
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            if (j == target_idx) {
                y[static_cast<Eigen::Index>(i)] = table.rows[i][j];
            } else {
                x(static_cast<Eigen::Index>(i), col++) = table.rows[i][j];
            }
        }
    }
    return Dataset(std::move(x), std::move(y), path.stem().string(), std::move(names));
}

Matrix load_feature_csv(const std::filesystem::path& path, std::vector<std::string>* header)
{
    auto table = read_table(path);
    Matrix x(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()));
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (std::size_t j = 0; j < table.header.size(); ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = table.rows[i][j];
        }
    }
    if (header != nullptr) {
        *header = std::move(table.header);
    }
    return x;
}

void write_csv(const Dataset& data, const std::filesystem::path& path, std::string_view target_name)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError(fmt::format("cannot write '{}'", path.string()));
    }
    write_csv(data, out, target_name);
}

void write_csv(const Dataset& data, std::ostream& out, std::string_view target_name)
{
    for (const auto& name : data.feature_names()) {
        out << name << ',';
    }
    out << target_name << '\n';
    for (std::size_t i = 0; i < data.rows(); ++i) {
        for (double v : data.row(i)) {
            out << fmt::format("{:.17g},", v);
        }
        out << fmt::format("{:.17g}\n", data.target(i));
    }
}

Dataset subsample(const Dataset& data, double fraction, Rng& rng)
{
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw ConfigError(fmt::format("subsample fraction must lie in (0, 1], got {}", fraction));
    }
    const std::size_t n = data.rows();
    // Guard against 0.1 * 3120 = 312.00000000000006 rounding up.
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(m, n));
    std::sort(idx.begin(), idx.end());
    return data.select(idx);
}

FoldAssignment assign_folds(std::size_t n, int k, Rng& rng)
{
    if (k < 2) {
        throw ConfigError(fmt::format("fold count must be at least 2, got {}", k));
    }
    if (static_cast<std::size_t>(k) > n) {
        throw ConfigError(fmt::format("fold count {} exceeds sample count {}", k, n));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    FoldAssignment folds;
    folds.k = k;
    folds.membership.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        folds.membership[perm[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
    }
    return folds;
}

Generator parse_generator(std::string_view id)
{
    if (id == "linear") return Generator::Linear;
    if (id == "piecewise") return Generator::Piecewise;
    if (id == "sine-mix") return Generator::SineMix;
    if (id == "heterogeneous") return Generator::Heterogeneous;
    throw ConfigError(fmt::format("unknown generator '{}' (expected linear, piecewise, sine-mix, heterogeneous)", id));
}

std::string_view generator_name(Generator g)
{
    switch (g) {
    case Generator::Linear: return "linear";
    case Generator::Piecewise: return "piecewise";
    case Generator::SineMix: return "sine-mix";
    case Generator::Heterogeneous: return "heterogeneous";
    }
    return "unknown";
}

std::size_t default_feature_count(Generator g)
{
    switch (g) {
    case Generator::Linear: return 5;
    case Generator::Piecewise: return 3;
    case Generator::SineMix: return 4;
    case Generator::Heterogeneous: return 8;
    }
    return 1;
}

namespace {

constexpr double kPi = std::numbers::pi;

double feature(std::span<const double> x, std::size_t j) { return j < x.size() ? x[j] : 0.0; }

// Nearest-center lookup over a jittered 4x4 grid in the (x1, x2) plane.
double voronoi_level(double a, double b)
{
    double best = std::numeric_limits<double>::infinity();
    double level = 0.0;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const double cx = -0.75 + 0.5 * i + 0.12 * std::sin(3.1 * i + 1.7 * j);
            const double cy = -0.75 + 0.5 * j + 0.12 * std::cos(2.3 * i - 0.9 * j);
            const double d = (a - cx) * (a - cx) + (b - cy) * (b - cy);
            if (d < best) {
                best = d;
                level = static_cast<double>((i * 5 + j * 3) % 7) - 3.0;
            }
        }
    }
    return level;
}

} // namespace

double synth_response(Generator g, std::span<const double> x)
{
    switch (g) {
    case Generator::Linear: {
        double y = 1.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            y += static_cast<double>(j + 1) * x[j];
        }
        return y;
    }
    case Generator::Piecewise:
        return 2.0 * (feature(x, 0) > 0.0) + 1.0 * (feature(x, 1) > 0.5) - 1.0 * (feature(x, 2) < -0.5);
    case Generator::SineMix: {
        double y = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            y += std::sin(static_cast<double>(j + 1) * kPi * x[j]) / static_cast<double>(j + 1);
        }
        return y;
    }
    case Generator::Heterogeneous: {
        // linear trend over every feature
        double linear = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double sign = (j % 3 == 1) ? -1.0 : 1.0;
            linear += sign * (1.0 - 0.05 * static_cast<double>(j % 8)) * x[j];
        }
        const double local = 1.0 * voronoi_level(feature(x, 0), feature(x, 1));
        const double smooth = 1.5 * std::sin(kPi * feature(x, 2)) * std::cos(0.5 * kPi * feature(x, 3));
        return 5.0 + linear + local + smooth;
    }
    }
    return 0.0;
}

Dataset synth_generate(const SynthSpec& spec, Rng& rng)
{
    if (spec.rows < 1) {
        throw ConfigError("synthetic dataset needs at least one row");
    }
    const std::size_t p = spec.features > 0 ? spec.features : default_feature_count(spec.generator);
    if (spec.noise < 0.0 || !std::isfinite(spec.noise)) {
        throw ConfigError(fmt::format("noise level must be finite and non-negative, got {}", spec.noise));
    }
    Matrix x(static_cast<Eigen::Index>(spec.rows), static_cast<Eigen::Index>(p));
    Vector y(static_cast<Eigen::Index>(spec.rows));
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < spec.rows; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < p; ++j) {
            x(r, static_cast<Eigen::Index>(j)) = unif(rng);
        }
        const double clean = synth_response(spec.generator, { x.data() + i * p, p });
        y[r] = spec.noise > 0.0 ? clean + spec.noise * gauss(rng) : clean;
    }
    return Dataset(std::move(x), std::move(y), std::string(generator_name(spec.generator)));
}

} // namespace stackevo
