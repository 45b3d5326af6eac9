// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/model_io.hpp"

#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "stackevo/error.hpp"
#include "stackevo/models.hpp"

namespace stackevo {

void ModelWriter::word(std::string_view w) { out_ << w << ' '; }

void ModelWriter::integer(std::int64_t v) { out_ << v << ' '; }

void ModelWriter::real(double v) { out_ << fmt::format("{:a} ", v); }

void ModelWriter::reals(std::span<const double> v)
{
    integer(static_cast<std::int64_t>(v.size()));
    for (double x : v) {
        real(x);
    }
    out_ << '\n';
}

void ModelWriter::text(std::string_view s)
{
    integer(static_cast<std::int64_t>(s.size()));
    out_ << s << ' ';
}

void ModelWriter::model(const RegressionFunction& m)
{
    out_ << '\n';
    word(m.tag());
    m.save(*this);
}

std::string ModelReader::word()
{
    std::string w;
    if (!(in_ >> w)) {
        throw DataError("model file truncated");
    }
    return w;
}

void ModelReader::expect(std::string_view w)
{
    const auto got = word();
    if (got != w) {
        throw DataError(fmt::format("model file corrupt: expected '{}', found '{}'", w, got));
    }
}

std::int64_t ModelReader::integer()
{
    const auto w = word();
    char* end = nullptr;
    const auto v = std::strtoll(w.c_str(), &end, 10);
    if (end != w.c_str() + w.size()) {
        throw DataError(fmt::format("model file corrupt: '{}' is not an integer", w));
    }
    return v;
}

double ModelReader::real()
{
    const auto w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size()) {
        throw DataError(fmt::format("model file corrupt: '{}' is not a number", w));
    }
    return v;
}

Vector ModelReader::reals()
{
    const auto n = integer();
    if (n < 0) {
        throw DataError("model file corrupt: negative length");
    }
    Vector v(n);
    for (std::int64_t i = 0; i < n; ++i) {
        v[i] = real();
    }
    return v;
}

std::string ModelReader::text()
{
    const auto n = integer();
    if (n < 0) {
        throw DataError("model file corrupt: negative length");
    }
    in_.get(); // single separator
    std::string s(static_cast<std::size_t>(n), '\0');
    if (!in_.read(s.data(), n)) {
        throw DataError("model file truncated");
    }
    return s;
}

ModelPtr ModelReader::model()
{
    const auto tag = word();
    if (tag == "mean") return MeanModel::load(*this);
    if (tag == "knn") return KnnModel::load(*this);
    if (tag == "pls") return PlsModel::load(*this);
    if (tag == "tree") return RegressionTree::load(*this);
    if (tag == "average") return AveragingModel::load(*this);
    if (tag == "mlp") return MlpModel::load(*this);
    if (tag == "stack") return StackedModel::load(*this);
    throw DataError(fmt::format("model file corrupt: unknown model tag '{}'", tag));
}

void save_model(const RegressionFunction& model, std::ostream& out)
{
    out << kModelMagic << ' ' << kModelFormatVersion << '\n';
    ModelWriter w(out);
    w.model(model);
    out << "\nend\n";
}

ModelPtr load_model(std::istream& in)
{
    std::string magic;
    int version = 0;
    if (!(in >> magic) || magic != kModelMagic) {
        throw DataError("not a stackevo model file (bad magic header)");
    }
    if (!(in >> version) || version != kModelFormatVersion) {
        throw DataError(fmt::format("unsupported model format version {} (this build reads version {})",
                                    version, kModelFormatVersion));
    }
    ModelReader r(in);
    auto m = r.model();
    r.expect("end");
    return m;
}

void save_model_file(const RegressionFunction& model, const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError(fmt::format("cannot write model file '{}'", path.string()));
    }
    save_model(model, out);
}

ModelPtr load_model_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open model file '{}'", path.string()));
    }
    return load_model(in);
}

} // namespace stackevo
