// SPDX-License-Identifier: Apache-2.0
// SPDX-FileCopyrightText: Copyright 2026 The stackevo Authors

#include "stackevo/spec_file.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "stackevo/error.hpp"

namespace stackevo {

namespace {

struct Line {
    int number = 0;
    std::size_t indent = 0;
    std::vector<std::string> words;
};

std::vector<std::string> split_words(std::string_view s)
{
    std::vector<std::string> out;
    std::istringstream in { std::string(s) };
    std::string w;
    while (in >> w) {
        out.push_back(w);
    }
    return out;
}

class Parser {
public:
    Parser(std::vector<Line> lines, std::string_view origin)
        : lines_(std::move(lines))
        , origin_(origin)
    {
    }

    TrainSpec parse_root()
    {
        if (lines_.empty()) {
            throw ConfigError(fmt::format("{}: empty spec", origin_));
        }
        auto spec = parse_node(0, lines_[0].words);
        if (pos_ != lines_.size()) {
            fail(lines_[pos_], "unexpected second top-level node");
        }
        return spec;
    }

private:
    [[noreturn]] void fail(const Line& line, std::string_view msg) const
    {
        throw ConfigError(fmt::format("{}:{}: {}", origin_, line.number, msg));
    }

    int int_option(const Line& line, std::string_view word, std::string_view key) const
    {
        if (!word.starts_with(key) || word.size() <= key.size() || word[key.size()] != '=') {
            fail(line, fmt::format("expected {}=<n>, got '{}'", key, word));
        }
        const auto v = word.substr(key.size() + 1);
        int out = 0;
        const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size()) {
            fail(line, fmt::format("bad number '{}'", v));
        }
        return out;
    }

    // Parses the node described by `words` at lines_[pos_] and its children.
    TrainSpec parse_node(std::size_t word_offset, const std::vector<std::string>& words)
    {
        const Line& line = lines_[pos_];
        const std::size_t indent = line.indent;
        ++pos_;
        if (word_offset >= words.size()) {
            fail(line, "missing learner");
        }
        const std::string& head = words[word_offset];
        const std::size_t extra = words.size() - word_offset - 1;

        if (head == "stacking" || head == "bagging") {
            if (extra != 1) {
                fail(line, fmt::format("'{}' takes exactly one option", head));
            }
            const bool stacking = head == "stacking";
            const int n = int_option(line, words[word_offset + 1], stacking ? "folds" : "t");
            if (stacking && n < 2) fail(line, fmt::format("stacking fold count must be >= 2, got {}", n));
            if (!stacking && n < 1) fail(line, fmt::format("bag count must be >= 1, got {}", n));
            StackingSpec st;
            st.folds = n;
            std::optional<TrainSpec> base;
            while (pos_ < lines_.size() && lines_[pos_].indent > indent) {
                const Line& child = lines_[pos_];
                const std::string& role = child.words[0];
                if (stacking && role == "member") {
                    st.ensemble.push_back(parse_node(1, child.words));
                } else if (stacking && role == "level2") {
                    if (st.level2) fail(child, "second level2 entry");
                    st.level2 = std::make_shared<const TrainSpec>(parse_node(1, child.words));
                } else if (!stacking && role == "base") {
                    if (base) fail(child, "second base entry");
                    base = parse_node(1, child.words);
                } else {
                    fail(child, fmt::format("unexpected '{}' under {}", role, head));
                }
            }
            if (stacking) {
                if (!st.level2) fail(line, "stacking without level2");
                if (st.ensemble.empty()) fail(line, "stacking without members");
                return make_stacking(std::move(st.ensemble), *st.level2, st.folds);
            }
            if (!base) fail(line, "bagging without base");
            return make_bagging(std::move(*base), n);
        }
        if (extra != 0) {
            fail(line, fmt::format("unexpected text after '{}'", head));
        }
        if (pos_ < lines_.size() && lines_[pos_].indent > indent) {
            fail(lines_[pos_], fmt::format("learner '{}' takes no children", head));
        }
        try {
            return make_spec(LearnerSpec::parse(head));
        } catch (const ConfigError& e) {
            fail(line, e.what());
        }
    }

    std::vector<Line> lines_;
    std::string origin_;
    std::size_t pos_ = 0;
};

void format_node(const TrainSpec& spec, std::size_t indent, std::string_view role, std::string& out)
{
    const std::string pad(indent, ' ');
    const std::string prefix = role.empty() ? pad : fmt::format("{}{} ", pad, role);
    if (const auto* l = std::get_if<LearnerSpec>(&spec.node)) {
        out += prefix + l->name() + "\n";
    } else if (const auto* b = std::get_if<BaggingSpec>(&spec.node)) {
        out += fmt::format("{}bagging t={}\n", prefix, b->bags);
        format_node(*b->base, indent + 2, "base", out);
    } else {
        const auto& s = std::get<StackingSpec>(spec.node);
        out += fmt::format("{}stacking folds={}\n", prefix, s.folds);
        format_node(*s.level2, indent + 2, "level2", out);
        for (const auto& m : s.ensemble) {
            format_node(m, indent + 2, "member", out);
        }
    }
}

} // namespace

TrainSpec parse_spec(std::string_view text, std::string_view origin)
{
    std::vector<Line> lines;
    std::istringstream in { std::string(text) };
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        if (const auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        if (raw.find('\t') != std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: tabs are not allowed, indent with spaces", origin, number));
        }
        auto words = split_words(raw);
        if (words.empty()) {
            continue;
        }
        lines.push_back({ number, raw.find_first_not_of(' '), std::move(words) });
    }
    return Parser(std::move(lines), origin).parse_root();
}

TrainSpec load_spec_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError(fmt::format("cannot open spec file '{}'", path.string()));
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str(), path.string());
}

std::string format_spec(const TrainSpec& spec)
{
    std::string out;
    format_node(spec, 0, "", out);
    return out;
}

TrainSpec resolve_spec(std::string_view arg, const Registry& registry)
{
    if (arg.empty()) {
        throw ConfigError("empty learner spec");
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), index);
    if (ec == std::errc() && ptr == arg.data() + arg.size()) {
        if (index < 1 || index > registry.size()) {
            throw ConfigError(fmt::format("registry position {} outside [1, {}]", index, registry.size()));
        }
        return make_spec(registry.at(index - 1));
    }
    const std::filesystem::path path { std::string(arg) };
    if (std::filesystem::exists(path)) {
        return load_spec_file(path);
    }
    try {
        return make_spec(LearnerSpec::parse(arg));
    } catch (const ConfigError& e) {
        if (arg.find('/') != std::string_view::npos || arg.ends_with(".spec")) {
            throw DataError(fmt::format("spec file '{}' does not exist", arg));
        }
        throw ConfigError(fmt::format("'{}' is neither a spec file nor a learner name: {}", arg, e.what()));
    }
}

} // namespace stackevo
