#include "mfindex/csv.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "mfindex/error.hpp"

namespace mfindex::csv {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(trim(line.substr(start)));
            break;
        }
        out.emplace_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

Reader::Reader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw Error("cannot open " + path);
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (trim(text).empty()) continue;
        header_ = split(text);
        break;
    }
    for (std::size_t i = 0; i < header_.size(); ++i) index_.emplace(header_[i], i);
}

bool Reader::next() {
    std::string text;
    while (std::getline(in_, text)) {
        ++line_;
        if (trim(text).empty()) continue;
        row_ = split(text);
        if (row_.size() < header_.size()) fail("expected " + std::to_string(header_.size()) +
                                               " fields, got " + std::to_string(row_.size()));
        return true;
    }
    return false;
}

std::optional<std::size_t> Reader::column(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t Reader::require(std::string_view name) const {
    auto c = column(name);
    if (!c) throw ParseError(path_, 1, "missing column '" + std::string(name) + "'");
    return *c;
}

const std::string& Reader::field(std::size_t col) const { return row_.at(col); }

void Reader::fail(const std::string& what) const { throw ParseError(path_, line_, what); }

double Reader::number(std::size_t col) const {
    auto v = parse_double(field(col));
    if (!v) fail("not a number: '" + field(col) + "'");
    return *v;
}

long long Reader::integer(std::size_t col) const {
    const std::string& s = field(col);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("not an integer: '" + s + "'");
    return v;
}

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) return "nan";
    return std::string(buf, ptr);
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    // strtod accepts a leading '+' and hex forms; from_chars for double is missing on older libstdc++.
    std::string tmp(s);
    char* end = nullptr;
    double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size()) return std::nullopt;
    return v;
}

}  // namespace mfindex::csv
