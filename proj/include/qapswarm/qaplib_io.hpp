#pragma once

// QAPLIB text formats.
//
// Instance (.dat):  n, then n*n flow entries, then n*n distance entries, all
// row-major and whitespace separated. Line breaks carry no meaning.
// Solution (.sln): n, cost, then n 1-based location indices.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "matrix.hpp"

namespace qapswarm {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, std::size_t token_index, std::size_t line)
        : std::runtime_error(message + " (token " + std::to_string(token_index) + ", line " +
                             std::to_string(line) + ")"),
          message_(message),
          token_index_(token_index),
          line_(line) {}

    /// Same error with a prefix (typically the file path) on the message.
    ParseError with_context(const std::string& prefix) const {
        return ParseError(prefix + ": " + message_, token_index_, line_);
    }

    /// 1-based position of the offending token; 0 when the error is about the whole stream.
    std::size_t token_index() const { return token_index_; }
    std::size_t line() const { return line_; }

private:
    std::string message_;
    std::size_t token_index_;
    std::size_t line_;
};

struct QapInstance {
    std::string name;
    std::size_t n = 0;
    SquareMatrix<double> flow;
    SquareMatrix<double> distance;
    std::optional<double> known_best;

    /// True when every entry is an integer; costs are then summed exactly in 64 bits.
    bool integral = false;
    std::vector<std::int64_t> flow_int;
    std::vector<std::int64_t> distance_int;
};

struct ReferenceSolution {
    std::size_t n = 0;
    double cost = 0;
    std::vector<std::int32_t> permutation;  // 0-based
};

namespace detail {

struct Token {
    std::string_view text;
    std::size_t index;  // 1-based
    std::size_t line;   // 1-based
};

inline std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> tokens;
    std::size_t line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
            ++i;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
            tokens.push_back({text.substr(i, j - i), tokens.size() + 1, line});
            i = j;
        }
    }
    return tokens;
}

inline double to_number(const Token& token) {
    double value = 0;
    std::string_view s = token.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ParseError("non-numeric token '" + std::string(token.text) + "'", token.index, token.line);
    }
    if (!std::isfinite(value)) {
        throw ParseError("non-finite value '" + std::string(token.text) + "'", token.index, token.line);
    }
    return value;
}

inline std::int64_t to_count(const Token& token, const char* what) {
    const double v = to_number(token);
    if (v != std::floor(v) || v < 0 || v > 1e9) {
        throw ParseError(std::string(what) + " must be a non-negative integer, got '" + std::string(token.text) + "'",
                         token.index, token.line);
    }
    return static_cast<std::int64_t>(v);
}

inline bool is_exact_integer(double v) { return v == std::floor(v) && std::fabs(v) < 0x1.0p53; }

inline std::string read_stream(std::istream& in) {
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_stream(in);
}

}  // namespace detail

inline QapInstance parse_instance(std::string_view text, std::string name = {}) {
    const auto tokens = detail::tokenize(text);
    if (tokens.empty()) throw ParseError("empty instance", 0, 1);

    const std::int64_t n = detail::to_count(tokens[0], "problem size");
    if (n < 2) throw ParseError("problem size must be at least 2, got " + std::to_string(n), 1, tokens[0].line);
    const auto nn = static_cast<std::size_t>(n * n);
    const std::size_t expected = 1 + 2 * nn;
    if (tokens.size() != expected) {
        const std::size_t pos = tokens.size() < expected ? 0 : expected + 1;
        const std::size_t line = tokens.size() < expected ? tokens.back().line : tokens[expected].line;
        throw ParseError("token count mismatch: expected " + std::to_string(expected) + " for n=" +
                             std::to_string(n) + ", found " + std::to_string(tokens.size()),
                         pos, line);
    }

    std::vector<double> flow(nn), distance(nn);
    for (std::size_t k = 0; k < 2 * nn; ++k) {
        const auto& tok = tokens[1 + k];
        const double v = detail::to_number(tok);
        if (v < 0) throw ParseError("negative entry " + std::string(tok.text), tok.index, tok.line);
        (k < nn ? flow[k] : distance[k - nn]) = v;
    }

    QapInstance inst;
    inst.name = std::move(name);
    inst.n = static_cast<std::size_t>(n);
    inst.integral = true;
    for (double v : flow) inst.integral = inst.integral && detail::is_exact_integer(v);
    for (double v : distance) inst.integral = inst.integral && detail::is_exact_integer(v);
    if (inst.integral) {
        inst.flow_int.assign(flow.begin(), flow.end());
        inst.distance_int.assign(distance.begin(), distance.end());
    }
    inst.flow = SquareMatrix<double>::from_flat(inst.n, std::move(flow));
    inst.distance = SquareMatrix<double>::from_flat(inst.n, std::move(distance));
    return inst;
}

inline QapInstance parse_instance(std::istream& in, std::string name = {}) {
    return parse_instance(detail::read_stream(in), std::move(name));
}

/// Builds an instance from in-memory matrices, applying the same validation as the parser.
inline QapInstance make_instance(const SquareMatrix<double>& flow, const SquareMatrix<double>& distance,
                                 std::string name = {}) {
    if (flow.size() != distance.size()) throw std::invalid_argument("flow and distance sizes differ");
    std::ostringstream out;
    out.precision(17);
    out << flow.size() << '\n';
    for (double v : flow.values()) out << v << ' ';
    out << '\n';
    for (double v : distance.values()) out << v << ' ';
    return parse_instance(out.str(), std::move(name));
}

/// Serializes back to the QAPLIB instance layout (one matrix row per line).
inline std::string format_instance(const QapInstance& inst) {
    std::string out = std::to_string(inst.n) + "\n\n";
    auto put = [&](const SquareMatrix<double>& m) {
        char buf[64];
        for (std::size_t r = 0; r < inst.n; ++r) {
            for (std::size_t c = 0; c < inst.n; ++c) {
                const auto res = std::to_chars(buf, buf + sizeof buf, m(r, c));
                if (c) out += ' ';
                out.append(buf, res.ptr);
            }
            out += '\n';
        }
    };
    put(inst.flow);
    out += '\n';
    put(inst.distance);
    return out;
}

inline QapInstance load_instance(const std::string& path) {
    std::string stem = path;
    if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
    if (auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
    try {
        return parse_instance(detail::read_file(path), stem);
    } catch (const ParseError& e) {
        throw e.with_context(path);
    }
}

inline ReferenceSolution parse_reference_solution(std::string_view text) {
    const auto tokens = detail::tokenize(text);
    if (tokens.size() < 2) throw ParseError("solution needs at least n and cost", 0, tokens.empty() ? 1 : tokens.back().line);

    const std::int64_t n = detail::to_count(tokens[0], "problem size");
    if (n < 1) throw ParseError("problem size must be positive", 1, tokens[0].line);
    const double cost = detail::to_number(tokens[1]);
    if (cost < 0) throw ParseError("negative cost", 2, tokens[1].line);
    const std::size_t expected = 2 + static_cast<std::size_t>(n);
    if (tokens.size() != expected) {
        throw ParseError("token count mismatch: expected " + std::to_string(expected) + ", found " +
                             std::to_string(tokens.size()),
                         tokens.size() < expected ? 0 : expected + 1, tokens.back().line);
    }

    ReferenceSolution sol;
    sol.n = static_cast<std::size_t>(n);
    sol.cost = cost;
    sol.permutation.resize(sol.n);
    std::vector<bool> seen(sol.n, false);
    for (std::size_t i = 0; i < sol.n; ++i) {
        const auto& tok = tokens[2 + i];
        const std::int64_t loc = detail::to_count(tok, "location index");
        if (loc < 1 || loc > n) {
            throw ParseError("location index " + std::to_string(loc) + " out of range 1.." + std::to_string(n),
                             tok.index, tok.line);
        }
        if (seen[loc - 1]) {
            throw ParseError("duplicate location index " + std::to_string(loc), tok.index, tok.line);
        }
        seen[loc - 1] = true;
        sol.permutation[i] = static_cast<std::int32_t>(loc - 1);
    }
    return sol;
}

inline ReferenceSolution load_reference_solution(const std::string& path) {
    try {
        return parse_reference_solution(detail::read_file(path));
    } catch (const ParseError& e) {
        throw e.with_context(path);
    }
}

/// QAPLIB .sln layout: "n cost" then the 1-based permutation.
inline std::string format_solution(std::span<const std::int32_t> perm, double cost) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, cost);
    std::string out = std::to_string(perm.size()) + ' ' + std::string(buf, res.ptr) + '\n';
    for (std::size_t i = 0; i < perm.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(perm[i] + 1);
    }
    out += '\n';
    return out;
}

}  // namespace qapswarm
