#pragma once

#include <cctype>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "skewfatou/dynamics/skew_product.hpp"
#include "skewfatou/error.hpp"
#include "skewfatou/numerics/rational.hpp"

namespace skewfatou {

/// Sparse polynomial in (t, z) over Gaussian rationals, keyed by (deg_t, deg_z).
class BivariatePolynomial {
public:
    using Key = std::pair<int, int>;

    BivariatePolynomial() = default;
    static BivariatePolynomial constant(const GaussianRational& c) {
        BivariatePolynomial out;
        out.add({0, 0}, c);
        return out;
    }
    static BivariatePolynomial monomial(int deg_t, int deg_z) {
        BivariatePolynomial out;
        out.add({deg_t, deg_z}, GaussianRational(1));
        return out;
    }

    const std::map<Key, GaussianRational>& terms() const noexcept { return terms_; }

    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == Key{0, 0});
    }
    GaussianRational constant_term() const {
        const auto it = terms_.find({0, 0});
        return it == terms_.end() ? GaussianRational(0) : it->second;
    }

    friend BivariatePolynomial operator+(BivariatePolynomial a, const BivariatePolynomial& b) {
        for (const auto& [k, c] : b.terms_) a.add(k, c);
        return a;
    }
    friend BivariatePolynomial operator-(const BivariatePolynomial& a) {
        BivariatePolynomial out;
        for (const auto& [k, c] : a.terms_) out.add(k, -c);
        return out;
    }
    friend BivariatePolynomial operator-(const BivariatePolynomial& a, const BivariatePolynomial& b) { return a + (-b); }
    friend BivariatePolynomial operator*(const BivariatePolynomial& a, const BivariatePolynomial& b) {
        BivariatePolynomial out;
        for (const auto& [ka, ca] : a.terms_) {
            for (const auto& [kb, cb] : b.terms_) out.add({ka.first + kb.first, ka.second + kb.second}, ca * cb);
        }
        return out;
    }

    /// Coefficient lists P_i(z) such that the polynomial equals sum_i t^i P_i(z).
    std::vector<Polynomial<GaussianRational>> by_t_power() const {
        int max_t = 0;
        for (const auto& [k, c] : terms_) max_t = std::max(max_t, k.first);
        std::vector<std::vector<GaussianRational>> raw(static_cast<std::size_t>(max_t) + 1);
        for (const auto& [k, c] : terms_) {
            auto& row = raw[static_cast<std::size_t>(k.first)];
            if (row.size() <= static_cast<std::size_t>(k.second)) row.resize(static_cast<std::size_t>(k.second) + 1);
            row[static_cast<std::size_t>(k.second)] = c;
        }
        std::vector<Polynomial<GaussianRational>> out;
        for (auto& row : raw) out.emplace_back(std::move(row));
        return out;
    }

private:
    void add(const Key& k, const GaussianRational& c) {
        auto [it, inserted] = terms_.emplace(k, c);
        if (!inserted) it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }

    std::map<Key, GaussianRational> terms_;
};

namespace detail {

/// Recursive-descent parser: sums, products, unary signs, '^' with
/// non-negative integer exponents, parentheses, numbers, t, z and i.
class ExpressionParser {
public:
    explicit ExpressionParser(std::string text) : text_(std::move(text)) {}

    BivariatePolynomial parse() {
        auto out = sum();
        skip();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return out;
    }

private:
    BivariatePolynomial sum() {
        auto acc = product();
        for (;;) {
            skip();
            if (accept('+')) {
                acc = acc + product();
            } else if (accept('-')) {
                acc = acc - product();
            } else {
                return acc;
            }
        }
    }

    BivariatePolynomial product() {
        auto acc = unary();
        for (;;) {
            skip();
            if (accept('*')) {
                acc = acc * unary();
            } else if (accept('/')) {
                const auto den = unary();
                if (!den.is_constant() || den.constant_term().is_zero()) fail("division by a non-constant or zero");
                acc = acc * BivariatePolynomial::constant(GaussianRational(1) / den.constant_term());
            } else if (starts_implicit_factor()) {
                acc = acc * power();
            } else {
                return acc;
            }
        }
    }

    BivariatePolynomial unary() {
        skip();
        if (accept('-')) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    BivariatePolynomial power() {
        auto base = atom();
        skip();
        if (accept('^')) {
            skip();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("exponent must be a non-negative integer");
            const long e = std::stol(text_.substr(start, pos_ - start));
            auto out = BivariatePolynomial::constant(GaussianRational(1));
            for (long k = 0; k < e; ++k) out = out * base;
            return out;
        }
        return base;
    }

    BivariatePolynomial atom() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (accept('(')) {
            auto inner = sum();
            skip();
            if (!accept(')')) fail("missing ')'");
            return inner;
        }
        if (c == 't') {
            ++pos_;
            return BivariatePolynomial::monomial(1, 0);
        }
        if (c == 'z') {
            ++pos_;
            return BivariatePolynomial::monomial(0, 1);
        }
        if (c == 'i') {
            ++pos_;
            return BivariatePolynomial::constant(GaussianRational::i());
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.')) {
                ++pos_;
            }
            if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
                std::size_t look = pos_ + 1;
                if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
                if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                    pos_ = look;
                    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
                }
            }
            return BivariatePolynomial::constant(GaussianRational(ExactRational::parse(text_.substr(start, pos_ - start))));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    bool starts_implicit_factor() {
        skip();
        if (pos_ >= text_.size()) return false;
        const char c = text_[pos_];
        return c == '(' || c == 't' || c == 'z' || c == 'i';
    }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool accept(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Parse, what + " at position " + std::to_string(pos_) + " in '" + text_ + "'");
    }

    std::string text_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline BivariatePolynomial parse_bivariate(const std::string& text) { return detail::ExpressionParser(text).parse(); }

/// A polynomial in z only.
inline Polynomial<GaussianRational> parse_polynomial(const std::string& text, char var = 'z') {
    std::string body = text;
    if (var != 'z') {
        for (char& c : body) {
            if (c == var) c = 'z';
        }
    }
    const auto parts = parse_bivariate(body).by_t_power();
    if (parts.size() > 1) throw Error(ErrorKind::Parse, "expected a polynomial in a single variable: '" + text + "'");
    return parts.front();
}

/// Builds F from mu and an expression for g(t, z).
inline SkewProduct<GaussianRational> skew_product_from_expression(const GaussianRational& mu, const std::string& g) {
    return SkewProduct<GaussianRational>(mu, parse_bivariate(g).by_t_power());
}

/// Plain-text map definition, one `key = value` per line, '#' or ';' comments.
///
/// Keys: mu (required); then either g = <expression in t, z>, or p = <expression
/// in z> with optional q = <expression in t>, or degree = d with p0 ... pd and
/// optional q1, q2, ... as numbers. Extra c_<i>_<j> keys add c t^i z^j.
inline SkewProduct<GaussianRational> load_map_config(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string* {
        const auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    const std::string* mu_text = get("mu");
    if (!mu_text) throw Error(ErrorKind::Parse, "map config needs 'mu'");
    const auto mu_poly = parse_bivariate(*mu_text);
    if (!mu_poly.is_constant()) throw Error(ErrorKind::Parse, "mu must be a number");

    BivariatePolynomial g;
    if (const auto* text = get("g")) {
        g = parse_bivariate(*text);
    } else if (const auto* text = get("p")) {
        g = parse_bivariate(*text);
        if (const auto* qt = get("q")) g = g + parse_bivariate(*qt);
    } else if (const auto* deg = get("degree")) {
        const int d = std::stoi(*deg);
        for (int k = 0; k <= d; ++k) {
            if (const auto* c = get("p" + std::to_string(k))) {
                g = g + parse_bivariate(*c) * BivariatePolynomial::monomial(0, k);
            }
        }
        for (int k = 1; k <= 16; ++k) {
            if (const auto* c = get("q" + std::to_string(k))) {
                g = g + parse_bivariate(*c) * BivariatePolynomial::monomial(k, 0);
            }
        }
    } else {
        throw Error(ErrorKind::Parse, "map config needs one of 'g', 'p' or 'degree'");
    }
    for (const auto& [key, value] : kv) {
        int i = 0;
        int j = 0;
        char tail = 0;
        if (std::sscanf(key.c_str(), "c_%d_%d%c", &i, &j, &tail) == 2) {
            g = g + parse_bivariate(value) * BivariatePolynomial::monomial(i, j);
        }
    }
    return SkewProduct<GaussianRational>(mu_poly.constant_term(), g.by_t_power());
}

/// Reads `key = value` lines, ignoring blank lines, comments and [section] headers.
inline std::map<std::string, std::string> read_key_values(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::Parse, "expected key = value: '" + line + "'");
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        out[trim(line.substr(0, eq))] = value;
    }
    return out;
}

inline SkewProduct<GaussianRational> load_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open map config '" + path + "'");
    return load_map_config(read_key_values(in));
}

}  // namespace skewfatou
