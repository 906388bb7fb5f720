#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "stratlab/errors.hpp"

namespace stratlab {

// One bilinear term of a polynomial group law:
// (x.y)[target] += coeff * x[left] * y[right].
struct LawTerm {
    int target = 0;
    int left = 0;
    int right = 0;
    double coeff = 0.0;

    bool operator==(const LawTerm&) const = default;
};

/**
 * A stratified group on R^n given by data: dilation exponents and a
 * polynomial group law x.y = x + y + sum of bilinear terms.
 *
 * Every term must be homogeneous (a[left] + a[right] == a[target]), so the
 * law only feeds lower layers into higher ones. This covers all step-2
 * groups written in exponential coordinates, including the Heisenberg group.
 */
struct GroupSpec {
    std::string name;
    int n = 0;
    std::vector<int> exponents;
    std::vector<LawTerm> law;
    double gauge_coeff = 16.0;

    int homogeneous_dimension() const {
        return std::accumulate(exponents.begin(), exponents.end(), 0);
    }

    // Number of degree-1 generators.
    int generators() const {
        return static_cast<int>(std::count(exponents.begin(), exponents.end(), 1));
    }

    int max_exponent() const {
        return exponents.empty() ? 0 : *std::max_element(exponents.begin(), exponents.end());
    }

    bool operator==(const GroupSpec&) const = default;

    void validate() const {
        if (n < 1) throw InvalidArgument("group: n must be >= 1");
        if (static_cast<int>(exponents.size()) != n)
            throw InvalidArgument("group: exponents must have n entries");
        if (exponents.front() != 1) throw InvalidArgument("group: first exponent must be 1");
        for (int i = 1; i < n; ++i)
            if (exponents[i] < exponents[i - 1])
                throw InvalidArgument("group: exponents must be non-decreasing");
        if (!(gauge_coeff > 0.0)) throw InvalidArgument("group: gauge_coeff must be positive");
        for (const auto& t : law) {
            auto in = [&](int k) { return k >= 0 && k < n; };
            if (!in(t.target) || !in(t.left) || !in(t.right))
                throw InvalidArgument("group: law term index out of range");
            if (exponents[t.left] + exponents[t.right] != exponents[t.target])
                throw InvalidArgument("group: law term is not homogeneous");
        }
    }
};

inline GroupSpec heisenberg(double gauge_coeff = 16.0) {
    GroupSpec g;
    g.name = "heisenberg";
    g.n = 3;
    g.exponents = {1, 1, 2};
    // x3 + y3 + 1/2 (x1 y2 - y1 x2)
    g.law = {{2, 0, 1, 0.5}, {2, 1, 0, -0.5}};
    g.gauge_coeff = gauge_coeff;
    return g;
}

inline GroupSpec euclidean(int n) {
    if (n < 1) throw InvalidArgument("euclidean: n must be >= 1");
    GroupSpec g;
    g.name = "euclidean";
    g.n = n;
    g.exponents.assign(static_cast<std::size_t>(n), 1);
    g.gauge_coeff = 1.0;
    return g;
}

class GroupPoint {
public:
    GroupPoint() = default;
    explicit GroupPoint(std::size_t n) : coords_(n, 0.0) {}
    GroupPoint(std::initializer_list<double> c) : coords_(c) {}
    explicit GroupPoint(std::vector<double> c) : coords_(std::move(c)) {}

    std::size_t size() const { return coords_.size(); }
    double& operator[](std::size_t i) { return coords_[i]; }
    double operator[](std::size_t i) const { return coords_[i]; }
    std::span<const double> coords() const { return coords_; }
    std::span<double> coords() { return coords_; }

    bool operator==(const GroupPoint&) const = default;

private:
    std::vector<double> coords_;
};

namespace detail {

inline void check_dim(const GroupSpec& g, const GroupPoint& x) {
    if (static_cast<int>(x.size()) != g.n)
        throw InvalidArgument("point dimension " + std::to_string(x.size()) +
                              " does not match group dimension " + std::to_string(g.n));
}

// Span kernels used by the hot loops of the grid code.
inline void multiply_into(const GroupSpec& g, std::span<const double> x, std::span<const double> y,
                          std::span<double> out) {
    for (int k = 0; k < g.n; ++k) out[k] = x[k] + y[k];
    for (const auto& t : g.law) out[t.target] += t.coeff * x[t.left] * y[t.right];
}

inline void inverse_into(const GroupSpec& g, std::span<const double> x, std::span<double> out) {
    // Solve x.y = 0 layer by layer; terms only reference lower layers.
    std::vector<int> order(static_cast<std::size_t>(g.n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g.exponents[a] < g.exponents[b]; });
    for (int k : order) {
        double v = -x[k];
        for (const auto& t : g.law)
            if (t.target == k) v -= t.coeff * x[t.left] * out[t.right];
        out[k] = v;
    }
}

inline double gauge_of(const GroupSpec& g, std::span<const double> x) {
    const int d = g.max_exponent();
    double horizontal = 0.0;
    double vertical = 0.0;
    for (int i = 0; i < g.n; ++i) {
        if (g.exponents[i] == 1)
            horizontal += x[i] * x[i];
        else
            vertical += std::pow(std::abs(x[i]), 2.0 * d / g.exponents[i]);
    }
    const double s = std::pow(horizontal, d) + g.gauge_coeff * vertical;
    return std::pow(s, 1.0 / (2.0 * d));
}

}  // namespace detail

inline GroupPoint origin(const GroupSpec& g) { return GroupPoint(static_cast<std::size_t>(g.n)); }

inline GroupPoint multiply(const GroupSpec& g, const GroupPoint& x, const GroupPoint& y) {
    detail::check_dim(g, x);
    detail::check_dim(g, y);
    GroupPoint out(x.size());
    detail::multiply_into(g, x.coords(), y.coords(), out.coords());
    return out;
}

inline GroupPoint inverse(const GroupSpec& g, const GroupPoint& x) {
    detail::check_dim(g, x);
    GroupPoint out(x.size());
    detail::inverse_into(g, x.coords(), out.coords());
    return out;
}

inline GroupPoint dilate(const GroupSpec& g, double alpha, const GroupPoint& x) {
    if (!(alpha > 0.0)) throw InvalidArgument("dilate: alpha must be positive");
    detail::check_dim(g, x);
    GroupPoint out(x.size());
    for (int i = 0; i < g.n; ++i) out[i] = std::pow(alpha, g.exponents[i]) * x[i];
    return out;
}

/// Homogeneous gauge rho with rho(dilate(a, x)) == a * rho(x).
/// On the Heisenberg group this is ((x1^2 + x2^2)^2 + c x3^2)^(1/4).
inline double gauge(const GroupSpec& g, const GroupPoint& x) {
    detail::check_dim(g, x);
    return detail::gauge_of(g, x.coords());
}

/// Indicator of the gauge ball {y : rho(center^-1 . y) < r}.
inline std::function<bool(const GroupPoint&)> ball_indicator(const GroupSpec& g, const GroupPoint& center,
                                                             double r) {
    if (!(r > 0.0)) throw InvalidArgument("ball_indicator: radius must be positive");
    detail::check_dim(g, center);
    GroupPoint cinv = inverse(g, center);
    return [g, cinv, r](const GroupPoint& y) {
        return gauge(g, multiply(g, cinv, y)) < r;
    };
}

// Key-value block: name, n, exponents, law, gauge_coeff.
inline std::map<std::string, std::string> to_config_block(const GroupSpec& g) {
    std::map<std::string, std::string> kv;
    kv["name"] = g.name;
    kv["n"] = std::to_string(g.n);
    std::ostringstream ex;
    for (std::size_t i = 0; i < g.exponents.size(); ++i) ex << (i ? ", " : "") << g.exponents[i];
    kv["exponents"] = ex.str();
    std::ostringstream law;
    law.precision(17);
    for (std::size_t i = 0; i < g.law.size(); ++i) {
        const auto& t = g.law[i];
        law << (i ? "; " : "") << t.target << ' ' << t.left << ' ' << t.right << ' ' << t.coeff;
    }
    kv["law"] = law.str();
    std::ostringstream c;
    c.precision(17);
    c << g.gauge_coeff;
    kv["gauge_coeff"] = c.str();
    return kv;
}

inline GroupSpec from_config_block(const std::map<std::string, std::string>& kv) {
    auto get = [&](const std::string& key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    GroupSpec g;
    const std::string* name = get("name");
    if (!name) throw InvalidArgument("group block: missing 'name'");
    if (*name == "heisenberg" && !get("exponents")) {
        g = heisenberg();
    } else if (*name == "euclidean" && !get("exponents")) {
        const std::string* n = get("n");
        if (!n) throw InvalidArgument("group block: euclidean needs 'n'");
        g = euclidean(std::stoi(*n));
    } else {
        g.name = *name;
        const std::string* n = get("n");
        const std::string* ex = get("exponents");
        if (!n || !ex) throw InvalidArgument("group block: custom group needs 'n' and 'exponents'");
        g.n = std::stoi(*n);
        std::string tmp = *ex;
        std::replace(tmp.begin(), tmp.end(), ',', ' ');
        std::istringstream is(tmp);
        for (int a; is >> a;) g.exponents.push_back(a);
        if (const std::string* law = get("law")) {
            std::string terms = *law;
            std::replace(terms.begin(), terms.end(), ';', '\n');
            std::istringstream ls(terms);
            for (std::string line; std::getline(ls, line);) {
                if (line.find_first_not_of(" \t") == std::string::npos) continue;
                std::istringstream ts(line);
                LawTerm t;
                if (!(ts >> t.target >> t.left >> t.right >> t.coeff))
                    throw InvalidArgument("group block: malformed law term '" + line + "'");
                g.law.push_back(t);
            }
        }
    }
    if (const std::string* c = get("gauge_coeff")) g.gauge_coeff = std::stod(*c);
    g.validate();
    return g;
}

}  // namespace stratlab
