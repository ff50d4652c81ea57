#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ultra {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Thrown when a table-based computation would need indices beyond kmax
// and no closed form is available.
class TruncationError : public std::runtime_error {
public:
    TruncationError(const std::string& msg, int index_needed)
        : std::runtime_error(msg), index_needed(index_needed) {}
    int index_needed;
};

// Thrown by parameter searches that exhaust their grid; carries the best
// candidate found so far.
class SearchFailure : public std::runtime_error {
public:
    SearchFailure(const std::string& msg, double best_candidate)
        : std::runtime_error(msg), best_candidate(best_candidate) {}
    double best_candidate;
};

class DepthError : public std::runtime_error {
public:
    DepthError(const std::string& msg, double unresolved_volume, std::size_t unresolved_count)
        : std::runtime_error(msg), unresolved_volume(unresolved_volume),
          unresolved_count(unresolved_count) {}
    double unresolved_volume;
    std::size_t unresolved_count;
};

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline double log_factorial(int k) { return std::lgamma(double(k) + 1.0); }

inline double log_binom(int n, int k) {
    if (k < 0 || k > n) return -kInf;
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

inline double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    k = std::min(k, n - k);
    for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
    return r;
}

// log(exp(a) + exp(b)) without overflow
inline double log_add(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
}

// ---------------------------------------------------------------------------
// Points and multi-indices for dimensions n <= 3.
// ---------------------------------------------------------------------------

struct Point {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    int dim = 1;

    double& operator[](int i) { return x[std::size_t(i)]; }
    double operator[](int i) const { return x[std::size_t(i)]; }
};

inline Point make_point(double a) { return Point{{a, 0, 0}, 1}; }
inline Point make_point(double a, double b) { return Point{{a, b, 0}, 2}; }
inline Point make_point(double a, double b, double c) { return Point{{a, b, c}, 3}; }

inline double dist2(const Point& a, const Point& b) {
    double s = 0;
    for (int i = 0; i < a.dim; ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}
inline double dist(const Point& a, const Point& b) { return std::sqrt(dist2(a, b)); }

struct MultiIndex {
    std::array<int, 3> a{0, 0, 0};
    int dim = 1;

    int& operator[](int i) { return a[std::size_t(i)]; }
    int operator[](int i) const { return a[std::size_t(i)]; }
    int order() const {
        int s = 0;
        for (int i = 0; i < dim; ++i) s += a[std::size_t(i)];
        return s;
    }
    bool operator==(const MultiIndex& o) const { return dim == o.dim && a == o.a; }
    bool operator<(const MultiIndex& o) const {
        if (order() != o.order()) return order() < o.order();
        return a < o.a;
    }
};

inline MultiIndex make_mi(int i) { return MultiIndex{{i, 0, 0}, 1}; }
inline MultiIndex make_mi(int i, int j) { return MultiIndex{{i, j, 0}, 2}; }
inline MultiIndex make_mi(int i, int j, int k) { return MultiIndex{{i, j, k}, 3}; }

// all multi-indices with |alpha| <= p, graded lexicographic
inline std::vector<MultiIndex> multi_indices_upto(int dim, int p) {
    std::vector<MultiIndex> out;
    if (dim == 1) {
        for (int i = 0; i <= p; ++i) out.push_back(make_mi(i));
    } else if (dim == 2) {
        for (int o = 0; o <= p; ++o)
            for (int i = o; i >= 0; --i) out.push_back(make_mi(i, o - i));
    } else {
        for (int o = 0; o <= p; ++o)
            for (int i = o; i >= 0; --i)
                for (int j = o - i; j >= 0; --j) out.push_back(make_mi(i, j, o - i - j));
    }
    return out;
}

inline bool mi_leq(const MultiIndex& b, const MultiIndex& a) {
    for (int i = 0; i < a.dim; ++i)
        if (b[i] > a[i]) return false;
    return true;
}

inline MultiIndex mi_sub(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex r = a;
    for (int i = 0; i < a.dim; ++i) r[i] = a[i] - b[i];
    return r;
}

inline double mi_binom(const MultiIndex& a, const MultiIndex& b) {
    double r = 1;
    for (int i = 0; i < a.dim; ++i) r *= binom(a[i], b[i]);
    return r;
}

inline double mi_factorial(const MultiIndex& a) {
    double r = 1;
    for (int i = 0; i < a.dim; ++i)
        for (int j = 2; j <= a[i]; ++j) r *= j;
    return r;
}

// (y-x)^beta
inline double mi_pow(const Point& y, const Point& x, const MultiIndex& beta) {
    double r = 1;
    for (int i = 0; i < beta.dim; ++i) r *= std::pow(y[i] - x[i], beta[i]);
    return r;
}

inline std::string mi_key(const MultiIndex& a) {
    std::string s = std::to_string(a[0]);
    for (int i = 1; i < a.dim; ++i) s += "," + std::to_string(a[i]);
    return s;
}

}  // namespace ultra
