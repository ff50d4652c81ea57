#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <utility>
#include <vector>

#include "ultra/common.hpp"

namespace ultra::pwp {

using Rational = boost::multiprecision::cpp_rational;

constexpr int kDegreeCap = 64;

template <class T>
inline T tabs(const T& x) {
    return x < T(0) ? T(-x) : x;
}

template <class T>
inline double to_double(const T& x) {
    if constexpr (std::is_same_v<T, double>)
        return x;
    else
        return x.template convert_to<double>();
}

template <class T>
struct ScalarTraits {
    // breakpoint merge tolerance after union refinement
    static T merge_tol(const T& scale) {
        if constexpr (std::is_same_v<T, double>)
            return std::max(1e-14, 1e-14 * tabs(scale));
        else
            return T(0);
    }
};

// dense polynomial in a local variable t, coefficients c[0] + c[1] t + ...
template <class T>
using Coeffs = std::vector<T>;

template <class T>
T poly_eval(const Coeffs<T>& c, const T& t) {
    T r(0);
    for (std::size_t i = c.size(); i-- > 0;) r = r * t + c[i];
    return r;
}

// j-th derivative value
template <class T>
T poly_eval_deriv(const Coeffs<T>& c, const T& t, int j) {
    if (j >= int(c.size())) return T(0);
    Coeffs<T> d(c.size() - std::size_t(j));
    for (std::size_t i = 0; i < d.size(); ++i) {
        T f(1);
        for (int q = 0; q < j; ++q) f *= T(int(i) + j - q);
        d[i] = c[i + std::size_t(j)] * f;
    }
    return poly_eval(d, t);
}

// rebase coefficients from local variable t to s = t - delta
template <class T>
Coeffs<T> poly_shift(const Coeffs<T>& c, const T& delta) {
    std::size_t n = c.size();
    Coeffs<T> d(c);
    // synthetic division: repeatedly divide by (s) at offset delta
    for (std::size_t j = 0; j + 1 < n; ++j)
        for (std::size_t i = n - 1; i > j; --i) d[i - 1] += d[i] * delta;
    return d;
}

template <class T>
Coeffs<T> poly_mul(const Coeffs<T>& a, const Coeffs<T>& b) {
    if (a.empty() || b.empty()) return {};
    if (int(a.size() + b.size()) - 2 > kDegreeCap)
        throw std::invalid_argument("pwpoly: degree cap 64 exceeded in product");
    Coeffs<T> r(a.size() + b.size() - 1, T(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

// ---------------------------------------------------------------------------
// Bernstein-enclosure sup norm
// ---------------------------------------------------------------------------

namespace detail {

// Bernstein coefficients of p(t) = sum c_j t^j on [0, w]
template <class T>
Coeffs<T> to_bernstein(const Coeffs<T>& c, const T& w) {
    int d = int(c.size()) - 1;
    Coeffs<T> b(std::size_t(d) + 1, T(0));
    std::vector<T> wpow(std::size_t(d) + 1, T(1));
    for (int j = 1; j <= d; ++j) wpow[std::size_t(j)] = wpow[std::size_t(j - 1)] * w;
    for (int i = 0; i <= d; ++i) {
        T s(0);
        for (int j = 0; j <= i; ++j) {
            // binom(i,j)/binom(d,j)
            T num(1), den(1);
            for (int q = 0; q < j; ++q) {
                num *= T(i - q);
                den *= T(d - q);
            }
            s += c[std::size_t(j)] * wpow[std::size_t(j)] * num / den;
        }
        b[std::size_t(i)] = s;
    }
    return b;
}

template <class T>
void decasteljau_split(const Coeffs<T>& b, Coeffs<T>& left, Coeffs<T>& right) {
    std::size_t n = b.size();
    left.resize(n);
    right.resize(n);
    Coeffs<T> tmp(b);
    left[0] = tmp[0];
    right[n - 1] = tmp[n - 1];
    T half = T(1) / T(2);
    for (std::size_t lev = 1; lev < n; ++lev) {
        for (std::size_t i = 0; i + lev < n; ++i) tmp[i] = (tmp[i] + tmp[i + 1]) * half;
        left[lev] = tmp[0];
        right[n - 1 - lev] = tmp[n - 1 - lev];
    }
}

// branch-and-bound max of |p| with a Bernstein enclosure
template <class T>
void bb_sup(const Coeffs<T>& b, int depth, T& lower, T& radius, int max_depth) {
    T ub(0);
    for (const auto& v : b) ub = std::max(ub, tabs(v));
    // endpoint values are exact values of p
    lower = std::max(lower, std::max(tabs(b.front()), tabs(b.back())));
    if (ub <= lower) return;
    if (depth >= max_depth) {
        radius = std::max(radius, T(ub - lower));
        lower = std::max(lower, ub);
        return;
    }
    Coeffs<T> l, r;
    decasteljau_split(b, l, r);
    bb_sup(l, depth + 1, lower, radius, max_depth);
    bb_sup(r, depth + 1, lower, radius, max_depth);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PiecewisePoly
// ---------------------------------------------------------------------------

template <class T>
class PiecewisePoly {
public:
    PiecewisePoly() = default;

    // pieces: coef[i] on [breaks[i], breaks[i+1]) in local basis at breaks[i]
    PiecewisePoly(std::vector<T> breaks, std::vector<Coeffs<T>> coef, int smoothness,
                  bool compact_support = true)
        : breaks_(std::move(breaks)), coef_(std::move(coef)), smooth_(smoothness),
          compact_(compact_support) {
        if (breaks_.size() != coef_.size() + 1)
            throw std::invalid_argument("PiecewisePoly: breaks/coef size mismatch");
        for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
            if (!(breaks_[i] < breaks_[i + 1]))
                throw std::invalid_argument("PiecewisePoly: breakpoints must increase strictly");
    }

    static PiecewisePoly zero() {
        return PiecewisePoly({T(0), T(1)}, {Coeffs<T>{T(0)}}, kDegreeCap, true);
    }

    // H_a = (1/a) 1_{(0,a)}
    static PiecewisePoly step(const T& a) {
        return PiecewisePoly({T(0), a}, {Coeffs<T>{T(1) / a}}, 0, true);
    }

    static PiecewisePoly indicator(const T& lo, const T& hi, const T& value = T(1)) {
        return PiecewisePoly({lo, hi}, {Coeffs<T>{value}}, 0, true);
    }

    static PiecewisePoly constant_one(const T& lo, const T& hi) { return indicator(lo, hi, T(1)); }

    const std::vector<T>& breaks() const { return breaks_; }
    const std::vector<Coeffs<T>>& coeffs() const { return coef_; }
    int smoothness() const { return smooth_; }
    bool compact_support() const { return compact_; }
    std::pair<T, T> support() const { return {breaks_.front(), breaks_.back()}; }
    int degree() const {
        std::size_t d = 0;
        for (const auto& c : coef_) d = std::max(d, c.size());
        return d == 0 ? 0 : int(d) - 1;
    }

    T eval(const T& x) const {
        int i = locate(x);
        if (i < 0) return T(0);
        if (i >= int(coef_.size())) return compact_ ? T(0) : final_value();
        return poly_eval(coef_[std::size_t(i)], T(x - breaks_[std::size_t(i)]));
    }

    T eval_deriv(const T& x, int j) const {
        if (j == 0) return eval(x);
        int i = locate(x);
        if (i < 0 || i >= int(coef_.size())) return T(0);
        return poly_eval_deriv(coef_[std::size_t(i)], T(x - breaks_[std::size_t(i)]), j);
    }

    // derivative orders 0..jmax at once
    std::vector<T> eval_derivs(const T& x, int jmax) const {
        std::vector<T> out(std::size_t(jmax) + 1, T(0));
        int i = locate(x);
        if (i < 0 || i >= int(coef_.size())) {
            if (i >= int(coef_.size()) && !compact_) out[0] = final_value();
            return out;
        }
        for (int j = 0; j <= jmax; ++j)
            out[std::size_t(j)] = poly_eval_deriv(coef_[std::size_t(i)], T(x - breaks_[std::size_t(i)]), j);
        return out;
    }

    PiecewisePoly derivative() const {
        std::vector<Coeffs<T>> out(coef_.size());
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            const auto& c = coef_[i];
            if (c.size() <= 1) {
                out[i] = Coeffs<T>{T(0)};
                continue;
            }
            Coeffs<T> d(c.size() - 1);
            for (std::size_t j = 1; j < c.size(); ++j) d[j - 1] = c[j] * T(int(j));
            out[i] = std::move(d);
        }
        return PiecewisePoly(breaks_, std::move(out), std::max(0, smooth_ - 1), compact_);
    }

    // antiderivative F with F(first break) = 0; constant (total mass) to the right
    PiecewisePoly antiderivative() const {
        std::vector<Coeffs<T>> out(coef_.size());
        T acc(0);
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            const auto& c = coef_[i];
            Coeffs<T> d(c.size() + 1);
            d[0] = acc;
            for (std::size_t j = 0; j < c.size(); ++j) d[j + 1] = c[j] / T(int(j) + 1);
            T w = breaks_[i + 1] - breaks_[i];
            acc = poly_eval(d, w);
            out[i] = std::move(d);
        }
        return PiecewisePoly(breaks_, std::move(out), smooth_ + 1, false);
    }

    T integral() const {
        T acc(0);
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            const auto& c = coef_[i];
            T w = breaks_[i + 1] - breaks_[i];
            T wp = w;
            for (std::size_t j = 0; j < c.size(); ++j) {
                acc += c[j] * wp / T(int(j) + 1);
                wp *= w;
            }
        }
        return acc;
    }

    // f * H_a: (F(x) - F(x-a)) / a; raises smoothness by one, widens support by a
    PiecewisePoly convolve_step(const T& a) const {
        if (!(a > T(0))) throw std::invalid_argument("convolve_step: a must be > 0");
        PiecewisePoly F = antiderivative();
        std::vector<T> bp;
        bp.reserve(breaks_.size() * 2);
        for (const auto& b : breaks_) bp.push_back(b);
        for (const auto& b : breaks_) bp.push_back(b + a);
        return difference_of_shifts(F, T(0), a, a, smooth_ + 1, bp);
    }

    // f * 1_{[lo,hi]}: F(x-lo) - F(x-hi)
    PiecewisePoly convolve_indicator(const T& lo, const T& hi) const {
        if (!(lo < hi)) throw std::invalid_argument("convolve_indicator: lo < hi required");
        PiecewisePoly F = antiderivative();
        std::vector<T> bp;
        for (const auto& b : breaks_) {
            bp.push_back(b + lo);
            bp.push_back(b + hi);
        }
        return difference_of_shifts(F, lo, hi, T(1), smooth_ + 1, bp);
    }

    PiecewisePoly shift(const T& dx) const {
        std::vector<T> b(breaks_);
        for (auto& v : b) v += dx;
        return PiecewisePoly(std::move(b), coef_, smooth_, compact_);
    }

    PiecewisePoly reflect() const {  // g(x) = f(-x)
        std::size_t m = coef_.size();
        std::vector<T> b(breaks_.size());
        for (std::size_t i = 0; i < breaks_.size(); ++i) b[i] = -breaks_[breaks_.size() - 1 - i];
        std::vector<Coeffs<T>> out(m);
        for (std::size_t i = 0; i < m; ++i) {
            const auto& c = coef_[m - 1 - i];
            T w = breaks_[m - i] - breaks_[m - 1 - i];
            // new local variable s in [0,w] maps to old t = w - s:
            // coeff of s^e in sum_j c_j (w-s)^j is (-1)^e sum_{j>=e} c_j C(j,e) w^{j-e}
            std::size_t n = c.size();
            auto C = binom_table(int(n));
            Coeffs<T> flip(n, T(0));
            for (std::size_t e = 0; e < n; ++e) {
                T s(0);
                T wp(1);
                for (std::size_t j = e; j < n; ++j) {
                    s += c[j] * C[j][e] * wp;
                    wp *= w;
                }
                flip[e] = (e % 2 == 0) ? s : T(-s);
            }
            out[i] = std::move(flip);
        }
        return PiecewisePoly(std::move(b), std::move(out), smooth_, compact_);
    }

    PiecewisePoly scale_values(const T& c) const {
        std::vector<Coeffs<T>> out(coef_);
        for (auto& piece : out)
            for (auto& v : piece) v *= c;
        return PiecewisePoly(breaks_, std::move(out), smooth_, compact_);
    }

    // g(x) = f(a x + b), a > 0
    PiecewisePoly compose_affine(const T& a, const T& b) const {
        if (!(a > T(0))) throw std::invalid_argument("compose_affine: a must be > 0");
        std::vector<T> nb(breaks_.size());
        for (std::size_t i = 0; i < breaks_.size(); ++i) nb[i] = (breaks_[i] - b) / a;
        std::vector<Coeffs<T>> out(coef_.size());
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            Coeffs<T> d(coef_[i]);
            T ap(1);
            for (auto& v : d) {
                v *= ap;
                ap *= a;
            }
            out[i] = std::move(d);
        }
        return PiecewisePoly(std::move(nb), std::move(out), smooth_, compact_);
    }

    // f(x) * scale * x^k, expanded exactly per piece
    PiecewisePoly multiply_monomial(int k, const T& scale) const {
        auto C = binom_table(k + 1);
        std::vector<Coeffs<T>> out(coef_.size());
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            // x = t + breaks_[i] in local coords
            Coeffs<T> mono(std::size_t(k) + 1, T(0));
            T b = breaks_[i];
            for (int q = 0; q <= k; ++q)
                mono[std::size_t(q)] = C[std::size_t(k)][std::size_t(q)] * pow_int(b, k - q);
            for (auto& v : mono) v *= scale;
            out[i] = poly_mul(coef_[i], mono);
        }
        return PiecewisePoly(breaks_, std::move(out), smooth_, compact_);
    }

    PiecewisePoly operator+(const PiecewisePoly& g) const { return combine(g, true); }
    PiecewisePoly operator-(const PiecewisePoly& g) const { return combine(g, false); }

    PiecewisePoly multiply(const PiecewisePoly& g) const {
        auto bp = merged_breaks(g);
        std::vector<Coeffs<T>> out(bp.size() - 1);
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            T mid = (bp[i] + bp[i + 1]) / T(2);
            Coeffs<T> a = local_coeffs(mid, bp[i]);
            Coeffs<T> b = g.local_coeffs(mid, bp[i]);
            if (a.empty() || b.empty())
                out[i] = Coeffs<T>{T(0)};
            else
                out[i] = poly_mul(a, b);
        }
        return PiecewisePoly(std::move(bp), std::move(out),
                             std::min(smooth_, g.smooth_), compact_ && g.compact_);
    }

    // certified sup of |f^{(j)}| over [a, b] (whole support if a >= b):
    // returns {value, radius}, true sup in [value - radius, value + radius]
    std::pair<T, T> sup_norm_certified(int j = 0, const T& a = T(0), const T& b = T(0)) const {
        bool whole = !(a < b);
        T lower(0), radius(0);
        int max_depth = std::is_same_v<T, double> ? 48 : 80;
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            T lo = breaks_[i], hi = breaks_[i + 1];
            if (!whole) {
                lo = std::max(lo, a);
                hi = std::min(hi, b);
                if (!(lo < hi)) continue;
            }
            Coeffs<T> c = piece_deriv_coeffs(i, j);
            if (c.empty()) continue;
            c = poly_shift(c, T(lo - breaks_[i]));  // rebase to lo
            Coeffs<T> bern = detail::to_bernstein(c, T(hi - lo));
            detail::bb_sup(bern, 0, lower, radius, max_depth);
        }
        return {lower, radius};
    }

    double sup_norm(int j = 0) const {
        auto [v, r] = sup_norm_certified(j);
        return to_double<T>(v) + to_double<T>(r);
    }

    // rigorous proof attempt of sup |f^{(j)}| <= bound; false when a point
    // value exceeds the bound or the enclosure cannot be tightened
    bool sup_bounded_by(int j, const T& bound) const {
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            Coeffs<T> c = piece_deriv_coeffs(i, j);
            if (c.empty()) continue;
            Coeffs<T> bern = detail::to_bernstein(c, T(breaks_[i + 1] - breaks_[i]));
            if (!bounded_rec(bern, bound, 0, 64)) return false;
        }
        return true;
    }

    // max discontinuity of derivative orders 0..smoothness-1 at interior breaks
    double continuity_defect() const {
        double worst = 0.0;
        for (std::size_t i = 1; i < breaks_.size() - 1; ++i) {
            T w = breaks_[i] - breaks_[i - 1];
            for (int j = 0; j <= std::max(0, smooth_ - 1); ++j) {
                T left = poly_eval_deriv(coef_[i - 1], w, j);
                T right = poly_eval_deriv(coef_[i], T(0), j);
                double scale = std::max({1.0, std::abs(to_double<T>(left)), std::abs(to_double<T>(right))});
                worst = std::max(worst, std::abs(to_double<T>(T(left - right))) / scale);
            }
        }
        return worst;
    }

    // rescale so that the function is exactly `one` on constant pieces whose
    // value is within reltol of the current plateau value
    PiecewisePoly normalized_to_plateau() const {
        // plateau value: max over constant-candidate midpoints
        T best(0);
        for (std::size_t i = 0; i < coef_.size(); ++i) {
            T mid = (breaks_[i] + breaks_[i + 1]) / T(2);
            T v = eval(mid);
            if (tabs(v) > tabs(best)) best = v;
        }
        if (best == T(0)) return *this;
        PiecewisePoly out = scale_values(T(1) / best);
        for (std::size_t i = 0; i < out.coef_.size(); ++i) {
            bool constant = true;
            for (std::size_t j = 1; j < out.coef_[i].size(); ++j)
                if (out.coef_[i][j] != T(0)) constant = false;
            if (constant && out.coef_[i].size() >= 1) {
                double v = to_double<T>(out.coef_[i][0]);
                if (std::abs(v - 1.0) < 1e-9) out.coef_[i][0] = T(1);
            }
        }
        return out;
    }

    PiecewisePoly<double> to_double_poly() const {
        std::vector<double> b(breaks_.size());
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = to_double<T>(breaks_[i]);
        std::vector<Coeffs<double>> c(coef_.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            c[i].resize(coef_[i].size());
            for (std::size_t j = 0; j < coef_[i].size(); ++j) c[i][j] = to_double<T>(coef_[i][j]);
        }
        // collapse breakpoints that collide in double
        std::vector<double> b2;
        std::vector<Coeffs<double>> c2;
        b2.push_back(b[0]);
        for (std::size_t i = 0; i + 1 < b.size(); ++i) {
            if (b[i + 1] > b2.back()) {
                c2.push_back(c[i]);
                b2.push_back(b[i + 1]);
            }
        }
        return PiecewisePoly<double>(std::move(b2), std::move(c2), smooth_, compact_);
    }

    std::size_t piece_count() const { return coef_.size(); }

private:
    std::vector<T> breaks_;
    std::vector<Coeffs<T>> coef_;
    int smooth_ = 0;
    bool compact_ = true;

    static T pow_int(const T& x, int n) {
        T r(1);
        for (int i = 0; i < n; ++i) r *= x;
        return r;
    }

    // Pascal triangle rows 0..n in the scalar type (exact for rationals)
    static std::vector<std::vector<T>> binom_table(int n) {
        std::vector<std::vector<T>> C(std::size_t(n) + 1);
        for (int i = 0; i <= n; ++i) {
            C[std::size_t(i)].assign(std::size_t(i) + 1, T(1));
            for (int j = 1; j < i; ++j)
                C[std::size_t(i)][std::size_t(j)] =
                    C[std::size_t(i - 1)][std::size_t(j - 1)] + C[std::size_t(i - 1)][std::size_t(j)];
        }
        return C;
    }

    T final_value() const {
        const auto& c = coef_.back();
        return poly_eval(c, T(breaks_.back() - breaks_[breaks_.size() - 2]));
    }

    Coeffs<T> piece_deriv_coeffs(std::size_t i, int j) const {
        const auto& c = coef_[i];
        if (j == 0) return c;
        if (j >= int(c.size())) return {};
        Coeffs<T> d(c.size() - std::size_t(j));
        for (std::size_t q = 0; q < d.size(); ++q) {
            T f(1);
            for (int r = 0; r < j; ++r) f *= T(int(q) + j - r);
            d[q] = c[q + std::size_t(j)] * f;
        }
        return d;
    }

    static bool bounded_rec(const Coeffs<T>& bern, const T& bound, int depth, int max_depth) {
        T ub(0);
        for (const auto& v : bern) ub = std::max(ub, tabs(v));
        if (ub <= bound) return true;
        if (tabs(bern.front()) > bound || tabs(bern.back()) > bound) return false;
        if (depth >= max_depth) return false;
        Coeffs<T> l, r;
        detail::decasteljau_split(bern, l, r);
        return bounded_rec(l, bound, depth + 1, max_depth) &&
               bounded_rec(r, bound, depth + 1, max_depth);
    }

    int locate(const T& x) const {
        if (x < breaks_.front()) return -1;
        if (!(x < breaks_.back())) return int(coef_.size());
        // binary search for the piece with breaks[i] <= x < breaks[i+1]
        std::size_t lo = 0, hi = breaks_.size() - 1;
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (x < breaks_[mid])
                hi = mid;
            else
                lo = mid;
        }
        return int(lo);
    }

    // coefficients of this function on the piece containing `mid`, rebased to `base`
    Coeffs<T> local_coeffs(const T& mid, const T& base) const {
        int i = locate(mid);
        if (i < 0) return {};
        if (i >= int(coef_.size())) {
            if (compact_) return {};
            return Coeffs<T>{final_value()};
        }
        return poly_shift(coef_[std::size_t(i)], T(base - breaks_[std::size_t(i)]));
    }

    std::vector<T> merged_breaks(const PiecewisePoly& g) const {
        std::vector<T> bp(breaks_);
        bp.insert(bp.end(), g.breaks_.begin(), g.breaks_.end());
        std::sort(bp.begin(), bp.end());
        T scale = std::max(tabs(bp.front()), tabs(bp.back()));
        T tol = ScalarTraits<T>::merge_tol(scale);
        std::vector<T> out;
        for (const auto& v : bp)
            if (out.empty() || v - out.back() > tol) out.push_back(v);
        if (out.size() < 2) out.push_back(out.back() + T(1));
        return out;
    }

    PiecewisePoly combine(const PiecewisePoly& g, bool plus) const {
        auto bp = merged_breaks(g);
        std::vector<Coeffs<T>> out(bp.size() - 1);
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            T mid = (bp[i] + bp[i + 1]) / T(2);
            Coeffs<T> a = local_coeffs(mid, bp[i]);
            Coeffs<T> b = g.local_coeffs(mid, bp[i]);
            Coeffs<T> r(std::max(a.size(), b.size()), T(0));
            if (r.empty()) r.resize(1, T(0));
            for (std::size_t j = 0; j < a.size(); ++j) r[j] += a[j];
            for (std::size_t j = 0; j < b.size(); ++j) r[j] += plus ? b[j] : T(-b[j]);
            out[i] = std::move(r);
        }
        return PiecewisePoly(std::move(bp), std::move(out), std::min(smooth_, g.smooth_),
                             compact_ && g.compact_);
    }

    // h(x) = (F(x - lo) - F(x - hi)) / denom over merged shifted breakpoints
    static PiecewisePoly difference_of_shifts(const PiecewisePoly& F, const T& lo, const T& hi,
                                              const T& denom, int smooth, std::vector<T> bp_raw) {
        std::sort(bp_raw.begin(), bp_raw.end());
        T scale = std::max(tabs(bp_raw.front()), tabs(bp_raw.back()));
        T tol = ScalarTraits<T>::merge_tol(scale);
        std::vector<T> bp;
        for (const auto& v : bp_raw)
            if (bp.empty() || v - bp.back() > tol) bp.push_back(v);
        std::vector<Coeffs<T>> out(bp.size() - 1);
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            T mid = (bp[i] + bp[i + 1]) / T(2);
            // F(x - lo): local coeffs of F at (mid - lo), rebased so that the
            // local variable is x - bp[i]
            Coeffs<T> a = F.shifted_local(T(mid - lo), T(bp[i] - lo));
            Coeffs<T> b = F.shifted_local(T(mid - hi), T(bp[i] - hi));
            Coeffs<T> r(std::max(a.size(), b.size()), T(0));
            if (r.empty()) r.resize(1, T(0));
            for (std::size_t j = 0; j < a.size(); ++j) r[j] += a[j];
            for (std::size_t j = 0; j < b.size(); ++j) r[j] -= b[j];
            for (auto& v : r) v /= denom;
            out[i] = std::move(r);
        }
        return PiecewisePoly(std::move(bp), std::move(out), smooth, true);
    }

    // coefficients of F near point `at`, in local variable (y - base) where y
    // is F's own argument
    Coeffs<T> shifted_local(const T& at, const T& base) const {
        int i = locate(at);
        if (i < 0) return Coeffs<T>{T(0)};
        if (i >= int(coef_.size()))
            return Coeffs<T>{compact_ ? T(0) : final_value()};
        return poly_shift(coef_[std::size_t(i)], T(base - breaks_[std::size_t(i)]));
    }
};

using PwPoly = PiecewisePoly<double>;
using PwPolyQ = PiecewisePoly<Rational>;

// ---------------------------------------------------------------------------
// Tensor products of 1-D pieces, for dimensions <= 3.  Monomial multipliers
// are folded into the axis factors eagerly, so evaluation is a plain product
// and partial derivatives distribute (Leibniz bookkeeping is exact).
// ---------------------------------------------------------------------------

template <class T>
class TensorFunction {
public:
    TensorFunction() = default;
    explicit TensorFunction(std::vector<PiecewisePoly<T>> factors) : factors_(std::move(factors)) {
        if (factors_.empty() || factors_.size() > 3)
            throw std::invalid_argument("TensorFunction: 1..3 axis factors");
    }

    int dim() const { return int(factors_.size()); }
    const PiecewisePoly<T>& factor(int axis) const { return factors_[std::size_t(axis)]; }

    TensorFunction with_monomial(int axis, int k, const T& scale) const {
        auto f = factors_;
        f[std::size_t(axis)] = f[std::size_t(axis)].multiply_monomial(k, scale);
        return TensorFunction(std::move(f));
    }

    T eval(const Point& p) const {
        T r(1);
        for (int i = 0; i < dim(); ++i) r *= factors_[std::size_t(i)].eval(T(p[i]));
        return r;
    }

    T eval_deriv(const Point& p, const MultiIndex& alpha) const {
        T r(1);
        for (int i = 0; i < dim(); ++i)
            r *= factors_[std::size_t(i)].eval_deriv(T(p[i]), alpha[i]);
        return r;
    }

    // sup over R^n of |partial^alpha|: product of axis sups
    double sup_deriv(const MultiIndex& alpha) const {
        double r = 1;
        for (int i = 0; i < dim(); ++i) r *= factors_[std::size_t(i)].sup_norm(alpha[i]);
        return r;
    }

    std::vector<std::pair<double, double>> support_box() const {
        std::vector<std::pair<double, double>> box;
        for (const auto& f : factors_) {
            auto [lo, hi] = f.support();
            box.emplace_back(to_double<T>(lo), to_double<T>(hi));
        }
        return box;
    }

private:
    std::vector<PiecewisePoly<T>> factors_;
};

using Tensor = TensorFunction<double>;

}  // namespace ultra::pwp
