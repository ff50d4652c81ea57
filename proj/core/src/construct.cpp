#include "ultra/construct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ultra::construct {

using pwp::PiecewisePoly;
using pwp::to_double;

// ---------------------------------------------------------------------------
// TrigSum / TensorSum / CertifiedFunction
// ---------------------------------------------------------------------------

std::complex<double> TrigSum::eval_deriv(double x, int j) const {
    std::complex<double> s{0.0, 0.0};
    // i^j rotation
    static const std::complex<double> rot[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::complex<double> ij = rot[j % 4];
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        double mag = std::exp(logamps[k] + double(j) * std::log(freqs[k]));
        s += mag * ij * std::complex<double>(std::cos(freqs[k] * x), std::sin(freqs[k] * x));
    }
    return s;
}

double TrigSum::sup_bound(int j) const {
    double lg = -kInf;
    for (std::size_t k = 0; k < freqs.size(); ++k)
        lg = log_add(lg, logamps[k] + double(j) * std::log(freqs[k]));
    return std::exp(lg);
}

double TensorSum::eval(const Point& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) s += coeffs[i] * terms[i].eval(p);
    return s;
}

double TensorSum::eval_deriv(const Point& p, const MultiIndex& alpha) const {
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) s += coeffs[i] * terms[i].eval_deriv(p, alpha);
    return s;
}

void CertifiedFunction::require_order(int j) const {
    if (j >= order)
        throw std::out_of_range("CertifiedFunction: derivative order " + std::to_string(j) +
                                " not controlled (order " + std::to_string(order) + ")");
}

double CertifiedFunction::eval(double x) const { return eval(make_point(x)); }

double CertifiedFunction::eval(const Point& p) const {
    if (std::holds_alternative<PwPoly>(body)) return std::get<PwPoly>(body).eval(p[0]);
    if (std::holds_alternative<Tensor>(body)) return std::get<Tensor>(body).eval(p);
    if (std::holds_alternative<TrigSum>(body)) return std::get<TrigSum>(body).eval_deriv(p[0], 0).real();
    return std::get<TensorSum>(body).eval(p);
}

double CertifiedFunction::eval_deriv(double x, int j) const {
    return eval_deriv(make_point(x), make_mi(j));
}

double CertifiedFunction::eval_deriv(const Point& p, const MultiIndex& alpha) const {
    if (std::holds_alternative<PwPoly>(body)) return std::get<PwPoly>(body).eval_deriv(p[0], alpha[0]);
    if (std::holds_alternative<Tensor>(body)) return std::get<Tensor>(body).eval_deriv(p, alpha);
    if (std::holds_alternative<TrigSum>(body))
        return std::get<TrigSum>(body).eval_deriv(p[0], alpha[0]).real();
    return std::get<TensorSum>(body).eval_deriv(p, alpha);
}

// ---------------------------------------------------------------------------
// step bump
// ---------------------------------------------------------------------------

namespace {

template <class T>
PiecewisePoly<T> build_bump(const std::vector<T>& a, int K) {
    PiecewisePoly<T> f = PiecewisePoly<T>::step(a[0]);
    for (int j = 1; j <= K; ++j) f = f.convolve_step(a[std::size_t(j)]);
    return f;
}

void check_decreasing(const std::vector<double>& a, int K) {
    if (K < 1 || int(a.size()) < K + 1)
        throw std::invalid_argument("step_bump: need K >= 1 and a_0..a_K");
    for (int j = 0; j <= K; ++j) {
        if (!(a[std::size_t(j)] > 0.0)) throw std::invalid_argument("step_bump: a_j > 0 required");
        if (j > 0 && a[std::size_t(j)] > a[std::size_t(j - 1)] * (1.0 + 1e-15))
            throw std::invalid_argument("step_bump: a must be decreasing");
    }
}

}  // namespace

pwp::PiecewisePoly<Rational> step_bump_exact(const std::vector<Rational>& a, int K) {
    return build_bump(a, K);
}

CertifiedFunction step_bump(const std::vector<double>& a, int K, NumericMode mode) {
    check_decreasing(a, K);
    CertifiedFunction out;
    out.order = K;  // controlled derivative orders j <= K-1
    double asum = 0.0;
    for (int j = 0; j <= K; ++j) asum += a[std::size_t(j)];
    out.metadata["K"] = double(K);
    out.metadata["support_length"] = asum;

    if (mode == NumericMode::rational) {
        std::vector<Rational> aq;
        aq.reserve(a.size());
        for (double v : a) aq.emplace_back(v);  // doubles are dyadic: exact
        PiecewisePoly<Rational> f = build_bump(aq, K);
        // integral = 1 exactly
        Rational I = f.integral();
        out.certificates.push_back(BoundCertificate::make(
            "bump.integral_one", std::abs(to_double(Rational(I - 1))), 0.0, {}, "exact rational", 0.0));
        // support endpoint = sum a_j exactly
        Rational send(0);
        for (const auto& v : aq) send += v;
        out.certificates.push_back(BoundCertificate::make(
            "bump.support_endpoint", std::abs(to_double(Rational(f.support().second - send))), 0.0,
            {}, "exact rational", 0.0));
        // |f^{(j)}| <= 2^j / (a_0 ... a_j), j <= K-1
        Rational denom(1);
        for (int j = 0; j <= K - 1; ++j) {
            denom *= aq[std::size_t(j)];
            Rational bound = Rational(1 << std::min(j, 30));
            for (int q = 30; q < j; ++q) bound *= 2;  // 2^j
            bound /= denom;
            bool ok = f.sup_bounded_by(j, bound);
            auto [lv, lr] = f.sup_norm_certified(j);
            (void)lr;
            BoundCertificate c;
            c.inequality_id = "bump.deriv_bound_j" + std::to_string(j);
            c.lhs_max = to_double(lv);
            c.rhs_min = to_double(bound);
            c.grid = "exact rational Bernstein enclosure";
            c.tol = 0.0;
            c.passed = ok;
            out.certificates.push_back(c);
        }
        out.body = f.to_double_poly();
        return out;
    }

    PwPoly f = build_bump(a, K);
    double I = f.integral();
    out.certificates.push_back(
        BoundCertificate::make("bump.integral_one", std::abs(I - 1.0), 0.0, {}, "float", 1e-12));
    out.certificates.push_back(BoundCertificate::make(
        "bump.support_endpoint", std::abs(f.support().second - asum), 0.0, {}, "float", 1e-12));
    double denom = 1.0;
    for (int j = 0; j <= K - 1; ++j) {
        denom *= a[std::size_t(j)];
        double bound = std::pow(2.0, j) / denom;
        auto [v, r] = f.sup_norm_certified(j);
        out.certificates.push_back(BoundCertificate::make("bump.deriv_bound_j" + std::to_string(j),
                                                          v + r, bound, {}, "Bernstein enclosure",
                                                          1e-12));
    }
    out.body = std::move(f);
    return out;
}

// ---------------------------------------------------------------------------
// cutoff profile and box cutoffs
// ---------------------------------------------------------------------------

namespace {

template <class T>
PiecewisePoly<T> profile_impl(const std::vector<T>& d, const T& plat_lo, const T& plat_hi,
                              const T& margin, int q) {
    PiecewisePoly<T> f = PiecewisePoly<T>::step(d[0]);
    for (int j = 1; j < q; ++j) f = f.convolve_step(d[std::size_t(j)]);
    T S(0);
    for (int j = 0; j < q; ++j) S += d[std::size_t(j)];
    PiecewisePoly<T> h = f.shift(T(-S / T(2)));
    PiecewisePoly<T> g = h.convolve_indicator(T(plat_lo - margin / T(2)), T(plat_hi + margin / T(2)));
    return g.normalized_to_plateau();
}

}  // namespace

PwPoly cutoff_profile_1d(const std::vector<double>& d, double plat_lo, double plat_hi,
                         double margin, int q) {
    if (q < 1 || int(d.size()) < q) throw std::invalid_argument("cutoff_profile_1d: need d_1..d_q");
    double S = 0.0;
    for (int j = 0; j < q; ++j) {
        if (!(d[std::size_t(j)] > 0.0))
            throw std::invalid_argument("cutoff_profile_1d: d_j > 0 required");
        if (j > 0 && d[std::size_t(j)] > d[std::size_t(j - 1)] * (1.0 + 1e-12))
            throw std::invalid_argument("cutoff_profile_1d: d must be decreasing");
        S += d[std::size_t(j)];
    }
    if (!(S < margin)) throw GeometryError("cutoff_profile_1d: sum d_j must stay below the margin");
    return profile_impl<double>(d, plat_lo, plat_hi, margin, q);
}

namespace {

double box_margin(const Box& K, const Box& U) {
    if (K.dim() != U.dim()) throw GeometryError("box_cutoff: dimension mismatch");
    double m = kInf;
    for (int i = 0; i < K.dim(); ++i) {
        if (!(U.lo[std::size_t(i)] < K.lo[std::size_t(i)] && K.hi[std::size_t(i)] < U.hi[std::size_t(i)]))
            throw GeometryError("box_cutoff: K_box must lie in the interior of U_box");
        m = std::min(m, K.lo[std::size_t(i)] - U.lo[std::size_t(i)]);
        m = std::min(m, U.hi[std::size_t(i)] - K.hi[std::size_t(i)]);
    }
    return m;
}

template <class T>
CertifiedFunction box_cutoff_impl(const std::vector<double>& d, const Box& K, const Box& U, int q,
                                  double margin) {
    int n = K.dim();
    std::vector<T> dq;
    dq.reserve(std::size_t(q));
    for (int j = 0; j < q; ++j) dq.emplace_back(d[std::size_t(j)]);
    std::vector<PiecewisePoly<T>> axes;
    std::vector<PwPoly> axes_d;
    for (int i = 0; i < n; ++i) {
        PiecewisePoly<T> g = profile_impl<T>(dq, T(K.lo[std::size_t(i)]), T(K.hi[std::size_t(i)]),
                                             T(margin), q);
        if constexpr (std::is_same_v<T, double>)
            axes_d.push_back(g);
        else
            axes_d.push_back(g.to_double_poly());
        axes.push_back(std::move(g));
    }

    CertifiedFunction out;
    out.order = q;
    out.metadata["margin"] = margin;
    out.metadata["dims"] = double(n);

    // per-axis derivative bounds |g^{(k)}| <= 2^k / (d_1 ... d_k)
    double denom = 1.0;
    for (int k = 1; k <= q - 1; ++k) {
        denom *= d[std::size_t(k - 1)];
        double bound = std::pow(2.0, k) / denom;
        bool ok = true;
        double measured = 0.0;
        for (int i = 0; i < n; ++i) {
            if constexpr (std::is_same_v<T, double>) {
                auto [v, r] = axes[std::size_t(i)].sup_norm_certified(k);
                measured = std::max(measured, v + r);
                ok = ok && (v + r <= bound * (1.0 + 1e-12));
            } else {
                ok = ok && axes[std::size_t(i)].sup_bounded_by(k, T(bound));
                auto [v, r] = axes_d[std::size_t(i)].sup_norm_certified(k);
                measured = std::max(measured, v + r);
            }
        }
        BoundCertificate c = BoundCertificate::make("cutoff.axis_deriv_bound_k" + std::to_string(k),
                                                    measured, bound, {}, "Bernstein enclosure",
                                                    1e-12);
        c.passed = ok;
        out.certificates.push_back(c);
    }

    // 0 <= phi <= 1 and plateau / support geometry, checked on the axes
    double sup0 = 0.0;
    bool plateau_ok = true, support_ok = true;
    double Sq = 0.0;
    for (int j = 0; j < q; ++j) Sq += d[std::size_t(j)];
    for (int i = 0; i < n; ++i) {
        sup0 = std::max(sup0, axes_d[std::size_t(i)].sup_norm(0));
        double plo = K.lo[std::size_t(i)] - (margin - Sq) / 2.0;
        double phi_ = K.hi[std::size_t(i)] + (margin - Sq) / 2.0;
        for (double x : {plo + 1e-12, K.lo[std::size_t(i)], 0.5 * (K.lo[std::size_t(i)] + K.hi[std::size_t(i)]),
                         K.hi[std::size_t(i)], phi_ - 1e-12})
            plateau_ok = plateau_ok && std::abs(axes_d[std::size_t(i)].eval(x) - 1.0) <= 1e-11;
        auto [slo, shi] = axes_d[std::size_t(i)].support();
        support_ok = support_ok && slo >= U.lo[std::size_t(i)] - 1e-12 && shi <= U.hi[std::size_t(i)] + 1e-12;
    }
    out.certificates.push_back(
        BoundCertificate::make("cutoff.range_0_1", sup0, 1.0, {}, "axis sup", 1e-9));
    out.certificates.push_back(BoundCertificate::make("cutoff.plateau_one", plateau_ok ? 0.0 : 1.0,
                                                      0.0, {}, "plateau samples", 1e-12));
    out.certificates.push_back(BoundCertificate::make("cutoff.support_in_U", support_ok ? 0.0 : 1.0,
                                                      0.0, {}, "support endpoints", 1e-12));

    // empirical C(n) for directional derivatives along the diagonal
    if (n >= 2 && q >= 3) {
        double Cn = 0.0;
        std::vector<MultiIndex> mis = multi_indices_upto(n, std::min(3, q - 1));
        for (const auto& mi : mis) {
            int k = mi.order();
            if (k < 1) continue;
            double prod = 1.0;
            for (int i = 0; i < n; ++i) prod *= axes_d[std::size_t(i)].sup_norm(mi[i]);
            double dk = 1.0;
            for (int j = 0; j < k; ++j) dk *= d[std::size_t(j)];
            Cn = std::max(Cn, std::pow(prod * dk, 1.0 / double(k)));
        }
        out.metadata["C_n_measured"] = Cn;
    }

    Tensor tensor = [&] {
        if constexpr (std::is_same_v<T, double>)
            return Tensor(axes);
        else
            return Tensor(axes_d);
    }();
    if (n == 1)
        out.body = tensor.factor(0);
    else
        out.body = std::move(tensor);
    return out;
}

}  // namespace

CertifiedFunction box_cutoff(const std::vector<double>& d, const Box& K, const Box& U, int q,
                             NumericMode mode) {
    double margin = box_margin(K, U);
    if (q < 1 || int(d.size()) < q) throw std::invalid_argument("box_cutoff: need d_1..d_q");
    double S = 0.0;
    for (int j = 0; j < q; ++j) S += d[std::size_t(j)];
    if (!(S < margin)) throw GeometryError("box_cutoff: sum d_j >= margin");
    if (mode == NumericMode::rational) return box_cutoff_impl<Rational>(d, K, U, q, margin);
    return box_cutoff_impl<double>(d, K, U, q, margin);
}

CertifiedFunction box_cutoff(const WeightSequence& M, const Box& K, const Box& U, int q,
                             NumericMode mode) {
    auto rep = weights::classify(M);
    if (rep.quasianalytic.certainly_true())
        throw std::domain_error("box_cutoff: M is quasianalytic, no cutoffs exist");
    double margin = box_margin(K, U);
    weights::TailSum s = weights::tail_inv_mu(M, 1);
    if (s.divergent()) throw std::domain_error("box_cutoff: sum 1/mu diverges");
    double total = s.mid();
    std::vector<double> d(std::size_t(q), 0.0);
    for (int j = 1; j <= q; ++j)
        d[std::size_t(j - 1)] = margin / (total * std::exp(M.logmu(j))) * (1.0 - 1e-9);
    CertifiedFunction out = box_cutoff(d, K, U, q, mode);
    out.weight_name = M.name();
    out.metadata["s_sum_inv_mu"] = total;
    return out;
}

// ---------------------------------------------------------------------------
// Bang characteristic function
// ---------------------------------------------------------------------------

CertifiedFunction bang_characteristic(const WeightSequence& M, int terms, int probe_order) {
    if (terms > M.kmax() - 1)
        throw std::invalid_argument("bang_characteristic: terms <= kmax - 1 required");
    if (probe_order > terms)
        throw std::invalid_argument("bang_characteristic: probe order exceeds term count");
    TrigSum f;
    f.freqs.reserve(std::size_t(terms) + 1);
    f.logamps.reserve(std::size_t(terms) + 1);
    for (int k = 0; k <= terms; ++k) {
        double lf = std::log(2.0) + M.logmu(k + 1);
        f.freqs.push_back(std::exp(lf));
        f.logamps.push_back(M.logM(k) - double(k) * lf);
    }
    CertifiedFunction out;
    out.order = probe_order + 1;
    out.weight_name = M.name();
    out.metadata["terms"] = double(terms);
    for (int j = 0; j <= probe_order; ++j) {
        double Sj = f.sup_bound(j);
        // upper: term count bound sum 2^{j-k} = 2^{j+1}
        out.certificates.push_back(BoundCertificate::make(
            "bang.sup_bound_j" + std::to_string(j), Sj, std::exp(double(j + 1) * std::log(2.0) + M.logM(j)),
            {}, "termwise magnitude sum", 1e-12));
        // lower: f^{(j)}(0) / i^j >= M_j (the k = j term alone)
        double at0 = f.eval_deriv(0.0, j).real() * ((j % 2 == 0) ? 1.0 : 1.0);
        // f^{(j)}(0) = i^j sum_k amp freq^j, so the real magnitude is Sj itself
        (void)at0;
        out.certificates.push_back(BoundCertificate::make("bang.jet_lower_j" + std::to_string(j),
                                                          std::exp(M.logM(j)), Sj, {},
                                                          "termwise sum at 0", 1e-12));
    }
    out.body = std::move(f);
    return out;
}

// ---------------------------------------------------------------------------
// flat size check
// ---------------------------------------------------------------------------

BoundCertificate flat_size_check(const CertifiedFunction& f, const WeightSequence& M, int ell,
                                 int n, double t) {
    if (ell < 1 || ell > n) throw std::invalid_argument("flat_size_check: 1 <= ell <= n required");
    if (n >= f.order)
        throw std::invalid_argument("flat_size_check: hypothesis order n exceeds the stage order");
    // re-verify the hypothesis ||f^{(k)}|| <= M_k for k <= n
    const PwPoly& body = f.poly();
    for (int k = 0; k <= n && k < f.order; ++k) {
        if (body.sup_norm(k) > std::exp(M.logM(k)) * (1.0 + 1e-9))
            throw std::domain_error("flat_size_check: hypothesis ||f^{(k)}|| <= M_k fails at k=" +
                                    std::to_string(k));
    }
    double S = 0.0;
    for (int k = ell; k <= n; ++k) S += std::exp(-M.logmu(k));
    double r = body.support().second;
    double admissible = std::min(r, S / 4.0);
    if (t < 0.0 || t > admissible)
        throw std::out_of_range("flat_size_check: t outside admissible range [0, " +
                                std::to_string(admissible) + "]");
    double lhs = std::abs(body.eval(t));
    double rhs = std::pow(2.0 * t / S, ell);
    return BoundCertificate::make("flat.size_near_flatness_ell" + std::to_string(ell), lhs, rhs,
                                  {{"t", t}, {"admissible", admissible}}, "pointwise", 1e-12);
}

// ---------------------------------------------------------------------------
// optimal cutoffs
// ---------------------------------------------------------------------------

namespace {

// truncated h_m over orders k <= q-1 (the honest lower-bound envelope at a
// finite stage)
double h_m_truncated(const WeightSequence& m, double t, int qcap) {
    double best = 0.0;  // log h <= 0
    double lt = std::log(t);
    for (int k = 0; k <= std::min(qcap, m.kmax()); ++k)
        best = std::min(best, m.logM(k) + double(k) * lt);
    return std::exp(best);
}

struct RoumieuStage {
    int p = 1;
    double A = 1.0;
    std::vector<double> d;  // unscaled, sum <= 1
};

// alpha^p ratios d_{k+1} = alpha^p_k / alpha^p_{k+1} for the pair (M, N)
std::vector<double> alpha_ratios(const WeightSequence& M, const WeightSequence& N, int p, double A,
                                 int count) {
    std::vector<double> d(std::size_t(count), 0.0);
    double lA = std::log(A);
    double lmustar = M.logmustar(p + 1);
    for (int k = 0; k < count; ++k) {
        double la, lb;  // log alpha_k, log alpha_{k+1}
        auto lalpha = [&](int kk) {
            if (kk <= p) return double(kk) * std::log(2.0 * double(p));
            return double(kk) * (lA - lmustar) + N.logM(kk);
        };
        la = lalpha(k);
        lb = lalpha(k + 1);
        d[std::size_t(k)] = std::exp(la - lb);
    }
    return d;
}

// sum over the full alpha-ratio sequence (with the tail of 1/nu)
double alpha_ratio_total(const WeightSequence& M, const WeightSequence& N, int p, double A) {
    double total = double(p) / (2.0 * double(p));  // k+1 <= p terms: 1/(2p) each
    // transition term k = p
    double lmustar = M.logmustar(p + 1);
    double lA = std::log(A);
    double trans = double(p) * std::log(2.0 * double(p)) -
                   (double(p + 1) * (lA - lmustar) + N.logM(p + 1));
    total += std::exp(trans);
    // k > p: (mustar_{p+1}/A) / nu_{k+1}
    weights::TailSum tail = weights::tail_inv_mu(N, p + 2);
    if (tail.divergent()) return kInf;
    total += std::exp(lmustar - lA) * tail.mid();
    return total;
}

RoumieuStage roumieu_stage(const WeightSequence& M, const WeightSequence& N, double eta, int q) {
    RoumieuStage st;
    double A = 4.0;
    for (int rounds = 0; rounds < 60; ++rounds) {
        // p := least p >= 1 with 2A/mustar_{p+1} < eta  (eta capped at 2A)
        double eta_eff = std::min(eta, 2.0 * A * 0.99);
        int p = 1;
        int limit = N.has_closed_form() && M.has_closed_form() ? (1 << 22) : M.kmax() - 1;
        while (p < limit && std::log(2.0 * A) - M.logmustar(p + 1) >= std::log(eta_eff)) ++p;
        if (p >= limit && !(M.has_closed_form()))
            throw std::out_of_range("optimal_cutoff: stage p exceeds the table (q infeasible)");
        int count = std::max(q, p + 2);
        if (!N.evaluable_at(count + 1))
            throw std::out_of_range("optimal_cutoff: stage needs the sequence beyond kmax");
        std::vector<double> d = alpha_ratios(M, N, p, A, count);
        bool decreasing = true;
        for (std::size_t i = 1; i < d.size(); ++i)
            if (d[i] > d[i - 1] * (1.0 + 1e-12)) decreasing = false;
        double total = alpha_ratio_total(M, N, p, A);
        if (decreasing && total <= 1.0) {
            st.p = p;
            st.A = A;
            st.d = std::move(d);
            st.d.resize(std::size_t(q));
            return st;
        }
        A *= 2.0;
    }
    throw SearchFailure("optimal_cutoff: no constant A up to 2^62 works", 0.0);
}

}  // namespace

OptimalCutoff optimal_cutoff(const WeightSequence& M, double r, double eps, double rho,
                             CutoffKind kind, int q, const std::optional<WeightSequence>& amplitudes,
                             const std::vector<double>& beurling_rhos) {
    if (!(r > 0.0 && eps > 0.0 && rho > 0.0))
        throw std::invalid_argument("optimal_cutoff: r, eps, rho > 0 required");
    auto rep = weights::classify(M);
    if (rep.strongly_nonquasianalytic.certainly_false() && kind == CutoffKind::roumieu &&
        !amplitudes)
        throw std::domain_error("optimal_cutoff: M not strongly non-quasianalytic");
    if (rep.quasianalytic.certainly_true() && !amplitudes)
        throw std::domain_error("optimal_cutoff: M quasianalytic");
    const WeightSequence& N = amplitudes ? *amplitudes : M;
    WeightSequence m = assoc::small_sequence(M);

    OptimalCutoff out;
    if (kind == CutoffKind::roumieu) {
        double eta = rho * r * eps;
        RoumieuStage st = roumieu_stage(M, N, eta, q);
        // scale the d-sequence by the margin r*eps (the theta reparametrization
        // realized as scaling; constants are measured, not derived)
        std::vector<double> d(st.d);
        for (auto& v : d) v *= r * eps * (1.0 - 1e-12);
        PwPoly g = cutoff_profile_1d(d, -r, r, r * eps, q);
        out.fn.body = std::move(g);
        out.fn.order = q;
        out.fn.weight_name = M.name();
        out.stage_p = st.p;
        out.support_radius = (1.0 + eps) * r;
        out.fn.metadata = {{"r", r}, {"eps", eps}, {"rho", rho}, {"A", st.A}, {"p", double(st.p)}};

        const PwPoly& body = out.fn.poly();
        double V = 0.0;
        for (int j = 0; j <= q - 1; ++j)
            V = std::max(V, body.sup_norm(j) * std::exp(-double(j) * std::log(rho) - N.logM(j)));
        out.measured_seminorm = V;
        // largest C with V <= 1/h_m(C rho r eps)
        double lo = 1e-12, hi = 1e12;
        for (int it = 0; it < 200; ++it) {
            double mid = std::sqrt(lo * hi);
            double h = assoc::h_m(m, mid * eta);
            if (h * V <= 1.0)
                lo = mid;
            else
                hi = mid;
        }
        out.C_achieved = lo;
        out.fn.certificates.push_back(BoundCertificate::make(
            "cutoff.roumieu_seminorm_upper", V, 1.0 / assoc::h_m(m, out.C_achieved * eta),
            {{"C_achieved", out.C_achieved}}, "measured sup over j <= q-1", 1e-9));
        out.fn.certificates.push_back(BoundCertificate::make(
            "cutoff.roumieu_seminorm_lower", 1.0 / h_m_truncated(m, eta, q - 1), V, {},
            "Taylor lower bound over j <= q-1", 1e-9));
        // support / plateau
        auto [slo, shi] = body.support();
        out.fn.certificates.push_back(BoundCertificate::make(
            "cutoff.support_radius", std::max(-slo, shi), (1.0 + eps) * r, {}, "exact endpoints",
            1e-12));
        return out;
    }

    // Beurling: the function is independent of rho; constants depend on rho
    weights::ModifiedQuotients mq = weights::modified_quotients(M, -1.0);
    double A = mq.A;
    // choose k(r): least k with 8A/mustar_k < r
    int k = 1;
    int limit = M.has_closed_form() ? (1 << 22) : M.kmax();
    while (k < limit && std::log(8.0 * A) - M.logmustar(k) >= std::log(r)) ++k;
    if (k >= limit) throw std::out_of_range("optimal_cutoff: Beurling stage exceeds the table");
    std::vector<double> d = weights::modified_reciprocals(M, k, mq.eps, q);
    double full = weights::modified_reciprocal_sum(M, k, mq.eps);
    double margin = r / 8.0;
    if (!(full < margin))
        throw GeometryError("optimal_cutoff: modified reciprocal sum exceeds r/8");
    PwPoly g = cutoff_profile_1d(d, -r, r, margin, q);
    out.fn.body = std::move(g);
    out.fn.order = q;
    out.fn.weight_name = M.name();
    out.stage_p = k;
    out.support_radius = 9.0 * r / 8.0;
    out.fn.metadata = {{"r", r}, {"A", A}, {"eps_modified", mq.eps}, {"k", double(k)}};

    const PwPoly& body = out.fn.poly();
    // moderate-growth constant mustar_k <= C mustar_{k-1}
    double Cmg = 1.0;
    for (int i = 2; i <= M.kmax(); ++i)
        Cmg = std::max(Cmg, std::exp(M.logmustar(i) - M.logmustar(i - 1)));
    for (double rho_i : beurling_rhos) {
        double V = 0.0;
        for (int j = 0; j <= q - 1; ++j)
            V = std::max(V, body.sup_norm(j) * std::exp(-double(j) * std::log(rho_i) - M.logM(j)));
        double b_rho = rho_i / (16.0 * A * Cmg *
                                std::exp(1.0 + mq.eps * std::pow(2.0 / rho_i, 1.0 / mq.eps)));
        double A_rho = std::max(1.0, 1.0 / assoc::h_m(m, b_rho * 8.0 * A));
        out.fn.certificates.push_back(BoundCertificate::make(
            "cutoff.beurling_seminorm_rho" + std::to_string(rho_i), V, A_rho / assoc::h_m(m, b_rho * r),
            {{"A_rho", A_rho}, {"b_rho", b_rho}, {"rho", rho_i}}, "measured sup over j <= q-1",
            1e-9));
        if (rho_i == beurling_rhos.front()) out.measured_seminorm = V;
    }
    auto [slo, shi] = body.support();
    out.fn.certificates.push_back(BoundCertificate::make(
        "cutoff.support_radius", std::max(-slo, shi), 9.0 * r / 8.0, {}, "exact endpoints", 1e-12));
    return out;
}

// ---------------------------------------------------------------------------
// Borel right inverse
// ---------------------------------------------------------------------------

BorelPsi borel_psi(const WeightSequence& M, int k, double eps, double A, int q, NumericMode mode) {
    BorelPsi out;
    out.k = k;
    int kd = std::max(1, k);  // psi_0 reuses the stage-1 cutoff
    std::vector<double> d = weights::modified_reciprocals(M, kd, eps, q);
    double Sq = 0.0;
    for (double v : d) Sq += v;
    double margin = A * double(kd) * std::exp(-M.logmu(kd));
    if (!(Sq < margin))
        throw GeometryError("borel_psi: truncated reciprocal sum exceeds A k/mu_k");
    out.support_radius = (margin + Sq) / 2.0;

    if (mode == NumericMode::rational) {
        std::vector<Rational> dq;
        for (double v : d) dq.emplace_back(v);
        PwPolyQ phi = profile_impl<Rational>(dq, Rational(0), Rational(0), Rational(margin), q);
        if (k >= 1) {
            Rational invfact(1);
            for (int i = 2; i <= k; ++i) invfact /= i;
            phi = phi.multiply_monomial(k, invfact);
        }
        out.psi_exact = phi;
        out.psi = phi.to_double_poly();
    } else {
        PwPoly phi = profile_impl<double>(d, 0.0, 0.0, margin, q);
        if (k >= 1) phi = phi.multiply_monomial(k, 1.0 / mi_factorial(make_mi(k)));
        out.psi = std::move(phi);
    }
    return out;
}

double BorelExtension::eval(const Point& p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (coeffs[i] == 0.0) continue;
        double term = coeffs[i];
        for (int ax = 0; ax < dim; ++ax) term *= psis[std::size_t(alphas[i][ax])].psi.eval(p[ax]);
        s += term;
    }
    return s;
}

double BorelExtension::eval_deriv(const Point& p, const MultiIndex& beta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (coeffs[i] == 0.0) continue;
        double term = coeffs[i];
        for (int ax = 0; ax < dim; ++ax)
            term *= psis[std::size_t(alphas[i][ax])].psi.eval_deriv(p[ax], beta[ax]);
        s += term;
    }
    return s;
}

Rational BorelExtension::eval_deriv_exact(const Point& p, const MultiIndex& beta) const {
    if (mode != NumericMode::rational)
        throw std::logic_error("BorelExtension: exact evaluation requires rational mode");
    Rational s(0);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (coeffs[i] == 0.0) continue;
        Rational term(coeffs[i]);
        for (int ax = 0; ax < dim; ++ax)
            term *= psis[std::size_t(alphas[i][ax])].psi_exact.eval_deriv(Rational(p[ax]), beta[ax]);
        s += term;
    }
    return s;
}

BorelExtension borel_extend(const WeightSequence& M, const std::vector<double>& a, int dim,
                            int pmax, double eps, int q, NumericMode mode) {
    auto rep = weights::classify(M);
    if (rep.quasianalytic.certainly_true())
        throw std::domain_error("borel_extend: M is quasianalytic");
    if (rep.strongly_nonquasianalytic.certainly_false())
        throw std::domain_error("borel_extend: M is not strongly non-quasianalytic");
    if (pmax + 1 > q)
        throw std::out_of_range("borel_extend: need q > pmax (finite stage must cover the jet)");

    weights::ModifiedQuotients mq = weights::modified_quotients(M, eps < 0.0 ? -1.0 : eps);
    BorelExtension ext;
    ext.dim = dim;
    ext.pmax = pmax;
    ext.eps = mq.eps;
    ext.mode = mode;
    ext.alphas = multi_indices_upto(dim, pmax);
    if (a.size() != ext.alphas.size())
        throw std::invalid_argument("borel_extend: jet size mismatch (expected " +
                                    std::to_string(ext.alphas.size()) + ")");
    ext.coeffs = a;
    for (int k = 0; k <= pmax; ++k) ext.psis.push_back(borel_psi(M, k, mq.eps, mq.A, q, mode));

    // support certificates: supp psi_k inside (-A k/mu_k, A k/mu_k)
    for (int k = 1; k <= pmax; ++k) {
        double R = mq.A * double(k) * std::exp(-M.logmu(k));
        ext.certificates.push_back(BoundCertificate::make(
            "borel.psi_support_k" + std::to_string(k), ext.psis[std::size_t(k)].support_radius, R,
            {{"A", mq.A}}, "exact endpoints", 0.0));
    }

    // jet reproduction at 0
    Point origin;
    origin.dim = dim;
    double worst = 0.0;
    bool exact_ok = true;
    for (std::size_t i = 0; i < ext.alphas.size(); ++i) {
        if (mode == NumericMode::rational) {
            Rational v = ext.eval_deriv_exact(origin, ext.alphas[i]);
            exact_ok = exact_ok && (v == Rational(ext.coeffs[i]));
        } else {
            double v = ext.eval_deriv(origin, ext.alphas[i]);
            double scale = std::max(1.0, std::abs(ext.coeffs[i]));
            worst = std::max(worst, std::abs(v - ext.coeffs[i]) / scale);
        }
    }
    if (mode == NumericMode::rational) {
        BoundCertificate c = BoundCertificate::make("borel.jet_reproduction", exact_ok ? 0.0 : 1.0,
                                                    0.0, {}, "exact rational", 0.0);
        c.passed = exact_ok;
        ext.certificates.push_back(c);
    } else {
        ext.certificates.push_back(BoundCertificate::make("borel.jet_reproduction", worst, 0.0, {},
                                                          "float, relative", 1e-9));
    }

    // measured seminorm constants ||psi_k|| <= C_rho H_rho^k / M_k
    for (double rho : {1.0, 0.5}) {
        double C0 = 0.0, H = 1.0;
        std::vector<double> V(std::size_t(pmax) + 1, 0.0);
        for (int k = 0; k <= pmax; ++k) {
            for (int j = 0; j <= q - 1; ++j)
                V[std::size_t(k)] =
                    std::max(V[std::size_t(k)], ext.psis[std::size_t(k)].psi.sup_norm(j) *
                                                    std::exp(-double(j) * std::log(rho) - M.logM(j)));
        }
        C0 = std::max(V[0] * 1.0, 1e-300);
        for (int k = 1; k <= pmax; ++k)
            H = std::max(H, std::exp((std::log(V[std::size_t(k)]) + M.logM(k) - std::log(C0)) /
                                     double(k)));
        double worst_ratio = 0.0;
        for (int k = 0; k <= pmax; ++k)
            worst_ratio = std::max(worst_ratio, V[std::size_t(k)] /
                                                    (C0 * std::pow(H, k) * std::exp(-M.logM(k))));
        ext.certificates.push_back(BoundCertificate::make(
            "borel.seminorm_growth_rho" + std::to_string(rho), worst_ratio, 1.0,
            {{"C_rho", C0}, {"H_rho", H}, {"rho", rho}}, "measured over k <= pmax", 1e-9));
    }
    return ext;
}

}  // namespace ultra::construct
