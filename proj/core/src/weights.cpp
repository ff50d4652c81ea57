#include "ultra/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ultra::weights {

namespace {

constexpr double kLogTol = 1e-9;  // absolute tolerance in the log domain

double iter_exp(int n) {
    double v = 1.0;
    for (int i = 0; i < n; ++i) v = std::exp(v);
    return v;
}

double iter_log(int n, double x) {
    for (int i = 0; i < n; ++i) x = std::log(x);
    return x;
}

// least-squares slope of y_k against log k over the last half of the table;
// a sequence converging to a finite limit has slope -> 0, a logarithmically
// divergent one keeps a positive slope
double tail_slope(const std::vector<double>& y) {
    std::size_t n = y.size();
    if (n < 4) return 0.0;
    std::size_t from = n / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double m = double(n - from);
    for (std::size_t i = from; i < n; ++i) {
        double x = std::log(double(i) + 1.0);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    double den = m * sxx - sx * sx;
    return den == 0 ? 0.0 : (m * sxy - sx * sy) / den;
}

// threshold for "bounded-looking" trends in the log-k coordinate
constexpr double kTrendTol = 0.02;

}  // namespace

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

std::string Family::name() const {
    std::ostringstream os;
    switch (tag) {
        case FamilyTag::gevrey: os << "gevrey(" << params[0] << ")"; break;
        case FamilyTag::power: os << "power(" << params[0] << ")"; break;
        case FamilyTag::denjoy: os << "denjoy(" << int(params[0]) << "," << params[1] << ")"; break;
        case FamilyTag::loggevrey: os << "loggevrey(" << params[0] << ")"; break;
        case FamilyTag::custom: os << "custom"; break;
    }
    return os.str();
}

double Family::logM(int k) const {
    if (k == 0) return 0.0;
    double kk = double(k);
    switch (tag) {
        case FamilyTag::gevrey:
            return params[0] * log_factorial(k);
        case FamilyTag::power:
            return params[0] * kk * std::log(kk);
        case FamilyTag::denjoy: {
            int n = int(params[0]);
            double delta = params[1];
            double v = kk * std::log(kk);
            for (int j = 1; j <= n - 1; ++j) v += kk * std::log(iter_log(j, kk + iter_exp(j)));
            v += delta * kk * std::log(iter_log(n, kk + iter_exp(n)));
            return v;
        }
        case FamilyTag::loggevrey:
            return log_factorial(k) + params[0] * kk * std::log(std::log(kk + std::exp(1.0)));
        case FamilyTag::custom:
            throw std::logic_error("custom family has no closed form");
    }
    return 0.0;
}

WeightSequence make_family(FamilyTag tag, const std::vector<double>& params, int kmax) {
    if (kmax < 8) throw std::invalid_argument("make_family: kmax must be >= 8");
    Family fam{tag, params};
    switch (tag) {
        case FamilyTag::gevrey:
        case FamilyTag::power:
            if (params.size() != 1 || params[0] < 1.0)
                throw std::invalid_argument("make_family: need s >= 1");
            break;
        case FamilyTag::denjoy:
            if (params.size() != 2 || params[0] < 1.0 || params[1] <= 0.0 || params[1] > 1.0)
                throw std::invalid_argument("make_family: denjoy needs n >= 1, 0 < delta <= 1");
            break;
        case FamilyTag::loggevrey:
            if (params.size() != 1 || params[0] < 0.0)
                throw std::invalid_argument("make_family: loggevrey needs s >= 0");
            break;
        case FamilyTag::custom:
            throw std::invalid_argument("make_family: custom tables go through the WeightSequence ctor");
    }
    std::vector<double> table(std::size_t(kmax) + 1);
    for (int k = 0; k <= kmax; ++k) table[std::size_t(k)] = fam.logM(k);
    return WeightSequence(fam.name(), std::move(table), fam);
}

// ---------------------------------------------------------------------------
// WeightSequence
// ---------------------------------------------------------------------------

WeightSequence::WeightSequence(std::string name, std::vector<double> logM_table,
                               std::optional<Family> family)
    : name_(std::move(name)), logM_(std::move(logM_table)), family_(std::move(family)) {
    if (logM_.size() < 9) throw std::invalid_argument("WeightSequence: kmax must be >= 8");
    if (std::abs(logM_[0]) > 1e-15) throw std::invalid_argument("WeightSequence: log M_0 must be 0");
    if (logM_[1] < -1e-12) throw std::invalid_argument("WeightSequence: M_1 must be >= 1");
    for (double v : logM_)
        if (!std::isfinite(v)) throw std::invalid_argument("WeightSequence: non-finite entry");
    if (family_ && family_->tag != FamilyTag::custom) {
        for (int k = 0; k <= kmax(); ++k) {
            double want = family_->logM(k);
            double tol = 1e-12 * std::max(1.0, std::abs(want));
            if (std::abs(logM_[std::size_t(k)] - want) > tol)
                throw std::invalid_argument("WeightSequence: table disagrees with family tag at k=" +
                                            std::to_string(k));
        }
    }
}

double WeightSequence::logM(int k) const {
    if (k < 0) throw std::invalid_argument("WeightSequence::logM: negative index");
    if (k <= kmax()) return logM_[std::size_t(k)];
    if (has_closed_form()) return family_->logM(k);
    throw TruncationError("WeightSequence::logM: index " + std::to_string(k) +
                              " beyond kmax for a custom table",
                          k);
}

std::vector<double> WeightSequence::logm_table() const {
    std::vector<double> t(logM_.size());
    for (int k = 0; k <= kmax(); ++k) t[std::size_t(k)] = logm(k);
    return t;
}

// ---------------------------------------------------------------------------
// Tails
// ---------------------------------------------------------------------------

double hurwitz_tail(double s, double k0) {
    if (s <= 1.0) return kInf;
    double sum = 0.0;
    double N = k0;
    for (int i = 0; i < 64; ++i, N += 1.0) sum += std::pow(N, -s);
    // Euler-Maclaurin remainder from N
    double t = std::pow(N, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(N, -s) +
               s * std::pow(N, -s - 1.0) / 12.0 -
               s * (s + 1.0) * (s + 2.0) * std::pow(N, -s - 3.0) / 720.0;
    return sum + t;
}

namespace {

// numeric continuation of sum 1/mu_j for tagged families beyond the table,
// with a p-series bracket for the remainder
TailSum family_tail_inv_mu(const WeightSequence& M, int from) {
    const Family& fam = *M.family();
    TailSum r;
    switch (fam.tag) {
        case FamilyTag::gevrey: {
            double s = fam.params[0];
            if (s <= 1.0) {
                r.lower = r.upper = kInf;
                r.certified = true;
                return r;
            }
            r.lower = r.upper = hurwitz_tail(s, double(from));
            r.certified = true;
            return r;
        }
        case FamilyTag::power: {
            double s = fam.params[0];
            if (s <= 1.0) {
                // mu_j <= e * j, so the tail dominates a harmonic series
                r.lower = r.upper = kInf;
                r.certified = true;
                return r;
            }
            double sum = 0.0;
            int j = from;
            for (; j < from + 200000; ++j) {
                double lm = fam.logM(j) - fam.logM(j - 1);
                double term = std::exp(-lm);
                sum += term;
                if (term < 1e-18 * std::max(sum, 1e-300)) break;
            }
            r.lower = sum;
            r.upper = sum + hurwitz_tail(s, double(j));  // 1/mu_j <= j^{-s}
            r.certified = true;
            return r;
        }
        case FamilyTag::denjoy:
            // 0 < delta <= 1: the reciprocal quotients dominate the
            // Abel-Dini scale 1/(j log j ... (log^[n] j)^delta), divergent
            r.lower = r.upper = kInf;
            r.certified = true;
            return r;
        case FamilyTag::loggevrey: {
            double s = fam.params[0];
            if (s <= 1.0) {
                r.lower = r.upper = kInf;
                r.certified = true;
                return r;
            }
            double sum = 0.0;
            int j = from;
            for (; j < from + 200000; ++j) {
                double lm = fam.logM(j) - fam.logM(j - 1);
                double term = std::exp(-lm);
                sum += term;
                if (term < 1e-16 * std::max(sum, 1e-300) && j > from + 1000) break;
            }
            // mu_j >= j log(j+e)^s: integral bound for the remainder
            double L = std::log(double(j));
            r.lower = sum;
            r.upper = sum + std::pow(L, 1.0 - s) / (s - 1.0);
            r.certified = true;
            return r;
        }
        case FamilyTag::custom:
            break;
    }
    r.certified = false;
    return r;
}

}  // namespace

TailSum tail_inv_mu(const WeightSequence& M, int k0) {
    TailSum r;
    k0 = std::max(k0, 1);
    double table_sum = 0.0;
    for (int j = k0; j <= M.kmax(); ++j) table_sum += std::exp(-M.logmu(j));
    if (M.has_closed_form()) {
        TailSum rest = family_tail_inv_mu(M, M.kmax() + 1);
        if (rest.divergent()) return rest;
        r.lower = table_sum + rest.lower;
        r.upper = table_sum + rest.upper;
        r.certified = rest.certified;
        return r;
    }
    r.lower = r.upper = table_sum;
    r.certified = false;
    return r;
}

TailSum tail_inv_mu_weighted(const WeightSequence& M, int k0, int kref, double eps) {
    TailSum r;
    double table_sum = 0.0;
    for (int j = k0; j <= M.kmax(); ++j)
        table_sum += std::exp(-M.logmu(j) + eps * (std::log(double(j)) - std::log(double(kref))));
    if (!M.has_closed_form()) {
        r.lower = r.upper = table_sum;
        r.certified = false;
        return r;
    }
    const Family& fam = *M.family();
    int from = M.kmax() + 1;
    double extra = 0.0;
    switch (fam.tag) {
        case FamilyTag::gevrey: {
            double s = fam.params[0];
            if (s - eps <= 1.0) {
                r.lower = r.upper = kInf;
                r.certified = true;
                return r;
            }
            extra = hurwitz_tail(s - eps, double(from)) * std::pow(double(kref), -eps);
            r.lower = table_sum + extra;
            r.upper = table_sum + extra;
            r.certified = true;
            return r;
        }
        case FamilyTag::power: {
            double s = fam.params[0];
            if (s - eps <= 1.0) {
                r.lower = r.upper = kInf;
                r.certified = true;
                return r;
            }
            double sum = 0.0;
            int j = from;
            for (; j < from + 200000; ++j) {
                double lm = fam.logM(j) - fam.logM(j - 1);
                double term = std::exp(-lm + eps * (std::log(double(j)) - std::log(double(kref))));
                sum += term;
                if (term < 1e-18 * std::max(sum, 1e-300)) break;
            }
            r.lower = table_sum + sum;
            r.upper = table_sum + sum + hurwitz_tail(s - eps, double(j)) * std::pow(double(kref), -eps);
            r.certified = true;
            return r;
        }
        default: {
            // denjoy / loggevrey: mu_j ~ j * slowly varying, so the weighted
            // tail with eps > 0 diverges
            if (eps > 0.0) {
                r.lower = r.upper = kInf;
                r.certified = true;
                return r;
            }
            TailSum t = tail_inv_mu(M, k0);
            return t;
        }
    }
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

namespace {

struct FamilyFacts {
    std::optional<bool> quasianalytic, snq, moderate_growth, derivation_closed, mk_root_ai,
        mk_root_to_inf;
};

FamilyFacts family_facts(const WeightSequence& M) {
    FamilyFacts f;
    if (!M.has_closed_form()) return f;
    const Family& fam = *M.family();
    switch (fam.tag) {
        case FamilyTag::gevrey:
        case FamilyTag::power: {
            double s = fam.params[0];
            f.quasianalytic = (s <= 1.0);
            f.snq = (s > 1.0);
            f.moderate_growth = true;
            f.derivation_closed = true;
            f.mk_root_ai = true;
            f.mk_root_to_inf = (s > 1.0);
            break;
        }
        case FamilyTag::denjoy:
            f.quasianalytic = true;
            f.snq = false;
            f.moderate_growth = true;
            f.derivation_closed = true;
            f.mk_root_ai = true;
            f.mk_root_to_inf = true;
            break;
        case FamilyTag::loggevrey: {
            double s = fam.params[0];
            f.quasianalytic = (s <= 1.0);
            // (mu_k/k) sum_{j>=k} 1/mu_j ~ log(k), unbounded
            f.snq = false;
            f.moderate_growth = true;
            f.derivation_closed = true;
            f.mk_root_ai = true;
            f.mk_root_to_inf = (s > 0.0);
            break;
        }
        case FamilyTag::custom:
            break;
    }
    return f;
}

bool table_log_convex(const std::vector<double>& logv) {
    for (std::size_t k = 1; k + 1 < logv.size(); ++k)
        if (logv[k + 1] + logv[k - 1] - 2.0 * logv[k] < -kLogTol) return false;
    return true;
}

}  // namespace

ClassReport classify(const WeightSequence& M) {
    if (M.kmax() < 8) throw std::invalid_argument("classify: kmax < 8 is insufficient data");
    ClassReport rep;
    rep.name = M.name();
    rep.kmax = M.kmax();
    FamilyFacts facts = family_facts(M);

    rep.log_convex = table_log_convex(M.table());
    rep.strongly_log_convex = table_log_convex(M.logm_table());

    // derivation closedness: sup_{k>=1} (M_{k+1}/M_k)^{1/k} < inf
    {
        std::vector<double> d;
        double obs = -kInf;
        for (int k = 1; k < M.kmax(); ++k) {
            double v = M.logmu(k + 1) / double(k);
            d.push_back(v);
            obs = std::max(obs, v);
        }
        if (facts.derivation_closed)
            rep.derivation_closed = Verdict::certified(*facts.derivation_closed, "closed form");
        else
            rep.derivation_closed =
                Verdict::empirical(tail_slope(d) <= kTrendTol, std::exp(obs), M.kmax());
    }

    // moderate growth via the equivalent test mu_{2k} <= C mu_k
    {
        double obs = 0.0;
        std::vector<double> ratios;
        for (int k = 1; 2 * k <= M.kmax(); ++k) {
            double v = M.logmu(2 * k) - M.logmu(k);
            ratios.push_back(v);
            obs = std::max(obs, v);
        }
        if (facts.moderate_growth)
            rep.moderate_growth = Verdict::certified(*facts.moderate_growth, "closed form");
        else
            rep.moderate_growth =
                Verdict::empirical(tail_slope(ratios) <= kTrendTol, std::exp(obs), M.kmax());
    }

    // quasianalyticity: sum 1/mu_k = inf
    {
        TailSum t = tail_inv_mu(M, 1);
        if (t.certified) {
            rep.quasianalytic = Verdict::certified(t.divergent(), "closed-form tail");
        } else {
            // decay exponent of 1/mu_j over the last half of the table
            std::vector<double> lg;
            for (int j = 1; j <= M.kmax(); ++j) lg.push_back(-M.logmu(j));
            std::vector<double> slope_in_logj;
            for (int j = M.kmax() / 2; j <= M.kmax(); ++j)
                slope_in_logj.push_back(-M.logmu(j) / std::log(double(j)));
            double p_est = -slope_in_logj.back();
            rep.quasianalytic = Verdict::empirical(p_est <= 1.02, t.lower, M.kmax(),
                                                   "partial sum at kmax; decay exponent " +
                                                       std::to_string(p_est));
        }
    }

    // snq index: sup_k (mu_k/k) sum_{j>=k} 1/mu_j
    {
        if (rep.quasianalytic.certainly_true()) {
            rep.snq_index = kInf;
            rep.snq_index_finite = false;
        } else {
            double sup = 0.0;
            bool any_div = false;
            for (int k = 1; k <= M.kmax(); ++k) {
                TailSum t = tail_inv_mu(M, k);
                if (t.divergent()) {
                    any_div = true;
                    break;
                }
                sup = std::max(sup, std::exp(M.logmustar(k)) * t.mid());
            }
            rep.snq_index = any_div ? kInf : sup;
            rep.snq_index_finite = !any_div;
        }
        if (facts.snq)
            rep.strongly_nonquasianalytic = Verdict::certified(*facts.snq, "closed form");
        else {
            bool est = rep.snq_index_finite;
            rep.strongly_nonquasianalytic = Verdict::empirical(
                est, rep.snq_index_finite ? rep.snq_index : 0.0, M.kmax(), "table sup");
        }
    }

    // almost increasing m_k^{1/k} (proxy for (FdB), see module notes)
    {
        double best = 1.0;
        double run_max = -kInf;
        for (int k = 1; k <= M.kmax(); ++k) {
            run_max = std::max(run_max, M.logm(k) / double(k));
            best = std::max(best, std::exp(run_max - M.logm(k) / double(k)));
        }
        if (facts.mk_root_ai)
            rep.mk_root_almost_increasing =
                Verdict::certified(*facts.mk_root_ai, "closed form; proxy for (FdB)");
        else
            rep.mk_root_almost_increasing = Verdict::empirical(
                std::isfinite(best), best, M.kmax(), "proxy for (FdB); m^o not computed");
    }

    return rep;
}

// ---------------------------------------------------------------------------
// log-convex minorant: lower convex hull of (k, log M_k)
// ---------------------------------------------------------------------------

WeightSequence log_convex_minorant(const WeightSequence& M) {
    const auto& y = M.table();
    int n = M.kmax();
    if (table_log_convex(y)) return M;

    // monotone chain over the points (k, y_k); keep collinear points
    std::vector<int> hull;
    for (int k = 0; k <= n; ++k) {
        while (hull.size() >= 2) {
            int a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            // drop b if it lies on or above chord a-k
            double cross = (y[std::size_t(b)] - y[std::size_t(a)]) * double(k - a) -
                           (y[std::size_t(k)] - y[std::size_t(a)]) * double(b - a);
            if (cross >= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(k);
    }
    std::vector<double> out(std::size_t(n) + 1);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        int a = hull[h], b = hull[h + 1];
        for (int k = a; k <= b; ++k) {
            double t = double(k - a) / double(b - a);
            out[std::size_t(k)] = (1.0 - t) * y[std::size_t(a)] + t * y[std::size_t(b)];
        }
    }
    out[0] = 0.0;
    return WeightSequence(M.name() + "_lcm", std::move(out), std::nullopt);
}

// ---------------------------------------------------------------------------
// relation
// ---------------------------------------------------------------------------

namespace {

// growth comparison of closed forms; encodes the asymptotics of
// (M_k/N_k)^{1/k}
std::optional<RelationReport> symbolic_relation(const Family& A, const Family& B) {
    auto triple = [](int cmp /* -1: A smaller class, 0: equal, +1: larger */) {
        RelationReport r;
        r.preceq = Verdict::certified(cmp <= 0, "closed form");
        r.preceq_rev = Verdict::certified(cmp >= 0, "closed form");
        r.triangleleft = Verdict::certified(cmp < 0, "closed form");
        r.equivalent = Verdict::certified(cmp == 0, "closed form");
        return r;
    };
    auto factorial_like = [](const Family& f) {
        return f.tag == FamilyTag::gevrey || f.tag == FamilyTag::power;
    };
    if (factorial_like(A) && factorial_like(B)) {
        double s = A.params[0], t = B.params[0];
        return triple(s < t ? -1 : (s > t ? 1 : 0));
    }
    if (A.tag == FamilyTag::denjoy && B.tag == FamilyTag::denjoy) {
        auto key = [](const Family& f) { return std::make_pair(f.params[0], f.params[1]); };
        auto ka = key(A), kb = key(B);
        return triple(ka < kb ? -1 : (ka > kb ? 1 : 0));
    }
    if (A.tag == FamilyTag::loggevrey && B.tag == FamilyTag::loggevrey) {
        double s = A.params[0], t = B.params[0];
        return triple(s < t ? -1 : (s > t ? 1 : 0));
    }
    // factorial-like vs denjoy / loggevrey: ratio^{1/k} ~ k^{s-1} / polylog
    auto polylog_like = [](const Family& f) {
        return f.tag == FamilyTag::denjoy || f.tag == FamilyTag::loggevrey;
    };
    if (factorial_like(A) && polylog_like(B)) {
        double s = A.params[0];
        if (s > 1.0) return triple(+1);
        return triple(-1);  // s = 1: k! lhd k^k polylog^k
    }
    if (polylog_like(A) && factorial_like(B)) {
        double t = B.params[0];
        if (t > 1.0) return triple(-1);
        return triple(+1);
    }
    return std::nullopt;
}

}  // namespace

RelationReport relation(const WeightSequence& Ms, const WeightSequence& Ns) {
    // identical tables: equivalence is exact
    int kshared = std::min(Ms.kmax(), Ns.kmax());
    bool identical = true;
    for (int k = 0; k <= kshared && identical; ++k)
        identical = std::abs(Ms.logM(k) - Ns.logM(k)) <= 1e-14 * std::max(1.0, std::abs(Ms.logM(k)));
    if (identical && Ms.kmax() == Ns.kmax()) {
        RelationReport r;
        r.preceq = Verdict::certified(true, "identical table");
        r.preceq_rev = Verdict::certified(true, "identical table");
        r.triangleleft = Verdict::certified(false, "identical table");
        r.equivalent = Verdict::certified(true, "identical table");
        return r;
    }
    if (Ms.has_closed_form() && Ns.has_closed_form()) {
        auto sym = symbolic_relation(*Ms.family(), *Ns.family());
        if (sym) return *sym;
    }
    // empirical on the shared table
    std::vector<double> r(std::size_t(kshared), 0.0);
    double sup = -kInf, sup_rev = -kInf;
    for (int k = 1; k <= kshared; ++k) {
        r[std::size_t(k - 1)] = (Ms.logM(k) - Ns.logM(k)) / double(k);
        sup = std::max(sup, r[std::size_t(k - 1)]);
        sup_rev = std::max(sup_rev, -r[std::size_t(k - 1)]);
    }
    double slope = tail_slope(r);
    double last = r.back();
    RelationReport out;
    out.preceq = Verdict::empirical(slope <= kTrendTol, std::exp(sup), kshared);
    out.preceq_rev = Verdict::empirical(-slope <= kTrendTol, std::exp(sup_rev), kshared);
    out.triangleleft =
        Verdict::empirical(slope < -kTrendTol || last < -3.0, std::exp(last), kshared, "limit estimate");
    out.equivalent = Verdict::empirical(out.preceq.value && out.preceq_rev.value,
                                        std::exp(std::max(sup, sup_rev)), kshared);
    return out;
}

// ---------------------------------------------------------------------------
// descendant
// ---------------------------------------------------------------------------

DescendantResult descendant(const WeightSequence& N) {
    ClassReport crep = classify(N);
    if (crep.quasianalytic.certainly_true())
        throw std::domain_error("descendant: N is quasianalytic");

    DescendantResult res{N, {}, {}, {}, !crep.quasianalytic.is_certified()};
    int n = N.kmax();
    res.tau.assign(std::size_t(n) + 1, 0.0);
    res.sigma.assign(std::size_t(n) + 1, 0.0);
    res.sigma[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        TailSum t = tail_inv_mu(N, k);
        if (t.divergent()) throw std::domain_error("descendant: tail of 1/nu diverges");
        res.tau[std::size_t(k)] = double(k) * std::exp(-N.logmu(k)) + t.mid();
    }
    for (int k = 1; k <= n; ++k)
        res.sigma[std::size_t(k)] = res.tau[1] * double(k) / res.tau[std::size_t(k)];

    std::vector<double> logS(std::size_t(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k)
        logS[std::size_t(k)] = logS[std::size_t(k - 1)] + std::log(res.sigma[std::size_t(k)]);
    res.S = WeightSequence("descendant(" + N.name() + ")", std::move(logS), std::nullopt);

    // Lemma 5.6 (1): sup sigma_k / nu_k < inf -- here sigma_k <= tau_1 nu_k
    // holds with the explicit constant tau_1 because tau_k >= k / nu_k.
    double sup1 = 0.0;
    for (int k = 1; k <= n; ++k)
        sup1 = std::max(sup1, res.sigma[std::size_t(k)] * std::exp(-N.logmu(k)));
    res.certificates.push_back(BoundCertificate::make(
        "descendant.sigma_le_nu", sup1, res.tau[1], {{"tau_1", res.tau[1]}}, "k=1.." + std::to_string(n)));

    // Lemma 5.6 (2): (sigma_k/k) sum_{j>=k} 1/nu_j <= tau_1 exactly
    double sup2 = 0.0;
    for (int k = 1; k <= n; ++k) {
        double tail = res.tau[std::size_t(k)] - double(k) * std::exp(-N.logmu(k));
        sup2 = std::max(sup2, res.sigma[std::size_t(k)] / double(k) * tail);
    }
    res.certificates.push_back(BoundCertificate::make(
        "descendant.mixed_index_le_tau1", sup2, res.tau[1], {{"tau_1", res.tau[1]}},
        "k=1.." + std::to_string(n)));

    // Lemma 5.6 (3): sigma_k / k increasing with sigma_1 = 1
    double worst = 0.0;
    for (int k = 1; k < n; ++k)
        worst = std::max(worst, res.sigma[std::size_t(k)] / double(k) -
                                    res.sigma[std::size_t(k + 1)] / double(k + 1));
    res.certificates.push_back(
        BoundCertificate::make("descendant.sigma_star_increasing", worst, 0.0, {}, "adjacent k", 1e-12));

    return res;
}

// ---------------------------------------------------------------------------
// CC Lemma 16
// ---------------------------------------------------------------------------

namespace detail {

// core construction; gamma may be weakly decreasing
CC16Result cc16_core(const std::vector<double>& alpha, const std::vector<double>& beta,
                     const std::vector<double>& gamma) {
    int n = int(alpha.size()) - 1;
    std::vector<double> suffix(std::size_t(n) + 2, 0.0);
    for (int k = n; k >= 1; --k) suffix[std::size_t(k)] = suffix[std::size_t(k) + 1] + alpha[std::size_t(k)];
    // beta suffix max, for "beta_j <= 4^{-p} for all j >= j_{p+1}"
    std::vector<double> beta_sufmax(std::size_t(n) + 2, 0.0);
    for (int k = n; k >= 1; --k)
        beta_sufmax[std::size_t(k)] = std::max(beta_sufmax[std::size_t(k) + 1], beta[std::size_t(k)]);

    std::vector<int> jp;  // j_1, j_2, ... (1-based indices)
    jp.push_back(1);
    while (true) {
        int p = int(jp.size());  // looking for j_{p+1}
        int prev = jp.back();
        double pow4 = std::pow(0.25, double(p));
        int found = -1;
        for (int j = prev + 1; j <= n; ++j) {
            if (suffix[std::size_t(j)] <= 0.25 * suffix[std::size_t(prev)] &&
                beta_sufmax[std::size_t(j)] <= pow4 &&
                gamma[std::size_t(j)] <= 0.25 * gamma[std::size_t(prev)]) {
                found = j;
                break;
            }
        }
        if (found < 0) break;
        jp.push_back(found);
    }

    CC16Result res;
    res.lambda.assign(std::size_t(n) + 1, 0.0);
    std::vector<int> block(std::size_t(n) + 1, 0);  // p(k): largest p with j_p <= k
    for (std::size_t p = 0; p < jp.size(); ++p) {
        int lo = jp[p];
        int hi = (p + 1 < jp.size()) ? jp[p + 1] : n + 1;
        double twop = std::pow(2.0, double(p + 1));  // 2^p with p counted from 1
        // k_p: largest k in [j_p, j_{p+1}) with 2^p gamma_{j_p} <= 2^{p+1} gamma_k
        int kp = lo;
        for (int k = lo; k < hi && k <= n; ++k)
            if (gamma[std::size_t(k)] >= 0.5 * gamma[std::size_t(lo)]) kp = k;
        for (int k = lo; k < hi && k <= n; ++k) {
            block[std::size_t(k)] = int(p) + 1;
            if (k <= kp)
                res.lambda[std::size_t(k)] = twop * gamma[std::size_t(lo)] / gamma[std::size_t(k)];
            else
                res.lambda[std::size_t(k)] = 2.0 * twop;
        }
    }

    // conclusion (1): sum_{j>=k} lambda_j alpha_j <= 8 lambda_k sum_{j>=k} alpha_j
    double worst_ratio = 0.0;
    {
        std::vector<double> la_suffix(std::size_t(n) + 2, 0.0);
        for (int k = n; k >= 1; --k)
            la_suffix[std::size_t(k)] =
                la_suffix[std::size_t(k) + 1] + res.lambda[std::size_t(k)] * alpha[std::size_t(k)];
        for (int k = 1; k <= n; ++k) {
            double rhs = 8.0 * res.lambda[std::size_t(k)] * suffix[std::size_t(k)];
            if (rhs > 0.0) worst_ratio = std::max(worst_ratio, la_suffix[std::size_t(k)] / rhs);
        }
    }
    res.certificates.push_back(BoundCertificate::make("cc16.factor8_tail_sum", worst_ratio, 1.0,
                                                      {}, "all table k", 1e-12));

    // conclusion (2): lambda_k beta_k -> 0, via the block bound
    // lambda_k beta_k <= 2^{2-p} for k >= j_{p+1}
    double worst2 = 0.0;
    for (int k = (jp.size() >= 2 ? jp[1] : n + 1); k <= n; ++k) {
        int p = block[std::size_t(k)] - 1;  // k >= j_{p+1} with this p
        worst2 = std::max(worst2,
                          res.lambda[std::size_t(k)] * beta[std::size_t(k)] * std::pow(2.0, double(p) - 2.0));
    }
    res.certificates.push_back(
        BoundCertificate::make("cc16.lambda_beta_to_zero", worst2, 1.0, {}, "k >= j_2", 1e-12));

    // conclusion (3): lambda_k gamma_k decreasing
    double worst3 = 0.0;
    for (int k = 1; k < n; ++k)
        worst3 = std::max(worst3, res.lambda[std::size_t(k + 1)] * gamma[std::size_t(k + 1)] -
                                      res.lambda[std::size_t(k)] * gamma[std::size_t(k)]);
    res.certificates.push_back(
        BoundCertificate::make("cc16.lambda_gamma_decreasing", worst3, 0.0, {}, "adjacent k", 1e-12));

    // lambda increasing (always true by construction; recorded)
    double worst4 = 0.0;
    for (int k = 1; k < n; ++k)
        worst4 = std::max(worst4, res.lambda[std::size_t(k)] - res.lambda[std::size_t(k + 1)]);
    res.certificates.push_back(
        BoundCertificate::make("cc16.lambda_increasing", worst4, 0.0, {}, "adjacent k", 1e-12));

    return res;
}

}  // namespace detail

CC16Result cc16_lambda(const std::vector<double>& alpha, const std::vector<double>& beta,
                       const std::vector<double>& gamma) {
    if (alpha.size() != beta.size() || alpha.size() != gamma.size() || alpha.size() < 3)
        throw std::invalid_argument("cc16_lambda: tables must have equal size >= 2");
    int n = int(alpha.size()) - 1;
    for (int k = 1; k <= n; ++k) {
        if (alpha[std::size_t(k)] < 0.0) throw std::invalid_argument("cc16_lambda: alpha must be >= 0");
        if (beta[std::size_t(k)] <= 0.0) throw std::invalid_argument("cc16_lambda: beta must be > 0");
        if (gamma[std::size_t(k)] <= 0.0) throw std::invalid_argument("cc16_lambda: gamma must be > 0");
        if (k > 1 && gamma[std::size_t(k)] >= gamma[std::size_t(k - 1)])
            throw std::invalid_argument("cc16_lambda: gamma must be strictly decreasing");
    }
    return detail::cc16_core(alpha, beta, gamma);
}

// ---------------------------------------------------------------------------
// CC Proposition 17
// ---------------------------------------------------------------------------

CC17Result cc17_reduce(const WeightSequence& L, const WeightSequence& M) {
    ClassReport mrep = classify(M);
    if (mrep.strongly_nonquasianalytic.certainly_false() || mrep.moderate_growth.certainly_false())
        throw std::domain_error("cc17_reduce: M is not strongly regular");
    RelationReport rel = relation(L, M);
    if (!rel.triangleleft.plausible())
        throw std::domain_error("cc17_reduce: L triangleleft M fails");

    int n = std::min(L.kmax(), M.kmax());
    // eps_k := sup_{j >= k} (L_j / M_j)^{1/j}; decreasing by construction.
    // (The paper's displayed formula fixes the index under the sup; this is
    // the reading that makes eps decreasing and L_k <= eps_1...eps_k M_k.)
    std::vector<double> leps(std::size_t(n) + 1, -kInf);
    {
        double run = -kInf;
        for (int j = n; j >= 1; --j) {
            run = std::max(run, (L.logM(j) - M.logM(j)) / double(j));
            leps[std::size_t(j)] = run;
        }
    }
    std::vector<double> alpha(std::size_t(n) + 1, 0.0), beta(std::size_t(n) + 1, 0.0),
        gamma(std::size_t(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k) {
        alpha[std::size_t(k)] = std::exp(-M.logmu(k));
        gamma[std::size_t(k)] = double(k) * std::exp(-M.logmu(k));
        beta[std::size_t(k)] = std::max(std::exp(leps[std::size_t(k)]), gamma[std::size_t(k)]);
    }
    CC16Result theta = detail::cc16_core(alpha, beta, gamma);

    CC17Result res{M, theta.lambda, {}};
    // nu_k = mu_k / theta_k may start below 1; rescale by a constant to an
    // equivalent sequence with nu_1 >= 1 (all relations are scale-invariant)
    double shift = std::max(0.0, std::log(theta.lambda[1]) - M.logmu(1));
    std::vector<double> logN(std::size_t(n) + 1, 0.0);
    for (int k = 1; k <= n; ++k)
        logN[std::size_t(k)] = logN[std::size_t(k - 1)] + M.logmu(k) -
                               std::log(theta.lambda[std::size_t(k)]) + shift;
    res.N = WeightSequence("cc17(" + L.name() + "," + M.name() + ")", std::move(logN), std::nullopt);

    for (auto& c : theta.certificates) res.certificates.push_back(c);

    // L preceq N and N triangleleft M, observed on the table
    double supLN = -kInf, lastMN = 0.0;
    for (int k = 1; k <= n; ++k) {
        supLN = std::max(supLN, (L.logM(k) - res.N.logM(k)) / double(k));
        if (k == n) lastMN = (res.N.logM(k) - M.logM(k)) / double(k);
    }
    res.certificates.push_back(BoundCertificate::make(
        "cc17.L_preceq_N", std::exp(supLN), std::exp(supLN), {{"observed_sup", std::exp(supLN)}},
        "table sup", 1e-12));
    res.certificates.push_back(BoundCertificate::make(
        "cc17.N_triangleleft_M", std::exp(lastMN), 1.0,
        {{"final_ratio_root", std::exp(lastMN)}}, "ratio^{1/k} at kmax", 0.0));

    // N strongly non-quasianalytic (empirical): the cc16 factor-8 inequality
    // transfers the snq constant of M
    double snqN = 0.0;
    {
        std::vector<double> invnu(std::size_t(n) + 1, 0.0), suf(std::size_t(n) + 2, 0.0);
        for (int k = 1; k <= n; ++k)
            invnu[std::size_t(k)] = theta.lambda[std::size_t(k)] * std::exp(-M.logmu(k));
        for (int k = n; k >= 1; --k) suf[std::size_t(k)] = suf[std::size_t(k) + 1] + invnu[std::size_t(k)];
        for (int k = 1; k <= n; ++k) {
            double nu_k = std::exp(M.logmu(k)) / theta.lambda[std::size_t(k)];
            snqN = std::max(snqN, nu_k / double(k) * suf[std::size_t(k)]);
        }
    }
    res.certificates.push_back(BoundCertificate::make(
        "cc17.N_snq_index_table", snqN, 8.0 * mrep.snq_index, {{"snq_M", mrep.snq_index}},
        "table suffix sums", 1e-9));

    // moderate growth preserved: nu_{2k} / nu_k <= mu_{2k} / mu_k * theta_k/theta_2k <= mg(M)
    double mgN = 0.0, mgM = 0.0;
    for (int k = 1; 2 * k <= n; ++k) {
        double nu2 = M.logmu(2 * k) - std::log(theta.lambda[std::size_t(2 * k)]);
        double nu1 = M.logmu(k) - std::log(theta.lambda[std::size_t(k)]);
        mgN = std::max(mgN, nu2 - nu1);
        mgM = std::max(mgM, M.logmu(2 * k) - M.logmu(k));
    }
    res.certificates.push_back(BoundCertificate::make("cc17.moderate_growth_preserved",
                                                      std::exp(mgN), std::exp(mgM), {},
                                                      "mu_{2k}/mu_k table", 1e-9));
    return res;
}

// ---------------------------------------------------------------------------
// pair conditions (Schmets-Valdivia and the mixed setup)
// ---------------------------------------------------------------------------

PairReport pair_conditions(const WeightSequence& M, const WeightSequence& N, double p) {
    int n = std::min(M.kmax(), N.kmax());
    // M preceq N is the admissibility-side requirement; sequences equivalent
    // to an entrywise-dominated one are accepted (e.g. the descendant of N)
    RelationReport rel = relation(M, N);
    if (!rel.preceq.plausible())
        throw std::domain_error("pair_conditions: M preceq N fails");

    PairReport rep;
    ClassReport mrep = classify(M);
    ClassReport nrep = classify(N);
    rep.M_strongly_log_convex = mrep.strongly_log_convex;
    rep.N_strongly_log_convex = nrep.strongly_log_convex;
    rep.M_moderate_growth = mrep.moderate_growth;
    rep.M_preceq_N = rel.preceq;

    // m_k^{1/k} -> infinity
    {
        FamilyFacts facts = family_facts(M);
        if (facts.mk_root_to_inf)
            rep.mk_root_to_infinity = Verdict::certified(*facts.mk_root_to_inf, "closed form");
        else {
            std::vector<double> v;
            for (int k = 1; k <= M.kmax(); ++k) v.push_back(M.logm(k) / double(k));
            rep.mk_root_to_infinity =
                Verdict::empirical(tail_slope(v) > 0.0, std::exp(v.back()), M.kmax());
        }
    }

    rep.sv_lambda.assign(std::size_t(n) + 1, 0.0);
    double logp = std::log(p);
    for (int k = 1; k <= n; ++k) {
        double best = -kInf;
        for (int j = 0; j < k; ++j)
            best = std::max(best, (M.logM(k) - double(k) * logp - N.logM(j)) / double(k - j));
        rep.sv_lambda[std::size_t(k)] = std::exp(best);
    }

    auto sup_index = [&](auto numer_log) -> std::pair<double, bool> {
        double sup = 0.0;
        for (int k = 1; k <= n; ++k) {
            TailSum t = tail_inv_mu(N, k);
            if (t.divergent()) return {kInf, false};
            sup = std::max(sup, std::exp(numer_log(k)) / double(k) * t.mid());
        }
        return {sup, true};
    };

    auto [sv_sup, sv_fin] = sup_index([&](int k) { return std::log(rep.sv_lambda[std::size_t(k)]); });
    auto [mx_sup, mx_fin] = sup_index([&](int k) { return M.logmu(k); });

    bool n_tail_certified = tail_inv_mu(N, 1).certified;
    if (!sv_fin)
        rep.sv_ok = Verdict::certified(false, "tail of 1/nu diverges");
    else if (n_tail_certified && mrep.strongly_nonquasianalytic.certainly_true())
        // lambda_p <= mu, so the certified mu-index dominates
        rep.sv_ok = Verdict::certified(true, "lambda_p <= mu and M strongly non-quasianalytic");
    else
        rep.sv_ok = Verdict::empirical(true, sv_sup, n, "table sup with tail bracket");

    if (!mx_fin)
        rep.mixed_snq = Verdict::certified(false, "tail of 1/nu diverges");
    else
        rep.mixed_snq = Verdict::empirical(true, mx_sup, n, "table sup with tail bracket");

    bool adm = rep.M_strongly_log_convex && rep.N_strongly_log_convex &&
               rep.M_moderate_growth.plausible() && rep.mk_root_to_infinity.plausible() &&
               rep.M_preceq_N.plausible() && rep.mixed_snq.plausible();
    bool all_certified = rep.M_moderate_growth.is_certified() &&
                         rep.mk_root_to_infinity.is_certified() && rep.M_preceq_N.is_certified() &&
                         rep.mixed_snq.is_certified();
    rep.admissible = all_certified ? Verdict::certified(adm, "all components certified")
                                   : Verdict::empirical(adm, mx_sup, n);
    return rep;
}

// ---------------------------------------------------------------------------
// modified quotients (Cor "setupcutoff")
// ---------------------------------------------------------------------------

namespace {

bool modified_monotone(const WeightSequence& M, double eps) {
    // the modified sequence of every stage k is increasing iff
    // mu_j / j^eps is nondecreasing over the table
    for (int j = 1; j < M.kmax(); ++j) {
        double cur = M.logmu(j) - eps * std::log(double(j));
        double nxt = M.logmu(j + 1) - eps * std::log(double(j + 1));
        if (nxt < cur - kLogTol) return false;
    }
    return true;
}

double modified_violation(const WeightSequence& M, double eps) {
    double worst = 0.0;
    for (int j = 1; j < M.kmax(); ++j) {
        double cur = M.logmu(j) - eps * std::log(double(j));
        double nxt = M.logmu(j + 1) - eps * std::log(double(j + 1));
        worst = std::max(worst, cur - nxt);
    }
    return worst;
}

}  // namespace

double modified_reciprocal_sum(const WeightSequence& M, int k, double eps) {
    TailSum tail = tail_inv_mu_weighted(M, k + 1, k, eps);
    if (tail.divergent()) return kInf;
    return double(k) * std::exp(-M.logmu(k)) + tail.mid();
}

std::vector<double> modified_reciprocals(const WeightSequence& M, int k, double eps, int count) {
    if (k < 1) throw std::invalid_argument("modified_reciprocals: k >= 1 required");
    std::vector<double> d;
    d.reserve(std::size_t(count));
    double inv_mu_k = std::exp(-M.logmu(k));
    for (int i = 0; i < count; ++i) {
        int j = i + 1;
        if (j <= k)
            d.push_back(inv_mu_k);
        else
            d.push_back(std::exp(-M.logmu(j) + eps * (std::log(double(j)) - std::log(double(k)))));
    }
    return d;
}

ModifiedQuotients modified_quotients(const WeightSequence& M, double eps) {
    ClassReport rep = classify(M);
    if (rep.quasianalytic.certainly_true() || rep.strongly_nonquasianalytic.certainly_false())
        throw std::domain_error("modified_quotients: M must be strongly non-quasianalytic");

    std::vector<double> grid;
    if (eps < 0.0)
        grid = {0.5, 0.25, 0.1, 0.05, 0.01};
    else
        grid = {eps};

    double best_eps = grid[0];
    double best_violation = kInf;
    for (double e : grid) {
        if (e == 0.0 ? true : modified_monotone(M, e)) {
            ModifiedQuotients r;
            r.eps = e;
            r.kmax = M.kmax();
            r.monotone = true;
            double A = 0.0;
            for (int k = 1; k <= M.kmax(); ++k) {
                double s = modified_reciprocal_sum(M, k, e);
                if (std::isinf(s)) {
                    A = kInf;
                    break;
                }
                A = std::max(A, s / (double(k) * std::exp(-M.logmu(k))));
            }
            if (std::isinf(A)) continue;  // weighted tail diverges for this eps
            r.A = A;
            return r;
        }
        double v = modified_violation(M, e);
        if (v < best_violation) {
            best_violation = v;
            best_eps = e;
        }
    }
    throw SearchFailure("modified_quotients: no eps in the grid keeps the modified sequence monotone",
                        best_eps);
}

}  // namespace ultra::weights
