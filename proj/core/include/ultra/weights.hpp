#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ultra/common.hpp"
#include "ultra/verdict.hpp"

namespace ultra::weights {

// ---------------------------------------------------------------------------
// Weight-sequence families with closed forms.  The table is the working
// representation; for tagged families log M_k can also be evaluated beyond
// kmax, which several constructions need (stage selection for very small
// cutoff radii).
// ---------------------------------------------------------------------------

enum class FamilyTag { gevrey, power, denjoy, loggevrey, custom };

struct Family {
    FamilyTag tag = FamilyTag::custom;
    std::vector<double> params;

    std::string name() const;
    // log M_k of the closed form, any k >= 0
    double logM(int k) const;
};

// Positive sequence M with M_0 = 1 <= M_1, stored in the log domain.
// Log-convexity is classified, not assumed (log_convex_minorant exists to
// regularize arbitrary tables).
class WeightSequence {
public:
    WeightSequence() = default;
    WeightSequence(std::string name, std::vector<double> logM_table,
                   std::optional<Family> family = std::nullopt);

    const std::string& name() const { return name_; }
    int kmax() const { return int(logM_.size()) - 1; }
    const std::vector<double>& table() const { return logM_; }
    const std::optional<Family>& family() const { return family_; }

    bool has_closed_form() const { return family_.has_value() && family_->tag != FamilyTag::custom; }

    // log M_k; uses the closed form beyond kmax when tagged, throws otherwise
    double logM(int k) const;
    double M(int k) const { return std::exp(logM(k)); }

    // quotients mu_k = M_k / M_{k-1} (mu_0 = 1)
    double logmu(int k) const { return k == 0 ? 0.0 : logM(k) - logM(k - 1); }
    double mu(int k) const { return std::exp(logmu(k)); }

    // m_k = M_k / k!
    double logm(int k) const { return logM(k) - log_factorial(k); }
    double m(int k) const { return std::exp(logm(k)); }

    // mu*_k = mu_k / k (mu*_0 = 1)
    double logmustar(int k) const { return k == 0 ? 0.0 : logmu(k) - std::log(double(k)); }
    double mustar(int k) const { return std::exp(logmustar(k)); }

    // the small sequence m as a log table (for the associated functions)
    std::vector<double> logm_table() const;

    // largest index at which logM is evaluable (kmax for custom tables,
    // effectively unbounded for closed forms)
    bool evaluable_at(int k) const { return k <= kmax() || has_closed_form(); }

private:
    std::string name_;
    std::vector<double> logM_;
    std::optional<Family> family_;
};

WeightSequence make_family(FamilyTag tag, const std::vector<double>& params, int kmax);
inline WeightSequence gevrey(double s, int kmax = 200) { return make_family(FamilyTag::gevrey, {s}, kmax); }
inline WeightSequence power(double s, int kmax = 200) { return make_family(FamilyTag::power, {s}, kmax); }
inline WeightSequence denjoy(int n, double delta, int kmax = 200) {
    return make_family(FamilyTag::denjoy, {double(n), delta}, kmax);
}
inline WeightSequence loggevrey(double s, int kmax = 200) { return make_family(FamilyTag::loggevrey, {s}, kmax); }

// ---------------------------------------------------------------------------
// Tail sums.  All tails are returned as rigorous-ish brackets; "certified"
// means a symbolic argument (p-series / comparison) covers the part beyond
// the table.
// ---------------------------------------------------------------------------

struct TailSum {
    double lower = 0.0;
    double upper = 0.0;  // +inf when divergent
    bool certified = false;

    double mid() const { return std::isinf(upper) ? kInf : 0.5 * (lower + upper); }
    bool divergent() const { return std::isinf(upper) && std::isinf(lower); }
};

// sum_{j >= k0} 1/mu_j
TailSum tail_inv_mu(const WeightSequence& M, int k0);
// sum_{j >= k0} (1/mu_j) * (j/kref)^eps   (the Cor-type weighted tail)
TailSum tail_inv_mu_weighted(const WeightSequence& M, int k0, int kref, double eps);

// Hurwitz zeta sum_{j >= k0} j^{-s}, s > 1, via Euler-Maclaurin
double hurwitz_tail(double s, double k0);

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

struct ClassReport {
    std::string name;
    int kmax = 0;
    bool log_convex = false;
    bool strongly_log_convex = false;
    Verdict derivation_closed;
    Verdict moderate_growth;
    Verdict quasianalytic;
    double snq_index = kInf;  // sup_k (mu_k/k) sum_{j>=k} 1/mu_j; +inf if divergent
    bool snq_index_finite = false;
    Verdict strongly_nonquasianalytic;
    Verdict mk_root_almost_increasing;  // proxy for (FdB), see notes
};

ClassReport classify(const WeightSequence& M);

// lower convex hull of (k, log M_k); idempotent, <= M pointwise
WeightSequence log_convex_minorant(const WeightSequence& M);

// ---------------------------------------------------------------------------
// Inclusion relations
// ---------------------------------------------------------------------------

struct RelationReport {
    Verdict preceq;        // sup_k (M_k/N_k)^{1/k} < inf
    Verdict triangleleft;  // (M_k/N_k)^{1/k} -> 0
    Verdict equivalent;    // preceq both ways
    Verdict preceq_rev;    // N preceq M
};

RelationReport relation(const WeightSequence& M, const WeightSequence& N);

// ---------------------------------------------------------------------------
// Descendant (the maximal sequence compatible with nu under the mixed
// strong-non-quasianalyticity condition)
// ---------------------------------------------------------------------------

struct DescendantResult {
    WeightSequence S;
    std::vector<double> tau;    // tau_k, k = 1..kmax
    std::vector<double> sigma;  // sigma_k, k = 0..kmax
    std::vector<BoundCertificate> certificates;
    bool warned_empirical_tail = false;
};

DescendantResult descendant(const WeightSequence& N);

// ---------------------------------------------------------------------------
// CC Lemma 16 machinery
// ---------------------------------------------------------------------------

struct CC16Result {
    std::vector<double> lambda;  // index 1..n stored at [1..n]; [0] unused = 0
    std::vector<BoundCertificate> certificates;
};

// alpha >= 0 summable (empirically), beta > 0 -> 0, gamma > 0 strictly
// decreasing; tables indexed 1..n at positions [1..n] ([0] ignored).
CC16Result cc16_lambda(const std::vector<double>& alpha, const std::vector<double>& beta,
                       const std::vector<double>& gamma);

struct CC17Result {
    WeightSequence N;
    std::vector<double> theta;  // [1..kmax]
    std::vector<BoundCertificate> certificates;
};

// strongly regular weight sequence N with L preceq N triangleleft M
CC17Result cc17_reduce(const WeightSequence& L, const WeightSequence& M);

// ---------------------------------------------------------------------------
// Admissible pairs of weight sequences
// ---------------------------------------------------------------------------

struct PairReport {
    std::vector<double> sv_lambda;  // lambda_{p,k}, k = 1..kmax
    Verdict sv_ok;                  // sup_k (lambda_{p,k}/k) sum_{j>=k} 1/nu_j < inf
    Verdict mixed_snq;              // sup_k (mu_k/k) sum_{j>=k} 1/nu_j < inf
    Verdict admissible;
    // reported side conditions
    bool M_strongly_log_convex = false;
    bool N_strongly_log_convex = false;
    Verdict M_moderate_growth;
    Verdict mk_root_to_infinity;
    Verdict M_preceq_N;
};

PairReport pair_conditions(const WeightSequence& M, const WeightSequence& N, double p = 1.0);

// ---------------------------------------------------------------------------
// Modified quotient sequences (Cor "setupcutoff")
// ---------------------------------------------------------------------------

struct ModifiedQuotients {
    double eps = 0.0;
    double A = 0.0;           // smallest constant on the table
    int kmax = 0;
    bool monotone = false;    // eq:modifiedseq increasing for all table k
};

// checks monotonicity of the modified sequence and computes the constant A;
// eps < 0 requests the automatic grid search {0.5, 0.25, 0.1, 0.05, 0.01}
ModifiedQuotients modified_quotients(const WeightSequence& M, double eps);

// reciprocal d-sequence of stage k: d_1..d_k = 1/mu_k, d_{k+j} = (1/mu_{k+j}) ((k+j)/k)^eps;
// count entries are produced (count >= k allowed beyond the table for closed forms)
std::vector<double> modified_reciprocals(const WeightSequence& M, int k, double eps, int count);

// sum of the full reciprocal sequence of stage k: k/mu_k + weighted tail
double modified_reciprocal_sum(const WeightSequence& M, int k, double eps);

}  // namespace ultra::weights
