#pragma once

#include <complex>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ultra/common.hpp"
#include "ultra/verdict.hpp"
#include "ultra/weights.hpp"

namespace ultra::assoc {

using weights::WeightSequence;

// ---------------------------------------------------------------------------
// Associated functions of a log-convex sequence m (passed as a WeightSequence
// whose table *is* m).  small_sequence(M) extracts m_k = M_k / k! from M,
// keeping a closed form when one exists.
// ---------------------------------------------------------------------------

WeightSequence small_sequence(const WeightSequence& M);

struct AssocValues {
    double h = 0.0;         // h_m(t) = inf_k m_k t^k  (includes the k=0 term 1)
    int gamma = 1;          // least k >= 1 attaining the infimum
    int sigma_count = 0;    // #{k >= 1 : m_k/m_{k-1} <= t}
    double omega_m = 0.0;   // log(1 / h_m(1/t))
};

// throws TruncationError when Gamma would exceed kmax on an untagged table
AssocValues assoc_eval(const WeightSequence& m, double t);

double h_m(const WeightSequence& m, double t);
int gamma_m(const WeightSequence& m, double t);
int sigma_m(const WeightSequence& m, double t);
double omega_m(const WeightSequence& m, double t);
// quadrature of the counting integral int_0^t Sigma_m(u)/u du
double omega_m_by_integral(const WeightSequence& m, double t, double tol = 1e-8);

struct MgConsequences {
    double C_h = 0.0;      // smallest grid C with h(t) <= h(Ct)^2 on the grid
    double C_gamma = 0.0;  // smallest grid C with 2 Gamma(Ct) <= Gamma(t), t small
    std::vector<BoundCertificate> certificates;
};

MgConsequences moderate_growth_consequences(const WeightSequence& m,
                                            const std::vector<double>& tgrid);

struct OmegaValue {
    double value = 0.0;
    int argmax = 0;
    bool truncated = false;  // argmax pinned at kmax on an untagged table
};

// omega_M(t) = sup_k log(t^k / M_k); 0 for t <= 1
OmegaValue omega_from_sequence(const WeightSequence& M, double t);

// ---------------------------------------------------------------------------
// Weight functions
// ---------------------------------------------------------------------------

enum class WfTag { root, logpow, sublogpow, custom_samples };

// Increasing continuous omega with omega(0) = 0, normalized so that
// omega|[0,1] = 0 (raw value at 1 subtracted and clamped).
class WeightFunction {
public:
    static WeightFunction root(double a);        // max(0, t^a - 1), 0 < a < 1
    static WeightFunction logpow(double s);      // max(0, (log t)^s), s > 1
    static WeightFunction sublogpow(double alpha);  // ~ t / (log t)^alpha, alpha >= 1
    static WeightFunction from_samples(std::string name,
                                       std::vector<std::pair<double, double>> samples);

    const std::string& name() const { return name_; }
    WfTag tag() const { return tag_; }
    const std::vector<double>& params() const { return params_; }
    bool closed_form() const { return tag_ != WfTag::custom_samples; }
    const std::vector<std::pair<double, double>>& samples() const { return samples_; }

    double eval(double t) const;      // normalized omega
    double eval_raw(double t) const;  // before normalization
    double tmax() const;              // largest reliable argument
    double phi(double s) const { return eval(std::exp(s)); }

    // inverse of the normalized omega by bisection (t with omega(t) = y)
    double inverse(double y) const;

private:
    WfTag tag_ = WfTag::custom_samples;
    std::vector<double> params_;
    std::vector<std::pair<double, double>> samples_;  // (t, omega_raw(t)), t increasing
    std::string name_;
    double raw_at_one_ = 0.0;
};

// Young conjugate phi*(y) = sup_{s>=0} (sy - phi(s)), computed on demand by
// ternary search on the concave objective.
class YoungConjugate {
public:
    explicit YoungConjugate(const WeightFunction& w);

    double phi(double s) const { return w_->phi(s); }
    double phistar(double y) const;
    double phistarstar(double s) const;  // biconjugate
    bool truncated(double y) const;      // argmax hit the evaluable boundary

    // grid export {y, phistar(y)}
    std::vector<std::pair<double, double>> grid(double ymax, int npts) const;

private:
    const WeightFunction* w_;
    double smax_;
};

// first triple (i-1, i, i+1) of phi-samples violating convexity, if any
std::optional<std::array<double, 3>> phi_convexity_violation(const WeightFunction& w, int npts = 512);

// ---------------------------------------------------------------------------
// Associated weight matrix W^x_k = exp(phi*(xk)/x)
// ---------------------------------------------------------------------------

class WeightMatrix {
public:
    WeightMatrix(WeightFunction omega, int kmax = 200);

    const WeightFunction& omega() const { return omega_; }
    const YoungConjugate& conjugate() const { return yc_; }
    int kmax() const { return kmax_; }

    // lazily materialized; initialize-once per x
    const WeightSequence& sequence(double x) const;

    std::vector<BoundCertificate> certificates(const std::vector<double>& xs, double rho = 2.0) const;

private:
    WeightFunction omega_;
    YoungConjugate yc_;
    int kmax_;
    mutable std::map<double, WeightSequence> cache_;
};

// ---------------------------------------------------------------------------
// Classification of weight functions
// ---------------------------------------------------------------------------

struct WfReport {
    std::string name;
    Verdict axiom_omega2t;     // omega(2t) = O(omega(t))
    Verdict axiom_logt_small;  // log t = o(omega(t))
    Verdict axiom_phi_convex;
    Verdict quasianalytic;  // int_1^inf omega(t)/t^2 dt = inf
    Verdict strong;
    Verdict dn_weight;
    Verdict concave_equiv;
    double omega2t_C = 0.0;
    double strong_K = 0.0, strong_H = 0.0;
    std::optional<std::pair<double, double>> dn_witness;  // violating (C, t)
    std::vector<BoundCertificate> certificates;           // kappa cross-check etc.
};

WfReport classify_weightfn(const WeightFunction& w);

struct WfComparison {
    Verdict bigO;    // sigma = O(omega)
    Verdict littleO; // sigma = o(omega)
};
WfComparison compare_weightfns(const WeightFunction& sigma, const WeightFunction& omega);

// kappa_omega(t) = int_1^inf omega(ut)/u^2 du
double kappa(const WeightFunction& w, double t);

struct WfPairReport {
    Verdict admissible;           // kappa_omega <= C sigma + C
    Verdict strongly_admissible;  // omega(K^j t) <= C H^j sigma(t)
    double C_admissible = 0.0;
    double K = 0.0, H = 0.0, C_strong = 0.0;
    std::vector<BoundCertificate> certificates;
};

WfPairReport pair_admissibility_wf(const WeightFunction& sigma, const WeightFunction& omega);

// ---------------------------------------------------------------------------
// Moment-type transforms (truncated)
// ---------------------------------------------------------------------------

struct MomentResult {
    std::complex<double> S{0.0, 0.0};  // S_M f(z) = sum a_n / (n! m_{n+1}) z^n
    std::complex<double> E{0.0, 0.0};  // E(z) = sum z^n / m_{n+1}
    double S_tail = 0.0, E_tail = 0.0;
    bool S_diverged = false, E_diverged = false;
};

MomentResult moment_transforms(const WeightSequence& M, const std::vector<std::complex<double>>& a,
                               std::complex<double> z);

}  // namespace ultra::assoc
