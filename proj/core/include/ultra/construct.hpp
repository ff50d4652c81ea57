#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ultra/assocfn.hpp"
#include "ultra/common.hpp"
#include "ultra/pwpoly.hpp"
#include "ultra/verdict.hpp"
#include "ultra/weights.hpp"

namespace ultra::construct {

using pwp::PwPoly;
using pwp::PwPolyQ;
using pwp::Rational;
using pwp::Tensor;
using weights::WeightSequence;

enum class NumericMode { floating, rational };

// truncated trigonometric sum  sum_k exp(logamp_k) e^{i freq_k x}
struct TrigSum {
    std::vector<double> freqs;
    std::vector<double> logamps;

    std::complex<double> eval_deriv(double x, int j) const;
    // rigorous upper bound sum |amp| freq^j for the sup over R
    double sup_bound(int j) const;
};

// weighted sum of tensor products (arises for multi-dimensional Borel sums)
struct TensorSum {
    std::vector<double> coeffs;
    std::vector<Tensor> terms;

    double eval(const Point& p) const;
    double eval_deriv(const Point& p, const MultiIndex& alpha) const;
};

// A constructed function together with re-verifiable bound certificates.
struct CertifiedFunction {
    std::variant<PwPoly, Tensor, TrigSum, TensorSum> body;
    int order = 0;  // derivative orders < order are controlled
    std::vector<BoundCertificate> certificates;
    std::map<std::string, double> metadata;
    std::string weight_name;

    const PwPoly& poly() const { return std::get<PwPoly>(body); }
    const Tensor& tensor() const { return std::get<Tensor>(body); }
    const TrigSum& trig() const { return std::get<TrigSum>(body); }
    const TensorSum& tensor_sum() const { return std::get<TensorSum>(body); }

    double eval(double x) const;
    double eval(const Point& p) const;
    double eval_deriv(double x, int j) const;
    double eval_deriv(const Point& p, const MultiIndex& alpha) const;

    // requesting an order >= `order` is an error, never an extrapolation
    void require_order(int j) const;
};

// ---------------------------------------------------------------------------
// step bump: f_K = H_{a_0} * ... * H_{a_K}
// ---------------------------------------------------------------------------

CertifiedFunction step_bump(const std::vector<double>& a, int K,
                            NumericMode mode = NumericMode::floating);
// exact-rational body (kept by the caller when mode == rational matters)
pwp::PiecewisePoly<Rational> step_bump_exact(const std::vector<Rational>& a, int K);

// ---------------------------------------------------------------------------
// box cutoffs (tensor): phi = 1 near K_box, supp phi inside U_box
// ---------------------------------------------------------------------------

struct Box {
    std::vector<double> lo, hi;
    int dim() const { return int(lo.size()); }
};

// explicit d-sequence variant; d must be positive decreasing with
// sum d_j < margin = dist_inf(K_box, complement of U_box)
CertifiedFunction box_cutoff(const std::vector<double>& d, const Box& K_box, const Box& U_box,
                             int q, NumericMode mode = NumericMode::floating);
// weight-sequence variant, d_j = margin / (s mu_j), s = sum 1/mu_j
CertifiedFunction box_cutoff(const WeightSequence& M, const Box& K_box, const Box& U_box, int q,
                             NumericMode mode = NumericMode::floating);

// the 1-D profile used per axis (plateau [plo,phi], support [slo,shi]);
// building block for box_cutoff and the partition machinery
PwPoly cutoff_profile_1d(const std::vector<double>& d, double plat_lo, double plat_hi,
                         double margin, int q);

// ---------------------------------------------------------------------------
// Bang characteristic function
// ---------------------------------------------------------------------------

CertifiedFunction bang_characteristic(const WeightSequence& M, int terms, int probe_order);

// ---------------------------------------------------------------------------
// size near flatness (Lemma-style check)
// ---------------------------------------------------------------------------

BoundCertificate flat_size_check(const CertifiedFunction& f, const WeightSequence& M, int ell,
                                 int n, double t);

// ---------------------------------------------------------------------------
// optimal cutoffs
// ---------------------------------------------------------------------------

enum class CutoffKind { roumieu, beurling };

struct OptimalCutoff {
    CertifiedFunction fn;   // plateau [-r, r]
    double support_radius;  // (1+eps) r for Roumieu, 9r/8 for Beurling
    int stage_p = 0;        // Roumieu stage index p (or Beurling k(r))
    double measured_seminorm = 0.0;
    double C_achieved = 0.0;  // argument rescaling achieved in 1/h_m(C rho r eps)
};

// Roumieu: plateau [-r,r], support [-(1+eps) r, (1+eps) r], seminorm at rho
// certified against 1/h_m(C rho r eps); generalized to an admissible pair by
// passing amplitudes != bounds (pass N = M for the classical case).
OptimalCutoff optimal_cutoff(const WeightSequence& M, double r, double eps, double rho,
                             CutoffKind kind, int q,
                             const std::optional<WeightSequence>& amplitudes = std::nullopt,
                             const std::vector<double>& beurling_rhos = {1.0, 0.5, 0.25});

// ---------------------------------------------------------------------------
// Borel right inverse
// ---------------------------------------------------------------------------

struct BorelPsi {
    PwPoly psi;          // psi_k(t) = phi_k(t) t^k / k!
    PwPolyQ psi_exact;   // rational-mode body (empty unless requested)
    double support_radius = 0.0;
    int k = 0;
};

struct BorelExtension {
    // n-D: E(a) = sum_{|alpha| <= pmax} a_alpha prod_i psi_{alpha_i}(x_i)
    int dim = 1;
    int pmax = 0;
    double eps = 0.0;
    std::vector<BorelPsi> psis;  // index k = 0..pmax
    std::vector<double> coeffs;  // a_alpha in the order of multi_indices_upto
    std::vector<MultiIndex> alphas;
    std::vector<BoundCertificate> certificates;
    NumericMode mode = NumericMode::floating;

    double eval(const Point& p) const;
    double eval_deriv(const Point& p, const MultiIndex& alpha) const;
    Rational eval_deriv_exact(const Point& p, const MultiIndex& alpha) const;
};

// jet values `a` ordered like multi_indices_upto(dim, pmax)
BorelExtension borel_extend(const WeightSequence& M, const std::vector<double>& a, int dim,
                            int pmax, double eps, int q, NumericMode mode = NumericMode::floating);

// the 1-D building block psi_k (shared by borel_extend and the extension ops)
BorelPsi borel_psi(const WeightSequence& M, int k, double eps, double A, int q, NumericMode mode);

}  // namespace ultra::construct
