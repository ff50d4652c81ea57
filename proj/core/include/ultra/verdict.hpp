#pragma once

#include <map>
#include <string>
#include <vector>

#include "ultra/common.hpp"

namespace ultra {

// Three-valued answer for asymptotic questions decided on finite tables.
// A truncated series or sup can never certify divergence, so a numeric
// observation is only ever "empirical" unless a closed-form family tag
// allows a symbolic argument.
struct Verdict {
    enum class Kind { certified_true, certified_false, empirical };

    Kind kind = Kind::empirical;
    bool value = false;       // best estimate (equals the certainty when certified)
    double observed = 0.0;    // observed partial value at kmax (empirical only)
    int kmax = 0;
    std::string note;

    static Verdict certified(bool v, std::string note = "") {
        Verdict r;
        r.kind = v ? Kind::certified_true : Kind::certified_false;
        r.value = v;
        r.note = std::move(note);
        return r;
    }
    static Verdict empirical(bool estimate, double observed, int kmax, std::string note = "") {
        Verdict r;
        r.kind = Kind::empirical;
        r.value = estimate;
        r.observed = observed;
        r.kmax = kmax;
        r.note = std::move(note);
        return r;
    }

    bool is_certified() const { return kind != Kind::empirical; }
    bool certainly_true() const { return kind == Kind::certified_true; }
    bool certainly_false() const { return kind == Kind::certified_false; }
    // usable as a precondition: not refuted
    bool plausible() const { return kind != Kind::certified_false && value; }

    std::string str() const {
        switch (kind) {
            case Kind::certified_true: return "certified_true";
            case Kind::certified_false: return "certified_false";
            default:
                return std::string("empirical(") + (value ? "true" : "false") + ", " +
                       std::to_string(observed) + ", kmax=" + std::to_string(kmax) + ")";
        }
    }
};

// Record of one proved inequality instance lhs <= rhs * (1 + tol).
struct BoundCertificate {
    std::string inequality_id;
    double lhs_max = 0.0;
    double rhs_min = 0.0;
    std::map<std::string, double> constants;
    std::string grid;  // description of the evaluation points
    double tol = 0.0;
    bool passed = false;

    static BoundCertificate make(std::string id, double lhs, double rhs,
                                 std::map<std::string, double> constants = {},
                                 std::string grid = "", double tol = 0.0) {
        BoundCertificate c;
        c.inequality_id = std::move(id);
        c.lhs_max = lhs;
        c.rhs_min = rhs;
        c.constants = std::move(constants);
        c.grid = std::move(grid);
        c.tol = tol;
        c.passed = lhs <= rhs * (1.0 + tol) || (rhs == 0.0 && lhs <= tol);
        return c;
    }
};

inline bool all_passed(const std::vector<BoundCertificate>& certs) {
    for (const auto& c : certs)
        if (!c.passed) return false;
    return true;
}

}  // namespace ultra
