#include <cmath>
#include <random>

#include "doctest.h"
#include "ultra/weights.hpp"

using namespace ultra;
using namespace ultra::weights;

namespace {

// brute-force oracle: sum_{j=k}^{J} 1/mu_j by direct summation
double brute_tail(const WeightSequence& M, int k, int J) {
    double s = 0.0;
    for (int j = k; j <= J; ++j) s += std::exp(-M.logmu(j));
    return s;
}

WeightSequence table_seq(std::vector<double> Ms) {
    std::vector<double> lg(Ms.size());
    for (std::size_t i = 0; i < Ms.size(); ++i) lg[i] = std::log(Ms[i]);
    return WeightSequence("table", std::move(lg));
}

}  // namespace

TEST_CASE("gevrey closed form") {
    auto M = gevrey(2.0, 10);
    // M_5 = 120^2
    CHECK(M.M(5) == doctest::Approx(14400.0).epsilon(1e-12));
    CHECK(M.logM(0) == 0.0);
    // quotients mu_k = k^2
    for (int k = 1; k <= 10; ++k) CHECK(M.mu(k) == doctest::Approx(double(k) * k).epsilon(1e-12));
}

TEST_CASE("denjoy closed form at k=2") {
    auto Q = denjoy(1, 1.0, 10);
    double expect = 4.0 * std::pow(std::log(2.0 + std::exp(1.0)), 2.0);
    CHECK(Q.M(2) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("family validation") {
    CHECK_THROWS_AS(gevrey(0.5), std::invalid_argument);
    CHECK_THROWS_AS(denjoy(1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(denjoy(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_family(FamilyTag::gevrey, {2.0}, 4), std::invalid_argument);
}

TEST_CASE("log convex minorant: hand-computed hull") {
    // M = (1,1,4,8,...): chord through (1,0) and (3,log 8) gives sqrt(8) at
    // k=2; the continuation is steep and convex so it stays on the hull
    double l8 = std::log(8.0);
    std::vector<double> lg = {0.0, 0.0, std::log(4.0), l8,
                              l8 + 4.0, l8 + 9.0, l8 + 16.0, l8 + 25.0, l8 + 36.0};
    WeightSequence M("hand", lg);
    auto H = log_convex_minorant(M);
    CHECK(H.M(2) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
    CHECK(H.M(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(H.M(3) == doctest::Approx(8.0).epsilon(1e-12));
    // idempotent
    auto H2 = log_convex_minorant(H);
    for (int k = 0; k <= H.kmax(); ++k) CHECK(H2.logM(k) == doctest::Approx(H.logM(k)).epsilon(1e-12));
    // pointwise <= M
    for (int k = 0; k <= H.kmax(); ++k) CHECK(H.logM(k) <= M.logM(k) + 1e-12);
}

TEST_CASE("log convex minorant: fixes convex tables, removes spikes") {
    auto G = gevrey(2.0, 20);
    auto H = log_convex_minorant(G);
    for (int k = 0; k <= 20; ++k) CHECK(H.logM(k) == doctest::Approx(G.logM(k)).epsilon(1e-13));

    // spike at k=2: hull interpolates the neighbors
    std::vector<double> lg;
    for (int k = 0; k <= 8; ++k) lg.push_back(gevrey(2.0, 8).logM(k));
    lg[2] += std::log(10.0);
    WeightSequence spiked("spiked", lg);
    auto Hs = log_convex_minorant(spiked);
    CHECK(Hs.logM(2) < lg[2] - 1.0);
    CHECK(Hs.logM(0) == 0.0);
    CHECK(Hs.logM(8) == doctest::Approx(lg[8]).epsilon(1e-13));
}

TEST_CASE("classify gevrey family") {
    auto r1 = classify(gevrey(1.0, 50));
    CHECK(r1.quasianalytic.certainly_true());
    CHECK(r1.log_convex);
    CHECK(r1.strongly_log_convex);
    CHECK(r1.moderate_growth.certainly_true());
    CHECK_FALSE(r1.strongly_nonquasianalytic.plausible());

    auto r2 = classify(gevrey(2.0, 200));
    CHECK(r2.quasianalytic.certainly_false());
    CHECK(r2.strongly_nonquasianalytic.certainly_true());
    // snq index: sup_k k * sum_{j>=k} j^{-2} = pi^2/6 at k=1
    CHECK(r2.snq_index == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-6));

    auto rd = classify(denjoy(1, 1.0, 50));
    CHECK(rd.quasianalytic.certainly_true());
    auto rd2 = classify(denjoy(2, 1.0, 50));
    CHECK(rd2.quasianalytic.certainly_true());
}

TEST_CASE("classify monotone in s") {
    for (double s : {1.0, 1.5, 2.0, 3.0}) {
        auto r = classify(gevrey(s, 100));
        CHECK(r.quasianalytic.certainly_true() == (s == 1.0));
    }
}

TEST_CASE("tail_inv_mu against brute force") {
    auto M = gevrey(2.0, 60);
    for (int k : {1, 2, 5, 30}) {
        auto t = tail_inv_mu(M, k);
        CHECK(t.certified);
        double brute = brute_tail(M, k, 60) + hurwitz_tail(2.0, 61.0);
        CHECK(t.mid() == doctest::Approx(brute).epsilon(1e-9));
    }
}

TEST_CASE("hurwitz tail vs direct summation") {
    double direct = 0.0;
    for (int j = 3; j <= 3000000; ++j) direct += std::pow(double(j), -1.5);
    CHECK(hurwitz_tail(1.5, 3.0) == doctest::Approx(direct).epsilon(1e-3));
    CHECK(hurwitz_tail(2.0, 1.0) == doctest::Approx(M_PI * M_PI / 6.0).epsilon(1e-10));
}

TEST_CASE("relation verdicts") {
    auto rel = relation(gevrey(2.0, 60), gevrey(3.0, 60));
    CHECK(rel.triangleleft.certainly_true());
    CHECK(rel.preceq.certainly_true());
    CHECK(rel.equivalent.certainly_false());

    auto req = relation(gevrey(2.0, 60), power(2.0, 60));
    CHECK(req.equivalent.certainly_true());

    auto M = gevrey(2.0, 60);
    auto rid = relation(M, M);
    CHECK(rid.equivalent.certainly_true());
}

TEST_CASE("relation is a preorder on random triples") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        std::uniform_real_distribution<double> u(1.0, 3.0);
        double a = u(rng), b = u(rng), c = u(rng);
        auto A = gevrey(std::min({a, b, c}), 40);
        auto B = gevrey(std::max({a, b, c}), 40);
        auto C = gevrey(b, 40);
        // reflexive
        CHECK(relation(A, A).preceq.plausible());
        // transitive on the sorted triple
        if (relation(A, C).preceq.plausible() && relation(C, B).preceq.plausible())
            CHECK(relation(A, B).preceq.plausible());
    }
}

TEST_CASE("weight sequence basic inequalities (Lemma-level)") {
    for (auto M : {gevrey(1.5, 40), gevrey(2.0, 40), denjoy(1, 0.5, 40)}) {
        auto rep = classify(M);
        REQUIRE(rep.log_convex);
        // M_k^{1/k} <= mu_k
        for (int k = 1; k <= M.kmax(); ++k) CHECK(M.logM(k) / k <= M.logmu(k) + 1e-12);
        // M_j M_k <= M_{j+k}
        for (int j = 0; j <= 20; j += 3)
            for (int k = 0; j + k <= M.kmax(); k += 5)
                CHECK(M.logM(j) + M.logM(k) <= M.logM(j + k) + 1e-10);
        // M_k^{1/k} increasing
        for (int k = 1; k < M.kmax(); ++k)
            CHECK(M.logM(k) / k <= M.logM(k + 1) / (k + 1) + 1e-12);
    }
}

TEST_CASE("descendant of gevrey(2)") {
    auto D = descendant(gevrey(2.0, 200));
    double tau1 = 1.0 + M_PI * M_PI / 6.0;
    CHECK(D.tau[1] == doctest::Approx(tau1).epsilon(1e-9));
    CHECK(D.sigma[1] == doctest::Approx(1.0).epsilon(1e-12));
    double tau2 = 0.5 + (M_PI * M_PI / 6.0 - 1.0);
    CHECK(D.tau[2] == doctest::Approx(tau2).epsilon(1e-9));
    CHECK(D.sigma[2] == doctest::Approx(2.0 * tau1 / tau2).epsilon(1e-9));
    for (const auto& c : D.certificates) CHECK(c.passed);

    // Cor: for strongly non-quasianalytic N, S and N are equivalent
    double lo = kInf, hi = 0.0;
    auto N = gevrey(2.0, 200);
    for (int k = 1; k <= 200; ++k) {
        double r = D.sigma[std::size_t(k)] / N.mu(k);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    CHECK(lo > 1e-3);
    CHECK(hi < 1e3);

    // sigma_k / k increasing on the whole table
    for (int k = 1; k < 200; ++k)
        CHECK(D.sigma[std::size_t(k)] / k <= D.sigma[std::size_t(k + 1)] / (k + 1) + 1e-12);
}

TEST_CASE("descendant rejects quasianalytic input") {
    CHECK_THROWS_AS(descendant(gevrey(1.0, 30)), std::domain_error);
}

TEST_CASE("descendant maximality on the table") {
    // any mu' <= c nu with sup (mu'_k/k) sum 1/nu_j < inf has mu' <= C sigma
    auto N = gevrey(2.0, 120);
    auto D = descendant(N);
    // candidate mu'_k = nu_k / (1 + log k): satisfies both hypotheses
    double supratio = 0.0;
    for (int k = 1; k <= 120; ++k) {
        double mup = N.mu(k) / (1.0 + std::log(double(k)));
        supratio = std::max(supratio, mup / D.sigma[std::size_t(k)]);
    }
    CHECK(supratio < 1e3);
}

TEST_CASE("cc16 on geometric data") {
    int n = 60;
    std::vector<double> a(std::size_t(n) + 1, 0.0), b = a, g = a;
    for (int k = 1; k <= n; ++k)
        a[std::size_t(k)] = b[std::size_t(k)] = g[std::size_t(k)] = std::pow(2.0, -k);
    auto res = cc16_lambda(a, b, g);
    for (const auto& c : res.certificates) CHECK(c.passed);
    // factor-8 inequality verified directly by brute force
    for (int k = 1; k <= n; ++k) {
        double lhs = 0.0, tail = 0.0;
        for (int j = k; j <= n; ++j) {
            lhs += res.lambda[std::size_t(j)] * a[std::size_t(j)];
            tail += a[std::size_t(j)];
        }
        CHECK(lhs <= 8.0 * res.lambda[std::size_t(k)] * tail * (1.0 + 1e-12));
    }
    // lambda increasing (corollary needs beta_k/alpha_k = lambda_k increasing)
    for (int k = 1; k < n; ++k)
        CHECK(res.lambda[std::size_t(k)] <= res.lambda[std::size_t(k + 1)] + 1e-15);
}

TEST_CASE("cc16 rejects non-decreasing gamma") {
    int n = 20;
    std::vector<double> a(std::size_t(n) + 1, 0.1), b = a, g(std::size_t(n) + 1, 1.0);
    CHECK_THROWS_AS(cc16_lambda(a, b, g), std::invalid_argument);
}

TEST_CASE("cc16 randomized admissible inputs") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        int n = 80;
        std::vector<double> a(std::size_t(n) + 1, 0.0), b = a, g = a;
        double gv = 10.0;
        for (int k = 1; k <= n; ++k) {
            a[std::size_t(k)] = u(rng) * std::pow(1.7, -k);
            b[std::size_t(k)] = u(rng) * std::pow(double(k), -2.0);
            gv *= (0.4 + 0.5 * u(rng));
            g[std::size_t(k)] = gv;
        }
        auto res = cc16_lambda(a, b, g);
        for (const auto& c : res.certificates) {
            INFO(c.inequality_id);
            CHECK(c.passed);
        }
    }
}

TEST_CASE("cc17 reduction") {
    auto L = gevrey(1.5, 150);
    auto M = gevrey(3.0, 150);
    auto res = cc17_reduce(L, M);
    for (const auto& c : res.certificates) {
        INFO(c.inequality_id);
        CHECK(c.passed);
    }
    // L preceq N: ratio^{1/k} bounded; N triangleleft M: ratio^{1/k} decreasing
    double supLN = 0.0;
    for (int k = 1; k <= 150; ++k)
        supLN = std::max(supLN, (L.logM(k) - res.N.logM(k)) / k);
    CHECK(std::exp(supLN) < 1e3);
    CHECK((res.N.logM(150) - M.logM(150)) / 150.0 < (res.N.logM(10) - M.logM(10)) / 10.0);

    CHECK_THROWS_AS(cc17_reduce(M, M), std::domain_error);
}

TEST_CASE("cc17 with L identically 1") {
    std::vector<double> ones(151, 0.0);
    WeightSequence L("one", ones);
    auto M = gevrey(2.0, 150);
    auto res = cc17_reduce(L, M);
    // theta increases to infinity, N stays below M
    CHECK(res.theta[150] > res.theta[1]);
    double last = (res.N.logM(150) - M.logM(150)) / 150.0;
    CHECK(last < -0.5);
}

TEST_CASE("pair conditions") {
    auto N = gevrey(2.0, 200);
    auto D = descendant(N);
    auto rep = pair_conditions(D.S, N, 1.0);
    CHECK(rep.admissible.plausible());
    CHECK(rep.mixed_snq.plausible());

    auto rep2 = pair_conditions(N, N, 1.0);
    CHECK(rep2.admissible.plausible());

    // lambda_{p,k} <= mu_k for all k, any p >= 1
    for (double p : {1.0, 2.0, 5.0}) {
        auto r = pair_conditions(N, N, p);
        for (int k = 1; k <= 200; ++k)
            CHECK(r.sv_lambda[std::size_t(k)] <= N.mu(k) * (1.0 + 1e-9));
    }
    // M > N somewhere -> domain error
    CHECK_THROWS_AS(pair_conditions(gevrey(3.0, 100), gevrey(2.0, 100), 1.0), std::domain_error);
}

TEST_CASE("modified quotients") {
    auto M = gevrey(2.0, 200);
    auto mq = modified_quotients(M, 0.5);
    CHECK(mq.monotone);
    // A = sup_k (1 + (mu_k/k) sum_{j>k} (1/mu_j)(j/k)^eps) by brute-force tails
    auto brute_A = [&](double eps) {
        double A = 0.0;
        for (int k = 1; k <= 200; ++k) {
            double s = 0.0;
            for (int j = k + 1; j <= 400000; ++j)
                s += std::pow(double(j), eps - 2.0) * std::pow(double(k), -eps);
            A = std::max(A, 1.0 + s * std::exp(M.logmu(k)) / double(k));
        }
        return A;
    };
    CHECK(mq.A == doctest::Approx(brute_A(0.5)).epsilon(1e-2));
    CHECK(std::isfinite(mq.A));

    // eps = 0: the sum degenerates to the plain strongly-non-quasianalytic sum
    auto mq0 = modified_quotients(M, 0.0);
    CHECK(mq0.A == doctest::Approx(brute_A(0.0)).epsilon(1e-3));

    CHECK_THROWS_AS(modified_quotients(gevrey(1.0, 50), 0.5), std::domain_error);
}

TEST_CASE("modified reciprocals are decreasing and match the stage") {
    auto M = gevrey(2.0, 100);
    auto d = modified_reciprocals(M, 5, 0.5, 40);
    for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] <= d[i - 1] * (1.0 + 1e-12));
    for (int i = 0; i < 5; ++i) CHECK(d[std::size_t(i)] == doctest::Approx(1.0 / 25.0));
}

TEST_CASE("custom tables get empirical verdicts") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 0.2);
    std::vector<double> lg(41, 0.0);
    for (int k = 1; k <= 40; ++k)
        lg[std::size_t(k)] = lg[std::size_t(k - 1)] + 1.5 * std::log(double(k) + 1.0) + u(rng);
    WeightSequence M("noisy", lg);
    auto rep = classify(M);
    CHECK_FALSE(rep.quasianalytic.is_certified());
    CHECK(rep.quasianalytic.kmax == 40);
}

TEST_CASE("table sequence validation") {
    CHECK_THROWS_AS(table_seq({2.0, 1, 1, 1, 1, 1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(table_seq({1.0, 0.5, 1, 1, 1, 1, 1, 1, 1}), std::invalid_argument);
}
