#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "fnm/closedform.hpp"
#include "fnm/dynamics.hpp"
#include "fnm/errors.hpp"
#include "fnm/spectrum.hpp"
#include "fnm/wavepacket.hpp"

using namespace fnm;

namespace {

struct Setup {
    RingGeometry g;
    std::vector<EigenMode> modes;
    ExpandedState s1, s2;
    OverlapKernel kernel;
};

Setup make_setup(const RingGeometry& g, double x1, double x2, double sigma, double k_max, double fidelity = 0.99) {
    Setup s;
    s.g = g;
    s.modes = find_modes(g, k_max);
    s.s1 = expand(make_packet(x1, sigma, g.L()), s.modes, g, fidelity);
    s.s2 = expand(make_packet(x2, sigma, g.L()), s.modes, g, fidelity);
    std::vector<std::size_t> ids = s.s1.ids;
    ids.insert(ids.end(), s.s2.ids.begin(), s.s2.ids.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    s.kernel = overlap_kernel(s.modes, ids, g);
    return s;
}

const Setup& fig3_broad() {
    static const Setup s = make_setup({2.0, 1.0, 1e6, 2e6}, 0.5, -0.5, 0.125, 220.0);
    return s;
}

double d_from_lambdas(const PairObservables& o) {
    auto [l1, l2] = lambdas(o);
    return std::sqrt(0.5 * (l1 * l1 + l2 * l2));
}

}  // namespace

TEST_CASE("lambdas and distance on hand-made observables") {
    PairObservables o{0.0, 1.0, 1.0, 0.0};
    auto [a, b] = lambdas(o);
    CHECK(a == doctest::Approx(1.0));
    CHECK(b == doctest::Approx(-1.0));
    CHECK(distance(o) == doctest::Approx(1.0));

    o = {0.0, 0.3, 0.3, 0.3};
    std::tie(a, b) = lambdas(o);
    CHECK(std::abs(a) < 1e-15);
    CHECK(std::abs(b) < 1e-15);
    CHECK(distance(o) == 0.0);

    o = {0.0, 0.5, 0.5, 0.0};
    CHECK(distance(o) == doctest::Approx(0.5));

    o = {0.0, 0.7, 0.7, Complex(0.2, 0.1)};
    std::tie(a, b) = lambdas(o);
    CHECK(a == doctest::Approx(-b));

    o = {0.0, 0.5, 0.5, 0.6};
    CHECK_THROWS_AS(distance(o), InvariantViolation);
}

TEST_CASE("t = 0 with disjoint packets inside A") {
    // fidelity pushed up so truncation does not mask the tiny overlap
    const auto s = make_setup({2.0, 1.0, 1e6, 2e6}, 0.4, -0.4, 0.05, 300.0, 1.0 - 1e-12);
    const auto o = pair_observables(s.s1, s.s2, s.kernel, 0.0);
    CHECK(std::abs(o.p11 - 1.0) <= 1.0 - s.s1.fidelity + 1e-9);
    CHECK(std::abs(o.p22 - 1.0) <= 1.0 - s.s2.fidelity + 1e-9);
    CHECK(std::abs(o.p12) <= 1e-8);
}

TEST_CASE("identical states give p11 = p22 = p12 and D = 0") {
    const auto& s = fig3_broad();
    const PairEvolution ev(s.s1, s.s1, s.kernel);
    for (double t : {0.0, 0.013, 0.5, 7.0, 1234.5}) {
        const auto o = ev.at(t);
        CHECK(std::abs(o.p11 - o.p22) < 1e-12);
        CHECK(std::abs(o.p12 - o.p11) < 1e-12);
        CHECK(distance(o) < 1e-12);
    }
    const auto tr = trace_over_grid(ev, TimeGrid{0.0, 2.0, 101});
    for (const auto& x : tr.samples) CHECK(std::abs(x.sigma) < 1e-12);
}

TEST_CASE("free ring agrees with the infinite-line closed form before wrap-around") {
    const RingGeometry g{6.0, 54.0, 0.0, 0.0};
    const double x1 = 1.0, x2 = -1.0, sigma = 0.2;
    const auto s = make_setup(g, x1, x2, sigma, 60.0, 1.0 - 1e-12);
    const FreePairConfig c{x1, x2, sigma, g.L_A};
    const PairEvolution ev(s.s1, s.s2, s.kernel);
    const double t_wrap = (g.L() - 2.0 * x1) * sigma / 4.0;
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double t = t_wrap * i / 40.0;
        const auto a = ev.at(t);
        const auto b = observables_infinite(c, t);
        worst = std::max({worst, std::abs(a.p11 - b.p11), std::abs(a.p22 - b.p22), std::abs(a.p12 - b.p12)});
    }
    MESSAGE("worst deviation " << worst);
    CHECK(worst < 1e-3);
}

TEST_CASE("lambda path and p path give the same D; swapping states conjugates p12") {
    const auto& s = fig3_broad();
    const PairEvolution ev(s.s1, s.s2, s.kernel), rev(s.s2, s.s1, s.kernel);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1e4);
    for (int i = 0; i < 50; ++i) {
        const double t = u(rng);
        const auto a = ev.at(t), b = rev.at(t);
        CHECK(std::abs(distance(a) - d_from_lambdas(a)) < 1e-12);
        CHECK(std::abs(a.p12 - std::conj(b.p12)) < 1e-12);
        CHECK(std::abs(distance(a) - distance(b)) < 1e-12);
        CHECK(a.p11 >= 0.0);
        CHECK(a.p11 <= 1.0 + 1e-9);
        CHECK(std::norm(a.p12) <= a.p11 * a.p22 + 1e-9);
    }
}

TEST_CASE("norm is conserved and A plus B probabilities add up to the fidelity") {
    const auto& s = fig3_broad();
    OverlapKernel identity = s.kernel;
    identity.delta.setIdentity();
    OverlapKernel bath = s.kernel;
    const double cB = 0.5 * s.g.L_A + 0.5 * s.g.L_B;
    for (Eigen::Index i = 0; i < bath.delta.rows(); ++i)
        for (Eigen::Index j = 0; j < bath.delta.cols(); ++j) {
            const auto& a = bath.modes[static_cast<std::size_t>(i)];
            const auto& b = bath.modes[static_cast<std::size_t>(j)];
            bath.delta(i, j) = region_overlap(a.B, a.k, b.B, b.k, cB, 0.5 * s.g.L_B);
        }
    const PairEvolution ev(s.s1, s.s2, s.kernel), evI(s.s1, s.s2, identity), evB(s.s1, s.s2, bath);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1e5);
    for (int i = 0; i < 10; ++i) {
        const double t = u(rng);
        const auto n = evI.at(t);
        CHECK(std::abs(n.p11 - s.s1.fidelity) < 1e-12);
        CHECK(std::abs(n.p22 - s.s2.fidelity) < 1e-12);
        const auto a = ev.at(t), b = evB.at(t);
        CHECK(std::abs(a.p11 + b.p11 - s.s1.fidelity) < 1e-9);
        CHECK(std::abs(a.p22 + b.p22 - s.s2.fidelity) < 1e-9);
    }
}

TEST_CASE("blocked evaluation matches single-time evaluation and is thread independent") {
    const auto& s = fig3_broad();
    const PairEvolution ev(s.s1, s.s2, s.kernel);
    std::vector<double> ts;
    for (int i = 0; i < 77; ++i) ts.push_back(0.37 * i);
    const auto a = ev.evaluate(ts, 1);
    const auto b = ev.evaluate(ts, 3);
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const auto c = ev.at(ts[i]);
        CHECK(std::abs(a[i].p11 - c.p11) < 1e-13);
        CHECK(std::abs(a[i].p12 - c.p12) < 1e-13);
        CHECK(a[i].p11 == b[i].p11);
        CHECK(a[i].p12 == b[i].p12);
    }
}

TEST_CASE("states outside the kernel are rejected") {
    const auto& s = fig3_broad();
    ExpandedState bad = s.s1;
    bad.ids.back() = s.modes.size() + 5;
    CHECK_THROWS_AS(PairEvolution(bad, s.s2, s.kernel), ModeMismatch);
}

TEST_CASE("trace invariants and CSV layout") {
    const auto& s = fig3_broad();
    const auto tr = trace_over_grid(s.s1, s.s2, s.kernel, TimeGrid{0.0, 3.0, 301});
    REQUIRE(tr.samples.size() == 301);
    for (const auto& x : tr.samples) {
        const auto& o = x.obs;
        CHECK(x.D >= 0.0);
        CHECK(x.D <= 1.0 + 1e-9);
        const double d2 = 0.5 * (o.p11 * o.p11 + o.p22 * o.p22 - 2.0 * std::norm(o.p12));
        CHECK(std::abs(x.D * x.D - d2) < 1e-10);
    }
    std::ostringstream os;
    write_trace_csv(os, tr);
    const std::string out = os.str();
    CHECK(out.rfind("t,p11,p22,p12_re,p12_im,D,sigma\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 302);
}

TEST_CASE("rate estimate converges at second order") {
    // smooth trace from the closed form; reference from a much finer grid
    const FreePairConfig c{45.0, -45.0, 2.0, 60.0};
    auto sigma_at = [&](int n, double t) {
        const auto tr = trace_infinite(c, TimeGrid{0.0, 100.0, n});
        const double dt = 100.0 / (n - 1);
        return tr.samples[static_cast<std::size_t>(std::lround(t / dt))].sigma;
    };
    for (double t : {20.0, 50.0, 80.0}) {
        const double ref = sigma_at(16001, t);
        const double e1 = std::abs(sigma_at(101, t) - ref);
        const double e2 = std::abs(sigma_at(201, t) - ref);
        CHECK(e1 / e2 > 3.0);
        CHECK(e1 / e2 < 5.0);
    }
}

TEST_CASE("non-Markovianity integral") {
    DistanceTrace down;
    down.grid = {0.0, 1.0, 11};
    for (int i = 0; i <= 10; ++i) {
        TraceSample s;
        s.obs.t = 0.1 * i;
        s.D = 1.0 - 0.05 * i;
        down.samples.push_back(s);
    }
    fill_rates(down);
    CHECK(nm_integral(down) == 0.0);

    // dip to m = 0.3, then return to 1
    DistanceTrace rev;
    const int n = 401;
    rev.grid = {0.0, 2.0, n};
    for (int i = 0; i < n; ++i) {
        TraceSample s;
        s.obs.t = 2.0 * i / (n - 1);
        s.D = 0.65 + 0.35 * std::cos(M_PI * s.obs.t);
        rev.samples.push_back(s);
    }
    fill_rates(rev);
    CHECK(nm_integral(rev) >= (1.0 - 0.3) - 1e-3);

    // barrier trace: stable under grid doubling
    const auto& s = fig3_broad();
    const auto a = trace_over_grid(s.s1, s.s2, s.kernel, TimeGrid{0.0, 2.0, 4001});
    const auto b = trace_over_grid(s.s1, s.s2, s.kernel, TimeGrid{0.0, 2.0, 8001});
    const double ia = nm_integral(a), ib = nm_integral(b);
    CHECK(ia > 0.0);
    CHECK(std::abs(ia - ib) < 0.05 * ib);
}
