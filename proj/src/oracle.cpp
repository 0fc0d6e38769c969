#include "fnm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fnm::oracle {

namespace {

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

// length of [c - h, c + h] (mod L) covered by the cell [x - dx/2, x + dx/2]
double ring_overlap(double x, double dx, double c, double h, double L) {
    double s = 0.0;
    for (int shift = -1; shift <= 1; ++shift) s += overlap(x - 0.5 * dx, x + 0.5 * dx, c - h + shift * L, c + h + shift * L);
    return s;
}

}  // namespace

GridModel build(const RingGeometry& g, int n, double barrier_width) {
    g.validate();
    const double L = g.L();
    if (n < static_cast<int>(std::ceil(200.0 * L - 1e-9))) throw std::invalid_argument("grid needs at least 200 points per unit length");
    GridModel m;
    m.geometry = g;
    m.n = n;
    m.dx = L / n;
    m.barrier_width = barrier_width;
    if (barrier_width < 4.0 * m.dx * (1.0 - 1e-12))
        throw std::invalid_argument("barrier width must cover at least four grid cells");

    m.x.resize(n);
    m.potential = Eigen::VectorXd::Zero(n);
    m.a_weight.resize(n);
    const double xb[2] = {0.5 * g.L_A, -0.5 * g.L_A};
    const double V[2] = {g.V1, g.V2};
    for (int j = 0; j < n; ++j) {
        const double x = -0.5 * g.L_A + j * m.dx;
        m.x(j) = x;
        for (int b = 0; b < 2; ++b)
            if (V[b] != 0.0)
                m.potential(j) += V[b] / barrier_width * ring_overlap(x, m.dx, xb[b], 0.5 * barrier_width, L) / m.dx;
        m.a_weight(j) = ring_overlap(x, m.dx, 0.0, 0.5 * g.L_A, L) / m.dx;
    }

    const double c = 1.0 / (m.dx * m.dx);
    m.h = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        m.h(j, j) = 2.0 * c + m.potential(j);
        m.h(j, (j + 1) % n) = -c;
        m.h(j, (j + n - 1) % n) = -c;
    }
    return m;
}

Eigen::VectorXcd sample_packet(const GridModel& m, const GaussianPacket& p) {
    Eigen::VectorXcd psi(m.n);
    for (int j = 0; j < m.n; ++j) psi(j) = p.value(m.x(j));
    psi /= std::sqrt(psi.squaredNorm() * m.dx);
    return psi;
}

GridPropagator::GridPropagator(const GridModel& m) : a_weight_(m.a_weight), dx_(m.dx) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.h);
    if (es.info() != Eigen::Success) throw std::runtime_error("grid diagonalization failed");
    evals_ = es.eigenvalues();
    evecs_ = es.eigenvectors();
}

Eigen::VectorXcd GridPropagator::evolve(const Eigen::VectorXcd& psi0, double t) const {
    Eigen::VectorXcd c = evecs_.transpose() * psi0;
    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -evals_(i) * t);
    return evecs_ * c;
}

PairObservables GridPropagator::pij(const Eigen::VectorXcd& psi1, const Eigen::VectorXcd& psi2, double t) const {
    const Eigen::VectorXcd a = evolve(psi1, t);
    const Eigen::VectorXcd b = evolve(psi2, t);
    PairObservables o;
    o.t = t;
    o.p11 = (a.cwiseAbs2().cwiseProduct(a_weight_)).sum() * dx_;
    o.p22 = (b.cwiseAbs2().cwiseProduct(a_weight_)).sum() * dx_;
    o.p12 = a.dot(a_weight_.cast<Complex>().cwiseProduct(b)) * dx_;
    return o;
}

PairObservables pij_grid(const GridModel& m, const GaussianPacket& p1, const GaussianPacket& p2, double t) {
    return GridPropagator(m).pij(sample_packet(m, p1), sample_packet(m, p2), t);
}

PairObservables richardson(const PairObservables& fine, const PairObservables& coarse, double w_fine, double w_coarse) {
    const double r = w_fine / (w_coarse - w_fine);
    PairObservables o;
    o.t = fine.t;
    o.p11 = fine.p11 + r * (fine.p11 - coarse.p11);
    o.p22 = fine.p22 + r * (fine.p22 - coarse.p22);
    o.p12 = fine.p12 + r * (fine.p12 - coarse.p12);
    return o;
}

}  // namespace fnm::oracle
