#include "orbits/action.hpp"

#include "orbits/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace orbits {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::MatrixXd dense_jacobi(const JacobiMatrix& j) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(j.m, j.m);
    for (int i = 0; i < j.m; ++i)
        m(i, i) = j.diag[i];
    for (int i = 0; i < j.m; ++i) {
        int k = (i + 1) % j.m;
        m(i, k) += j.off[i];
        m(k, i) += j.off[i];
    }
    return m;
}

} // namespace

Configuration Configuration::constant(int m, double x0) {
    Configuration c;
    c.m = m;
    double base = std::fmod(x0, kTwoPi);
    if (base < 0)
        base += kTwoPi;
    c.nodes.assign((size_t)m, base);
    return c;
}

double Configuration::node_wrapped(int i) const {
    int k = ((i % m) + m) % m;
    return nodes[(size_t)k];
}

double TotalAction::residual_inf() const {
    double r = 0;
    for (double v : residual)
        r = std::max(r, std::abs(v));
    return r;
}

TotalAction total_action(const ReducedSystem& rs, const Configuration& cfg,
                         const SubArcOptions& opt, std::vector<double>* warm_y) {
    if (cfg.m < 1 || cfg.nodes.size() != (size_t)cfg.m)
        raise(Err::Config, "configuration node count does not match m");
    const int m = cfg.m;
    const bool have_warm = warm_y && warm_y->size() == (size_t)m;

    TotalAction ta;
    ta.arcs.reserve((size_t)m);
    for (int i = 0; i < m; ++i) {
        double t0 = kTwoPi * i / m;
        double t1 = kTwoPi * (i + 1) / m;
        double guess = have_warm ? (*warm_y)[(size_t)i]
                                 : std::numeric_limits<double>::quiet_NaN();
        SubArcResult arc = solve_subarc(rs, t0, t1, cfg.nodes[(size_t)i],
                                        cfg.node_wrapped(i + 1), opt, guess);
        ta.value += arc.value;
        ta.df_de += arc.df_de;
        ta.arcs.push_back(std::move(arc));
    }
    ta.residual.resize((size_t)m);
    for (int i = 0; i < m; ++i) {
        const SubArcResult& prev = ta.arcs[(size_t)((i - 1 + m) % m)];
        const SubArcResult& cur = ta.arcs[(size_t)i];
        ta.residual[(size_t)i] = prev.d_xp + cur.d_x; // y_end(i-1) - y_start(i)
    }
    if (warm_y) {
        warm_y->resize((size_t)m);
        for (int i = 0; i < m; ++i)
            (*warm_y)[(size_t)i] = ta.arcs[(size_t)i].y_start;
    }
    return ta;
}

double el_residual(const TotalAction& ta, int i) {
    int m = (int)ta.residual.size();
    return ta.residual[(size_t)(((i % m) + m) % m)];
}

JacobiMatrix assemble_jacobi(const std::vector<SubArcResult>& arcs) {
    const int m = (int)arcs.size();
    if (m < 1)
        raise(Err::Config, "cannot assemble a Jacobi matrix from zero arcs");
    JacobiMatrix j;
    j.m = m;
    j.diag.resize((size_t)m);
    j.off.resize((size_t)m);
    for (int i = 0; i < m; ++i) {
        const SubArcResult& prev = arcs[(size_t)((i - 1 + m) % m)];
        j.diag[(size_t)i] = arcs[(size_t)i].d_xx + prev.d_xpxp;
        j.off[(size_t)i] = arcs[(size_t)i].d_xxp;
    }
    return j;
}

JacobiSpectrum jacobi_spectrum(const JacobiMatrix& j) {
    Eigen::MatrixXd m = dense_jacobi(j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        raise(Err::Internal, "Jacobi eigensolve failed");

    JacobiSpectrum s;
    s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + j.m);
    s.lambda0 = s.eigenvalues.front();
    s.lambda1 = j.m > 1 ? s.eigenvalues[1] : s.eigenvalues[0];

    Eigen::VectorXd g = es.eigenvectors().col(0);
    double peak = g.cwiseAbs().maxCoeff();
    if (std::abs(g(0)) > 1e-10 * peak) {
        g /= g(0);
    } else {
        Eigen::Index imax = 0;
        g.cwiseAbs().maxCoeff(&imax);
        if (g(imax) < 0)
            g = -g;
    }
    s.ground.assign(g.data(), g.data() + j.m);
    s.ground_positive = true;
    for (double v : s.ground)
        if (!(v > 0))
            s.ground_positive = false;
    return s;
}

bool jacobi_submatrix_pd(const JacobiMatrix& j) {
    if (j.m <= 1)
        return true;
    Eigen::MatrixXd m = dense_jacobi(j);
    Eigen::MatrixXd sub = m.block(1, 1, j.m - 1, j.m - 1);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    return llt.info() == Eigen::Success;
}

std::vector<double> jacobi_submatrix_solve(const JacobiMatrix& j,
                                           const std::vector<double>& rhs) {
    if (j.m <= 1)
        return {};
    if (rhs.size() != (size_t)(j.m - 1))
        raise(Err::Config, "interior solve needs m-1 right-hand side entries");
    Eigen::MatrixXd m = dense_jacobi(j);
    Eigen::MatrixXd sub = m.block(1, 1, j.m - 1, j.m - 1);
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), j.m - 1);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
    if (ldlt.info() != Eigen::Success)
        raise(Err::Internal, "interior Jacobi solve failed");
    Eigen::VectorXd x = ldlt.solve(b);
    return std::vector<double>(x.data(), x.data() + j.m - 1);
}

double jacobi_schur_complement(const JacobiMatrix& j) {
    Eigen::MatrixXd m = dense_jacobi(j);
    if (j.m == 1)
        return m(0, 0);
    Eigen::VectorXd r0 = m.block(1, 0, j.m - 1, 1);
    Eigen::MatrixXd sub = m.block(1, 1, j.m - 1, j.m - 1);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sub);
    if (ldlt.info() != Eigen::Success)
        raise(Err::Internal, "Schur complement solve failed");
    return m(0, 0) - r0.dot(ldlt.solve(r0));
}

} // namespace orbits
