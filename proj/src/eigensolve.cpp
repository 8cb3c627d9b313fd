#include "traplab/eigensolve.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

namespace traplab {

GridOperator::GridOperator(const Grid& g, std::vector<double> q)
    : grid(g), potential(std::move(q)), excluded(potential.size(), 0) {
    if (static_cast<std::int64_t>(potential.size()) != g.cells())
        throw domain_error("grid operator: potential size mismatch");
    for (std::size_t i = 0; i < potential.size(); ++i)
        if (!std::isfinite(potential[i])) excluded[i] = 1;
}

bool GridOperator::any_excluded() const {
    for (auto e : excluded)
        if (e) return true;
    return false;
}

void GridOperator::apply(const double* x, double* y) const {
    const int n = grid.n;
    const int dim = grid.dim;
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<std::int64_t> stride(dim);
    stride[0] = 1;
    for (int k = 1; k < dim; ++k) stride[k] = stride[k - 1] * n;

    std::vector<int> mi(dim, 0);
    const std::int64_t total = grid.cells();
    for (std::int64_t idx = 0; idx < total; ++idx) {
        if (excluded[idx]) {
            y[idx] = 0.0;
        } else {
            const double xc = x[idx];
            double acc = 2.0 * dim * xc;
            for (int k = 0; k < dim; ++k) {
                const int mk = mi[k];
                std::int64_t up = -1, dn = -1;
                if (mk + 1 < n) up = idx + stride[k];
                else if (grid.bc == Bc::periodic) up = idx - (n - 1) * stride[k];
                if (mk > 0) dn = idx - stride[k];
                else if (grid.bc == Bc::periodic) dn = idx + (n - 1) * stride[k];
                if (up >= 0 && !excluded[up]) acc -= x[up];
                if (dn >= 0 && !excluded[dn]) acc -= x[dn];
            }
            y[idx] = acc * inv_h2 + potential[idx] * xc;
        }
        for (int k = 0; k < dim; ++k) {
            if (++mi[k] < n) break;
            mi[k] = 0;
        }
    }
}

std::vector<double> GridOperator::apply(const std::vector<double>& x) const {
    std::vector<double> y(x.size());
    apply(x.data(), y.data());
    return y;
}

std::vector<double> GridOperator::diagonal() const {
    const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<double> d(potential.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = excluded[i] ? 1.0 : 2.0 * grid.dim * inv_h2 + potential[i];
    return d;
}

double GridOperator::rayleigh(const std::vector<double>& x) const {
    std::vector<double> y = apply(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += x[i] * y[i];
        den += x[i] * x[i];
    }
    return num / den;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void scale(std::vector<double>& x, double a) {
    for (double& v : x) v *= a;
}

}  // namespace

EigenResult smallest_eigenpair(const GridOperator& op, std::vector<double> start, double tol,
                               int max_iter) {
    const std::size_t m = start.size();
    if (static_cast<std::int64_t>(m) != op.cells())
        throw domain_error("smallest_eigenpair: start vector size mismatch");
    for (std::size_t i = 0; i < m; ++i)
        if (op.excluded[i]) start[i] = 0.0;
    double nrm = std::sqrt(dot(start, start));
    if (!(nrm > 0.0)) throw solver_error("smallest_eigenpair: start vector vanishes on the domain");
    scale(start, 1.0 / nrm);

    std::vector<double> diag = op.diagonal();
    std::vector<double> x = std::move(start);
    std::vector<double> ax = op.apply(x);
    double lambda = dot(x, ax);
    std::vector<double> p, ap;  // previous direction
    std::vector<double> r(m), w(m), aw(m);

    EigenResult out;
    for (int it = 0; it < max_iter; ++it) {
        // residual r = A x - lambda x
        double rn2 = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            r[i] = ax[i] - lambda * x[i];
            rn2 += r[i] * r[i];
        }
        out.residual = std::sqrt(rn2);
        out.iterations = it;
        if (out.residual <= tol * std::max(1.0, std::abs(lambda))) break;

        // Jacobi-preconditioned residual
        for (std::size_t i = 0; i < m; ++i) {
            double d = diag[i] - lambda;
            if (std::abs(d) < 1e-8) d = (d >= 0 ? 1e-8 : -1e-8);
            w[i] = op.excluded[i] ? 0.0 : r[i] / d;
        }

        // Rayleigh-Ritz on span{x, w, p}
        std::vector<const std::vector<double>*> basis = {&x, &w};
        if (!p.empty()) basis.push_back(&p);
        // orthonormalize (modified Gram-Schmidt against previous columns)
        std::vector<std::vector<double>> q;
        for (const auto* b : basis) {
            std::vector<double> v = *b;
            for (const auto& qi : q) axpy(-dot(qi, v), qi, v);
            for (const auto& qi : q) axpy(-dot(qi, v), qi, v);
            double vn = std::sqrt(dot(v, v));
            if (vn > 1e-12) {
                scale(v, 1.0 / vn);
                q.push_back(std::move(v));
            }
        }
        const int kq = static_cast<int>(q.size());
        std::vector<std::vector<double>> aq(kq);
        for (int i = 0; i < kq; ++i) aq[i] = op.apply(q[i]);
        Eigen::MatrixXd H(kq, kq);
        for (int i = 0; i < kq; ++i)
            for (int j = 0; j <= i; ++j) {
                double hij = dot(q[i], aq[j]);
                H(i, j) = hij;
                H(j, i) = hij;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        Eigen::VectorXd c = es.eigenvectors().col(0);
        double new_lambda = es.eigenvalues()(0);

        std::vector<double> xn(m, 0.0), axn(m, 0.0);
        for (int i = 0; i < kq; ++i) {
            axpy(c(i), q[i], xn);
            axpy(c(i), aq[i], axn);
        }
        // implicit p = contribution orthogonal to previous x
        std::vector<double> pn(m, 0.0);
        for (int i = 1; i < kq; ++i) axpy(c(i), q[i], pn);
        double nn = std::sqrt(dot(xn, xn));
        scale(xn, 1.0 / nn);
        scale(axn, 1.0 / nn);
        x = std::move(xn);
        ax = std::move(axn);
        p = std::move(pn);
        lambda = new_lambda;
    }
    if (out.residual > tol * std::max(1.0, std::abs(lambda)) * 10.0 && max_iter > 100)
        throw solver_error("smallest_eigenpair: no convergence after max iterations (residual " +
                           std::to_string(out.residual) + ")");
    out.lambda = lambda;
    out.vec = std::move(x);
    return out;
}

double expm_log_sum(const GridOperator& op, const std::vector<double>& w0, double beta,
                    double tol) {
    const std::size_t m = w0.size();
    if (static_cast<std::int64_t>(m) != op.cells())
        throw domain_error("expm_log_sum: vector size mismatch");
    if (beta == 0.0) {
        double s = 0.0;
        for (double v : w0) s += v;
        return std::log(s);
    }
    std::vector<double> w = w0;
    for (std::size_t i = 0; i < m; ++i)
        if (op.excluded[i]) w[i] = 0.0;

    double log_acc = 0.0;
    double remaining = beta;
    // Substep heuristic: scale by the spread of the diagonal so the Lanczos
    // basis stays short; refine adaptively on the a posteriori estimate.
    std::vector<double> diag = op.diagonal();
    double dmax = diag[0], dmin = diag[0];
    for (double d : diag) {
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
    }
    double tau = std::min(remaining, 8.0 / std::max(1.0, dmax - dmin));
    const int mmax = 90;

    while (remaining > 1e-15 * beta) {
        double step = std::min(tau, remaining);
        double wn = std::sqrt(dot(w, w));
        if (!(wn > 0.0)) throw solver_error("expm_log_sum: evolved vector vanished");
        log_acc += std::log(wn);
        scale(w, 1.0 / wn);

        // Lanczos with full reorthogonalization
        std::vector<std::vector<double>> V;
        std::vector<double> alpha, betas;
        V.push_back(w);
        std::vector<double> prev;
        bool happy = false;
        for (int j = 0; j < mmax; ++j) {
            std::vector<double> u = op.apply(V[j]);
            double a = dot(V[j], u);
            alpha.push_back(a);
            axpy(-a, V[j], u);
            if (j > 0) axpy(-betas[j - 1], V[j - 1], u);
            for (const auto& vi : V) axpy(-dot(vi, u), vi, u);
            double b = std::sqrt(dot(u, u));
            if (b < 1e-13) {
                happy = true;
                break;
            }
            betas.push_back(b);
            scale(u, 1.0 / b);
            V.push_back(std::move(u));
            if (j >= 8 && (j % 4 == 0 || j == mmax - 1)) {
                // err estimate: weight of the last basis vector after exp
                int k = static_cast<int>(alpha.size());
                Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
                for (int i = 0; i < k; ++i) {
                    T(i, i) = alpha[i];
                    if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = betas[i];
                }
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
                Eigen::VectorXd e1 = Eigen::VectorXd::Zero(k);
                e1(0) = 1.0;
                Eigen::VectorXd y = es.eigenvectors() *
                                    ((-step * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                                     (es.eigenvectors().transpose() * e1));
                double tail = std::abs(y(k - 1)) * betas[k - 2];
                double mag = y.norm();
                if (tail <= tol * std::max(1e-300, mag)) {
                    happy = true;
                    break;
                }
            }
        }
        int k = static_cast<int>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = betas[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(k);
        e1(0) = 1.0;
        Eigen::VectorXd y = es.eigenvectors() *
                            ((-step * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                             (es.eigenvectors().transpose() * e1));
        if (!happy && k == mmax) {
            // basis cap reached: halve the substep and retry this chunk
            tau *= 0.5;
            log_acc -= 0.0;
            // w is still the normalized start of this chunk; loop again
            continue;
        }
        std::vector<double> wn2(m, 0.0);
        for (int j = 0; j < k; ++j) axpy(y(j), V[j], wn2);
        w = std::move(wn2);
        remaining -= step;
    }
    double s = 0.0;
    for (double v : w) s += v;
    if (!(s > 0.0)) throw solver_error("expm_log_sum: nonpositive total mass");
    return log_acc + std::log(s);
}

}  // namespace traplab
