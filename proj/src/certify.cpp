#include "swspde/certify.hpp"

#include "swspde/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace swspde::certify {

namespace {

constexpr double kStrictTol = 1e-10;
constexpr double kBisectionTol = 1e-10;

struct Root {
    double value;
    bool capped;
};

// Largest x in (0, hi) with g(x) <= 0 for increasing g with g(0) < 0.
Root largest_feasible(const std::function<double(double)>& g, double hi) {
    if (g(hi) <= 0.0) {
        return {hi - kBisectionTol, true};
    }
    double lo = 0.0;
    while (hi - lo > kBisectionTol) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0.0 ? lo : hi) = mid;
    }
    return {lo, false};
}

void check_size(const Eigen::VectorXd& v, int n, const char* name) {
    if (v.size() != n) {
        throw ValidationError(std::string("coefficients.") + name, "expected " + std::to_string(n) + " entries");
    }
}

} // namespace

void ModelCoefficients::validate() const {
    const int n = n_states();
    if (n < 1) throw ValidationError("coefficients.lambda1", "at least one regime is required");
    check_size(alpha, n, "alpha");
    check_size(beta, n, "beta");
    for (int k = 0; k < n; ++k) {
        if (!(lambda1(k) > 0.0)) throw ValidationError("coefficients.lambda1", "must be positive");
        if (!(beta(k) > 0.0)) throw ValidationError("coefficients.beta", "must be positive");
        if (!std::isfinite(alpha(k))) throw ValidationError("coefficients.alpha", "must be finite");
    }
    if (!(L > 0.0)) throw ValidationError("coefficients.L", "must be positive");
    if (!(r > 0.0)) throw ValidationError("coefficients.r", "must be positive");
}

std::string to_string(Reason reason) {
    switch (reason) {
    case Reason::none: return "none";
    case Reason::pattern: return "pattern";
    case Reason::singular: return "singular";
    case Reason::not_m_matrix: return "not-m-matrix";
    case Reason::delay_condition: return "delay-condition";
    case Reason::no_rate: return "no-rate";
    case Reason::monotonicity: return "monotonicity";
    case Reason::comparison: return "comparison";
    case Reason::size_mismatch: return "size-mismatch";
    }
    return "unknown";
}

MMatrixDiagnostics is_nonsingular_m_matrix(const Eigen::MatrixXd& a, double tol) {
    if (a.rows() != a.cols() || a.rows() == 0) {
        throw ValidationError("A", "M-matrix test needs a non-empty square matrix");
    }
    MMatrixDiagnostics d;
    const Eigen::Index n = a.rows();

    d.z_pattern = true;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && a(i, j) > tol) d.z_pattern = false;
    if (!d.z_pattern) {
        d.reason = Reason::pattern;
        return d;
    }

    // Every real eigenvalue must be positive.
    Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
    d.eigenvalues = es.eigenvalues();
    d.eigenvalues_positive = true;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto ev = d.eigenvalues(i);
        const bool real = std::abs(ev.imag()) <= tol * std::max(1.0, std::abs(ev));
        if (real && !(ev.real() > tol)) d.eigenvalues_positive = false;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) {
        d.singular = true;
        d.reason = Reason::singular;
        d.agree = !d.eigenvalues_positive;
        return d;
    }
    // Semipositivity via A x = 1.
    d.x = lu.solve(Eigen::VectorXd::Ones(n));
    d.semipositive = (d.x.array() > tol).all();
    // Inverse-positivity.
    d.inverse = lu.inverse();
    d.inverse_positive = (d.inverse.array() >= -tol).all();

    d.agree = (d.eigenvalues_positive == d.semipositive) && (d.semipositive == d.inverse_positive);
    d.pass = d.eigenvalues_positive && d.semipositive && d.inverse_positive;
    if (!d.pass) d.reason = Reason::not_m_matrix;
    return d;
}

Eigen::MatrixXd build_A_finite(const chain::GeneratorMatrix& q, const ModelCoefficients& coeffs) {
    const int n = q.n_states();
    if (coeffs.n_states() != n || coeffs.alpha.size() != n) {
        throw ValidationError("coefficients", "coefficient vectors do not match the generator size");
    }
    Eigen::VectorXd shift = coeffs.alpha - 2.0 * coeffs.lambda1 + Eigen::VectorXd::Constant(n, coeffs.L);
    Eigen::MatrixXd m = q.matrix();
    m.diagonal() += shift;
    return -m;
}

DelayCondition check_delay_condition(const Eigen::VectorXd& xi, const ModelCoefficients& coeffs) {
    if (xi.size() != coeffs.beta.size()) {
        throw ValidationError("xi", "weight vector does not match the coefficient size");
    }
    DelayCondition out;
    out.K = ((coeffs.beta.array() + coeffs.L) * xi.array()).maxCoeff();
    out.pass = out.K < 1.0 - kStrictTol;
    return out;
}

double k1(double lambda, double epsilon, double xi_max, double K, const DelayMeasure& rho) {
    return (lambda + 2.0 * epsilon) * xi_max - 1.0 + (K + epsilon * xi_max) * rho.moment(lambda);
}

double k2(double lambda, double xi_max, double K, const DelayMeasure& rho) {
    return lambda * xi_max - 1.0 + K * rho.moment(lambda);
}

DecayRates solve_decay_rates(double xi_max, double K, const DelayMeasure& rho, double r) {
    if (!(K < 1.0 - kStrictTol)) {
        throw ValidationError("K", "no positive decay rate exists for K >= 1");
    }
    if (!(xi_max > 0.0)) throw ValidationError("xi", "xi_max must be positive");
    DecayRates out;
    out.epsilon = (1.0 - K) / (6.0 * xi_max);
    const auto lam = largest_feasible([&](double x) { return k1(x, out.epsilon, xi_max, K, rho); }, 2.0 * r);
    const auto lam_hat = largest_feasible([&](double x) { return k2(x, xi_max, K, rho); }, 2.0 * r);
    out.lambda = lam.value;
    out.lambda_capped = lam.capped;
    out.lambda_hat = lam_hat.value;
    out.lambda_hat_capped = lam_hat.capped;
    return out;
}

namespace {

void finish_with_rates(Certificate& cert, double xi_max, const ModelCoefficients& coeffs,
                       std::optional<double> theta) {
    cert.rates = solve_decay_rates(xi_max, cert.K, coeffs.rho, coeffs.r);
    cert.rates_positive = cert.rates.lambda > 0.0 && cert.rates.lambda_hat > 0.0;
    if (!cert.rates_positive) {
        cert.reason = Reason::no_rate;
        return;
    }
    cert.theta = theta;
    if (theta) cert.kappa = std::min(cert.rates.lambda_hat / 4.0, *theta / 4.0);
    cert.pass = true;
}

} // namespace

Certificate certify_finite(const chain::GeneratorMatrix& q, const ModelCoefficients& coeffs,
                           std::optional<double> theta) {
    coeffs.validate();
    Certificate cert;
    if (coeffs.n_states() != q.n_states()) {
        cert.reason = Reason::size_mismatch;
        return cert;
    }
    cert.A = build_A_finite(q, coeffs);
    cert.m_matrix = is_nonsingular_m_matrix(cert.A);
    if (cert.m_matrix.x.size() > 0) cert.xi = cert.m_matrix.x;
    if (!cert.m_matrix.pass) {
        cert.reason = cert.m_matrix.reason;
        return cert;
    }
    cert.xi_positive = (cert.xi.array() > kStrictTol).all();
    if (!cert.xi_positive) {
        cert.reason = Reason::not_m_matrix;
        return cert;
    }
    const auto delay = check_delay_condition(cert.xi, coeffs);
    cert.K = delay.K;
    cert.delay_condition = delay.pass;
    if (!delay.pass) {
        cert.reason = Reason::delay_condition;
        return cert;
    }
    finish_with_rates(cert, cert.xi.maxCoeff(), coeffs, theta);
    return cert;
}

std::vector<std::vector<int>> build_partition(const Eigen::VectorXd& alpha, std::vector<double> boundaries) {
    if (!boundaries.empty() && std::isinf(boundaries.front()) && boundaries.front() < 0.0) {
        boundaries.erase(boundaries.begin());
    }
    if (boundaries.empty()) throw ValidationError("partition", "at least one boundary (alpha_sup) is required");
    for (std::size_t d = 0; d < boundaries.size(); ++d) {
        if (!std::isfinite(boundaries[d])) throw ValidationError("partition", "boundaries must be finite");
        if (d > 0 && !(boundaries[d] > boundaries[d - 1])) {
            throw ValidationError("partition", "boundaries must be strictly increasing");
        }
    }
    std::vector<std::vector<int>> blocks(boundaries.size());
    for (Eigen::Index k = 0; k < alpha.size(); ++k) {
        auto it = std::lower_bound(boundaries.begin(), boundaries.end(), alpha(k));
        if (it == boundaries.end()) {
            throw ValidationError("partition", "alpha(" + std::to_string(k) + ") exceeds the last boundary alpha_sup");
        }
        blocks[static_cast<std::size_t>(it - boundaries.begin())].push_back(static_cast<int>(k));
    }
    for (std::size_t d = 0; d < blocks.size(); ++d) {
        if (blocks[d].empty()) {
            throw ValidationError("partition", "block " + std::to_string(d + 1) + " is empty; remove boundary " +
                                                   std::to_string(boundaries[d]) + " from the partition");
        }
    }
    return blocks;
}

chain::GeneratorMatrix build_QF(const chain::GeneratorMatrix& q, const std::vector<std::vector<int>>& blocks) {
    const auto m = static_cast<Eigen::Index>(blocks.size());
    Eigen::MatrixXd qf = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        for (Eigen::Index l = 0; l < m; ++l) {
            if (k == l) continue;
            double inf = std::numeric_limits<double>::infinity();
            double sup = -std::numeric_limits<double>::infinity();
            for (int j1 : blocks[static_cast<std::size_t>(k)]) {
                double mass = 0.0;
                for (int j2 : blocks[static_cast<std::size_t>(l)]) mass += q.rate(j1, j2);
                inf = std::min(inf, mass);
                sup = std::max(sup, mass);
            }
            qf(k, l) = (l > k) ? inf : sup;
        }
        qf(k, k) = -(qf.row(k).sum());
    }
    return chain::GeneratorMatrix(qf);
}

Eigen::MatrixXd upper_ones(int m) {
    return Eigen::MatrixXd::Ones(m, m).triangularView<Eigen::Upper>();
}

PartitionedCertificate certify_partitioned(const chain::GeneratorMatrix& q, const ModelCoefficients& coeffs,
                                           std::vector<double> boundaries, const AttestedBounds& bounds,
                                           std::optional<double> theta) {
    coeffs.validate();
    if (coeffs.n_states() != q.n_states()) {
        throw ValidationError("coefficients", "coefficient vectors do not match the generator size");
    }
    if (bounds.m_bound && q.max_exit_rate() > *bounds.m_bound) {
        throw ValidationError("bounds.M", "truncated generator exceeds the attested exit-rate bound");
    }
    if (bounds.beta_sup && coeffs.beta.maxCoeff() > *bounds.beta_sup) {
        throw ValidationError("bounds.beta_sup", "beta exceeds the attested bound");
    }
    if (bounds.alpha_sup) {
        if (coeffs.alpha.maxCoeff() > *bounds.alpha_sup) {
            throw ValidationError("bounds.alpha_sup", "alpha exceeds the attested bound");
        }
        if (boundaries.empty() || std::abs(boundaries.back() - *bounds.alpha_sup) > 1e-12) {
            throw ValidationError("partition", "last boundary must equal alpha_sup");
        }
    }

    PartitionedCertificate out;
    Partition& p = out.partition;
    Certificate& cert = out.certificate;

    p.blocks = build_partition(coeffs.alpha, boundaries);
    if (!boundaries.empty() && std::isinf(boundaries.front())) boundaries.erase(boundaries.begin());
    p.boundaries = boundaries;
    const int m = static_cast<int>(p.blocks.size());
    p.block_of.assign(static_cast<std::size_t>(q.n_states()), -1);
    p.alphaF.resize(m);
    p.betaF.resize(m);
    p.lambda1F.resize(m);
    for (int d = 0; d < m; ++d) {
        double a = -std::numeric_limits<double>::infinity();
        double b = -std::numeric_limits<double>::infinity();
        double l1 = std::numeric_limits<double>::infinity();
        for (int k : p.blocks[static_cast<std::size_t>(d)]) {
            p.block_of[static_cast<std::size_t>(k)] = d;
            a = std::max(a, coeffs.alpha(k));
            b = std::max(b, coeffs.beta(k));
            l1 = std::min(l1, coeffs.lambda1(k));
        }
        p.alphaF(d) = a;
        p.betaF(d) = b;
        p.lambda1F(d) = l1;
    }
    const chain::GeneratorMatrix qf = build_QF(q, p.blocks);
    p.QF = qf.matrix();
    p.Hm = upper_ones(m);
    Eigen::MatrixXd inner = p.QF;
    inner.diagonal() += p.alphaF - 2.0 * p.lambda1F + Eigen::VectorXd::Constant(m, coeffs.L);
    p.AF = -inner * p.Hm;

    cert.A = p.AF;
    cert.m_matrix = is_nonsingular_m_matrix(p.AF);
    if (!cert.m_matrix.pass) {
        cert.reason = cert.m_matrix.reason;
        return out;
    }
    p.etaF = cert.m_matrix.x;
    p.xiF = p.Hm * p.etaF;
    p.xiF_decreasing = true;
    for (int d = 0; d + 1 < m; ++d)
        if (!(p.xiF(d + 1) < p.xiF(d))) p.xiF_decreasing = false;

    cert.xi.resize(q.n_states());
    for (int k = 0; k < q.n_states(); ++k) cert.xi(k) = p.xiF(p.block_of[static_cast<std::size_t>(k)]);
    cert.xi_positive = (p.etaF.array() > kStrictTol).all() && (p.xiF.array() > kStrictTol).all();
    if (!cert.xi_positive || !p.xiF_decreasing) {
        cert.reason = Reason::monotonicity;
        return out;
    }

    ModelCoefficients block_coeffs = coeffs;
    block_coeffs.lambda1 = p.lambda1F;
    block_coeffs.alpha = p.alphaF;
    block_coeffs.beta = p.betaF;
    const auto delay = check_delay_condition(p.xiF, block_coeffs);
    cert.K = delay.K;
    cert.delay_condition = delay.pass;
    if (!delay.pass) {
        cert.reason = Reason::delay_condition;
        return out;
    }

    const Eigen::VectorXd q_xi = q.matrix() * cert.xi;
    const Eigen::VectorXd qf_xif = p.QF * p.xiF;
    p.comparison_worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < q.n_states(); ++k) {
        p.comparison_worst =
            std::max(p.comparison_worst, q_xi(k) - qf_xif(p.block_of[static_cast<std::size_t>(k)]));
    }
    p.comparison_pass = p.comparison_worst <= kStrictTol;
    if (!p.comparison_pass) {
        cert.reason = Reason::comparison;
        return out;
    }
    finish_with_rates(cert, p.xiF.maxCoeff(), coeffs, theta);
    return out;
}

} // namespace swspde::certify
