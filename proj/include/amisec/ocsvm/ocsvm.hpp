#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amisec/ocsvm/kernel.hpp"

namespace amisec {

// Trained one-class decision function: f(x) = sgn(sum_i alpha_i k(x_i, x) - rho).
struct OcsvmModel {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> alphas;  // dual coefficients, sum to 1
    double rho = 0.0;
    Kernel kernel;
    double nu = 0.1;
    size_t n_train = 0;
    bool converged = true;

    size_t dim() const { return support_vectors.empty() ? 0 : support_vectors[0].size(); }
};

struct Decision {
    int label = +1;  // sign(0) is +1: a tie at the boundary does not block traffic
    double score = 0.0;
};

inline Decision decide(const OcsvmModel& m, std::span<const double> x) {
    if (m.support_vectors.empty())
        throw std::invalid_argument("decide: empty model");
    if (x.size() != m.dim()) throw ShapeError("decide: dimension mismatch");
    double s = 0.0;
    for (size_t i = 0; i < m.support_vectors.size(); ++i)
        s += m.alphas[i] * kernel_eval(m.kernel, m.support_vectors[i], x);
    double score = s - m.rho;
    return {score < 0.0 ? -1 : +1, score};
}

struct TrainOptions {
    double tol = 1e-9;        // KKT violation threshold
    long max_passes = 500000;  // working-set selections
};

// Solves the one-class dual
//   min 1/2 a^T Q a   s.t.  0 <= a_i <= 1/(nu n),  sum a_i = 1
// by most-violating-pair coordinate updates over a cached Gram matrix.
// rho is recovered from strictly interior points (KKT), falling back to the
// midpoint of the bound groups when none are interior.
inline OcsvmModel train(const std::vector<std::vector<double>>& data, double nu, Kernel kernel,
                        const TrainOptions& opt = {}) {
    const size_t n = data.size();
    if (n < 2) throw std::invalid_argument("train: need at least 2 points");
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("train: nu in (0, 1]");
    const size_t dim = data[0].size();
    for (const auto& row : data)
        if (row.size() != dim) throw ShapeError("train: ragged data");

    const double cap = 1.0 / (nu * static_cast<double>(n));

    std::vector<double> q(n * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i; j < n; ++j) {
            double v = kernel_eval(kernel, data[i], data[j]);
            q[i * n + j] = v;
            q[j * n + i] = v;
        }
    }

    // Uniform start is always feasible (1/n <= cap) and respects symmetry.
    std::vector<double> alpha(n, 1.0 / static_cast<double>(n));
    std::vector<double> grad(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        double g = 0.0;
        for (size_t j = 0; j < n; ++j) g += q[i * n + j] * alpha[j];
        grad[i] = g;
    }

    const double bound_eps = cap * 1e-12;
    bool converged = false;
    long pass = 0;
    for (; pass < opt.max_passes; ++pass) {
        // i: steepest descent among coordinates that can grow;
        // j: steepest ascent among coordinates that can shrink.
        size_t i_up = n, j_down = n;
        double gmin = std::numeric_limits<double>::infinity();
        double gmax = -std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < n; ++k) {
            if (alpha[k] < cap - bound_eps && grad[k] < gmin) {
                gmin = grad[k];
                i_up = k;
            }
            if (alpha[k] > bound_eps && grad[k] > gmax) {
                gmax = grad[k];
                j_down = k;
            }
        }
        if (i_up == n || j_down == n || gmax - gmin < opt.tol) {
            converged = true;
            break;
        }
        const double denom =
            std::max(q[i_up * n + i_up] + q[j_down * n + j_down] - 2.0 * q[i_up * n + j_down],
                     1e-15);
        double step = (gmax - gmin) / denom;
        step = std::min(step, cap - alpha[i_up]);
        step = std::min(step, alpha[j_down]);
        if (step <= 0.0) {
            converged = true;
            break;
        }
        alpha[i_up] += step;
        alpha[j_down] -= step;
        for (size_t k = 0; k < n; ++k)
            grad[k] += step * (q[i_up * n + k] - q[j_down * n + k]);
    }

    // rho = decision value at strictly interior coordinates.
    double rho;
    {
        double acc = 0.0;
        int cnt = 0;
        double lo_bound = -std::numeric_limits<double>::infinity();
        double hi_bound = std::numeric_limits<double>::infinity();
        const double margin = cap * 1e-8;
        for (size_t k = 0; k < n; ++k) {
            if (alpha[k] > margin && alpha[k] < cap - margin) {
                acc += grad[k];
                ++cnt;
            } else if (alpha[k] >= cap - margin) {
                lo_bound = std::max(lo_bound, grad[k]);  // at-cap points: grad <= rho
            } else {
                hi_bound = std::min(hi_bound, grad[k]);  // zero points: grad >= rho
            }
        }
        if (cnt > 0) {
            rho = acc / cnt;
        } else {
            if (!std::isfinite(lo_bound)) lo_bound = hi_bound;
            if (!std::isfinite(hi_bound)) hi_bound = lo_bound;
            rho = (lo_bound + hi_bound) / 2.0;
        }
    }

    OcsvmModel m;
    m.kernel = kernel;
    m.nu = nu;
    m.n_train = n;
    m.rho = rho;
    m.converged = converged;
    const double keep = 1e-12;
    for (size_t k = 0; k < n; ++k) {
        if (alpha[k] > keep) {
            m.support_vectors.push_back(data[k]);
            m.alphas.push_back(alpha[k]);
        }
    }
    return m;
}

// dual objective 1/2 a^T Q a for an arbitrary feasible point
inline double dual_objective(const std::vector<std::vector<double>>& data, const Kernel& kernel,
                             std::span<const double> alpha) {
    double obj = 0.0;
    for (size_t i = 0; i < data.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        for (size_t j = 0; j < data.size(); ++j) {
            if (alpha[j] == 0.0) continue;
            obj += alpha[i] * alpha[j] * kernel_eval(kernel, data[i], data[j]);
        }
    }
    return 0.5 * obj;
}

inline double model_objective(const OcsvmModel& m) {
    double obj = 0.0;
    for (size_t i = 0; i < m.support_vectors.size(); ++i)
        for (size_t j = 0; j < m.support_vectors.size(); ++j)
            obj += m.alphas[i] * m.alphas[j] *
                   kernel_eval(m.kernel, m.support_vectors[i], m.support_vectors[j]);
    return 0.5 * obj;
}

// --- text serialization -------------------------------------------------

inline std::string serialize_model(const OcsvmModel& m) {
    std::ostringstream os;
    os.precision(17);
    os << "nu " << m.nu << "\n";
    os << "kernel " << m.kernel.spec_string() << "\n";
    os << "rho " << m.rho << "\n";
    os << "n_train " << m.n_train << "\n";
    os << "converged " << (m.converged ? 1 : 0) << "\n";
    os << "sv " << m.support_vectors.size() << " " << m.dim() << "\n";
    for (size_t i = 0; i < m.support_vectors.size(); ++i) {
        os << m.alphas[i];
        for (double v : m.support_vectors[i]) os << " " << v;
        os << "\n";
    }
    return os.str();
}

inline OcsvmModel parse_model(const std::string& text) {
    std::istringstream is(text);
    OcsvmModel m;
    std::string tag;
    size_t count = 0, dim = 0;
    int conv = 1;
    std::string kernel_name;
    while (is >> tag) {
        if (tag == "nu") is >> m.nu;
        else if (tag == "kernel") {
            std::string kind;
            is >> kind;
            if (kind == "rbf") {
                double s;
                is >> s;
                m.kernel = Kernel::rbf(s);
            } else if (kind == "poly") {
                int p;
                is >> p;
                m.kernel = Kernel::polynomial(p);
            } else {
                throw std::invalid_argument("parse_model: unknown kernel " + kind);
            }
        } else if (tag == "rho") is >> m.rho;
        else if (tag == "n_train") is >> m.n_train;
        else if (tag == "converged") is >> conv;
        else if (tag == "sv") {
            is >> count >> dim;
            break;
        } else {
            throw std::invalid_argument("parse_model: unknown tag " + tag);
        }
    }
    m.converged = conv != 0;
    for (size_t i = 0; i < count; ++i) {
        double a;
        if (!(is >> a)) throw std::invalid_argument("parse_model: truncated sv block");
        std::vector<double> sv(dim);
        for (size_t d = 0; d < dim; ++d)
            if (!(is >> sv[d])) throw std::invalid_argument("parse_model: truncated sv row");
        m.alphas.push_back(a);
        m.support_vectors.push_back(std::move(sv));
    }
    return m;
}

}  // namespace amisec
