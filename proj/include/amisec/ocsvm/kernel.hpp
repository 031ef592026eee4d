#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace amisec {

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// RBF: k(x, y) = exp(-||x - y||^2 / sigma). Polynomial: k(x, y) = ((x.y) + 1)^p.
struct Kernel {
    enum class Type { Rbf, Polynomial };
    Type type = Type::Rbf;
    double sigma = 1.0;  // RBF width
    int degree = 2;      // polynomial degree

    static Kernel rbf(double sigma) {
        if (sigma <= 0.0) throw std::invalid_argument("Kernel::rbf: sigma must be > 0");
        return Kernel{Type::Rbf, sigma, 0};
    }
    static Kernel polynomial(int p) {
        if (p < 1) throw std::invalid_argument("Kernel::polynomial: degree must be >= 1");
        return Kernel{Type::Polynomial, 0.0, p};
    }

    std::string spec_string() const {
        std::ostringstream os;
        if (type == Type::Rbf) {
            os.precision(17);
            os << "rbf " << sigma;
        } else {
            os << "poly " << degree;
        }
        return os.str();
    }

    static Kernel from_spec_string(const std::string& s) {
        std::istringstream is(s);
        std::string name;
        is >> name;
        if (name == "rbf") {
            double sigma;
            is >> sigma;
            return rbf(sigma);
        }
        if (name == "poly") {
            int p;
            is >> p;
            return polynomial(p);
        }
        throw std::invalid_argument("Kernel: unknown spec '" + s + "'");
    }
};

inline double kernel_eval(const Kernel& k, std::span<const double> x,
                          std::span<const double> y) {
    if (x.size() != y.size())
        throw ShapeError("kernel_eval: dimension mismatch");
    if (k.type == Kernel::Type::Rbf) {
        double d2 = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            double d = x[i] - y[i];
            d2 += d * d;
        }
        return std::exp(-d2 / k.sigma);
    }
    double dot = 0.0;
    for (size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    double base = dot + 1.0;
    double r = 1.0;
    for (int i = 0; i < k.degree; ++i) r *= base;
    return r;
}

// Median of pairwise squared distances; the stock width choice for the RBF
// kernel when nothing better is known.
inline double median_sq_distance(const std::vector<std::vector<double>>& data) {
    std::vector<double> d2s;
    d2s.reserve(data.size() * (data.size() - 1) / 2);
    for (size_t i = 0; i < data.size(); ++i) {
        for (size_t j = i + 1; j < data.size(); ++j) {
            double d2 = 0.0;
            for (size_t k = 0; k < data[i].size(); ++k) {
                double d = data[i][k] - data[j][k];
                d2 += d * d;
            }
            d2s.push_back(d2);
        }
    }
    if (d2s.empty()) return 1.0;
    size_t mid = d2s.size() / 2;
    std::nth_element(d2s.begin(), d2s.begin() + mid, d2s.end());
    double med = d2s[mid];
    return med > 1e-9 ? med : 1e-9;
}

}  // namespace amisec
