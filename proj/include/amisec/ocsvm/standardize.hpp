#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace amisec {

// Per-dimension zero-mean unit-variance scaling with statistics frozen at
// fit time. Position (meters), inter-arrival (seconds) and packet size
// (bytes) live on wildly different scales; nothing downstream works without
// this.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sdev;

    // Constant dimensions get a unit-ish floor so transforming them yields 0
    // rather than a blow-up.
    static constexpr double kSdevFloor = 1e-6;

    void fit(const std::vector<std::vector<double>>& data) {
        if (data.empty()) throw std::invalid_argument("Standardizer: empty data");
        const size_t dim = data[0].size();
        mean.assign(dim, 0.0);
        sdev.assign(dim, 0.0);
        for (const auto& row : data) {
            if (row.size() != dim) throw std::invalid_argument("Standardizer: ragged data");
            for (size_t d = 0; d < dim; ++d) mean[d] += row[d];
        }
        for (double& m : mean) m /= static_cast<double>(data.size());
        for (const auto& row : data) {
            for (size_t d = 0; d < dim; ++d) {
                double c = row[d] - mean[d];
                sdev[d] += c * c;
            }
        }
        for (double& s : sdev) {
            s = std::sqrt(s / static_cast<double>(data.size()));
            if (s < kSdevFloor) s = kSdevFloor;
        }
    }

    std::vector<double> transform(std::span<const double> x) const {
        if (x.size() != mean.size())
            throw std::invalid_argument("Standardizer: dimension mismatch");
        std::vector<double> out(x.size());
        for (size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - mean[d]) / sdev[d];
        return out;
    }

    std::vector<std::vector<double>> transform_all(
        const std::vector<std::vector<double>>& data) const {
        std::vector<std::vector<double>> out;
        out.reserve(data.size());
        for (const auto& row : data) out.push_back(transform(row));
        return out;
    }
};

}  // namespace amisec
