#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dd/power_model.hpp"

namespace testdata {

inline Eigen::MatrixXd ieee30_b() {
    Eigen::MatrixXd B(6, 6);
    B << 13.82, -2.99, 0.44, -0.22, -0.10, -0.08,
         -2.99, 4.87, -0.25, 0.04, 0.16, 0.41,
         0.44, -0.25, 1.82, -0.70, -0.66, -0.66,
         -0.22, 0.04, -0.70, 1.37, 0.50, 0.33,
         -0.10, 0.16, -0.66, 0.50, 1.09, 0.05,
         -0.08, 0.41, -0.66, 0.33, 0.05, 2.44;
    return 0.01 * B;
}

// generator buses only, with the whole demand placed on them evenly
inline std::vector<dd::BusSpec> ieee30_generators(double total_demand) {
    const double lo[6] = {5, 5, 5, 5, 5, 5};
    const double hi[6] = {20, 10, 30, 15, 10, 8};
    const double a[6] = {0.08, 0.06, 0.07, 0.06, 0.08, 0.08};
    const double b[6] = {2.0, 3.0, 4.0, 4.0, 2.5, 2.5};
    std::vector<dd::BusSpec> out;
    for (int i = 0; i < 6; ++i)
        out.push_back({i + 1, lo[i], hi[i], a[i], b[i], total_demand / 6.0, true});
    return out;
}

inline std::string scenario_path(const std::string& name) {
    return std::string(DD_SCENARIO_DIR) + "/" + name;
}

} // namespace testdata
