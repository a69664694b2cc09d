#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dd {

struct BusSpec {
    int index = 0;
    double x_min = 0.0;   // MW
    double x_max = 0.0;   // MW
    double cost_a = 0.0;  // MU/MW^2
    double cost_b = 0.0;  // MU/MW
    double demand = 0.0;  // MW
    bool is_generator = false;
};

struct LossModel {
    Eigen::MatrixXd B;
    Eigen::MatrixXd R;
    double psd_tolerance = 0.0;
    double min_eigenvalue = 0.0;
};

struct UBound {
    double u_max = 0.0;
};

// tolerance < 0 selects the default 1e-8 * ||B||_inf
LossModel factor_loss_matrix(const Eigen::MatrixXd& B, double psd_tolerance = -1.0);

double evaluate_loss(const Eigen::MatrixXd& B, const Eigen::VectorXd& x);

struct LossColumn {
    Eigen::VectorXd r_col;
    double r_max = 0.0;
};

LossColumn local_loss_column(const LossModel& model, int i);

UBound compute_u_bound(const LossModel& model, const std::vector<BusSpec>& buses);

// (a x^2 + b x, 2 a x + b)
std::pair<double, double> cost_value_and_slope(const BusSpec& bus, double x);

double total_demand(const std::vector<BusSpec>& buses);

// Upsilon(x) + sum d - sum x
double balance_residual(const std::vector<BusSpec>& buses, const LossModel& model, const Eigen::VectorXd& x);

double total_cost(const std::vector<BusSpec>& buses, const Eigen::VectorXd& x);

Eigen::VectorXd lower_bounds(const std::vector<BusSpec>& buses);
Eigen::VectorXd upper_bounds(const std::vector<BusSpec>& buses);

// max over the box of sum x - x'Bx (largest deliverable demand) and its maximizer
std::pair<double, Eigen::VectorXd> max_deliverable(const std::vector<BusSpec>& buses, const LossModel& model);

struct AssumptionFinding {
    std::string label;
    std::string message;
};

// A4 and A5.x checks; A6 (overload) is reported but informational
std::vector<AssumptionFinding> check_power_assumptions(const std::vector<BusSpec>& buses, const LossModel& model);

} // namespace dd
