#include <algorithm>
#include <cmath>
#include <sstream>

#include "skembed/error.hpp"
#include "skembed/lp.hpp"

namespace skembed {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
        case LpStatus::MaxIterReached: return "MaxIterReached";
    }
    return "Unknown";
}

std::size_t LinearProgram::add_variable(double cost, double lower) {
    costs_.push_back(cost);
    lower_.push_back(lower);
    return costs_.size() - 1;
}

std::size_t LinearProgram::add_row(RowSense sense, double rhs) {
    senses_.push_back(sense);
    rhs_.push_back(rhs);
    return rhs_.size() - 1;
}

void LinearProgram::add_coefficient(std::size_t row, std::size_t col, double value) {
    if (value == 0.0) return;
    triplets_.push_back({row, col, value});
}

void LinearProgram::validate() const {
    for (const auto& t : triplets_) {
        if (t.row >= num_rows() || t.col >= num_variables()) {
            throw Error(ErrorCode::InvalidProgram, "triplet index out of range");
        }
        if (!std::isfinite(t.value)) throw Error(ErrorCode::InvalidProgram, "non-finite coefficient");
    }
    for (double c : costs_) {
        if (!std::isfinite(c)) throw Error(ErrorCode::InvalidProgram, "non-finite cost");
    }
    for (double l : lower_) {
        if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
            throw Error(ErrorCode::InvalidProgram, "invalid lower bound");
        }
    }
    for (double b : rhs_) {
        if (!std::isfinite(b)) throw Error(ErrorCode::InvalidProgram, "non-finite right-hand side");
    }
}

std::vector<double> LinearProgram::row_activity(std::span<const double> x) const {
    std::vector<double> ax(num_rows(), 0.0);
    for (const auto& t : triplets_) ax[t.row] += t.value * x[t.col];
    return ax;
}

std::string LinearProgram::to_triplet_text() const {
    std::ostringstream out;
    out.precision(17);
    out << "skembed-lp " << num_variables() << ' ' << num_rows() << ' ' << num_nonzeros() << ' '
        << (sense_ == ObjectiveSense::Minimize ? "min" : "max") << '\n';
    for (std::size_t j = 0; j < num_variables(); ++j) {
        out << "c " << j << ' ' << costs_[j] << ' ' << lower_[j] << '\n';
    }
    for (std::size_t i = 0; i < num_rows(); ++i) {
        const char s = senses_[i] == RowSense::Equal ? 'E' : senses_[i] == RowSense::LessEqual ? 'L' : 'G';
        out << "r " << i << ' ' << s << ' ' << rhs_[i] << '\n';
    }
    for (const auto& t : triplets_) out << "a " << t.row << ' ' << t.col << ' ' << t.value << '\n';
    return out.str();
}

namespace {

// Sign multiplier turning a maximization into the minimization convention.
double sense_sign(const LinearProgram& prog) {
    return prog.sense() == ObjectiveSense::Minimize ? 1.0 : -1.0;
}

}  // namespace

OptimalityReport check_optimality(const LinearProgram& prog, const LpSolution& sol) {
    OptimalityReport rep;
    const std::size_t n = prog.num_variables();
    const std::size_t m = prog.num_rows();
    if (sol.primal.size() != n || sol.duals.size() != m) {
        throw Error(ErrorCode::InvalidArgument, "solution size does not match program");
    }
    const auto ax = prog.row_activity(sol.primal);
    for (std::size_t i = 0; i < m; ++i) {
        const double r = ax[i] - prog.rhs()[i];
        double viol = 0.0;
        switch (prog.row_senses()[i]) {
            case RowSense::Equal: viol = std::abs(r); break;
            case RowSense::LessEqual: viol = std::max(0.0, r); break;
            case RowSense::GreaterEqual: viol = std::max(0.0, -r); break;
        }
        rep.primal_residual = std::max(rep.primal_residual, viol);
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double l = prog.lower_bounds()[j];
        if (std::isfinite(l)) rep.primal_residual = std::max(rep.primal_residual, l - sol.primal[j]);
    }

    // Work in the minimization convention: y' = s y, c' = s c.
    const double s = sense_sign(prog);
    std::vector<double> aty(n, 0.0);
    for (const auto& t : prog.triplets()) aty[t.col] += t.value * sol.duals[t.row];
    double primal_obj = 0.0;
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double y = s * sol.duals[i];
        if (prog.row_senses()[i] == RowSense::LessEqual) rep.dual_residual = std::max(rep.dual_residual, y);
        if (prog.row_senses()[i] == RowSense::GreaterEqual) rep.dual_residual = std::max(rep.dual_residual, -y);
        dual_obj += prog.rhs()[i] * sol.duals[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double rc = s * (prog.costs()[j] - aty[j]);
        const double l = prog.lower_bounds()[j];
        if (std::isfinite(l)) {
            rep.dual_residual = std::max(rep.dual_residual, -rc);
            dual_obj += l * (prog.costs()[j] - aty[j]);
            rep.complementarity = std::max(rep.complementarity, std::abs((sol.primal[j] - l) * rc));
        } else {
            rep.dual_residual = std::max(rep.dual_residual, std::abs(rc));
        }
        primal_obj += prog.costs()[j] * sol.primal[j];
    }
    rep.dual_objective = dual_obj;
    rep.gap = std::abs(primal_obj - dual_obj);
    return rep;
}

FarkasReport check_farkas(const LinearProgram& prog, std::span<const double> y, double tol) {
    FarkasReport rep;
    const std::size_t n = prog.num_variables();
    const std::size_t m = prog.num_rows();
    if (y.size() != m) return rep;
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return rep;

    std::vector<double> aty(n, 0.0);
    for (const auto& t : prog.triplets()) aty[t.col] += t.value * y[t.row] / scale;
    for (std::size_t j = 0; j < n; ++j) {
        const double l = prog.lower_bounds()[j];
        rep.max_violation = std::max(rep.max_violation, std::isfinite(l) ? aty[j] : std::abs(aty[j]));
    }
    double value = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double yi = y[i] / scale;
        if (prog.row_senses()[i] == RowSense::LessEqual) rep.max_violation = std::max(rep.max_violation, yi);
        if (prog.row_senses()[i] == RowSense::GreaterEqual) rep.max_violation = std::max(rep.max_violation, -yi);
        value += yi * prog.rhs()[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double l = prog.lower_bounds()[j];
        if (std::isfinite(l) && l != 0.0) value -= aty[j] * l;
    }
    rep.certificate_value = value;
    rep.valid = rep.max_violation <= tol && value > tol;
    return rep;
}

}  // namespace skembed
