#pragma once

#include <Eigen/Dense>
#include <string>

namespace conemkt {

// Concave objective with derivatives on an open domain; value() returns
// -infinity outside, and derivatives() is only called where value is finite.
class SmoothConcave {
public:
    virtual ~SmoothConcave() = default;
    virtual int dim() const = 0;
    virtual double value(const Eigen::VectorXd& y) const = 0;
    virtual void derivatives(const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                             Eigen::MatrixXd& hess) const = 0;
};

struct BarrierOptions {
    double muInitial = 1.0;
    double muFactor = 0.15;
    double muMin = 1e-12;
    double newtonTol = 1e-11;     // stage stop on the Newton decrement
    int maxNewtonPerStage = 90;
    double divergenceValue = 1e13;  // objective beyond this counts as runaway
    double divergenceNorm = 1e12;   // iterate norm beyond this counts as runaway
};

struct BarrierResult {
    bool converged = false;
    bool diverged = false;  // unbounded run detected (objective or iterate blew up)
    Eigen::VectorXd y;
    double value = 0.0;        // objective at y, barrier excluded
    double gapEstimate = 0.0;  // final mu times the number of inequality rows
    int newtonSteps = 0;
    std::string message;
};

// maximize f(y) subject to A y >= b and optionally E y = e, from a strictly
// feasible start, by a log-barrier Newton path. The equality rows are kept
// exactly through KKT steps.
BarrierResult maximizeWithBarrier(const SmoothConcave& f, const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& b, const Eigen::VectorXd& start,
                                  const BarrierOptions& opt = {},
                                  const Eigen::MatrixXd* E = nullptr,
                                  const Eigen::VectorXd* e = nullptr);

}  // namespace conemkt
