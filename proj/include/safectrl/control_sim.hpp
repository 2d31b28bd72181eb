#ifndef SAFECTRL_CONTROL_SIM_HPP
#define SAFECTRL_CONTROL_SIM_HPP

#include <Eigen/Dense>

#include "safectrl/problem.hpp"

namespace safectrl {

/// The six cascade PI gains, ordered (speed_kp, speed_ki, d_kp, d_ki, q_kp,
/// q_ki). Ranges: speed gains in [0.01, 0.5], current-loop p gains in
/// [0.1, 1], current-loop i gains in [1, 200].
struct ControllerGains {
    double speed_kp = 0.15, speed_ki = 0.05;
    double d_axis_kp = 0.5, d_axis_ki = 5.0;
    double q_axis_kp = 0.5, q_axis_ki = 5.0;

    Eigen::VectorXd to_vector() const;
    static ControllerGains from_vector(const Eigen::VectorXd& v);
};

/// Raw-unit bounds of the six-dimensional gain space.
BoxDomain gain_domain();

/// Surrogate 2-layer cascade plant: two first-order inner current loops and
/// an inertia/damping outer speed loop driven by q-axis torque. The d-axis
/// loop regulates an initial flux-error pulse to zero and is decoupled from
/// the speed path, so its gains shape control energy but not tracking.
struct CascadePlant {
    double d_axis_time_constant = 0.005;  // s
    double q_axis_time_constant = 0.005;  // s
    double outer_inertia = 0.01;
    double outer_damping = 0.05;
    double torque_gain = 1.0;
    double sample_period = 0.001;         // s
    double disturbance_std = 0.0;         // torque disturbance
    double control_saturation = 10.0;     // integrator clamp and output limit
    double d_axis_initial = 1.0;          // flux-error pulse at t = 0

    void validate() const;
};

struct Trajectory {
    Eigen::VectorXd time;
    Eigen::VectorXd response;  // outer (speed) output
    Eigen::VectorXd inner_d, inner_q;
    Eigen::MatrixXd controls;  // N x 3: u_speed, u_d, u_q
    double reference = 0.0;
    bool unstable = false;     // some state exceeded 1e9
    int steps = 0;
};

struct StepResponseMetrics {
    double settling_time_2pct = 0.0;
    double overshoot = 0.0;
    double steady_state_error = 0.0;
    double control_energy_first_second = 0.0;
    bool unsettled = false;
    bool unstable = false;
};

struct PerformanceWeights {
    double w_s = 20.0, w_o = 1.5, w_e = 4.0, t_0 = 2.5;
};

struct SafetyParams {
    double C_e0 = 100.0, w_e_prime = 40.0;
    double C_u0 = 100.0, w_u = 0.001;
    double threshold_Ge = 0.0, threshold_Gu = 0.0;
};

/// One discrete PI loop with conditional integrator clamping, driving a
/// first-order plant y' = (u - y)/tau. Exposed so tests can drive the inner
/// loop in isolation against the closed-form difference equation.
struct PiLoop {
    double kp = 0.0, ki = 0.0;
    double saturation = 10.0;
    double integral_sum = 0.0;

    double step(double reference, double measurement);
};

/// Discrete-time simulation of the full cascade under a speed step. The
/// disturbance stream (if any) is drawn from `rng`, so equal seeds give
/// identical trajectories.
Trajectory simulate_step_response(const ControllerGains& gains, const CascadePlant& plant,
                                  double reference, double horizon, Rng& rng);

/// Step-response metrics: steady state is the mean of the final 10% window,
/// the settling time is the last exit from the 2% band around it, overshoot
/// is peak-minus-reference floored at zero, and control energy sums all
/// controller outputs squared over the first second.
StepResponseMetrics compute_metrics(const Trajectory& traj, double reference, double horizon);

/// J = w_s (t_0 - t_s) - w_o O_s - w_e e_ss. Unstable runs are scored as
/// w_s (t_0 - horizon) minus a fixed penalty so the optimizer sees a finite,
/// strongly negative value.
double performance_J(const StepResponseMetrics& m, const PerformanceWeights& w, double horizon);

double safety_Ge(const StepResponseMetrics& m, double C_e0, double w_e_prime);
double safety_Gu(const StepResponseMetrics& m, double C_u0, double w_u);

struct TuningSetup {
    CascadePlant plant;
    PerformanceWeights weights;
    SafetyParams safety;
    ControllerGains initial_gains;
    double reference = 100.0;
    double horizon = 3.0;
};

/// Package simulate -> metrics -> (J, G_e, G_u) as a Problem over the six
/// gains. Validates that the initial gains are stable and safe.
Problem tuning_problem(const TuningSetup& setup);

} // namespace safectrl

#endif
