//! Independent numerical oracles that validate the kinematics and dynamics
//! without reusing the formulas under test.
//!
//! The static and Lagrangian oracles touch only positions and velocities
//! from the recursive link states plus numerical differentiation; they
//! never call into the wrench pipeline. The kinematic oracle differentiates
//! the closed-form inverse geometry. The generalized-force transport
//! between platform coordinates and slider forces follows from the Jacobian
//! identity `j1 * lambda_dot = j2 * r_dot`: a Cartesian generalized force Q
//! maps to slider forces f with `(j1^-1 j2)^T f = Q`.

use crate::dynamics::solve_actuators;
use crate::error::{Error, Result};
use crate::kinematics::{
    inverse_geometry, jacobians, joint_accels, joint_rates, link_states, JointStates,
    PlatformState,
};
use crate::math::{solve, Mat3, Vec3};
use crate::model::{Leg, RobotModel};
use crate::trajectory::CosineTrajectory;

/// Relative tolerance on joint rates vs finite-differenced inverse geometry.
pub const RATE_ORACLE_TOL: f64 = 1e-6;
/// Relative tolerance on joint accelerations vs finite-differenced rates.
pub const ACCEL_ORACLE_TOL: f64 = 1e-4;
/// Absolute tolerance (N) between static forces and the potential-gradient
/// oracle.
pub const STATIC_ORACLE_TOL: f64 = 1e-6;
/// Relative tolerance between dynamic forces and the Lagrangian oracle.
pub const LAGRANGIAN_ORACLE_TOL: f64 = 1e-3;
/// Relative tolerance on the power/energy balance.
pub const ENERGY_BALANCE_TOL: f64 = 1e-4;

/// Differencing step sizes, tuned for double precision.
#[derive(Debug, Clone, Copy)]
pub struct DiffSteps {
    /// Time step for central differences, s.
    pub time: f64,
    /// Spatial step for potential/kinetic gradients, m.
    pub space: f64,
    /// Velocity step for the nested kinetic-energy differences, m/s.
    pub nested: f64,
}

impl Default for DiffSteps {
    fn default() -> Self {
        DiffSteps {
            time: 1e-5,
            space: 1e-6,
            nested: 1e-5,
        }
    }
}

/// Outcome of one oracle sweep.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub name: String,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    /// Sample time where the worst error occurred, s.
    pub worst_time: f64,
    pub pass: bool,
    pub tolerance: f64,
}

impl OracleReport {
    fn from_errors(
        name: &str,
        max_abs_error: f64,
        max_rel_error: f64,
        worst_time: f64,
        tolerance: f64,
    ) -> Self {
        OracleReport {
            name: name.to_string(),
            max_abs_error,
            max_rel_error,
            worst_time,
            pass: max_rel_error <= tolerance,
            tolerance,
        }
    }
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let worst = if self.worst_time.is_nan() {
            "      -".to_string()
        } else {
            format!("{:>5.3} s", self.worst_time)
        };
        write!(
            f,
            "{:<44} max_abs {:>12.3e}  max_rel {:>12.3e}  worst_t {worst}  tol {:>8.1e}  {}",
            self.name,
            self.max_abs_error,
            self.max_rel_error,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

fn joint_coords(j: &JointStates) -> [f64; 9] {
    let mut q = [0.0; 9];
    for leg in Leg::ALL {
        let i = leg.idx();
        q[3 * i] = j[leg].lambda;
        q[3 * i + 1] = j[leg].phi21;
        q[3 * i + 2] = j[leg].phi32;
    }
    q
}

fn joint_rates_vec(j: &JointStates) -> [f64; 9] {
    let mut q = [0.0; 9];
    for leg in Leg::ALL {
        let i = leg.idx();
        q[3 * i] = j[leg].lambda_dot;
        q[3 * i + 1] = j[leg].omega21;
        q[3 * i + 2] = j[leg].omega32;
    }
    q
}

fn joint_accels_vec(j: &JointStates) -> [f64; 9] {
    let mut q = [0.0; 9];
    for leg in Leg::ALL {
        let i = leg.idx();
        q[3 * i] = j[leg].lambda_ddot;
        q[3 * i + 1] = j[leg].eps21;
        q[3 * i + 2] = j[leg].eps32;
    }
    q
}

/// Compare analytic joint rates and accelerations against central finite
/// differences of the closed-form inverse geometry over a trajectory sweep.
/// Rates difference the joint positions; accelerations difference the
/// analytic rates. Returns one report for rates, one for accelerations;
/// relative errors are normalized by the largest reference magnitude seen
/// over the sweep.
pub fn fd_kinematics_check(
    traj: &CosineTrajectory,
    model: &RobotModel,
    h: f64,
    samples: usize,
) -> Result<[OracleReport; 2]> {
    assert!(h > 0.0 && samples >= 2);
    let t_end = traj.duration;
    let mut rate_abs: (f64, f64) = (0.0, 0.0); // (error, time)
    let mut accel_abs: (f64, f64) = (0.0, 0.0);
    let mut rate_scale = 0.0f64;
    let mut accel_scale = 0.0f64;

    let joints_at = |t: f64| -> Result<JointStates> {
        let s = traj.state(t);
        inverse_geometry(s.r, model)
    };
    let rates_at = |t: f64| -> Result<JointStates> {
        let s = traj.state(t);
        joint_rates(&joints_at(t)?, s.v, model)
    };

    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        let s = traj.state(t);
        let j = joint_rates(&joints_at(t)?, s.v, model)?;
        let j = joint_accels(&j, s.a, model)?;

        let qp = joint_coords(&joints_at(t + h)?);
        let qm = joint_coords(&joints_at(t - h)?);
        let analytic_rate = joint_rates_vec(&j);
        for k in 0..9 {
            let fd = (qp[k] - qm[k]) / (2.0 * h);
            let err = (analytic_rate[k] - fd).abs();
            rate_scale = rate_scale.max(fd.abs());
            if err > rate_abs.0 {
                rate_abs = (err, t);
            }
        }

        let rp = joint_rates_vec(&rates_at(t + h)?);
        let rm = joint_rates_vec(&rates_at(t - h)?);
        let analytic_accel = joint_accels_vec(&j);
        for k in 0..9 {
            let fd = (rp[k] - rm[k]) / (2.0 * h);
            let err = (analytic_accel[k] - fd).abs();
            accel_scale = accel_scale.max(fd.abs());
            if err > accel_abs.0 {
                accel_abs = (err, t);
            }
        }
    }

    let rate_rel = rate_abs.0 / rate_scale.max(f64::MIN_POSITIVE);
    let accel_rel = accel_abs.0 / accel_scale.max(f64::MIN_POSITIVE);
    Ok([
        OracleReport::from_errors(
            "joint rates vs differenced inverse geometry",
            rate_abs.0,
            if rate_scale == 0.0 { 0.0 } else { rate_rel },
            rate_abs.1,
            RATE_ORACLE_TOL,
        ),
        OracleReport::from_errors(
            "joint accelerations vs differenced rates",
            accel_abs.0,
            if accel_scale == 0.0 { 0.0 } else { accel_rel },
            accel_abs.1,
            ACCEL_ORACLE_TOL,
        ),
    ])
}

/// Total gravitational potential energy of the mechanism at platform
/// position `r`: sum over all bodies of `m g h`, with heights measured
/// against the gravity direction from the link-state mass-center positions.
pub fn potential_energy(r: Vec3, model: &RobotModel) -> Result<f64> {
    let joints = inverse_geometry(r, model)?;
    let props = model.body_props();
    let ms = &model.masses;
    let mut v = 0.0;
    for leg in Leg::ALL {
        let states = link_states(leg, &joints[leg], model);
        for (k, prop) in props.iter().enumerate() {
            if leg != Leg::A && k == 4 {
                continue; // the platform is counted once, on leg A
            }
            let p = states.mass_center_position(k, prop.mass_center);
            v -= prop.mass * ms.g * ms.g_dir.dot(p);
        }
    }
    Ok(v)
}

/// Total kinetic energy for platform state `(r, v)`: per-body
/// `m |v_c|^2 / 2 + w^T Jc w / 2` with central tensors recovered from the
/// link-origin ones.
pub fn kinetic_energy(r: Vec3, v: Vec3, model: &RobotModel) -> Result<f64> {
    let joints = joint_rates(&inverse_geometry(r, model)?, v, model)?;
    let props = model.body_props();
    let mut t = 0.0;
    for leg in Leg::ALL {
        let states = link_states(leg, &joints[leg], model);
        for (k, prop) in props.iter().enumerate() {
            if leg != Leg::A && k == 4 {
                continue;
            }
            let vc = states.mass_center_velocity(k, prop.mass_center);
            let w = states.bodies[k].omega;
            let central = central_tensor(prop.inertia, prop.mass, prop.mass_center);
            t += 0.5 * prop.mass * vc.dot(vc) + 0.5 * w.dot(central * w);
        }
    }
    Ok(t)
}

fn central_tensor(about_origin: Mat3, mass: f64, r_c: Vec3) -> Mat3 {
    let d = r_c.dot(r_c);
    let shift = Mat3::new([
        [d - r_c.x * r_c.x, -r_c.x * r_c.y, -r_c.x * r_c.z],
        [-r_c.y * r_c.x, d - r_c.y * r_c.y, -r_c.y * r_c.z],
        [-r_c.z * r_c.x, -r_c.z * r_c.y, d - r_c.z * r_c.z],
    ]);
    about_origin - shift.scale(mass)
}

/// Map a Cartesian generalized force to slider forces through the Jacobian
/// transport `(j1^-1 j2)^T f = q`.
fn transport_to_actuators(q: Vec3, r: Vec3, model: &RobotModel) -> Result<Vec3> {
    let joints = inverse_geometry(r, model)?;
    let jac = jacobians(r, joints.lambdas(), model);
    // rows of j1^-1 j2: j2 rows divided by the matching alpha
    let t = Mat3::new([
        [
            jac.j2.0[0][0] / jac.alpha1,
            jac.j2.0[0][1] / jac.alpha1,
            jac.j2.0[0][2] / jac.alpha1,
        ],
        [
            jac.j2.0[1][0] / jac.alpha2,
            jac.j2.0[1][1] / jac.alpha2,
            jac.j2.0[1][2] / jac.alpha2,
        ],
        [
            jac.j2.0[2][0] / jac.alpha3,
            jac.j2.0[2][1] / jac.alpha3,
            jac.j2.0[2][2] / jac.alpha3,
        ],
    ]);
    solve(&t.transpose(), q).map_err(|_| Error::NearSingular {
        detail: format!("Jacobian transport singular at r = ({}, {}, {})", r.x, r.y, r.z),
    })
}

/// Static actuator forces from the potential energy alone: differentiate
/// `V(r)` centrally and transport the gradient to the sliders.
pub fn static_force_oracle(r: Vec3, model: &RobotModel) -> Result<Vec3> {
    static_force_oracle_with(r, model, DiffSteps::default())
}

pub fn static_force_oracle_with(r: Vec3, model: &RobotModel, steps: DiffSteps) -> Result<Vec3> {
    let h = steps.space;
    let mut grad = Vec3::ZERO;
    for i in 0..3 {
        let mut dp = Vec3::ZERO;
        dp[i] = h;
        grad[i] = (potential_energy(r + dp, model)? - potential_energy(r - dp, model)?)
            / (2.0 * h);
    }
    transport_to_actuators(grad, r, model)
}

/// Actuator forces at trajectory time `t` from the Lagrangian route:
/// `Q = d/dt (dT/dv) - dT/dr + dV/dr` evaluated with nested central
/// differences on the platform coordinates, then transported to the
/// sliders. Entirely independent of the wrench recursion.
pub fn lagrangian_oracle(
    traj: &CosineTrajectory,
    t: f64,
    model: &RobotModel,
) -> Result<Vec3> {
    lagrangian_oracle_with(traj, t, model, DiffSteps::default())
}

pub fn lagrangian_oracle_with(
    traj: &CosineTrajectory,
    t: f64,
    model: &RobotModel,
    steps: DiffSteps,
) -> Result<Vec3> {
    let leave_workspace = |e: Error| match e {
        Error::OutOfWorkspace { .. } => Error::StepTooLarge { t },
        other => other,
    };

    let momentum_at = |tt: f64| -> Result<Vec3> {
        let s = traj.state(tt);
        let hv = steps.nested;
        let mut out = Vec3::ZERO;
        for i in 0..3 {
            let mut dv = Vec3::ZERO;
            dv[i] = hv;
            out[i] = (kinetic_energy(s.r, s.v + dv, model)?
                - kinetic_energy(s.r, s.v - dv, model)?)
                / (2.0 * hv);
        }
        Ok(out)
    };

    let ht = steps.time;
    let dp_dt = (momentum_at(t + ht).map_err(leave_workspace)?
        - momentum_at(t - ht).map_err(leave_workspace)?)
        * (1.0 / (2.0 * ht));

    let s = traj.state(t);
    let hr = steps.space;
    let mut dt_dr = Vec3::ZERO;
    let mut dv_dr = Vec3::ZERO;
    for i in 0..3 {
        let mut dr = Vec3::ZERO;
        dr[i] = hr;
        dt_dr[i] = (kinetic_energy(s.r + dr, s.v, model).map_err(leave_workspace)?
            - kinetic_energy(s.r - dr, s.v, model).map_err(leave_workspace)?)
            / (2.0 * hr);
        dv_dr[i] = (potential_energy(s.r + dr, model).map_err(leave_workspace)?
            - potential_energy(s.r - dr, model).map_err(leave_workspace)?)
            / (2.0 * hr);
    }

    transport_to_actuators(dp_dt - dt_dr + dv_dr, s.r, model)
}

/// Gravity power delivered to the mechanism at platform state `(r, v)`:
/// sum of `m g g_dir . v_c` over all bodies (fixed frame).
pub fn gravity_power(r: Vec3, v: Vec3, model: &RobotModel) -> Result<f64> {
    let joints = joint_rates(&inverse_geometry(r, model)?, v, model)?;
    let props = model.body_props();
    let ms = &model.masses;
    let mut p = 0.0;
    for leg in Leg::ALL {
        let states = link_states(leg, &joints[leg], model);
        for (k, prop) in props.iter().enumerate() {
            if leg != Leg::A && k == 4 {
                continue;
            }
            let vc_body = states.mass_center_velocity(k, prop.mass_center);
            let vc_fixed = states.bodies[k].rot.transpose() * vc_body;
            p += prop.mass * ms.g * ms.g_dir.dot(vc_fixed);
        }
    }
    Ok(p)
}

/// Check the power balance `sum(p_j) + P_gravity = dT/dt` over a trajectory
/// sweep, with `dT/dt` by central time differences. The relative error is
/// the largest residual divided by the largest `|dT/dt|` seen.
pub fn energy_balance(
    traj: &CosineTrajectory,
    samples: usize,
    model: &RobotModel,
) -> Result<OracleReport> {
    energy_balance_with(traj, samples, model, DiffSteps::default())
}

pub fn energy_balance_with(
    traj: &CosineTrajectory,
    samples: usize,
    model: &RobotModel,
    steps: DiffSteps,
) -> Result<OracleReport> {
    assert!(samples >= 2);
    let h = steps.time;
    let mut worst: (f64, f64) = (0.0, 0.0);
    let mut scale = 0.0f64;
    for i in 0..samples {
        let t = traj.duration * i as f64 / (samples - 1) as f64;
        let s = traj.state(t);
        let (_, outputs) = solve_actuators(&s, model).map_err(|e| e.at_time(t))?;
        let p_act: f64 = outputs.iter().map(|o| o.power).sum();
        let p_grav = gravity_power(s.r, s.v, model)?;
        let sp = traj.state(t + h);
        let sm = traj.state(t - h);
        let dt_dt = (kinetic_energy(sp.r, sp.v, model)? - kinetic_energy(sm.r, sm.v, model)?)
            / (2.0 * h);
        scale = scale.max(dt_dt.abs());
        let residual = (p_act + p_grav - dt_dt).abs();
        if residual > worst.0 {
            worst = (residual, t);
        }
    }
    let rel = if scale == 0.0 { 0.0 } else { worst.0 / scale };
    Ok(OracleReport::from_errors(
        "power balance: sum(p) + P_gravity vs dT/dt",
        worst.0,
        rel,
        worst.1,
        ENERGY_BALANCE_TOL,
    ))
}

/// Compare the virtual-work forces at rest with the static oracle over a
/// deterministic set of poses in the `|r|_inf <= 0.25` box.
pub fn static_equivalence_check(model: &RobotModel, poses: usize) -> Result<OracleReport> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let mut rng = SplitMix::new(0x5eed);
    for _ in 0..poses {
        let r = Vec3::new(
            rng.uniform(-0.25, 0.25),
            rng.uniform(-0.25, 0.25),
            rng.uniform(-0.25, 0.25),
        );
        let (_, outputs) = solve_actuators(&PlatformState::at_rest(r), model)?;
        let oracle = static_force_oracle(r, model)?;
        for k in 0..3 {
            worst = worst.max((outputs[k].force - oracle[k]).abs());
            scale = scale.max(oracle[k].abs());
        }
    }
    let mut report = OracleReport::from_errors(
        "static forces vs potential-gradient oracle",
        worst,
        if scale == 0.0 { 0.0 } else { worst / scale },
        f64::NAN, // pose sweep, no associated time
        STATIC_ORACLE_TOL,
    );
    // this oracle is judged on absolute error in newtons
    report.pass = report.max_abs_error <= STATIC_ORACLE_TOL;
    Ok(report)
}

/// Compare the virtual-work forces with the Lagrangian oracle at uniformly
/// spaced trajectory samples; per-sample relative error on the force norm.
pub fn lagrangian_equivalence_check(
    traj: &CosineTrajectory,
    model: &RobotModel,
    samples: usize,
) -> Result<OracleReport> {
    assert!(samples >= 2);
    let mut worst: (f64, f64) = (0.0, 0.0);
    let mut worst_rel = 0.0f64;
    for i in 0..samples {
        let t = traj.duration * i as f64 / (samples - 1) as f64;
        let s = traj.state(t);
        let (_, outputs) = solve_actuators(&s, model).map_err(|e| e.at_time(t))?;
        let oracle = lagrangian_oracle(traj, t, model)?;
        let diff = (Vec3::new(outputs[0].force, outputs[1].force, outputs[2].force) - oracle)
            .norm_inf();
        let rel = diff / oracle.norm_inf().max(1e-9);
        if rel > worst_rel {
            worst_rel = rel;
            worst = (diff, t);
        }
    }
    Ok(OracleReport::from_errors(
        "dynamic forces vs Lagrangian oracle",
        worst.0,
        worst_rel,
        worst.1,
        LAGRANGIAN_ORACLE_TOL,
    ))
}

/// Small deterministic generator for oracle pose sweeps.
pub(crate) struct SplitMix {
    state: u64,
}

impl SplitMix {
    pub fn new(seed: u64) -> Self {
        SplitMix { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }
}
