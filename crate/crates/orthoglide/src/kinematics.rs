//! Inverse geometry, loop-closure residuals, Jacobians, joint-rate and
//! joint-acceleration solvers, and recursive propagation of per-body
//! kinematic states along each leg.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::math::{rot_z, skew, solve, Mat3, Vec3, U3};
use crate::model::{Leg, LegFrames, RobotModel};

/// Configurations with |cos(phi32)| below this are treated as singular.
pub const COS_SINGULARITY_TOL: f64 = 1e-9;

/// Platform position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlatformState {
    pub r: Vec3,
    pub v: Vec3,
    pub a: Vec3,
}

impl PlatformState {
    pub fn at_rest(r: Vec3) -> Self {
        PlatformState {
            r,
            v: Vec3::ZERO,
            a: Vec3::ZERO,
        }
    }
}

/// Joint coordinates of one leg with their first and second time
/// derivatives. `phi54` and its derivatives always mirror `phi21` (the
/// platform-side revolute undoes the rod-side rotation).
#[derive(Debug, Clone, Copy, Default)]
pub struct LegJointState {
    pub lambda: f64,
    pub phi21: f64,
    pub phi32: f64,
    pub phi54: f64,
    pub lambda_dot: f64,
    pub omega21: f64,
    pub omega32: f64,
    pub omega54: f64,
    pub lambda_ddot: f64,
    pub eps21: f64,
    pub eps32: f64,
    pub eps54: f64,
}

/// Joint states for all three legs.
#[derive(Debug, Clone, Copy, Default)]
pub struct JointStates(pub [LegJointState; 3]);

impl Index<Leg> for JointStates {
    type Output = LegJointState;
    fn index(&self, leg: Leg) -> &LegJointState {
        &self.0[leg.idx()]
    }
}

impl IndexMut<Leg> for JointStates {
    fn index_mut(&mut self, leg: Leg) -> &mut LegJointState {
        &mut self.0[leg.idx()]
    }
}

impl JointStates {
    pub fn lambdas(&self) -> Vec3 {
        Vec3::new(self.0[0].lambda, self.0[1].lambda, self.0[2].lambda)
    }

    pub fn lambda_dots(&self) -> Vec3 {
        Vec3::new(
            self.0[0].lambda_dot,
            self.0[1].lambda_dot,
            self.0[2].lambda_dot,
        )
    }

    pub fn lambda_ddots(&self) -> Vec3 {
        Vec3::new(
            self.0[0].lambda_ddot,
            self.0[1].lambda_ddot,
            self.0[2].lambda_ddot,
        )
    }
}

/// Closed-form inverse geometry: joint positions for a platform position.
///
/// Per leg, with the driving coordinate cyclically permuted
/// (A: x drive, (z, y) swing; B: y drive, (x, z) swing; C: z drive, (y, x)
/// swing):
///
/// ```text
/// sin(phi32) = -swing1 / l3
/// sin(phi21) =  swing2 / (l3 cos(phi32))
/// lambda     =  drive + l3 (1 - cos(phi21) cos(phi32))
/// ```
///
/// Principal arcsine branch; rates and accelerations are left zero.
pub fn inverse_geometry(r: Vec3, model: &RobotModel) -> Result<JointStates> {
    let l3 = model.geometry.l3;
    let mut out = JointStates::default();
    for leg in Leg::ALL {
        let (drive, swing1, swing2) = match leg {
            Leg::A => (r.x, r.z, r.y),
            Leg::B => (r.y, r.x, r.z),
            Leg::C => (r.z, r.y, r.x),
        };
        let s32 = -swing1 / l3;
        if s32.abs() >= 1.0 {
            return Err(Error::OutOfWorkspace {
                leg,
                what: "sin(phi32)",
                value: s32,
            });
        }
        let c32 = (1.0 - s32 * s32).sqrt();
        if c32 < COS_SINGULARITY_TOL {
            return Err(Error::NearSingular {
                detail: format!("leg {leg}: |cos(phi32)| = {c32} below {COS_SINGULARITY_TOL}"),
            });
        }
        let s21 = swing2 / (l3 * c32);
        if s21.abs() >= 1.0 {
            return Err(Error::OutOfWorkspace {
                leg,
                what: "sin(phi21)",
                value: s21,
            });
        }
        let c21 = (1.0 - s21 * s21).sqrt();
        let state = &mut out[leg];
        state.phi32 = s32.asin();
        state.phi21 = s21.asin();
        state.phi54 = state.phi21;
        state.lambda = drive + l3 * (1.0 - c21 * c32);
    }
    Ok(out)
}

/// Loop-closure residuals, one per leg: the sphere-constraint left side
/// minus `l3^2`. Zero exactly when the slider positions close the loops.
pub fn constraint_residuals(r: Vec3, lambda: Vec3, model: &RobotModel) -> Vec3 {
    let l3 = model.geometry.l3;
    let sq = |v: f64| v * v;
    Vec3::new(
        sq(r.z) + sq(r.y) + sq(r.x + l3 - lambda.x) - sq(l3),
        sq(r.x) + sq(r.z) + sq(r.y + l3 - lambda.y) - sq(l3),
        sq(r.y) + sq(r.x) + sq(r.z + l3 - lambda.z) - sq(l3),
    )
}

/// Inverse Jacobian `j1` (diagonal) and forward Jacobian `j2` of the
/// manipulator, satisfying `j1 * lambda_dot = j2 * r_dot` for consistent
/// rates. Singularity is reported through the determinants, not raised.
#[derive(Debug, Clone, Copy)]
pub struct JacobianPair {
    pub j1: Mat3,
    pub j2: Mat3,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl JacobianPair {
    pub fn det_j1(&self) -> f64 {
        self.j1.det()
    }

    pub fn det_j2(&self) -> f64 {
        self.j2.det()
    }
}

/// Build the Jacobian pair from a loop-consistent `(r, lambda)` pair by
/// differentiating the sphere constraints.
pub fn jacobians(r: Vec3, lambda: Vec3, model: &RobotModel) -> JacobianPair {
    let l3 = model.geometry.l3;
    let alpha1 = r.x + l3 - lambda.x;
    let alpha2 = r.y + l3 - lambda.y;
    let alpha3 = r.z + l3 - lambda.z;
    JacobianPair {
        j1: Mat3::diag(alpha1, alpha2, alpha3),
        j2: Mat3::new([
            [alpha1, r.y, r.z],
            [r.x, alpha2, r.z],
            [r.x, r.y, alpha3],
        ]),
        alpha1,
        alpha2,
        alpha3,
    }
}

/// Relative and absolute chain rotation matrices of one leg at given joint
/// angles. Matrices map fixed-frame coordinates into each body frame.
#[derive(Debug, Clone, Copy)]
pub struct ChainMatrices {
    pub a10: Mat3,
    pub a21: Mat3,
    pub a32: Mat3,
    pub a43: Mat3,
    pub a54: Mat3,
    pub a20: Mat3,
    pub a30: Mat3,
    pub a40: Mat3,
    pub a50: Mat3,
}

impl ChainMatrices {
    pub fn new(frames: &LegFrames, phi21: f64, phi32: f64) -> Self {
        let a10 = frames.base;
        let a21 = rot_z(phi21) * frames.align21;
        let a32 = rot_z(phi32) * frames.align32;
        let a43 = rot_z(phi32) * frames.align43; // coupler angle mirrors phi32
        let a54 = rot_z(phi21) * frames.align54; // platform angle mirrors phi21
        let a20 = a21 * a10;
        let a30 = a32 * a20;
        let a40 = a43 * a30;
        let a50 = a54 * a40;
        ChainMatrices {
            a10,
            a21,
            a32,
            a43,
            a54,
            a20,
            a30,
            a40,
            a50,
        }
    }

    /// Second parallel bar: same orientation as the first bar.
    pub fn a60(&self) -> Mat3 {
        self.a30
    }
}

/// Velocity connectivity matrix of one leg: columns are the platform-point
/// velocity induced by unit slider rate, unit `omega21` and unit `omega32`
/// (fixed frame), so that `M * [v10, omega21, omega32]^T = r_dot`.
pub(crate) fn connectivity_matrix(chain: &ChainMatrices, frames: &LegFrames) -> Mat3 {
    let col_slider = frames.slider_axis;
    // unit omega21 swings bodies 2..=4; only the bar offset survives
    let col21 = chain.a30.transpose() * (chain.a32 * U3).cross(frames.r43);
    // unit omega32 swings the bar alone (the coupler counter-rotates)
    let col32 = chain.a30.transpose() * U3.cross(frames.r43);
    let mut m = Mat3::ZERO;
    m.set_col(0, col_slider);
    m.set_col(1, col21);
    m.set_col(2, col32);
    m
}

fn near_singular(leg: Leg) -> Error {
    Error::NearSingular {
        detail: format!("leg {leg}: connectivity system singular"),
    }
}

/// Solve the per-leg velocity connectivity systems for the joint rates that
/// realize platform velocity `v`. Requires joint positions already solved.
pub fn joint_rates(joints: &JointStates, v: Vec3, model: &RobotModel) -> Result<JointStates> {
    let mut out = *joints;
    for leg in Leg::ALL {
        let frames = model.leg_frames(leg);
        let js = &mut out[leg];
        let chain = ChainMatrices::new(&frames, js.phi21, js.phi32);
        let m = connectivity_matrix(&chain, &frames);
        let q = solve(&m, v).map_err(|_| near_singular(leg))?;
        js.lambda_dot = q.x;
        js.omega21 = q.y;
        js.omega32 = q.z;
        js.omega54 = q.y;
    }
    Ok(out)
}

/// Solve the differentiated connectivity systems for joint accelerations
/// realizing platform acceleration `a`. The quadratic-rate right-hand side
/// is evaluated by propagating the chain at the current rates with all
/// joint accelerations frozen at zero. Requires rates already solved.
pub fn joint_accels(joints: &JointStates, a: Vec3, model: &RobotModel) -> Result<JointStates> {
    let mut out = *joints;
    for leg in Leg::ALL {
        let frames = model.leg_frames(leg);
        let js = &mut out[leg];
        let chain = ChainMatrices::new(&frames, js.phi21, js.phi32);
        let m = connectivity_matrix(&chain, &frames);

        let mut frozen = *js;
        frozen.lambda_ddot = 0.0;
        frozen.eps21 = 0.0;
        frozen.eps32 = 0.0;
        frozen.eps54 = 0.0;
        let states = link_states(leg, &frozen, model);
        let platform = &states.bodies[4];
        // platform mass-center acceleration with frozen joint accelerations
        let spin = skew(platform.omega) * skew(platform.omega) + skew(platform.eps);
        let bias = chain.a50.transpose() * (platform.gamma + spin * frames.r5g);

        let q = solve(&m, a - bias).map_err(|_| near_singular(leg))?;
        js.lambda_ddot = q.x;
        js.eps21 = q.y;
        js.eps32 = q.z;
        js.eps54 = q.y;
    }
    Ok(out)
}

/// Kinematic state of one body: absolute orientation, angular velocity and
/// acceleration, and linear velocity and acceleration of the link origin
/// (all vectors in the body frame), plus the origin position in the fixed
/// frame.
#[derive(Debug, Clone, Copy)]
pub struct LinkKinematics {
    pub rot: Mat3,
    pub omega: Vec3,
    pub eps: Vec3,
    pub v: Vec3,
    pub gamma: Vec3,
    pub origin: Vec3,
}

/// Kinematic states for bodies 1..=6 of one leg (`bodies[k]` is body k+1).
#[derive(Debug, Clone, Copy)]
pub struct LegLinkStates {
    pub leg: Leg,
    pub bodies: [LinkKinematics; 6],
    pub chain: ChainMatrices,
}

impl LegLinkStates {
    /// Fixed-frame position of a body's mass center for offset `r_c` in the
    /// body frame.
    pub fn mass_center_position(&self, body: usize, r_c: Vec3) -> Vec3 {
        let b = &self.bodies[body];
        b.origin + b.rot.transpose() * r_c
    }

    /// Body-frame velocity of a body's mass center.
    pub fn mass_center_velocity(&self, body: usize, r_c: Vec3) -> Vec3 {
        let b = &self.bodies[body];
        b.v + b.omega.cross(r_c)
    }
}

fn propagate(
    a_rel: Mat3,
    parent: &LinkKinematics,
    w_rel: f64,
    e_rel: f64,
    r_rel: Vec3,
    origin: Vec3,
    rot: Mat3,
) -> LinkKinematics {
    let omega = a_rel * parent.omega + U3 * w_rel;
    let eps = a_rel * parent.eps
        + U3 * e_rel
        + (a_rel * parent.omega.cross(a_rel.transpose() * U3)) * w_rel;
    let v = a_rel * (parent.v + parent.omega.cross(r_rel));
    let gamma = a_rel
        * (parent.gamma + parent.omega.cross(parent.omega.cross(r_rel)) + parent.eps.cross(r_rel));
    LinkKinematics {
        rot,
        omega,
        eps,
        v,
        gamma,
        origin,
    }
}

/// Recursive propagation of per-body kinematic states along one leg.
///
/// The slider translates along its guide-way (`omega = 0`,
/// `v = lambda_dot * u3`); each revolute adds a rotation about its local z
/// axis. The second bar (body 6) hangs from the rod with the same relative
/// angle as the first bar.
pub fn link_states(leg: Leg, joints: &LegJointState, model: &RobotModel) -> LegLinkStates {
    let frames = model.leg_frames(leg);
    let chain = ChainMatrices::new(&frames, joints.phi21, joints.phi32);

    let p1 = frames.slider_origin(joints.lambda);
    let p2 = p1 + chain.a10.transpose() * frames.r21;
    let p3 = p2 + chain.a20.transpose() * frames.r32;
    let p4 = p3 + chain.a30.transpose() * frames.r43;
    let p5 = p4 + chain.a40.transpose() * frames.r54;
    let p6 = p2 + chain.a20.transpose() * frames.r62;

    let slider = LinkKinematics {
        rot: chain.a10,
        omega: Vec3::ZERO,
        eps: Vec3::ZERO,
        v: U3 * joints.lambda_dot,
        gamma: U3 * joints.lambda_ddot,
        origin: p1,
    };
    let rod = propagate(
        chain.a21,
        &slider,
        joints.omega21,
        joints.eps21,
        frames.r21,
        p2,
        chain.a20,
    );
    let bar = propagate(
        chain.a32,
        &rod,
        joints.omega32,
        joints.eps32,
        frames.r32,
        p3,
        chain.a30,
    );
    let coupler = propagate(
        chain.a43,
        &bar,
        joints.omega32,
        joints.eps32,
        frames.r43,
        p4,
        chain.a40,
    );
    let platform = propagate(
        chain.a54,
        &coupler,
        joints.omega54,
        joints.eps54,
        frames.r54,
        p5,
        chain.a50,
    );
    let second_bar = propagate(
        chain.a32,
        &rod,
        joints.omega32,
        joints.eps32,
        frames.r62,
        p6,
        chain.a60(),
    );

    LegLinkStates {
        leg,
        bodies: [slider, rod, bar, coupler, platform, second_bar],
        chain,
    }
}

/// Per-joint virtual velocity coefficients for one unit-slider input set.
#[derive(Debug, Clone, Copy)]
pub struct VirtualSet {
    /// Which slider carries the unit rate.
    pub input: Leg,
    /// Induced platform virtual velocity.
    pub platform_v: Vec3,
    /// Slider virtual rates (1 for `input`, 0 otherwise), indexed by leg.
    pub v10: [f64; 3],
    pub omega21: [f64; 3],
    pub omega32: [f64; 3],
    pub omega54: [f64; 3],
}

/// The three virtual-motion sets (unit rate on slider A, B, C in turn).
#[derive(Debug, Clone, Copy)]
pub struct VirtualRates {
    pub sets: [VirtualSet; 3],
}

impl Index<Leg> for VirtualRates {
    type Output = VirtualSet;
    fn index(&self, leg: Leg) -> &VirtualSet {
        &self.sets[leg.idx()]
    }
}

/// Solve the assembled connectivity system for the three virtual-motion
/// sets: with one slider rate pinned to 1 and the other two to 0, the
/// platform velocity and the six revolute rates are the 9 unknowns of the
/// stacked per-leg conditions.
pub fn virtual_rates(joints: &JointStates, model: &RobotModel) -> Result<VirtualRates> {
    // unknown layout: [w21A, w32A, w21B, w32B, w21C, w32C, vx, vy, vz]
    let mut a = [[0.0f64; 9]; 9];
    let mut cols = [[Vec3::ZERO; 3]; 3];
    for leg in Leg::ALL {
        let frames = model.leg_frames(leg);
        let js = &joints[leg];
        let chain = ChainMatrices::new(&frames, js.phi21, js.phi32);
        let m = connectivity_matrix(&chain, &frames);
        let li = leg.idx();
        cols[li] = [m.col(0), m.col(1), m.col(2)];
        for row in 0..3 {
            a[3 * li + row][2 * li] = cols[li][1][row];
            a[3 * li + row][2 * li + 1] = cols[li][2][row];
            a[3 * li + row][6 + row] = -1.0;
        }
    }

    let mut sets = Vec::with_capacity(3);
    for input in Leg::ALL {
        let mut b = [0.0f64; 9];
        let si = input.idx();
        for row in 0..3 {
            b[3 * si + row] = -cols[si][0][row];
        }
        let x = solve9(&a, &b).ok_or_else(|| Error::NearSingular {
            detail: format!("virtual-motion system singular for input {input}"),
        })?;
        let omega21 = [x[0], x[2], x[4]];
        let omega32 = [x[1], x[3], x[5]];
        let mut v10 = [0.0; 3];
        v10[si] = 1.0;
        sets.push(VirtualSet {
            input,
            platform_v: Vec3::new(x[6], x[7], x[8]),
            v10,
            omega21,
            omega32,
            omega54: omega21,
        });
    }
    Ok(VirtualRates {
        sets: [sets[0], sets[1], sets[2]],
    })
}

/// Gaussian elimination with partial pivoting for the fixed 9x9 system.
fn solve9(a: &[[f64; 9]; 9], b: &[f64; 9]) -> Option<[f64; 9]> {
    let mut m = *a;
    let mut x = *b;
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    for col in 0..9 {
        let pivot_row = (col..9)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot_row);
        x.swap(col, pivot_row);
        let pivot = m[col];
        for row in col + 1..9 {
            let f = m[row][col] / pivot[col];
            if f == 0.0 {
                continue;
            }
            for (entry, p) in m[row].iter_mut().zip(&pivot).skip(col) {
                *entry -= f * p;
            }
            x[row] -= f * x[col];
        }
    }
    for col in (0..9).rev() {
        let mut s = x[col];
        for (entry, xv) in m[col][col + 1..].iter().zip(&x[col + 1..]) {
            s -= entry * xv;
        }
        x[col] = s / m[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{solve as solve3, U1, U2};
    use proptest::prelude::*;

    fn model() -> RobotModel {
        RobotModel::default()
    }

    #[test]
    fn zero_pose_maps_to_zero_joints() {
        let j = inverse_geometry(Vec3::ZERO, &model()).unwrap();
        for leg in Leg::ALL {
            assert_eq!(j[leg].lambda, 0.0);
            assert_eq!(j[leg].phi21, 0.0);
            assert_eq!(j[leg].phi32, 0.0);
            assert_eq!(j[leg].phi54, 0.0);
        }
    }

    #[test]
    fn single_axis_pose_swings_one_angle() {
        let z = -0.1;
        let j = inverse_geometry(Vec3::new(0.0, 0.0, z), &model()).unwrap();
        assert!((j[Leg::A].phi32.sin() - (-z / 0.85)).abs() < 1e-15);
        assert_eq!(j[Leg::A].phi21, 0.0);
    }

    #[test]
    fn reference_pose_slider_displacements() {
        // platform at (0.025, 0.05, -0.10); expected sliders frozen from the
        // closed-form solution and cross-checked by the sphere residuals
        let r = Vec3::new(0.025, 0.05, -0.10);
        let j = inverse_geometry(r, &model()).unwrap();
        assert!((j[Leg::A].lambda - 0.032385022682364185).abs() < 1e-12);
        assert!((j[Leg::B].lambda - 0.05627314846568972).abs() < 1e-12);
        assert!((j[Leg::C].lambda - -0.09815977268436857).abs() < 1e-12);
        let res = constraint_residuals(r, j.lambdas(), &model());
        assert!(res.norm_inf() < 1e-12);
    }

    #[test]
    fn out_of_workspace_is_reported() {
        let err = inverse_geometry(Vec3::new(0.0, 0.0, 0.9), &model()).unwrap_err();
        assert!(matches!(err, Error::OutOfWorkspace { leg: Leg::A, .. }));
        let err = inverse_geometry(Vec3::new(0.9, 0.0, 0.0), &model()).unwrap_err();
        assert!(matches!(err, Error::OutOfWorkspace { leg: Leg::B, .. }));
    }

    #[test]
    fn residual_examples() {
        let m = model();
        assert_eq!(
            constraint_residuals(Vec3::ZERO, Vec3::ZERO, &m),
            Vec3::ZERO
        );
        // direct substitution: (0.85 - 0.1)^2 - 0.85^2 = -0.16
        let res = constraint_residuals(Vec3::ZERO, Vec3::new(0.1, 0.0, 0.0), &m);
        assert!((res.x - -0.16).abs() < 1e-15);
        assert_eq!(res.y, 0.0);
    }

    #[test]
    fn jacobians_at_center() {
        let m = model();
        let jac = jacobians(Vec3::ZERO, Vec3::ZERO, &m);
        assert_eq!(jac.j1, Mat3::diag(0.85, 0.85, 0.85));
        assert_eq!(jac.j2, Mat3::diag(0.85, 0.85, 0.85));
        assert!((jac.det_j1() - 0.614125).abs() < 1e-15);
    }

    #[test]
    fn rates_zero_velocity() {
        let m = model();
        let j = inverse_geometry(Vec3::new(0.05, -0.1, 0.2), &m).unwrap();
        let j = joint_rates(&j, Vec3::ZERO, &m).unwrap();
        for leg in Leg::ALL {
            assert_eq!(j[leg].lambda_dot, 0.0);
            assert_eq!(j[leg].omega21, 0.0);
            assert_eq!(j[leg].omega32, 0.0);
        }
    }

    #[test]
    fn rates_at_center_match_diagonal_jacobian() {
        let m = model();
        let j = inverse_geometry(Vec3::ZERO, &m).unwrap();
        let j = joint_rates(&j, U1, &m).unwrap();
        assert!((j.lambda_dots() - U1).norm() < 1e-14);
    }

    #[test]
    fn rates_match_finite_differences() {
        let m = model();
        let r = |t: f64| {
            Vec3::new(
                0.05 * (1.0 - (std::f64::consts::PI / 3.0 * t).cos()),
                0.10 * (1.0 - (std::f64::consts::PI / 3.0 * t).cos()),
                -0.20 * (1.0 - (std::f64::consts::PI / 3.0 * t).cos()),
            )
        };
        let v = |t: f64| {
            let w = std::f64::consts::PI / 3.0;
            Vec3::new(0.05 * w, 0.10 * w, -0.20 * w) * (w * t).sin()
        };
        let (t, h) = (1.0, 1e-5);
        let j = joint_rates(&inverse_geometry(r(t), &m).unwrap(), v(t), &m).unwrap();
        let jp = inverse_geometry(r(t + h), &m).unwrap();
        let jm = inverse_geometry(r(t - h), &m).unwrap();
        let fd = (jp.lambdas() - jm.lambdas()) * (1.0 / (2.0 * h));
        let rel = (j.lambda_dots() - fd).norm_inf() / fd.norm_inf();
        assert!(rel < 1e-6, "relative FD mismatch {rel}");
        for leg in Leg::ALL {
            let fd21 = (jp[leg].phi21 - jm[leg].phi21) / (2.0 * h);
            let fd32 = (jp[leg].phi32 - jm[leg].phi32) / (2.0 * h);
            assert!((j[leg].omega21 - fd21).abs() < 1e-6 * fd21.abs().max(1e-3));
            assert!((j[leg].omega32 - fd32).abs() < 1e-6 * fd32.abs().max(1e-3));
        }
    }

    #[test]
    fn accels_zero_for_static_state() {
        let m = model();
        let j = inverse_geometry(Vec3::new(0.1, 0.05, -0.05), &m).unwrap();
        let j = joint_rates(&j, Vec3::ZERO, &m).unwrap();
        let j = joint_accels(&j, Vec3::ZERO, &m).unwrap();
        for leg in Leg::ALL {
            assert_eq!(j[leg].lambda_ddot, 0.0);
            assert_eq!(j[leg].eps21, 0.0);
            assert_eq!(j[leg].eps32, 0.0);
        }
    }

    #[test]
    fn centripetal_terms_survive_zero_platform_accel() {
        let m = model();
        let j = inverse_geometry(Vec3::new(0.1, 0.05, -0.15), &m).unwrap();
        let j = joint_rates(&j, Vec3::new(0.2, -0.1, 0.3), &m).unwrap();
        let j = joint_accels(&j, Vec3::ZERO, &m).unwrap();
        let total: f64 = Leg::ALL
            .iter()
            .map(|&l| j[l].lambda_ddot.abs() + j[l].eps21.abs() + j[l].eps32.abs())
            .sum();
        assert!(total > 1e-6, "quadratic-rate terms missing");
    }

    #[test]
    fn near_singular_configuration_is_rejected() {
        let m = model();
        let mut j = JointStates::default();
        for leg in Leg::ALL {
            j[leg].phi32 = std::f64::consts::FRAC_PI_2; // bar folded onto the rod axis
        }
        assert!(matches!(
            joint_rates(&j, U1, &m),
            Err(Error::NearSingular { .. })
        ));
    }

    #[test]
    fn frozen_joints_give_zero_link_states() {
        let m = model();
        let j = inverse_geometry(Vec3::new(0.08, -0.02, 0.1), &m).unwrap();
        let states = link_states(Leg::B, &j[Leg::B], &m);
        for b in &states.bodies {
            assert_eq!(b.omega, Vec3::ZERO);
            assert_eq!(b.eps, Vec3::ZERO);
            assert_eq!(b.v, Vec3::ZERO);
            assert_eq!(b.gamma, Vec3::ZERO);
        }
    }

    #[test]
    fn slider_translates_along_its_axis() {
        let m = model();
        let mut j = inverse_geometry(Vec3::new(0.05, 0.1, -0.1), &m).unwrap();
        j[Leg::A].lambda_dot = 0.7;
        let states = link_states(Leg::A, &j[Leg::A], &m);
        assert_eq!(states.bodies[0].omega, Vec3::ZERO);
        assert!((states.bodies[0].v - U3 * 0.7).norm() < 1e-15);
    }

    #[test]
    fn platform_angular_state_vanishes() {
        let m = model();
        let r = Vec3::new(0.12, -0.18, 0.22);
        let j = inverse_geometry(r, &m).unwrap();
        let j = joint_rates(&j, Vec3::new(0.3, 0.1, -0.2), &m).unwrap();
        let j = joint_accels(&j, Vec3::new(-0.5, 0.2, 0.1), &m).unwrap();
        for leg in Leg::ALL {
            let states = link_states(leg, &j[leg], &m);
            assert!(states.bodies[4].omega.norm() < 1e-12);
            assert!(states.bodies[4].eps.norm() < 1e-12);
        }
    }

    #[test]
    fn chain_positions_close_the_loop() {
        let m = model();
        let r = Vec3::new(-0.07, 0.13, 0.04);
        let j = inverse_geometry(r, &m).unwrap();
        for leg in Leg::ALL {
            let frames = m.leg_frames(leg);
            let states = link_states(leg, &j[leg], &m);
            let g = states.mass_center_position(4, frames.r5g);
            assert!((g - r).norm() < 1e-14, "leg {leg} platform center off");
        }
    }

    #[test]
    fn virtual_set_a_moves_platform_along_x_at_center() {
        let m = model();
        let j = inverse_geometry(Vec3::ZERO, &m).unwrap();
        let vr = virtual_rates(&j, &m).unwrap();
        assert!((vr[Leg::A].platform_v - U1).norm() < 1e-12);
        assert!((vr[Leg::B].platform_v - U2).norm() < 1e-12);
        assert!((vr[Leg::C].platform_v - U3).norm() < 1e-12);
    }

    #[test]
    fn virtual_set_a_swings_legs_b_and_c_at_center() {
        // with the platform moving along x, leg B absorbs the motion in
        // phi32 and leg C in phi21, both at rate 1/l3; leg A stays straight
        let m = model();
        let j = inverse_geometry(Vec3::ZERO, &m).unwrap();
        let vr = virtual_rates(&j, &m).unwrap();
        let set = &vr[Leg::A];
        let inv_l3 = 1.0 / 0.85;
        assert!(set.omega21[Leg::A.idx()].abs() < 1e-12);
        assert!(set.omega32[Leg::A.idx()].abs() < 1e-12);
        assert!((set.omega32[Leg::B.idx()] - -inv_l3).abs() < 1e-12);
        assert!(set.omega21[Leg::B.idx()].abs() < 1e-12);
        assert!((set.omega21[Leg::C.idx()] - inv_l3).abs() < 1e-12);
        assert!(set.omega32[Leg::C.idx()].abs() < 1e-12);
    }

    #[test]
    fn virtual_sets_superpose_to_actual_rates() {
        let m = model();
        let r = Vec3::new(0.11, -0.09, 0.17);
        let v = Vec3::new(0.4, 0.25, -0.3);
        let j = joint_rates(&inverse_geometry(r, &m).unwrap(), v, &m).unwrap();
        let vr = virtual_rates(&j, &m).unwrap();
        let lam_dot = j.lambda_dots();
        for leg in Leg::ALL {
            let mut w21 = 0.0;
            let mut w32 = 0.0;
            for input in Leg::ALL {
                w21 += lam_dot[input.idx()] * vr[input].omega21[leg.idx()];
                w32 += lam_dot[input.idx()] * vr[input].omega32[leg.idx()];
            }
            assert!((w21 - j[leg].omega21).abs() < 1e-10);
            assert!((w32 - j[leg].omega32).abs() < 1e-10);
        }
    }

    #[test]
    fn virtual_platform_velocity_matches_jacobian_route() {
        // independent route: j2 * v = j1 * e_input
        let m = model();
        let r = Vec3::new(0.05, 0.21, -0.14);
        let j = inverse_geometry(r, &m).unwrap();
        let vr = virtual_rates(&j, &m).unwrap();
        let jac = jacobians(r, j.lambdas(), &m);
        for (input, e) in [(Leg::A, U1), (Leg::B, U2), (Leg::C, U3)] {
            let expect = solve3(&jac.j2, jac.j1 * e).unwrap();
            assert!((vr[input].platform_v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobian_identity_holds_for_consistent_rates() {
        let m = model();
        let r = Vec3::new(0.02, 0.16, -0.23);
        let v = Vec3::new(-0.15, 0.35, 0.2);
        let j = joint_rates(&inverse_geometry(r, &m).unwrap(), v, &m).unwrap();
        let jac = jacobians(r, j.lambdas(), &m);
        let lhs = jac.j1 * j.lambda_dots();
        let rhs = jac.j2 * v;
        assert!((lhs - rhs).norm() < 1e-10);
    }

    proptest! {
        #[test]
        fn round_trip_residuals_vanish(
            x in -0.3..0.3f64, y in -0.3..0.3f64, z in -0.3..0.3f64,
        ) {
            let m = model();
            let r = Vec3::new(x, y, z);
            let j = inverse_geometry(r, &m).unwrap();
            let res = constraint_residuals(r, j.lambdas(), &m);
            prop_assert!(res.norm_inf() < 1e-12);
        }

        #[test]
        fn platform_orientation_stays_on_target(
            x in -0.3..0.3f64, y in -0.3..0.3f64, z in -0.3..0.3f64,
        ) {
            let m = model();
            let j = inverse_geometry(Vec3::new(x, y, z), &m).unwrap();
            for leg in Leg::ALL {
                let frames = m.leg_frames(leg);
                let chain = ChainMatrices::new(&frames, j[leg].phi21, j[leg].phi32);
                let err = (frames.platform_target().transpose() * chain.a50
                    - Mat3::IDENTITY)
                    .max_abs();
                prop_assert!(err < 1e-12);
            }
        }
    }
}
