//! Virtual-work inverse dynamics: per-body inertia and gravity wrenches,
//! recursive accumulation along each cut-open chain, and actuator forces
//! and powers.
//!
//! Each closed loop is opened into a tree per leg: slider -> rod -> bar ->
//! coupler, with the second bar hanging from the rod as a leaf. The moving
//! platform rides on leg A's coupler; legs B and C reach it only through
//! their virtual joint rates. Constraint-cut reaction forces never appear:
//! pairing each joint's accumulated moment with that joint's virtual rate
//! eliminates them.

use crate::error::Result;
use crate::kinematics::{
    joint_accels, joint_rates, link_states, virtual_rates, inverse_geometry, JointStates,
    LegLinkStates, LinkKinematics, PlatformState, VirtualRates,
};
use crate::math::{Mat3, Vec3, U3};
use crate::model::{BodyProps, Leg, RobotModel};

/// Force/moment pair in a body frame, moment about the body's first joint.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Wrench {
    pub f: Vec3,
    pub m: Vec3,
}

impl Wrench {
    pub const ZERO: Wrench = Wrench {
        f: Vec3::ZERO,
        m: Vec3::ZERO,
    };
}

/// Inertia and applied (gravity) wrenches of one body, plus its mass-center
/// offset in the body frame.
#[derive(Debug, Clone, Copy)]
pub struct BodyLoad {
    pub inertia: Wrench,
    pub applied: Wrench,
    pub mass_center: Vec3,
}

impl BodyLoad {
    pub const ZERO: BodyLoad = BodyLoad {
        inertia: Wrench::ZERO,
        applied: Wrench::ZERO,
        mass_center: Vec3::ZERO,
    };
}

/// Joint state, force and power of one actuator.
#[derive(Debug, Clone, Copy)]
pub struct ActuatorOutput {
    pub lambda: f64,
    pub lambda_dot: f64,
    pub lambda_ddot: f64,
    /// Slider force along its guide-way, N.
    pub force: f64,
    /// Mechanical power `lambda_dot * force`, W.
    pub power: f64,
}

/// Inertia wrench of a body about its first joint, in its own frame:
///
/// ```text
/// f_in = -m [gamma + (~w ~w + ~e) r_c]
/// m_in = -[m ~r_c gamma + J e + ~w J w]
/// ```
///
/// with `J` the inertia tensor about the link origin.
pub fn inertia_wrench(body: &LinkKinematics, props: &BodyProps) -> Wrench {
    let w = body.omega;
    let spin_accel = w.cross(w.cross(props.mass_center)) + body.eps.cross(props.mass_center);
    let f = -(body.gamma + spin_accel) * props.mass;
    let m = -(props.mass_center.cross(body.gamma) * props.mass
        + props.inertia * body.eps
        + w.cross(props.inertia * w));
    Wrench { f, m }
}

/// Weight wrench of a body in its own frame: the fixed-frame gravity vector
/// `g * g_dir` mapped through the body orientation, applied at the mass
/// center.
pub fn gravity_wrench(rot: &Mat3, props: &BodyProps, g: f64, g_dir: Vec3) -> Wrench {
    let f = (*rot * g_dir) * (g * props.mass);
    Wrench {
        f,
        m: props.mass_center.cross(f),
    }
}

/// Inertia and gravity loads for bodies 1..=6 of one leg. For legs B and C
/// the platform entry (body 5) is zeroed; the platform belongs to chain A.
pub fn body_loads(states: &LegLinkStates, model: &RobotModel) -> [BodyLoad; 6] {
    let props = model.body_props();
    let ms = &model.masses;
    let mut out = [BodyLoad::ZERO; 6];
    for k in 0..6 {
        if states.leg != Leg::A && k == 4 {
            continue;
        }
        out[k] = BodyLoad {
            inertia: inertia_wrench(&states.bodies[k], &props[k]),
            applied: gravity_wrench(&states.bodies[k].rot, &props[k], ms.g, ms.g_dir),
            mass_center: props[k].mass_center,
        };
    }
    out
}

fn transport(acc: &mut Wrench, a_rel: &Mat3, r_rel: Vec3, child: &Wrench) {
    let f = a_rel.transpose() * child.f;
    acc.f = acc.f + f;
    acc.m = acc.m + a_rel.transpose() * child.m + r_rel.cross(f);
}

/// Leaf-to-root recursion over one opened chain. Each entry starts from the
/// body's negated load sum and absorbs its children:
///
/// ```text
/// f_k = f_k0 + a_{k+1,k}^T f_{k+1}
/// m_k = m_k0 + a_{k+1,k}^T m_{k+1} + ~r_{k+1,k} a_{k+1,k}^T f_{k+1}
/// ```
///
/// with `f_k0 = -(f_in + f_applied)`. Returns the accumulated wrench carried
/// at each body's first joint, indexed like `states.bodies`.
pub fn accumulate_wrenches(
    states: &LegLinkStates,
    loads: &[BodyLoad; 6],
    model: &RobotModel,
) -> [Wrench; 6] {
    let frames = model.leg_frames(states.leg);
    let chain = &states.chain;
    let mut acc: [Wrench; 6] = std::array::from_fn(|k| Wrench {
        f: -(loads[k].inertia.f + loads[k].applied.f),
        m: -(loads[k].inertia.m + loads[k].applied.m),
    });

    // platform -> coupler (chain A only carries a live platform load;
    // elsewhere the entry is zero and the transport is a no-op)
    let platform = acc[4];
    transport(&mut acc[3], &chain.a54, frames.r54, &platform);
    // coupler -> bar
    let coupler = acc[3];
    transport(&mut acc[2], &chain.a43, frames.r43, &coupler);
    // bar and second bar -> rod
    let bar = acc[2];
    transport(&mut acc[1], &chain.a32, frames.r32, &bar);
    let second_bar = acc[5];
    transport(&mut acc[1], &chain.a32, frames.r62, &second_bar);
    // rod -> slider
    let rod = acc[1];
    transport(&mut acc[0], &chain.a21, frames.r21, &rod);
    acc
}

/// Actuator forces by the principle of virtual work: for each unit-slider
/// virtual set, sum every joint's virtual rate times the z-component of the
/// accumulated wrench that joint carries (force for the prismatic joints,
/// moment for the revolutes).
pub fn actuator_forces(
    joints: &JointStates,
    virt: &VirtualRates,
    model: &RobotModel,
) -> Vec3 {
    let mut acc_per_leg = [[Wrench::ZERO; 6]; 3];
    for leg in Leg::ALL {
        let states = link_states(leg, &joints[leg], model);
        let loads = body_loads(&states, model);
        acc_per_leg[leg.idx()] = accumulate_wrenches(&states, &loads, model);
    }

    let mut forces = Vec3::ZERO;
    for input in Leg::ALL {
        let set = &virt[input];
        let mut total = 0.0;
        for leg in Leg::ALL {
            let acc = &acc_per_leg[leg.idx()];
            let li = leg.idx();
            total += set.v10[li] * U3.dot(acc[0].f);
            total += set.omega21[li] * U3.dot(acc[1].m);
            total += set.omega32[li] * U3.dot(acc[2].m + acc[3].m + acc[5].m);
            if leg == Leg::A {
                total += set.omega54[li] * U3.dot(acc[4].m);
            }
        }
        forces[input.idx()] = total;
    }
    forces
}

/// Componentwise actuator powers `p_j = f_j * lambda_dot_j`.
pub fn actuator_powers(forces: Vec3, rates: Vec3) -> Vec3 {
    Vec3::new(forces.x * rates.x, forces.y * rates.y, forces.z * rates.z)
}

/// Full inverse-dynamics pipeline for one platform state: inverse geometry,
/// joint rates and accelerations, link states, wrench accumulation and the
/// virtual-work force sum.
pub fn solve_actuators(
    state: &PlatformState,
    model: &RobotModel,
) -> Result<(JointStates, [ActuatorOutput; 3])> {
    let joints = inverse_geometry(state.r, model)?;
    let joints = joint_rates(&joints, state.v, model)?;
    let joints = joint_accels(&joints, state.a, model)?;
    let virt = virtual_rates(&joints, model)?;
    let forces = actuator_forces(&joints, &virt, model);
    let rates = joints.lambda_dots();
    let powers = actuator_powers(forces, rates);
    let outputs = std::array::from_fn(|i| ActuatorOutput {
        lambda: joints.0[i].lambda,
        lambda_dot: joints.0[i].lambda_dot,
        lambda_ddot: joints.0[i].lambda_ddot,
        force: forces[i],
        power: powers[i],
    });
    Ok((joints, outputs))
}
