//! End-to-end simulation sweeps and CSV emission.

use std::io::Write;
use std::path::Path;

use crate::dynamics::solve_actuators;
use crate::error::{Error, Result};
use crate::math::Vec3;
use crate::model::{Leg, RobotModel};
use crate::trajectory::CosineTrajectory;

/// One fully solved trajectory sample. Per-leg triples are ordered A, B, C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationRow {
    pub t: f64,
    pub r: Vec3,
    pub lambda: Vec3,
    pub lambda_dot: Vec3,
    pub lambda_ddot: Vec3,
    pub phi21: Vec3,
    pub phi32: Vec3,
    pub force: Vec3,
    pub power: Vec3,
}

pub const CSV_HEADER: &str = "t,x,y,z,lamA,lamB,lamC,dlamA,dlamB,dlamC,ddlamA,ddlamB,ddlamC,\
phi21A,phi32A,phi21B,phi32B,phi21C,phi32C,fA,fB,fC,pA,pB,pC";

/// Run the full pipeline (inverse geometry, rates, accelerations, link
/// states, loads, wrenches, forces, powers) at `samples` uniform times on
/// `[0, t_end]`. Fails with the offending time attached when a sample
/// leaves the workspace or hits a singularity.
pub fn simulate(
    model: &RobotModel,
    traj: &CosineTrajectory,
    t_end: f64,
    samples: usize,
) -> Result<Vec<SimulationRow>> {
    assert!(samples >= 2, "need at least two samples");
    assert!(t_end > 0.0, "sweep window must be positive");
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        let state = traj.state(t);
        let (joints, outputs) = solve_actuators(&state, model).map_err(|e| e.at_time(t))?;
        let per_leg = |f: &dyn Fn(Leg) -> f64| {
            Vec3::new(f(Leg::A), f(Leg::B), f(Leg::C))
        };
        rows.push(SimulationRow {
            t,
            r: state.r,
            lambda: joints.lambdas(),
            lambda_dot: joints.lambda_dots(),
            lambda_ddot: joints.lambda_ddots(),
            phi21: per_leg(&|l| joints[l].phi21),
            phi32: per_leg(&|l| joints[l].phi32),
            force: Vec3::new(outputs[0].force, outputs[1].force, outputs[2].force),
            power: Vec3::new(outputs[0].power, outputs[1].power, outputs[2].power),
        });
    }
    Ok(rows)
}

/// Format in `%.9e` style: nine fractional digits, explicit exponent sign,
/// at least two exponent digits.
pub fn fmt_e9(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    let s = format!("{x:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    format!(
        "{}e{}{:02}",
        mantissa,
        if e < 0 { '-' } else { '+' },
        e.abs()
    )
}

fn push_vec3(out: &mut String, v: Vec3) {
    for i in 0..3 {
        out.push(',');
        out.push_str(&fmt_e9(v[i]));
    }
}

/// Render rows as a deterministic CSV document: fixed header, `%.9e`
/// values, LF line endings.
pub fn csv_string(rows: &[SimulationRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 420);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_e9(row.t));
        push_vec3(&mut out, row.r);
        push_vec3(&mut out, row.lambda);
        push_vec3(&mut out, row.lambda_dot);
        push_vec3(&mut out, row.lambda_ddot);
        let mut angles = String::new();
        for leg in 0..3 {
            angles.push(',');
            angles.push_str(&fmt_e9(row.phi21[leg]));
            angles.push(',');
            angles.push_str(&fmt_e9(row.phi32[leg]));
        }
        out.push_str(&angles);
        push_vec3(&mut out, row.force);
        push_vec3(&mut out, row.power);
        out.push('\n');
    }
    out
}

/// Write the CSV document to `path` (UTF-8, LF).
pub fn emit_csv(rows: &[SimulationRow], path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(csv_string(rows).as_bytes())?;
    Ok(())
}

/// Parse a document produced by [`csv_string`] back into rows.
pub fn parse_csv(text: &str) -> Result<Vec<SimulationRow>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::MalformedCsv {
        line: 1,
        detail: "empty document".into(),
    })?;
    if header.trim_end() != CSV_HEADER {
        return Err(Error::MalformedCsv {
            line: 1,
            detail: "unexpected header".into(),
        });
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut values = [0.0f64; 25];
        let mut count = 0;
        for (k, field) in line.split(',').enumerate() {
            if k >= 25 {
                count = k + 1;
                break;
            }
            values[k] = field.trim().parse().map_err(|_| Error::MalformedCsv {
                line: idx + 1,
                detail: format!("cannot parse field {} (`{}`)", k + 1, field.trim()),
            })?;
            count = k + 1;
        }
        if count != 25 {
            return Err(Error::MalformedCsv {
                line: idx + 1,
                detail: format!("expected 25 fields, found {count}"),
            });
        }
        let v3 = |o: usize| Vec3::new(values[o], values[o + 1], values[o + 2]);
        rows.push(SimulationRow {
            t: values[0],
            r: v3(1),
            lambda: v3(4),
            lambda_dot: v3(7),
            lambda_ddot: v3(10),
            phi21: Vec3::new(values[13], values[15], values[17]),
            phi32: Vec3::new(values[14], values[16], values[18]),
            force: v3(19),
            power: v3(22),
        });
    }
    Ok(rows)
}
