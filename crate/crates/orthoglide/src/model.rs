//! Physical parameters and the constant frame data defining the three legs.
//!
//! Each leg is a PRPaR chain: an actuated slider (body 1), a transmission rod
//! (body 2), two parallel bars (bodies 3 and 6), a closing element (body 4)
//! and the moving platform (body 5). Bodies are numbered 1..=6 and addressed
//! with 0-based indices in per-leg arrays.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::math::{Mat3, Vec3, U2, U3};

/// Leg identifier. Legs A, B and C actuate along the fixed x, y and z axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    A,
    B,
    C,
}

impl Leg {
    pub const ALL: [Leg; 3] = [Leg::A, Leg::B, Leg::C];

    pub fn idx(self) -> usize {
        match self {
            Leg::A => 0,
            Leg::B => 1,
            Leg::C => 2,
        }
    }
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leg::A => "A",
            Leg::B => "B",
            Leg::C => "C",
        })
    }
}

impl FromStr for Leg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Leg::A),
            "B" | "b" => Ok(Leg::B),
            "C" | "c" => Ok(Leg::C),
            other => Err(Error::UnknownLeg(other.to_string())),
        }
    }
}

/// Link lengths and slider orientation. SI units (m, rad) throughout.
#[derive(Debug, Clone, Copy)]
pub struct RobotGeometry {
    /// Platform cube side.
    pub l: f64,
    /// Slider rod length.
    pub l1: f64,
    /// Transmission rod length.
    pub l2: f64,
    /// Parallelogram bar length.
    pub l3: f64,
    /// Coupler length; always equal to `l2`.
    pub l4: f64,
    /// Slider orientation angle about its guide-way.
    pub alpha: f64,
}

impl RobotGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("l", self.l),
            ("l1", self.l1),
            ("l2", self.l2),
            ("l3", self.l3),
            ("l4", self.l4),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::MalformedConfig {
                    line: 0,
                    detail: format!("length {name} must be positive and finite, got {v}"),
                });
            }
        }
        if !self.alpha.is_finite() {
            return Err(Error::MalformedConfig {
                line: 0,
                detail: "alpha must be finite".into(),
            });
        }
        if self.l4 != self.l2 {
            return Err(Error::MalformedConfig {
                line: 0,
                detail: format!("l4 must equal l2, got l4 = {}, l2 = {}", self.l4, self.l2),
            });
        }
        Ok(())
    }
}

/// Masses, body-frame inertia tensors and gravity.
///
/// `j2`, `j3`, `j4` are expressed about the body's own link origin in its
/// link frame; `jg` is the platform's central tensor. The tensors are public
/// so callers can substitute measured values for the slender-rod defaults.
#[derive(Debug, Clone, Copy)]
pub struct MassProperties {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    pub m6: f64,
    pub j2: Mat3,
    pub j3: Mat3,
    pub j4: Mat3,
    pub jg: Mat3,
    /// Gravity magnitude, m/s^2.
    pub g: f64,
    /// Unit gravity direction in the fixed frame.
    pub g_dir: Vec3,
}

impl MassProperties {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m1", self.m1),
            ("m2", self.m2),
            ("m3", self.m3),
            ("m4", self.m4),
            ("m5", self.m5),
            ("m6", self.m6),
        ] {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::MalformedConfig {
                    line: 0,
                    detail: format!("mass {name} must be positive and finite, got {v}"),
                });
            }
        }
        if self.g < 0.0 || !self.g.is_finite() {
            return Err(Error::MalformedConfig {
                line: 0,
                detail: format!("g must be non-negative, got {}", self.g),
            });
        }
        if (self.g_dir.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::MalformedConfig {
                line: 0,
                detail: "g_dir must be a unit vector".into(),
            });
        }
        Ok(())
    }
}

/// Inertia tensors derived from homogeneous-body assumptions.
#[derive(Debug, Clone, Copy)]
pub struct InertiaSet {
    pub j2: Mat3,
    pub j3: Mat3,
    pub j4: Mat3,
    pub jg: Mat3,
}

/// Slender-rod / homogeneous-cube inertia tensors about each body's link
/// origin:
///
/// * transmission rod (body 2): length `l2` along z2, origin at its midpoint,
///   `m * l2^2 / 12` on the transverse axes;
/// * parallelogram bar (body 3): length `l3` along y3, origin at its end
///   joint, `m * l3^2 / 3` on the transverse axes;
/// * closing element (body 4): length `l2` along x4, origin at its midpoint,
///   `m * l2^2 / 12` on the transverse axes;
/// * platform (body 5): homogeneous cube of side `l`, central tensor
///   `(m * l^2 / 6) * I`.
pub fn inertia_from_geometry(
    geom: &RobotGeometry,
    m2: f64,
    m3: f64,
    m4: f64,
    m5: f64,
) -> InertiaSet {
    let t2 = m2 * geom.l2 * geom.l2 / 12.0;
    let t3 = m3 * geom.l3 * geom.l3 / 3.0;
    let t4 = m4 * geom.l2 * geom.l2 / 12.0;
    let tg = m5 * geom.l * geom.l / 6.0;
    InertiaSet {
        j2: Mat3::diag(t2, t2, 0.0),
        j3: Mat3::diag(t3, 0.0, t3),
        j4: Mat3::diag(0.0, t4, t4),
        jg: Mat3::diag(tg, tg, tg),
    }
}

/// Complete immutable robot description.
#[derive(Debug, Clone, Copy)]
pub struct RobotModel {
    pub geometry: RobotGeometry,
    pub masses: MassProperties,
}

impl Default for RobotModel {
    /// The reference parameter set: l = 0.20 m, l1 = 0.15 m, l2 = l4 = 0.08 m,
    /// l3 = 0.85 m, alpha = pi/4, m1 = 0.35 kg, m2 = m4 = 0.2 kg,
    /// m3 = m6 = 2.5 kg, m5 = 15 kg, gravity 9.81 m/s^2 along -z.
    fn default() -> Self {
        let geometry = RobotGeometry {
            l: 0.20,
            l1: 0.15,
            l2: 0.08,
            l3: 0.85,
            l4: 0.08,
            alpha: std::f64::consts::FRAC_PI_4,
        };
        let (m1, m2, m3, m5) = (0.35, 0.2, 2.5, 15.0);
        let (m4, m6) = (m2, m3);
        let inertia = inertia_from_geometry(&geometry, m2, m3, m4, m5);
        RobotModel {
            geometry,
            masses: MassProperties {
                m1,
                m2,
                m3,
                m4,
                m5,
                m6,
                j2: inertia.j2,
                j3: inertia.j3,
                j4: inertia.j4,
                jg: inertia.jg,
                g: 9.81,
                g_dir: Vec3::new(0.0, 0.0, -1.0),
            },
        }
    }
}

impl RobotModel {
    /// Parse a plain-text `key=value` parameter file (one pair per line,
    /// `#` comments). Recognized keys: `l, l1, l2, l3, alpha, m1..m6, g`.
    /// Unset keys keep their default values; `m4` tracks `m2` and `m6`
    /// tracks `m3` unless set explicitly. Inertia tensors are rebuilt from
    /// the resulting geometry and masses.
    pub fn from_config_str(text: &str) -> Result<RobotModel> {
        let defaults = RobotModel::default();
        let mut geom = defaults.geometry;
        let mut m = [
            defaults.masses.m1,
            defaults.masses.m2,
            defaults.masses.m3,
            defaults.masses.m4,
            defaults.masses.m5,
            defaults.masses.m6,
        ];
        let mut m4_explicit = false;
        let mut m6_explicit = false;
        let mut g = defaults.masses.g;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::MalformedConfig {
                line: lineno + 1,
                detail: format!("expected key=value, got `{line}`"),
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| Error::MalformedConfig {
                line: lineno + 1,
                detail: format!("cannot parse `{}` as a number", value.trim()),
            })?;
            match key {
                "l" => geom.l = value,
                "l1" => geom.l1 = value,
                "l2" => geom.l2 = value,
                "l3" => geom.l3 = value,
                "alpha" => geom.alpha = value,
                "m1" => m[0] = value,
                "m2" => m[1] = value,
                "m3" => m[2] = value,
                "m4" => {
                    m[3] = value;
                    m4_explicit = true;
                }
                "m5" => m[4] = value,
                "m6" => {
                    m[5] = value;
                    m6_explicit = true;
                }
                "g" => g = value,
                other => {
                    return Err(Error::MalformedConfig {
                        line: lineno + 1,
                        detail: format!("unknown key `{other}`"),
                    })
                }
            }
        }

        geom.l4 = geom.l2;
        if !m4_explicit {
            m[3] = m[1];
        }
        if !m6_explicit {
            m[5] = m[2];
        }
        let inertia = inertia_from_geometry(&geom, m[1], m[2], m[3], m[4]);
        let model = RobotModel {
            geometry: geom,
            masses: MassProperties {
                m1: m[0],
                m2: m[1],
                m3: m[2],
                m4: m[3],
                m5: m[4],
                m6: m[5],
                j2: inertia.j2,
                j3: inertia.j3,
                j4: inertia.j4,
                jg: inertia.jg,
                g,
                g_dir: defaults.masses.g_dir,
            },
        };
        model.geometry.validate()?;
        model.masses.validate()?;
        Ok(model)
    }

    pub fn from_config_file(path: &Path) -> Result<RobotModel> {
        let text = std::fs::read_to_string(path)?;
        RobotModel::from_config_str(&text)
    }

    pub fn leg_frames(&self, leg: Leg) -> LegFrames {
        LegFrames::new(leg, &self.geometry)
    }

    /// Mass, mass-center offset and link-origin inertia tensor for bodies
    /// 1..=6 of a leg (identical local data for every leg).
    pub fn body_props(&self) -> [BodyProps; 6] {
        let g = &self.geometry;
        let ms = &self.masses;
        let r21 = Vec3::new(0.0, g.l1 * g.alpha.sin(), g.l1 * g.alpha.cos());
        let bar_center = U2 * (-g.l3 / 2.0);
        let platform_center = Vec3::new(g.l1 * g.alpha.sin(), -g.l / 2.0, 0.0);
        [
            // slider: translates only, so its tensor never enters the dynamics
            BodyProps::new(ms.m1, r21 * 0.5, Mat3::ZERO),
            BodyProps::new(ms.m2, Vec3::ZERO, ms.j2),
            BodyProps::new(ms.m3, bar_center, ms.j3),
            BodyProps::new(ms.m4, Vec3::ZERO, ms.j4),
            BodyProps::new(
                ms.m5,
                platform_center,
                parallel_axis(&ms.jg, ms.m5, platform_center),
            ),
            BodyProps::new(ms.m6, bar_center, ms.j3),
        ]
    }
}

/// Shift a central inertia tensor to a point at offset `-r_c` from the mass
/// center, i.e. return the tensor about the link origin when the mass center
/// sits at `r_c`.
pub fn parallel_axis(central: &Mat3, mass: f64, r_c: Vec3) -> Mat3 {
    let shift = Mat3::diag(r_c.dot(r_c), r_c.dot(r_c), r_c.dot(r_c)) - outer(r_c, r_c);
    *central + shift.scale(mass)
}

fn outer(a: Vec3, b: Vec3) -> Mat3 {
    Mat3([
        [a.x * b.x, a.x * b.y, a.x * b.z],
        [a.y * b.x, a.y * b.y, a.y * b.z],
        [a.z * b.x, a.z * b.y, a.z * b.z],
    ])
}

/// Per-body mass data in the body's link frame.
#[derive(Debug, Clone, Copy)]
pub struct BodyProps {
    pub mass: f64,
    /// Mass-center offset from the link origin, link frame.
    pub mass_center: Vec3,
    /// Inertia tensor about the link origin, link frame.
    pub inertia: Mat3,
}

impl BodyProps {
    fn new(mass: f64, mass_center: Vec3, inertia: Mat3) -> Self {
        BodyProps {
            mass,
            mass_center,
            inertia,
        }
    }
}

// Constant frame-alignment matrices of the leg chains. `BASE_*` orient each
// leg's slider guide-way; `ALIGN_*` sit between consecutive link frames so
// that every joint variable is a rotation about the local z axis.
const BASE_LEG_A: Mat3 = Mat3::new([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]);
const BASE_LEG_B: Mat3 = Mat3::new([[-1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
const BASE_LEG_C: Mat3 = Mat3::new([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
const ALIGN_ROD: Mat3 = Mat3::new([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]);
const ALIGN_BAR: Mat3 = Mat3::new([[0.0, 0.0, -1.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
const ALIGN_COUPLER: Mat3 = Mat3::new([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]]);

// Constant platform orientation per leg: the composed chain rotation at any
// reachable configuration (it is configuration-independent, which is what
// keeps the platform in pure translation).
const PLATFORM_TARGET_A: Mat3 = Mat3::new([[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]);
const PLATFORM_TARGET_B: Mat3 = Mat3::new([[0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]]);
const PLATFORM_TARGET_C: Mat3 = Mat3::new([[-1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]]);

/// The three constant platform orientation targets, indexed by leg.
pub fn platform_target_frames() -> [Mat3; 3] {
    [PLATFORM_TARGET_A, PLATFORM_TARGET_B, PLATFORM_TARGET_C]
}

/// Constant matrices and offset vectors of one leg chain.
///
/// Offsets are position vectors of each body's first joint relative to the
/// parent's first joint, expressed in the parent's link frame. All three
/// legs share the same local data; only the base orientation differs.
#[derive(Debug, Clone, Copy)]
pub struct LegFrames {
    pub leg: Leg,
    /// Slider guide-way orientation (frame 1 relative to the fixed frame).
    pub base: Mat3,
    pub align21: Mat3,
    pub align32: Mat3,
    pub align43: Mat3,
    pub align54: Mat3,
    /// Transmission-rod joint relative to the slider origin (frame 1).
    pub r21: Vec3,
    /// First bar joint relative to the rod center (frame 2).
    pub r32: Vec3,
    /// Coupler joint relative to the bar origin (frame 3).
    pub r43: Vec3,
    /// Platform joint relative to the coupler origin (frame 4).
    pub r54: Vec3,
    /// Platform mass center relative to the platform joint (frame 5).
    pub r5g: Vec3,
    /// Second bar joint relative to the rod center (frame 2).
    pub r62: Vec3,
    /// Slider travel direction in the fixed frame.
    pub slider_axis: Vec3,
    slider_offset: f64,
}

impl LegFrames {
    fn new(leg: Leg, geom: &RobotGeometry) -> Self {
        let base = match leg {
            Leg::A => BASE_LEG_A,
            Leg::B => BASE_LEG_B,
            Leg::C => BASE_LEG_C,
        };
        let (sa, ca) = geom.alpha.sin_cos();
        LegFrames {
            leg,
            base,
            align21: ALIGN_ROD,
            align32: ALIGN_BAR,
            align43: ALIGN_COUPLER,
            align54: ALIGN_ROD,
            r21: Vec3::new(0.0, geom.l1 * sa, geom.l1 * ca),
            r32: U3 * (-geom.l2 / 2.0),
            r43: U2 * (-geom.l3),
            r54: Vec3::new(geom.l2 / 2.0, 0.0, 0.0),
            r5g: Vec3::new(geom.l1 * sa, -geom.l / 2.0, 0.0),
            r62: U3 * (geom.l2 / 2.0),
            slider_axis: base.transpose() * U3,
            slider_offset: geom.l1 * ca + geom.l3 + geom.l / 2.0,
        }
    }

    /// Fixed-frame position of the slider joint for displacement `lambda`.
    pub fn slider_origin(&self, lambda: f64) -> Vec3 {
        self.slider_axis * (lambda - self.slider_offset)
    }

    /// The leg's constant platform orientation target.
    pub fn platform_target(&self) -> Mat3 {
        platform_target_frames()[self.leg.idx()]
    }
}
