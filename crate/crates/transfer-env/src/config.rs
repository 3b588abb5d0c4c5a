//! Environment configuration: geometry, distractor modes, and the
//! domain-randomization exponent.
//!
//! All lengths share one unit; the arena is the square
//! `[-half_width, half_width]^2`. The defaults define the canonical task:
//! the cube spawns uniformly in a small box in front of the right gripper,
//! gets carried to a meet point in the upper half, and is handed to the left
//! gripper there.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::EnvError;
use crate::Result;

/// Fixed-mode distractor slots: six `(x, y, color)` rows scattered along the
/// top of the arena, away from the task region. Configurations with more
/// than six slots cycle through this table.
pub const FIXED_SLOT_TABLE: [[f64; 3]; 6] = [
    [-0.80, 0.60, 0.20],
    [-0.45, 0.70, 0.35],
    [-0.10, 0.55, 0.50],
    [0.25, 0.65, 0.65],
    [0.60, 0.75, 0.80],
    [0.85, 0.50, 0.95],
];

/// Gain of the action-correlated distractor encoding.
pub const ACTION_SLOT_SCALE: f64 = 2.0;
/// Offset of the action-correlated distractor encoding; nonzero so an
/// all-zero observation block is visibly out of distribution for a policy
/// that learned to read these slots.
pub const ACTION_SLOT_OFFSET: f64 = 0.1;

/// Support of the randomized-mode count distribution (counts `1..=6`).
pub const DR_COUNT_SUPPORT: usize = 6;

/// Width of the task-relevant observation prefix: cube position, gripper
/// positions, grip states. Everything past this index is a distractor slot.
pub const TASK_OBS_DIMS: usize = 8;

/// How the distractor slots behave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistractorMode {
    /// Slots hold the constant [`FIXED_SLOT_TABLE`] rows every episode.
    Fixed,
    /// Slots are all zero (the scene without the objects).
    Absent,
    /// A per-episode count is drawn from the power-weighted distribution,
    /// then that many slots get uniform positions and colors; the rest are
    /// zero.
    Randomized,
    /// Slots reproduce an affine encoding of the previous action at every
    /// step — a deliberate confound: the slots "explain" expert actions
    /// perfectly during demonstrations and vanish in absent-mode tests.
    ActionCorrelated,
}

impl fmt::Display for DistractorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DistractorMode::Fixed => "fixed",
            DistractorMode::Absent => "absent",
            DistractorMode::Randomized => "randomized",
            DistractorMode::ActionCorrelated => "action-correlated",
        };
        f.write_str(s)
    }
}

impl FromStr for DistractorMode {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(DistractorMode::Fixed),
            "absent" => Ok(DistractorMode::Absent),
            "randomized" => Ok(DistractorMode::Randomized),
            "action-correlated" => Ok(DistractorMode::ActionCorrelated),
            other => Err(EnvError::InvalidRequest(format!(
                "unknown distractor mode {other:?} (fixed|absent|randomized|action-correlated)"
            ))),
        }
    }
}

/// Exponent `k` of the count distribution `P(i) = i^k / sum_j j^k`: `0` is
/// uniform, larger values skew toward the full count, and the infinite
/// sentinel always yields the full count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DrExponent {
    Finite(f64),
    Infinite,
}

impl DrExponent {
    /// Validates the exponent (finite values must be `>= 0`).
    pub fn validate(&self) -> Result<()> {
        match self {
            DrExponent::Finite(k) if !k.is_finite() || *k < 0.0 => Err(
                EnvError::InvalidRequest(format!("exponent must be >= 0 or \"inf\", got {k}")),
            ),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for DrExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DrExponent::Finite(k) => write!(f, "{k}"),
            DrExponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for DrExponent {
    type Err = EnvError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(DrExponent::Infinite);
        }
        let k: f64 = s
            .parse()
            .map_err(|_| EnvError::InvalidRequest(format!("not an exponent: {s:?}")))?;
        let value = DrExponent::Finite(k);
        value.validate()?;
        Ok(value)
    }
}

impl Serialize for DrExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DrExponent::Finite(k) => serializer.serialize_f64(*k),
            DrExponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for DrExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;
        impl Visitor<'_> for ExpVisitor {
            type Value = DrExponent;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<DrExponent, E> {
                let value = DrExponent::Finite(v);
                value.validate().map_err(E::custom)?;
                Ok(value)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<DrExponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<DrExponent, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<DrExponent, E> {
                DrExponent::from_str(v).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(ExpVisitor)
    }
}

/// Full environment configuration. All fields have task defaults, so partial
/// JSON configs deserialize cleanly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// The arena is `[-arena_half_width, arena_half_width]^2`.
    pub arena_half_width: f64,
    /// Cube spawn box, lower corner.
    pub spawn_min: [f64; 2],
    /// Cube spawn box, upper corner.
    pub spawn_max: [f64; 2],
    /// Number of distractor slots `D`; the observation has `8 + 3 D` dims.
    pub n_distractors: usize,
    /// Distractor behavior.
    pub distractor_mode: DistractorMode,
    /// Count-distribution exponent for randomized mode.
    pub dr_exponent: DrExponent,
    /// Steps per episode `T`.
    pub episode_len: usize,
    /// Handoff location.
    pub meet_point: [f64; 2],
    /// A closed gripper within this distance of the cube grabs it.
    pub grasp_radius: f64,
    /// Handoff requires the carrying gripper within this distance of the
    /// meet point.
    pub meet_radius: f64,
    /// "Lifted" means the held cube's y is within this band of the meet
    /// point's y.
    pub lift_band: f64,
    /// Per-step speed limit (Euclidean norm of each gripper velocity).
    pub max_speed: f64,
    /// Right gripper start pose.
    pub right_home: [f64; 2],
    /// Left gripper start pose.
    pub left_home: [f64; 2],
    /// Master seed; per-episode seeds are mixed from it.
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            arena_half_width: 1.0,
            spawn_min: [0.15, -0.55],
            spawn_max: [0.55, -0.15],
            n_distractors: 6,
            distractor_mode: DistractorMode::Fixed,
            dr_exponent: DrExponent::Infinite,
            episode_len: 60,
            meet_point: [0.0, 0.35],
            grasp_radius: 0.06,
            meet_radius: 0.05,
            lift_band: 0.25,
            max_speed: 0.08,
            right_home: [0.7, -0.7],
            left_home: [-0.7, -0.7],
            seed: 0,
        }
    }
}

impl EnvConfig {
    /// Checks every documented range.
    pub fn validate(&self) -> Result<()> {
        let a = self.arena_half_width;
        if !a.is_finite() || a <= 0.0 {
            return Err(EnvError::InvalidConfig("arena half-width must be > 0".into()));
        }
        if self.episode_len < 1 {
            return Err(EnvError::InvalidConfig("episode length must be >= 1".into()));
        }
        if !(self.grasp_radius > 0.0) {
            return Err(EnvError::InvalidConfig("grasp radius must be > 0".into()));
        }
        if !(self.meet_radius > 0.0) || !(self.lift_band > 0.0) {
            return Err(EnvError::InvalidConfig("meet radius and lift band must be > 0".into()));
        }
        if !(self.max_speed > 0.0) {
            return Err(EnvError::InvalidConfig("max speed must be > 0".into()));
        }
        for d in 0..2 {
            if self.spawn_min[d] > self.spawn_max[d] {
                return Err(EnvError::InvalidConfig("spawn box has min > max".into()));
            }
            if self.spawn_min[d] < -a || self.spawn_max[d] > a {
                return Err(EnvError::InvalidConfig("spawn box outside arena".into()));
            }
        }
        for p in [self.meet_point, self.right_home, self.left_home] {
            if p.iter().any(|v| !v.is_finite() || v.abs() > a) {
                return Err(EnvError::InvalidConfig(
                    "meet point and home poses must lie inside the arena".into(),
                ));
            }
        }
        self.dr_exponent.validate()
    }

    /// Observation width: 8 task dims plus 3 per distractor slot.
    pub fn obs_dim(&self) -> usize {
        8 + 3 * self.n_distractors
    }

    /// Action width (two 2D velocities plus two grip commands).
    pub fn act_dim(&self) -> usize {
        6
    }

    /// Proprioceptive width (gripper poses plus grip states).
    pub fn joints_dim(&self) -> usize {
        6
    }
}
