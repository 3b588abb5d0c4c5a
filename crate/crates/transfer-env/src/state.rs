//! Environment state, actions, and the staged reward.

use serde::{Deserialize, Serialize};

use crate::config::EnvConfig;
use crate::error::EnvError;
use crate::Result;

/// Who is holding the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Holder {
    Free,
    Right,
    Left,
}

/// One control step: planar velocities for both grippers plus grip commands.
/// Construction clamps grip commands into `[0, 1]`; velocity clipping to the
/// speed limit happens inside `step` because the limit lives in the config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub right_velocity: [f64; 2],
    pub left_velocity: [f64; 2],
    pub right_grip: f64,
    pub left_grip: f64,
}

impl Action {
    /// Zero velocities, both grips open.
    pub fn idle() -> Self {
        Self { right_velocity: [0.0; 2], left_velocity: [0.0; 2], right_grip: 0.0, left_grip: 0.0 }
    }

    /// Builds an action from the flat 6-vector layout
    /// `[v_rx, v_ry, v_lx, v_ly, grip_r, grip_l]`, clamping grips to `[0,1]`.
    /// Non-finite components are refused.
    pub fn from_vector(v: &[f64]) -> Result<Self> {
        if v.len() != 6 {
            return Err(EnvError::InvalidRequest(format!(
                "action vector has {} dims, expected 6",
                v.len()
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(EnvError::NonFiniteAction);
        }
        Ok(Self {
            right_velocity: [v[0], v[1]],
            left_velocity: [v[2], v[3]],
            right_grip: v[4].clamp(0.0, 1.0),
            left_grip: v[5].clamp(0.0, 1.0),
        })
    }

    /// Flat 6-vector layout `[v_rx, v_ry, v_lx, v_ly, grip_r, grip_l]`.
    pub fn to_vector(&self) -> [f64; 6] {
        [
            self.right_velocity[0],
            self.right_velocity[1],
            self.left_velocity[0],
            self.left_velocity[1],
            self.right_grip,
            self.left_grip,
        ]
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|x| x.is_finite())
    }
}

/// The four task milestones. Within an episode they only ever switch on, and
/// they cascade: reaching a later stage sets every earlier one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFlags {
    pub touched: bool,
    pub lifted: bool,
    pub attempted_transfer: bool,
    pub transferred: bool,
}

impl StageFlags {
    /// Checks the monotone ladder
    /// `transferred => attempted_transfer => lifted => touched`.
    pub fn validate(&self) -> Result<()> {
        let ladder_ok = (!self.transferred || self.attempted_transfer)
            && (!self.attempted_transfer || self.lifted)
            && (!self.lifted || self.touched);
        if ladder_ok {
            Ok(())
        } else {
            Err(EnvError::InvalidFlags(format!("{self:?}")))
        }
    }

    /// Merges newly observed milestones, cascading each one down the ladder
    /// so the invariant holds mechanically.
    pub(crate) fn raise(
        &mut self,
        touched: bool,
        lifted: bool,
        attempted_transfer: bool,
        transferred: bool,
    ) {
        self.transferred |= transferred;
        self.attempted_transfer |= attempted_transfer || self.transferred;
        self.lifted |= lifted || self.attempted_transfer;
        self.touched |= touched || self.lifted;
    }
}

/// Staged episode score: 0 for nothing, then 1–4 for touch, lift, transfer
/// attempt, and completed transfer. Flags must satisfy the ladder.
pub fn episode_reward(flags: &StageFlags) -> Result<u8> {
    flags.validate()?;
    Ok(if flags.transferred {
        4
    } else if flags.attempted_transfer {
        3
    } else if flags.lifted {
        2
    } else if flags.touched {
        1
    } else {
        0
    })
}

/// Full environment state. States are plain values: `step` consumes one and
/// returns the next, so trajectories are replayable and bit-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub(crate) config: EnvConfig,
    pub right_pos: [f64; 2],
    pub left_pos: [f64; 2],
    pub right_closed: bool,
    pub left_closed: bool,
    pub cube_pos: [f64; 2],
    pub held_by: Holder,
    /// `(x, y, color)` per slot, flattened.
    pub slot_values: Vec<f64>,
    /// The last applied action as its flat 6-vector (zeros before any step).
    pub prev_action: [f64; 6],
    pub step_index: usize,
    pub flags: StageFlags,
}

impl EnvState {
    /// The configuration this state was created under.
    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// True once `step_index` reaches the episode length.
    pub fn finished(&self) -> bool {
        self.step_index >= self.config.episode_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reward_climbs_the_ladder() {
        let mut flags = StageFlags::default();
        assert_eq!(episode_reward(&flags).unwrap(), 0);
        flags.touched = true;
        assert_eq!(episode_reward(&flags).unwrap(), 1);
        flags.lifted = true;
        assert_eq!(episode_reward(&flags).unwrap(), 2);
        flags.attempted_transfer = true;
        assert_eq!(episode_reward(&flags).unwrap(), 3);
        flags.transferred = true;
        assert_eq!(episode_reward(&flags).unwrap(), 4);
    }

    #[test]
    fn ladder_violations_are_errors() {
        let broken = StageFlags { lifted: true, ..StageFlags::default() };
        assert!(matches!(episode_reward(&broken), Err(EnvError::InvalidFlags(_))));
        let broken = StageFlags {
            touched: true,
            lifted: true,
            transferred: true,
            ..StageFlags::default()
        };
        assert!(episode_reward(&broken).is_err());
    }

    #[test]
    fn raise_cascades_down_the_ladder() {
        let mut flags = StageFlags::default();
        flags.raise(false, false, true, false);
        assert!(flags.touched && flags.lifted && flags.attempted_transfer && !flags.transferred);
        flags.validate().unwrap();
        let mut flags = StageFlags::default();
        flags.raise(false, false, false, true);
        assert_eq!(episode_reward(&flags).unwrap(), 4);
    }

    #[test]
    fn raise_never_clears() {
        let mut flags = StageFlags::default();
        flags.raise(true, true, false, false);
        let before = flags;
        flags.raise(false, false, false, false);
        assert_eq!(flags, before);
    }

    #[test]
    fn action_vector_round_trips_and_clamps_grips() {
        let a = Action::from_vector(&[0.01, -0.02, 0.03, -0.04, 1.7, -0.3]).unwrap();
        assert_eq!(a.right_grip, 1.0);
        assert_eq!(a.left_grip, 0.0);
        assert_eq!(a.to_vector()[..4], [0.01, -0.02, 0.03, -0.04]);
        assert!(Action::from_vector(&[f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        assert!(Action::from_vector(&[0.0; 5]).is_err());
    }
}
