//! Scripted expert controller.
//!
//! A deterministic phase machine with full access to the ground-truth state:
//! approach the cube with the right gripper, close, carry it to the meet
//! point while the left gripper moves there too, have the left gripper close
//! on the cube, open the right, then hold still. Every phase is a pure
//! function of the current state, so the controller needs no memory and
//! replays exactly.

use crate::state::{Action, EnvState, Holder};

/// Velocity that moves `from` toward `to`, arriving exactly when the
/// distance is within the speed limit.
fn move_toward(from: [f64; 2], to: [f64; 2], max_speed: f64) -> [f64; 2] {
    let d = [to[0] - from[0], to[1] - from[1]];
    let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
    if norm <= max_speed || norm == 0.0 {
        d
    } else {
        let s = max_speed / norm;
        [d[0] * s, d[1] * s]
    }
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// The expert's action for the current state.
pub fn expert_action(state: &EnvState) -> Action {
    let config = state.config();
    let speed = config.max_speed;
    match state.held_by {
        // Done: the left gripper keeps the cube, everything else rests.
        Holder::Left => Action {
            right_velocity: [0.0; 2],
            left_velocity: [0.0; 2],
            right_grip: 0.0,
            left_grip: 1.0,
        },
        // Carry phase: bring the cube to the meet point while the left
        // gripper converges there, then run the three-beat handoff
        // (left arrives -> left closes -> right opens).
        Holder::Right => {
            let right_at_meet =
                distance(state.right_pos, config.meet_point) <= config.meet_radius;
            let left_at_cube = distance(state.left_pos, state.cube_pos) <= config.grasp_radius;
            if right_at_meet && left_at_cube && state.left_closed {
                Action {
                    right_velocity: [0.0; 2],
                    left_velocity: [0.0; 2],
                    right_grip: 0.0,
                    left_grip: 1.0,
                }
            } else if right_at_meet && left_at_cube {
                Action {
                    right_velocity: [0.0; 2],
                    left_velocity: [0.0; 2],
                    right_grip: 1.0,
                    left_grip: 1.0,
                }
            } else {
                Action {
                    right_velocity: move_toward(state.right_pos, config.meet_point, speed),
                    left_velocity: move_toward(state.left_pos, config.meet_point, speed),
                    right_grip: 1.0,
                    left_grip: 0.0,
                }
            }
        }
        // Approach phase: the right gripper pursues the cube and closes on
        // arrival; the left pre-positions at the meet point.
        Holder::Free => {
            let right_at_cube = distance(state.right_pos, state.cube_pos) <= config.grasp_radius;
            Action {
                right_velocity: if right_at_cube {
                    [0.0; 2]
                } else {
                    move_toward(state.right_pos, state.cube_pos, speed)
                },
                left_velocity: move_toward(state.left_pos, config.meet_point, speed),
                right_grip: if right_at_cube { 1.0 } else { 0.0 },
                left_grip: 0.0,
            }
        }
    }
}
