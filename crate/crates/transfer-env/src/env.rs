//! Reset/step dynamics and the observation interface.
//!
//! The world is a 2D kinematic sketch of a bimanual cube transfer: two point
//! grippers translate under velocity control, a closed gripper within the
//! grasp radius of the free cube picks it up, and the handoff completes when
//! the left gripper closes on the cube while the right holds it at the meet
//! point and the right then opens. There is no physics beyond this — the
//! point is a deterministic stage for studying what a policy attends to, not
//! a simulator.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{
    DistractorMode, EnvConfig, ACTION_SLOT_OFFSET, ACTION_SLOT_SCALE, FIXED_SLOT_TABLE,
};
use crate::dr::dr_sample_count;
use crate::error::EnvError;
use crate::state::{Action, EnvState, Holder, StageFlags};
use crate::Result;

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Clips a velocity to the speed limit (Euclidean norm).
fn clip_speed(v: [f64; 2], max_speed: f64) -> [f64; 2] {
    let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
    if norm > max_speed {
        let s = max_speed / norm;
        [v[0] * s, v[1] * s]
    } else {
        v
    }
}

fn clamp_to_arena(p: [f64; 2], half_width: f64) -> [f64; 2] {
    [p[0].clamp(-half_width, half_width), p[1].clamp(-half_width, half_width)]
}

/// Fills the distractor slots for the start of an episode. Randomized mode
/// consumes RNG draws: the count first, then `(x, y, color)` per populated
/// slot in order.
fn initial_slots(config: &EnvConfig, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let d = config.n_distractors;
    let mut slots = vec![0.0; 3 * d];
    match config.distractor_mode {
        DistractorMode::Absent | DistractorMode::ActionCorrelated => {}
        DistractorMode::Fixed => {
            for i in 0..d {
                let row = FIXED_SLOT_TABLE[i % FIXED_SLOT_TABLE.len()];
                slots[3 * i..3 * i + 3].copy_from_slice(&row);
            }
        }
        DistractorMode::Randomized => {
            let count = dr_sample_count(config.dr_exponent, rng)?.min(d);
            let a = config.arena_half_width;
            for i in 0..count {
                slots[3 * i] = rng.random_range(-a..a);
                slots[3 * i + 1] = rng.random_range(-a..a);
                slots[3 * i + 2] = rng.random::<f64>();
            }
        }
    }
    Ok(slots)
}

/// Overwrites every slot with the affine encoding of an action vector:
/// slot `i`, component `j` holds
/// `ACTION_SLOT_SCALE * action[(3 i + j) mod 6] + ACTION_SLOT_OFFSET`.
fn encode_action_slots(slots: &mut [f64], action: &[f64; 6]) {
    for (idx, v) in slots.iter_mut().enumerate() {
        *v = ACTION_SLOT_SCALE * action[idx % 6] + ACTION_SLOT_OFFSET;
    }
}

/// Starts an episode. Deterministic in `(config, episode_seed)`: the RNG is
/// a ChaCha stream seeded with `episode_seed`, drawing the cube's x then y,
/// then any mode-specific slot values.
pub fn reset(config: &EnvConfig, episode_seed: u64) -> Result<EnvState> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(episode_seed);
    let cube = [
        rng.random_range(config.spawn_min[0]..=config.spawn_max[0]),
        rng.random_range(config.spawn_min[1]..=config.spawn_max[1]),
    ];
    let slot_values = initial_slots(config, &mut rng)?;
    Ok(EnvState {
        right_pos: config.right_home,
        left_pos: config.left_home,
        right_closed: false,
        left_closed: false,
        cube_pos: cube,
        held_by: Holder::Free,
        slot_values,
        prev_action: [0.0; 6],
        step_index: 0,
        flags: StageFlags::default(),
        config: config.clone(),
    })
}

/// Advances one step. Consumes the state by value and returns the successor
/// plus the updated stage flags, so trajectories are explicit values.
pub fn step(state: &EnvState, action: &Action) -> Result<(EnvState, StageFlags)> {
    if state.finished() {
        return Err(EnvError::EpisodeFinished {
            step: state.step_index,
            len: state.config.episode_len,
        });
    }
    if !action.is_finite() {
        return Err(EnvError::NonFiniteAction);
    }
    let config = &state.config;
    let mut next = state.clone();

    // 1. Translate grippers under clipped velocities; stay inside the arena.
    let vr = clip_speed(action.right_velocity, config.max_speed);
    let vl = clip_speed(action.left_velocity, config.max_speed);
    next.right_pos = clamp_to_arena(
        [state.right_pos[0] + vr[0], state.right_pos[1] + vr[1]],
        config.arena_half_width,
    );
    next.left_pos = clamp_to_arena(
        [state.left_pos[0] + vl[0], state.left_pos[1] + vl[1]],
        config.arena_half_width,
    );

    // 2. Grip commands: > 0.5 means closed.
    next.right_closed = action.right_grip > 0.5;
    next.left_closed = action.left_grip > 0.5;

    // 3. A held cube tracks its holder exactly.
    match next.held_by {
        Holder::Right => next.cube_pos = next.right_pos,
        Holder::Left => next.cube_pos = next.left_pos,
        Holder::Free => {}
    }

    // 4. Hand-to-hand logic. The handoff case must be resolved before the
    //    generic drop: both are triggered by the right grip opening.
    let right_near_cube = distance(next.right_pos, next.cube_pos) <= config.grasp_radius;
    let left_near_cube = distance(next.left_pos, next.cube_pos) <= config.grasp_radius;
    let right_at_meet = distance(next.right_pos, config.meet_point) <= config.meet_radius;

    let mut attempted = false;
    let mut transferred = false;
    match next.held_by {
        Holder::Right => {
            // A closing left gripper reaching the held cube is a transfer
            // attempt; it completes only at the meet point with the right
            // gripper letting go.
            if next.left_closed && left_near_cube {
                attempted = true;
            }
            if !next.right_closed {
                if attempted && right_at_meet {
                    next.held_by = Holder::Left;
                    next.cube_pos = next.left_pos;
                    transferred = true;
                } else {
                    next.held_by = Holder::Free;
                }
            }
        }
        Holder::Left => {
            if !next.left_closed {
                next.held_by = Holder::Free;
            }
        }
        Holder::Free => {
            // Pickup; the right gripper wins a simultaneous grab.
            if next.right_closed && right_near_cube {
                next.held_by = Holder::Right;
                next.cube_pos = next.right_pos;
            } else if next.left_closed && left_near_cube {
                next.held_by = Holder::Left;
                next.cube_pos = next.left_pos;
            }
        }
    }

    // 5. Milestones (raise cascades so the ladder invariant always holds).
    let touched = next.held_by != Holder::Free
        || (next.right_closed && right_near_cube)
        || (next.left_closed && left_near_cube);
    let lifted = next.held_by == Holder::Right
        && (next.right_pos[1] - config.meet_point[1]).abs() <= config.lift_band;
    next.flags.raise(touched, lifted, attempted, transferred);

    // 6. Action-correlated distractors reproduce the action just applied, so
    //    the next observation's slots encode the previous action.
    let applied = Action {
        right_velocity: vr,
        left_velocity: vl,
        right_grip: action.right_grip,
        left_grip: action.left_grip,
    }
    .to_vector();
    if config.distractor_mode == DistractorMode::ActionCorrelated {
        encode_action_slots(&mut next.slot_values, &applied);
    }
    next.prev_action = applied;
    next.step_index += 1;

    let flags = next.flags;
    Ok((next, flags))
}

/// Fixed-layout observation vector:
/// `[cube x, cube y, right x, right y, left x, left y, right grip, left
/// grip]` followed by the `D x 3` slot values. The first 8 dims are the
/// task-relevant ground truth and never depend on the distractor mode.
pub fn observe(state: &EnvState) -> Vec<f64> {
    let mut obs = Vec::with_capacity(state.config.obs_dim());
    obs.extend_from_slice(&state.cube_pos);
    obs.extend_from_slice(&state.right_pos);
    obs.extend_from_slice(&state.left_pos);
    obs.push(if state.right_closed { 1.0 } else { 0.0 });
    obs.push(if state.left_closed { 1.0 } else { 0.0 });
    obs.extend_from_slice(&state.slot_values);
    obs
}

/// Proprioceptive subset: `[right x, right y, left x, left y, right grip,
/// left grip]` — the observation's first 8 dims minus the cube position.
pub fn joints(state: &EnvState) -> [f64; 6] {
    [
        state.right_pos[0],
        state.right_pos[1],
        state.left_pos[0],
        state.left_pos[1],
        if state.right_closed { 1.0 } else { 0.0 },
        if state.left_closed { 1.0 } else { 0.0 },
    ]
}
