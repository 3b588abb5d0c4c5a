//! Temporary calibration probe for experiment-grid settings. Delete me.

use graph_policy::{rollout, train, GraphMask, GraphSampling, PolicyParams, TrainConfig};
use transfer_env::{episode_seed, generate_demos, Dataset, DistractorMode, EnvConfig};

fn stage_rates(params: &PolicyParams, env: &EnvConfig, g: &GraphMask, n: u64) -> (f64, f64, f64) {
    let (mut touched, mut lifted, mut transferred) = (0, 0, 0);
    for i in 0..n {
        let (flags, _) = rollout(params, env, g, episode_seed(9_000, i)).unwrap();
        touched += flags.touched as u64;
        lifted += flags.lifted as u64;
        transferred += flags.transferred as u64;
    }
    (touched as f64 / n as f64, lifted as f64 / n as f64, transferred as f64 / n as f64)
}

/// Bits 0..8 on, plus any extra indices listed.
fn mask_with(env: &EnvConfig, extra: &[usize]) -> GraphMask {
    let mut bits: Vec<u8> = (0..env.obs_dim()).map(|i| (i < 8) as u8).collect();
    for &i in extra {
        bits[i] = 1;
    }
    GraphMask::from_bits(bits).unwrap()
}

#[test]
#[ignore]
fn probe_depth3_tuning() {
    let mut env_ac = EnvConfig::default();
    env_ac.distractor_mode = DistractorMode::ActionCorrelated;
    let demos: Dataset = generate_demos(&env_ac, 200, 7).unwrap();
    let tm = mask_with(&env_ac, &[]);

    // (label, epochs, chunk, joint_noise_sd)
    let variants: Vec<(&str, usize, usize, f64)> = vec![
        ("200ep     ", 200, 10, 0.05),
        ("chunk5    ", 100, 5, 0.05),
        ("noise.08  ", 100, 10, 0.08),
    ];
    for (name, epochs, chunk, joint_noise_sd) in variants {
        let cfg = TrainConfig {
            epochs,
            chunk,
            hidden: vec![128, 128, 128],
            graph_sampling: GraphSampling::Uniform,
            joint_noise_sd,
            seed: 0,
            ..TrainConfig::default()
        };
        let t0 = std::time::Instant::now();
        let (causal, _) = train(&demos, &cfg).unwrap();
        let secs = t0.elapsed();
        let (t_id, _, x_id) = stage_rates(&causal, &env_ac, &tm, 50);
        println!("{name}: ID touched={t_id:.2} transfer={x_id:.2} ({secs:?})");
    }
}

#[test]
#[ignore]
fn probe_act_margin() {
    let mut env_ac = EnvConfig::default();
    env_ac.distractor_mode = DistractorMode::ActionCorrelated;
    let mut env_ood = env_ac.clone();
    env_ood.distractor_mode = DistractorMode::Absent;
    let demos: Dataset = generate_demos(&env_ac, 200, 7).unwrap();
    let ones = GraphMask::ones(env_ac.obs_dim());
    for seed in [0u64, 1, 2] {
        let cfg = TrainConfig {
            epochs: 60,
            hidden: vec![128, 128],
            graph_sampling: GraphSampling::AllOnes,
            joint_noise_sd: 0.05,
            seed,
            ..TrainConfig::default()
        };
        let (act, _) = train(&demos, &cfg).unwrap();
        let (_, _, id) = stage_rates(&act, &env_ac, &ones, 50);
        let (_, _, ood) = stage_rates(&act, &env_ood, &ones, 50);
        println!("seed={seed}: ACT id={id:.2} ood={ood:.2}");
    }
}
