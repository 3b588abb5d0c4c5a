//! Property tests for the policy's load-bearing exactness claims.
//!
//! The central one: feature positions with a zero mask bit can never
//! influence the decoded chunk — bit-for-bit, for any parameters, any
//! inputs, any mask. The decoder multiplies features by the mask before the
//! first affine layer, so a masked coordinate contributes exactly
//! `0.0 * w`, and IEEE 754 makes that contribution identical for every
//! finite feature value. No tolerance is needed anywhere in this file.

use graph_policy::{ActionStats, EncoderMode, GraphMask, PolicyDims, PolicyParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Deterministically builds a small random policy from a seed.
fn random_policy(seed: u64, dims: PolicyDims, mode: EncoderMode) -> PolicyParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stats = ActionStats::identity(dims.act_dim);
    PolicyParams::new(dims, mode, &[12, 12], stats, &mut rng).unwrap()
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

/// Strategy for small but varied policy dimensions (identity encoder, so
/// `feature_dim == obs_dim`).
fn dims_strategy() -> impl Strategy<Value = PolicyDims> {
    (2usize..10, 1usize..5, 1usize..5, 1usize..4, 1usize..4).prop_map(
        |(obs, act, joints, z, chunk)| PolicyDims {
            obs_dim: obs,
            act_dim: act,
            joints_dim: joints,
            feature_dim: obs,
            z_dim: z,
            chunk,
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// For any x, x' agreeing on the unmasked coordinates,
    /// decode(x) == decode(x') exactly.
    #[test]
    fn masked_coordinates_never_reach_the_output(
        dims in dims_strategy(),
        policy_seed in any::<u64>(),
        input_seed in any::<u64>(),
        mask_word in any::<u64>(),
    ) {
        let policy = random_policy(policy_seed, dims, EncoderMode::Identity);
        let f = dims.feature_dim;
        let bits: Vec<u8> = (0..f).map(|i| ((mask_word >> (i % 64)) & 1) as u8).collect();
        let g = GraphMask::from_bits(bits.clone()).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(input_seed);
        let x = random_vec(&mut rng, f);
        let joints = random_vec(&mut rng, dims.joints_dim);
        let z = random_vec(&mut rng, dims.z_dim);

        // Overwrite every masked coordinate with a fresh, unrelated value.
        let mut x_alt = x.clone();
        for (i, &b) in bits.iter().enumerate() {
            if b == 0 {
                let noise: f64 = rng.sample(StandardNormal);
                x_alt[i] = 1e6 * noise + 3.0;
            }
        }

        let y = policy.decode(&x, &g, &joints, &z).unwrap();
        let y_alt = policy.decode(&x_alt, &g, &joints, &z).unwrap();
        prop_assert_eq!(y, y_alt);
    }

    /// `act` is definitionally `decode(encode(obs), g, joints, 0)`; the two
    /// paths must agree bit-for-bit in both encoder modes.
    #[test]
    fn act_is_decode_of_encode_with_zero_latent(
        dims in dims_strategy(),
        policy_seed in any::<u64>(),
        input_seed in any::<u64>(),
        use_mlp in any::<bool>(),
        mask_word in any::<u64>(),
    ) {
        let (dims, mode) = if use_mlp {
            (PolicyDims { feature_dim: 5, ..dims }, EncoderMode::Mlp)
        } else {
            (dims, EncoderMode::Identity)
        };
        let policy = random_policy(policy_seed, dims, mode);
        let f = dims.feature_dim;
        let bits: Vec<u8> = (0..f).map(|i| ((mask_word >> (i % 64)) & 1) as u8).collect();
        let g = GraphMask::from_bits(bits).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(input_seed);
        let obs = random_vec(&mut rng, dims.obs_dim);
        let joints = random_vec(&mut rng, dims.joints_dim);

        let via_act = policy.act(&obs, &joints, &g).unwrap();
        let x = policy.encode(&obs).unwrap();
        let via_decode = policy.decode(&x, &g, &joints, &vec![0.0; dims.z_dim]).unwrap();
        prop_assert_eq!(&via_act, &via_decode);
        prop_assert_eq!(via_act.len(), dims.chunk * dims.act_dim);
    }

    /// The all-zero mask erases the features entirely: output depends only
    /// on (g, joints, z), never on x.
    #[test]
    fn zero_mask_makes_output_feature_free(
        dims in dims_strategy(),
        policy_seed in any::<u64>(),
        input_seed in any::<u64>(),
    ) {
        let policy = random_policy(policy_seed, dims, EncoderMode::Identity);
        let g = GraphMask::zeros(dims.feature_dim);
        let mut rng = ChaCha8Rng::seed_from_u64(input_seed);
        let joints = random_vec(&mut rng, dims.joints_dim);
        let z = random_vec(&mut rng, dims.z_dim);
        let x1 = random_vec(&mut rng, dims.feature_dim);
        let x2 = random_vec(&mut rng, dims.feature_dim);
        let y1 = policy.decode(&x1, &g, &joints, &z).unwrap();
        let y2 = policy.decode(&x2, &g, &joints, &z).unwrap();
        prop_assert_eq!(y1, y2);
    }

    /// Bit-string serialization of masks round-trips for any bit pattern.
    #[test]
    fn mask_bit_strings_round_trip(bits in proptest::collection::vec(0u8..=1, 1..40)) {
        let g = GraphMask::from_bits(bits).unwrap();
        let s = g.to_bit_string();
        let back = GraphMask::from_bit_string(&s).unwrap();
        prop_assert_eq!(g, back);
    }
}
