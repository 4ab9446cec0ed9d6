//! Randomized invariants: properties that must hold for every valid input,
//! not just the hand-picked cases in the unit tests.

use proptest::prelude::*;

use rcdt_core::cdt1d::{
    cdt_forward_1d, cdt_inverse_1d, default_levels, transport_cost_1d, transport_map_1d, Signal1D,
};
use rcdt_core::container::{decode_grid, encode_grid, GridKind};
use rcdt_core::pgm::{encode_pgm, parse_pgm};
use rcdt_core::Image;

fn positive_density(len: usize) -> impl Strategy<Value = Signal1D> {
    proptest::collection::vec(1e-6..1.0f64, len).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        Signal1D::centered(raw.into_iter().map(|v| v / total).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transport_map_is_nondecreasing(
        src in positive_density(48),
        reference in positive_density(48),
    ) {
        let map = transport_map_1d(&src, &reference, default_levels(48)).unwrap();
        for w in map.values.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "map decreases: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn transport_cost_is_symmetric_and_nonnegative(
        a in positive_density(48),
        b in positive_density(48),
    ) {
        let levels = default_levels(48);
        let dab = transport_cost_1d(&a, &b, levels).unwrap();
        let dba = transport_cost_1d(&b, &a, levels).unwrap();
        prop_assert!(dab >= 0.0);
        prop_assert_eq!(dab, dba);
        prop_assert!(transport_cost_1d(&a, &a, levels).unwrap() <= 1e-16);
    }

    #[test]
    fn forward_transform_preserves_signed_transport_norm(
        src in positive_density(48),
        reference in positive_density(48),
    ) {
        // The transform of the reference against itself is identically zero.
        let levels = default_levels(48);
        let zero = cdt_forward_1d(&reference, &reference, levels).unwrap();
        prop_assert!(zero.samples.iter().all(|v| v.abs() <= 1e-9));
        // And a generic transform inverts back to a valid density.
        let fwd = cdt_forward_1d(&src, &reference, levels).unwrap();
        let rec = cdt_inverse_1d(&fwd, &reference).unwrap();
        prop_assert!(rec.samples.iter().all(|&v| v >= 0.0));
        prop_assert!((rec.mass() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn container_round_trip_is_bit_exact(
        t_count in 1usize..32,
        num_angles in 1usize..16,
        hash in any::<u64>(),
        seed in any::<[f64; 4]>(),
    ) {
        let values: Vec<f64> = (0..t_count * num_angles)
            .map(|i| seed[i % 4] * (i as f64 + 1.0))
            .collect();
        let bytes = encode_grid(GridKind::Sinogram, t_count, num_angles, &values, hash).unwrap();
        let decoded = decode_grid(&bytes).unwrap();
        prop_assert_eq!(decoded.kind, GridKind::Sinogram);
        prop_assert_eq!(decoded.t_count, t_count);
        prop_assert_eq!(decoded.num_angles, num_angles);
        prop_assert_eq!(decoded.template_hash, hash);
        for (a, b) in decoded.values.iter().zip(&values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        // Re-encoding the decoded grid reproduces the exact bytes.
        let again = encode_grid(
            decoded.kind, decoded.t_count, decoded.num_angles, &decoded.values, decoded.template_hash,
        )
        .unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn pgm_round_trip_preserves_quantized_levels(
        w in 1usize..24,
        h in 1usize..24,
        maxval in prop_oneof![Just(255u16), Just(65535u16)],
    ) {
        let image = Image::from_fn(w, h, |i, j| ((i * 31 + j * 17) % 97) as f64).unwrap();
        let bytes = encode_pgm(&image, maxval).unwrap();
        let parsed = parse_pgm(&bytes).unwrap();
        prop_assert_eq!(parsed.width(), w);
        prop_assert_eq!(parsed.height(), h);
        // Encoding what we parsed must be byte-identical: quantization is
        // idempotent after the first pass.
        let second = encode_pgm(&parsed, maxval).unwrap();
        prop_assert_eq!(second, bytes);
    }
}
