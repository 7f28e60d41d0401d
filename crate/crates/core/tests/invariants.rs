//! Cross-module property tests on randomized inputs.

use proptest::prelude::*;

use mre_core::circuits::wrap_angle;
use mre_core::states::{sample_pair_in_class_seeded, thompson_metric, StatePair};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Serialization of sampled pairs is bit-faithful for every matrix
    /// entry and preserves the class certificate.
    #[test]
    fn pair_json_roundtrip(seed in any::<u64>(), d in 2usize..5, b in 1.5f64..8.0) {
        let pair = sample_pair_in_class_seeded(d, b, seed);
        let back = StatePair::from_json(&pair.to_json()).unwrap();
        prop_assert_eq!(back.dim(), d);
        prop_assert_eq!(back.class_bound_b, Some(b));
        for i in 0..d {
            for j in 0..d {
                let a = pair.rho.matrix()[(i, j)];
                let c = back.rho.matrix()[(i, j)];
                prop_assert_eq!(a.re.to_bits(), c.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), c.im.to_bits());
                let a = pair.sigma.matrix()[(i, j)];
                let c = back.sigma.matrix()[(i, j)];
                prop_assert_eq!(a.re.to_bits(), c.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), c.im.to_bits());
            }
        }
    }

    /// The metric is symmetric and respects the sampled class bound.
    #[test]
    fn thompson_symmetry_and_bound(seed in any::<u64>(), d in 2usize..5, b in 1.5f64..8.0) {
        let pair = sample_pair_in_class_seeded(d, b, seed);
        let fwd = thompson_metric(&pair.rho, &pair.sigma).unwrap();
        let bwd = thompson_metric(&pair.sigma, &pair.rho).unwrap();
        prop_assert!((fwd - bwd).abs() < 1e-9);
        prop_assert!(fwd <= b.ln() + 1e-9);
    }

    /// Angle wrapping lands in the principal interval and is idempotent.
    #[test]
    fn wrap_angle_principal(x in -1e6f64..1e6) {
        let w = wrap_angle(x);
        prop_assert!(w >= -std::f64::consts::PI - 1e-12);
        prop_assert!(w <= std::f64::consts::PI + 1e-12);
        prop_assert!((wrap_angle(w) - w).abs() < 1e-9);
    }
}
