//! Property tests for the exact identities and serialization invariants.

use gdreg::analysis::last_iterate_identity;
use gdreg::concentration::{rademacher_scalar, SignMethod};
use gdreg::data::Dataset;
use proptest::prelude::*;

proptest! {
    #[test]
    fn sequence_identity_is_exact(
        q in prop::collection::vec(-1e3..1e3f64, 1..200)
    ) {
        let (lhs, rhs) = last_iterate_identity(&q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn csv_round_trip_preserves_datasets(
        rows in prop::collection::vec(
            (prop::collection::vec(-1e6..1e6f64, 3), -1e6..1e6f64),
            1..40,
        )
    ) {
        let (xs, ys): (Vec<Vec<f64>>, Vec<f64>) = rows.into_iter().unzip();
        let ds = Dataset::new(xs, ys).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::read_csv(std::io::BufReader::new(buf.as_slice())).unwrap();
        prop_assert_eq!(ds, back);
    }

    #[test]
    fn scalar_complexity_scales_linearly_in_radius(
        seed in 0u64..1000,
        radius in 0.01..50.0f64,
    ) {
        let model = gdreg::make_paper_model(4).unwrap();
        let data = model.sample(12, seed).unwrap();
        let method = SignMethod::MonteCarlo { draws: 64, seed };
        let unit = rademacher_scalar(&data, 1.0, method).unwrap().value;
        let scaled = rademacher_scalar(&data, radius, method).unwrap().value;
        prop_assert!((scaled - radius * unit).abs() <= 1e-9 * unit.max(1.0));
    }
}
