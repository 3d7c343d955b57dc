//! Structural invariants of the encoders over random inputs.

mod common;

use common::invariants::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(config(1000))]

    #[test]
    fn gasf_symmetric(x in series(48)) {
        gasf_symmetric_with_double_angle_diagonal(&x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn mtf_rows_stochastic(x in series(64), bins in 2usize..12) {
        mtf_rows_stochastic_and_unit_range(&x, bins).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn recurrence_symmetric(x in series(48)) {
        recurrence_symmetric_zero_diagonal(&x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn pixel_round_trip((side, x) in pixel_strategy()) {
        pixel_range_and_quantization_round_trip(side, &x).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn gaf_mtf_channels(x in prop::collection::vec(-5.0f64..5.0, 16..40)) {
        gaf_mtf_channels_match_single_encoders(&x).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn seeded_runner_passes_every_property() {
    for (name, outcome) in run_all(50) {
        assert!(outcome.is_ok(), "{name}: {outcome:?}");
    }
}
