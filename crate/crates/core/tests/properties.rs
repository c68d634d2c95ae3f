//! Property tests for the structural invariants.

use proptest::prelude::*;

use convmix_core::metrics::emd_1d;
use convmix_core::rttm::{parse_rttm, write_rttm};
use convmix_core::timeline::{speaker_count_intervals, Annotation, TimedSegment};

fn arb_segments() -> impl Strategy<Value = Vec<TimedSegment>> {
    prop::collection::vec(
        (0u8..4, 0.0f64..50.0, 0.01f64..8.0).prop_map(|(spk, onset, dur)| {
            TimedSegment::new(format!("spk{spk}"), onset, dur)
        }),
        0..40,
    )
}

proptest! {
    #[test]
    fn count_interval_durations_partition_the_extent(segments in arb_segments(), pad in 0.0f64..5.0) {
        let extent = segments.iter().map(|s| s.end()).fold(0.0, f64::max) + pad;
        if extent <= 0.0 {
            return Ok(());
        }
        let ann = Annotation::new("rec", segments, extent).unwrap();
        let intervals = speaker_count_intervals(&ann);
        let total: f64 = intervals.iter().map(|(s, e, _)| e - s).sum();
        prop_assert!((total - extent).abs() < 1e-9, "{total} vs {extent}");
        // Contiguous and maximal: neighbors touch and have distinct counts.
        for pair in intervals.windows(2) {
            prop_assert_eq!(pair[0].1, pair[1].0);
            prop_assert_ne!(pair[0].2, pair[1].2);
        }
    }

    #[test]
    fn rttm_round_trip_millisecond_accurate(
        // Times sit on a 7 ms grid: coarser than the 1 ms print precision,
        // so rounding can never reorder distinct values.
        raw in prop::collection::vec((0u8..4, 0u32..7000, 1u32..1000), 1..40),
    ) {
        let segments: Vec<TimedSegment> = raw
            .into_iter()
            .map(|(spk, k, j)| {
                TimedSegment::new(format!("spk{spk}"), k as f64 * 0.007, j as f64 * 0.007)
            })
            .collect();
        let extent = segments.iter().map(|s| s.end()).fold(0.0, f64::max);
        let ann = Annotation::new("rec", segments, extent).unwrap();
        let parsed = parse_rttm(&write_rttm(std::slice::from_ref(&ann))).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(parsed[0].segments.len(), ann.segments.len());
        for (a, b) in ann.segments.iter().zip(&parsed[0].segments) {
            prop_assert_eq!(&a.speaker, &b.speaker);
            prop_assert!((a.onset - b.onset).abs() <= 1e-3 + 1e-12);
            prop_assert!((a.duration - b.duration).abs() <= 1e-3 + 1e-12);
        }
        prop_assert!((ann.extent - parsed[0].extent).abs() <= 2e-3);
    }

    #[test]
    fn emd_is_symmetric_and_zero_on_self(
        u in prop::collection::vec(0.0f64..100.0, 1..25),
        v in prop::collection::vec(0.0f64..100.0, 1..25),
    ) {
        prop_assert_eq!(emd_1d(&u, &u).unwrap(), 0.0);
        let uv = emd_1d(&u, &v).unwrap();
        let vu = emd_1d(&v, &u).unwrap();
        prop_assert!((uv - vu).abs() < 1e-12);
        prop_assert!(uv >= 0.0);
    }
}
