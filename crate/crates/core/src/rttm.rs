//! RTTM reading and writing.
//!
//! Only `SPEAKER` lines are consumed:
//! `SPEAKER <file> <chan> <tbeg> <tdur> <NA> <NA> <speaker> <NA> <NA>`.
//! Times are written with millisecond precision, so a write/parse round trip
//! is exact to 1e-3 s.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::timeline::{sort_segments, Annotation, TimedSegment};

/// Parses RTTM text into one annotation per file id, in order of first
/// appearance. Extent defaults to the last segment end of each file.
pub fn parse_rttm(text: &str) -> Result<Vec<Annotation>> {
    let mut order: Vec<String> = Vec::new();
    let mut segments: std::collections::HashMap<String, Vec<TimedSegment>> =
        std::collections::HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] != "SPEAKER" {
            continue;
        }
        if fields.len() < 8 {
            return Err(Error::Rttm {
                line: line_no,
                msg: format!("expected at least 8 fields, got {}", fields.len()),
            });
        }
        let file_id = fields[1].to_string();
        let tbeg: f64 = fields[3].parse().map_err(|_| Error::Rttm {
            line: line_no,
            msg: format!("bad onset {:?}", fields[3]),
        })?;
        let tdur: f64 = fields[4].parse().map_err(|_| Error::Rttm {
            line: line_no,
            msg: format!("bad duration {:?}", fields[4]),
        })?;
        if tdur < 0.0 {
            return Err(Error::Rttm {
                line: line_no,
                msg: format!("negative duration at line {line_no}"),
            });
        }
        if tdur == 0.0 {
            return Err(Error::Rttm {
                line: line_no,
                msg: format!("zero duration at line {line_no}"),
            });
        }
        if tbeg < 0.0 {
            return Err(Error::Rttm {
                line: line_no,
                msg: format!("negative onset at line {line_no}"),
            });
        }
        let speaker = fields[7].to_string();
        if !segments.contains_key(&file_id) {
            order.push(file_id.clone());
        }
        segments
            .entry(file_id)
            .or_default()
            .push(TimedSegment::new(speaker, tbeg, tdur));
    }

    order
        .into_iter()
        .map(|file_id| {
            let segs = segments.remove(&file_id).unwrap();
            let extent = segs.iter().map(|s| s.end()).fold(0.0, f64::max);
            Annotation::new(file_id, segs, extent)
        })
        .collect()
}

/// Serializes annotations as RTTM `SPEAKER` lines with 3-decimal times.
pub fn write_rttm(annotations: &[Annotation]) -> String {
    let mut out = String::new();
    for ann in annotations {
        let mut segs = ann.segments.clone();
        sort_segments(&mut segs);
        for seg in &segs {
            writeln!(
                out,
                "SPEAKER {} 1 {:.3} {:.3} <NA> <NA> {} <NA> <NA>",
                ann.recording_id, seg.onset, seg.duration, seg.speaker
            )
            .expect("write to string");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_speaker_line() {
        let anns = parse_rttm("SPEAKER rec1 1 0.00 2.50 <NA> <NA> spkA <NA> <NA>\n").unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].recording_id, "rec1");
        assert_eq!(anns[0].segments.len(), 1);
        assert_eq!(anns[0].segments[0].speaker, "spkA");
        assert_eq!(anns[0].segments[0].onset, 0.0);
        assert_eq!(anns[0].segments[0].duration, 2.5);
        assert_eq!(anns[0].extent, 2.5);
    }

    #[test]
    fn two_lines_same_file_become_one_annotation() {
        let text = "SPEAKER rec1 1 0.00 2.50 <NA> <NA> spkA <NA> <NA>\n\
                    SPEAKER rec1 1 2.00 3.00 <NA> <NA> spkB <NA> <NA>\n";
        let anns = parse_rttm(text).unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].segments.len(), 2);
        assert_eq!(anns[0].extent, 5.0);
    }

    #[test]
    fn negative_duration_is_an_error_with_line_number() {
        let err = parse_rttm("SPEAKER rec1 1 1.0 -2.0 <NA> <NA> spkA <NA> <NA>\n").unwrap_err();
        assert!(err.to_string().contains("negative duration at line 1"));
    }

    #[test]
    fn non_speaker_lines_are_ignored() {
        let text = "SPKR-INFO rec1 1 <NA> <NA> <NA> unknown spkA <NA>\n\
                    SPEAKER rec1 1 0.00 1.00 <NA> <NA> spkA <NA> <NA>\n";
        let anns = parse_rttm(text).unwrap();
        assert_eq!(anns.len(), 1);
        assert_eq!(anns[0].segments.len(), 1);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_rttm("SPEAKER rec1 1 zero 2.0 <NA> <NA> spkA <NA> <NA>\n").unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }

    #[test]
    fn writes_expected_line() {
        let ann = Annotation::new(
            "rec1",
            vec![TimedSegment::new("spkA", 0.0, 2.5)],
            2.5,
        )
        .unwrap();
        assert_eq!(
            write_rttm(&[ann]),
            "SPEAKER rec1 1 0.000 2.500 <NA> <NA> spkA <NA> <NA>\n"
        );
    }

    #[test]
    fn empty_list_writes_empty_text() {
        assert_eq!(write_rttm(&[]), "");
    }

    #[test]
    fn round_trip_within_millisecond() {
        // Generate-parse-compare: 100 segments with awkward fractional times.
        let mut segs = Vec::new();
        let mut t = 0.0;
        for i in 0..100 {
            let speaker = if i % 2 == 0 { "A" } else { "B" };
            let dur = 0.7 + (i as f64 * 0.137) % 3.1;
            segs.push(TimedSegment::new(speaker, t, dur));
            t += dur * 0.6 + 0.0137;
        }
        let extent = segs.iter().map(|s| s.end()).fold(0.0, f64::max);
        let ann = Annotation::new("recX", segs, extent).unwrap();
        let parsed = parse_rttm(&write_rttm(&[ann.clone()])).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0].segments.len(), ann.segments.len());
        for (a, b) in ann.segments.iter().zip(&parsed[0].segments) {
            assert_eq!(a.speaker, b.speaker);
            assert!((a.onset - b.onset).abs() <= 1e-3);
            assert!((a.duration - b.duration).abs() <= 1e-3);
        }
    }
}
