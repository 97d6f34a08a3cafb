//! Object detections produced by an external detector, one per line:
//!
//! ```text
//! # frame_index  class_label  confidence  xmin  ymin  xmax  ymax
//! 0  person  0.91  12  30  140  300
//! ```
//!
//! Boxes use the half-open pixel convention of [`BoxGeometry`].

use crate::geometry::BoxGeometry;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionStatus {
    Pending,
    /// Turned into an object track.
    Accepted,
    /// Deleted by an annotator.
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// 1-based, in sorted order.
    pub id: u64,
    pub frame_index: u64,
    pub geometry: BoxGeometry,
    pub class_label: String,
    pub confidence: f64,
    pub status: DetectionStatus,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DetectionError {
    #[error("detection line {line}: {reason}")]
    Malformed { line: u64, reason: String },
    #[error("detection line {line}: box {bbox} is outside the {width}x{height} video")]
    OutOfBounds {
        line: u64,
        bbox: BoxGeometry,
        width: u32,
        height: u32,
    },
    #[error("detection line {line}: confidence {value} is outside [0, 1]")]
    Confidence { line: u64, value: String },
}

/// Parses and validates a detection file; result is sorted by frame index
/// and then by descending confidence, with ids assigned in that order.
pub fn ingest_detections(text: &str, width: u32, height: u32) -> Result<Vec<Detection>, DetectionError> {
    let reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .comment(Some(b'#'))
        .quoting(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.into_records() {
        let record = record.map_err(|e| DetectionError::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |reason: String| DetectionError::Malformed { line, reason };
        if record.len() != 7 {
            return Err(malformed(format!(
                "expected 7 tab-separated fields, found {}",
                record.len()
            )));
        }
        let int = |i: usize, name: &str| -> Result<u64, DetectionError> {
            record[i]
                .trim()
                .parse::<u64>()
                .map_err(|_| malformed(format!("{name} `{}` is not a non-negative integer", &record[i])))
        };
        let frame_index = int(0, "frame_index")?;
        let class_label = record[1].trim().to_string();
        if class_label.is_empty() {
            return Err(malformed("empty class label".into()));
        }
        let confidence: f64 = record[2]
            .trim()
            .parse()
            .map_err(|_| malformed(format!("confidence `{}` is not a number", &record[2])))?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(DetectionError::Confidence {
                line,
                value: record[2].trim().to_string(),
            });
        }
        let coord = |i: usize, name: &str| -> Result<u32, DetectionError> {
            u32::try_from(int(i, name)?).map_err(|_| malformed(format!("{name} is too large")))
        };
        let geometry = BoxGeometry::new(
            coord(3, "xmin")?,
            coord(4, "ymin")?,
            coord(5, "xmax")?,
            coord(6, "ymax")?,
        );
        geometry
            .validate_within(width, height)
            .map_err(|_| DetectionError::OutOfBounds {
                line,
                bbox: geometry,
                width,
                height,
            })?;
        out.push(Detection {
            id: 0,
            frame_index,
            geometry,
            class_label,
            confidence,
            status: DetectionStatus::Pending,
        });
    }
    out.sort_by(|a, b| {
        a.frame_index
            .cmp(&b.frame_index)
            .then(b.confidence.total_cmp(&a.confidence))
    });
    for (i, d) in out.iter_mut().enumerate() {
        d.id = i as u64 + 1;
    }
    Ok(out)
}

pub fn render_detections(detections: &[Detection]) -> String {
    detections
        .iter()
        .map(|d| {
            let g = d.geometry;
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                d.frame_index, d.class_label, d.confidence, g.xmin, g.ymin, g.xmax, g.ymax
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = include_str!("../../fixtures/video/detections.tsv");

    #[test]
    fn fixture_detections_sorted() {
        let dets = ingest_detections(FIXTURE, 640, 360).unwrap();
        assert_eq!(dets.len(), 3);
        let order: Vec<_> = dets
            .iter()
            .map(|d| (d.frame_index, d.class_label.as_str()))
            .collect();
        assert_eq!(order, [(0, "person"), (0, "wine glass"), (12, "person")]);
        assert!(dets[0].confidence >= dets[1].confidence);
        assert_eq!(dets.iter().map(|d| d.id).collect::<Vec<_>>(), [1, 2, 3]);
    }

    #[test]
    fn sorting_across_frames() {
        let text = "3\tcup\t0.5\t0\t0\t5\t5\n1\tcup\t0.2\t0\t0\t5\t5\n1\tcup\t0.9\t0\t0\t5\t5\n";
        let dets = ingest_detections(text, 10, 10).unwrap();
        let keys: Vec<_> = dets.iter().map(|d| (d.frame_index, d.confidence)).collect();
        assert_eq!(keys, [(1, 0.9), (1, 0.2), (3, 0.5)]);
    }

    #[test]
    fn confidence_out_of_range() {
        assert!(matches!(
            ingest_detections("0\tcup\t1.2\t0\t0\t5\t5\n", 10, 10),
            Err(DetectionError::Confidence { line: 1, .. })
        ));
    }

    #[test]
    fn empty_file() {
        assert!(ingest_detections("", 10, 10).unwrap().is_empty());
        assert!(ingest_detections("# only a comment\n", 10, 10).unwrap().is_empty());
    }

    #[test]
    fn bad_records() {
        assert!(matches!(
            ingest_detections("0\tcup\t0.5\t0\t0\t11\t5\n", 10, 10),
            Err(DetectionError::OutOfBounds { .. })
        ));
        assert!(matches!(
            ingest_detections("0\tcup\t0.5\t0\t0\t5\n", 10, 10),
            Err(DetectionError::Malformed { .. })
        ));
        assert!(matches!(
            ingest_detections("-1\tcup\t0.5\t0\t0\t5\t5\n", 10, 10),
            Err(DetectionError::Malformed { .. })
        ));
    }

    #[test]
    fn render_round_trip() {
        let dets = ingest_detections(FIXTURE, 640, 360).unwrap();
        assert_eq!(ingest_detections(&render_detections(&dets), 640, 360).unwrap(), dets);
    }
}
