//! Pixel boxes and character spans shared by the static and video pipelines.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Axis-aligned box in integer pixels, half-open on the max side:
/// a box covers columns `xmin..xmax` and rows `ymin..ymax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxGeometry {
    pub xmin: u32,
    pub ymin: u32,
    pub xmax: u32,
    pub ymax: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate box {0}: min must be strictly less than max")]
    Degenerate(BoxGeometry),
    #[error("box {bbox} exceeds frame bounds {width}x{height}")]
    OutOfBounds {
        bbox: BoxGeometry,
        width: u32,
        height: u32,
    },
}

impl BoxGeometry {
    pub const fn new(xmin: u32, ymin: u32, xmax: u32, ymax: u32) -> Self {
        Self {
            xmin,
            ymin,
            xmax,
            ymax,
        }
    }

    pub fn width(&self) -> u32 {
        self.xmax.saturating_sub(self.xmin)
    }

    pub fn height(&self) -> u32 {
        self.ymax.saturating_sub(self.ymin)
    }

    /// Checks `0 <= xmin < xmax <= width` and `0 <= ymin < ymax <= height`.
    pub fn validate_within(&self, width: u32, height: u32) -> Result<(), GeometryError> {
        if self.xmin >= self.xmax || self.ymin >= self.ymax {
            return Err(GeometryError::Degenerate(*self));
        }
        if self.xmax > width || self.ymax > height {
            return Err(GeometryError::OutOfBounds {
                bbox: *self,
                width,
                height,
            });
        }
        Ok(())
    }

    pub fn coords(&self) -> [u32; 4] {
        [self.xmin, self.ymin, self.xmax, self.ymax]
    }

    pub fn from_coords(c: [u32; 4]) -> Self {
        Self::new(c[0], c[1], c[2], c[3])
    }
}

impl fmt::Display for BoxGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})-({},{})", self.xmin, self.ymin, self.xmax, self.ymax)
    }
}

/// Character span over a sentence, counted in Unicode scalar values,
/// start-inclusive and end-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// True when the span is non-empty and lies within a text of `len` chars.
    pub fn fits(&self, len: usize) -> bool {
        self.start < self.end && self.end <= len
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Extracts the spanned characters from `text`.
    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        let mut indices = text.char_indices().map(|(i, _)| i).chain([text.len()]);
        let start = indices.nth(self.start).unwrap_or(text.len());
        let end = if self.end > self.start {
            text.char_indices()
                .map(|(i, _)| i)
                .chain([text.len()])
                .nth(self.end)
                .unwrap_or(text.len())
        } else {
            start
        };
        &text[start..end]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

/// Number of Unicode scalar values in `text`.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_bounds() {
        assert!(BoxGeometry::new(0, 0, 10, 10).validate_within(10, 10).is_ok());
        assert!(matches!(
            BoxGeometry::new(5, 0, 5, 10).validate_within(10, 10),
            Err(GeometryError::Degenerate(_))
        ));
        assert!(matches!(
            BoxGeometry::new(0, 0, 11, 10).validate_within(10, 10),
            Err(GeometryError::OutOfBounds { .. })
        ));
    }

    #[test]
    fn span_slices_by_chars() {
        let text = "né? ação";
        assert_eq!(Span::new(0, 2).slice(text), "né");
        assert_eq!(Span::new(4, 8).slice(text), "ação");
        assert!(Span::new(4, 8).fits(char_len(text)));
        assert!(!Span::new(4, 9).fits(char_len(text)));
        assert!(Span::new(0, 3).overlaps(&Span::new(2, 4)));
        assert!(!Span::new(0, 2).overlaps(&Span::new(2, 4)));
    }
}
