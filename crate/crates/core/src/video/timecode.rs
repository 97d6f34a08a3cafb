use serde::{Deserialize, Serialize};

/// Frame rate of extracted video stills.
pub const DEFAULT_FPS: u32 = 25;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimecodeError {
    #[error("negative {what}: {value}")]
    Negative { what: &'static str, value: i64 },
    #[error("frame rate must be between 1 and 1000 fps, got {0}")]
    BadRate(u32),
    #[error("{what} {value} is out of range")]
    Overflow { what: &'static str, value: i64 },
}

/// Frames per second of a video, stored per document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct FrameRate(u32);

impl Default for FrameRate {
    fn default() -> Self {
        FrameRate(DEFAULT_FPS)
    }
}

impl TryFrom<u32> for FrameRate {
    type Error = TimecodeError;

    fn try_from(fps: u32) -> Result<Self, Self::Error> {
        FrameRate::new(fps)
    }
}

impl From<FrameRate> for u32 {
    fn from(rate: FrameRate) -> u32 {
        rate.0
    }
}

impl FrameRate {
    pub fn new(fps: u32) -> Result<Self, TimecodeError> {
        if fps == 0 || fps > 1000 {
            return Err(TimecodeError::BadRate(fps));
        }
        Ok(FrameRate(fps))
    }

    pub fn fps(&self) -> u32 {
        self.0
    }

    /// `floor(ms * fps / 1000)`.
    pub fn time_to_frame(&self, time_ms: i64) -> Result<u64, TimecodeError> {
        if time_ms < 0 {
            return Err(TimecodeError::Negative {
                what: "time",
                value: time_ms,
            });
        }
        let frame = time_ms as i128 * self.0 as i128 / 1000;
        u64::try_from(frame).map_err(|_| TimecodeError::Overflow {
            what: "time",
            value: time_ms,
        })
    }

    /// Start time of a frame: the smallest millisecond that maps back to it.
    /// At 25 fps this is exactly `frame * 40`.
    pub fn frame_to_time(&self, frame_index: i64) -> Result<i64, TimecodeError> {
        if frame_index < 0 {
            return Err(TimecodeError::Negative {
                what: "frame index",
                value: frame_index,
            });
        }
        let fps = self.0 as i128;
        let ms = (frame_index as i128 * 1000 + fps - 1) / fps;
        i64::try_from(ms).map_err(|_| TimecodeError::Overflow {
            what: "frame index",
            value: frame_index,
        })
    }

    pub fn stamp(&self, time_ms: i64) -> Result<FrameStamp, TimecodeError> {
        Ok(FrameStamp {
            frame_index: self.time_to_frame(time_ms)?,
            time_ms,
            fps: self.0,
        })
    }
}

/// Converts milliseconds to a frame index at 25 fps.
pub fn time_to_frame(time_ms: i64) -> Result<u64, TimecodeError> {
    FrameRate::default().time_to_frame(time_ms)
}

/// Converts a frame index to its start time in milliseconds at 25 fps.
pub fn frame_to_time(frame_index: i64) -> Result<i64, TimecodeError> {
    FrameRate::default().frame_to_time(frame_index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameStamp {
    pub frame_index: u64,
    pub time_ms: i64,
    pub fps: u32,
}

impl FrameStamp {
    /// Seconds with two decimals, e.g. `2.00 s`.
    pub fn seconds_label(&self) -> String {
        format!("{}.{:02} s", self.time_ms / 1000, (self.time_ms % 1000) / 10)
    }
}
