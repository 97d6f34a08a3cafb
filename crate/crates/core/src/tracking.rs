//! Objects followed across video frames.
//!
//! A track is a list of disjoint segments. Each segment holds keyframed
//! boxes; frames between two keyframes get a linearly interpolated box and
//! frames after the last keyframe repeat it until the segment ends. Frames
//! outside every segment have no box.

use crate::geometry::{BoxGeometry, GeometryError};
use crate::video::{Detection, DetectionStatus};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackState {
    Tracking,
    Paused,
    Ended,
}

impl TrackState {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackState::Tracking => "tracking",
            TrackState::Paused => "paused",
            TrackState::Ended => "ended",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tracking" => Some(TrackState::Tracking),
            "paused" => Some(TrackState::Paused),
            "ended" => Some(TrackState::Ended),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackOrigin {
    Detector,
    Human,
}

impl TrackOrigin {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrackOrigin::Detector => "detector",
            TrackOrigin::Human => "human",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "detector" => Some(TrackOrigin::Detector),
            "human" => Some(TrackOrigin::Human),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start_frame: u64,
    pub end_frame: u64,
    pub keyframes: BTreeMap<u64, BoxGeometry>,
}

impl Segment {
    fn new(frame: u64, bbox: BoxGeometry) -> Self {
        Segment {
            start_frame: frame,
            end_frame: frame,
            keyframes: BTreeMap::from([(frame, bbox)]),
        }
    }

    pub fn contains(&self, frame: u64) -> bool {
        self.start_frame <= frame && frame <= self.end_frame
    }

    pub fn last_keyframe(&self) -> u64 {
        self.keyframes.keys().next_back().copied().unwrap_or(self.start_frame)
    }

    pub fn box_at(&self, frame: u64) -> Option<BoxGeometry> {
        if !self.contains(frame) {
            return None;
        }
        let before = self.keyframes.range(..=frame).next_back();
        let after = self.keyframes.range(frame..).next();
        match (before, after) {
            (Some((&k0, &a)), Some((&k1, &b))) if k0 != k1 => Some(interpolate(a, b, k0, k1, frame)),
            (Some((_, &a)), _) => Some(a),
            (None, Some((_, &b))) => Some(b),
            (None, None) => None,
        }
    }
}

/// Coordinate-wise linear blend of `a` (at `k0`) and `b` (at `k1`) at frame
/// `f`, rounding halves up. Requires `k0 < k1` and `k0 <= f <= k1`.
pub fn interpolate(a: BoxGeometry, b: BoxGeometry, k0: u64, k1: u64, f: u64) -> BoxGeometry {
    let den = (k1 - k0) as i128;
    let t = (f - k0) as i128;
    let (ca, cb) = (a.coords(), b.coords());
    let mut out = [0u32; 4];
    for i in 0..4 {
        let (x0, x1) = (ca[i] as i128, cb[i] as i128);
        let num = x0 * den + (x1 - x0) * t;
        out[i] = (2 * num + den).div_euclid(2 * den) as u32;
    }
    BoxGeometry::from_coords(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectTrack {
    pub object_id: u64,
    pub segments: Vec<Segment>,
    pub state: TrackState,
    pub origin: TrackOrigin,
    /// Detector class, for tracks made from a detection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_id: Option<u64>,
}

impl ObjectTrack {
    pub fn box_at_frame(&self, frame: u64) -> Option<BoxGeometry> {
        self.segments.iter().find(|s| s.contains(frame))?.box_at(frame)
    }

    pub fn first_frame(&self) -> Option<u64> {
        self.segments.first().map(|s| s.start_frame)
    }

    pub fn check(&self) -> Result<(), TrackError> {
        let fail = |reason: String| {
            Err(TrackError::Invariant {
                object_id: self.object_id,
                reason,
            })
        };
        if self.segments.is_empty() {
            return fail("track has no segments".into());
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.start_frame > seg.end_frame {
                return fail(format!("segment {i} ends before it starts"));
            }
            if seg.keyframes.is_empty() {
                return fail(format!("segment {i} has no keyframes"));
            }
            if seg.keyframes.keys().any(|&k| !seg.contains(k)) {
                return fail(format!("segment {i} has a keyframe outside its range"));
            }
            if i > 0 && self.segments[i - 1].end_frame >= seg.start_frame {
                return fail(format!("segment {i} overlaps or precedes segment {}", i - 1));
            }
        }
        Ok(())
    }
}

/// Video properties tracks are validated against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VideoBounds {
    pub width: u32,
    pub height: u32,
    /// Number of frames, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_count: Option<u64>,
}

impl VideoBounds {
    fn check_frame(&self, frame: u64) -> Result<(), TrackError> {
        match self.frame_count {
            Some(count) if frame >= count => Err(TrackError::FrameOutOfRange { frame, count }),
            _ => Ok(()),
        }
    }

    fn check_box(&self, bbox: &BoxGeometry) -> Result<(), TrackError> {
        bbox.validate_within(self.width, self.height).map_err(TrackError::Box)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrackError {
    #[error("no object with id {0}")]
    UnknownObject(u64),
    #[error("no detection with id {0}")]
    UnknownDetection(u64),
    #[error("detection {0} was already accepted or deleted")]
    DetectionConsumed(u64),
    #[error(transparent)]
    Box(GeometryError),
    #[error("frame {frame} is beyond the last frame of the video ({count} frames)")]
    FrameOutOfRange { frame: u64, count: u64 },
    #[error("cannot {action} object {object_id} while it is {}", state.as_str())]
    IllegalTransition {
        object_id: u64,
        state: TrackState,
        action: &'static str,
    },
    #[error("frame {frame} is before the current segment start {start}")]
    FrameBeforeSegment { frame: u64, start: u64 },
    #[error("frame {frame} is before the last keyframe {last}")]
    BeforeLastKeyframe { frame: u64, last: u64 },
    #[error("resume frame {frame} must come after the previous segment end {end}")]
    ResumeOverlap { frame: u64, end: u64 },
    #[error("object ids must stay increasing; {requested} is not above {floor}")]
    IdNotIncreasing { requested: u64, floor: u64 },
    #[error("object {object_id} violates its invariants: {reason}")]
    Invariant { object_id: u64, reason: String },
}

/// Source of boxes for automatic tracking. Returns keyframes to add to the
/// segment for frames in `(last keyframe, until_frame]`.
pub trait Tracker {
    fn propose(&self, segment: &Segment, until_frame: u64) -> BTreeMap<u64, BoxGeometry>;
}

/// Adds no keyframes: interpolation and hold-last-box cover the new range.
#[derive(Debug, Clone, Copy, Default)]
pub struct InterpolationTracker;

impl Tracker for InterpolationTracker {
    fn propose(&self, _segment: &Segment, _until_frame: u64) -> BTreeMap<u64, BoxGeometry> {
        BTreeMap::new()
    }
}

/// All tracks of one video document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackBook {
    pub tracks: BTreeMap<u64, ObjectTrack>,
    /// Id given to the next created object.
    pub next_object_id: u64,
}

impl Default for TrackBook {
    fn default() -> Self {
        TrackBook::with_first_id(1)
    }
}

impl TrackBook {
    pub fn with_first_id(first: u64) -> Self {
        TrackBook {
            tracks: BTreeMap::new(),
            next_object_id: first.max(1),
        }
    }

    /// Moves the id counter forward; ids never go back.
    pub fn seed(&mut self, next: u64) -> Result<(), TrackError> {
        if next < self.next_object_id {
            return Err(TrackError::IdNotIncreasing {
                requested: next,
                floor: self.next_object_id,
            });
        }
        self.next_object_id = next;
        Ok(())
    }

    pub fn get(&self, object_id: u64) -> Result<&ObjectTrack, TrackError> {
        self.tracks.get(&object_id).ok_or(TrackError::UnknownObject(object_id))
    }

    fn live(&mut self, object_id: u64, action: &'static str) -> Result<&mut ObjectTrack, TrackError> {
        let track = self
            .tracks
            .get_mut(&object_id)
            .ok_or(TrackError::UnknownObject(object_id))?;
        if track.state == TrackState::Ended {
            return Err(TrackError::IllegalTransition {
                object_id,
                state: track.state,
                action,
            });
        }
        Ok(track)
    }

    pub fn create_object(
        &mut self,
        bounds: &VideoBounds,
        frame: u64,
        bbox: BoxGeometry,
        origin: TrackOrigin,
    ) -> Result<&ObjectTrack, TrackError> {
        bounds.check_frame(frame)?;
        bounds.check_box(&bbox)?;
        let object_id = self.next_object_id;
        self.next_object_id += 1;
        let track = ObjectTrack {
            object_id,
            segments: vec![Segment::new(frame, bbox)],
            state: TrackState::Tracking,
            origin,
            class_label: None,
            detection_id: None,
        };
        Ok(self.tracks.entry(object_id).or_insert(track))
    }

    pub fn accept_detection(
        &mut self,
        bounds: &VideoBounds,
        detections: &mut [Detection],
        detection_id: u64,
    ) -> Result<&ObjectTrack, TrackError> {
        let det = detections
            .iter_mut()
            .find(|d| d.id == detection_id)
            .ok_or(TrackError::UnknownDetection(detection_id))?;
        if det.status != DetectionStatus::Pending {
            return Err(TrackError::DetectionConsumed(detection_id));
        }
        bounds.check_frame(det.frame_index)?;
        bounds.check_box(&det.geometry)?;
        det.status = DetectionStatus::Accepted;
        let (frame, bbox, label) = (det.frame_index, det.geometry, det.class_label.clone());
        let object_id = self.create_object(bounds, frame, bbox, TrackOrigin::Detector)?.object_id;
        let track = self.tracks.get_mut(&object_id).expect("just created");
        track.class_label = Some(label);
        track.detection_id = Some(detection_id);
        Ok(track)
    }

    pub fn delete_detection(detections: &mut [Detection], detection_id: u64) -> Result<(), TrackError> {
        let det = detections
            .iter_mut()
            .find(|d| d.id == detection_id)
            .ok_or(TrackError::UnknownDetection(detection_id))?;
        if det.status != DetectionStatus::Pending {
            return Err(TrackError::DetectionConsumed(detection_id));
        }
        det.status = DetectionStatus::Rejected;
        Ok(())
    }

    pub fn set_keyframe(
        &mut self,
        bounds: &VideoBounds,
        object_id: u64,
        frame: u64,
        bbox: BoxGeometry,
    ) -> Result<&ObjectTrack, TrackError> {
        bounds.check_frame(frame)?;
        bounds.check_box(&bbox)?;
        let track = self.live(object_id, "set a keyframe on")?;
        if track.state != TrackState::Tracking {
            return Err(TrackError::IllegalTransition {
                object_id,
                state: track.state,
                action: "set a keyframe on",
            });
        }
        let seg = track.segments.last_mut().expect("tracks have segments");
        if frame < seg.start_frame {
            return Err(TrackError::FrameBeforeSegment {
                frame,
                start: seg.start_frame,
            });
        }
        seg.keyframes.insert(frame, bbox);
        seg.end_frame = seg.end_frame.max(frame);
        Ok(track)
    }

    /// Sets the current segment to end at `until_frame`, adding whatever
    /// keyframes `tracker` proposes. `until_frame` may equal the last
    /// keyframe.
    pub fn auto_track(
        &mut self,
        bounds: &VideoBounds,
        object_id: u64,
        until_frame: u64,
        tracker: &dyn Tracker,
    ) -> Result<&ObjectTrack, TrackError> {
        bounds.check_frame(until_frame)?;
        let track = self.live(object_id, "track")?;
        if track.state != TrackState::Tracking {
            return Err(TrackError::IllegalTransition {
                object_id,
                state: track.state,
                action: "track",
            });
        }
        let seg = track.segments.last_mut().expect("tracks have segments");
        let last = seg.last_keyframe();
        if until_frame < last {
            return Err(TrackError::BeforeLastKeyframe {
                frame: until_frame,
                last,
            });
        }
        let proposed = tracker.propose(seg, until_frame);
        for (&frame, bbox) in &proposed {
            if frame <= last || frame > until_frame {
                return Err(TrackError::Invariant {
                    object_id,
                    reason: format!("tracker proposed frame {frame} outside {}..={until_frame}", last + 1),
                });
            }
            bounds.check_box(bbox)?;
        }
        seg.keyframes.extend(proposed);
        seg.end_frame = until_frame;
        Ok(track)
    }

    pub fn pause(&mut self, object_id: u64) -> Result<&ObjectTrack, TrackError> {
        let track = self.live(object_id, "pause")?;
        if track.state != TrackState::Tracking {
            return Err(TrackError::IllegalTransition {
                object_id,
                state: track.state,
                action: "pause",
            });
        }
        track.state = TrackState::Paused;
        Ok(track)
    }

    pub fn resume(
        &mut self,
        bounds: &VideoBounds,
        object_id: u64,
        frame: u64,
        bbox: BoxGeometry,
    ) -> Result<&ObjectTrack, TrackError> {
        bounds.check_frame(frame)?;
        bounds.check_box(&bbox)?;
        let track = self.live(object_id, "resume")?;
        if track.state != TrackState::Paused {
            return Err(TrackError::IllegalTransition {
                object_id,
                state: track.state,
                action: "resume",
            });
        }
        let end = track.segments.last().expect("tracks have segments").end_frame;
        if frame <= end {
            return Err(TrackError::ResumeOverlap { frame, end });
        }
        track.segments.push(Segment::new(frame, bbox));
        track.state = TrackState::Tracking;
        Ok(track)
    }

    pub fn end(&mut self, object_id: u64) -> Result<&ObjectTrack, TrackError> {
        let track = self.live(object_id, "end")?;
        track.state = TrackState::Ended;
        Ok(track)
    }

    /// Removes a track in any state and returns it.
    pub fn delete(&mut self, object_id: u64) -> Result<ObjectTrack, TrackError> {
        self.tracks.remove(&object_id).ok_or(TrackError::UnknownObject(object_id))
    }

    /// Inserts a fully built track, as read back from an export.
    pub fn restore(&mut self, track: ObjectTrack) -> Result<(), TrackError> {
        track.check()?;
        if self.tracks.contains_key(&track.object_id) {
            return Err(TrackError::Invariant {
                object_id: track.object_id,
                reason: "duplicate object id".into(),
            });
        }
        self.next_object_id = self.next_object_id.max(track.object_id + 1);
        self.tracks.insert(track.object_id, track);
        Ok(())
    }

    pub fn check(&self, bounds: &VideoBounds) -> Result<(), TrackError> {
        for track in self.tracks.values() {
            track.check()?;
            if track.object_id >= self.next_object_id {
                return Err(TrackError::Invariant {
                    object_id: track.object_id,
                    reason: "id not below the id counter".into(),
                });
            }
            for seg in &track.segments {
                for bbox in seg.keyframes.values() {
                    bounds.check_box(bbox)?;
                }
            }
        }
        Ok(())
    }
}
