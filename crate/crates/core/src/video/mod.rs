//! Video ingest: timecodes, transcript and subtitle merging, sentence drafts
//! and object detections.

mod detections;
mod drafts;
mod timecode;
mod transcript;

pub use detections::{ingest_detections, render_detections, Detection, DetectionError, DetectionStatus};
pub use drafts::{
    segment_sentences, DraftBook, DraftEdit, DraftError, DraftStatus, SentenceDraft, DEFAULT_PAUSE_MS,
};
pub use timecode::{frame_to_time, time_to_frame, FrameRate, FrameStamp, TimecodeError, DEFAULT_FPS};
pub use transcript::{
    jaccard, merge_streams, normalized_tokens, parse_subtitles, parse_transcript, render_subtitles,
    render_transcript, split_subtitle, MergeConfig, SubtitleLine, TranscriptError, TranscriptWord,
    WordSource,
};
