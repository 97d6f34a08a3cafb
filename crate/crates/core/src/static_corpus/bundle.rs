//! ZIP bundle reader and writer.
//!
//! Layout: `images/*.jpg`, `sentences.txt`, `boxes.xml`. The three parts may
//! sit under one common top-level folder. Only image headers are decoded.

use super::{
    parse_boxes_xml, parse_sentences, render_boxes_xml, render_sentences, BundleError,
    BundleImage, CorpusBundle,
};
use std::collections::BTreeMap;
use std::io::{Cursor, Read, Write};
use zip::write::SimpleFileOptions;
use zip::{CompressionMethod, ZipArchive, ZipWriter};

const SENTENCES: &str = "sentences.txt";
const BOXES: &str = "boxes.xml";

fn archive_err(e: impl std::fmt::Display) -> BundleError {
    BundleError::Archive(e.to_string())
}

/// Reads and validates a corpus bundle.
pub fn open_bundle(name: &str, zip_bytes: &[u8]) -> Result<CorpusBundle, BundleError> {
    let mut archive = ZipArchive::new(Cursor::new(zip_bytes)).map_err(archive_err)?;
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    for i in 0..archive.len() {
        let mut entry = archive.by_index(i).map_err(archive_err)?;
        if entry.is_dir() {
            continue;
        }
        let path = entry.name().trim_start_matches("./").to_string();
        if path.starts_with("__MACOSX/") {
            continue;
        }
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        entry.read_to_end(&mut bytes).map_err(archive_err)?;
        files.insert(path, bytes);
    }

    let prefix = files
        .keys()
        .filter_map(|p| p.strip_suffix(SENTENCES))
        .filter(|prefix| prefix.is_empty() || prefix.ends_with('/'))
        .min_by_key(|prefix| prefix.len())
        .map(str::to_string)
        .ok_or(BundleError::MissingPart("sentences file"))?;

    let boxes_bytes = files
        .get(&format!("{prefix}{BOXES}"))
        .ok_or(BundleError::MissingPart("boxes file"))?;
    let sentences_text = std::str::from_utf8(&files[&format!("{prefix}{SENTENCES}")])
        .map_err(|e| BundleError::MalformedSentence {
            line: 0,
            reason: format!("sentences file is not UTF-8: {e}"),
        })?;

    let image_dir = format!("{prefix}images/");
    let mut images = Vec::new();
    for (path, bytes) in &files {
        let Some(file_name) = path.strip_prefix(&image_dir) else {
            continue;
        };
        let lower = file_name.to_ascii_lowercase();
        if file_name.contains('/') || !(lower.ends_with(".jpg") || lower.ends_with(".jpeg")) {
            continue;
        }
        let (width, height) = image_dimensions(bytes).map_err(|reason| {
            BundleError::UnreadableImage {
                file: file_name.to_string(),
                reason,
            }
        })?;
        images.push(BundleImage {
            file_name: file_name.to_string(),
            width,
            height,
            bytes: bytes.clone(),
        });
    }
    if images.is_empty() {
        return Err(BundleError::MissingPart("images folder"));
    }
    images.sort_by(|a, b| a.file_name.cmp(&b.file_name));

    let sentences_raw = parse_sentences(sentences_text)?;
    let mut boxes_raw = parse_boxes_xml(boxes_bytes)?;
    let order = |image: &str| images.iter().position(|i| i.file_name == image);
    if let Some(b) = boxes_raw.iter().find(|b| order(&b.image_ref).is_none()) {
        return Err(BundleError::UnknownImage {
            context: format!("box for entity {}", b.entity_id),
            image: b.image_ref.clone(),
        });
    }
    boxes_raw.sort_by_key(|b| order(&b.image_ref));

    let bundle = CorpusBundle {
        name: name.to_string(),
        images,
        sentences_raw,
        boxes_raw,
    };
    bundle.validate()?;
    Ok(bundle)
}

fn image_dimensions(bytes: &[u8]) -> Result<(u32, u32), String> {
    image::ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| e.to_string())?
        .into_dimensions()
        .map_err(|e| e.to_string())
}

/// Packs a bundle into the ZIP layout read by [`open_bundle`].
pub fn write_bundle(bundle: &CorpusBundle) -> Result<Vec<u8>, BundleError> {
    let mut zip = ZipWriter::new(Cursor::new(Vec::new()));
    let options = SimpleFileOptions::default()
        .compression_method(CompressionMethod::Deflated)
        .last_modified_time(zip::DateTime::default());
    let stored = options.compression_method(CompressionMethod::Stored);

    for img in &bundle.images {
        zip.start_file(format!("images/{}", img.file_name), stored)
            .map_err(archive_err)?;
        zip.write_all(&img.bytes).map_err(archive_err)?;
    }
    zip.start_file(SENTENCES, options).map_err(archive_err)?;
    zip.write_all(render_sentences(&bundle.sentences_raw).as_bytes())
        .map_err(archive_err)?;
    zip.start_file(BOXES, options).map_err(archive_err)?;
    let xml = render_boxes_xml(
        bundle.images.iter().map(|i| i.file_name.as_str()),
        &bundle.boxes_raw,
    );
    zip.write_all(xml.as_bytes()).map_err(archive_err)?;
    Ok(zip.finish().map_err(archive_err)?.into_inner())
}
