//! Labeled trace-image datasets: `images/<session_id>.png` plus `manifest.csv`.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use botgraph_core::{Label, TraceImage};

pub const MANIFEST: &str = "manifest.csv";
pub const IMAGES_DIR: &str = "images";

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("duplicate session id {0:?}")]
    DuplicateSession(String),
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestRow {
    /// Image path relative to the dataset directory.
    pub file: String,
    pub session_id: String,
    pub label: Option<Label>,
}

/// File stem for a session id: unreserved characters kept, the rest
/// percent-encoded so any cookie value yields a safe, unique name.
pub fn file_stem(session_id: &str) -> String {
    let mut out = String::with_capacity(session_id.len());
    for b in session_id.bytes() {
        if b.is_ascii_alphanumeric() || matches!(b, b'-' | b'_' | b'.') {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    if out.starts_with('.') {
        out.replace_range(0..1, "%2E");
    }
    out
}

/// 8-bit grayscale PNG encoding of a square pixel buffer.
pub fn encode_png<W: Write>(w: W, size: u32, pixels: &[u8]) -> io::Result<()> {
    let mut enc = png::Encoder::new(w, size, size);
    enc.set_color(png::ColorType::Grayscale);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(io::Error::other)?;
    writer.write_image_data(pixels).map_err(io::Error::other)?;
    writer.finish().map_err(io::Error::other)
}

/// Decodes an 8-bit grayscale PNG into `(width, height, pixels)`.
pub fn decode_png(path: &Path) -> Result<(u32, u32, Vec<u8>), DatasetError> {
    let file = File::open(path).map_err(io_err(path))?;
    let fmt = |reason: String| DatasetError::Format { path: path.to_path_buf(), reason };
    let mut reader = png::Decoder::new(io::BufReader::new(file)).read_info().map_err(|e| fmt(e.to_string()))?;
    let size = reader.output_buffer_size().ok_or_else(|| fmt("image too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|e| fmt(e.to_string()))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(fmt(format!("expected 8-bit grayscale, got {:?} {:?}", info.color_type, info.bit_depth)));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}

/// Writes every image and a manifest sorted by session id; returns the
/// manifest path.
pub fn emit_dataset(images: &[TraceImage], out_dir: &Path) -> Result<PathBuf, DatasetError> {
    let mut seen = BTreeSet::new();
    for img in images {
        if !seen.insert(img.session_id.as_str()) {
            return Err(DatasetError::DuplicateSession(img.session_id.clone()));
        }
    }
    let image_dir = out_dir.join(IMAGES_DIR);
    fs::create_dir_all(&image_dir).map_err(io_err(&image_dir))?;

    let mut rows: Vec<ManifestRow> = Vec::with_capacity(images.len());
    for img in images {
        let file = format!("{IMAGES_DIR}/{}.png", file_stem(&img.session_id));
        let path = out_dir.join(&file);
        let f = File::create(&path).map_err(io_err(&path))?;
        encode_png(BufWriter::new(f), img.size, &img.pixels).map_err(io_err(&path))?;
        rows.push(ManifestRow { file, session_id: img.session_id.clone(), label: img.label });
    }
    rows.sort_by(|a, b| a.session_id.cmp(&b.session_id));

    let manifest = out_dir.join(MANIFEST);
    write_manifest(&manifest, &rows)?;
    Ok(manifest)
}

pub fn write_manifest(path: &Path, rows: &[ManifestRow]) -> Result<(), DatasetError> {
    let f = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(f));
    let res = (|| -> csv::Result<()> {
        w.write_record(["file", "session_id", "label"])?;
        for r in rows {
            w.write_record([r.file.as_str(), &r.session_id, r.label.map_or("", Label::as_str)])?;
        }
        w.flush()?;
        Ok(())
    })();
    res.map_err(|e| DatasetError::Io { path: path.to_path_buf(), source: e.into() })
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>, DatasetError> {
    let f = File::open(path).map_err(io_err(path))?;
    let fmt = |reason: String| DatasetError::Format { path: path.to_path_buf(), reason };
    let mut rdr = csv::Reader::from_reader(f);
    let headers = rdr.headers().map_err(|e| fmt(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| fmt(format!("missing column {name:?}")));
    let (fi, si, li) = (col("file")?, col("session_id")?, col("label")?);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let get = |i: usize| rec.get(i).unwrap_or("").to_string();
        let label = match rec.get(li).unwrap_or("") {
            "" => None,
            l => Some(Label::from_str(l).map_err(|e| fmt(e.to_string()))?),
        };
        rows.push(ManifestRow { file: get(fi), session_id: get(si), label });
    }
    Ok(rows)
}
