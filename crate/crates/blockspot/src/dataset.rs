//! Annotation JSONL: one record per line,
//! `{"image", "width", "height", "instances": [...], "blocks": [...]?}`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use blockspot_core::blockgen::{TextBlock, TextInstance};
use blockspot_core::geometry::{Point, Polygon};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationRecord {
    /// Image path relative to the images directory.
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub instances: Vec<TextInstance>,
    pub blocks: Option<Vec<TextBlock>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    polygon: Vec<[f64; 2]>,
    text: String,
    #[serde(default)]
    ignore: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockJson {
    polygon: Vec<[f64; 2]>,
    members: Vec<usize>,
    text: String,
    #[serde(default, skip_serializing_if = "is_false")]
    ignore: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    image: String,
    width: usize,
    height: usize,
    instances: Vec<InstanceJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<BlockJson>>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

fn coords(p: &Polygon) -> Vec<[f64; 2]> {
    p.vertices().iter().map(|v| [v.x, v.y]).collect()
}

fn polygon(raw: &[[f64; 2]], width: usize, height: usize) -> std::result::Result<Polygon, String> {
    let (w, h) = (width as f64, height as f64);
    let pts: Vec<Point> = raw
        .iter()
        .map(|&[x, y]| Point::new(x.clamp(0.0, w), y.clamp(0.0, h)))
        .collect();
    Polygon::new(pts).map_err(|e| format!("bad polygon: {e}"))
}

impl AnnotationRecord {
    fn from_json(r: RecordJson) -> std::result::Result<Self, String> {
        if r.width == 0 || r.height == 0 {
            return Err("width and height must be positive".into());
        }
        let instances = r
            .instances
            .iter()
            .enumerate()
            .map(|(i, inst)| {
                let p = polygon(&inst.polygon, r.width, r.height).map_err(|e| format!("instance {i}: {e}"))?;
                Ok(TextInstance::new(p, inst.text.clone(), inst.ignore))
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        let blocks = match r.blocks {
            None => None,
            Some(bs) => Some(
                bs.iter()
                    .enumerate()
                    .map(|(b, blk)| {
                        let p = polygon(&blk.polygon, r.width, r.height).map_err(|e| format!("block {b}: {e}"))?;
                        if let Some(&m) = blk.members.iter().find(|&&m| m >= instances.len()) {
                            return Err(format!("block {b}: member {m} out of range"));
                        }
                        Ok(TextBlock {
                            polygon: p,
                            members: blk.members.clone(),
                            text: blk.text.clone(),
                            ignore: blk.ignore,
                        })
                    })
                    .collect::<std::result::Result<Vec<_>, String>>()?,
            ),
        };
        Ok(Self {
            image: r.image,
            width: r.width,
            height: r.height,
            instances,
            blocks,
        })
    }

    fn to_json(&self) -> RecordJson {
        RecordJson {
            image: self.image.clone(),
            width: self.width,
            height: self.height,
            instances: self
                .instances
                .iter()
                .map(|i| InstanceJson {
                    polygon: coords(&i.polygon),
                    text: i.text.clone(),
                    ignore: i.ignore,
                })
                .collect(),
            blocks: self.blocks.as_ref().map(|bs| {
                bs.iter()
                    .map(|b| BlockJson {
                        polygon: coords(&b.polygon),
                        members: b.members.clone(),
                        text: b.text.clone(),
                        ignore: b.ignore,
                    })
                    .collect()
            }),
        }
    }

    /// Compact single-line JSON.
    pub fn to_line(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("records always serialize")
    }

    /// Image path joined onto `images_dir`.
    pub fn image_path(&self, images_dir: &Path) -> PathBuf {
        images_dir.join(&self.image)
    }
}

/// Parses JSONL text; blank lines are skipped. `path` is only used in
/// error messages.
pub fn parse_annotations(text: &str, path: &Path) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let schema = |message: String| Error::Schema {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let raw: RecordJson = serde_json::from_str(line).map_err(|e| schema(e.to_string()))?;
        out.push(AnnotationRecord::from_json(raw).map_err(schema)?);
    }
    Ok(out)
}

pub fn load_annotations(path: &Path) -> Result<Vec<AnnotationRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_annotations(&text, path)
}

pub fn annotations_to_string(records: &[AnnotationRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_line());
        s.push('\n');
    }
    s
}

pub fn save_annotations(records: &[AnnotationRecord], path: &Path) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(annotations_to_string(records).as_bytes())
        .map_err(|e| Error::io(path, e))
}
