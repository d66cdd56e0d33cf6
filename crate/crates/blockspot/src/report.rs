//! Evaluation report files.

use std::fs;
use std::path::Path;

use blockspot_core::metrics::EvalReport;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ns,
    Gf,
    Both,
}

impl Protocol {
    fn ns(self) -> bool {
        self != Protocol::Gf
    }

    fn gf(self) -> bool {
        self != Protocol::Ns
    }
}

#[derive(Serialize)]
struct ImageJson<'a> {
    image: &'a str,
    groups: usize,
    edit_distance: usize,
    max_len: usize,
    gt_words: usize,
    pred_tokens: usize,
    correct: usize,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    images: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    ns: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gf: Option<GfJson>,
    per_image: Vec<ImageJson<'a>>,
}

#[derive(Serialize)]
struct GfJson {
    threshold: f64,
    precision: f64,
    recall: f64,
    f: f64,
}

pub fn report_json(report: &EvalReport, images: &[String], protocol: Protocol) -> String {
    let j = ReportJson {
        images: images.len(),
        ns: protocol.ns().then_some(report.ns),
        gf: protocol.gf().then(|| GfJson {
            threshold: report.threshold,
            precision: report.gf_precision,
            recall: report.gf_recall,
            f: report.gf,
        }),
        per_image: report
            .per_image
            .iter()
            .zip(images)
            .map(|(r, image)| ImageJson {
                image,
                groups: r.groups,
                edit_distance: r.edit_distance,
                max_len: r.max_len,
                gt_words: r.gt_words,
                pred_tokens: r.pred_tokens,
                correct: r.correct,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&j).expect("report serializes");
    s.push('\n');
    s
}

pub fn report_text(report: &EvalReport, images: usize, protocol: Protocol) -> String {
    let mut s = format!("images: {images}\n");
    if protocol.ns() {
        s.push_str(&format!("NS: {:.4}\n", report.ns));
    }
    if protocol.gf() {
        s.push_str(&format!(
            "GF@{}: {:.4} (precision {:.4}, recall {:.4})\n",
            report.threshold, report.gf, report.gf_precision, report.gf_recall
        ));
    }
    s
}

/// Writes `report.json` and `report.txt` into `dir`.
pub fn write_reports(dir: &Path, report: &EvalReport, images: &[String], protocol: Protocol) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = dir.join("report.json");
    fs::write(&json, report_json(report, images, protocol)).map_err(|e| Error::io(&json, e))?;
    let txt = dir.join("report.txt");
    fs::write(&txt, report_text(report, images.len(), protocol)).map_err(|e| Error::io(&txt, e))
}
