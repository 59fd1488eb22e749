//! Report files: per-position and summary CSVs, ΔH heatmaps (CSV, PGM,
//! SVG) and the pipeline that writes them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::context::Comparison;
use crate::error::{Error, Result};
use crate::experiment::{evaluate_shape, prepare_shape, ExperimentConfig, ShapeOutcome, SummaryRow};
use crate::geometry::ShapeInventory;

/// |ΔH| in bits that saturates the heatmap colour scale.
pub const HEATMAP_RANGE: f64 = 0.25;
/// Pixels per coefficient position in PGM heatmaps.
pub const HEATMAP_CELL: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionRow {
    pub shape: usize,
    #[serde(rename = "type")]
    pub shape_type: u8,
    pub row: usize,
    pub col: usize,
    pub scan_index: usize,
    pub h_base: f64,
    pub h_prop: f64,
    pub delta_h: f64,
    pub in_top_left: bool,
    pub n_symbols: u64,
    pub config_hash: String,
}

pub fn position_rows(o: &ShapeOutcome, hash: &str) -> Vec<PositionRow> {
    o.comparison
        .rows
        .iter()
        .map(|r| PositionRow {
            shape: o.shape_id,
            shape_type: o.shape_class.number(),
            row: r.row,
            col: r.col,
            scan_index: r.scan_index,
            h_base: r.h_base,
            h_prop: r.h_prop,
            delta_h: r.delta,
            in_top_left: r.in_top_left,
            n_symbols: r.n_symbols,
            config_hash: hash.into(),
        })
        .collect()
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::BadContainer(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::BadContainer(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_position_csv(text: &str) -> Result<Vec<PositionRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<PositionRow>, _>>()
        .map_err(|e| Error::BadContainer(e.to_string()))
}

/// Per-position ΔH between two per-position reports: the first report's
/// scheme is the base, the second the proposal.
pub fn compare_reports(a: &[PositionRow], b: &[PositionRow]) -> Result<Vec<PositionRow>> {
    let key = |r: &PositionRow| (r.shape, r.row, r.col);
    let bmap: BTreeMap<_, &PositionRow> = b.iter().map(|r| (key(r), r)).collect();
    if a.len() != b.len() || bmap.len() != b.len() {
        return Err(Error::InvalidParameter("reports cover different position sets".into()));
    }
    a.iter()
        .map(|ra| {
            let rb = bmap.get(&key(ra)).ok_or_else(|| {
                Error::InvalidParameter(format!("position ({}, {}) of shape {} missing from the second report", ra.row, ra.col, ra.shape))
            })?;
            Ok(PositionRow {
                h_base: ra.h_prop,
                h_prop: rb.h_prop,
                delta_h: ra.h_prop - rb.h_prop,
                n_symbols: ra.n_symbols,
                config_hash: format!("{}/{}", ra.config_hash, rb.config_hash),
                ..ra.clone()
            })
        })
        .collect()
}

/// ΔH as a row-major grid over the coefficient block.
pub fn delta_grid(c: &Comparison, width: usize, height: usize) -> Vec<f64> {
    let mut g = vec![0.0; width * height];
    for r in &c.rows {
        g[r.row * width + r.col] = r.delta;
    }
    g
}

pub fn heatmap_csv(grid: &[f64], width: usize) -> String {
    let mut s = String::new();
    for row in grid.chunks(width) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn scaled(v: f64) -> f64 {
    (v / HEATMAP_RANGE).clamp(-1.0, 1.0)
}

/// 8-bit PGM, mid-grey at 0, white at +range (saving), black at -range.
pub fn heatmap_pgm(grid: &[f64], width: usize, height: usize, comment: &str) -> Vec<u8> {
    let (pw, ph) = (width * HEATMAP_CELL, height * HEATMAP_CELL);
    let mut out = format!("P5\n# {comment}\n{pw} {ph}\n255\n").into_bytes();
    for y in 0..ph {
        for x in 0..pw {
            let v = grid[(y / HEATMAP_CELL) * width + x / HEATMAP_CELL];
            out.push((127.5 + 127.5 * scaled(v)).round() as u8);
        }
    }
    out
}

fn diverging_rgb(v: f64) -> (u8, u8, u8) {
    let t = scaled(v);
    let fade = |a: f64| (255.0 * (1.0 - a)).round() as u8;
    if t >= 0.0 {
        (fade(t), fade(0.6 * t), 255)
    } else {
        (255, fade(0.6 * -t), fade(-t))
    }
}

/// Blue for savings, red for losses, white at 0.
pub fn heatmap_svg(grid: &[f64], width: usize, height: usize, title: &str) -> String {
    let cell = 16;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        width * cell,
        height * cell + 20,
        width * cell,
        height * cell + 20
    );
    let _ = writeln!(s, "<title>{title}</title>");
    for r in 0..height {
        for c in 0..width {
            let v = grid[r * width + c];
            let (red, green, blue) = diverging_rgb(v);
            let _ = writeln!(
                s,
                "<rect x=\"{}\" y=\"{}\" width=\"{cell}\" height=\"{cell}\" fill=\"#{red:02x}{green:02x}{blue:02x}\"><title>({r},{c}) {v:.4}</title></rect>",
                c * cell,
                r * cell
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"2\" y=\"{}\" font-size=\"11\" font-family=\"monospace\">dH scale +-{HEATMAP_RANGE} bits</text>",
        height * cell + 14
    );
    s.push_str("</svg>\n");
    s
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub config_hash: String,
    pub outcomes: Vec<ShapeOutcome>,
    pub files: Vec<PathBuf>,
}

fn write(files: &mut Vec<PathBuf>, path: PathBuf, bytes: &[u8]) -> Result<()> {
    std::fs::write(&path, bytes)?;
    files.push(path);
    Ok(())
}

/// Runs every configured shape and writes the reports to `out_dir`.
pub fn run_pipeline(cfg: &ExperimentConfig, out_dir: &Path) -> Result<PipelineOutput> {
    let inv = ShapeInventory::build();
    cfg.validate(&inv)?;
    let hash = cfg.hash();
    let mut outcomes = Vec::with_capacity(cfg.shapes.len());
    for &id in &cfg.shapes {
        let data = prepare_shape(cfg, &inv, id)?;
        outcomes.push(evaluate_shape(&data, cfg.scheme, cfg.params())?);
    }
    std::fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    let scheme = cfg.scheme.name();
    write(&mut files, out_dir.join("config.json"), serde_json::to_string_pretty(cfg)?.as_bytes())?;
    let summary: Vec<SummaryRow> = outcomes.iter().map(|o| o.summary(&hash)).collect();
    write(&mut files, out_dir.join(format!("summary_{scheme}.csv")), to_csv(&summary)?.as_bytes())?;
    let positions: Vec<PositionRow> = outcomes.iter().flat_map(|o| position_rows(o, &hash)).collect();
    write(&mut files, out_dir.join(format!("positions_{scheme}.csv")), to_csv(&positions)?.as_bytes())?;
    for o in &outcomes {
        let stem = format!("shape{:02}_{scheme}", o.shape_id);
        let doc = o.fitted.to_doc(o.shape_id, o.step, &hash);
        write(&mut files, out_dir.join(format!("{stem}_model.json")), doc.to_json()?.as_bytes())?;
        let grid = delta_grid(&o.comparison, o.width, o.height);
        write(&mut files, out_dir.join(format!("{stem}_dh.csv")), heatmap_csv(&grid, o.width).as_bytes())?;
        let comment = format!("dH shape {} scheme {scheme} config {hash}", o.shape_id);
        write(&mut files, out_dir.join(format!("{stem}_dh.pgm")), &heatmap_pgm(&grid, o.width, o.height, &comment))?;
        write(&mut files, out_dir.join(format!("{stem}_dh.svg")), heatmap_svg(&grid, o.width, o.height, &comment).as_bytes())?;
    }
    Ok(PipelineOutput { config_hash: hash, outcomes, files })
}
