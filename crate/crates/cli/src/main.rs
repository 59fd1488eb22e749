//! `nrec`: shape inventory, dictionary analysis, corpus generation,
//! training, evaluation, sweeps and codec round trips.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nrec_core::coder::{decode_stream, encode_stream, read_header, BlockCoder};
use nrec_core::context::compare;
use nrec_core::corpus::{gen_from_frames, gen_synthetic, read_pgm, split, write_pgm, BlockFile};
use nrec_core::dictionary::build_dictionary;
use nrec_core::experiment::{
    fit_scheme, prepare_shape, sweep, ExperimentConfig, FittedModel, ModelDoc, Scheme, SchemeState,
};
use nrec_core::geometry::ShapeInventory;
use nrec_core::report::{compare_reports, position_rows, read_position_csv, run_pipeline, to_csv, HEATMAP_CELL};
use nrec_core::transform::{default_k_max, omp_batch, quantize_batch, reconstruct, QuantParams};
use nrec_core::Error;

#[derive(Parser)]
#[command(name = "nrec", version, about = "Context modelling experiments for non-rectangular transform blocks")]
struct Cli {
    /// JSON experiment file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Canonical NR shape inventory.
    #[command(subcommand)]
    Shapes(ShapesCmd),
    /// Partitioned DCT dictionaries.
    #[command(subcommand)]
    Dict(DictCmd),
    /// Residual block datasets.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Sparse transform of residual blocks.
    #[command(subcommand)]
    Tx(TxCmd),
    /// Fits the configured scheme per configured shape; writes model
    /// documents and the train/test coefficient files.
    Train {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merges the trees of a full-tree (ctf) model.
    Merge {
        #[arg(long)]
        model: PathBuf,
        /// Defaults to the model's own threshold.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// With --model and --test, per-position H_ts of one model; otherwise
    /// the configured pipeline with all reports.
    Eval {
        #[arg(long, requires = "test")]
        model: Option<PathBuf>,
        #[arg(long, requires = "model")]
        test: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The 12-point (n_nbd, th_c) grid on the configured corpus.
    Sweep {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// NREC bitstreams.
    #[command(subcommand)]
    Codec(CodecCmd),
    /// Per-position dH between two per-position reports (first = base).
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ShapesCmd {
    /// CSV inventory.
    List {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Inventory plus one binary PGM mask per shape.
    Dump {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MapFormat {
    Csv,
    Pgm,
}

#[derive(Subcommand)]
enum DictCmd {
    /// Dictionary summary as JSON.
    Build {
        #[arg(long)]
        shape: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// |corr| of one atom with every atom of the grid.
    Corr {
        #[arg(long)]
        shape: usize,
        /// `row,col` of the atom.
        #[arg(long, value_parser = parse_pos)]
        pos: (usize, usize),
        #[arg(long, value_enum, default_value = "csv")]
        out: MapFormat,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusCmd {
    /// Synthetic AR(1) residuals. With --config, one file per configured
    /// shape in the output directory.
    Gen {
        #[arg(long)]
        shape: Option<usize>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = 0.9)]
        rho: f64,
        #[arg(long, default_value_t = 10.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Block-matching residuals from a pair of 8-bit PGM frames.
    Frames {
        #[arg(long)]
        shape: usize,
        #[arg(long)]
        current: PathBuf,
        #[arg(long)]
        previous: PathBuf,
        #[arg(long, default_value_t = 4)]
        radius: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded 8:2 split of a block file.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
}

#[derive(Subcommand)]
enum TxCmd {
    /// OMP, scaling and quantization of a residual file.
    Encode {
        #[arg(long)]
        shape: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        step: f64,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dequantization and inverse DCT back to residuals.
    Decode {
        #[arg(long)]
        shape: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CodecCmd {
    Encode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Uniform tables that adapt instead of the model's static tables.
        #[arg(long)]
        adaptive: bool,
    },
    Decode {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        adaptive: bool,
    },
}

fn parse_pos(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or_else(|| format!("expected row,col, got {s:?}"))?;
    let p = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(r)?, p(c)?))
}

enum Failure {
    Config(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownShape(_) | Error::NotSimplifiedShape(_) | Error::InvalidParameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn config_error<T>(m: impl Into<String>) -> Result<T> {
    Err(Failure::Config(m.into()))
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig> {
    let Some(p) = path else { return config_error("this command needs --config") };
    let cfg = ExperimentConfig::load(p).map_err(|e| Failure::Config(format!("{}: {e}", p.display())))?;
    cfg.validate(&ShapeInventory::build()).map_err(|e| Failure::Config(e.to_string()))?;
    Ok(cfg)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, bytes).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

/// Writes to `path`, or stdout when absent.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => write(p, bytes),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn load_model(path: &Path) -> Result<(ModelDoc, FittedModel)> {
    let text = String::from_utf8(read(path)?).map_err(|_| Failure::Data(format!("{}: not utf-8", path.display())))?;
    let doc = ModelDoc::from_json(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let fitted = doc.clone().into_fitted()?;
    Ok((doc, fitted))
}

fn load_blocks(path: &Path) -> Result<BlockFile> {
    BlockFile::from_bytes(&read(path)?).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn out_dir(cfg: &ExperimentConfig, out: &Option<PathBuf>) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from(&cfg.out_dir))
}

#[derive(Serialize)]
struct ShapeRow {
    id: usize,
    #[serde(rename = "box")]
    bbox: String,
    width: usize,
    height: usize,
    area: usize,
    r_a: f64,
    #[serde(rename = "type")]
    shape_type: u8,
    occurrences: usize,
    representative: String,
}

fn shape_rows(inv: &ShapeInventory) -> Vec<ShapeRow> {
    inv.shapes
        .iter()
        .map(|s| ShapeRow {
            id: s.id,
            bbox: format!("{}x{}", s.width(), s.height()),
            width: s.width(),
            height: s.height(),
            area: s.area(),
            r_a: s.r_a,
            shape_type: s.shape_class.number(),
            occurrences: s.occurrences,
            representative: s.representative.to_string(),
        })
        .collect()
}

fn shapes(cmd: ShapesCmd) -> Result<()> {
    let inv = ShapeInventory::build();
    let csv = to_csv(&shape_rows(&inv))?;
    match cmd {
        ShapesCmd::List { out } => emit(out.as_deref(), csv.as_bytes()),
        ShapesCmd::Dump { out } => {
            write(&out.join("shapes.csv"), csv.as_bytes())?;
            for s in &inv.shapes {
                let px: Vec<u8> = s.mask.cells().iter().map(|&b| u8::from(b)).collect();
                write(&out.join(format!("shape{:02}.pgm", s.id)), &write_pgm(s.width(), s.height(), 1, &px))?;
            }
            eprintln!("wrote {} masks to {}", inv.len(), out.display());
            Ok(())
        }
    }
}

fn dict(cmd: DictCmd) -> Result<()> {
    let inv = ShapeInventory::build();
    match cmd {
        DictCmd::Build { shape, out } => {
            let s = inv.shape(shape)?;
            let d = build_dictionary(s);
            let norms: Vec<Vec<f64>> = d.restriction_norms().chunks(d.width()).map(<[f64]>::to_vec).collect();
            let degenerate: Vec<(usize, usize)> = (0..d.atom_count()).filter(|&k| d.is_degenerate(k)).map(|k| d.freq(k)).collect();
            let doc = serde_json::json!({
                "shape_id": shape,
                "width": d.width(),
                "height": d.height(),
                "support": d.area(),
                "atom_count": d.atom_count(),
                "degenerate": degenerate,
                "restriction_norms": norms,
            });
            let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::Data(e.to_string()))? + "\n";
            emit(out.as_deref(), text.as_bytes())
        }
        DictCmd::Corr { shape, pos, out, file } => {
            let d = build_dictionary(inv.shape(shape)?);
            let (w, h) = (d.width(), d.height());
            if pos.0 >= h || pos.1 >= w {
                return config_error(format!("position {},{} outside the {w}x{h} grid", pos.0, pos.1));
            }
            let center = d.index(pos.0, pos.1);
            let grid: Vec<f64> = (0..d.atom_count()).map(|k| d.correlation(center, k)).collect();
            let bytes = match out {
                MapFormat::Csv => nrec_core::report::heatmap_csv(&grid, w).into_bytes(),
                MapFormat::Pgm => {
                    let (pw, ph) = (w * HEATMAP_CELL, h * HEATMAP_CELL);
                    let px: Vec<u8> = (0..pw * ph)
                        .map(|i| (255.0 * grid[(i / pw / HEATMAP_CELL) * w + (i % pw) / HEATMAP_CELL]).round() as u8)
                        .collect();
                    write_pgm(pw, ph, 255, &px)
                }
            };
            emit(file.as_deref(), &bytes)
        }
    }
}

fn corpus(cmd: CorpusCmd, config: &Option<PathBuf>) -> Result<()> {
    let inv = ShapeInventory::build();
    match cmd {
        CorpusCmd::Gen { shape, count, rho, sigma, seed, out } => {
            if config.is_some() {
                let cfg = load_config(config)?;
                let dir = out_dir(&cfg, &out);
                for &id in &cfg.shapes {
                    let s = inv.shape(id)?;
                    let blocks = nrec_core::experiment::gen_residuals(&cfg.corpus, s, cfg.blocks_per_shape)?;
                    write(&dir.join(format!("shape{id:02}_residuals.nrtx")), &BlockFile::from_residuals(&blocks)?.to_bytes()?)?;
                }
                eprintln!("wrote {} residual files to {}", cfg.shapes.len(), dir.display());
                return Ok(());
            }
            let (Some(shape), Some(count), Some(out)) = (shape, count, out) else {
                return config_error("corpus gen needs --shape, --count and --out (or --config)");
            };
            let blocks = gen_synthetic(inv.shape(shape)?, rho, sigma, seed, count)?;
            write(&out, &BlockFile::from_residuals(&blocks)?.to_bytes()?)?;
            eprintln!("wrote {count} blocks of shape {shape} to {}", out.display());
            Ok(())
        }
        CorpusCmd::Frames { shape, current, previous, radius, out } => {
            let cur = read_pgm(&read(&current)?)?;
            let prev = read_pgm(&read(&previous)?)?;
            let blocks: Vec<_> = gen_from_frames(inv.shape(shape)?, &cur, &prev, radius)?.into_iter().map(|f| f.block).collect();
            write(&out, &BlockFile::from_residuals(&blocks)?.to_bytes()?)?;
            eprintln!("wrote {} blocks of shape {shape} to {}", blocks.len(), out.display());
            Ok(())
        }
        CorpusCmd::Split { input, seed, train, test } => {
            let f = load_blocks(&input)?;
            let (a, b) = split(f.grids.len(), seed)?.select(&f.grids);
            write(&train, &BlockFile { grids: a, ..f.clone() }.to_bytes()?)?;
            write(&test, &BlockFile { grids: b, ..f }.to_bytes()?)?;
            Ok(())
        }
    }
}

fn check_dims(f: &BlockFile, w: usize, h: usize) -> Result<()> {
    if !f.grids.is_empty() && (f.width, f.height) != (w, h) {
        return Err(Failure::Data(format!("blocks are {}x{}, expected {w}x{h}", f.width, f.height)));
    }
    Ok(())
}

fn tx(cmd: TxCmd) -> Result<()> {
    let inv = ShapeInventory::build();
    match cmd {
        TxCmd::Encode { shape, input, step, eps, kmax, out } => {
            let s = inv.shape(shape)?;
            let d = build_dictionary(s);
            let q = QuantParams::new(step)?;
            let f = load_blocks(&input)?;
            check_dims(&f, s.width(), s.height())?;
            let k = kmax.unwrap_or_else(|| default_k_max(&d));
            let signals: Vec<_> = f.residuals(shape).iter().map(|b| b.signal(&s.mask)).collect();
            let codes = omp_batch(&d, &signals, eps, k)?;
            let blocks = quantize_batch(&codes, &d, q)?;
            write(&out, &BlockFile::from_coefficients(&blocks)?.to_bytes()?)?;
            let nz: usize = blocks.iter().map(|b| b.nonzero_count()).sum();
            eprintln!("{} blocks, {:.2} non-zero levels per block", blocks.len(), nz as f64 / blocks.len().max(1) as f64);
            Ok(())
        }
        TxCmd::Decode { shape, input, step, out } => {
            let s = inv.shape(shape)?;
            let d = build_dictionary(s);
            let q = QuantParams::new(step)?;
            let f = load_blocks(&input)?;
            check_dims(&f, s.width(), s.height())?;
            let support = s.mask.support();
            let mut grids = Vec::with_capacity(f.grids.len());
            for b in f.coefficients() {
                let sig = reconstruct(&b, q, &d)?;
                let mut g = vec![0i16; s.width() * s.height()];
                for (&(x, y), v) in support.iter().zip(&sig.samples) {
                    g[y * s.width() + x] = v.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
                }
                grids.push(g);
            }
            write(&out, &BlockFile { width: s.width(), height: s.height(), grids }.to_bytes()?)
        }
    }
}

fn train_cmd(config: &Option<PathBuf>, out: &Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    let inv = ShapeInventory::build();
    let dir = out_dir(&cfg, out);
    let hash = cfg.hash();
    for &id in &cfg.shapes {
        let data = prepare_shape(&cfg, &inv, id)?;
        let f = fit_scheme(cfg.scheme, &data.shape, &data.dict, &data.train, cfg.params())?;
        let stem = format!("shape{id:02}_{}", cfg.scheme.name());
        write(&dir.join(format!("{stem}_model.json")), f.to_doc(id, data.step, &hash).to_json()?.as_bytes())?;
        write(&dir.join(format!("shape{id:02}_train.nrtx")), &BlockFile::from_coefficients(&data.train)?.to_bytes()?)?;
        write(&dir.join(format!("shape{id:02}_test.nrtx")), &BlockFile::from_coefficients(&data.test)?.to_bytes()?)?;
        let (groups, contexts) = f.state.context_counts();
        eprintln!("shape {id:2}: step {:.3}, {groups} groups, {contexts} contexts, {} merges", data.step, f.merges);
    }
    Ok(())
}

fn merge_cmd(model: &Path, delta: Option<f64>, out: &Path) -> Result<()> {
    let (doc, f) = load_model(model)?;
    let SchemeState::Trees(trees) = &f.state else {
        return config_error(format!("{} is not a per-position tree model", model.display()));
    };
    if f.scheme != Scheme::Ctf {
        return config_error(format!("{} is already merged", model.display()));
    }
    let delta = delta.unwrap_or(f.params.delta);
    let (merged, model, steps) = trees.merged(&f.model, delta)?;
    let merges = steps.iter().map(Vec::len).sum();
    let m = FittedModel {
        scheme: Scheme::Ctm,
        params: nrec_core::experiment::ModelParams { delta, ..f.params },
        state: SchemeState::Trees(merged),
        model,
        merges,
    };
    write(out, m.to_doc(doc.shape_id, doc.params.step, &doc.config_hash).to_json()?.as_bytes())?;
    eprintln!("{merges} merges, {} -> {} contexts", f.state.context_counts().1, m.state.context_counts().1);
    Ok(())
}

fn eval_cmd(config: &Option<PathBuf>, model: Option<PathBuf>, test: Option<PathBuf>, out: Option<PathBuf>) -> Result<()> {
    if let (Some(model), Some(test)) = (model, test) {
        let (doc, f) = load_model(&model)?;
        let blocks = load_blocks(&test)?;
        let (w, h) = f.contexter().dims();
        check_dims(&blocks, w, h)?;
        let blocks = blocks.coefficients();
        let prop = f.evaluate(&blocks);
        // both H columns carry this model, so two such reports feed `compare`
        let cmp = compare(&prop, &prop)?;
        let outcome = nrec_core::experiment::ShapeOutcome {
            shape_id: doc.shape_id,
            shape_class: ShapeInventory::build().shape(doc.shape_id)?.shape_class,
            width: w,
            height: h,
            step: doc.params.step,
            bpp: 0.0,
            fitted: f,
            baseline: prop.clone(),
            proposal: prop.clone(),
            comparison: cmp,
        };
        let rows = position_rows(&outcome, &doc.config_hash);
        emit(out.as_deref(), to_csv(&rows)?.as_bytes())?;
        eprintln!("{} symbols, H_ts {:.5} bits/symbol", prop.total_symbols(), prop.bits_per_symbol());
        return Ok(());
    }
    let cfg = load_config(config)?;
    let dir = out_dir(&cfg, &out);
    let res = run_pipeline(&cfg, &dir)?;
    for o in &res.outcomes {
        let s = o.summary(&res.config_hash);
        eprintln!(
            "shape {:2} {} T{} {}: ctx {} dH {:+.4} dH_tl {:+.4} NP {}/{} NP_tl {}",
            s.shape, s.b_d, s.shape_type, s.scheme.name(), s.ctx, s.dh, s.dh_tl, s.np, s.positions, s.np_tl
        );
    }
    eprintln!("wrote {} files to {} (config {})", res.files.len(), dir.display(), res.config_hash);
    Ok(())
}

fn sweep_cmd(config: &Option<PathBuf>, out: Option<PathBuf>) -> Result<()> {
    let cfg = load_config(config)?;
    if cfg.scheme == Scheme::Baseline {
        return config_error("sweep needs a tree scheme (ctf, ctm or cts)");
    }
    let inv = ShapeInventory::build();
    let datas = cfg.shapes.iter().map(|&id| prepare_shape(&cfg, &inv, id)).collect::<nrec_core::Result<Vec<_>>>()?;
    let r = sweep(&datas, cfg.scheme, cfg.delta, cfg.smoothing)?;
    let dir = out_dir(&cfg, &out);
    write(&dir.join(format!("sweep_{}.csv", cfg.scheme.name())), to_csv(&r.points)?.as_bytes())?;
    eprintln!("winner n_nbd {} th_c {}; (4, 0.2) wins: {}", r.winner.0, r.winner.1, r.reference_wins);
    Ok(())
}

fn make_coder(f: &FittedModel, adaptive: bool) -> Result<BlockCoder<'_>> {
    Ok(if adaptive { BlockCoder::adaptive(f.contexter()) } else { BlockCoder::with_static_model(f.contexter(), &f.model)? })
}

fn codec(cmd: CodecCmd) -> Result<()> {
    match cmd {
        CodecCmd::Encode { model, input, out, adaptive } => {
            let (doc, f) = load_model(&model)?;
            let blocks = load_blocks(&input)?;
            let (w, h) = f.contexter().dims();
            check_dims(&blocks, w, h)?;
            let blocks = blocks.coefficients();
            let mut coder = make_coder(&f, adaptive)?;
            let s = encode_stream(doc.shape_id, &blocks, &mut coder)?;
            write(&out, &s.bytes)?;
            eprintln!(
                "{} blocks, {} bytes; ideal bits: br {:.0} lr {:.0} hr {:.0} sign {:.0} zero flags {:.0}",
                blocks.len(),
                s.bytes.len(),
                s.account.br,
                s.account.lr,
                s.account.hr,
                s.account.sign,
                s.account.zero_flag
            );
            Ok(())
        }
        CodecCmd::Decode { model, input, out, adaptive } => {
            let (doc, f) = load_model(&model)?;
            let bytes = read(&input)?;
            let (shape_id, _) = read_header(&bytes)?;
            if shape_id != doc.shape_id {
                return Err(Failure::Data(format!("stream is for shape {shape_id}, model for shape {}", doc.shape_id)));
            }
            let mut coder = make_coder(&f, adaptive)?;
            let (_, blocks) = decode_stream(&bytes, &mut coder)?;
            let (w, h) = f.contexter().dims();
            let file = if blocks.is_empty() { BlockFile { width: w, height: h, grids: Vec::new() } } else { BlockFile::from_coefficients(&blocks)? };
            write(&out, &file.to_bytes()?)
        }
    }
}

fn compare_cmd(a: &Path, b: &Path, out: Option<PathBuf>) -> Result<()> {
    let load = |p: &Path| -> Result<_> {
        let text = String::from_utf8(read(p)?).map_err(|_| Failure::Data(format!("{}: not utf-8", p.display())))?;
        read_position_csv(&text).map_err(|e| Failure::Data(format!("{}: {e}", p.display())))
    };
    let rows = compare_reports(&load(a)?, &load(b)?).map_err(|e| Failure::Data(e.to_string()))?;
    emit(out.as_deref(), to_csv(&rows)?.as_bytes())?;
    let dh: f64 = rows.iter().map(|r| r.delta_h).sum();
    let np = rows.iter().filter(|r| r.delta_h < 0.0).count();
    let np_tl = rows.iter().filter(|r| r.delta_h < 0.0 && r.in_top_left).count();
    eprintln!("{} positions, dH {dh:+.4}, NP {np}, NP_tl {np_tl}", rows.len());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Shapes(c) => shapes(c),
        Cmd::Dict(c) => dict(c),
        Cmd::Corpus(c) => corpus(c, &cli.config),
        Cmd::Tx(c) => tx(c),
        Cmd::Train { out } => train_cmd(&cli.config, &out),
        Cmd::Merge { model, delta, out } => merge_cmd(&model, delta, &out),
        Cmd::Eval { model, test, out } => eval_cmd(&cli.config, model, test, out),
        Cmd::Sweep { out } => sweep_cmd(&cli.config, out),
        Cmd::Codec(c) => codec(c),
        Cmd::Compare { a, b, out } => compare_cmd(&a, &b, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Data(m)) => {
            eprintln!("data error: {m}");
            ExitCode::from(3)
        }
    }
}
