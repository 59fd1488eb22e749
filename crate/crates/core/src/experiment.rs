//! Experiment driver: corpus generation, OMP, quantization, scheme fitting,
//! H_ts evaluation against the baseline, parameter sweeps and codec runs.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coder::{decode_stream, encode_stream, BitAccount, BlockCoder};
use crate::context::{
    build_cts, compare, eval_hts, fit_trees, train, BaselineContexter, Comparison, Contexter, Counts, EntropyReport,
    LeafSpec, ProbabilityModel, SimplifiedScheme, Smoothing, TreeContexter, BASELINE_CONTEXTS,
    MIN_GROUP_SUPPORT, REGION_CLASSES,
};
use crate::corpus::{gen_from_frames, gen_synthetic, read_pgm, split, CorpusSource, CorpusSpec, ResidualBlock};
use crate::dictionary::{build_dictionary, PartitionedDictionary};
use crate::error::{Error, Result};
use crate::geometry::{CanonicalShape, ShapeInventory, ShapeType};
use crate::transform::{default_k_max, omp_batch, quantize_batch, CoefficientBlock, QuantParams, SparseCode};

pub const MODEL_FORMAT: &str = "nrecm/1";
pub const SWEEP_N_NBD: [usize; 3] = [2, 3, 4];
pub const SWEEP_TH_C: [f64; 4] = [0.09, 0.15, 0.2, 0.25];
/// Sweep points whose total bits differ by less than this fraction tie.
pub const SWEEP_TIE_REL: f64 = 1e-12;
/// Blocks used to calibrate the step size against a target rate.
pub const CALIBRATION_BLOCKS: usize = 2000;
const CALIBRATION_ROUNDS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Baseline,
    Ctf,
    Ctm,
    Cts,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Baseline => "baseline",
            Scheme::Ctf => "ctf",
            Scheme::Ctm => "ctm",
            Scheme::Cts => "cts",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Scheme::Baseline),
            "ctf" => Ok(Scheme::Ctf),
            "ctm" => Ok(Scheme::Ctm),
            "cts" => Ok(Scheme::Cts),
            _ => Err(Error::InvalidParameter(format!("unknown scheme {s:?}"))),
        }
    }
}

fn default_eps_res() -> f64 {
    1e-3
}
fn default_n_nbd() -> usize {
    4
}
fn default_th_c() -> f64 {
    0.2
}
fn default_delta() -> f64 {
    1e-4
}
fn default_smoothing() -> Smoothing {
    Smoothing::KrichevskyTrofimov
}
fn default_seed() -> u64 {
    1
}
fn default_out_dir() -> String {
    "out".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub shapes: Vec<usize>,
    pub corpus: CorpusSource,
    pub blocks_per_shape: usize,
    /// Quantizer step; replaced per shape by calibration when `target_bpp` is set.
    pub step: f64,
    #[serde(default)]
    pub target_bpp: Option<f64>,
    #[serde(default = "default_eps_res")]
    pub eps_res: f64,
    /// Defaults to a quarter of the support.
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default = "default_n_nbd")]
    pub n_nbd: usize,
    #[serde(default = "default_th_c")]
    pub th_c: f64,
    /// Merge threshold in bits per symbol of the tree.
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub scheme: Scheme,
    #[serde(default = "default_smoothing")]
    pub smoothing: Smoothing,
    /// Seed of the train/test split.
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self, inv: &ShapeInventory) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.shapes.is_empty() {
            return bad("no shapes listed".into());
        }
        for &id in &self.shapes {
            let s = inv.shape(id)?;
            if self.scheme == Scheme::Cts && !s.is_simplified_candidate() {
                return Err(Error::NotSimplifiedShape(id));
            }
            if let Some(k) = self.k_max {
                if k == 0 || k > s.width() * s.height() {
                    return bad(format!("k_max {k} invalid for shape {id}"));
                }
            }
        }
        if self.blocks_per_shape < 5 {
            return bad(format!("blocks_per_shape {} < 5", self.blocks_per_shape));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return bad(format!("step {} must be positive", self.step));
        }
        if let Some(t) = self.target_bpp {
            if !(t > 0.0) {
                return bad(format!("target_bpp {t} must be positive"));
            }
        }
        if !(self.eps_res >= 0.0) {
            return bad(format!("eps_res {} < 0", self.eps_res));
        }
        if self.n_nbd == 0 {
            return bad("n_nbd must be at least 1".into());
        }
        if !(self.th_c > 0.0 && self.th_c <= 1.0) {
            return bad(format!("th_c {} outside (0, 1]", self.th_c));
        }
        if !(self.delta >= 0.0) {
            return bad(format!("delta {} < 0", self.delta));
        }
        match &self.corpus {
            CorpusSource::Synthetic { rho, sigma, .. } => {
                if !(0.0..1.0).contains(rho) || !(*sigma > 0.0) {
                    return bad(format!("synthetic corpus needs rho in [0,1) and sigma > 0, got {rho}, {sigma}"));
                }
            }
            CorpusSource::Frames { radius, .. } => {
                if *radius > 64 {
                    return bad(format!("search radius {radius} too large"));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir.clear();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn corpus_spec(&self) -> CorpusSpec {
        CorpusSpec { source: self.corpus.clone(), shapes: self.shapes.clone(), blocks_per_shape: self.blocks_per_shape }
    }

    pub fn params(&self) -> ModelParams {
        ModelParams { n_nbd: self.n_nbd, th_c: self.th_c, delta: self.delta, smoothing: self.smoothing }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_nbd: usize,
    pub th_c: f64,
    pub delta: f64,
    pub smoothing: Smoothing,
}

/// Residual blocks of one shape as the corpus spec describes them.
pub fn gen_residuals(source: &CorpusSource, shape: &CanonicalShape, count: usize) -> Result<Vec<ResidualBlock>> {
    match source {
        CorpusSource::Synthetic { rho, sigma, seed } => gen_synthetic(shape, *rho, *sigma, *seed, count),
        CorpusSource::Frames { current, previous, radius } => {
            let cur = read_pgm(&std::fs::read(current)?)?;
            let prev = read_pgm(&std::fs::read(previous)?)?;
            let mut blocks: Vec<ResidualBlock> =
                gen_from_frames(shape, &cur, &prev, *radius)?.into_iter().map(|f| f.block).collect();
            blocks.truncate(count);
            Ok(blocks)
        }
    }
}

pub fn sparse_codes(dict: &PartitionedDictionary, shape: &CanonicalShape, blocks: &[ResidualBlock], eps_res: f64, k_max: usize) -> Result<Vec<SparseCode>> {
    let signals: Vec<_> = blocks.iter().map(|b| b.signal(&shape.mask)).collect();
    omp_batch(dict, &signals, eps_res, k_max)
}

/// Rate in bits per support sample of the adaptive baseline coder.
pub fn baseline_rate(blocks: &[CoefficientBlock], shape: &CanonicalShape) -> Result<f64> {
    if blocks.is_empty() {
        return Ok(0.0);
    }
    let ctx = BaselineContexter::shared(shape.width(), shape.height());
    let mut coder = BlockCoder::adaptive(&ctx);
    let s = encode_stream(shape.id, blocks, &mut coder)?;
    Ok(s.bytes.len() as f64 * 8.0 / (blocks.len() * shape.area()) as f64)
}

/// Step size whose adaptive baseline rate is closest to `target_bpp`, by
/// bisection in the log domain over the first calibration blocks.
pub fn calibrate_step(codes: &[SparseCode], dict: &PartitionedDictionary, shape: &CanonicalShape, target_bpp: f64) -> Result<f64> {
    let sample = &codes[..codes.len().min(CALIBRATION_BLOCKS)];
    let rate = |log_step: f64| -> Result<f64> {
        let blocks = quantize_batch(sample, dict, QuantParams::new(log_step.exp2())?)?;
        baseline_rate(&blocks, shape)
    };
    let (mut lo, mut hi) = (-6.0f64, 14.0f64);
    for _ in 0..CALIBRATION_ROUNDS {
        let mid = 0.5 * (lo + hi);
        if rate(mid)? > target_bpp {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp2())
}

/// Quantized train/test data of one shape.
#[derive(Clone, Debug)]
pub struct ShapeData {
    pub shape: CanonicalShape,
    pub dict: PartitionedDictionary,
    pub step: f64,
    pub train: Vec<CoefficientBlock>,
    pub test: Vec<CoefficientBlock>,
    /// Adaptive baseline rate on the test blocks.
    pub bpp: f64,
}

impl ShapeData {
    pub fn from_codes(shape: &CanonicalShape, dict: PartitionedDictionary, codes: &[SparseCode], step: f64, seed: u64) -> Result<Self> {
        let blocks = quantize_batch(codes, &dict, QuantParams::new(step)?)?;
        let (train, test) = split(blocks.len(), seed)?.select(&blocks);
        let bpp = baseline_rate(&test, shape)?;
        Ok(ShapeData { shape: shape.clone(), dict, step, train, test, bpp })
    }
}

/// Generates, transforms, quantizes and splits the corpus of one shape.
pub fn prepare_shape(cfg: &ExperimentConfig, inv: &ShapeInventory, id: usize) -> Result<ShapeData> {
    let shape = inv.shape(id)?;
    let dict = build_dictionary(shape);
    let residuals = gen_residuals(&cfg.corpus, shape, cfg.blocks_per_shape)?;
    let k_max = cfg.k_max.unwrap_or_else(|| default_k_max(&dict)).min(dict.atom_count());
    let codes = sparse_codes(&dict, shape, &residuals, cfg.eps_res, k_max)?;
    let step = match cfg.target_bpp {
        Some(t) => calibrate_step(&codes, &dict, shape, t)?,
        None => cfg.step,
    };
    ShapeData::from_codes(shape, dict, &codes, step, cfg.seed)
}

/// Contexter of a fitted scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeState {
    Baseline(BaselineContexter),
    Trees(TreeContexter),
    Simplified(SimplifiedScheme),
}

impl SchemeState {
    pub fn contexter(&self) -> &dyn Contexter {
        match self {
            SchemeState::Baseline(b) => b,
            SchemeState::Trees(t) => t,
            SchemeState::Simplified(s) => s,
        }
    }

    fn rebuild_maps(&mut self) {
        match self {
            SchemeState::Baseline(_) => {}
            SchemeState::Trees(t) => t.rebuild_maps(),
            SchemeState::Simplified(s) => s.rebuild_maps(),
        }
    }

    /// Number of trees (or shared tables) and total contexts.
    pub fn context_counts(&self) -> (usize, usize) {
        let c = self.contexter();
        let total = (0..c.group_count()).map(|g| c.leaf_count(g)).sum();
        (c.group_count(), total)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel {
    pub scheme: Scheme,
    pub params: ModelParams,
    pub state: SchemeState,
    pub model: ProbabilityModel,
    /// Accepted merges over all trees.
    pub merges: usize,
}

pub fn fit_scheme(scheme: Scheme, shape: &CanonicalShape, dict: &PartitionedDictionary, train_blocks: &[CoefficientBlock], p: ModelParams) -> Result<FittedModel> {
    let (state, model, merges) = match scheme {
        Scheme::Baseline => {
            let b = BaselineContexter::shared(dict.width(), dict.height());
            let m = train(train_blocks, &b, p.smoothing);
            (SchemeState::Baseline(b), m, 0)
        }
        Scheme::Ctf => {
            let t = TreeContexter::full(dict, p.n_nbd, p.th_c)?;
            let m = train(train_blocks, &t, p.smoothing);
            (SchemeState::Trees(t), m, 0)
        }
        Scheme::Ctm => {
            let f = fit_trees(dict, train_blocks, p.n_nbd, p.th_c, p.delta, p.smoothing)?;
            let merges = f.steps.iter().map(Vec::len).sum();
            (SchemeState::Trees(f.merged), f.merged_model, merges)
        }
        Scheme::Cts => {
            let mut s = build_cts(shape, dict, p.n_nbd, p.th_c)?;
            let m = s.fit(train_blocks, p.delta, MIN_GROUP_SUPPORT, p.smoothing)?;
            (SchemeState::Simplified(s), m, 0)
        }
    };
    Ok(FittedModel { scheme, params: p, state, model, merges })
}

impl FittedModel {
    pub fn contexter(&self) -> &dyn Contexter {
        self.state.contexter()
    }

    pub fn evaluate(&self, test: &[CoefficientBlock]) -> EntropyReport {
        eval_hts(&self.model, test, self.contexter())
    }

    pub fn to_doc(&self, shape_id: usize, step: f64, config_hash: &str) -> ModelDoc {
        let c = self.contexter();
        let trees = (0..c.group_count())
            .map(|g| TreeDoc { group: g, label: group_label(&self.state, g), leaves: leaf_labels(&self.state, g), counts: self.model.counts[g].clone() })
            .collect();
        ModelDoc {
            format: MODEL_FORMAT.into(),
            shape_id,
            scheme: self.scheme,
            params: DocParams { n_nbd: self.params.n_nbd, th_c: self.params.th_c, delta: self.params.delta, step },
            smoothing: self.params.smoothing,
            config_hash: config_hash.into(),
            state: self.state.clone(),
            trees,
        }
    }
}

fn group_label(state: &SchemeState, g: usize) -> String {
    match state {
        SchemeState::Baseline(b) if b.per_position => format!("pos {},{}", g / b.width, g % b.width),
        SchemeState::Baseline(_) => "shared".into(),
        SchemeState::Trees(t) => format!("pos {},{}", g / t.width, g % t.width),
        SchemeState::Simplified(s) => format!("class {} template {:?}", s.groups[g].region_class, s.groups[g].template),
    }
}

fn leaf_labels(state: &SchemeState, g: usize) -> Vec<String> {
    let tree = match state {
        SchemeState::Baseline(b) => {
            let n = b.leaf_count(g);
            return (0..n)
                .map(|l| match (b.per_position, l) {
                    (_, 0) if !b.per_position => "dc".into(),
                    (false, l) => format!("class {} sum {}", 1 + (l - 1) / 5, (l - 1) % 5),
                    (true, l) => format!("sum {l}"),
                })
                .collect();
        }
        SchemeState::Trees(t) => &t.trees[g],
        SchemeState::Simplified(s) => &s.groups[g].tree,
    };
    tree.leaves()
        .into_iter()
        .map(|l| match l {
            LeafSpec::Zero => "zero".into(),
            LeafSpec::Interval { c2, c3_lo, c3_hi } => format!("c2 {c2} c3 {c3_lo}..{c3_hi}"),
            LeafSpec::Full => "full".into(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DocParams {
    pub n_nbd: usize,
    pub th_c: f64,
    pub delta: f64,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeDoc {
    pub group: usize,
    pub label: String,
    pub leaves: Vec<String>,
    pub counts: Vec<Counts>,
}

/// Persisted trained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub format: String,
    pub shape_id: usize,
    pub scheme: Scheme,
    pub params: DocParams,
    pub smoothing: Smoothing,
    pub config_hash: String,
    pub state: SchemeState,
    pub trees: Vec<TreeDoc>,
}

impl ModelDoc {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::BadContainer(format!("model format {:?}, expected {MODEL_FORMAT:?}", doc.format)));
        }
        Ok(doc)
    }

    pub fn into_fitted(self) -> Result<FittedModel> {
        let mut state = self.state;
        state.rebuild_maps();
        let c = state.contexter();
        if self.trees.len() != c.group_count() || self.trees.iter().enumerate().any(|(g, t)| t.counts.len() != c.leaf_count(g)) {
            return Err(Error::BadContainer("tree counts do not match the scheme layout".into()));
        }
        let counts = self.trees.into_iter().map(|t| t.counts).collect();
        let params = ModelParams { n_nbd: self.params.n_nbd, th_c: self.params.th_c, delta: self.params.delta, smoothing: self.smoothing };
        Ok(FittedModel { scheme: self.scheme, params, state, model: ProbabilityModel::with_counts(counts, self.smoothing), merges: 0 })
    }
}

/// One shape evaluated under a scheme against the baseline.
#[derive(Clone, Debug)]
pub struct ShapeOutcome {
    pub shape_id: usize,
    pub shape_class: ShapeType,
    pub width: usize,
    pub height: usize,
    pub step: f64,
    pub bpp: f64,
    pub fitted: FittedModel,
    pub baseline: EntropyReport,
    pub proposal: EntropyReport,
    pub comparison: Comparison,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub shape: usize,
    /// Bounding box, width x height.
    pub b_d: String,
    #[serde(rename = "type")]
    pub shape_type: u8,
    pub scheme: Scheme,
    pub step: f64,
    pub bpp: f64,
    /// Baseline region classes and baseline contexts.
    pub ctx_aom_classes: usize,
    pub ctx_aom: usize,
    pub trees: usize,
    /// Contexts including the all-zero leaf of every tree.
    pub ctx: usize,
    pub ctx_excl_zero_leaf: usize,
    pub dh: f64,
    pub dh_tl: f64,
    pub np: usize,
    pub np_tl: usize,
    pub positions: usize,
    pub h_base: f64,
    pub h_prop: f64,
    pub config_hash: String,
}

impl ShapeOutcome {
    pub fn summary(&self, config_hash: &str) -> SummaryRow {
        let (trees, ctx) = self.fitted.state.context_counts();
        let zero_leaves = match self.fitted.state {
            SchemeState::Baseline(_) => 0,
            _ => trees,
        };
        SummaryRow {
            shape: self.shape_id,
            b_d: format!("{}x{}", self.width, self.height),
            shape_type: self.shape_class.number(),
            scheme: self.fitted.scheme,
            step: self.step,
            bpp: self.bpp,
            ctx_aom_classes: REGION_CLASSES,
            ctx_aom: BASELINE_CONTEXTS,
            trees,
            ctx,
            ctx_excl_zero_leaf: ctx - zero_leaves,
            dh: self.comparison.delta_total(),
            dh_tl: self.comparison.delta_top_left(),
            np: self.comparison.np(),
            np_tl: self.comparison.np_top_left(),
            positions: self.comparison.rows.len(),
            h_base: self.baseline.bits_per_symbol(),
            h_prop: self.proposal.bits_per_symbol(),
            config_hash: config_hash.into(),
        }
    }
}

/// Baseline matched to a scheme: per-position distributions against the
/// per-position trees, the shared region map otherwise.
pub fn fit_baseline(scheme: Scheme, width: usize, height: usize, train_blocks: &[CoefficientBlock], smoothing: Smoothing) -> FittedModel {
    let b = match scheme {
        Scheme::Ctf | Scheme::Ctm => BaselineContexter::per_position(width, height),
        Scheme::Baseline | Scheme::Cts => BaselineContexter::shared(width, height),
    };
    let model = train(train_blocks, &b, smoothing);
    let params = ModelParams { n_nbd: 0, th_c: 0.0, delta: 0.0, smoothing };
    FittedModel { scheme: Scheme::Baseline, params, state: SchemeState::Baseline(b), model, merges: 0 }
}

/// Fits `scheme` and the baseline on the training split and compares their
/// per-position H_ts on the test split.
pub fn evaluate_shape(data: &ShapeData, scheme: Scheme, p: ModelParams) -> Result<ShapeOutcome> {
    let base = fit_baseline(scheme, data.dict.width(), data.dict.height(), &data.train, p.smoothing);
    let baseline = base.evaluate(&data.test);
    let (fitted, proposal) = if scheme == Scheme::Baseline {
        (base, baseline.clone())
    } else {
        let f = fit_scheme(scheme, &data.shape, &data.dict, &data.train, p)?;
        let r = f.evaluate(&data.test);
        (f, r)
    };
    let comparison = compare(&baseline, &proposal)?;
    Ok(ShapeOutcome {
        shape_id: data.shape.id,
        shape_class: data.shape.shape_class,
        width: data.shape.width(),
        height: data.shape.height(),
        step: data.step,
        bpp: data.bpp,
        fitted,
        baseline,
        proposal,
        comparison,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_nbd: usize,
    pub th_c: f64,
    /// Test-set BR code length summed over shapes, bits.
    pub total_bits: f64,
    pub bits_per_symbol: f64,
    pub contexts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub scheme: Scheme,
    pub points: Vec<SweepPoint>,
    pub winner: (usize, f64),
    /// Whether `(4, 0.2)` is the winner on this corpus.
    pub reference_wins: bool,
}

/// Index of the smallest total under the tie-break: grid order is
/// ascending `n_nbd`, then ascending `th_c`, and near-equal totals keep
/// the earlier point.
pub fn sweep_winner(points: &[SweepPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        match best {
            None => best = Some(i),
            Some(b) => {
                let bt = points[b].total_bits;
                if p.total_bits < bt - SWEEP_TIE_REL * bt.abs() {
                    best = Some(i);
                }
            }
        }
    }
    best
}

pub fn sweep(datas: &[ShapeData], scheme: Scheme, delta: f64, smoothing: Smoothing) -> Result<SweepReport> {
    if scheme == Scheme::Baseline {
        return Err(Error::InvalidParameter("the baseline has no neighbourhood parameters to sweep".into()));
    }
    let mut points = Vec::with_capacity(SWEEP_N_NBD.len() * SWEEP_TH_C.len());
    for &n_nbd in &SWEEP_N_NBD {
        for &th_c in &SWEEP_TH_C {
            let p = ModelParams { n_nbd, th_c, delta, smoothing };
            let (mut bits, mut syms, mut contexts) = (0.0, 0u64, 0usize);
            for d in datas {
                let f = fit_scheme(scheme, &d.shape, &d.dict, &d.train, p)?;
                let r = f.evaluate(&d.test);
                bits += r.total_bits();
                syms += r.total_symbols();
                contexts += f.state.context_counts().1;
            }
            points.push(SweepPoint { n_nbd, th_c, total_bits: bits, bits_per_symbol: bits / syms.max(1) as f64, contexts });
        }
    }
    let w = sweep_winner(&points).expect("non-empty grid");
    let winner = (points[w].n_nbd, points[w].th_c);
    Ok(SweepReport { scheme, points, reference_wins: winner == (4, 0.2), winner })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodecReport {
    pub blocks: usize,
    pub bytes: usize,
    pub account: BitAccount,
    /// BR symbols coded and their H_ts code length under the same model.
    pub br_symbols: u64,
    pub hts_bits: f64,
    pub round_trip: bool,
}

/// Codes `blocks` with the fitted scheme (static tables from the trained
/// counts, or adaptive tables) and decodes them back.
pub fn codec_run(fitted: &FittedModel, shape_id: usize, blocks: &[CoefficientBlock], adaptive: bool) -> Result<CodecReport> {
    let c = fitted.contexter();
    let make = || -> Result<BlockCoder<'_>> {
        if adaptive {
            Ok(BlockCoder::adaptive(c))
        } else {
            BlockCoder::with_static_model(c, &fitted.model)
        }
    };
    let mut enc = make()?;
    let stream = encode_stream(shape_id, blocks, &mut enc)?;
    let mut dec = make()?;
    let (_, decoded) = decode_stream(&stream.bytes, &mut dec)?;
    let round_trip = decoded == blocks && enc.checksum() == dec.checksum();
    let hts = eval_hts(&fitted.model, blocks, c);
    Ok(CodecReport {
        blocks: blocks.len(),
        bytes: stream.bytes.len(),
        account: stream.account,
        br_symbols: hts.total_symbols(),
        hts_bits: hts.total_bits(),
        round_trip,
    })
}
