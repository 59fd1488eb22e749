//! Simplified grouped scheme: positions are grouped by baseline region class
//! and by the size of their correlated neighbourhood, and every group shares
//! one merged tree built on a stored N_c template.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::baseline::region_class;
use super::model::{train, Counts, ProbabilityModel, Smoothing};
use super::tree::{merge, ContextTree};
use super::{ContextId, Contexter};
use crate::dictionary::{causal_offsets, neighborhood_map, PartitionedDictionary};
use crate::error::{Error, Result};
use crate::geometry::CanonicalShape;
use crate::transform::CoefficientBlock;

/// Groups with fewer training symbols are folded into a neighbour.
pub const MIN_GROUP_SUPPORT: u64 = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TemplateClass {
    Empty,
    Two,
    Three,
}

impl TemplateClass {
    /// Sizes off by one share a template: 1 joins 2, 4 and up join 3.
    pub fn of(nc: usize) -> Self {
        match nc {
            0 => TemplateClass::Empty,
            1 | 2 => TemplateClass::Two,
            _ => TemplateClass::Three,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CtsGroup {
    pub region_class: usize,
    pub template: TemplateClass,
    pub tree: ContextTree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedScheme {
    pub shape_id: usize,
    pub width: usize,
    pub height: usize,
    pub n_nbd: usize,
    pub th_c: f64,
    /// The stored |N_c| = 2 and |N_c| = 3 offset patterns.
    pub template_two: Vec<(usize, usize)>,
    pub template_three: Vec<(usize, usize)>,
    /// Row-major lookup of each position's template.
    pub position_template: Vec<TemplateClass>,
    pub position_group: Vec<usize>,
    pub groups: Vec<CtsGroup>,
}

fn most_common(patterns: &[&Vec<(usize, usize)>], size: usize) -> Option<Vec<(usize, usize)>> {
    let mut freq: BTreeMap<Vec<(usize, usize)>, usize> = BTreeMap::new();
    for p in patterns.iter().filter(|p| p.len() == size) {
        *freq.entry((*p).clone()).or_default() += 1;
    }
    // ties go to the lexicographically smallest pattern
    freq.into_iter().max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0))).map(|(p, _)| p)
}

fn template_for(patterns: &[&Vec<(usize, usize)>], size: usize, n_nbd: usize) -> Vec<(usize, usize)> {
    if let Some(p) = most_common(patterns, size) {
        return p;
    }
    // nearest available size, cut or padded along the causal order
    let mut by_dist: Vec<usize> = patterns.iter().map(|p| p.len()).filter(|&n| n > 0).collect();
    by_dist.sort_by_key(|&n| (n.abs_diff(size), n));
    if let Some(&n) = by_dist.first() {
        let mut p = most_common(patterns, n).expect("size present");
        p.truncate(size);
        for o in causal_offsets(n_nbd) {
            if p.len() >= size {
                break;
            }
            if !p.contains(&o) {
                p.push(o);
            }
        }
        p.sort_by_key(|&(dr, dc)| (dr + dc, dr));
        return p;
    }
    causal_offsets(n_nbd).into_iter().take(size).collect()
}

pub fn build_cts(shape: &CanonicalShape, dict: &PartitionedDictionary, n_nbd: usize, th_c: f64) -> Result<SimplifiedScheme> {
    if !shape.is_simplified_candidate() {
        return Err(Error::NotSimplifiedShape(shape.id));
    }
    let parts = neighborhood_map(dict, n_nbd, th_c)?;
    let position_template: Vec<TemplateClass> = parts.iter().map(|p| TemplateClass::of(p.nc.len())).collect();
    let pats: Vec<&Vec<(usize, usize)>> = parts.iter().map(|p| &p.nc).collect();
    let template_two = template_for(&pats, 2, n_nbd);
    let template_three = template_for(&pats, 3, n_nbd);
    let nt = causal_offsets(n_nbd);
    let tree_for = |t: TemplateClass| {
        let nc = match t {
            TemplateClass::Empty => Vec::new(),
            TemplateClass::Two => template_two.clone(),
            TemplateClass::Three => template_three.clone(),
        };
        let no = nt.iter().filter(|o| !nc.contains(o)).copied().collect();
        ContextTree::full(nc, no)
    };
    let mut keys: BTreeMap<(usize, TemplateClass), usize> = BTreeMap::new();
    for (i, p) in parts.iter().enumerate() {
        keys.entry((region_class(p.position.0, p.position.1), position_template[i])).or_default();
    }
    let mut groups = Vec::new();
    for (id, (k, v)) in keys.iter_mut().enumerate() {
        *v = id;
        groups.push(CtsGroup { region_class: k.0, template: k.1, tree: tree_for(k.1) });
    }
    let position_group =
        parts.iter().enumerate().map(|(i, p)| keys[&(region_class(p.position.0, p.position.1), position_template[i])]).collect();
    Ok(SimplifiedScheme {
        shape_id: shape.id,
        width: dict.width(),
        height: dict.height(),
        n_nbd,
        th_c,
        template_two,
        template_three,
        position_template,
        position_group,
        groups,
    })
}

impl SimplifiedScheme {
    pub fn template_offsets(&self, t: TemplateClass) -> &[(usize, usize)] {
        match t {
            TemplateClass::Empty => &[],
            TemplateClass::Two => &self.template_two,
            TemplateClass::Three => &self.template_three,
        }
    }

    pub fn total_leaves(&self) -> usize {
        self.groups.iter().map(|g| g.tree.leaf_count()).sum()
    }

    /// Folds groups with less than `min_support` training symbols into the
    /// group with the same template and the closest region class.
    fn coalesce(&mut self, support: &[u64], min_support: u64) {
        let n = self.groups.len();
        let mut target: Vec<usize> = (0..n).collect();
        for g in 0..n {
            if support[g] >= min_support {
                continue;
            }
            let best = (0..n)
                .filter(|&o| o != g && support[o] >= min_support && self.groups[o].template == self.groups[g].template)
                .min_by_key(|&o| (self.groups[o].region_class.abs_diff(self.groups[g].region_class), self.groups[o].region_class));
            if let Some(o) = best {
                target[g] = o;
            }
        }
        let kept: Vec<usize> = (0..n).filter(|&g| target[g] == g).collect();
        let renum: BTreeMap<usize, usize> = kept.iter().enumerate().map(|(i, &g)| (g, i)).collect();
        self.position_group = self.position_group.iter().map(|&g| renum[&target[g]]).collect();
        self.groups = kept.iter().map(|&g| self.groups[g].clone()).collect();
    }

    /// Coalesces sparse groups and merges every group tree on the training
    /// blocks. Returns the merged counts.
    pub fn fit(&mut self, train_blocks: &[CoefficientBlock], delta: f64, min_support: u64, smoothing: Smoothing) -> Result<ProbabilityModel> {
        let full = train(train_blocks, self, smoothing);
        let support: Vec<u64> = full.counts.iter().map(|g| g.iter().flatten().sum()).collect();
        self.coalesce(&support, min_support);
        let full = train(train_blocks, self, smoothing);
        let mut counts: Vec<Vec<Counts>> = Vec::with_capacity(self.groups.len());
        for (g, c) in self.groups.iter_mut().zip(&full.counts) {
            let (m, _) = merge(&g.tree, c, delta)?;
            counts.push(m.fold_counts(c));
            g.tree = m;
        }
        Ok(ProbabilityModel::with_counts(counts, smoothing))
    }

    pub fn rebuild_maps(&mut self) {
        for g in &mut self.groups {
            g.tree.rebuild_map();
        }
    }
}

impl Contexter for SimplifiedScheme {
    fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    fn group_count(&self) -> usize {
        self.groups.len()
    }

    fn leaf_count(&self, group: usize) -> usize {
        self.groups[group].tree.leaf_count()
    }

    fn context(&self, block: &CoefficientBlock, row: usize, col: usize) -> ContextId {
        let g = self.position_group[row * self.width + col];
        (g, self.groups[g].tree.leaf(block, row, col))
    }
}
