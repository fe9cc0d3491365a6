//! Divergence graphs of unipotent sequences, UDS subsets and their weight assignments.

use std::collections::BTreeSet;
use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arith::rational::q;
use crate::arith::Q;
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::torus::{LieParam, TorusSpec};
use crate::wedge::{gram_norm, plucker, select_columns, subset_rank};

pub const ZERO_TOL: f64 = 1e-8;
pub const DIVERGE_FACTOR: f64 = 1e3;
pub const MAX_UDS_VERTICES: usize = 20;

/// Sample indices used when none are given.
pub const DEFAULT_SAMPLES: [f64; 5] = [10.0, 1e3, 1e5, 1e8, 1e10];

/// Unipotent sequence i ↦ u_i in canonical coordinates.
pub type Sampler<'a> = &'a (dyn Fn(f64) -> DMatrix<f64> + Sync);

/// Block-vertices 1 < … < l₀ < [l₁] < … < [l_{a₀}] and the coordinates each one covers.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexLayout {
    names: Vec<String>,
    ranges: Vec<Range<usize>>,
}

impl VertexLayout {
    pub fn from_spec(spec: &TorusSpec) -> Self {
        let names = (0..spec.l0())
            .map(|i| (i + 1).to_string())
            .chain(spec.blocks().iter().enumerate().map(|(j, b)| format!("[l{}:{}]", j + 1, b.degree())))
            .collect();
        VertexLayout {
            names,
            ranges: spec.vertex_ranges(),
        }
    }

    /// The split torus of SL_n: n singleton vertices.
    pub fn split(n: usize) -> Self {
        VertexLayout {
            names: (1..=n).map(|i| i.to_string()).collect(),
            ranges: (0..n).map(|i| i..i + 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    /// Underlying coordinates of a vertex set.
    pub fn coordinates(&self, vertices: &[usize]) -> Vec<usize> {
        let mut c: Vec<usize> = vertices.iter().flat_map(|&v| self.ranges[v].clone()).collect();
        c.sort_unstable();
        c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParabolicDecomposition {
    pub delta: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub h: DMatrix<f64>,
    pub t: LieParam,
    /// max |g − δ·u·h·exp(t)|
    pub residual: f64,
}

/// g = δ·u·h·exp(t) with δ orthogonal, u block-unipotent, h block-diagonal of unit
/// determinant (identity in split slots) and t split. Built from g = QR with R upper triangular.
pub fn parabolic_decompose(g: &DMatrix<f64>, spec: &TorusSpec) -> Result<ParabolicDecomposition> {
    let n = spec.n();
    if g.nrows() != n || g.ncols() != n {
        return Err(Error::Dimension(format!("g is {}×{}, torus has N = {n}", g.nrows(), g.ncols())));
    }
    let sv = g.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::IllConditioned(cond));
    }
    let det = g.determinant();
    if (det - 1.0).abs() > 1e-9 * cond.max(1.0) {
        return Err(Error::Determinant(format!("{det}")));
    }
    let (mut qm, mut r) = g.clone().qr().unpack();
    for i in 0..n {
        if r[(i, i)] < 0.0 {
            qm.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    let ranges = spec.vertex_ranges();
    let mut split = Vec::with_capacity(ranges.len());
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut d = DMatrix::<f64>::zeros(n, n);
    for rg in &ranges {
        let l = rg.len();
        let block = r.view((rg.start, rg.start), (l, l)).into_owned();
        let tk = block.determinant().ln() / l as f64;
        split.push(tk);
        d.view_mut((rg.start, rg.start), (l, l)).copy_from(&block);
        if l > 1 {
            h.view_mut((rg.start, rg.start), (l, l)).copy_from(&(block / tk.exp()));
        }
    }
    let d_inv = d.try_inverse().ok_or(Error::SingularBasis)?;
    let u = &r * d_inv;
    let mut t = spec.zero_param();
    // remove rounding drift from the trace
    let mult = spec.multiplicities();
    let drift: f64 = split.iter().zip(&mult).map(|(x, m)| x * *m as f64).sum::<f64>() / n as f64;
    t.split = split.iter().map(|x| x - drift).collect();
    let e = spec.torus_element(&t)?;
    let rebuilt = &qm * &u * &h * &e;
    let residual = (g - rebuilt).amax();
    Ok(ParabolicDecomposition {
        delta: qm,
        u,
        h,
        t,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockLabel {
    Divergent,
    Zero,
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockClass {
    pub row: usize,
    pub col: usize,
    pub label: BlockLabel,
    /// Least-squares slope of log‖u_i^{(ξ,ζ)}‖ against log i over nonzero samples.
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPattern {
    pub vertices: Vec<String>,
    pub blocks: Vec<BlockClass>,
}

impl BlockPattern {
    pub fn label(&self, row: usize, col: usize) -> Option<BlockLabel> {
        self.blocks.iter().find(|b| b.row == row && b.col == col).map(|b| b.label)
    }

    pub fn ambiguous(&self) -> Vec<(usize, usize)> {
        self.blocks
            .iter()
            .filter(|b| b.label == BlockLabel::Ambiguous)
            .map(|b| (b.row, b.col))
            .collect()
    }
}

fn check_samples(samples: &[f64]) -> Result<()> {
    if samples.len() < 4 || samples.windows(2).any(|w| !(w[0] < w[1])) || samples[0] <= 0.0 {
        return Err(Error::Precondition(
            "need at least 4 positive, strictly increasing sample indices".into(),
        ));
    }
    Ok(())
}

/// Labels every off-diagonal block (ξ, ζ) of the sampled sequence.
pub fn classify_blocks(
    sampler: Sampler,
    layout: &VertexLayout,
    samples: &[f64],
    zero_tol: f64,
    diverge_factor: f64,
) -> Result<BlockPattern> {
    check_samples(samples)?;
    let mats: Vec<DMatrix<f64>> = samples.iter().map(|&i| sampler(i)).collect();
    if let Some(m) = mats.iter().find(|m| m.nrows() != layout.n() || m.ncols() != layout.n()) {
        return Err(Error::Dimension(format!("sampler returned {}×{}, expected N = {}", m.nrows(), m.ncols(), layout.n())));
    }
    let k = layout.len();
    let mut blocks = Vec::new();
    for row in 0..k {
        for col in 0..k {
            if row == col {
                continue;
            }
            let (rr, cr) = (&layout.ranges[row], &layout.ranges[col]);
            let norms: Vec<f64> = mats
                .iter()
                .map(|m| m.view((rr.start, cr.start), (rr.len(), cr.len())).norm())
                .collect();
            let first = norms[0];
            let last = *norms.last().unwrap();
            let label = if norms.iter().all(|&x| x < zero_tol) {
                BlockLabel::Zero
            } else if (first == 0.0 || last / first > diverge_factor) && last > 1.0 / zero_tol {
                BlockLabel::Divergent
            } else {
                BlockLabel::Ambiguous
            };
            blocks.push(BlockClass {
                row,
                col,
                label,
                exponent: loglog_slope(samples, &norms),
            });
        }
    }
    Ok(BlockPattern {
        vertices: layout.names.clone(),
        blocks,
    })
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(_, y)| **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceGraph {
    vertices: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<String>,
    adjacency: Vec<Vec<usize>>,
}

impl DivergenceGraph {
    pub fn new(vertices: Vec<String>) -> Self {
        DivergenceGraph {
            vertices,
            edges: BTreeSet::new(),
        }
    }

    /// Vertices named 1..n.
    pub fn with_vertices(n: usize) -> Self {
        Self::new((1..=n).map(|i| i.to_string()).collect())
    }

    /// Graph on n vertices whose edges are the set bits of `mask` over the lexicographic pair list.
    pub fn from_edge_mask(n: usize, mask: u64) -> Self {
        let mut g = Self::with_vertices(n);
        let mut bit = 0;
        for a in 0..n {
            for b in a + 1..n {
                if mask >> bit & 1 == 1 {
                    g.add_edge(a, b);
                }
                bit += 1;
            }
        }
        g
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert!(a != b && a < self.len() && b < self.len(), "bad edge ({a}, {b})");
        self.edges.insert((a.min(b), a.max(b)));
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        (0..self.len()).filter(|&w| w != v && self.has_edge(v, w)).collect()
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            comp[s] = id;
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for w in self.neighbours(v) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.len() <= 1 || self.components().len() == 1
    }

    /// A nonzero trace-zero split parameter constant on each side of a component split,
    /// centralizing every sequence with this graph; None when connected.
    pub fn centralizing_direction(&self, multiplicities: &[usize]) -> Option<Vec<f64>> {
        if self.is_connected() {
            return None;
        }
        let comp = &self.components()[0];
        let inside: f64 = comp.iter().map(|&v| multiplicities[v] as f64).sum();
        let total: f64 = multiplicities.iter().map(|&m| m as f64).sum();
        let outside = total - inside;
        Some(
            (0..self.len())
                .map(|v| if comp.contains(&v) { outside } else { -inside })
                .collect(),
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!(GraphJson {
            vertices: self.vertices.clone(),
            adjacency: (0..self.len()).map(|v| self.neighbours(v)).collect(),
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let g: GraphJson = serde_json::from_value(v.clone()).map_err(|e| Error::Precondition(e.to_string()))?;
        if g.adjacency.len() != g.vertices.len() {
            return Err(Error::Dimension("adjacency length differs from vertex count".into()));
        }
        let mut out = DivergenceGraph::new(g.vertices);
        for (a, ns) in g.adjacency.iter().enumerate() {
            for &b in ns {
                if b >= out.len() || b == a {
                    return Err(Error::Precondition(format!("bad edge ({a}, {b})")));
                }
                out.add_edge(a, b);
            }
        }
        Ok(out)
    }
}

/// Edge {ξ, ζ} iff the (ξ, ζ) or (ζ, ξ) block diverges.
pub fn build_graph(pattern: &BlockPattern) -> Result<DivergenceGraph> {
    let amb = pattern.ambiguous();
    if !amb.is_empty() {
        return Err(Error::Ambiguous(amb));
    }
    let mut g = DivergenceGraph::new(pattern.vertices.clone());
    for b in &pattern.blocks {
        if b.label == BlockLabel::Divergent {
            g.add_edge(b.row, b.col);
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UdsSubset {
    pub vertices: Vec<usize>,
    /// Nonempty and not the whole vertex set.
    pub proper: bool,
}

fn is_uds_mask(g: &DivergenceGraph, mask: u64) -> bool {
    (0..g.len())
        .filter(|j| mask >> j & 1 == 1)
        .all(|j| (0..j).all(|i| !g.has_edge(i, j) || mask >> i & 1 == 1))
}

/// All UDS subsets in increasing bitmask order (∅ and 𝒱 included).
pub fn enumerate_uds(g: &DivergenceGraph) -> Result<Vec<UdsSubset>> {
    let n = g.len();
    if n > MAX_UDS_VERTICES {
        return Err(Error::Precondition(format!("UDS enumeration supports ≤ {MAX_UDS_VERTICES} vertices, got {n}")));
    }
    let full = (1u64 << n) - 1;
    Ok((0..=full)
        .filter(|&m| is_uds_mask(g, m))
        .map(|m| UdsSubset {
            vertices: (0..n).filter(|v| m >> v & 1 == 1).collect(),
            proper: m != 0 && m != full,
        })
        .collect())
}

/// x with Σx = 0 and Σ_S x ≥ 1 on every proper UDS subset S, by exact LP.
pub fn uds_weights(g: &DivergenceGraph) -> Result<Vec<Q>> {
    let n = g.len();
    if n == 0 {
        return Err(Error::Dimension("graph without vertices".into()));
    }
    let uds = enumerate_uds(g)?;
    let mut lp = LinearProgram::<Q>::new(n);
    lp.constrain(vec![q(1); n], Relation::Eq, q(0));
    for s in uds.iter().filter(|s| s.proper) {
        let row = (0..n).map(|v| q(s.vertices.contains(&v) as i64)).collect();
        lp.constrain(row, Relation::Ge, q(1));
    }
    match lp.solve() {
        LpOutcome::Optimal { x, .. } => {
            let ok = uds.iter().filter(|s| s.proper).all(|s| s.vertices.iter().map(|&v| &x[v]).sum::<Q>() >= q(1))
                && x.iter().sum::<Q>() == q(0);
            if !ok {
                return Err(Error::Infeasible("LP solution failed the UDS-sum check".into()));
            }
            Ok(x)
        }
        LpOutcome::Infeasible => Err(Error::Infeasible(format!(
            "no UDS weights: the graph has {} components",
            g.components().len()
        ))),
        LpOutcome::Unbounded => unreachable!("zero objective"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightAction {
    ConstantEqual,
    Divergent,
}

/// How u_i acts on e_I for a vertex set I, decided from Plücker coordinates of the sampled u_i.
pub fn weight_vector_action(
    sampler: Sampler,
    layout: &VertexLayout,
    vertices: &[usize],
    samples: &[f64],
    zero_tol: f64,
) -> Result<WeightAction> {
    check_samples(samples)?;
    if vertices.is_empty() || vertices.iter().any(|&v| v >= layout.len()) {
        return Err(Error::Precondition(format!("bad vertex set {vertices:?}")));
    }
    let cols = layout.coordinates(vertices);
    let n = layout.n();
    let target = subset_rank(n, &cols);
    let mut constant = true;
    let mut last_norm = 0.0;
    for &i in samples {
        let u = sampler(i);
        let p = plucker(&select_columns(&u, &cols));
        let dev = p
            .iter()
            .enumerate()
            .map(|(k, x)| (x - if k == target { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        let scale = p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if dev > 1e-9 * scale {
            constant = false;
        }
        last_norm = gram_norm(&u, &cols);
    }
    if constant {
        Ok(WeightAction::ConstantEqual)
    } else if last_norm > 1.0 / zero_tol {
        Ok(WeightAction::Divergent)
    } else {
        Err(Error::Normalization(vertices.to_vec()))
    }
}

/// Upper unipotent in SL_n with the given strictly-upper entries ((row, col), value), 0-based.
pub fn unipotent(n: usize, entries: &[((usize, usize), f64)]) -> DMatrix<f64> {
    let mut u = DMatrix::identity(n, n);
    for &((r, c), x) in entries {
        assert!(r < c && c < n, "entry ({r}, {c}) is not strictly upper");
        u[(r, c)] = x;
    }
    u
}
