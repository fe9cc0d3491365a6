//! Maximal ℚ-tori in normal form: split coordinates first, then one block per number field.
//!
//! An anisotropic block for a field L with basis v acts by the regular representation,
//! which equals V⁻¹·diag(σ(x))·V for V = (σ_ξ(v_ζ)) (rows are embeddings). The
//! matrix A₀ = blockdiag(I, V₁, …) therefore satisfies A₀·g·A₀⁻¹ = diagonal.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::rational::{fmt_q, parse_q, q, to_f64};
use crate::arith::{FactorizationReport, FieldElement, NumberField, QMatrix, RatPolynomial, Q};
use crate::error::{Error, Result};

/// One anisotropic block: a number field with the basis its block is written in.
#[derive(Clone, Debug)]
pub struct AnisoBlock {
    pub field: Arc<NumberField>,
    pub basis: Vec<FieldElement>,
    v: DMatrix<Complex64>,
    v_inv: DMatrix<Complex64>,
}

impl AnisoBlock {
    pub fn new(field: Arc<NumberField>, basis: Vec<FieldElement>) -> Result<Self> {
        crate::arith::field::change_of_basis(&field, &basis)?;
        let l = field.degree();
        let rows = field.embedding_matrix(&basis);
        let v = DMatrix::from_fn(l, l, |i, j| rows[i][j]);
        let det = v.determinant();
        if det.norm() < 1e-12 {
            return Err(Error::SingularBlock(field.modulus().to_string()));
        }
        let v_inv = v
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularBlock(field.modulus().to_string()))?;
        Ok(AnisoBlock {
            field,
            basis,
            v,
            v_inv,
        })
    }

    pub fn with_power_basis(field: Arc<NumberField>) -> Result<Self> {
        let basis = field.power_basis();
        Self::new(field, basis)
    }

    pub fn degree(&self) -> usize {
        self.field.degree()
    }

    /// (σ_ξ(v_ζ)), the block of A₀.
    pub fn embedding_matrix(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    /// Matrix of multiplication by x in the chosen basis.
    pub fn regular_rep(&self, x: &FieldElement) -> Result<QMatrix> {
        Ok(x.regular_rep(&self.basis)?)
    }
}

/// A weight e_ξ: ξ is a set of vertices (split coordinates and whole blocks).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    pub vertices: Vec<usize>,
    pub exterior_index: Vec<usize>,
    /// χ_ξ(t) = character · t on the split parameter (t₁..t_{l₀}, t_{[l₁]}, …).
    pub character: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct TorusSpec {
    n: usize,
    l0: usize,
    blocks: Vec<AnisoBlock>,
    block_order: Vec<usize>,
    weights: Vec<WeightVector>,
    chart: DMatrix<f64>,
}

/// Split parameter plus one embedding-ordered complex vector per anisotropic block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieParam {
    pub split: Vec<f64>,
    pub aniso: Vec<Vec<Complex64>>,
}

/// Closed interval for one free coordinate.
pub type Interval = (f64, f64);

impl TorusSpec {
    /// Canonical order; `block_order[c]` is the external coordinate of canonical index c.
    pub fn new(l0: usize, blocks: Vec<AnisoBlock>, block_order: Option<Vec<usize>>) -> Result<Self> {
        let n = l0 + blocks.iter().map(AnisoBlock::degree).sum::<usize>();
        if n == 0 {
            return Err(Error::Dimension("torus of dimension 0".into()));
        }
        let block_order = block_order.unwrap_or_else(|| (0..n).collect());
        let mut seen = vec![false; n];
        if block_order.len() != n || block_order.iter().any(|&c| c >= n || std::mem::replace(&mut seen[c], true)) {
            return Err(Error::Dimension(format!(
                "block order {block_order:?} is not a permutation of 0..{n}"
            )));
        }
        let mut spec = TorusSpec {
            n,
            l0,
            blocks,
            block_order,
            weights: Vec::new(),
            chart: DMatrix::zeros(0, 0),
        };
        spec.weights = spec.enumerate_weights();
        spec.chart = spec.build_chart();
        Ok(spec)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l0(&self) -> usize {
        self.l0
    }

    pub fn a0(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[AnisoBlock] {
        &self.blocks
    }

    pub fn block_order(&self) -> &[usize] {
        &self.block_order
    }

    pub fn weights(&self) -> &[WeightVector] {
        &self.weights
    }

    /// Vertex count l₀ + a₀ (also the length of the split parameter).
    pub fn vertex_count(&self) -> usize {
        self.l0 + self.blocks.len()
    }

    /// Coordinates covered by each vertex.
    pub fn vertex_ranges(&self) -> Vec<Range<usize>> {
        let mut out: Vec<Range<usize>> = (0..self.l0).map(|i| i..i + 1).collect();
        let mut start = self.l0;
        for b in &self.blocks {
            out.push(start..start + b.degree());
            start += b.degree();
        }
        out
    }

    /// Multiplicity of each vertex (1 for split coordinates, l_j for blocks).
    pub fn multiplicities(&self) -> Vec<usize> {
        self.vertex_ranges().iter().map(|r| r.len()).collect()
    }

    fn enumerate_weights(&self) -> Vec<WeightVector> {
        let k = self.vertex_count();
        let ranges = self.vertex_ranges();
        let mult = self.multiplicities();
        let full = (1u64 << k) - 1;
        (1..full)
            .map(|mask| {
                let vertices: Vec<usize> = (0..k).filter(|v| mask >> v & 1 == 1).collect();
                let exterior_index = vertices.iter().flat_map(|&v| ranges[v].clone()).collect();
                let character = (0..k)
                    .map(|v| if mask >> v & 1 == 1 { mult[v] as i64 } else { 0 })
                    .collect();
                WeightVector {
                    vertices,
                    exterior_index,
                    character,
                }
            })
            .collect()
    }

    /// Orthonormal basis (columns, in split-parameter coordinates) of the trace-zero
    /// subspace, for the metric the split parameter inherits from diagonal matrices in ℝ^N.
    fn build_chart(&self) -> DMatrix<f64> {
        let k = self.vertex_count();
        let m: Vec<f64> = self.multiplicities().iter().map(|&x| x as f64).collect();
        // in y = √m·t coordinates the constraint is y ⊥ (√m_k)
        let u = nalgebra::DVector::from_iterator(k, m.iter().map(|x| x.sqrt())).normalize();
        let mut basis: Vec<nalgebra::DVector<f64>> = Vec::new();
        for e in 0..k {
            let mut v = nalgebra::DVector::from_fn(k, |i, _| if i == e { 1.0 } else { 0.0 });
            v -= &u * u.dot(&v);
            for b in &basis {
                v -= b * b.dot(&v);
            }
            if v.norm() > 1e-8 && basis.len() + 1 < k {
                basis.push(v.normalize());
            }
        }
        DMatrix::from_fn(k, k - 1, |i, j| basis[j][i] / m[i].sqrt())
    }

    /// Columns map chart coordinates s ∈ ℝ^{k−1} to split parameters t = C·s.
    pub fn chart(&self) -> &DMatrix<f64> {
        &self.chart
    }

    pub fn split_dim(&self) -> usize {
        self.vertex_count() - 1
    }

    /// Split parameter of chart point s.
    pub fn split_from_chart(&self, s: &[f64]) -> Vec<f64> {
        let sv = nalgebra::DVector::from_column_slice(s);
        (&self.chart * sv).iter().copied().collect()
    }

    /// Chart coordinates of a trace-zero split parameter.
    pub fn chart_from_split(&self, t: &[f64]) -> Vec<f64> {
        let m = self.multiplicities();
        (0..self.split_dim())
            .map(|j| (0..t.len()).map(|i| self.chart[(i, j)] * m[i] as f64 * t[i]).sum())
            .collect()
    }

    /// χ_ξ(t) for a split parameter t.
    pub fn character(&self, w: &WeightVector, t: &[f64]) -> f64 {
        w.character.iter().zip(t).map(|(c, x)| *c as f64 * x).sum()
    }

    /// A₀ = blockdiag(I_{l₀}, V₁, …, V_{a₀}) in canonical coordinates.
    pub fn a0_matrix(&self) -> DMatrix<Complex64> {
        let mut a = DMatrix::identity(self.n, self.n);
        let ranges = self.vertex_ranges();
        for (b, r) in self.blocks.iter().zip(&ranges[self.l0..]) {
            a.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&b.v);
        }
        a
    }

    /// Max off-diagonal modulus of A₀·g·A₀⁻¹, relative to the largest diagonal entry.
    pub fn diagonalization_residual(&self, g: &DMatrix<f64>) -> f64 {
        let a = self.a0_matrix();
        let a_inv = a.clone().try_inverse().expect("A₀ is invertible by construction");
        let gc = g.map(|x| Complex64::new(x, 0.0));
        let d = &a * gc * a_inv;
        let scale = (0..self.n).map(|i| d[(i, i)].norm()).fold(0.0, f64::max).max(1.0);
        let mut off = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    off = off.max(d[(i, j)].norm());
                }
            }
        }
        off / scale
    }

    /// exp of a Lie parameter as a real matrix in canonical coordinates.
    pub fn torus_element(&self, t: &LieParam) -> Result<DMatrix<f64>> {
        self.check_param(t, 1e-12)?;
        let mut g = DMatrix::<f64>::zeros(self.n, self.n);
        for i in 0..self.l0 {
            g[(i, i)] = t.split[i].exp();
        }
        let ranges = self.vertex_ranges();
        let mut residue = 0.0f64;
        for (j, (b, r)) in self.blocks.iter().zip(&ranges[self.l0..]).enumerate() {
            let scale = t.split[self.l0 + j].exp();
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                r.len(),
                t.aniso[j].iter().map(|z| z.exp()),
            ));
            let block = &b.v_inv * d * &b.v;
            let size = block.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for a in 0..r.len() {
                for c in 0..r.len() {
                    residue = residue.max(block[(a, c)].im.abs() / size);
                    g[(r.start + a, r.start + c)] = scale * block[(a, c)].re;
                }
            }
        }
        if residue > 1e-9 {
            return Err(Error::Reality(residue));
        }
        Ok(g)
    }

    /// Exact element from split scalars and field elements (det is not checked here).
    pub fn rational_element(&self, split: &[Q], fields: &[FieldElement]) -> Result<QMatrix> {
        if split.len() != self.l0 || fields.len() != self.blocks.len() {
            return Err(Error::Dimension("rational element needs l₀ scalars and a₀ field elements".into()));
        }
        let mut g = QMatrix::zeros(self.n, self.n);
        for (i, x) in split.iter().enumerate() {
            g[(i, i)] = x.clone();
        }
        let ranges = self.vertex_ranges();
        for ((b, x), r) in self.blocks.iter().zip(fields).zip(&ranges[self.l0..]) {
            let rep = b.regular_rep(x)?;
            for a in 0..r.len() {
                for c in 0..r.len() {
                    g[(r.start + a, r.start + c)] = rep[(a, c)].clone();
                }
            }
        }
        Ok(g)
    }

    /// Rational basis of Lie(T): trace-zero split directions, then regular
    /// representations of trace-zero field elements.
    pub fn lie_algebra_basis(&self) -> Vec<QMatrix> {
        let ranges = self.vertex_ranges();
        let mult = self.multiplicities();
        let k = self.vertex_count();
        let mut out = Vec::new();
        // split: e_v/m_v − e_{last}/m_last
        for v in 0..k.saturating_sub(1) {
            let mut m = QMatrix::zeros(self.n, self.n);
            for c in ranges[v].clone() {
                m[(c, c)] = Q::new(1.into(), (mult[v] as i64).into()) * q(mult[k - 1] as i64);
            }
            for c in ranges[k - 1].clone() {
                m[(c, c)] = -Q::one();
            }
            out.push(m);
        }
        for (b, r) in self.blocks.iter().zip(&ranges[self.l0..]) {
            let l = b.degree();
            for p in 1..l {
                let x = b.field.generator_power(p);
                let shift = x.trace() / q(l as i64);
                let y = x.sub(&b.field.one().scale(&shift)).expect("same field");
                let rep = b.regular_rep(&y).expect("basis verified at construction");
                let mut m = QMatrix::zeros(self.n, self.n);
                for a in 0..l {
                    for c in 0..l {
                        m[(r.start + a, r.start + c)] = rep[(a, c)].clone();
                    }
                }
                out.push(m);
            }
        }
        out
    }

    /// Canonical → external coordinates (P·g·Pᵀ).
    pub fn to_external(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                out[(self.block_order[a], self.block_order[b])] = g[(a, b)];
            }
        }
        out
    }

    pub fn to_external_q(&self, g: &QMatrix) -> QMatrix {
        let mut out = QMatrix::zeros(self.n, self.n);
        for a in 0..self.n {
            for b in 0..self.n {
                out[(self.block_order[a], self.block_order[b])] = g[(a, b)].clone();
            }
        }
        out
    }

    /// External → canonical coordinates.
    pub fn to_canonical(&self, g: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |a, b| g[(self.block_order[a], self.block_order[b])])
    }

    /// Number of free real coordinates of a Lie parameter (N − 1).
    pub fn free_dim(&self) -> usize {
        self.n - 1
    }

    /// Builds a parameter from free coordinates: the first k−1 split values, then per
    /// block the real embedding values and (re, im) of each pair, minus one dependent value.
    pub fn param_from_free(&self, free: &[f64]) -> Result<LieParam> {
        if free.len() != self.free_dim() {
            return Err(Error::LieParam(format!(
                "expected {} free coordinates, got {}",
                self.free_dim(),
                free.len()
            )));
        }
        let k = self.vertex_count();
        let mult = self.multiplicities();
        let mut it = free.iter().copied();
        let mut split: Vec<f64> = it.by_ref().take(k - 1).collect();
        let partial: f64 = split.iter().zip(&mult).map(|(t, m)| t * *m as f64).sum();
        split.push(-partial / mult[k - 1] as f64);
        let mut aniso = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let r = b.field.real_count();
            let s = b.field.complex_pairs();
            let mut reals: Vec<f64> = Vec::with_capacity(r);
            let mut pairs: Vec<Complex64> = Vec::with_capacity(s);
            if r > 0 {
                reals.extend(it.by_ref().take(r - 1));
                for _ in 0..s {
                    let re = it.next().unwrap();
                    let im = it.next().unwrap();
                    pairs.push(Complex64::new(re, im));
                }
                let total: f64 = reals.iter().sum::<f64>() + 2.0 * pairs.iter().map(|z| z.re).sum::<f64>();
                reals.push(-total);
            } else {
                for p in 0..s {
                    if p + 1 < s {
                        let re = it.next().unwrap();
                        let im = it.next().unwrap();
                        pairs.push(Complex64::new(re, im));
                    } else {
                        let im = it.next().unwrap();
                        let total: f64 = pairs.iter().map(|z| z.re).sum();
                        pairs.push(Complex64::new(-total, im));
                    }
                }
            }
            let mut z: Vec<Complex64> = reals.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
            for p in pairs {
                z.push(p);
                z.push(p.conj());
            }
            aniso.push(z);
        }
        Ok(LieParam { split, aniso })
    }

    pub fn zero_param(&self) -> LieParam {
        LieParam {
            split: vec![0.0; self.vertex_count()],
            aniso: self.blocks.iter().map(|b| vec![Complex64::zero(); b.degree()]).collect(),
        }
    }

    /// Checks shapes, trace-zero conditions and conjugate pairing.
    pub fn check_param(&self, t: &LieParam, tol: f64) -> Result<()> {
        if t.split.len() != self.vertex_count() || t.aniso.len() != self.blocks.len() {
            return Err(Error::LieParam("shape does not match the torus".into()));
        }
        let mult = self.multiplicities();
        let scale = 1.0 + t.split.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let s: f64 = t.split.iter().zip(&mult).map(|(x, m)| x * *m as f64).sum();
        if s.abs() > tol * scale {
            return Err(Error::LieParam(format!("split trace {s:e} ≠ 0")));
        }
        for (b, z) in self.blocks.iter().zip(&t.aniso) {
            if z.len() != b.degree() {
                return Err(Error::LieParam("anisotropic vector has the wrong length".into()));
            }
            let r = b.field.real_count();
            let scale = 1.0 + z.iter().fold(0.0f64, |m, x| m.max(x.norm()));
            if z[..r].iter().any(|x| x.im.abs() > tol * scale) {
                return Err(Error::LieParam("real embedding carries an imaginary part".into()));
            }
            for p in z[r..].chunks(2) {
                if (p[0] - p[1].conj()).norm() > tol * scale {
                    return Err(Error::LieParam("complex embeddings are not conjugate".into()));
                }
            }
            let sum: Complex64 = z.iter().sum();
            if sum.norm() > tol * scale {
                return Err(Error::LieParam(format!("anisotropic trace {sum} ≠ 0")));
            }
        }
        Ok(())
    }

    /// Uniform sample of the free coordinates in a box; dependent values are solved.
    pub fn sample_lie<R: Rng + ?Sized>(&self, bounds: &[Interval], rng: &mut R) -> Result<LieParam> {
        if bounds.len() != self.free_dim() {
            return Err(Error::LieParam(format!(
                "box has {} intervals, torus needs {}",
                bounds.len(),
                self.free_dim()
            )));
        }
        if bounds.iter().any(|(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::EmptyBox);
        }
        let free: Vec<f64> = bounds
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..hi) })
            .collect();
        self.param_from_free(&free)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(TorusSpecJson::from(self)).expect("serializable")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: TorusSpecJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Precondition(e.to_string()))?;
        j.build()
    }
}

/// Builds the normal-form torus from a verified factorization, with power bases.
pub fn build_torus(report: &FactorizationReport) -> Result<TorusSpec> {
    build_torus_with_digits(report, crate::arith::DEFAULT_DIGITS)
}

/// As [`build_torus`], refining field embeddings to `digits` decimal digits.
pub fn build_torus_with_digits(report: &FactorizationReport, digits: u32) -> Result<TorusSpec> {
    let blocks = report
        .fields
        .iter()
        .map(|f| AnisoBlock::with_power_basis(NumberField::with_precision(f.poly.clone(), digits)?))
        .collect::<Result<Vec<_>>>()?;
    let spec = TorusSpec::new(report.l0, blocks, None)?;
    if spec.n() != report.dimension() {
        return Err(Error::Dimension(format!(
            "factor degrees sum to {}, polynomial has degree {}",
            spec.n(),
            report.dimension()
        )));
    }
    Ok(spec)
}

/// The diagonal torus of SL_n, from p = (x−1)(x−2)…(x−n).
pub fn split_torus(n: usize) -> Result<TorusSpec> {
    let p = (1..=n as i64).fold(RatPolynomial::one(), |acc, r| &acc * &RatPolynomial::from_ints(&[-r, 1]));
    build_torus(&crate::arith::verify_factorization(&p, &[p.clone()])?)
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    modulus: RatPolynomial,
    basis: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct TorusSpecJson {
    n: usize,
    l0: usize,
    fields: Vec<BlockJson>,
    block_order: Vec<usize>,
    weights: Vec<WeightVector>,
}

impl From<&TorusSpec> for TorusSpecJson {
    fn from(s: &TorusSpec) -> Self {
        TorusSpecJson {
            n: s.n,
            l0: s.l0,
            fields: s
                .blocks
                .iter()
                .map(|b| BlockJson {
                    modulus: b.field.modulus().clone(),
                    basis: b.basis.iter().map(|e| e.coords().iter().map(fmt_q).collect()).collect(),
                })
                .collect(),
            block_order: s.block_order.clone(),
            weights: s.weights.clone(),
        }
    }
}

impl TorusSpecJson {
    fn build(self) -> Result<TorusSpec> {
        let blocks = self
            .fields
            .into_iter()
            .map(|b| {
                let field = NumberField::new(b.modulus)?;
                let basis = b
                    .basis
                    .iter()
                    .map(|c| {
                        let coords = c.iter().map(|s| parse_q(s)).collect::<std::result::Result<Vec<_>, _>>()?;
                        Ok(field.element(coords)?)
                    })
                    .collect::<Result<Vec<_>>>()?;
                AnisoBlock::new(field, basis)
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = TorusSpec::new(self.l0, blocks, Some(self.block_order))?;
        if spec.n != self.n {
            return Err(Error::Dimension(format!("declared n={} but blocks give {}", self.n, spec.n)));
        }
        Ok(spec)
    }
}

/// f64 copy of an exact matrix.
pub fn qmatrix_f64(m: &QMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| to_f64(&m[(i, j)]))
}
