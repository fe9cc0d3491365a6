//! Polytopes of non-divergence in chart coordinates of Lie(T_s(ℝ)).
//!
//! Constraints are stored as a·s ≥ b. Exact volumes use the facet recursion
//! vol_d(P) = (1/d)·Σ_k h_k·vol_{d−1}(F_k) with heights measured from the Chebyshev
//! centre; Monte Carlo volumes sample the LP bounding box in seeded batches.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::par;
use crate::resscalars::GeometricEmbedding;
use crate::torus::TorusSpec;
use crate::wedge::{gram_norm, gram_norm_complex};

const TOL: f64 = 1e-9;
pub const DEFAULT_MC_SAMPLES: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HPolytope {
    dim: usize,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum VolumeMethod {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    pub value: f64,
    /// Standard error (0 for exact computations).
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolytopeStats {
    pub volume: Volume,
    pub chebyshev_radius: f64,
    pub vertex_count: Option<usize>,
    pub bounded: bool,
}

impl HPolytope {
    pub fn new(dim: usize) -> Self {
        HPolytope {
            dim,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Adds a·s ≥ b.
    pub fn push(&mut self, a: Vec<f64>, b: f64) {
        assert_eq!(a.len(), self.dim);
        assert!(a.iter().any(|x| *x != 0.0), "zero functional");
        self.a.push(a);
        self.b.push(b);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.a.iter().map(Vec::as_slice).zip(self.b.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn contains_point(&self, s: &[f64], tol: f64) -> bool {
        self.constraints().all(|(a, b)| dot(a, s) >= b - tol * (1.0 + b.abs()))
    }

    /// P − t₀.
    pub fn translate(&self, t0: &[f64]) -> Self {
        let mut out = HPolytope::new(self.dim);
        for (a, b) in self.constraints() {
            out.push(a.to_vec(), b - dot(a, t0));
        }
        out
    }

    fn lp(&self, objective: Vec<f64>) -> LinearProgram<f64> {
        let mut lp = LinearProgram::new(self.dim).maximize(objective);
        for (a, b) in self.constraints() {
            lp.constrain(a.to_vec(), Relation::Ge, b);
        }
        lp
    }

    /// sup of c·s over P.
    pub fn support(&self, c: &[f64]) -> Result<f64> {
        match self.lp(c.to_vec()).solve() {
            LpOutcome::Optimal { value, .. } => Ok(value),
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
            LpOutcome::Unbounded => Err(Error::Unbounded(c.to_vec())),
        }
    }

    /// Per-coordinate [min, max]; errors carry the unbounded direction.
    pub fn bounding_box(&self) -> Result<Vec<(f64, f64)>> {
        (0..self.dim)
            .map(|i| {
                let mut e = vec![0.0; self.dim];
                e[i] = 1.0;
                let hi = self.support(&e)?;
                e[i] = -1.0;
                let lo = -self.support(&e)?;
                Ok((lo, hi))
            })
            .collect()
    }

    pub fn is_bounded(&self) -> Result<bool> {
        match self.bounding_box() {
            Ok(_) => Ok(true),
            Err(Error::Unbounded(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Chebyshev centre and radius: max r with a_k·s ≥ b_k + r‖a_k‖.
    pub fn chebyshev(&self) -> Result<(Vec<f64>, f64)> {
        let d = self.dim;
        let mut obj = vec![0.0; d + 1];
        obj[d] = 1.0;
        let mut lp = LinearProgram::new(d + 1).maximize(obj);
        for (a, b) in self.constraints() {
            let mut row = a.to_vec();
            row.push(-norm(a));
            lp.constrain(row, Relation::Ge, b);
        }
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                let scale = 1.0 + self.b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                if value < -TOL * scale {
                    return Err(Error::EmptyPolytope);
                }
                Ok((x[..d].to_vec(), value.max(0.0)))
            }
            LpOutcome::Unbounded => {
                let dir = self.bounding_box().err().and_then(|e| match e {
                    Error::Unbounded(v) => Some(v),
                    _ => None,
                });
                Err(Error::Unbounded(dir.unwrap_or_default()))
            }
            LpOutcome::Infeasible => Err(Error::EmptyPolytope),
        }
    }

    pub fn inscribed_radius(&self) -> Result<f64> {
        Ok(self.chebyshev()?.1)
    }

    /// Q ⊆ P, decided by one LP per constraint of P.
    pub fn contains(&self, other: &HPolytope) -> Result<bool> {
        for (a, b) in self.constraints() {
            let neg: Vec<f64> = a.iter().map(|x| -x).collect();
            let min = -other.support(&neg)?;
            if min < b - TOL * (1.0 + b.abs()) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Vertices by brute force over d-subsets of constraints (d ≤ 4), sorted lexicographically.
    pub fn vertices(&self) -> Result<Vec<Vec<f64>>> {
        let d = self.dim;
        if d > 4 {
            return Err(Error::Precondition(format!("vertex enumeration supports d ≤ 4, got {d}")));
        }
        let mut out: Vec<Vec<f64>> = Vec::new();
        for idx in crate::wedge::subsets(self.len(), d) {
            let m = DMatrix::from_fn(d, d, |i, j| self.a[idx[i]][j]);
            let rhs = DVector::from_iterator(d, idx.iter().map(|&i| self.b[i]));
            let Some(sol) = m.clone().lu().solve(&rhs) else {
                continue;
            };
            if (m.determinant()).abs() < 1e-12 {
                continue;
            }
            let v: Vec<f64> = sol.iter().copied().collect();
            if self.contains_point(&v, TOL) && !out.iter().any(|w| dist(w, &v) < 1e-8 * (1.0 + norm(&v))) {
                out.push(v);
            }
        }
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        Ok(out)
    }

    /// Exact volume (facet recursion); the polytope must be bounded.
    pub fn exact_volume(&self) -> Result<f64> {
        self.bounding_box()?;
        self.volume_rec()
    }

    fn volume_rec(&self) -> Result<f64> {
        let d = self.dim;
        if d == 0 {
            return Ok(1.0);
        }
        if d == 1 {
            let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
            for (a, b) in self.constraints() {
                if a[0] > 0.0 {
                    lo = lo.max(b / a[0]);
                } else {
                    hi = hi.min(b / a[0]);
                }
            }
            return Ok((hi - lo).max(0.0));
        }
        let (c, r) = match self.chebyshev() {
            Ok(x) => x,
            Err(Error::EmptyPolytope) => return Ok(0.0),
            Err(e) => return Err(e),
        };
        if r <= TOL * (1.0 + norm(&c)) {
            return Ok(0.0);
        }
        let uniq = self.normalized_unique();
        let mut total = 0.0;
        for k in 0..uniq.len() {
            let (ak, bk) = &uniq[k];
            let h = dot(ak, &c) - bk;
            if h <= 0.0 {
                continue;
            }
            if let Some(facet) = facet_polytope(&uniq, k) {
                total += h * facet.volume_rec()?;
            }
        }
        Ok(total / d as f64)
    }

    /// Unit-normal constraints with exact duplicates removed.
    fn normalized_unique(&self) -> Vec<(Vec<f64>, f64)> {
        let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
        for (a, b) in self.constraints() {
            let n = norm(a);
            let an: Vec<f64> = a.iter().map(|x| x / n).collect();
            let bn = b / n;
            if let Some(prev) = out.iter_mut().find(|(p, _)| dist(p, &an) < 1e-12) {
                prev.1 = prev.1.max(bn);
            } else {
                out.push((an, bn));
            }
        }
        out
    }

    /// Rejection sampling inside the bounding box, in batches with independent streams.
    pub fn monte_carlo_volume(&self, samples: usize, seed: u64) -> Result<Volume> {
        if self.dim > 8 {
            return Err(Error::Precondition(format!("Monte Carlo volume supports d ≤ 8, got {}", self.dim)));
        }
        let bbox = self.bounding_box()?;
        let box_vol: f64 = bbox.iter().map(|(lo, hi)| hi - lo).product();
        if box_vol <= 0.0 || samples == 0 {
            return Ok(Volume { value: 0.0, stderr: 0.0 });
        }
        let batches = samples.div_ceil(par::BATCH);
        let hits: u64 = par::map_range(batches, |bi| {
            let mut rng = par::stream_rng(seed, bi as u64);
            let lo = bi * par::BATCH;
            let hi = (lo + par::BATCH).min(samples);
            let mut s = vec![0.0; self.dim];
            let mut h = 0u64;
            for _ in lo..hi {
                for (x, (l, u)) in s.iter_mut().zip(&bbox) {
                    *x = if u > l { rng.random_range(*l..*u) } else { *l };
                }
                if self.contains_point(&s, 0.0) {
                    h += 1;
                }
            }
            h
        })
        .into_iter()
        .sum();
        let p = hits as f64 / samples as f64;
        Ok(Volume {
            value: box_vol * p,
            stderr: box_vol * (p * (1.0 - p) / samples as f64).sqrt(),
        })
    }

    pub fn volume(&self, method: VolumeMethod) -> Result<Volume> {
        match method {
            VolumeMethod::Exact => Ok(Volume {
                value: self.exact_volume()?,
                stderr: 0.0,
            }),
            VolumeMethod::MonteCarlo { samples, seed } => self.monte_carlo_volume(samples, seed),
        }
    }

    /// Exact for d ≤ 3, Monte Carlo otherwise.
    pub fn default_method(&self, seed: u64) -> VolumeMethod {
        if self.dim <= 3 {
            VolumeMethod::Exact
        } else {
            VolumeMethod::MonteCarlo {
                samples: DEFAULT_MC_SAMPLES,
                seed,
            }
        }
    }

    pub fn stats(&self, method: VolumeMethod) -> Result<PolytopeStats> {
        let bounded = self.is_bounded()?;
        if !bounded {
            self.bounding_box()?;
        }
        let chebyshev_radius = match self.inscribed_radius() {
            Ok(r) => r,
            Err(Error::EmptyPolytope) => 0.0,
            Err(e) => return Err(e),
        };
        let vertex_count = if self.dim <= 4 { Some(self.vertices()?.len()) } else { None };
        Ok(PolytopeStats {
            volume: self.volume(method)?,
            chebyshev_radius,
            vertex_count,
            bounded,
        })
    }
}

/// F_k = P ∩ {a_k·s = b_k} in an orthonormal chart of the hyperplane.
fn facet_polytope(cons: &[(Vec<f64>, f64)], k: usize) -> Option<HPolytope> {
    let (ak, bk) = &cons[k];
    let d = ak.len();
    let p0: Vec<f64> = ak.iter().map(|x| x * bk).collect();
    // orthonormal basis of a_k⊥
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let u = DVector::from_column_slice(ak);
    for e in 0..d {
        let mut v = DVector::from_fn(d, |i, _| if i == e { 1.0 } else { 0.0 });
        v -= &u * u.dot(&v);
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() > 1e-6 && basis.len() + 1 < d {
            basis.push(v.normalize());
        }
    }
    let mut f = HPolytope::new(d - 1);
    for (j, (aj, bj)) in cons.iter().enumerate() {
        if j == k {
            continue;
        }
        let proj: Vec<f64> = basis.iter().map(|q| q.iter().zip(aj).map(|(x, y)| x * y).sum()).collect();
        let rhs = bj - dot(aj, &p0);
        if norm(&proj) < 1e-12 {
            if rhs > TOL {
                return None;
            }
            continue;
        }
        f.push(proj, rhs);
    }
    Some(f)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn check_det(b: &DMatrix<f64>) -> Result<()> {
    let det = b.determinant();
    if (det - 1.0).abs() > 1e-6 * (1.0 + b.norm().powi(b.nrows() as i32)) {
        return Err(Error::Determinant(format!("{det}")));
    }
    Ok(())
}

/// Ω_{B,ε} = {s : χ_ξ(C s) ≥ log ε − log‖B e_ξ‖ for every weight ξ}, B in canonical coordinates.
pub fn build_omega(spec: &TorusSpec, b: &DMatrix<f64>, eps: f64) -> Result<HPolytope> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("ε = {eps} must be positive")));
    }
    if b.nrows() != spec.n() || b.ncols() != spec.n() {
        return Err(Error::Dimension(format!("B is {}×{}, torus has N = {}", b.nrows(), b.ncols(), spec.n())));
    }
    check_det(b)?;
    let chart = spec.chart();
    let mut p = HPolytope::new(spec.split_dim());
    for w in spec.weights() {
        let n = gram_norm(b, &w.exterior_index);
        if !(n > 0.0) {
            return Err(Error::DegenerateB(w.exterior_index.clone()));
        }
        let a: Vec<f64> = (0..chart.ncols())
            .map(|j| w.character.iter().enumerate().map(|(i, c)| *c as f64 * chart[(i, j)]).sum())
            .collect();
        p.push(a, eps.ln() - n.ln());
    }
    Ok(p)
}

/// Ω′_{B,ε} for B = (B₁, …, B_{r₀+s₀}) over M: m₀·χ_ξ ≥ log ε − |ξ|·log c_w − Σ_τ log‖τ(B) e_ξ‖,
/// where c_w = ‖N_{M/ℚ} e_j‖ and complex places count twice.
pub fn build_omega_prime(
    spec: &TorusSpec,
    bs: &[DMatrix<Complex64>],
    eps: f64,
    emb: &GeometricEmbedding,
) -> Result<HPolytope> {
    if !(eps > 0.0) {
        return Err(Error::Precondition(format!("ε = {eps} must be positive")));
    }
    let r0 = emb.r0();
    let s0 = emb.s0();
    if bs.len() != r0 + s0 {
        return Err(Error::Dimension(format!("need {} place matrices, got {}", r0 + s0, bs.len())));
    }
    if emb.n() != spec.n() || bs.iter().any(|b| b.nrows() != spec.n() || b.ncols() != spec.n()) {
        return Err(Error::Dimension("place matrices must be N×N".into()));
    }
    let m0 = emb.m0() as f64;
    let log_c = emb.norm_constant().ln();
    let chart = spec.chart();
    let mut p = HPolytope::new(spec.split_dim());
    for w in spec.weights() {
        let mut log_prod = 0.0;
        for (i, b) in bs.iter().enumerate() {
            let n = gram_norm_complex(b, &w.exterior_index);
            if !(n > 0.0) {
                return Err(Error::DegenerateB(w.exterior_index.clone()));
            }
            log_prod += if i < r0 { n.ln() } else { 2.0 * n.ln() };
        }
        let a: Vec<f64> = (0..chart.ncols())
            .map(|j| m0 * w.character.iter().enumerate().map(|(i, c)| *c as f64 * chart[(i, j)]).sum::<f64>())
            .collect();
        p.push(a, eps.ln() - w.exterior_index.len() as f64 * log_c - log_prod);
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShrinkRow {
    pub i: f64,
    pub vol: f64,
    pub vol_shrunk: f64,
    pub ratio: f64,
    pub cheb_radius: f64,
}

/// Vol(Ω_{B_i, ε+ω_i}) / Vol(Ω_{B_i, ε}) along a sequence.
pub fn shrink_ratio_series(
    spec: &TorusSpec,
    seq: &[(f64, DMatrix<f64>)],
    eps: f64,
    omega: &(dyn Fn(f64) -> f64 + Sync),
    seed: u64,
) -> Result<Vec<ShrinkRow>> {
    let rows = par::map_slice(seq, |(i, b)| -> Result<ShrinkRow> {
        let p = build_omega(spec, b, eps)?;
        let ps = build_omega(spec, b, eps + omega(*i))?;
        let method = p.default_method(seed);
        let vol = p.volume(method)?.value;
        if !(vol > 0.0) {
            return Err(Error::ZeroVolume(*i as u64));
        }
        let vol_shrunk = match ps.volume(method) {
            Ok(v) => v.value,
            Err(Error::EmptyPolytope) => 0.0,
            Err(e) => return Err(e),
        };
        Ok(ShrinkRow {
            i: *i,
            vol,
            vol_shrunk,
            ratio: vol_shrunk / vol,
            cheb_radius: p.inscribed_radius()?,
        })
    });
    rows.into_iter().collect()
}

/// The schedule ω_i = log log i (0 for i ≤ e).
pub fn omega_loglog(i: f64) -> f64 {
    if i <= std::f64::consts::E {
        0.0
    } else {
        i.ln().ln()
    }
}

/// Upper unipotent in SL₃ with entries x₁₂, x₁₃, x₂₃.
pub fn sl3_unipotent(x12: f64, x13: f64, x23: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.0, x12, x13, 0.0, 1.0, x23, 0.0, 0.0, 1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{verify_factorization, NumberField, RatPolynomial};
    use crate::torus::{build_torus, AnisoBlock, LieParam};

    fn square() -> HPolytope {
        let mut p = HPolytope::new(2);
        p.push(vec![1.0, 0.0], 0.0);
        p.push(vec![0.0, 1.0], 0.0);
        p.push(vec![-1.0, 0.0], -1.0);
        p.push(vec![0.0, -1.0], -1.0);
        p
    }

    fn split_sl(n: usize) -> TorusSpec {
        let roots: Vec<i64> = (1..=n as i64).collect();
        let p = roots.iter().fold(RatPolynomial::one(), |acc, r| &acc * &RatPolynomial::from_ints(&[-r, 1]));
        build_torus(&verify_factorization(&p, &[p.clone()]).unwrap()).unwrap()
    }

    #[test]
    fn square_and_simplex() {
        assert!((square().exact_volume().unwrap() - 1.0).abs() < 1e-12);
        assert!((square().inscribed_radius().unwrap() - 0.5).abs() < 1e-12);
        let mut s = HPolytope::new(2);
        s.push(vec![1.0, 0.0], 0.0);
        s.push(vec![0.0, 1.0], 0.0);
        s.push(vec![-1.0, -1.0], -1.0);
        assert!((s.exact_volume().unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(s.vertices().unwrap().len(), 3);
    }

    #[test]
    fn cube_volume_in_three_dimensions() {
        let mut c = HPolytope::new(3);
        for i in 0..3 {
            let mut e = vec![0.0; 3];
            e[i] = 1.0;
            c.push(e.clone(), 0.0);
            e[i] = -1.0;
            c.push(e, -2.0);
        }
        assert!((c.exact_volume().unwrap() - 8.0).abs() < 1e-10);
        let mc = c.monte_carlo_volume(100_000, 9).unwrap();
        assert!((mc.value - 8.0).abs() < 1e-9);
    }

    #[test]
    fn sl2_identity_is_a_point() {
        let spec = split_sl(2);
        let p = build_omega(&spec, &DMatrix::identity(2, 2), 1.0).unwrap();
        assert_eq!(p.exact_volume().unwrap(), 0.0);
        assert!(p.inscribed_radius().unwrap().abs() < 1e-12);
    }

    #[test]
    fn sl3_hexagon_exact_vs_monte_carlo() {
        let spec = split_sl(3);
        let p = build_omega(&spec, &DMatrix::identity(3, 3), (-1f64).exp()).unwrap();
        assert_eq!(p.vertices().unwrap().len(), 6);
        let exact = p.exact_volume().unwrap();
        let mc = p.monte_carlo_volume(DEFAULT_MC_SAMPLES, 42).unwrap();
        assert!((exact - mc.value).abs() < 3.0 * mc.stderr, "{exact} vs {mc:?}");
        assert!((exact - mc.value).abs() < 0.01 * exact);
    }

    #[test]
    fn example1_interval() {
        let f = NumberField::new(RatPolynomial::from_ints(&[-2, 0, 1])).unwrap();
        let basis = vec![f.generator_power(1), f.one()];
        let spec = TorusSpec::new(1, vec![AnisoBlock::new(f, basis).unwrap()], Some(vec![2, 0, 1])).unwrap();
        let i = 50.0;
        let g = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, i, 0.0, 1.0, i, 0.0, 0.0, 1.0]);
        let p = build_omega(&spec, &spec.to_canonical(&g), 1.0).unwrap();
        let len = p.exact_volume().unwrap();
        // the split chart carries the metric of diag(−2s, s, s) in ℝ³
        let want = 0.5 * (2.0 * i * i + 1.0).ln() * 1.5f64.sqrt();
        assert!((len - want).abs() < 1e-10);
        assert!((p.inscribed_radius().unwrap() - want / 2.0).abs() < 1e-10);
    }

    #[test]
    fn translation_covariance() {
        let spec = split_sl(3);
        let b = sl3_unipotent(3.0, 9.0, 3.0);
        let t0 = LieParam {
            split: vec![0.4, -0.1, -0.3],
            aniso: vec![],
        };
        let e = spec.torus_element(&t0).unwrap();
        let p = build_omega(&spec, &b, 0.5).unwrap();
        let q = build_omega(&spec, &(&b * &e), 0.5).unwrap();
        let s0 = spec.chart_from_split(&t0.split);
        let shifted = p.translate(&s0);
        let (v1, v2) = (q.vertices().unwrap(), shifted.vertices().unwrap());
        assert_eq!(v1.len(), v2.len());
        for (x, y) in v1.iter().zip(&v2) {
            assert!(dist(x, y) < 1e-9);
        }
    }

    #[test]
    fn epsilon_monotone() {
        let spec = split_sl(3);
        let b = sl3_unipotent(5.0, 25.0, 5.0);
        let small = build_omega(&spec, &b, 0.3).unwrap();
        let big = build_omega(&spec, &b, 0.8).unwrap();
        assert!(small.contains(&big).unwrap());
        assert!(!big.contains(&small).unwrap());
    }

    #[test]
    fn disconnected_sequence_has_bounded_radius() {
        let spec = split_sl(3);
        let base = build_omega(&spec, &DMatrix::identity(3, 3), 0.1).unwrap();
        for i in [10.0, 1e4, 1e8] {
            let p = build_omega(&spec, &sl3_unipotent(i, 0.0, 0.0), 0.1).unwrap();
            assert!((p.inscribed_radius().unwrap() - base.inscribed_radius().unwrap()).abs() < 1e-9);
            assert!(p.exact_volume().unwrap() > base.exact_volume().unwrap());
        }
    }

    #[test]
    fn zero_schedule_gives_ratio_one() {
        let spec = split_sl(3);
        let seq: Vec<(f64, DMatrix<f64>)> =
            [10.0, 100.0].iter().map(|&i| (i, sl3_unipotent(i, i * i, i))).collect();
        for row in shrink_ratio_series(&spec, &seq, 0.5, &|_| 0.0, 1).unwrap() {
            assert!((row.ratio - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn omega_prime_over_rationals_matches_omega() {
        let spec = split_sl(3);
        let emb = GeometricEmbedding::new(NumberField::rationals(), 3).unwrap();
        let b = sl3_unipotent(2.0, -3.0, 7.0);
        let p = build_omega(&spec, &b, 0.7).unwrap();
        let bc = b.map(|x| Complex64::new(x, 0.0));
        let q = build_omega_prime(&spec, &[bc], 0.7, &emb).unwrap();
        assert_eq!(p.vertices().unwrap().len(), q.vertices().unwrap().len());
        for (x, y) in p.vertices().unwrap().iter().zip(&q.vertices().unwrap()) {
            assert!(dist(x, y) < 1e-12);
        }
    }

    #[test]
    fn omega_prime_offsets_for_identity_tuple() {
        let spec = split_sl(3);
        let emb = GeometricEmbedding::new(NumberField::new(RatPolynomial::from_ints(&[-2, 0, 1])).unwrap(), 3).unwrap();
        let id = DMatrix::<Complex64>::identity(3, 3);
        let p = build_omega_prime(&spec, &[id.clone(), id], 0.5, &emb).unwrap();
        for ((_, b), w) in p.constraints().zip(spec.weights()) {
            let want = 0.5f64.ln() - w.exterior_index.len() as f64 * emb.det_tau().ln();
            assert!((b - want).abs() < 1e-12);
        }
    }
}
