//! Restriction of scalars from a number field M to ℚ.
//!
//! V′(ℤ) has the ℤ-basis {w_k·e_j}; coordinate index k·N + j (k-major). The
//! realification E sends that basis into ℝ^{N·m₀} = ⊕_real ℝ^N ⊕ ⊕_pairs (ℝ^N ⊕ ℝ^N)
//! (real parts, then imaginary parts), which is an isometry for the product metric.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::matrix::int_det;
use crate::arith::{FieldElement, NumberField, Q};
use crate::error::{Error, Result};
use crate::wedge::{gram_norm, gram_norm_complex, plucker_int, subset_rank, subsets};

#[derive(Clone, Debug)]
pub struct GeometricEmbedding {
    field: Arc<NumberField>,
    w: Vec<FieldElement>,
    tau: DMatrix<Complex64>,
    n: usize,
    realify: DMatrix<f64>,
}

impl GeometricEmbedding {
    /// Power basis of ℤ[θ] and ambient dimension N.
    pub fn new(field: Arc<NumberField>, n: usize) -> Result<Self> {
        let w = field.power_basis();
        let m0 = field.degree();
        let rows = field.embedding_matrix(&w);
        let tau = DMatrix::from_fn(m0, m0, |k, j| rows[k][j]);
        if tau.determinant().norm() < 1e-12 {
            return Err(Error::SingularBlock(field.modulus().to_string()));
        }
        let r0 = field.real_count();
        let s0 = field.complex_pairs();
        let dim = n * m0;
        let mut realify = DMatrix::zeros(dim, dim);
        for k in 0..m0 {
            for j in 0..n {
                let col = k * n + j;
                for a in 0..r0 {
                    realify[(a * n + j, col)] = tau[(a, k)].re;
                }
                for b in 0..s0 {
                    let z = tau[(r0 + 2 * b, k)];
                    let base = r0 * n + 2 * b * n;
                    realify[(base + j, col)] = z.re;
                    realify[(base + n + j, col)] = z.im;
                }
            }
        }
        Ok(GeometricEmbedding {
            field,
            w,
            tau,
            n,
            realify,
        })
    }

    pub fn field(&self) -> &Arc<NumberField> {
        &self.field
    }

    pub fn basis(&self) -> &[FieldElement] {
        &self.w
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m0(&self) -> usize {
        self.w.len()
    }

    pub fn r0(&self) -> usize {
        self.field.real_count()
    }

    pub fn s0(&self) -> usize {
        self.field.complex_pairs()
    }

    /// (τ_k(w_j)), rows in embedding order.
    pub fn embedding_matrix(&self) -> &DMatrix<Complex64> {
        &self.tau
    }

    pub fn det_tau(&self) -> f64 {
        self.tau.determinant().norm()
    }

    /// ‖N_{M/ℚ} e_ξ‖ for |ξ| = 1, i.e. |det τ| / 2^{s₀}.
    pub fn norm_constant(&self) -> f64 {
        self.det_tau() / 2f64.powi(self.s0() as i32)
    }

    /// Sharp constant κ with ‖N v‖ ≤ κ‖v′‖^{m₀} for vectors v.
    pub fn covolume_bound(&self) -> f64 {
        let m0 = self.m0() as f64;
        self.det_tau() * m0.powf(-m0 / 2.0)
    }

    /// Real matrix of V′(ℤ) coordinates → ℝ^{N·m₀}.
    pub fn realification(&self) -> &DMatrix<f64> {
        &self.realify
    }
}

/// Sparse-serializable exterior vector with exact integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeVector {
    pub grade: usize,
    pub ambient: usize,
    /// Lexicographically ordered over sorted index subsets.
    pub coords: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct WedgeJson {
    grade: usize,
    ambient: usize,
    coords: BTreeMap<String, String>,
}

impl Serialize for WedgeVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let subs = subsets(self.ambient, self.grade);
        let coords = subs
            .iter()
            .zip(&self.coords)
            .filter(|(_, c)| !c.is_zero())
            .map(|(idx, c)| {
                let key = idx.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
                (key, c.to_string())
            })
            .collect();
        WedgeJson {
            grade: self.grade,
            ambient: self.ambient,
            coords,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WedgeVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = WedgeJson::deserialize(d)?;
        let len = crate::wedge::binom(j.ambient, j.grade);
        let mut coords = vec![BigInt::zero(); len];
        for (k, v) in j.coords {
            let idx: Vec<usize> = if k.is_empty() {
                vec![]
            } else {
                k.split(',')
                    .map(|x| x.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(D::Error::custom)?
            };
            if idx.len() != j.grade || idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= j.ambient) {
                return Err(D::Error::custom(format!("bad index tuple {k}")));
            }
            coords[subset_rank(j.ambient, &idx)] = v.parse().map_err(D::Error::custom)?;
        }
        Ok(WedgeVector {
            grade: j.grade,
            ambient: j.ambient,
            coords,
        })
    }
}

impl WedgeVector {
    /// Norm under the product metric of V′(ℝ) (Cauchy–Binet through the realification).
    pub fn norm(&self, emb: &GeometricEmbedding) -> f64 {
        let e = emb.realification();
        let subs = subsets(self.ambient, self.grade);
        let nz: Vec<(usize, f64)> = self
            .coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (i, c.to_f64().unwrap_or(f64::INFINITY)))
            .collect();
        // image Plücker coordinates: (∧E p)_I = Σ_J det(E[I, J]) p_J
        let rows = subsets(e.nrows(), self.grade);
        let mut total = 0.0;
        for r in &rows {
            let mut s = 0.0;
            for &(j, c) in &nz {
                let cols = &subs[j];
                let m = DMatrix::from_fn(self.grade, self.grade, |a, b| e[(r[a], cols[b])]);
                s += m.determinant() * c;
            }
            total += s * s;
        }
        total.sqrt()
    }
}

fn integral_coords(x: &FieldElement) -> Result<Vec<BigInt>> {
    x.coords()
        .iter()
        .map(|c| {
            if c.is_integer() {
                Ok(c.to_integer())
            } else {
                Err(Error::NonIntegral(x.to_string()))
            }
        })
        .collect()
}

/// Integer coordinates of v′ in the basis {w_k·e_j}.
pub fn geom_embed(v: &[FieldElement], emb: &GeometricEmbedding) -> Result<Vec<BigInt>> {
    if v.len() != emb.n {
        return Err(Error::Dimension(format!("vector of length {} in N = {}", v.len(), emb.n)));
    }
    let m0 = emb.m0();
    let mut out = vec![BigInt::zero(); emb.n * m0];
    for (j, x) in v.iter().enumerate() {
        if x.owner() != emb.field() {
            return Err(crate::arith::ArithError::FieldMismatch.into());
        }
        for (k, c) in integral_coords(x)?.into_iter().enumerate() {
            out[k * emb.n + j] = c;
        }
    }
    Ok(out)
}

fn scale_vector(w: &FieldElement, v: &[FieldElement]) -> Result<Vec<FieldElement>> {
    v.iter().map(|x| Ok(w.mul(x)?)).collect()
}

/// The ℤ-basis {w_k·v′_i} (i-major, then k) of the O_M-span of v₁..v_a.
pub fn norm_map_columns(vs: &[Vec<FieldElement>], emb: &GeometricEmbedding) -> Result<Vec<Vec<BigInt>>> {
    let mut cols = Vec::with_capacity(vs.len() * emb.m0());
    for v in vs {
        for w in &emb.w {
            cols.push(geom_embed(&scale_vector(w, v)?, emb)?);
        }
    }
    Ok(cols)
}

/// N_{M/ℚ}(v₁∧…∧v_a) = ∧_i (w₁v′_i ∧ … ∧ w_{m₀}v′_i), exact.
pub fn norm_map(vs: &[Vec<FieldElement>], emb: &GeometricEmbedding) -> Result<WedgeVector> {
    let cols = norm_map_columns(vs, emb)?;
    Ok(WedgeVector {
        grade: cols.len(),
        ambient: emb.n * emb.m0(),
        coords: plucker_int(&cols),
    })
}

/// Determinant of a square matrix over the field (Laplace expansion; N is small).
pub fn field_det(g: &[Vec<FieldElement>]) -> Result<FieldElement> {
    let n = g.len();
    if n == 1 {
        return Ok(g[0][0].clone());
    }
    let field = g[0][0].owner().clone();
    let mut acc = field.zero();
    for c in 0..n {
        let minor: Vec<Vec<FieldElement>> = g[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = g[0][c].mul(&field_det(&minor)?)?;
        acc = if c % 2 == 0 { acc.add(&term)? } else { acc.sub(&term)? };
    }
    Ok(acc)
}

/// Integer matrix of g′ on V′(ℤ): block (k′, k) of entry (i, j) is the regular representation of g_ij.
pub fn restricted_matrix(g: &[Vec<FieldElement>], emb: &GeometricEmbedding) -> Result<Vec<Vec<BigInt>>> {
    let n = emb.n;
    let m0 = emb.m0();
    let mut out = vec![vec![BigInt::zero(); n * m0]; n * m0];
    for i in 0..n {
        for j in 0..n {
            integral_coords(&g[i][j])?;
            let rep = g[i][j].power_regular_rep();
            for kp in 0..m0 {
                for k in 0..m0 {
                    out[kp * n + i][k * n + j] = rep[(kp, k)].to_integer();
                }
            }
        }
    }
    Ok(out)
}

fn mat_vec_field(g: &[Vec<FieldElement>], v: &[FieldElement]) -> Result<Vec<FieldElement>> {
    g.iter()
        .map(|row| {
            let field = row[0].owner().clone();
            row.iter().zip(v).try_fold(field.zero(), |acc, (a, b)| Ok(acc.add(&a.mul(b)?)?))
        })
        .collect()
}

/// Exact check of g′·N(v) = N(g·v); the left side applies the compound matrix of g′.
pub fn equivariance_check(g: &[Vec<FieldElement>], vs: &[Vec<FieldElement>], emb: &GeometricEmbedding) -> Result<bool> {
    let n = emb.n;
    if g.len() != n || g.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("g must be N×N".into()));
    }
    let det = field_det(g)?;
    if det != emb.field.one() {
        return Err(Error::Determinant(det.to_string()));
    }
    let nv = norm_map(vs, emb)?;
    let gp = &restricted_matrix(g, emb)?;
    let d = nv.grade;
    let col_sets = subsets(nv.ambient, d);
    let support: Vec<(&Vec<usize>, &BigInt)> =
        col_sets.iter().zip(&nv.coords).filter(|(_, c)| !c.is_zero()).collect();
    let lhs: Vec<BigInt> = crate::par::map_slice(&col_sets, |rows| {
        support.iter().fold(BigInt::zero(), |acc, (cols, c)| {
            let entries: Vec<BigInt> = rows
                .iter()
                .flat_map(|&r| cols.iter().map(move |&cc| gp[r][cc].clone()))
                .collect();
            acc + int_det(d, &entries) * *c
        })
    });
    let gv: Vec<Vec<FieldElement>> = vs.iter().map(|v| mat_vec_field(g, v)).collect::<Result<_>>()?;
    let rhs = norm_map(&gv, emb)?;
    Ok(lhs == rhs.coords)
}

/// Covolume of the ℤ-span of V′(ℤ) vectors; the flag is true when they are dependent.
pub fn covolume(vectors: &[Vec<BigInt>], emb: &GeometricEmbedding) -> (f64, bool) {
    let dim = emb.n * emb.m0();
    let x = DMatrix::from_fn(dim, vectors.len(), |i, j| vectors[j][i].to_f64().unwrap_or(f64::NAN));
    let img = emb.realification() * x;
    let rank = crate::arith::QMatrix::from_fn(dim, vectors.len(), |i, j| Q::from_integer(vectors[j][i].clone())).rank();
    if rank < vectors.len() {
        return (0.0, true);
    }
    let all: Vec<usize> = (0..vectors.len()).collect();
    (gram_norm(&img, &all), false)
}

/// ‖v′‖ under the product metric.
pub fn embedded_norm(v: &[FieldElement], emb: &GeometricEmbedding) -> Result<f64> {
    let c = geom_embed(v, emb)?;
    Ok(covolume(&[c], emb).0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub ratio: f64,
    pub bound: f64,
}

/// ‖N v‖ / ‖v′‖^{m₀} together with the analytic bound |det τ|·m₀^{−m₀/2}.
pub fn covolume_decrease_margin(v: &[FieldElement], emb: &GeometricEmbedding) -> Result<Margin> {
    if v.iter().all(FieldElement::is_zero) {
        return Err(Error::ZeroVector);
    }
    let nv = norm_map(&[v.to_vec()], emb)?;
    let num = nv.norm(emb);
    let den = embedded_norm(v, emb)?.powi(emb.m0() as i32);
    Ok(Margin {
        ratio: num / den,
        bound: emb.covolume_bound(),
    })
}

/// ∏ over all m₀ embeddings of ‖τ_i(v₁) ∧ … ∧ τ_i(v_a)‖ (Hermitian Gram norms).
pub fn embedding_norm_product(vs: &[Vec<FieldElement>], emb: &GeometricEmbedding) -> f64 {
    (0..emb.m0())
        .map(|k| {
            let m = DMatrix::from_fn(emb.n, vs.len(), |i, j| vs[j][i].embed(k));
            gram_norm_complex(&m, &(0..vs.len()).collect::<Vec<_>>())
        })
        .product()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub field: String,
    pub n: usize,
    pub cases: usize,
    pub equivariance_failures: usize,
    pub margin_cases: usize,
    pub margin_violations: usize,
    /// Largest ratio / bound seen.
    pub worst_margin: f64,
}

fn random_element<R: Rng + ?Sized>(field: &Arc<NumberField>, range: i64, rng: &mut R) -> FieldElement {
    let c: Vec<i64> = (0..field.degree()).map(|_| rng.random_range(-range..=range)).collect();
    field.from_ints(&c)
}

/// Random element of SL_N(O_M): a product of elementary matrices with small integral entries.
pub fn random_sl<R: Rng + ?Sized>(field: &Arc<NumberField>, n: usize, factors: usize, rng: &mut R) -> Vec<Vec<FieldElement>> {
    let mut g: Vec<Vec<FieldElement>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { field.one() } else { field.zero() }).collect()).collect();
    for _ in 0..factors {
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let x = random_element(field, 2, rng);
        // row_i += x·row_j
        for c in 0..n {
            let add = x.mul(&g[j][c]).expect("same field");
            g[i][c] = g[i][c].add(&add).expect("same field");
        }
    }
    g
}

/// Equivariance of the norm map on random (g, v₁..v_a) and the covolume margin on random v,
/// each case drawing from its own RNG stream.
pub fn random_audit(emb: &GeometricEmbedding, cases: usize, margin_cases: usize, seed: u64) -> Result<AuditReport> {
    let field = emb.field().clone();
    let n = emb.n;
    let eq = crate::par::map_range(cases, |k| -> Result<bool> {
        let mut rng = crate::par::stream_rng(seed, k as u64);
        let g = random_sl(&field, n, 3, &mut rng);
        let a = rng.random_range(1..=n);
        let vs: Vec<Vec<FieldElement>> =
            (0..a).map(|_| (0..n).map(|_| random_element(&field, 3, &mut rng)).collect()).collect();
        equivariance_check(&g, &vs, emb)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let margins = crate::par::map_range(margin_cases, |k| -> Result<f64> {
        let mut rng = crate::par::stream_rng(seed ^ 0x9e37_79b9_7f4a_7c15, k as u64);
        loop {
            let v: Vec<FieldElement> = (0..n).map(|_| random_element(&field, 5, &mut rng)).collect();
            if v.iter().all(FieldElement::is_zero) {
                continue;
            }
            let m = covolume_decrease_margin(&v, emb)?;
            return Ok(m.ratio / m.bound);
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(AuditReport {
        field: field.modulus().to_string(),
        n,
        cases,
        equivariance_failures: eq.iter().filter(|ok| !**ok).count(),
        margin_cases,
        margin_violations: margins.iter().filter(|&&r| r > 1.0 + 1e-9).count(),
        worst_margin: margins.iter().copied().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::RatPolynomial;

    fn sqrt2(n: usize) -> GeometricEmbedding {
        GeometricEmbedding::new(NumberField::new(RatPolynomial::from_ints(&[-2, 0, 1])).unwrap(), n).unwrap()
    }

    fn vecf(emb: &GeometricEmbedding, v: &[&[i64]]) -> Vec<FieldElement> {
        v.iter().map(|c| emb.field().from_ints(c)).collect()
    }

    #[test]
    fn embed_basis_images() {
        let e = sqrt2(2);
        let big = |v: &[i64]| v.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>();
        assert_eq!(geom_embed(&vecf(&e, &[&[1], &[0]]), &e).unwrap(), big(&[1, 0, 0, 0]));
        assert_eq!(geom_embed(&vecf(&e, &[&[0, 1], &[0]]), &e).unwrap(), big(&[0, 0, 1, 0]));
        assert_eq!(geom_embed(&vecf(&e, &[&[0], &[1, 1]]), &e).unwrap(), big(&[0, 1, 0, 1]));
        let half = vec![e.field().element(vec![Q::new(1.into(), 2.into()), Q::zero()]).unwrap(), e.field().zero()];
        assert!(matches!(geom_embed(&half, &e), Err(Error::NonIntegral(_))));
    }

    #[test]
    fn norm_of_e1_in_real_quadratic() {
        let e = sqrt2(2);
        let n = norm_map(&[vecf(&e, &[&[1], &[0]])], &e).unwrap();
        assert!((n.norm(&e).powi(2) - 8.0).abs() < 1e-12);
        let (cov, dep) = covolume(&norm_map_columns(&[vecf(&e, &[&[1], &[0]])], &e).unwrap(), &e);
        assert!(!dep && (cov - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let m = covolume_decrease_margin(&vecf(&e, &[&[1], &[0]]), &e).unwrap();
        assert!((m.ratio - 2f64.sqrt()).abs() < 1e-12);
        assert!((m.bound - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rational_field_is_identity() {
        let e = GeometricEmbedding::new(NumberField::rationals(), 3).unwrap();
        let v = vec![vecf(&e, &[&[1], &[2], &[0]]), vecf(&e, &[&[0], &[1], &[5]])];
        let n = norm_map(&v, &e).unwrap();
        let direct = plucker_int(&[
            vec![1.into(), 2.into(), 0.into()],
            vec![0.into(), 1.into(), 5.into()],
        ]);
        assert_eq!(n.coords, direct);
        let m = covolume_decrease_margin(&v[0], &e).unwrap();
        assert!((m.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shear_equivariance() {
        let e = sqrt2(2);
        let f = e.field().clone();
        let g = vec![vec![f.one(), f.from_ints(&[0, 1])], vec![f.zero(), f.one()]];
        assert!(equivariance_check(&g, &[vecf(&e, &[&[0], &[1]])], &e).unwrap());
        let id = vec![vec![f.one(), f.zero()], vec![f.zero(), f.one()]];
        assert!(equivariance_check(&id, &[vecf(&e, &[&[3, 1], &[1]])], &e).unwrap());
        let bad = vec![vec![f.from_ints(&[2]), f.zero()], vec![f.zero(), f.one()]];
        assert!(matches!(equivariance_check(&bad, &[vecf(&e, &[&[1], &[0]])], &e), Err(Error::Determinant(_))));
    }

    #[test]
    fn norm_identity_with_complex_pair() {
        let field = NumberField::new(RatPolynomial::from_ints(&[-2, 0, 0, 1])).unwrap();
        let e = GeometricEmbedding::new(field, 3).unwrap();
        let v = vec![vecf(&e, &[&[1, 2], &[0, 0, 1], &[-1]]), vecf(&e, &[&[0, 1], &[1], &[2, 0, 1]])];
        let n = norm_map(&v, &e).unwrap();
        let want = e.norm_constant().powi(2) * embedding_norm_product(&v, &e);
        assert!((n.norm(&e) - want).abs() < 1e-9 * want);
    }

    #[test]
    fn sign_follows_permutation_parity() {
        let e = sqrt2(3);
        let a = vecf(&e, &[&[1, 1], &[0], &[2]]);
        let b = vecf(&e, &[&[0], &[1, -1], &[1]]);
        let ab = norm_map(&[a.clone(), b.clone()], &e).unwrap();
        let ba = norm_map(&[b, a], &e).unwrap();
        // swapping two blocks of m₀ columns is a permutation of sign (−1)^{m₀²}
        let sign = if e.m0() % 2 == 0 { 1 } else { -1 };
        assert_eq!(ab.coords, ba.coords.iter().map(|c| c * sign).collect::<Vec<_>>());
    }

    #[test]
    fn random_audit_is_clean() {
        let emb = sqrt2(2);
        let mut rng = crate::par::stream_rng(3, 0);
        let g = random_sl(emb.field(), 2, 4, &mut rng);
        assert_eq!(field_det(&g).unwrap(), emb.field().one());
        let r = random_audit(&emb, 12, 40, 5).unwrap();
        assert_eq!((r.equivariance_failures, r.margin_violations), (0, 0));
        assert!(r.worst_margin > 0.0);
        assert_eq!(r, random_audit(&emb, 12, 40, 5).unwrap());
    }

    #[test]
    fn sparse_json_round_trip() {
        let e = sqrt2(2);
        let n = norm_map(&[vecf(&e, &[&[1], &[1]])], &e).unwrap();
        let s = serde_json::to_string(&n).unwrap();
        let back: WedgeVector = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
    }
}
