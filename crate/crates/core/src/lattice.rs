//! Lattice reduction and enumeration for small ranks.
//!
//! Bases are columns. Enumeration is Fincke–Pohst over the Gram–Schmidt data of an
//! LLL-reduced basis; radii are inflated by 1 + 10⁻⁹ and, when an exact integer
//! basis is known, boundary cases are re-decided in integer arithmetic.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::par;

pub const MAX_RANK: usize = 12;
pub const COUNT_GUARD: u64 = 1_000_000_000;
const INFLATE: f64 = 1.0 + 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeBasis {
    basis: DMatrix<f64>,
    exact: Option<DMatrix<i64>>,
    det: f64,
}

impl LatticeBasis {
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::Dimension("lattice basis must be square".into()));
        }
        let det = basis.determinant();
        let scale = basis.column_iter().map(|c| c.norm()).product::<f64>();
        if det == 0.0 || !det.is_finite() || det.abs() < 1e-14 * scale {
            return Err(Error::SingularBasis);
        }
        Ok(LatticeBasis {
            basis,
            exact: None,
            det: det.abs(),
        })
    }

    pub fn from_integer(m: DMatrix<i64>) -> Result<Self> {
        let mut l = Self::new(m.map(|x| x as f64))?;
        l.exact = Some(m);
        Ok(l)
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn exact(&self) -> Option<&DMatrix<i64>> {
        self.exact.as_ref()
    }

    /// |det| of the basis.
    pub fn covolume(&self) -> f64 {
        self.det
    }
}

/// LLL-reduced basis with the unimodular transform U (reduced = original · U).
#[derive(Clone, Debug)]
pub struct Reduced {
    pub lattice: LatticeBasis,
    pub transform: DMatrix<i64>,
}

struct GramSchmidt {
    mu: DMatrix<f64>,
    b2: Vec<f64>,
}

fn gram_schmidt(b: &DMatrix<f64>) -> GramSchmidt {
    let d = b.ncols();
    let mut star: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(d);
    let mut mu = DMatrix::zeros(d, d);
    let mut b2 = vec![0.0; d];
    for i in 0..d {
        let bi = b.column(i).clone_owned();
        let mut v = bi.clone();
        for j in 0..i {
            mu[(i, j)] = bi.dot(&star[j]) / b2[j];
            v -= &star[j] * mu[(i, j)];
        }
        b2[i] = v.norm_squared();
        mu[(i, i)] = 1.0;
        star.push(v);
    }
    GramSchmidt { mu, b2 }
}

pub fn lll_reduce(l: &LatticeBasis, delta: f64) -> Result<Reduced> {
    if !(delta > 0.25 && delta < 1.0) {
        return Err(Error::Precondition(format!("LLL parameter {delta} outside (1/4, 1)")));
    }
    let d = l.rank();
    let mut b = l.basis.clone();
    let mut u = DMatrix::<i64>::identity(d, d);
    let mut gs = gram_schmidt(&b);
    let mut k = 1;
    let mut guard = 0usize;
    while k < d {
        guard += 1;
        if guard > 1_000_000 {
            return Err(Error::SingularBasis);
        }
        for j in (0..k).rev() {
            let qf = gs.mu[(k, j)].round();
            if qf != 0.0 {
                if !qf.is_finite() || qf.abs() > 9e15 {
                    return Err(Error::SingularBasis);
                }
                let qi = qf as i64;
                let bj = b.column(j).clone_owned();
                let mut bk = b.column_mut(k);
                bk -= bj * qf;
                for r in 0..d {
                    u[(r, k)] -= qi * u[(r, j)];
                }
                for i in 0..=j {
                    gs.mu[(k, i)] -= qf * gs.mu[(j, i)];
                }
            }
        }
        let m = gs.mu[(k, k - 1)];
        if gs.b2[k] >= (delta - m * m) * gs.b2[k - 1] {
            k += 1;
        } else {
            b.swap_columns(k, k - 1);
            u.swap_columns(k, k - 1);
            gs = gram_schmidt(&b);
            if gs.b2.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::SingularBasis);
            }
            k = (k - 1).max(1);
        }
    }
    let exact = l.exact.as_ref().and_then(|e| checked_mul(e, &u));
    Ok(Reduced {
        lattice: LatticeBasis {
            det: l.det,
            basis: b,
            exact,
        },
        transform: u,
    })
}

fn checked_mul(a: &DMatrix<i64>, b: &DMatrix<i64>) -> Option<DMatrix<i64>> {
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s: i64 = 0;
            for k in 0..a.ncols() {
                s = s.checked_add(a[(i, k)].checked_mul(b[(k, j)])?)?;
            }
            out[(i, j)] = s;
        }
    }
    Some(out)
}

/// Visits every nonzero-or-zero coefficient vector y with ‖B y‖² ≤ r2 whose last
/// coordinate equals `top`.
fn enumerate_with_top(gs: &GramSchmidt, r2: f64, top: i64, visit: &mut dyn FnMut(&[i64], f64)) {
    let d = gs.b2.len();
    let mut y = vec![0i64; d];
    y[d - 1] = top;
    let last = gs.b2[d - 1] * (top as f64).powi(2);
    if last > r2 {
        return;
    }
    fn rec(gs: &GramSchmidt, r2: f64, j: usize, partial: f64, y: &mut Vec<i64>, visit: &mut dyn FnMut(&[i64], f64)) {
        let d = y.len();
        let c: f64 = -(j + 1..d).map(|i| gs.mu[(i, j)] * y[i] as f64).sum::<f64>();
        let room = (r2 - partial) / gs.b2[j];
        if room < 0.0 {
            return;
        }
        let w = room.sqrt();
        let lo = (c - w).ceil() as i64;
        let hi = (c + w).floor() as i64;
        for v in lo..=hi {
            y[j] = v;
            let p = partial + gs.b2[j] * (v as f64 - c).powi(2);
            if p > r2 {
                continue;
            }
            if j == 0 {
                visit(y, p);
            } else {
                rec(gs, r2, j - 1, p, y, visit);
            }
        }
        y[j] = 0;
    }
    if d == 1 {
        visit(&y, last);
    } else {
        rec(gs, r2, d - 2, last, &mut y, visit);
    }
}

fn top_range(gs: &GramSchmidt, r2: f64) -> i64 {
    let d = gs.b2.len();
    (r2 / gs.b2[d - 1]).sqrt().floor() as i64
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortVector {
    /// Coefficients with respect to the input basis.
    pub coeffs: Vec<i64>,
    pub vector: Vec<f64>,
    pub norm: f64,
}

fn exact_norm2(e: &DMatrix<i64>, x: &[i64]) -> Option<i128> {
    let mut s: i128 = 0;
    for i in 0..e.nrows() {
        let mut v: i128 = 0;
        for (j, xj) in x.iter().enumerate() {
            v = v.checked_add((e[(i, j)] as i128).checked_mul(*xj as i128)?)?;
        }
        s = s.checked_add(v.checked_mul(v)?)?;
    }
    Some(s)
}

/// Exact shortest nonzero vector; ties go to the lexicographically smallest coefficients.
pub fn shortest_vector(l: &LatticeBasis) -> Result<ShortVector> {
    let d = l.rank();
    if d > MAX_RANK {
        return Err(Error::RankTooLarge(d, MAX_RANK));
    }
    let red = lll_reduce(l, 0.99)?;
    let gs = gram_schmidt(&red.lattice.basis);
    let r2 = gs.b2[0] * INFLATE * INFLATE;
    let mut cands: Vec<(Vec<i64>, f64)> = Vec::new();
    let top = top_range(&gs, r2);
    for t in -top..=top {
        enumerate_with_top(&gs, r2, t, &mut |y, n2| {
            if y.iter().any(|&v| v != 0) {
                cands.push((y.to_vec(), n2));
            }
        });
    }
    let u = &red.transform;
    let to_input = |y: &[i64]| -> Vec<i64> {
        (0..d).map(|i| (0..d).map(|j| u[(i, j)] * y[j]).sum()).collect()
    };
    let mut scored: Vec<(Vec<i64>, f64, Option<i128>)> = cands
        .into_iter()
        .map(|(y, n2)| {
            let x = to_input(&y);
            let ex = l.exact.as_ref().and_then(|e| exact_norm2(e, &x));
            (x, n2, ex)
        })
        .collect();
    let best = if scored.iter().all(|c| c.2.is_some()) {
        let m = scored.iter().map(|c| c.2.unwrap()).min().ok_or(Error::SingularBasis)?;
        scored.retain(|c| c.2 == Some(m));
        scored.into_iter().min_by(|a, b| a.0.cmp(&b.0)).unwrap()
    } else {
        let m = scored.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        scored.retain(|c| c.1 <= m * (1.0 + 1e-9));
        scored.into_iter().min_by(|a, b| a.0.cmp(&b.0)).ok_or(Error::SingularBasis)?
    };
    let coeffs = best.0;
    let vector: Vec<f64> = (0..d)
        .map(|i| (0..d).map(|j| l.basis[(i, j)] * coeffs[j] as f64).sum())
        .collect();
    let norm = match best.2 {
        Some(e) => (e as f64).sqrt(),
        None => vector.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    Ok(ShortVector { coeffs, vector, norm })
}

pub fn systole(l: &LatticeBasis) -> Result<f64> {
    Ok(shortest_vector(l)?.norm)
}

/// #{v ∈ L ∖ {0} : ‖v‖ ≤ r}.
pub fn count_points(l: &LatticeBasis, r: f64) -> Result<u64> {
    let d = l.rank();
    if d > MAX_RANK {
        return Err(Error::RankTooLarge(d, MAX_RANK));
    }
    if !(r > 0.0) {
        return Err(Error::Precondition(format!("radius {r} must be positive")));
    }
    let ball = ball_volume(d, r);
    if ball / l.det > COUNT_GUARD as f64 {
        return Err(Error::CountGuard(COUNT_GUARD));
    }
    let red = lll_reduce(l, 0.99)?;
    let gs = gram_schmidt(&red.lattice.basis);
    let r2 = r * r * INFLATE * INFLATE;
    let top = top_range(&gs, r2);
    let exact = red.lattice.exact.clone();
    let rr = r * r;
    let count = par::sum_range_i64(-top, top + 1, |t| {
        let mut c = 0u64;
        enumerate_with_top(&gs, r2, t, &mut |y, n2| {
            if y.iter().all(|&v| v == 0) {
                return;
            }
            let inside = match exact.as_ref().and_then(|e| exact_norm2(e, y)) {
                Some(e) => (e as f64) <= rr,
                None => n2 <= r2,
            };
            if inside {
                c += 1;
            }
        });
        c
    });
    if count > COUNT_GUARD {
        return Err(Error::CountGuard(COUNT_GUARD));
    }
    Ok(count)
}

/// √(Gram determinant) of the columns of `b` indexed by ξ.
pub fn wedge_norm(b: &DMatrix<f64>, xi: &[usize]) -> Result<f64> {
    if xi.is_empty() {
        return Err(Error::Precondition("ξ must be nonempty".into()));
    }
    Ok(crate::wedge::gram_norm(b, xi))
}

/// Volume of the Euclidean ball of radius r in ℝ^d.
pub fn ball_volume(d: usize, r: f64) -> f64 {
    // V_d = π^{d/2} / Γ(d/2 + 1); recursion V_d = 2π/d · V_{d−2}
    let mut v = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut k = if d % 2 == 0 { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * std::f64::consts::PI / k as f64;
        k += 2;
    }
    v * r.powi(d as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn int(rows: &[&[i64]]) -> LatticeBasis {
        let n = rows.len();
        LatticeBasis::from_integer(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn identity_is_reduced() {
        let l = int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let r = lll_reduce(&l, 0.99).unwrap();
        assert_eq!(r.transform, DMatrix::identity(3, 3));
        let sv = shortest_vector(&l).unwrap();
        assert_eq!(sv.norm, 1.0);
        assert_eq!(sv.coeffs, vec![-1, 0, 0]);
    }

    #[test]
    fn skewed_basis_reduces_to_unit() {
        let l = int(&[&[1, 0], &[1_000_000, 1]]);
        let r = lll_reduce(&l, 0.99).unwrap();
        assert!((r.lattice.basis().column(0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn determinant_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = DMatrix::from_fn(6, 6, |_, _| rng.random_range(-50.0..50.0));
        let l = LatticeBasis::new(b.clone()).unwrap();
        let r = lll_reduce(&l, 0.99).unwrap();
        let rel = (r.lattice.basis().determinant().abs() - b.determinant().abs()) / b.determinant().abs();
        assert!(rel.abs() < 1e-9);
        assert_eq!(r.transform.map(|x| x as f64).determinant().abs().round(), 1.0);
    }

    #[test]
    fn diagonal_systoles() {
        let l = LatticeBasis::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5]))).unwrap();
        assert_eq!(systole(&l).unwrap(), 0.5);
        let t: f64 = 1.3;
        let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![t.exp(), (-t).exp()]));
        assert!((systole(&LatticeBasis::new(g).unwrap()).unwrap() - (-t).exp()).abs() < 1e-15);
    }

    #[test]
    fn point_counts_in_integer_lattices() {
        let z3 = int(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(count_points(&z3, 1.0).unwrap(), 6);
        assert_eq!(count_points(&z3, 1.5).unwrap(), 18);
        let z2 = int(&[&[1, 0], &[0, 1]]);
        assert_eq!(count_points(&z2, 2.0).unwrap(), 12);
    }

    #[test]
    fn count_guard_fires() {
        let tiny = LatticeBasis::new(DMatrix::identity(3, 3) * 1e-4).unwrap();
        assert_eq!(count_points(&tiny, 1.0), Err(Error::CountGuard(COUNT_GUARD)));
    }

    #[test]
    fn wedge_norm_cases() {
        let b = DMatrix::from_row_slice(3, 3, &[3.0, 0.0, 0.0, 4.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(wedge_norm(&b, &[0]).unwrap(), 5.0);
        assert_eq!(wedge_norm(&DMatrix::identity(3, 3), &[0, 2]).unwrap(), 1.0);
        assert!(wedge_norm(&b, &[]).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(3, 2.0) - 33.510321638291124).abs() < 1e-12);
        assert!((ball_volume(2, 1.0) - std::f64::consts::PI).abs() < 1e-15);
        assert!((ball_volume(1, 1.0) - 2.0).abs() < 1e-15);
    }
}
