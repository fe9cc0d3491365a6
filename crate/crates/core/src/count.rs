//! Integer matrices with a prescribed characteristic polynomial in Frobenius balls.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::arith::RatPolynomial;
use crate::error::{Error, Result};
use crate::par;

/// Largest radius accepted by the enumerators.
pub const MAX_RADIUS: f64 = 1e6;
/// Default cap on innermost loop visits for N = 3.
pub const DEFAULT_BUDGET: u64 = 20_000_000_000;

/// Monic integer polynomial, coefficients from the leading one down.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntPoly(pub Vec<i64>);

impl IntPoly {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs[0] != 1 {
            return Err(Error::Precondition(format!("{coeffs:?} is not monic of degree ≥ 1")));
        }
        Ok(IntPoly(coeffs))
    }

    /// Parses "1,-3,2" (leading coefficient first).
    pub fn parse(s: &str) -> Result<Self> {
        let coeffs = s
            .split(',')
            .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Precondition(format!("bad coefficient {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn to_rat(&self) -> RatPolynomial {
        RatPolynomial::from_ints_high_first(&self.0)
    }

    /// p(−x)·(−1)^deg, the characteristic polynomial of −A.
    pub fn negated(&self) -> Self {
        IntPoly(self.0.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { *c }).collect())
    }

    /// (l₀, a₀) for degree ≤ 3: rational roots and whether an irreducible remainder is left.
    pub fn split_type(&self) -> Result<(usize, usize)> {
        let p = self.to_rat();
        let d = self.degree();
        if d > 3 {
            return Err(Error::Precondition("split type is determined automatically only for degree ≤ 3".into()));
        }
        if p.gcd(&p.derivative()).degree() != Some(0) {
            return Err(Error::Precondition(format!("{:?} is not squarefree", self.0)));
        }
        let l0 = p.rational_roots().len();
        Ok((l0, usize::from(l0 < d)))
    }
}

fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn radius_sq(r: f64) -> Result<i64> {
    if !(r >= 0.0) || r > MAX_RADIUS {
        return Err(Error::Precondition(format!("radius {r} outside [0, {MAX_RADIUS}]")));
    }
    Ok((r * r).floor() as i64)
}

fn quadratic(p: &IntPoly) -> Result<(i64, i64)> {
    if p.degree() != 2 {
        return Err(Error::Precondition(format!("expected a quadratic, got degree {}", p.degree())));
    }
    Ok((-p.0[1], p.0[2]))
}

/// #{[[a,b],[c,d]] ∈ M₂(ℤ) : a+d = T, ad−bc = D, a²+b²+c²+d² ≤ R²} for p = x² − Tx + D.
pub fn enumerate_n2(p: &IntPoly, r: f64) -> Result<u64> {
    let (t, det) = quadratic(p)?;
    let r2 = radius_sq(r)?;
    let top = isqrt(r2);
    Ok(par::sum_range_i64(-top, top + 1, |a| {
        let d = t - a;
        let rem = r2 - a * a - d * d;
        if rem < 0 {
            return 0;
        }
        let k = a * d - det;
        let m = isqrt(rem);
        if k == 0 {
            // bc = 0: b = 0 with any c, or c = 0 with b ≠ 0
            return (4 * m + 1) as u64;
        }
        let mut c = 0u64;
        for b in 1..=m {
            if k % b == 0 {
                let cc = k / b;
                if b * b + cc * cc <= rem {
                    c += 2; // (b, cc) and (−b, −cc)
                }
            }
        }
        c
    }))
}

/// The matrices counted by [`enumerate_n2`], row-major.
pub fn list_n2(p: &IntPoly, r: f64) -> Result<Vec<[i64; 4]>> {
    let (t, det) = quadratic(p)?;
    let r2 = radius_sq(r)?;
    let top = isqrt(r2);
    let mut out = Vec::new();
    for a in -top..=top {
        let d = t - a;
        let rem = r2 - a * a - d * d;
        if rem < 0 {
            continue;
        }
        let m = isqrt(rem);
        for b in -m..=m {
            for c in -m..=m {
                if a * d - b * c == det && b * b + c * c <= rem {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    Ok(out)
}

struct Cubic {
    t: i64,
    c2: i64,
    det: i64,
}

fn cubic(p: &IntPoly) -> Result<Cubic> {
    if p.degree() != 3 {
        return Err(Error::Precondition(format!("expected a cubic, got degree {}", p.degree())));
    }
    Ok(Cubic {
        t: -p.0[1],
        c2: p.0[2],
        det: -p.0[3],
    })
}

fn det3(m: &[i64; 9]) -> i64 {
    m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) + m[2] * (m[3] * m[7] - m[4] * m[6])
}

struct Budget<'a> {
    limit: u64,
    used: &'a AtomicU64,
    abort: &'a AtomicBool,
}

impl Budget<'_> {
    fn charge(&self, n: u64) -> bool {
        if self.used.fetch_add(n, Ordering::Relaxed) + n > self.limit {
            self.abort.store(true, Ordering::Relaxed);
        }
        !self.abort.load(Ordering::Relaxed)
    }
}

/// Visits every 3×3 solution with a₁₁ fixed.
fn visit_n3_row(cb: &Cubic, r2: i64, a11: i64, budget: &Budget, f: &mut dyn FnMut(&[i64; 9])) {
    let rem0 = r2 - a11 * a11;
    let m22 = isqrt(rem0);
    for a22 in -m22..=m22 {
        let a33 = cb.t - a11 - a22;
        let rem1 = rem0 - a22 * a22 - a33 * a33;
        if rem1 < 0 {
            continue;
        }
        let mut ops = 0u64;
        let diag = a11 * a22 + a11 * a33 + a22 * a33;
        let m12 = isqrt(rem1);
        for a12 in -m12..=m12 {
            let rem2 = rem1 - a12 * a12;
            let m21 = isqrt(rem2);
            for a21 in -m21..=m21 {
                let rem3 = rem2 - a21 * a21;
                let m13 = isqrt(rem3);
                for a13 in -m13..=m13 {
                    let rem4 = rem3 - a13 * a13;
                    let m31 = isqrt(rem4);
                    for a31 in -m31..=m31 {
                        let rem5 = rem4 - a31 * a31;
                        // c₂ = diag − a12a21 − a13a31 − a23a32
                        let need = diag - a12 * a21 - a13 * a31 - cb.c2;
                        let m23 = isqrt(rem5);
                        for a23 in -m23..=m23 {
                            let rem6 = rem5 - a23 * a23;
                            ops += 1;
                            let mut check = |a32: i64| {
                                let m = [a11, a12, a13, a21, a22, a23, a31, a32, a33];
                                if det3(&m) == cb.det {
                                    f(&m);
                                }
                            };
                            if a23 == 0 {
                                if need == 0 {
                                    let m32 = isqrt(rem6);
                                    for a32 in -m32..=m32 {
                                        check(a32);
                                    }
                                }
                            } else if need % a23 == 0 {
                                let a32 = need / a23;
                                if a32 * a32 <= rem6 {
                                    check(a32);
                                }
                            }
                        }
                    }
                }
            }
        }
        if !budget.charge(ops) {
            return;
        }
    }
}

/// #{A ∈ M₃(ℤ) : p_A = p, ‖A‖ ≤ R}; errors once more than `budget` loop visits are needed.
pub fn enumerate_n3(p: &IntPoly, r: f64, budget: u64) -> Result<u64> {
    let cb = cubic(p)?;
    let r2 = radius_sq(r)?;
    let top = isqrt(r2);
    let abort = AtomicBool::new(false);
    let used = AtomicU64::new(0);
    let b = Budget { limit: budget, used: &used, abort: &abort };
    let count = par::sum_range_i64(-top, top + 1, |a11| {
        let mut c = 0u64;
        visit_n3_row(&cb, r2, a11, &b, &mut |_| c += 1);
        c
    });
    if abort.load(Ordering::Relaxed) {
        return Err(Error::Budget(format!("more than {budget} loop visits at R = {r}")));
    }
    Ok(count)
}

/// The matrices counted by [`enumerate_n3`], row-major.
pub fn list_n3(p: &IntPoly, r: f64) -> Result<Vec<[i64; 9]>> {
    let cb = cubic(p)?;
    let r2 = radius_sq(r)?;
    let top = isqrt(r2);
    let abort = AtomicBool::new(false);
    let used = AtomicU64::new(0);
    let b = Budget { limit: u64::MAX, used: &used, abort: &abort };
    let mut out = Vec::new();
    for a11 in -top..=top {
        visit_n3_row(&cb, r2, a11, &b, &mut |m| out.push(*m));
    }
    Ok(out)
}

/// Characteristic polynomial of an integer matrix (row-major, N ≤ 3), leading coefficient first.
pub fn charpoly(m: &[i64]) -> Vec<i64> {
    match m.len() {
        4 => vec![1, -(m[0] + m[3]), m[0] * m[3] - m[1] * m[2]],
        9 => {
            let c2 = m[0] * m[4] - m[1] * m[3] + m[0] * m[8] - m[2] * m[6] + m[4] * m[8] - m[5] * m[7];
            let arr: [i64; 9] = m.try_into().unwrap();
            vec![1, -(m[0] + m[4] + m[8]), c2, -det3(&arr)]
        }
        n => panic!("charpoly supports 2×2 and 3×3, got {n} entries"),
    }
}

/// Exact count for N ∈ {2, 3}.
pub fn count(p: &IntPoly, r: f64, budget: u64) -> Result<u64> {
    match p.degree() {
        2 => enumerate_n2(p, r),
        3 => enumerate_n3(p, r, budget),
        d => Err(Error::Precondition(format!("enumeration supports N = 2, 3; got N = {d}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountSpec {
    pub poly: IntPoly,
    pub radii: Vec<f64>,
    pub m0: usize,
    pub l0: usize,
    pub a0: usize,
}

impl CountSpec {
    pub fn new(poly: IntPoly, radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.windows(2).any(|w| !(w[0] < w[1])) || radii[0] <= 0.0 {
            return Err(Error::Precondition("radii must be positive and increasing".into()));
        }
        let (l0, a0) = poly.split_type()?;
        Ok(CountSpec { poly, radii, m0: 1, l0, a0 })
    }

    pub fn n(&self) -> usize {
        self.poly.degree()
    }

    /// α = m₀N(N−1)/2.
    pub fn alpha(&self) -> f64 {
        (self.m0 * self.n() * (self.n() - 1)) as f64 / 2.0
    }

    /// β = l₀ + a₀ − 1.
    pub fn beta(&self) -> f64 {
        (self.l0 + self.a0) as f64 - 1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub count: u64,
    pub normalized: f64,
    pub doubling_log_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub alpha: f64,
    pub beta: f64,
    pub rows: Vec<CountRow>,
}

/// count / (R^α (log R)^β).
pub fn normalize(c: u64, r: f64, alpha: f64, beta: f64) -> f64 {
    c as f64 / (r.powf(alpha) * r.ln().powf(beta))
}

/// Builds the report from counts; the log-ratio is log(c_k/c_{k−1}) / log(R_k/R_{k−1}).
pub fn report_from_counts(radii: &[f64], counts: &[u64], alpha: f64, beta: f64) -> CountReport {
    let rows = radii
        .iter()
        .zip(counts)
        .enumerate()
        .map(|(k, (&r, &c))| CountRow {
            r,
            count: c,
            normalized: normalize(c, r, alpha, beta),
            doubling_log_ratio: (k > 0 && counts[k - 1] > 0 && c > 0)
                .then(|| (c as f64 / counts[k - 1] as f64).ln() / (r / radii[k - 1]).ln()),
        })
        .collect();
    CountReport { alpha, beta, rows }
}

pub fn run_counts(spec: &CountSpec, budget: u64) -> Result<CountReport> {
    let counts = spec.radii.iter().map(|&r| count(&spec.poly, r, budget)).collect::<Result<Vec<_>>>()?;
    Ok(report_from_counts(&spec.radii, &counts, spec.alpha(), spec.beta()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub doubling_log_ratios: Vec<f64>,
    /// max/min of the last `window` normalized values.
    pub plateau: f64,
    pub window: usize,
}

pub fn fit_asymptotics(report: &CountReport, window: usize) -> Result<FitReport> {
    let rows = &report.rows;
    if rows.len() < 5 || rows[rows.len() - 1].r / rows[0].r < 16.0 {
        return Err(Error::Insufficient("need ≥ 5 radii spanning ≥ 4 doublings".into()));
    }
    if window < 2 || window > rows.len() {
        return Err(Error::Insufficient(format!("plateau window {window} out of range")));
    }
    let tail = &rows[rows.len() - window..];
    let max = tail.iter().map(|r| r.normalized).fold(f64::MIN, f64::max);
    let min = tail.iter().map(|r| r.normalized).fold(f64::MAX, f64::min);
    Ok(FitReport {
        doubling_log_ratios: rows.iter().filter_map(|r| r.doubling_log_ratio).collect(),
        plateau: max / min,
        window,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFactorStep {
    pub r: f64,
    pub observed: f64,
    pub expected: f64,
}

/// For radii R and 4R present in both reports: the growth of count_a/count_b against
/// log(4R)/log R, the factor one extra power of log R contributes.
pub fn log_factor_diagnostic(a: &CountReport, b: &CountReport) -> Vec<LogFactorStep> {
    let find = |rep: &CountReport, r: f64| rep.rows.iter().find(|x| (x.r - r).abs() < 1e-9 * r).map(|x| x.count as f64);
    let mut out = Vec::new();
    for row in &a.rows {
        let r = row.r;
        let (Some(a1), Some(b1), Some(a4), Some(b4)) = (find(a, r), find(b, r), find(a, 4.0 * r), find(b, 4.0 * r)) else {
            continue;
        };
        if a1 == 0.0 || b1 == 0.0 || b4 == 0.0 {
            continue;
        }
        out.push(LogFactorStep {
            r,
            observed: (a4 / b4) / (a1 / b1),
            expected: (4.0 * r).ln() / r.ln(),
        });
    }
    out
}

/// Re-checks every 100th listed matrix: exact characteristic polynomial and norm.
pub fn audit_sample(p: &IntPoly, r: f64, matrices: &[Vec<i64>]) -> bool {
    let r2 = (r * r).floor() as i64;
    matrices
        .iter()
        .step_by(100)
        .all(|m| charpoly(m) == p.0 && m.iter().map(|x| x * x).sum::<i64>() <= r2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive2(p: &IntPoly, r: i64) -> u64 {
        let (t, d) = (-p.0[1], p.0[2]);
        let mut c = 0;
        for a in -r..=r {
            for b in -r..=r {
                for cc in -r..=r {
                    for dd in -r..=r {
                        if a + dd == t && a * dd - b * cc == d && a * a + b * b + cc * cc + dd * dd <= r * r {
                            c += 1;
                        }
                    }
                }
            }
        }
        c
    }

    #[test]
    fn quadratic_examples() {
        let p = IntPoly::parse("1,0,-2").unwrap();
        assert_eq!(enumerate_n2(&p, 5.0).unwrap(), naive2(&p, 5));
        assert_eq!(enumerate_n2(&p, 5.0).unwrap(), 16);
        assert_eq!(enumerate_n2(&IntPoly::parse("1,0,1").unwrap(), 1.0).unwrap(), 0);
        assert_eq!(enumerate_n2(&p, 1.0).unwrap(), 0);
        for s in ["1,-3,2", "1,1,-1", "1,0,-3", "1,-2,-1"] {
            let p = IntPoly::parse(s).unwrap();
            for r in [2, 4, 7, 9] {
                assert_eq!(enumerate_n2(&p, r as f64).unwrap(), naive2(&p, r), "{s} R={r}");
                assert_eq!(list_n2(&p, r as f64).unwrap().len() as u64, naive2(&p, r));
            }
        }
    }

    #[test]
    fn negation_symmetry() {
        for s in ["1,-3,2", "1,1,-1", "1,-2,-7,3"] {
            let p = IntPoly::parse(s).unwrap();
            for r in [3.0, 6.0] {
                assert_eq!(count(&p, r, DEFAULT_BUDGET).unwrap(), count(&p.negated(), r, DEFAULT_BUDGET).unwrap());
            }
        }
    }

    fn naive3(p: &IntPoly, r: i64) -> u64 {
        // nine nested loops bounded only by the remaining norm
        let r2 = r * r;
        let mut m = [0i64; 9];
        fn rec(k: usize, rem: i64, m: &mut [i64; 9], p: &IntPoly, out: &mut u64) {
            if k == 9 {
                if charpoly(m) == p.0 {
                    *out += 1;
                }
                return;
            }
            let top = isqrt(rem);
            for x in -top..=top {
                m[k] = x;
                rec(k + 1, rem - x * x, m, p, out);
            }
        }
        let mut out = 0;
        rec(0, r2, &mut m, p, &mut out);
        out
    }

    #[test]
    fn cubic_examples() {
        let p = IntPoly::parse("1,-6,11,-6").unwrap();
        let list = list_n3(&p, 3.75).unwrap();
        for perm in [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]] {
            let d = [perm[0], 0, 0, 0, perm[1], 0, 0, 0, perm[2]];
            assert!(list.contains(&d));
        }
        assert_eq!(list.len() as u64, enumerate_n3(&p, 3.75, DEFAULT_BUDGET).unwrap());
        assert_eq!(enumerate_n3(&IntPoly::parse("1,0,0,-2").unwrap(), 1.0, DEFAULT_BUDGET).unwrap(), 0);
        for s in ["1,0,0,-2", "1,-6,11,-6", "1,0,-1,0"] {
            let p = IntPoly::parse(s).unwrap();
            assert_eq!(enumerate_n3(&p, 4.0, DEFAULT_BUDGET).unwrap(), naive3(&p, 4), "{s}");
        }
        assert!(matches!(enumerate_n3(&p, 6.0, 10), Err(Error::Budget(_))));
    }

    #[test]
    fn synthetic_fits() {
        let radii: Vec<f64> = (4..=10).map(|k| 2f64.powi(k)).collect();
        let sq: Vec<u64> = radii.iter().map(|r| (r * r) as u64).collect();
        let fit = fit_asymptotics(&report_from_counts(&radii, &sq, 2.0, 0.0), 4).unwrap();
        assert!(fit.doubling_log_ratios.iter().all(|x| (x - 2.0).abs() < 1e-12));
        assert!((fit.plateau - 1.0).abs() < 1e-12);

        let rlog: Vec<u64> = radii.iter().map(|r| (r * r.ln() * 1000.0) as u64).collect();
        let a = report_from_counts(&radii, &rlog, 1.0, 1.0);
        let fit = fit_asymptotics(&a, 4).unwrap();
        assert!(fit.doubling_log_ratios.iter().all(|&x| x > 1.0));
        assert!(fit.doubling_log_ratios.windows(2).all(|w| w[1] < w[0]));
        let lin: Vec<u64> = radii.iter().map(|r| (r * 1000.0) as u64).collect();
        let b = report_from_counts(&radii, &lin, 1.0, 0.0);
        for step in log_factor_diagnostic(&a, &b) {
            assert!((step.observed / step.expected - 1.0).abs() < 1e-3);
        }
        assert!(fit_asymptotics(&report_from_counts(&radii[..3], &sq[..3], 2.0, 0.0), 2).is_err());
    }

    #[test]
    fn split_types_and_audit() {
        assert_eq!(IntPoly::parse("1,0,-2").unwrap().split_type().unwrap(), (0, 1));
        assert_eq!(IntPoly::parse("1,-3,2").unwrap().split_type().unwrap(), (2, 0));
        assert_eq!(IntPoly::parse("1,-1,-2,2").unwrap().split_type().unwrap(), (1, 1));
        assert!(IntPoly::parse("1,-2,1").unwrap().split_type().is_err());
        let p = IntPoly::parse("1,-3,2").unwrap();
        let l: Vec<Vec<i64>> = list_n2(&p, 30.0).unwrap().iter().map(|m| m.to_vec()).collect();
        assert!(audit_sample(&p, 30.0, &l));
    }
}
