//! Translated torus orbits: sampling, non-divergence and Siegel statistics, bounded
//! subalgebras of Ad(g_i), exact centralizers, and the three worked examples.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::arith::rational::{approximate, fmt_q, q, to_f64};
use crate::arith::{NumberField, QMatrix, RatPolynomial, Q};
use crate::error::{Error, Result};
use crate::lattice::{ball_volume, count_points, systole, LatticeBasis};
use crate::par;
use crate::polytope::{build_omega, sl3_unipotent, HPolytope};
use crate::torus::{AnisoBlock, Interval, LieParam, TorusSpec};

pub const GROWTH_TOL: f64 = 0.1;
pub const DET_TOL: f64 = 1e-8;
pub const MAX_SIEGEL_RANK: usize = 5;
const MAX_REJECTIONS: usize = 10_000;

/// Region of Lie(T(ℝ)): a box in split chart coordinates (optionally cut by a polytope in
/// the same coordinates) times a box in the remaining free coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LieBox {
    pub chart: Vec<Interval>,
    pub cut: Option<HPolytope>,
    pub aniso: Vec<Interval>,
}

impl LieBox {
    /// The single point 0.
    pub fn origin(spec: &TorusSpec) -> Self {
        LieBox {
            chart: vec![(0.0, 0.0); spec.split_dim()],
            cut: None,
            aniso: vec![(0.0, 0.0); spec.free_dim() - spec.split_dim()],
        }
    }

    fn check(&self, spec: &TorusSpec) -> Result<()> {
        if self.chart.len() != spec.split_dim() || self.aniso.len() != spec.free_dim() - spec.split_dim() {
            return Err(Error::LieParam(format!(
                "box has {}+{} intervals, torus needs {}+{}",
                self.chart.len(),
                self.aniso.len(),
                spec.split_dim(),
                spec.free_dim() - spec.split_dim()
            )));
        }
        let bad = |(lo, hi): &Interval| !(lo <= hi) || !lo.is_finite() || !hi.is_finite();
        if self.chart.iter().chain(&self.aniso).any(bad) {
            return Err(Error::EmptyBox);
        }
        Ok(())
    }

    /// Uniform point of the region (rejection against the cut).
    pub fn sample<R: Rng + ?Sized>(&self, spec: &TorusSpec, rng: &mut R) -> Result<LieParam> {
        self.check(spec)?;
        let draw = |(lo, hi): &Interval, rng: &mut R| if lo == hi { *lo } else { rng.random_range(*lo..*hi) };
        let mut s = vec![0.0; self.chart.len()];
        let mut ok = false;
        for _ in 0..MAX_REJECTIONS {
            for (x, iv) in s.iter_mut().zip(&self.chart) {
                *x = draw(iv, rng);
            }
            if self.cut.as_ref().is_none_or(|p| p.contains_point(&s, 0.0)) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::EmptyBox);
        }
        let t = spec.split_from_chart(&s);
        let mut free: Vec<f64> = t[..spec.split_dim()].to_vec();
        free.extend(self.aniso.iter().map(|iv| draw(iv, rng)));
        spec.param_from_free(&free)
    }
}

/// A unit-width (per chart axis) piece of Ω^s_{g,ε} centred at its Chebyshev centre.
pub fn omega_piece(spec: &TorusSpec, g: &DMatrix<f64>, eps: f64, width: f64, aniso: Vec<Interval>) -> Result<LieBox> {
    let omega = build_omega(spec, &spec.to_canonical(g), eps)?;
    let (c, _) = omega.chebyshev()?;
    Ok(LieBox {
        chart: c.iter().map(|x| (x - width / 2.0, x + width / 2.0)).collect(),
        cut: Some(omega),
        aniso,
    })
}

#[derive(Clone, Debug)]
pub struct OrbitSample {
    pub spec: TorusSpec,
    pub g: DMatrix<f64>,
    pub region: LieBox,
    pub samples: Vec<(LieParam, LatticeBasis)>,
    pub seed: u64,
}

/// n lattices g·exp(t)·ℤ^N with t uniform in the region; g in external coordinates.
pub fn sample_orbit(spec: &TorusSpec, g: &DMatrix<f64>, region: &LieBox, n: usize, seed: u64) -> Result<OrbitSample> {
    if n == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    if g.nrows() != spec.n() || g.ncols() != spec.n() {
        return Err(Error::Dimension(format!("g is {}×{}, torus has N = {}", g.nrows(), g.ncols(), spec.n())));
    }
    region.check(spec)?;
    let samples = par::sample_batched(seed, n, |rng, _| -> Result<(LieParam, LatticeBasis)> {
        let t = region.sample(spec, rng)?;
        let e = spec.to_external(&spec.torus_element(&t)?);
        let basis = LatticeBasis::new(g * e)?;
        if (basis.covolume() - 1.0).abs() > DET_TOL {
            return Err(Error::Determinant(format!("{}", basis.covolume())));
        }
        Ok((t, basis))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(OrbitSample {
        spec: spec.clone(),
        g: g.clone(),
        region: region.clone(),
        samples,
        seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Survey {
    pub n: usize,
    pub fraction: f64,
    pub stderr: f64,
}

/// Fraction of sampled lattices with systole below ε.
pub fn systole_survey(sample: &OrbitSample, eps: f64) -> Result<Survey> {
    let sys = par::map_slice(&sample.samples, |(_, l)| systole(l)).into_iter().collect::<Result<Vec<_>>>()?;
    let n = sys.len();
    let p = sys.iter().filter(|&&s| s < eps).count() as f64 / n as f64;
    Ok(Survey {
        n,
        fraction: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiegelStat {
    pub mean: f64,
    pub stderr: f64,
    pub ball_volume: f64,
}

/// Mean number of nonzero lattice points in the ball of radius r.
pub fn siegel_statistic(sample: &OrbitSample, r: f64) -> Result<SiegelStat> {
    let d = sample.spec.n();
    if d > MAX_SIEGEL_RANK {
        return Err(Error::RankTooLarge(d, MAX_SIEGEL_RANK));
    }
    let counts = par::map_slice(&sample.samples, |(_, l)| count_points(l, r))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = if counts.len() > 1 {
        counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(SiegelStat {
        mean,
        stderr: (var / n).sqrt(),
        ball_volume: ball_volume(d, r),
    })
}

/// One row of the orbit experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub seed: u64,
    pub i: f64,
    pub n: usize,
    pub epsilon: f64,
    pub frac_below: f64,
    pub mean_count: f64,
    pub stderr: f64,
    pub ball_vol: f64,
}

#[derive(Clone, Debug)]
pub struct SubalgebraReport {
    /// Exact basis of the bounded subspace (external coordinates).
    pub basis: Vec<QMatrix>,
    /// Coefficients of each basis element in `TorusSpec::lie_algebra_basis`.
    pub coefficients: Vec<Vec<Q>>,
    /// Growth exponent of each right singular direction, in order of decreasing singular value.
    pub exponents: Vec<f64>,
    /// Growth exponents of the rationalized basis (all should stay below the tolerance).
    pub basis_exponents: Vec<f64>,
}

impl SubalgebraReport {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dimension": self.dimension(),
            "basis": self.basis.iter().map(qmatrix_strings).collect::<Vec<_>>(),
            "coefficients": self.coefficients.iter().map(|c| c.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "exponents": self.exponents,
            "basis_exponents": self.basis_exponents,
        })
    }
}

pub fn qmatrix_strings(m: &QMatrix) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| fmt_q(&m[(i, j)])).collect()).collect()
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.max(f64::MIN_POSITIVE).ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Y ↦ (vec(Ad(g)Y_k))_k as an N²×m matrix.
fn ad_stack(g: &DMatrix<f64>, lie: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let g_inv = g.clone().try_inverse().ok_or(Error::SingularBasis)?;
    let n = g.nrows();
    let mut m = DMatrix::zeros(n * n, lie.len());
    for (k, y) in lie.iter().enumerate() {
        let a = g * y * &g_inv;
        for (r, x) in a.iter().enumerate() {
            m[(r, k)] = *x;
        }
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::IllConditioned(f64::INFINITY));
    }
    Ok(m)
}

/// Reduced row echelon form in floating point (partial pivoting), rows returned.
fn rref_rows(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut a = rows;
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let p = (r..a.len()).max_by(|&x, &y| a[x][c].abs().partial_cmp(&a[y][c].abs()).unwrap()).unwrap();
        if a[p][c].abs() < 1e-9 {
            continue;
        }
        a.swap(r, p);
        let piv = a[r][c];
        for x in a[r].iter_mut() {
            *x /= piv;
        }
        for i in 0..a.len() {
            if i != r {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// Directions Y ∈ Lie(T(ℝ)) with {Ad(g_i)Y} bounded, by log-log regression along the
/// right singular vectors of the stacked Ad images at the last sample; g_i external.
pub fn bounded_subalgebra(
    sampler: &(dyn Fn(f64) -> DMatrix<f64> + Sync),
    spec: &TorusSpec,
    samples: &[f64],
    growth_tol: f64,
) -> Result<SubalgebraReport> {
    if samples.len() < 4
        || samples.windows(2).any(|w| !(w[0] < w[1]))
        || samples[0] <= 0.0
        || samples[samples.len() - 1] / samples[0] < 1e3
    {
        return Err(Error::Precondition(
            "need at least 4 increasing positive sample indices spanning 3 decades".into(),
        ));
    }
    let lie_q: Vec<QMatrix> = spec.lie_algebra_basis().iter().map(|y| spec.to_external_q(y)).collect();
    let lie: Vec<DMatrix<f64>> = lie_q.iter().map(QMatrix::to_f64).collect();
    let m = lie.len();
    let stacks = samples.iter().map(|&i| ad_stack(&sampler(i), &lie)).collect::<Result<Vec<_>>>()?;
    let last = stacks.last().unwrap();
    let svd = last.clone().svd(false, true);
    let v_t = svd.v_t.ok_or(Error::IllConditioned(f64::NAN))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let growth = |c: &nalgebra::DVector<f64>| {
        let norms: Vec<f64> = stacks.iter().map(|s| (s * c).norm()).collect();
        slope(samples, &norms)
    };
    let mut exponents = Vec::with_capacity(m);
    let mut bounded = Vec::new();
    for &j in &order {
        let v = v_t.row(j).transpose();
        let e = growth(&v);
        if !e.is_finite() {
            return Err(Error::IllConditioned(e));
        }
        exponents.push(e);
        if e < growth_tol {
            bounded.push(v.iter().copied().collect::<Vec<f64>>());
        }
    }
    let coefficients: Vec<Vec<Q>> = rref_rows(bounded)
        .into_iter()
        .map(|row| row.iter().map(|&x| approximate(x, 1000)).collect())
        .collect();
    let basis: Vec<QMatrix> = coefficients
        .iter()
        .map(|c| {
            let mut acc = QMatrix::zeros(spec.n(), spec.n());
            for (ck, y) in c.iter().zip(&lie_q) {
                for a in 0..spec.n() {
                    for b in 0..spec.n() {
                        acc[(a, b)] = &acc[(a, b)] + ck * &y[(a, b)];
                    }
                }
            }
            acc
        })
        .collect();
    let basis_exponents = coefficients
        .iter()
        .map(|c| growth(&nalgebra::DVector::from_iterator(m, c.iter().map(to_f64))))
        .collect();
    Ok(SubalgebraReport {
        basis,
        coefficients,
        exponents,
        basis_exponents,
    })
}

/// Exact basis of {X : tr X = 0, XA = AX for every generator A}.
pub fn centralizer_algebra(n: usize, generators: &[QMatrix]) -> Result<Vec<QMatrix>> {
    if let Some(a) = generators.iter().find(|a| a.nrows() != n || a.ncols() != n) {
        return Err(Error::Dimension(format!("generator is {}×{}, expected {n}×{n}", a.nrows(), a.ncols())));
    }
    let idx = |i: usize, j: usize| i * n + j;
    let mut rows: Vec<Vec<Q>> = Vec::new();
    for a in generators {
        for i in 0..n {
            for j in 0..n {
                // (XA − AX)_{ij} = Σ_k X_ik A_kj − A_ik X_kj
                let mut row = vec![q(0); n * n];
                for k in 0..n {
                    row[idx(i, k)] = &row[idx(i, k)] + &a[(k, j)];
                    row[idx(k, j)] = &row[idx(k, j)] - &a[(i, k)];
                }
                rows.push(row);
            }
        }
    }
    rows.push((0..n * n).map(|c| q((c / n == c % n) as i64)).collect());
    let sys = QMatrix::from_rows(rows);
    Ok(sys
        .null_space()
        .into_iter()
        .map(|v| QMatrix::from_fn(n, n, |i, j| v[idx(i, j)].clone()))
        .collect())
}

fn flatten(ms: &[QMatrix]) -> QMatrix {
    QMatrix::from_rows(ms.iter().map(|m| (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].clone()).collect()).collect())
}

fn span_rank(ms: &[QMatrix]) -> usize {
    if ms.is_empty() {
        0
    } else {
        flatten(ms).rank()
    }
}

/// Trace-zero part of the unital associative algebra generated by the inputs.
fn algebra_trace_zero(n: usize, generators: &[QMatrix]) -> Vec<QMatrix> {
    let mut span: Vec<QMatrix> = vec![QMatrix::identity(n)];
    let mut frontier: Vec<QMatrix> = generators.to_vec();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for m in frontier {
            let mut trial = span.clone();
            trial.push(m.clone());
            if span_rank(&trial) > span.len() {
                span.push(m.clone());
                for g in generators {
                    next.push(&m * g);
                }
            }
        }
        frontier = next;
    }
    let shift = |m: &QMatrix| {
        let t = m.trace() / q(n as i64);
        QMatrix::from_fn(n, n, |i, j| if i == j { &m[(i, j)] - &t } else { m[(i, j)].clone() })
    };
    span.iter().map(shift).filter(|m| !m.is_zero()).collect()
}

/// Z(Z_G(S₀)) = S₀ at the Lie algebra level: the commutant of the commutant of the
/// generators equals the trace-zero part of the algebra they generate.
pub fn center_check(n: usize, generators: &[QMatrix]) -> Result<bool> {
    let h = centralizer_algebra(n, generators)?;
    let z = centralizer_algebra(n, &h)?;
    let s = algebra_trace_zero(n, generators);
    let (rz, rs) = (span_rank(&z), span_rank(&s));
    let mut both = z.clone();
    both.extend(s);
    Ok(rz == rs && span_rank(&both) == rz)
}

/// Smallest x > 1 with x² − p y² = 1, from the continued fraction of √p.
pub fn pell_unit(p: i64) -> Option<(i128, i128)> {
    if p <= 1 {
        return None;
    }
    let a0 = (p as f64).sqrt().floor() as i128;
    let a0 = (a0 - 1..=a0 + 1).rev().find(|a| a * a <= p as i128)?;
    if a0 * a0 == p as i128 {
        return None;
    }
    let p = p as i128;
    let (mut m, mut d, mut a) = (0i128, 1i128, a0);
    let (mut h0, mut h1) = (1i128, a0);
    let (mut k0, mut k1) = (0i128, 1i128);
    for _ in 0..10_000 {
        if h1.checked_mul(h1)? - p.checked_mul(k1.checked_mul(k1)?)? == 1 {
            return Some((h1, k1));
        }
        m = d * a - m;
        d = (p - m * m) / d;
        a = (a0 + m) / d;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

/// log of the norm-one fundamental unit of ℤ[√p]: the period of the anisotropic coordinate.
pub fn unit_period(p: i64) -> Result<f64> {
    let (x, y) = pell_unit(p).ok_or_else(|| Error::Precondition(format!("{p} is not a non-square > 1 within range")))?;
    Ok((x as f64 + y as f64 * (p as f64).sqrt()).ln())
}

fn sqrt_block(p: i64) -> Result<AnisoBlock> {
    let f = NumberField::new(RatPolynomial::from_ints(&[-p, 0, 1]))?;
    let basis = vec![f.generator_power(1), f.one()];
    AnisoBlock::new(f, basis)
}

/// Example 1: {diag([[b,c],[pc,b]], a)} ⊂ SL₃.
pub fn example1_torus(p: i64) -> Result<TorusSpec> {
    TorusSpec::new(1, vec![sqrt_block(p)?], Some(vec![2, 0, 1]))
}

/// Example 2: {diag([[b,c],[pc,b]], [[d,e],[qe,d]])} ⊂ SL₄.
pub fn example2_torus(p: i64, q: i64) -> Result<TorusSpec> {
    TorusSpec::new(0, vec![sqrt_block(p)?, sqrt_block(q)?], None)
}

/// Example 3: Example 2 with p = q = 2.
pub fn example3_torus() -> Result<TorusSpec> {
    example2_torus(2, 2)
}

pub fn example1_translator(d: f64, e: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.0, 0.0, d, 0.0, 1.0, e, 0.0, 0.0, 1.0])
}

/// [[I, F], [0, I]] with F = [[f11, f12], [f21, f22]].
pub fn example2_translator(f: [f64; 4]) -> DMatrix<f64> {
    let mut g = DMatrix::identity(4, 4);
    g[(0, 2)] = f[0];
    g[(0, 3)] = f[1];
    g[(1, 2)] = f[2];
    g[(1, 3)] = f[3];
    g
}

pub fn example3_translator(f: f64, h: f64) -> DMatrix<f64> {
    example2_translator([f, h, 2.0 * h, f])
}

fn qmat_from_f64(m: &DMatrix<f64>) -> QMatrix {
    QMatrix::from_fn(m.nrows(), m.ncols(), |i, j| crate::arith::rational::from_f64(m[(i, j)]))
}

fn frob(m: &QMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            s += to_f64(&m[(i, j)]).powi(2);
        }
    }
    s.sqrt()
}

/// Rational torus element with block entries (b, c) and (d, e) or a split scalar.
fn block_element(blocks: &[(i64, (Q, Q))], split: &[Q]) -> QMatrix {
    let n = split.len() + 2 * blocks.len();
    let mut m = QMatrix::zeros(n, n);
    let mut k = 0;
    for (p, (b, c)) in blocks {
        m[(k, k)] = b.clone();
        m[(k, k + 1)] = c.clone();
        m[(k + 1, k)] = c * &q(*p);
        m[(k + 1, k + 1)] = b.clone();
        k += 2;
    }
    for s in split {
        m[(k, k)] = s.clone();
        k += 1;
    }
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub label: String,
    pub element: Vec<Vec<String>>,
    /// ‖g_i s g_i⁻¹ − s‖ at each sample index.
    pub deviations: Vec<f64>,
    pub exponent: f64,
    pub commutes: bool,
    pub expected_commutes: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExampleReport {
    pub name: String,
    pub samples: Vec<f64>,
    pub candidates: Vec<CandidateReport>,
    pub passed: bool,
}

pub const EXAMPLE_SAMPLES: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

fn candidate(
    label: &str,
    s: QMatrix,
    translator: &dyn Fn(f64) -> DMatrix<f64>,
    expected_commutes: bool,
    samples: &[f64],
) -> Result<CandidateReport> {
    if s.det() != q(1) {
        return Err(Error::Determinant(format!("candidate {label} has det {}", fmt_q(&s.det()))));
    }
    let mut deviations = Vec::new();
    let mut commutes = true;
    for &i in samples {
        let g = qmat_from_f64(&translator(i));
        let g_inv = g.inverse().ok_or(Error::SingularBasis)?;
        let d = (&(&g * &s) * &g_inv).sub(&s);
        commutes &= d.is_zero();
        deviations.push(frob(&d));
    }
    let exponent = if commutes { 0.0 } else { slope(samples, &deviations) };
    Ok(CandidateReport {
        label: label.into(),
        element: qmatrix_strings(&s),
        deviations,
        exponent,
        commutes,
        expected_commutes,
    })
}

fn conclude(name: &str, candidates: Vec<CandidateReport>, samples: &[f64]) -> ExampleReport {
    let passed = candidates.iter().all(|c| {
        if c.expected_commutes {
            c.commutes
        } else {
            !c.commutes && (c.exponent - 1.0).abs() < 0.05
        }
    });
    ExampleReport {
        name: name.into(),
        samples: samples.to_vec(),
        candidates,
        passed,
    }
}

/// Conjugation checks for Examples 1–3 along g_i with translator entries equal to i.
pub fn example_suite(name: &str) -> Result<ExampleReport> {
    example_suite_with(name, &EXAMPLE_SAMPLES)
}

pub fn example_suite_with(name: &str, samples: &[f64]) -> Result<ExampleReport> {
    if samples.len() < 2 || samples.windows(2).any(|w| !(w[0] < w[1])) || samples[0] <= 1.0 {
        return Err(Error::Precondition("need at least 2 increasing sample indices above 1".into()));
    }
    let half = || Q::new(1.into(), 2.into());
    let quarter = || Q::new(1.into(), 4.into());
    match name {
        "ex1" => {
            // external order: the block occupies coordinates 0, 1 and a sits at 2
            let tr = |i: f64| example1_translator(i, i);
            let cands = vec![
                candidate("anisotropic (b,c,a)=(3,2,1)", block_element(&[(2, (q(3), q(2)))], &[q(1)]), &tr, false, samples)?,
                candidate("split (b,c,a)=(2,0,1/4)", block_element(&[(2, (q(2), q(0)))], &[quarter()]), &tr, false, samples)?,
                candidate("generic (b,c,a)=(6,4,1/4)", block_element(&[(2, (q(6), q(4)))], &[quarter()]), &tr, false, samples)?,
            ];
            Ok(conclude(name, cands, samples))
        }
        "ex2" => {
            let tr = |i: f64| example2_translator([i, 0.0, 0.0, i]);
            let cands = vec![
                candidate("split diag(2,2,1/2,1/2)", block_element(&[(2, (q(2), q(0))), (3, (half(), q(0)))], &[]), &tr, false, samples)?,
                candidate("first field (3,2 | 1,0)", block_element(&[(2, (q(3), q(2))), (3, (q(1), q(0)))], &[]), &tr, false, samples)?,
                candidate("second field (1,0 | 2,1)", block_element(&[(2, (q(1), q(0))), (3, (q(2), q(1)))], &[]), &tr, false, samples)?,
            ];
            Ok(conclude(name, cands, samples))
        }
        "ex3" => {
            let tr = |i: f64| example3_translator(i, i);
            let cands = vec![
                candidate("S: b=d=3, c=e=2", block_element(&[(2, (q(3), q(2))), (2, (q(3), q(2)))], &[]), &tr, true, samples)?,
                candidate("S: b=d=17, c=e=12", block_element(&[(2, (q(17), q(12))), (2, (q(17), q(12)))], &[]), &tr, true, samples)?,
                candidate("T∖S: (3,2 | 1,0)", block_element(&[(2, (q(3), q(2))), (2, (q(1), q(0)))], &[]), &tr, false, samples)?,
                candidate("T∖S: diag(2,2,1/2,1/2)", block_element(&[(2, (q(2), q(0))), (2, (half(), q(0)))], &[]), &tr, false, samples)?,
            ];
            Ok(conclude(name, cands, samples))
        }
        other => Err(Error::Precondition(format!("unknown example {other:?}; expected ex1, ex2 or ex3"))),
    }
}

/// Lie(S) for Example 3: the √2-direction repeated in both blocks.
pub fn example3_s_generators() -> Vec<QMatrix> {
    vec![block_element(&[(2, (q(3), q(2))), (2, (q(3), q(2)))], &[])]
}

/// Sequences of the worked examples along i, external coordinates.
pub fn example_sequence(name: &str) -> Result<Box<dyn Fn(f64) -> DMatrix<f64> + Sync>> {
    match name {
        "ex1" => Ok(Box::new(|i| example1_translator(i, i))),
        "ex2" => Ok(Box::new(|i| example2_translator([i, 0.0, 0.0, i]))),
        "ex3" => Ok(Box::new(|i| example3_translator(i, i))),
        other => Err(Error::Precondition(format!("unknown example {other:?}; expected ex1, ex2 or ex3"))),
    }
}

/// Named sequences (torus, g_i in external coordinates): the examples plus SL₃ unipotent
/// families `sl3-u` (x₁₂=i, x₁₃=i², x₂₃=i), `sl3-path` (x₁₂=x₂₃=i) and `sl3-x12` (x₁₂=i).
pub fn named_family(name: &str) -> Result<(TorusSpec, Box<dyn Fn(f64) -> DMatrix<f64> + Sync>)> {
    let sl3 = |f: Box<dyn Fn(f64) -> DMatrix<f64> + Sync>| Ok((crate::torus::split_torus(3)?, f));
    match name {
        "sl3-u" => sl3(Box::new(|i| sl3_unipotent(i, i * i, i))),
        "sl3-path" => sl3(Box::new(|i| sl3_unipotent(i, 0.0, i))),
        "sl3-x12" => sl3(Box::new(|i| sl3_unipotent(i, 0.0, 0.0))),
        "ex1" | "ex2" | "ex3" => Ok((example_torus(name)?, example_sequence(name)?)),
        other => Err(Error::Precondition(format!(
            "unknown family {other:?}; expected sl3-u, sl3-path, sl3-x12, ex1, ex2 or ex3"
        ))),
    }
}

pub fn example_torus(name: &str) -> Result<TorusSpec> {
    match name {
        "ex1" => example1_torus(2),
        "ex2" => example2_torus(2, 3),
        "ex3" => example3_torus(),
        other => Err(Error::Precondition(format!("unknown example {other:?}; expected ex1, ex2 or ex3"))),
    }
}
