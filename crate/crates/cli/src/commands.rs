use std::path::PathBuf;

use clap::{Args, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use nondiv::arith::parse::{parse_factor_list, parse_poly};
use nondiv::arith::rational::{fmt_q, q};
use nondiv::arith::{verify_factorization, NumberField, RatPolynomial};
use nondiv::count::{self, CountSpec, IntPoly};
use nondiv::graph::{self, VertexLayout};
use nondiv::orbit::{self, OrbitRow};
use nondiv::polytope::{self, VolumeMethod};
use nondiv::resscalars::{random_audit, GeometricEmbedding};
use nondiv::torus::{build_torus_with_digits, Interval, TorusSpec};

use crate::schedule::{decades, parse_num, parse_schedule};
use crate::{Failure, Global};

type Res<T> = Result<T, Failure>;

fn invalid<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Validation(e.to_string())
}

fn schedule(flag: &str, src: &str) -> Res<Vec<f64>> {
    parse_schedule(src).map_err(|e| Failure::Validation(format!("--{flag}: {e}")))
}

fn require_seed(g: &Global, what: &str) -> Res<u64> {
    g.seed.ok_or_else(|| Failure::Validation(format!("{what} is stochastic; pass --seed")))
}

fn emit(g: &Global, text: &str) -> Res<()> {
    match &g.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Validation(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(g: &Global, v: &Value) -> Res<()> {
    emit(g, &(serde_json::to_string_pretty(v).expect("serializable") + "\n"))
}

fn emit_csv<T: Serialize>(g: &Global, rows: &[T]) -> Res<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Numerical(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Numerical(e.to_string()))?;
    emit(g, &String::from_utf8(bytes).expect("csv is utf-8"))
}

fn gate(g: &Global, ok: bool, summary: String) -> Res<()> {
    if !g.check {
        return Ok(());
    }
    eprintln!("check: {summary}");
    if ok {
        Ok(())
    } else {
        Err(Failure::Check(summary))
    }
}

/// Rows separated by ';', entries by ','.
fn parse_matrix(src: &str) -> Res<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = src
        .split(';')
        .map(|r| r.split(',').map(parse_num).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Validation(format!("--matrix: {e}")))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Failure::Validation("--matrix must be square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn load_torus(path: &PathBuf) -> Res<TorusSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    Ok(TorusSpec::from_json(&v)?)
}

#[derive(Subcommand, Debug)]
pub enum TorusCmd {
    /// Verify a factorization of p and emit the normal-form TorusSpec as JSON
    Build(TorusBuild),
}

#[derive(Args, Debug)]
pub struct TorusBuild {
    /// Comma-separated factors, split part first, e.g. "(x-1)(x-2),(x^2-2)"
    #[arg(long)]
    pub factors: String,
    /// The polynomial p (defaults to the product of the factors)
    #[arg(long)]
    pub poly: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum PolytopeCmd {
    /// Ω_{B,ε} for one matrix: constraints, Chebyshev ball, volume
    Volume(PolytopeVolume),
    /// Shrink ratio Vol(Ω_{B_i,ε+ω_i}) / Vol(Ω_{B_i,ε}) along a family (CSV)
    Ratio(PolytopeRatio),
}

#[derive(Args, Debug)]
pub struct SequenceArgs {
    /// Named family: sl3-u, sl3-path, sl3-x12, ex1, ex2, ex3
    #[arg(long, conflicts_with = "torus")]
    pub family: Option<String>,
    /// TorusSpec JSON from `torus build`, used with --matrix
    #[arg(long, requires = "matrix")]
    pub torus: Option<PathBuf>,
    /// Matrix in external coordinates: rows separated by ';', entries by ','
    #[arg(long, requires = "torus")]
    pub matrix: Option<String>,
}

#[derive(Args, Debug)]
pub struct PolytopeVolume {
    #[command(flatten)]
    pub seq: SequenceArgs,
    /// Index i of the family member
    #[arg(long)]
    pub index: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// auto, exact or mc
    #[arg(long, default_value = "auto")]
    pub method: String,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = polytope::DEFAULT_MC_SAMPLES)]
    pub samples: usize,
}

#[derive(Args, Debug)]
pub struct PolytopeRatio {
    #[arg(long)]
    pub family: String,
    /// loglog, zero or const:C
    #[arg(long, default_value = "loglog")]
    pub omega: String,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 1e3)]
    pub imin: f64,
    #[arg(long, default_value_t = 1e8)]
    pub imax: f64,
    /// Explicit index schedule (overrides the decades imin..imax)
    #[arg(long)]
    pub indices: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum GraphCmd {
    /// Block pattern, divergence graph, UDS subsets and weights of a family
    Analyze(GraphAnalyze),
}

#[derive(Args, Debug)]
pub struct GraphAnalyze {
    #[arg(long)]
    pub family: String,
    /// Sample indices (default 10,1e3,1e5,1e8,1e10)
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long, default_value_t = graph::ZERO_TOL)]
    pub zero_tol: f64,
    #[arg(long, default_value_t = graph::DIVERGE_FACTOR)]
    pub diverge_factor: f64,
}

#[derive(Subcommand, Debug)]
pub enum EquidistCmd {
    /// Systole survey and Siegel statistic on a piece of a translated orbit (CSV)
    Run(EquidistRun),
}

#[derive(Args, Debug)]
pub struct EquidistRun {
    #[arg(long, default_value = "ex1")]
    pub family: String,
    /// Translator indices
    #[arg(long, default_value = "1e4")]
    pub indices: String,
    /// ε of the polytope the split coordinate is drawn from
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Side length of the chart box around the Chebyshev centre
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Siegel ball radius
    #[arg(long, default_value_t = 2.0)]
    pub radius: f64,
    /// Systole threshold
    #[arg(long, default_value_t = 1e-3)]
    pub systole_eps: f64,
    /// Period for every anisotropic coordinate (default: fundamental unit of real quadratic blocks)
    #[arg(long)]
    pub aniso_period: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum CountCmd {
    /// Exact counts of integer matrices with characteristic polynomial p (CSV)
    Run(CountRun),
}

#[derive(Args, Debug)]
pub struct CountRun {
    /// Integer coefficients, leading first, e.g. "1,-3,2"
    #[arg(long)]
    pub poly: String,
    #[arg(long)]
    pub radii: String,
    /// Cap on loop visits for N = 3
    #[arg(long, default_value_t = count::DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Subcommand, Debug)]
pub enum ExamplesCmd {
    /// Conjugation, bounded-subalgebra and centralizer checks for ex1, ex2 or ex3
    Verify(ExamplesVerify),
}

#[derive(Args, Debug)]
pub struct ExamplesVerify {
    pub name: String,
    #[arg(long, default_value_t = 1e2)]
    pub imin: f64,
    #[arg(long, default_value_t = 1e6)]
    pub imax: f64,
}

#[derive(Subcommand, Debug)]
pub enum ResscalarsCmd {
    /// Random equivariance and covolume-margin audit of the norm map
    Check(ResscalarsCheck),
}

#[derive(Args, Debug)]
pub struct ResscalarsCheck {
    /// Defining polynomial of M, e.g. "x^2-2"
    #[arg(long)]
    pub field: String,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 200)]
    pub cases: usize,
    #[arg(long, default_value_t = 1000)]
    pub margin_cases: usize,
}

pub fn run(cmd: crate::Command, g: &Global) -> Res<()> {
    use crate::Command as C;
    match cmd {
        C::Torus(TorusCmd::Build(a)) => torus_build(a, g),
        C::Polytope(PolytopeCmd::Volume(a)) => polytope_volume(a, g),
        C::Polytope(PolytopeCmd::Ratio(a)) => polytope_ratio(a, g),
        C::Graph(GraphCmd::Analyze(a)) => graph_analyze(a, g),
        C::Equidist(EquidistCmd::Run(a)) => equidist_run(a, g),
        C::Count(CountCmd::Run(a)) => count_run(a, g),
        C::Examples(ExamplesCmd::Verify(a)) => examples_verify(a, g),
        C::Resscalars(ResscalarsCmd::Check(a)) => resscalars_check(a, g),
    }
}

fn torus_build(a: TorusBuild, g: &Global) -> Res<()> {
    let factors = parse_factor_list(&a.factors).map_err(invalid)?;
    let p = match &a.poly {
        Some(s) => parse_poly(s).map_err(invalid)?,
        None => factors.iter().fold(RatPolynomial::one(), |acc, f| &acc * f),
    };
    let report = verify_factorization(&p, &factors).map_err(invalid)?;
    let spec = build_torus_with_digits(&report, g.precision)?;
    emit_json(g, &spec.to_json())
}

fn omega_schedule(src: &str) -> Res<Box<dyn Fn(f64) -> f64 + Sync>> {
    match src {
        "loglog" => Ok(Box::new(polytope::omega_loglog)),
        "zero" => Ok(Box::new(|_| 0.0)),
        s => match s.strip_prefix("const:").map(parse_num) {
            Some(Ok(c)) if c >= 0.0 => Ok(Box::new(move |_| c)),
            _ => Err(Failure::Validation(format!("--omega {s:?}: expected loglog, zero or const:C with C ≥ 0"))),
        },
    }
}

fn check_eps(eps: f64) -> Res<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("--eps must be positive, got {eps}")))
    }
}

fn polytope_volume(a: PolytopeVolume, g: &Global) -> Res<()> {
    check_eps(a.eps)?;
    let (spec, b_ext) = match (&a.seq.family, &a.seq.torus, &a.seq.matrix) {
        (Some(f), None, None) => {
            let i = a.index.ok_or_else(|| Failure::Validation("--family needs --index".into()))?;
            let (spec, seq) = orbit::named_family(f)?;
            (spec, seq(i))
        }
        (None, Some(t), Some(m)) => (load_torus(t)?, parse_matrix(m)?),
        _ => return Err(Failure::Validation("give --family with --index, or --torus with --matrix".into())),
    };
    if b_ext.nrows() != spec.n() {
        return Err(Failure::Validation(format!("matrix is {}×{}, torus has N = {}", b_ext.nrows(), b_ext.ncols(), spec.n())));
    }
    let omega = polytope::build_omega(&spec, &spec.to_canonical(&b_ext), a.eps)?;
    let method = match a.method.as_str() {
        "exact" => VolumeMethod::Exact,
        "mc" => VolumeMethod::MonteCarlo {
            samples: a.samples,
            seed: require_seed(g, "Monte Carlo volume")?,
        },
        "auto" if spec.split_dim() <= 3 => VolumeMethod::Exact,
        "auto" => VolumeMethod::MonteCarlo {
            samples: a.samples,
            seed: require_seed(g, "Monte Carlo volume")?,
        },
        m => return Err(Failure::Validation(format!("--method {m:?}: expected auto, exact or mc"))),
    };
    let stats = omega.stats(method)?;
    let (center, _) = omega.chebyshev()?;
    let constraints: Vec<Value> = omega.constraints().map(|(a, b)| json!({"a": a, "b": b})).collect();
    emit_json(
        g,
        &json!({
            "dim": omega.dim(),
            "eps": a.eps,
            "method": method,
            "constraints": constraints,
            "chebyshev_center": center,
            "stats": stats,
        }),
    )?;
    gate(g, stats.volume.value > 0.0, format!("volume {}", stats.volume.value))
}

fn polytope_ratio(a: PolytopeRatio, g: &Global) -> Res<()> {
    check_eps(a.eps)?;
    let (spec, seq) = orbit::named_family(&a.family)?;
    let indices = match &a.indices {
        Some(s) => schedule("indices", s)?,
        None => decades(a.imin, a.imax).map_err(invalid)?,
    };
    let seed = if spec.split_dim() <= 3 {
        g.seed.unwrap_or(0)
    } else {
        require_seed(g, "Monte Carlo volume")?
    };
    let omega = omega_schedule(&a.omega)?;
    let mats: Vec<(f64, DMatrix<f64>)> = indices.iter().map(|&i| (i, spec.to_canonical(&seq(i)))).collect();
    let rows = polytope::shrink_ratio_series(&spec, &mats, a.eps, &*omega, seed)?;
    emit_csv(g, &rows)?;
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let growing = rows.windows(2).all(|w| w[1].cheb_radius > w[0].cheb_radius);
    gate(
        g,
        last.ratio >= 0.9 && last.ratio > first.ratio && growing,
        format!(
            "ratio {:.4} at i={} (≥ 0.9 required), {:.4} at i={}; inscribed radius strictly increasing: {growing}",
            last.ratio, last.i, first.ratio, first.i
        ),
    )
}

fn graph_analyze(a: GraphAnalyze, g: &Global) -> Res<()> {
    let (spec, seq) = orbit::named_family(&a.family)?;
    let samples = match &a.samples {
        Some(s) => schedule("samples", s)?,
        None => graph::DEFAULT_SAMPLES.to_vec(),
    };
    let layout = VertexLayout::from_spec(&spec);
    let sampler = |i: f64| spec.to_canonical(&seq(i));
    let pattern = graph::classify_blocks(&sampler, &layout, &samples, a.zero_tol, a.diverge_factor)?;
    let dg = graph::build_graph(&pattern)?;
    let uds = graph::enumerate_uds(&dg)?;
    let weights = match graph::uds_weights(&dg) {
        Ok(w) => Some(w.iter().map(fmt_q).collect::<Vec<_>>()),
        Err(nondiv::Error::Infeasible(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let connected = dg.is_connected();
    emit_json(
        g,
        &json!({
            "vertices": layout.names(),
            "blocks": pattern.blocks,
            "graph": dg.to_json(),
            "connected": connected,
            "components": dg.components(),
            "uds": uds,
            "weights": weights,
            "centralizing_direction": dg.centralizing_direction(&spec.multiplicities()),
        }),
    )?;
    gate(g, weights.is_some(), format!("connected: {connected}; UDS weights found: {}", weights.is_some()))
}

fn aniso_box(spec: &TorusSpec, period: Option<f64>) -> Res<Vec<Interval>> {
    let mut out = Vec::new();
    for b in spec.blocks() {
        let f = &b.field;
        let (r, s) = (f.real_count(), f.complex_pairs());
        let dims = if r > 0 { r - 1 + 2 * s } else { 2 * s - 1 };
        let p = match period {
            Some(p) if p > 0.0 => p,
            Some(p) => return Err(Failure::Validation(format!("--aniso-period must be positive, got {p}"))),
            None => quadratic_unit_period(f)?,
        };
        out.extend(std::iter::repeat_n((0.0, p), dims));
    }
    Ok(out)
}

fn quadratic_unit_period(f: &NumberField) -> Res<f64> {
    let c = f.modulus().coeffs();
    let p = (f.degree() == 2 && f.real_count() == 2 && c[1] == q(0) && c[0].is_integer())
        .then(|| -c[0].to_integer())
        .and_then(|p| i64::try_from(p).ok())
        .ok_or_else(|| {
            Failure::Validation(format!(
                "no default anisotropic period for field {}; pass --aniso-period",
                f.modulus()
            ))
        })?;
    Ok(orbit::unit_period(p)?)
}

fn equidist_run(a: EquidistRun, g: &Global) -> Res<()> {
    let seed = require_seed(g, "equidist run")?;
    check_eps(a.eps)?;
    if !(a.width > 0.0) || !(a.radius > 0.0) || !(a.systole_eps > 0.0) || a.samples == 0 {
        return Err(Failure::Validation("--width, --radius, --systole-eps and --samples must be positive".into()));
    }
    let (spec, seq) = orbit::named_family(&a.family)?;
    let aniso = aniso_box(&spec, a.aniso_period)?;
    let mut rows = Vec::new();
    for i in schedule("indices", &a.indices)? {
        let gi = seq(i);
        let region = orbit::omega_piece(&spec, &gi, a.eps, a.width, aniso.clone())?;
        let sample = orbit::sample_orbit(&spec, &gi, &region, a.samples, seed)?;
        let survey = orbit::systole_survey(&sample, a.systole_eps)?;
        let siegel = orbit::siegel_statistic(&sample, a.radius)?;
        rows.push(OrbitRow {
            seed,
            i,
            n: a.samples,
            epsilon: a.systole_eps,
            frac_below: survey.fraction,
            mean_count: siegel.mean,
            stderr: siegel.stderr,
            ball_vol: siegel.ball_volume,
        });
    }
    emit_csv(g, &rows)?;
    let last = rows.last().expect("nonempty schedule");
    let rel = (last.mean_count / last.ball_vol - 1.0).abs();
    gate(
        g,
        last.frac_below <= 0.05 && rel <= 0.10,
        format!(
            "i={}: systole < {} fraction {:.4} (≤ 0.05), Siegel mean {:.4} vs {:.4} ({:.1}% off, ≤ 10%)",
            last.i,
            last.epsilon,
            last.frac_below,
            last.mean_count,
            last.ball_vol,
            100.0 * rel
        ),
    )
}

fn count_run(a: CountRun, g: &Global) -> Res<()> {
    let poly = IntPoly::parse(&a.poly)?;
    let spec = CountSpec::new(poly, schedule("radii", &a.radii)?)?;
    let report = count::run_counts(&spec, a.budget)?;
    emit_csv(g, &report.rows)?;
    if !g.check {
        return Ok(());
    }
    let fit = count::fit_asymptotics(&report, 4)?;
    let tail = &fit.doubling_log_ratios[fit.doubling_log_ratios.len().saturating_sub(3)..];
    let alpha = report.alpha;
    let ok_ratios = tail.iter().all(|r| (r / alpha - 1.0).abs() <= 0.15);
    gate(
        g,
        ok_ratios && fit.plateau <= 1.25,
        format!("last doubling log-ratios {tail:.4?} (α = {alpha}, ±15%), plateau {:.4} (≤ 1.25)", fit.plateau),
    )
}

fn examples_verify(a: ExamplesVerify, g: &Global) -> Res<()> {
    let samples = decades(a.imin, a.imax).map_err(invalid)?;
    let suite = orbit::example_suite_with(&a.name, &samples)?;
    let (spec, seq) = orbit::named_family(&a.name)?;
    let sub = orbit::bounded_subalgebra(&*seq, &spec, &samples, orbit::GROWTH_TOL)?;
    let n = spec.n();
    let (centralizer_dim, center) = if sub.dimension() > 0 {
        let c = orbit::centralizer_algebra(n, &sub.basis)?;
        (Some(c.len()), Some(orbit::center_check(n, &sub.basis)?))
    } else {
        (None, None)
    };
    emit_json(
        g,
        &json!({
            "suite": suite,
            "bounded_subalgebra": sub.to_json(),
            "centralizer_dimension": centralizer_dim,
            "center_check": center,
        }),
    )?;
    let expected = match a.name.as_str() {
        "ex3" => (1, Some(7)),
        _ => (0, None),
    };
    let ok = suite.passed && (sub.dimension(), centralizer_dim) == expected && center != Some(false);
    gate(
        g,
        ok,
        format!(
            "conjugation checks passed: {}; bounded subalgebra dim {} (expected {}); centralizer dim {:?}; center check {:?}",
            suite.passed,
            sub.dimension(),
            expected.0,
            centralizer_dim,
            center
        ),
    )
}

fn resscalars_check(a: ResscalarsCheck, g: &Global) -> Res<()> {
    let seed = require_seed(g, "resscalars check")?;
    let field = NumberField::with_precision(parse_poly(&a.field).map_err(invalid)?, g.precision).map_err(invalid)?;
    let emb = GeometricEmbedding::new(field, a.n)?;
    let report = random_audit(&emb, a.cases, a.margin_cases, seed)?;
    emit_json(g, &serde_json::to_value(&report).expect("serializable"))?;
    gate(
        g,
        report.equivariance_failures == 0 && report.margin_violations == 0,
        format!(
            "{} equivariance failures in {} cases, {} margin violations in {} (worst ratio/bound {:.4})",
            report.equivariance_failures, report.cases, report.margin_violations, report.margin_cases, report.worst_margin
        ),
    )
}
