//! Complex roots of rational polynomials to a requested number of decimal digits.
//!
//! Roots are seeded in double precision (Aberth–Ehrlich iteration) and then
//! polished by Newton steps carried out in exact rational arithmetic, rounding
//! to a dyadic grid after every step. Residuals are evaluated exactly.

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::RatPolynomial;
use super::rational::{fmt_q, from_f64, round_dyadic, to_f64, Q};
use super::ArithError;

/// A complex number with exact rational parts, used as a high-precision root approximation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HpComplex {
    #[serde(with = "q_string")]
    pub re: Q,
    #[serde(with = "q_string")]
    pub im: Q,
}

pub(crate) mod q_string {
    use super::{fmt_q, Q};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        crate::arith::rational::parse_q(&s).map_err(serde::de::Error::custom)
    }
}

impl HpComplex {
    pub fn real(re: Q) -> Self {
        HpComplex { re, im: Q::zero() }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        HpComplex {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        HpComplex {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        HpComplex {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        HpComplex {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        HpComplex {
            re: &self.re * s,
            im: &self.im * s,
        }
    }

    pub fn abs2(&self) -> Q {
        &self.re * &self.re + &self.im * &self.im
    }

    fn div(&self, o: &Self) -> Self {
        let d = o.abs2();
        HpComplex {
            re: (&self.re * &o.re + &self.im * &o.im) / &d,
            im: (&self.im * &o.re - &self.re * &o.im) / &d,
        }
    }

    fn round(&self, bits: u32) -> Self {
        HpComplex {
            re: round_dyadic(&self.re, bits),
            im: round_dyadic(&self.im, bits),
        }
    }
}

/// Horner evaluation in exact arithmetic.
pub fn eval_hp(p: &RatPolynomial, z: &HpComplex) -> HpComplex {
    p.coeffs()
        .iter()
        .rev()
        .fold(HpComplex::real(Q::zero()), |acc, c| {
            let m = acc.mul(z);
            HpComplex {
                re: m.re + c,
                im: m.im,
            }
        })
}

/// Number of distinct real roots via a Sturm sequence.
pub fn count_real_roots(p: &RatPolynomial) -> usize {
    if p.degree().unwrap_or(0) == 0 {
        return 0;
    }
    let p = p.monic();
    let sq = {
        let g = p.gcd(&p.derivative());
        p.div_rem(&g).unwrap().0
    };
    let mut seq = vec![sq.clone(), sq.derivative()];
    loop {
        let n = seq.len();
        if seq[n - 1].is_zero() {
            seq.pop();
            break;
        }
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]).unwrap();
        if r.is_zero() {
            break;
        }
        seq.push(-&r);
    }
    let sign_changes = |signs: Vec<i32>| {
        let nz: Vec<i32> = signs.into_iter().filter(|&s| s != 0).collect();
        nz.windows(2).filter(|w| w[0] != w[1]).count()
    };
    let at_pos_inf: Vec<i32> = seq
        .iter()
        .map(|f| if f.leading().is_positive() { 1 } else { -1 })
        .collect();
    let at_neg_inf: Vec<i32> = seq
        .iter()
        .map(|f| {
            let d = f.degree().unwrap_or(0);
            let s = if f.leading().is_positive() { 1 } else { -1 };
            if d % 2 == 0 {
                s
            } else {
                -s
            }
        })
        .collect();
    sign_changes(at_neg_inf) - sign_changes(at_pos_inf)
}

fn aberth(p: &RatPolynomial) -> Vec<Complex64> {
    let n = p.degree().unwrap_or(0);
    let monic = p.monic();
    let c: Vec<f64> = monic.coeffs().iter().map(to_f64).collect();
    let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let dp = monic.derivative();
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(0.5 * bound, ang)
        })
        .collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for k in 0..n {
            let f = monic.eval_c64(z[k]);
            let df = dp.eval_c64(z[k]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / df;
            let s: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| Complex64::new(1.0, 0.0) / (z[k] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[k] -= w;
                moved = moved.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// All roots of a squarefree polynomial: real roots ascending, then each complex pair as
/// (representative with positive imaginary part, its conjugate).
pub fn roots(p: &RatPolynomial, digits: u32) -> Result<Vec<HpComplex>, ArithError> {
    let n = p.degree().ok_or(ArithError::DivisionByZero)?;
    if n == 0 {
        return Ok(vec![]);
    }
    let monic = p.monic();
    let r = count_real_roots(&monic);
    let mut approx = aberth(&monic);
    approx.sort_by(|a, b| a.im.abs().partial_cmp(&b.im.abs()).unwrap());
    let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 24;
    let dp = monic.derivative();
    let target = Q::new(1.into(), num_bigint::BigInt::from(10).pow(2 * digits.saturating_sub(2)));

    let polish = |start: HpComplex, real: bool| -> Result<HpComplex, ArithError> {
        let mut z = start;
        for _ in 0..200 {
            let f = eval_hp(&monic, &z);
            if f.abs2() < target {
                return Ok(z);
            }
            let df = eval_hp(&dp, &z);
            if df.abs2().is_zero() {
                break;
            }
            let mut step = f.div(&df);
            if real {
                step.im = Q::zero();
            }
            z = z.sub(&step).round(bits);
        }
        let res = to_f64(&eval_hp(&monic, &z).abs2()).sqrt();
        Err(ArithError::RootRefinement { residual: res })
    };

    let mut reals = Vec::with_capacity(r);
    for z in &approx[..r] {
        reals.push(polish(HpComplex::real(from_f64(z.re)), true)?);
    }
    reals.sort_by(|a, b| a.re.cmp(&b.re));
    let mut out = reals;
    let mut upper: Vec<Complex64> = approx[r..].iter().filter(|z| z.im > 0.0).copied().collect();
    if upper.len() * 2 != n - r {
        // seeds did not pair cleanly; fall back to taking every other by sign of imag
        upper = approx[r..].iter().map(|z| Complex64::new(z.re, z.im.abs())).collect();
        upper.dedup_by(|a, b| (*a - *b).norm() < 1e-6);
        upper.truncate((n - r) / 2);
    }
    upper.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    for z in upper {
        let hz = polish(
            HpComplex {
                re: from_f64(z.re),
                im: from_f64(z.im),
            },
            false,
        )?;
        let hz = if hz.im.is_negative() { hz.conj() } else { hz };
        out.push(hz.clone());
        out.push(hz.conj());
    }
    if out.len() != n {
        return Err(ArithError::RootRefinement { residual: f64::NAN });
    }
    Ok(out)
}
