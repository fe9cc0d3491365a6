//! Checks a user-supplied factorization p = p₀·p₁⋯p_a of a characteristic polynomial.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::poly::RatPolynomial;
use super::rational::Q;
use super::ArithError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Irreducibility {
    Verified,
    UnverifiedIrreducible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisotropicFactor {
    pub poly: RatPolynomial,
    pub irreducibility: Irreducibility,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationReport {
    pub p: RatPolynomial,
    /// Rational roots of p₀ in ascending order; their count is l₀.
    pub split_roots: Vec<String>,
    pub fields: Vec<AnisotropicFactor>,
    pub l0: usize,
    pub a0: usize,
}

impl FactorizationReport {
    pub fn dimension(&self) -> usize {
        self.p.degree().unwrap_or(0)
    }
}

/// Confirms the product, squarefreeness, that split factors split completely and that
/// the remaining factors have no rational root (plus the irreducibility policy).
pub fn verify_factorization(
    p: &RatPolynomial,
    factors: &[RatPolynomial],
) -> Result<FactorizationReport, ArithError> {
    if factors.is_empty() {
        return Err(ArithError::ProductMismatch("no factors".into()));
    }
    let product = factors.iter().fold(RatPolynomial::one(), |acc, f| &acc * f);
    if product != *p {
        return Err(ArithError::ProductMismatch(format!(
            "product of factors is {product}, expected {p}"
        )));
    }
    if p.gcd(&p.derivative()).degree() != Some(0) {
        return Err(ArithError::RepeatedRoot(p.to_string()));
    }
    let mut split_roots: Vec<Q> = Vec::new();
    let mut fields = Vec::new();
    for f in factors {
        let deg = f.degree().unwrap_or(0);
        if deg == 0 {
            continue;
        }
        let roots = f.rational_roots();
        if roots.len() == deg {
            split_roots.extend(roots);
        } else if roots.is_empty() {
            fields.push(AnisotropicFactor {
                poly: f.monic(),
                irreducibility: irreducibility(f),
            });
        } else {
            return Err(ArithError::PartialSplit(f.to_string()));
        }
    }
    split_roots.sort();
    Ok(FactorizationReport {
        p: p.clone(),
        l0: split_roots.len(),
        split_roots: split_roots.iter().map(super::rational::fmt_q).collect(),
        a0: fields.len(),
        fields,
    })
}

/// Rational-root exclusion settles degree ≤ 3; higher degrees use factorization
/// patterns modulo small primes and fall back to `UnverifiedIrreducible`.
pub fn irreducibility(f: &RatPolynomial) -> Irreducibility {
    let deg = f.degree().unwrap_or(0);
    if deg <= 1 {
        return Irreducibility::Verified;
    }
    if !f.rational_roots().is_empty() {
        return Irreducibility::UnverifiedIrreducible;
    }
    if deg <= 3 {
        return Irreducibility::Verified;
    }
    let ints = f.primitive_integer();
    let lead = ints.last().unwrap().clone();
    // allowed degrees of a rational factor, intersected over primes
    let mut allowed: BTreeSet<usize> = (0..=deg).collect();
    for &prime in SMALL_PRIMES {
        let pb = BigInt::from(prime);
        if (&lead % &pb).is_zero() {
            continue;
        }
        let coeffs: Vec<u64> = ints
            .iter()
            .map(|c| c.mod_floor(&pb).to_u64().unwrap())
            .collect();
        let fp = PolyFp::new(coeffs, prime);
        if !fp.is_squarefree() {
            continue;
        }
        let degrees = fp.factor_degrees();
        let mut sums = BTreeSet::from([0usize]);
        for d in degrees {
            let next: Vec<usize> = sums.iter().map(|s| s + d).collect();
            sums.extend(next);
        }
        allowed = allowed.intersection(&sums).copied().collect();
        if allowed.len() == 2 {
            return Irreducibility::Verified;
        }
    }
    Irreducibility::UnverifiedIrreducible
}

const SMALL_PRIMES: &[u64] = &[
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Dense polynomial over 𝔽_p, lowest degree first.
#[derive(Clone, Debug, PartialEq)]
struct PolyFp {
    c: Vec<u64>,
    p: u64,
}

impl PolyFp {
    fn new(mut c: Vec<u64>, p: u64) -> Self {
        while c.last() == Some(&0) {
            c.pop();
        }
        PolyFp { c, p }
    }

    fn deg(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.p - 2, self.p)
    }

    fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let c = (0..n)
            .map(|k| {
                let a = self.c.get(k).copied().unwrap_or(0);
                let b = o.c.get(k).copied().unwrap_or(0);
                (a + self.p - b) % self.p
            })
            .collect();
        Self::new(c, self.p)
    }

    fn mul(&self, o: &Self) -> Self {
        if self.c.is_empty() || o.c.is_empty() {
            return Self::new(vec![], self.p);
        }
        let mut c = vec![0u64; self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = (c[i + j] + a * b) % self.p;
            }
        }
        Self::new(c, self.p)
    }

    fn rem(&self, d: &Self) -> Self {
        let dd = d.deg().expect("nonzero divisor");
        let inv = self.inv(d.c[dd]);
        let mut r = self.c.clone();
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1;
            let f = r[k] * inv % self.p;
            if f != 0 {
                for (j, dc) in d.c.iter().enumerate() {
                    let idx = k - dd + j;
                    r[idx] = (r[idx] + self.p - f * dc % self.p) % self.p;
                }
            }
            r.pop();
            while r.last() == Some(&0) {
                r.pop();
            }
        }
        Self::new(r, self.p)
    }

    fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.c.is_empty() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }

    fn derivative(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| (k as u64 % self.p) * v % self.p)
            .collect();
        Self::new(c, self.p)
    }

    fn is_squarefree(&self) -> bool {
        let d = self.derivative();
        !d.c.is_empty() && self.gcd(&d).deg() == Some(0)
    }

    fn pow_mod_poly(&self, base: &Self, mut e: u64) -> Self {
        let mut result = Self::new(vec![1], self.p);
        let mut b = base.rem(self);
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&b).rem(self);
            }
            b = b.mul(&b).rem(self);
            e >>= 1;
        }
        result
    }

    /// Degrees of the irreducible factors (distinct-degree factorization).
    fn factor_degrees(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut f = self.clone();
        let x = Self::new(vec![0, 1], self.p);
        let mut h = x.clone();
        let mut i = 0usize;
        while f.deg().unwrap_or(0) >= 2 * (i + 1) {
            i += 1;
            h = f.pow_mod_poly(&h, self.p);
            let g = f.gcd(&h.sub(&x));
            let gd = g.deg().unwrap_or(0);
            if gd > 0 {
                out.extend(std::iter::repeat_n(i, gd / i));
                f = div_exact(&f, &g);
                h = h.rem(&f);
            }
        }
        if let Some(d) = f.deg() {
            if d > 0 {
                out.push(d);
            }
        }
        out
    }
}

fn div_exact(a: &PolyFp, d: &PolyFp) -> PolyFp {
    let p = a.p;
    let dd = d.deg().unwrap();
    let inv = a.inv(d.c[dd]);
    let mut r = a.c.clone();
    let mut q = vec![0u64; r.len().saturating_sub(dd)];
    for k in (0..q.len()).rev() {
        let f = r[k + dd] * inv % p;
        q[k] = f;
        for (j, dc) in d.c.iter().enumerate() {
            r[k + j] = (r[k + j] + p - f * dc % p) % p;
        }
    }
    PolyFp::new(q, p)
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}
