use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};

use super::matrix::QMatrix;
use super::poly::RatPolynomial;
use super::rational::{q, Q};
use super::roots::{eval_hp, roots, HpComplex};
use super::ArithError;

pub const DEFAULT_DIGITS: u32 = 30;

/// ℚ[x]/(q) for a monic squarefree q, with its complex embeddings.
#[derive(Debug)]
pub struct NumberField {
    modulus: RatPolynomial,
    real_count: usize,
    complex_pairs: usize,
    digits: u32,
    roots: Vec<HpComplex>,
    roots_f64: Vec<Complex64>,
}

impl PartialEq for NumberField {
    fn eq(&self, other: &Self) -> bool {
        self.modulus == other.modulus
    }
}

impl NumberField {
    pub fn new(modulus: RatPolynomial) -> Result<Arc<Self>, ArithError> {
        Self::with_precision(modulus, DEFAULT_DIGITS)
    }

    pub fn with_precision(modulus: RatPolynomial, digits: u32) -> Result<Arc<Self>, ArithError> {
        if modulus.degree().unwrap_or(0) == 0 {
            return Err(ArithError::NotAField("constant modulus".into()));
        }
        if !modulus.is_monic() {
            return Err(ArithError::NotAField(format!("{modulus} is not monic")));
        }
        if modulus.gcd(&modulus.derivative()).degree() != Some(0) {
            return Err(ArithError::RepeatedRoot(modulus.to_string()));
        }
        if digits < 15 {
            return Err(ArithError::Precision(digits));
        }
        let rs = roots(&modulus, digits)?;
        let real_count = rs.iter().filter(|z| z.is_real()).count();
        let complex_pairs = (rs.len() - real_count) / 2;
        let roots_f64 = rs.iter().map(HpComplex::to_c64).collect();
        Ok(Arc::new(NumberField {
            modulus,
            real_count,
            complex_pairs,
            digits,
            roots: rs,
            roots_f64,
        }))
    }

    /// ℚ itself, as ℚ[x]/(x).
    pub fn rationals() -> Arc<Self> {
        Self::new(RatPolynomial::x()).expect("x is a valid modulus")
    }

    pub fn modulus(&self) -> &RatPolynomial {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    pub fn real_count(&self) -> usize {
        self.real_count
    }

    pub fn complex_pairs(&self) -> usize {
        self.complex_pairs
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Roots ordered: real ascending, then (z, z̄) pairs with Im z > 0.
    pub fn roots(&self) -> &[HpComplex] {
        &self.roots
    }

    pub fn roots_f64(&self) -> &[Complex64] {
        &self.roots_f64
    }

    pub fn element(self: &Arc<Self>, coords: Vec<Q>) -> Result<FieldElement, ArithError> {
        FieldElement::new(self.clone(), coords)
    }

    pub fn from_ints(self: &Arc<Self>, coords: &[i64]) -> FieldElement {
        let mut c: Vec<Q> = coords.iter().map(|&x| q(x)).collect();
        c.resize(self.degree(), Q::zero());
        FieldElement {
            owner: self.clone(),
            coords: c,
        }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_ints(&[1])
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        self.from_ints(&[])
    }

    /// θ^k as a field element.
    pub fn generator_power(self: &Arc<Self>, k: usize) -> FieldElement {
        let mut c = vec![Q::zero(); self.degree()];
        if k < self.degree() {
            c[k] = Q::one();
            return FieldElement {
                owner: self.clone(),
                coords: c,
            };
        }
        let theta = if self.degree() == 1 {
            self.element(vec![-self.modulus.coeff(0)]).unwrap()
        } else {
            self.from_ints(&[0, 1])
        };
        (0..k).fold(self.one(), |acc, _| acc.mul(&theta).unwrap())
    }

    pub fn power_basis(self: &Arc<Self>) -> Vec<FieldElement> {
        (0..self.degree()).map(|k| self.generator_power(k)).collect()
    }

    /// Embedding matrix (σ_k(b_j))_{k,j} for a basis, rows ordered like `roots`.
    pub fn embedding_matrix(&self, basis: &[FieldElement]) -> Vec<Vec<Complex64>> {
        (0..self.degree())
            .map(|k| basis.iter().map(|b| b.embed(k)).collect())
            .collect()
    }
}

/// Element of a number field in power-basis coordinates.
#[derive(Clone, Debug)]
pub struct FieldElement {
    owner: Arc<NumberField>,
    coords: Vec<Q>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.owner == other.owner && self.coords == other.coords
    }
}

impl FieldElement {
    pub fn new(owner: Arc<NumberField>, coords: Vec<Q>) -> Result<Self, ArithError> {
        if coords.len() != owner.degree() {
            return Err(ArithError::CoordinateLength {
                expected: owner.degree(),
                got: coords.len(),
            });
        }
        Ok(FieldElement { owner, coords })
    }

    pub fn owner(&self) -> &Arc<NumberField> {
        &self.owner
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_integral_coords(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    fn check_owner(&self, other: &Self) -> Result<(), ArithError> {
        if Arc::ptr_eq(&self.owner, &other.owner) || self.owner == other.owner {
            Ok(())
        } else {
            Err(ArithError::FieldMismatch)
        }
    }

    pub fn as_polynomial(&self) -> RatPolynomial {
        RatPolynomial::new(self.coords.clone())
    }

    fn from_polynomial(owner: &Arc<NumberField>, p: &RatPolynomial) -> Self {
        let (_, r) = p.div_rem(owner.modulus()).expect("modulus is nonzero");
        let mut coords = r.coeffs().to_vec();
        coords.resize(owner.degree(), Q::zero());
        FieldElement {
            owner: owner.clone(),
            coords,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ArithError> {
        self.check_owner(other)?;
        Ok(FieldElement {
            owner: self.owner.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ArithError> {
        self.check_owner(other)?;
        Ok(FieldElement {
            owner: self.owner.clone(),
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> Self {
        FieldElement {
            owner: self.owner.clone(),
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, s: &Q) -> Self {
        FieldElement {
            owner: self.owner.clone(),
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// Product reduced modulo the defining polynomial.
    pub fn mul(&self, other: &Self) -> Result<Self, ArithError> {
        self.check_owner(other)?;
        let prod = &self.as_polynomial() * &other.as_polynomial();
        Ok(Self::from_polynomial(&self.owner, &prod))
    }

    /// Multiplication-by-self matrix in the power basis (column k = coords of self·θ^k).
    pub fn power_regular_rep(&self) -> QMatrix {
        let n = self.owner.degree();
        let mut m = QMatrix::zeros(n, n);
        let mut cur = self.clone();
        let theta = self.owner.generator_power(1);
        for k in 0..n {
            for i in 0..n {
                m[(i, k)] = cur.coords[i].clone();
            }
            if k + 1 < n {
                cur = cur.mul(&theta).unwrap();
            }
        }
        m
    }

    /// Matrix R with R·coords_basis(b) = coords_basis(self·b).
    pub fn regular_rep(&self, basis: &[FieldElement]) -> Result<QMatrix, ArithError> {
        let change = change_of_basis(&self.owner, basis)?;
        let inv = change.inverse().ok_or(ArithError::DegenerateBasis)?;
        Ok(&(&inv * &self.power_regular_rep()) * &change)
    }

    pub fn norm(&self) -> Q {
        self.power_regular_rep().det()
    }

    pub fn trace(&self) -> Q {
        self.power_regular_rep().trace()
    }

    pub fn inverse(&self) -> Result<Self, ArithError> {
        let r = self.power_regular_rep();
        let inv = r.inverse().ok_or(ArithError::DivisionByZero)?;
        let mut e1 = vec![Q::zero(); self.owner.degree()];
        e1[0] = Q::one();
        Ok(FieldElement {
            owner: self.owner.clone(),
            coords: inv.mul_vec(&e1),
        })
    }

    /// σ_k(self) in double precision.
    pub fn embed(&self, k: usize) -> Complex64 {
        let z = self.owner.roots_f64[k];
        self.coords
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + super::rational::to_f64(c))
    }

    /// σ_k(self) at the field's stored precision.
    pub fn embed_hp(&self, k: usize) -> HpComplex {
        eval_hp(&self.as_polynomial(), &self.owner.roots[k])
    }

    pub fn embeddings(&self) -> Vec<Complex64> {
        (0..self.owner.degree()).map(|k| self.embed(k)).collect()
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.as_polynomial();
        write!(f, "{}", p.to_string().replace('x', "θ"))
    }
}

/// Columns are power-basis coordinates of the basis elements.
pub fn change_of_basis(field: &Arc<NumberField>, basis: &[FieldElement]) -> Result<QMatrix, ArithError> {
    let n = field.degree();
    if basis.len() != n {
        return Err(ArithError::DegenerateBasis);
    }
    for b in basis {
        if b.owner != *field {
            return Err(ArithError::FieldMismatch);
        }
    }
    let m = QMatrix::from_fn(n, n, |i, j| basis[j].coords[i].clone());
    if m.det().is_zero() {
        return Err(ArithError::DegenerateBasis);
    }
    Ok(m)
}

/// Complex roots of `modulus` at a chosen precision, in the canonical order.
pub fn embeddings(field: &NumberField, digits: u32) -> Result<Vec<HpComplex>, ArithError> {
    if digits < 15 {
        return Err(ArithError::Precision(digits));
    }
    if digits == field.digits {
        return Ok(field.roots.clone());
    }
    roots(&field.modulus, digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational::qf;

    fn sqrt2() -> Arc<NumberField> {
        NumberField::new(RatPolynomial::from_ints(&[-2, 0, 1])).unwrap()
    }

    fn cbrt2() -> Arc<NumberField> {
        NumberField::new(RatPolynomial::from_ints(&[-2, 0, 0, 1])).unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let k = sqrt2();
        let r = k.from_ints(&[0, 1]);
        assert_eq!(r.mul(&r).unwrap(), k.from_ints(&[2, 0]));
        let a = k.from_ints(&[1, 1]);
        let b = k.from_ints(&[1, -1]);
        assert_eq!(a.mul(&b).unwrap(), k.from_ints(&[-1, 0]));
        let c = cbrt2();
        let t = c.from_ints(&[0, 1, 0]);
        let t2 = c.from_ints(&[0, 0, 1]);
        assert_eq!(t.mul(&t2).unwrap(), c.from_ints(&[2, 0, 0]));
    }

    #[test]
    fn mismatched_owner_rejected() {
        let a = sqrt2().one();
        let b = cbrt2().one();
        assert_eq!(a.mul(&b), Err(ArithError::FieldMismatch));
    }

    #[test]
    fn norms() {
        assert_eq!(sqrt2().one().norm(), q(1));
        assert_eq!(sqrt2().from_ints(&[1, 1]).norm(), q(-1));
        assert_eq!(cbrt2().from_ints(&[0, 1]).norm(), q(2));
    }

    #[test]
    fn regular_representation_examples() {
        let k = sqrt2();
        let basis = k.power_basis();
        assert_eq!(k.one().regular_rep(&basis).unwrap(), QMatrix::identity(2));
        let r = k.from_ints(&[0, 1]).regular_rep(&basis).unwrap();
        assert_eq!(r, QMatrix::from_i64(&[&[0, 2], &[1, 0]]));
        let s = k.from_ints(&[1, 1]).regular_rep(&basis).unwrap();
        assert_eq!(s, QMatrix::from_i64(&[&[1, 2], &[1, 1]]));
        assert_eq!(s.det(), q(-1));
        // basis {√2, 1} gives the transposed layout
        let swapped = vec![k.from_ints(&[0, 1]), k.one()];
        let t = k.from_ints(&[3, 5]).regular_rep(&swapped).unwrap();
        assert_eq!(t, QMatrix::from_i64(&[&[3, 5], &[10, 3]]));
        assert_eq!(
            k.one().regular_rep(&[k.one(), k.one()]),
            Err(ArithError::DegenerateBasis)
        );
    }

    #[test]
    fn embeddings_examples() {
        let k = sqrt2();
        let r = k.roots_f64();
        assert!((r[0].re + std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((r[1].re - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert_eq!((k.real_count(), k.complex_pairs()), (2, 0));
        let i = NumberField::new(RatPolynomial::from_ints(&[1, 0, 1])).unwrap();
        assert_eq!((i.real_count(), i.complex_pairs()), (0, 1));
        let c = cbrt2();
        assert_eq!((c.real_count(), c.complex_pairs()), (1, 1));
        let cr = 2f64.cbrt();
        let w = c.roots_f64();
        assert!((w[0].re - cr).abs() < 1e-15);
        assert!((w[1].re + 0.629_960_524_947_436_6).abs() < 1e-12);
        assert!((w[1].im - 1.091_123_635_971_721).abs() < 1e-12);
        assert!((w[2] - w[1].conj()).norm() < 1e-15);
        assert!(embeddings(&c, 14).is_err());
    }

    #[test]
    fn inverse_and_rational_field() {
        let k = sqrt2();
        let a = k.from_ints(&[3, 2]);
        assert_eq!(a.mul(&a.inverse().unwrap()).unwrap(), k.one());
        let qq = NumberField::rationals();
        assert_eq!(qq.degree(), 1);
        assert_eq!(qq.from_ints(&[5]).norm(), q(5));
        let half = k.element(vec![qf(1, 2), q(0)]).unwrap();
        assert!(!half.is_integral_coords());
    }
}
