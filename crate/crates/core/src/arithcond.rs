//! Conditions on the parameter `v`: squarefree parts, rational squares,
//! quadratic and quartic fields against cyclotomic fields, nested radicals,
//! and a small condition language.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_perfect_square, squarefree_kernel};
use crate::ratfunc::{parse_rational, q, qq, Proj, QPoly, RationalMap};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CondError {
    #[error("zero input")]
    ZeroInput,
    #[error("degenerate quartic")]
    DegenerateQuartic,
    #[error("unsupported radical shape")]
    UnsupportedShape,
    #[error("degenerate radicand")]
    DegenerateRadicand,
    #[error("numeric check failed: residual {0}")]
    NumericCheck(String),
}

/// The squarefree integer `d` with `x = d * square`.
pub fn squarefree_part(x: &BigRational) -> Result<BigInt, CondError> {
    if x.is_zero() {
        return Err(CondError::ZeroInput);
    }
    Ok(squarefree_kernel(&(x.numer() * x.denom())))
}

pub fn is_rational_square(x: &BigRational) -> bool {
    !x.is_negative() && is_perfect_square(x.numer()) && is_perfect_square(x.denom())
}

/// Discriminant of `Q(√d)` for squarefree `d != 1`.
pub fn field_discriminant(d: &BigInt) -> BigInt {
    if ((d % 4) + 4) % 4 == BigInt::one() {
        d.clone()
    } else {
        d * 4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycMode {
    /// `K_{M^∞}`
    Tower,
    /// `K_M`
    Fixed,
}

/// Whether `Q(√d) ⊆ K`.
pub fn quad_in_cyclotomic(d: &BigRational, m: u64, mode: CycMode) -> Result<bool, CondError> {
    let d0 = squarefree_part(d)?;
    if d0.is_one() {
        return Ok(true);
    }
    let disc = field_discriminant(&d0).abs();
    Ok(match mode {
        CycMode::Fixed => (BigInt::from(m) % &disc).is_zero(),
        CycMode::Tower => {
            let mut rest = disc;
            for p in crate::arith::prime_divisors(m) {
                let p = BigInt::from(p);
                while (&rest % &p).is_zero() {
                    rest /= &p;
                }
            }
            rest.is_one()
        }
    })
}

/// `Q(√d) ∩ K = Q`.
pub fn quad_cyc_trivial(d: &BigRational, m: u64, mode: CycMode) -> Result<bool, CondError> {
    let d0 = squarefree_part(d)?;
    if d0.is_one() {
        return Ok(true);
    }
    Ok(!quad_in_cyclotomic(d, m, mode)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GaloisType {
    V4,
    C4,
    D4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuarticClass {
    NotDegree4,
    Degree4TrivialIntersection(GaloisType),
    Degree4NontrivialIntersection(GaloisType),
}

/// Irreducibility of `x^4 + p x^2 + q` over `Q`.
pub fn biquadratic_irreducible(p: &BigRational, qc: &BigRational) -> bool {
    let delta = p * p - qc * q(4);
    if is_rational_square(&delta) {
        return false;
    }
    if let Some(c) = rational_sqrt(qc) {
        // (x^2 + a x + b)(x^2 - a x + b) with b = ±c, a^2 = 2b - p
        for b in [c.clone(), -c] {
            if is_rational_square(&(&b * q(2) - p)) {
                return false;
            }
        }
    }
    true
}

pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if !is_rational_square(x) {
        return None;
    }
    Some(BigRational::new(x.numer().sqrt(), x.denom().sqrt()))
}

/// Degree and intersection with `K_{M^∞}` of the field of a root of
/// `x^4 + p x^2 + q`.
pub fn quartic_condition(p: &BigRational, qc: &BigRational, m: u64) -> Result<QuarticClass, CondError> {
    let delta = p * p - qc * q(4);
    if qc.is_zero() || delta.is_zero() {
        return Err(CondError::DegenerateQuartic);
    }
    if !biquadratic_irreducible(p, qc) {
        return Ok(QuarticClass::NotDegree4);
    }
    let tower = |d: &BigRational| quad_in_cyclotomic(d, m, CycMode::Tower);
    let (ty, meets) = if let Some(c) = rational_sqrt(qc) {
        let subfields = [delta.clone(), &c * q(2) - p, -(&c * q(2)) - p];
        let mut meets = false;
        for d in &subfields {
            meets |= tower(d)?;
        }
        (GaloisType::V4, meets)
    } else if is_rational_square(&(qc * &delta)) {
        (GaloisType::C4, tower(&delta)?)
    } else {
        (GaloisType::D4, tower(&delta)?)
    };
    Ok(if meets {
        QuarticClass::Degree4NontrivialIntersection(ty)
    } else {
        QuarticClass::Degree4TrivialIntersection(ty)
    })
}

/// Irreducibility over `Q` for degree at most 4.
pub fn is_irreducible(f: &QPoly) -> bool {
    let Some(n) = f.degree() else { return false };
    if n == 0 {
        return false;
    }
    if n >= 2 && !f.rational_roots().is_empty() {
        return false;
    }
    if n <= 3 {
        return true;
    }
    assert!(n == 4, "degree at most 4");
    // monic integer form: g(x) = a^3 f(x/a)
    let c = f.primitive_part();
    let a = c[4].clone();
    let g: Vec<BigInt> = (0..=4)
        .map(|i| &c[i] * num_traits::pow(a.clone(), 3 - i.min(3)) / if i == 4 { a.clone() } else { BigInt::one() })
        .collect();
    let (c0, c1, c2, c3) = (&g[0], &g[1], &g[2], &g[3]);
    let divs = crate::arith::divisors_big(c0.magnitude());
    for b in divs.iter().flat_map(|d| [BigInt::from(d.clone()), -BigInt::from(d.clone())]) {
        let d = c0 / &b;
        // a1 + a2 = c3, a1 a2 = c2 - b - d
        let s = c3;
        let pr = c2 - &b - &d;
        let disc: BigInt = s * s - &pr * 4;
        if disc.is_negative() || !is_perfect_square(&disc) {
            continue;
        }
        let r = disc.sqrt();
        for a1 in [(s + &r) / 2, (s - &r) / 2] {
            let a1: BigInt = a1;
            let twice: BigInt = &a1 * 2 - s;
            if twice.abs() != r {
                continue;
            }
            let a2: BigInt = s - &a1;
            if &(&a1 * &d + &a2 * &b) == c1 {
                return false;
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadicalShape {
    /// `-√(v²+16)/4 + (1/2)√(v²/2 - (v³+16v)/(2√(v²+16)) + 8)`
    Pi4,
    /// `-√(v²-16)/4 + (1/2)√(v²/2 - (v³-16v)/(2√(v²-16)))`
    Pi6,
}

/// `θ = c1 √A + c2 √(B0 + B1 √A)`.
struct Radical {
    c1: BigRational,
    c2: BigRational,
    a: BigRational,
    b0: BigRational,
    b1: BigRational,
}

impl RadicalShape {
    fn radical(self, v: &BigRational) -> Result<Radical, CondError> {
        let v2 = v * v;
        let (a, b0, lin) = match self {
            RadicalShape::Pi4 => (&v2 + q(16), &v2 / q(2) + q(8), &v2 * v + v * q(16)),
            RadicalShape::Pi6 => (&v2 - q(16), &v2 / q(2), &v2 * v - v * q(16)),
        };
        if a.is_zero() {
            return Err(CondError::DegenerateRadicand);
        }
        let b1 = -lin / (&a * q(2));
        Ok(Radical { c1: qq(-1, 4), c2: qq(1, 2), a, b0, b1 })
    }

    /// Complex value with principal square roots.
    pub fn numeric(self, v: &BigRational) -> Result<Complex64, CondError> {
        let r = self.radical(v)?;
        let f = |x: &BigRational| x.to_f64().unwrap_or(f64::NAN);
        let sa = Complex64::new(f(&r.a), 0.0).sqrt();
        let inner = Complex64::new(f(&r.b0), 0.0) + sa * f(&r.b1);
        Ok(sa * f(&r.c1) + inner.sqrt() * f(&r.c2))
    }
}

/// `(θ² + c1²A - c2²B0)² - A(2c1θ + c2²B1)²`, as a primitive integer quartic,
/// checked against the numeric value of the radical.
pub fn nested_radical_min_poly(shape: RadicalShape, v: &BigRational) -> Result<Vec<BigInt>, CondError> {
    let r = shape.radical(v)?;
    let c1sq = &r.c1 * &r.c1;
    let c2sq = &r.c2 * &r.c2;
    let left = QPoly::new(vec![&c1sq * &r.a - &c2sq * &r.b0, q(0), q(1)]);
    let right = QPoly::new(vec![&c2sq * &r.b1, &r.c1 * q(2)]);
    let p = left.mul(&left).sub(&right.mul(&right).scale(&r.a));
    let coeffs = p.primitive_part();
    let theta = shape.numeric(v)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for c in coeffs.iter().rev() {
        let cf = c.to_f64().unwrap_or(f64::NAN);
        acc = acc * theta + cf;
    }
    for (i, c) in coeffs.iter().enumerate() {
        scale += c.to_f64().unwrap_or(f64::NAN).abs() * theta.norm().powi(i as i32);
    }
    let residual = acc.norm() / scale.max(1.0);
    if !(residual < 1e-9) {
        return Err(CondError::NumericCheck(format!("{residual:e}")));
    }
    Ok(coeffs)
}

/// Discriminant of a polynomial, via the Sylvester resultant with its derivative.
pub fn discriminant(f: &QPoly) -> BigRational {
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return BigRational::zero();
    }
    let df = f.derivative();
    let res = resultant(f, &df);
    let sign = if (n * (n - 1) / 2) % 2 == 0 { q(1) } else { q(-1) };
    sign * res / f.lead()
}

pub fn resultant(f: &QPoly, g: &QPoly) -> BigRational {
    let (m, n) = (f.degree().unwrap_or(0), g.degree().unwrap_or(0));
    let size = m + n;
    if size == 0 {
        return BigRational::one();
    }
    let mut a = vec![vec![BigRational::zero(); size]; size];
    for i in 0..n {
        for j in 0..=m {
            a[i][i + j] = f.coeff(m - j);
        }
    }
    for i in 0..m {
        for j in 0..=n {
            a[n + i][i + j] = g.coeff(n - j);
        }
    }
    determinant(a)
}

fn determinant(mut a: Vec<Vec<BigRational>>) -> BigRational {
    let n = a.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for k in c..n {
                    let t = &f * &a[c][k];
                    a[i][k] -= t;
                }
            }
        }
    }
    det
}

/// A rational coefficient written as an integer or a string like `"4/3"`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coef(pub BigRational);

impl Serialize for Coef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_integer() {
            if let Some(i) = self.0.to_integer().to_i64() {
                return s.serialize_i64(i);
            }
        }
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Coef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            I(i64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::I(i) => Ok(Coef(q(i))),
            Raw::S(s) => parse_rational(&s).map(Coef).map_err(serde::de::Error::custom),
        }
    }
}

/// Polynomial in `v`, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VPoly(pub Vec<Coef>);

impl VPoly {
    pub fn from_i64(c: &[i64]) -> Self {
        Self(c.iter().map(|&x| Coef(q(x))).collect())
    }

    pub fn eval(&self, v: &BigRational) -> BigRational {
        QPoly::new(self.0.iter().map(|c| c.0.clone()).collect()).eval(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Leaf {
    /// `v` is a squarefree integer other than `±1`
    SquarefreeNotPm1,
    NotSquare {
        poly: VPoly,
    },
    QuadCycTrivial {
        poly: VPoly,
        #[serde(rename = "M")]
        m: u64,
        mode: CycMode,
    },
    /// root field of `x^4 + p(v) x^2 + q(v)` has degree 4
    QuarticIrreducible {
        p: VPoly,
        q: VPoly,
    },
    QuarticCycTrivial {
        p: VPoly,
        q: VPoly,
        #[serde(rename = "M")]
        m: u64,
    },
    NestedRadicalDegree4 {
        shape: RadicalShape,
    },
    /// irreducibility of a cubic in `x` with coefficients in `v`, low degree
    /// first; experimental
    CubicIrreducible {
        coeffs: Vec<VPoly>,
    },
    SpecificSet {
        values: Vec<Coef>,
    },
    AvoidJValues,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VCondition {
    pub all: Vec<Leaf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafVerdict {
    pub leaf: Leaf,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionTrace {
    pub v: String,
    pub holds: bool,
    pub leaves: Vec<LeafVerdict>,
}

impl Leaf {
    pub fn eval(&self, v: &BigRational, j: Option<&RationalMap>) -> (bool, Option<String>) {
        let err = |e: CondError| (false, Some(e.to_string()));
        match self {
            Leaf::SquarefreeNotPm1 => {
                if !v.is_integer() {
                    return (false, Some("not an integer".into()));
                }
                let n = v.to_integer();
                if n.is_zero() || n.abs().is_one() {
                    return (false, Some(format!("v = {n}")));
                }
                let sq = squarefree_kernel(&n) == n;
                (sq, (!sq).then(|| "not squarefree".into()))
            }
            Leaf::NotSquare { poly } => {
                let x = poly.eval(v);
                let sq = is_rational_square(&x);
                (!sq, sq.then(|| format!("{x} is a square")))
            }
            Leaf::QuadCycTrivial { poly, m, mode } => match quad_cyc_trivial(&poly.eval(v), *m, *mode) {
                Ok(t) => (t, (!t).then(|| "quadratic field inside the cyclotomic field".into())),
                Err(e) => err(e),
            },
            Leaf::QuarticIrreducible { p, q: qp } => {
                let (p, qc) = (p.eval(v), qp.eval(v));
                if qc.is_zero() || (&p * &p - &qc * q(4)).is_zero() {
                    return err(CondError::DegenerateQuartic);
                }
                let irr = biquadratic_irreducible(&p, &qc);
                (irr, (!irr).then(|| "quartic is reducible".into()))
            }
            Leaf::QuarticCycTrivial { p, q: qp, m } => match quartic_condition(&p.eval(v), &qp.eval(v), *m) {
                Ok(QuarticClass::Degree4TrivialIntersection(_)) => (true, None),
                Ok(c) => (false, Some(format!("{c:?}"))),
                Err(e) => err(e),
            },
            Leaf::NestedRadicalDegree4 { shape } => match nested_radical_min_poly(*shape, v) {
                Ok(c) => {
                    let irr = is_irreducible(&QPoly::from_ints(&c));
                    (irr, (!irr).then(|| "minimal polynomial of degree below 4".into()))
                }
                Err(e) => err(e),
            },
            Leaf::CubicIrreducible { coeffs } => {
                let f = QPoly::new(coeffs.iter().map(|c| c.eval(v)).collect());
                let irr = f.degree() == Some(3) && is_irreducible(&f);
                (irr, Some(if irr { "experimental" } else { "experimental: reducible" }.into()))
            }
            Leaf::SpecificSet { values } => {
                let hit = values.iter().any(|c| &c.0 == v);
                (hit, (!hit).then(|| "not in the listed set".into()))
            }
            Leaf::AvoidJValues => {
                let Some(j) = j else {
                    return (true, Some("no J given".into()));
                };
                let x = j.evaluate(&Proj::Finite(v.clone()));
                let bad = matches!(&x, Proj::Infinity)
                    || x == Proj::int(0)
                    || x == Proj::int(1728);
                (!bad, bad.then(|| format!("J(v) = {x}")))
            }
        }
    }
}

/// Conjunction of all leaves, with `AvoidJValues` added when missing.
pub fn eval_condition(cond: &VCondition, v: &BigRational, j: Option<&RationalMap>) -> ConditionTrace {
    let mut leaves = cond.all.clone();
    if !leaves.contains(&Leaf::AvoidJValues) {
        leaves.push(Leaf::AvoidJValues);
    }
    let verdicts: Vec<LeafVerdict> = leaves
        .into_iter()
        .map(|leaf| {
            let (holds, reason) = leaf.eval(v, j);
            LeafVerdict { leaf, holds, reason }
        })
        .collect();
    ConditionTrace {
        v: v.to_string(),
        holds: verdicts.iter().all(|l| l.holds),
        leaves: verdicts,
    }
}
