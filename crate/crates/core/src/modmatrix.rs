//! 2x2 matrices over `Z/NZ`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::arith::{crt_pair, gcd, inv_mod, mul_mod, rem_signed};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("matrix not invertible mod {modulus} (det {det})")]
    NotInvertible { det: u64, modulus: u64 },
    #[error("{m} does not divide {modulus}")]
    NotADivisor { m: u64, modulus: u64 },
    #[error("residues disagree modulo gcd of {0} and {1}")]
    IncompatibleResidues(u64, u64),
    #[error("modulus must be positive and below 2^32")]
    InvalidModulus,
    #[error("cannot parse matrix literal: {0}")]
    Parse(String),
}

/// A 2x2 matrix `[[a, b], [c, d]]` with entries reduced modulo `modulus`.
///
/// Ordering is lexicographic on `(modulus, a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueMatrix {
    modulus: u64,
    e: [u64; 4],
}

/// Operation selector for [`mat_mul_inv_det`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatOp {
    Mul,
    Inv,
    Det,
    Transpose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatOpValue {
    Matrix(ResidueMatrix),
    Residue(u64),
}

impl ResidueMatrix {
    pub fn new(modulus: u64, a: i64, b: i64, c: i64, d: i64) -> Result<Self, MatrixError> {
        if modulus == 0 || modulus >= 1 << 32 {
            return Err(MatrixError::InvalidModulus);
        }
        Ok(Self {
            modulus,
            e: [
                rem_signed(a, modulus),
                rem_signed(b, modulus),
                rem_signed(c, modulus),
                rem_signed(d, modulus),
            ],
        })
    }

    pub fn from_entries(modulus: u64, e: [u64; 4]) -> Result<Self, MatrixError> {
        if modulus == 0 || modulus >= 1 << 32 {
            return Err(MatrixError::InvalidModulus);
        }
        Ok(Self {
            modulus,
            e: e.map(|x| x % modulus),
        })
    }

    pub(crate) fn from_reduced(modulus: u64, e: [u64; 4]) -> Self {
        debug_assert!(e.iter().all(|&x| x < modulus.max(1)));
        Self { modulus, e }
    }

    pub fn identity(modulus: u64) -> Self {
        Self::from_entries(modulus, [1, 0, 0, 1]).expect("valid modulus")
    }

    pub fn scalar(modulus: u64, s: i64) -> Self {
        Self::new(modulus, s, 0, 0, s).expect("valid modulus")
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn entries(&self) -> [u64; 4] {
        self.e
    }

    pub fn det(&self) -> u64 {
        let n = self.modulus;
        let [a, b, c, d] = self.e;
        (mul_mod(a, d, n) + n - mul_mod(b, c, n)) % n
    }

    pub fn is_invertible(&self) -> bool {
        gcd(self.det(), self.modulus) == 1
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.modulus)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.modulus != other.modulus {
            return Err(MatrixError::ModulusMismatch(self.modulus, other.modulus));
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.modulus as u128;
        let [a, b, c, d] = self.e.map(|x| x as u128);
        let [p, q, r, s] = other.e.map(|x| x as u128);
        Self {
            modulus: self.modulus,
            e: [
                ((a * p + b * r) % n) as u64,
                ((a * q + b * s) % n) as u64,
                ((c * p + d * r) % n) as u64,
                ((c * q + d * s) % n) as u64,
            ],
        }
    }

    pub fn inverse(&self) -> Result<Self, MatrixError> {
        let n = self.modulus;
        let det = self.det();
        let di = inv_mod(det, n).ok_or(MatrixError::NotInvertible { det, modulus: n })?;
        let [a, b, c, d] = self.e;
        Ok(Self {
            modulus: n,
            e: [
                mul_mod(d, di, n),
                mul_mod((n - b) % n, di, n),
                mul_mod((n - c) % n, di, n),
                mul_mod(a, di, n),
            ],
        })
    }

    pub fn transpose(&self) -> Self {
        let [a, b, c, d] = self.e;
        Self {
            modulus: self.modulus,
            e: [a, c, b, d],
        }
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut acc = Self::identity(self.modulus);
        let mut base = *self;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            k >>= 1;
        }
        acc
    }

    /// Multiplicative order; the matrix must be invertible.
    pub fn order(&self) -> u64 {
        let id = Self::identity(self.modulus);
        let mut x = *self;
        let mut k = 1;
        while x != id {
            x = x.mul_unchecked(self);
            k += 1;
        }
        k
    }

    pub fn reduce_mod(&self, m: u64) -> Result<Self, MatrixError> {
        if m == 0 || self.modulus % m != 0 {
            return Err(MatrixError::NotADivisor {
                m,
                modulus: self.modulus,
            });
        }
        Ok(Self {
            modulus: m,
            e: self.e.map(|x| x % m),
        })
    }

    /// Entrywise CRT lift of `x mod m1` and `y mod m2` to `lcm(m1, m2)`.
    pub fn crt_combine(x: &Self, y: &Self) -> Result<Self, MatrixError> {
        let (m1, m2) = (x.modulus, y.modulus);
        let mut e = [0u64; 4];
        let mut l = 1;
        for i in 0..4 {
            let (v, lm) = crt_pair(x.e[i], m1, y.e[i], m2)
                .ok_or(MatrixError::IncompatibleResidues(m1, m2))?;
            e[i] = v;
            l = lm;
        }
        Self::from_entries(l, e)
    }

    /// Lift to a multiple `big` of the modulus using the canonical representatives.
    pub fn lift_to(&self, big: u64) -> Result<Self, MatrixError> {
        if big % self.modulus != 0 {
            return Err(MatrixError::NotADivisor {
                m: self.modulus,
                modulus: big,
            });
        }
        Self::from_entries(big, self.e)
    }
}

/// Dispatcher over the basic matrix operations.
pub fn mat_mul_inv_det(
    x: &ResidueMatrix,
    y: Option<&ResidueMatrix>,
    op: MatOp,
) -> Result<MatOpValue, MatrixError> {
    match op {
        MatOp::Mul => {
            let y = y.ok_or_else(|| MatrixError::Parse("mul needs two operands".into()))?;
            x.mul(y).map(MatOpValue::Matrix)
        }
        MatOp::Inv => x.inverse().map(MatOpValue::Matrix),
        MatOp::Det => Ok(MatOpValue::Residue(x.det())),
        MatOp::Transpose => Ok(MatOpValue::Matrix(x.transpose())),
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.e;
        write!(f, "[[{a},{b}],[{c},{d}]] mod {}", self.modulus)
    }
}

impl FromStr for ResidueMatrix {
    type Err = MatrixError;

    /// Parses `[[a,b],[c,d]] mod N`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || MatrixError::Parse(s.to_string());
        let (body, modulus) = s.rsplit_once("mod").ok_or_else(err)?;
        let modulus: u64 = modulus.trim().parse().map_err(|_| err())?;
        let nums: Vec<i64> = body
            .split(|c: char| c == '[' || c == ']' || c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|_| err())?;
        if nums.len() != 4 {
            return Err(err());
        }
        Self::new(modulus, nums[0], nums[1], nums[2], nums[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(n: u64, a: i64, b: i64, c: i64, d: i64) -> ResidueMatrix {
        ResidueMatrix::new(n, a, b, c, d).unwrap()
    }

    #[test]
    fn basic_ops() {
        assert_eq!(ResidueMatrix::identity(6).inverse().unwrap(), ResidueMatrix::identity(6));
        assert_eq!(m(5, 0, -1, 1, 0).det(), 1);
        assert_eq!(m(8, 1, 1, 0, 1).transpose(), m(8, 1, 0, 1, 1));
        assert_eq!(
            m(6, 2, 0, 0, 1).inverse(),
            Err(MatrixError::NotInvertible { det: 2, modulus: 6 })
        );
        assert!(matches!(
            m(4, 1, 0, 0, 1).mul(&m(6, 1, 0, 0, 1)),
            Err(MatrixError::ModulusMismatch(4, 6))
        ));
        assert_eq!(
            mat_mul_inv_det(&m(5, 0, -1, 1, 0), None, MatOp::Det).unwrap(),
            MatOpValue::Residue(1)
        );
    }

    #[test]
    fn reduction() {
        assert_eq!(m(6, 5, 0, 0, 5).reduce_mod(2).unwrap(), ResidueMatrix::identity(2));
        assert_eq!(m(6, 3, 1, 2, 5).reduce_mod(3).unwrap(), m(3, 0, 1, 2, 2));
        assert_eq!(m(6, 3, 1, 2, 5).reduce_mod(6).unwrap(), m(6, 3, 1, 2, 5));
        assert!(m(6, 1, 0, 0, 1).reduce_mod(4).is_err());
    }

    #[test]
    fn crt_examples() {
        let id6 = ResidueMatrix::crt_combine(&ResidueMatrix::identity(2), &ResidueMatrix::identity(3));
        assert_eq!(id6.unwrap(), ResidueMatrix::identity(6));
        // b: 1 mod 2 and 0 mod 3 gives 3 mod 6
        let t = ResidueMatrix::crt_combine(&m(2, 1, 1, 0, 1), &ResidueMatrix::identity(3)).unwrap();
        assert_eq!(t, m(6, 1, 3, 0, 1));
        assert_eq!(t.reduce_mod(2).unwrap(), m(2, 1, 1, 0, 1));
        assert_eq!(t.reduce_mod(3).unwrap(), ResidueMatrix::identity(3));
        assert_eq!(
            ResidueMatrix::crt_combine(&m(4, 1, 0, 0, 1), &m(6, 2, 0, 0, 1)),
            Err(MatrixError::IncompatibleResidues(4, 6))
        );
    }

    #[test]
    fn literal_round_trip() {
        let x: ResidueMatrix = "[[1,-1],[0, 1]] mod 8".parse().unwrap();
        assert_eq!(x, m(8, 1, 7, 0, 1));
        assert_eq!(x.to_string().parse::<ResidueMatrix>().unwrap(), x);
        assert!("[[1,2],[3]] mod 5".parse::<ResidueMatrix>().is_err());
    }

    fn arb_pair() -> impl Strategy<Value = (u64, [i64; 4], [i64; 4])> {
        (1u64..200, any::<[i64; 4]>(), any::<[i64; 4]>())
    }

    proptest! {
        #[test]
        fn reduction_is_multiplicative((n, x, y) in arb_pair(), k in 1u64..6) {
            let big = n * k;
            let a = m(big, x[0], x[1], x[2], x[3]);
            let b = m(big, y[0], y[1], y[2], y[3]);
            let lhs = a.mul(&b).unwrap().reduce_mod(n).unwrap();
            let rhs = a.reduce_mod(n).unwrap().mul(&b.reduce_mod(n).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn transpose_reverses_products((n, x, y) in arb_pair()) {
            let a = m(n, x[0], x[1], x[2], x[3]);
            let b = m(n, y[0], y[1], y[2], y[3]);
            prop_assert_eq!(a.mul(&b).unwrap().transpose(), b.transpose().mul(&a.transpose()).unwrap());
        }

        #[test]
        fn crt_then_reduce_recovers(m1 in 1u64..60, m2 in 1u64..60, x in any::<[i64; 4]>(), y in any::<[i64; 4]>()) {
            let a = m(m1, x[0], x[1], x[2], x[3]);
            let b0 = m(m2, y[0], y[1], y[2], y[3]);
            // force agreement modulo the gcd
            let g = gcd(m1, m2);
            let ea = a.entries();
            let eb = b0.entries();
            let fixed: [u64; 4] = std::array::from_fn(|i| {
                let shift = (ea[i] % g + g - eb[i] % g) % g;
                (eb[i] + shift) % m2
            });
            let b = ResidueMatrix::from_entries(m2, fixed).unwrap();
            let c = ResidueMatrix::crt_combine(&a, &b).unwrap();
            prop_assert_eq!(c.reduce_mod(m1).unwrap(), a);
            prop_assert_eq!(c.reduce_mod(m2).unwrap(), b);
        }

        #[test]
        fn inverse_is_two_sided(n in 2u64..100, x in any::<[i64; 4]>()) {
            let a = m(n, x[0], x[1], x[2], x[3]);
            if a.is_invertible() {
                let ai = a.inverse().unwrap();
                prop_assert!(a.mul(&ai).unwrap().is_identity());
                prop_assert!(ai.mul(&a).unwrap().is_identity());
            }
        }
    }
}
