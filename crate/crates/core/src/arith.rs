//! Elementary integer arithmetic shared by the group and field modules:
//! gcd/lcm, modular inverses, CRT, primality, factorisation and the orders
//! of `GL2(Z/N)` and `SL2(Z/N)`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

pub fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

#[inline]
pub fn mul_mod(a: u64, b: u64, n: u64) -> u64 {
    ((a as u128 * b as u128) % n as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, n: u64) -> u64 {
    if n == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= n;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, n);
        }
        base = mul_mod(base, base, n);
        exp >>= 1;
    }
    acc
}

/// Reduce a signed integer into `[0, n)`.
pub fn rem_signed(x: i64, n: u64) -> u64 {
    (x as i128).rem_euclid(n as i128) as u64
}

/// Inverse of `a` modulo `n`, if it exists. Modulo 1 every residue is the unit 0.
pub fn inv_mod(a: u64, n: u64) -> Option<u64> {
    if n == 1 {
        return Some(0);
    }
    let e = (a as i128).extended_gcd(&(n as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(n as i128) as u64)
}

/// Solve `x = a mod m1`, `x = b mod m2`. Returns `(x, lcm)` or `None` when the
/// residues disagree modulo `gcd(m1, m2)`.
pub fn crt_pair(a: u64, m1: u64, b: u64, m2: u64) -> Option<(u64, u64)> {
    let g = gcd(m1, m2);
    if (a % g) != (b % g) {
        return None;
    }
    let l = lcm(m1, m2);
    // x = a + m1 * k, with m1 k = b - a (mod m2)
    let m1g = m1 / g;
    let m2g = m2 / g;
    let diff = ((b as i128 - a as i128) / g as i128).rem_euclid(m2g as i128) as u64;
    let k = if m2g == 1 {
        0
    } else {
        mul_mod(diff, inv_mod(m1g % m2g, m2g)?, m2g)
    };
    let x = (a as u128 + m1 as u128 * k as u128) % l as u128;
    Some((x as u64, l))
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_into(d, out);
    factor_into(n / d, out);
}

/// Prime factorisation as sorted `(prime, exponent)` pairs. `factor(1)` is empty.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factor(0)");
    let mut primes = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13] {
        while n % p == 0 {
            primes.push(p);
            n /= p;
        }
    }
    factor_into(n, &mut primes);
    primes.sort_unstable();
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// p-adic valuation of `n` (n > 0).
pub fn valuation(mut n: u64, p: u64) -> u32 {
    let mut e = 0;
    while n % p == 0 {
        n /= p;
        e += 1;
    }
    e
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factor(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn euler_phi(n: u64) -> u64 {
    factor(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// The units of `Z/nZ` in increasing order (`[0]` for n = 1).
pub fn units(n: u64) -> Vec<u64> {
    if n == 1 {
        return vec![0];
    }
    (1..n).filter(|&a| gcd(a, n) == 1).collect()
}

/// `|GL2(Z/nZ)| = n^4 * prod_{p | n} (1 - 1/p)(1 - 1/p^2)`.
pub fn gl2_order(n: u64) -> u128 {
    let mut order = (n as u128).pow(4);
    for p in prime_divisors(n) {
        let p = p as u128;
        order = order / (p * p * p) * ((p - 1) * (p * p - 1));
    }
    order
}

/// `|SL2(Z/nZ)| = n^3 * prod_{p | n} (1 - 1/p^2)`.
pub fn sl2_order(n: u64) -> u128 {
    let mut order = (n as u128).pow(3);
    for p in prime_divisors(n) {
        let p = p as u128;
        order = order / (p * p) * (p * p - 1);
    }
    order
}

pub fn is_perfect_square_u(n: &BigUint) -> bool {
    let r = n.sqrt();
    &r * &r == *n
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    match n.sign() {
        Sign::Minus => false,
        _ => is_perfect_square_u(n.magnitude()),
    }
}

fn big_is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime(small);
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    if n.is_even() {
        return false;
    }
    let n_minus_one = n - &one;
    let mut d = n_minus_one.clone();
    let mut s = 0;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn big_pollard_rho(n: &BigUint) -> BigUint {
    let two = BigUint::from(2u32);
    if n.is_even() {
        return two;
    }
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let mut x = two.clone();
        let mut y = two.clone();
        let mut d = BigUint::one();
        while d.is_one() {
            x = f(&x);
            y = f(&f(&y));
            let diff = if x > y { &x - &y } else { &y - &x };
            d = diff.gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1u32;
    }
}

fn big_factor_into(n: BigUint, out: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if let Some(small) = n.to_u64() {
        let mut tmp = Vec::new();
        factor_into(small, &mut tmp);
        out.extend(tmp.into_iter().map(BigUint::from));
        return;
    }
    if big_is_probable_prime(&n) {
        out.push(n);
        return;
    }
    let d = big_pollard_rho(&n);
    let rest = &n / &d;
    big_factor_into(d, out);
    big_factor_into(rest, out);
}

/// Factorisation of an arbitrary positive integer.
pub fn factor_big(n: &BigUint) -> Vec<(BigUint, u32)> {
    assert!(!n.is_zero(), "factor_big(0)");
    let mut n = n.clone();
    let mut primes = Vec::new();
    for p in 2u32..1000 {
        let bp = BigUint::from(p);
        while (&n % &bp).is_zero() {
            primes.push(bp.clone());
            n /= &bp;
        }
    }
    big_factor_into(n, &mut primes);
    primes.sort();
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

/// All positive divisors of `n`.
pub fn divisors_big(n: &BigUint) -> Vec<BigUint> {
    let mut ds = vec![BigUint::one()];
    for (p, e) in factor_big(n) {
        let len = ds.len();
        let mut pk = BigUint::one();
        for _ in 0..e {
            pk *= &p;
            for i in 0..len {
                let d = &ds[i] * &pk;
                ds.push(d);
            }
        }
    }
    ds.sort();
    ds
}

/// Squarefree kernel with sign: the unique squarefree `d` with `n = d * k^2`.
pub fn squarefree_kernel(n: &BigInt) -> BigInt {
    assert!(!n.is_zero());
    let mut d = BigInt::one();
    for (p, e) in factor_big(n.magnitude()) {
        if e % 2 == 1 {
            d *= BigInt::from(p);
        }
    }
    if n.sign() == Sign::Minus {
        -d
    } else {
        d
    }
}

/// Kronecker symbol `(d / n)` for a fundamental discriminant `d` and `n > 0`.
pub fn kronecker(d: i64, n: u64) -> i64 {
    let mut result = 1i64;
    for (p, e) in factor(n) {
        let s = if p == 2 {
            if d % 2 == 0 {
                0
            } else {
                match d.rem_euclid(8) {
                    1 | 7 => 1,
                    _ => -1,
                }
            }
        } else {
            let a = d.rem_euclid(p as i64) as u64;
            if a == 0 {
                0
            } else if pow_mod(a, (p - 1) / 2, p) == 1 {
                1
            } else {
                -1
            }
        };
        if e % 2 == 1 {
            result *= s;
        } else if s == 0 {
            result = 0;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crt_basic() {
        assert_eq!(crt_pair(1, 2, 0, 3), Some((3, 6)));
        assert_eq!(crt_pair(1, 4, 3, 6), Some((9, 12)));
        assert_eq!(crt_pair(1, 4, 2, 6), None);
    }

    #[test]
    fn group_orders() {
        assert_eq!(gl2_order(2), 6);
        assert_eq!(gl2_order(3), 48);
        assert_eq!(gl2_order(4), 96);
        assert_eq!(sl2_order(5), 120);
        assert_eq!(sl2_order(1), 1);
        assert_eq!(gl2_order(1), 1);
    }

    #[test]
    fn factoring_and_kernels() {
        assert_eq!(factor(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert!(is_prime(1_000_000_007));
        let big = BigUint::from(1_000_000_007u64) * BigUint::from(998_244_353u64) * 12u32;
        let f = factor_big(&big);
        assert_eq!(f.len(), 4);
        assert_eq!(squarefree_kernel(&BigInt::from(-72)), BigInt::from(-2));
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
    }

    #[test]
    fn kronecker_symbols() {
        // chi_{-4}
        assert_eq!(kronecker(-4, 1), 1);
        assert_eq!(kronecker(-4, 3), -1);
        assert_eq!(kronecker(-4, 5), 1);
        // chi_8
        assert_eq!(kronecker(8, 3), -1);
        assert_eq!(kronecker(8, 7), 1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(5, 4), 1);
    }
}
