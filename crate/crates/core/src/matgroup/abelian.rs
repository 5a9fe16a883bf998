//! Finite abelian groups in invariant-factor form and homomorphisms between them.

use std::hash::Hash;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::GroupError;
use crate::arith::{factor, gcd};

/// `Z/d1 x Z/d2 x ...` with `1 < d1 | d2 | ...`. Elements are exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FiniteAbelianGroup {
    invariants: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        Self { invariants: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        Self::from_cyclic_factors(&[n])
    }

    /// Normalises an arbitrary product of cyclic groups to invariant-factor form.
    pub fn from_cyclic_factors(factors: &[u64]) -> Self {
        let mut by_prime: FxHashMap<u64, Vec<u64>> = FxHashMap::default();
        for &n in factors {
            assert!(n > 0, "cyclic factor of order 0");
            for (p, e) in factor(n) {
                by_prime.entry(p).or_default().push(p.pow(e));
            }
        }
        let width = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut inv = vec![1u64; width];
        for powers in by_prime.values_mut() {
            powers.sort_unstable();
            let offset = width - powers.len();
            for (i, q) in powers.iter().enumerate() {
                inv[offset + i] *= q;
            }
        }
        Self { invariants: inv }
    }

    pub fn invariants(&self) -> &[u64] {
        &self.invariants
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn order(&self) -> u64 {
        self.invariants.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.invariants.last().copied().unwrap_or(1)
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.rank()]
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        self.invariants
            .iter()
            .enumerate()
            .map(|(i, &d)| (x[i] + y[i]) % d)
            .collect()
    }

    pub fn scale(&self, x: &[u64], k: u64) -> Vec<u64> {
        self.invariants
            .iter()
            .enumerate()
            .map(|(i, &d)| ((x[i] as u128 * k as u128) % d as u128) as u64)
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        self.invariants
            .iter()
            .enumerate()
            .map(|(i, &d)| (d - x[i] % d) % d)
            .collect()
    }

    pub fn element_order(&self, x: &[u64]) -> u64 {
        self.invariants
            .iter()
            .enumerate()
            .fold(1, |acc, (i, &d)| crate::arith::lcm(acc, d / gcd(d, x[i])))
    }

    /// All elements in lexicographic order of exponent vectors.
    pub fn elements(&self) -> Vec<Vec<u64>> {
        let mut out = vec![vec![]];
        for &d in &self.invariants {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..d).map(move |a| {
                        let mut w = v.clone();
                        w.push(a);
                        w
                    })
                })
                .collect();
        }
        out
    }
}

/// A homomorphism given by the images of the cyclic generators of its source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianHom {
    pub images: Vec<Vec<u64>>,
}

impl AbelianHom {
    pub fn trivial(source: &FiniteAbelianGroup, target: &FiniteAbelianGroup) -> Self {
        Self {
            images: vec![target.zero(); source.rank()],
        }
    }

    /// Checks that `d_i * image_i = 0` for every source generator.
    pub fn validated(
        images: Vec<Vec<u64>>,
        source: &FiniteAbelianGroup,
        target: &FiniteAbelianGroup,
    ) -> Result<Self, GroupError> {
        if images.len() != source.rank() || images.iter().any(|y| y.len() != target.rank()) {
            return Err(GroupError::NotAHomomorphism);
        }
        for (y, &d) in images.iter().zip(source.invariants()) {
            if target.scale(y, d).iter().any(|&c| c != 0) {
                return Err(GroupError::NotAHomomorphism);
            }
        }
        Ok(Self {
            images: images
                .into_iter()
                .map(|y| target.add(&y, &target.zero()))
                .collect(),
        })
    }

    pub fn apply(&self, target: &FiniteAbelianGroup, x: &[u64]) -> Vec<u64> {
        let mut acc = target.zero();
        for (xi, y) in x.iter().zip(&self.images) {
            acc = target.add(&acc, &target.scale(y, *xi));
        }
        acc
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|y| y.iter().all(|&c| c == 0))
    }

    /// Image as a list of elements (sorted).
    pub fn image(&self, source: &FiniteAbelianGroup, target: &FiniteAbelianGroup) -> Vec<Vec<u64>> {
        let mut img: Vec<Vec<u64>> = source
            .elements()
            .iter()
            .map(|x| self.apply(target, x))
            .collect();
        img.sort();
        img.dedup();
        img
    }
}

/// Every homomorphism `A -> Q`, in lexicographic order of generator images.
/// The count is `prod gcd(d_i, e_j)`.
pub fn enumerate_homs(a: &FiniteAbelianGroup, q: &FiniteAbelianGroup) -> Vec<AbelianHom> {
    // admissible images of each source generator
    let per_gen: Vec<Vec<Vec<u64>>> = a
        .invariants()
        .iter()
        .map(|&d| {
            let mut choices = vec![vec![]];
            for &e in q.invariants() {
                let step = e / gcd(d, e);
                choices = choices
                    .into_iter()
                    .flat_map(|v: Vec<u64>| {
                        (0..e).step_by(step as usize).map(move |c| {
                            let mut w = v.clone();
                            w.push(c);
                            w
                        })
                    })
                    .collect();
            }
            choices
        })
        .collect();
    let mut homs = vec![AbelianHom { images: vec![] }];
    for choices in per_gen {
        homs = homs
            .into_iter()
            .flat_map(|h| {
                choices.iter().map(move |c| {
                    let mut images = h.images.clone();
                    images.push(c.clone());
                    AbelianHom { images }
                })
            })
            .collect();
    }
    homs
}

/// An abelian group presented by a Cayley-graph walk together with a
/// discrete-logarithm table into its invariant-factor form.
#[derive(Debug, Clone)]
pub struct AbelianDecomposition<K: Eq + Hash> {
    pub group: FiniteAbelianGroup,
    coords: FxHashMap<K, Vec<u64>>,
    basis: Vec<K>,
}

impl<K: Eq + Hash + Clone> AbelianDecomposition<K> {
    pub fn log(&self, key: &K) -> Option<&Vec<u64>> {
        self.coords.get(key)
    }

    /// Elements realising the cyclic generators.
    pub fn basis(&self) -> &[K] {
        &self.basis
    }

    pub fn keys(&self) -> impl Iterator<Item = (&K, &Vec<u64>)> {
        self.coords.iter()
    }
}

/// Decomposes the abelian group generated by `ngens` generators, where
/// `step(x, j)` multiplies `x` by generator `j`. The caller guarantees the
/// group is abelian and finite.
pub fn decompose<K, F>(identity: K, ngens: usize, step: F) -> Result<AbelianDecomposition<K>, GroupError>
where
    K: Eq + Hash + Clone,
    F: Fn(&K, usize) -> K,
{
    let cap = crate::limits::cap_order();
    let mut vecs: FxHashMap<K, Vec<i128>> = FxHashMap::default();
    let mut order: Vec<K> = vec![identity.clone()];
    vecs.insert(identity.clone(), vec![0; ngens]);

    // generator orders give a full-rank starting lattice
    let mut lattice = Hnf::new(ngens);
    for j in 0..ngens {
        let mut x = step(&identity, j);
        let mut o: i128 = 1;
        while x != identity {
            x = step(&x, j);
            o += 1;
            if o as usize > cap {
                return Err(GroupError::ResourceExceeded { cap, reached: o as usize });
            }
        }
        let mut r = vec![0i128; ngens];
        r[j] = o;
        lattice.insert(r);
    }

    let mut head = 0;
    while head < order.len() {
        let x = order[head].clone();
        head += 1;
        let vx = vecs[&x].clone();
        for j in 0..ngens {
            let y = step(&x, j);
            let mut vy = vx.clone();
            vy[j] += 1;
            match vecs.get(&y) {
                Some(existing) => {
                    let rel: Vec<i128> = vy.iter().zip(existing).map(|(a, b)| a - b).collect();
                    if rel.iter().any(|&c| c != 0) {
                        lattice.insert(rel);
                    }
                }
                None => {
                    if order.len() >= cap {
                        return Err(GroupError::ResourceExceeded { cap, reached: order.len() + 1 });
                    }
                    vecs.insert(y.clone(), vy);
                    order.push(y);
                }
            }
        }
    }

    let (diag, v, vinv) = smith(lattice.rows);
    let keep: Vec<usize> = (0..ngens).filter(|&i| diag[i] != 1).collect();
    let invariants: Vec<u64> = keep.iter().map(|&i| diag[i] as u64).collect();
    debug_assert_eq!(invariants.iter().product::<u64>() as usize, order.len());

    let coords: FxHashMap<K, Vec<u64>> = vecs
        .into_iter()
        .map(|(k, x)| {
            let c = keep
                .iter()
                .map(|&i| {
                    let s: i128 = (0..ngens).map(|r| x[r] * v[r][i]).sum();
                    s.rem_euclid(diag[i]) as u64
                })
                .collect();
            (k, c)
        })
        .collect();

    let basis = keep
        .iter()
        .map(|&i| {
            let mut x = identity.clone();
            for (j, &e) in vinv[i].iter().enumerate() {
                // exponents are only meaningful modulo the group exponent
                let e = e.rem_euclid(order.len() as i128);
                for _ in 0..e {
                    x = step(&x, j);
                }
            }
            x
        })
        .collect();

    Ok(AbelianDecomposition {
        group: FiniteAbelianGroup { invariants },
        coords,
        basis,
    })
}

/// Upper-triangular Hermite form of a full-rank lattice in `Z^k`.
struct Hnf {
    rows: Vec<Vec<i128>>,
    filled: Vec<bool>,
}

impl Hnf {
    fn new(k: usize) -> Self {
        Self {
            rows: vec![vec![0; k]; k],
            filled: vec![false; k],
        }
    }

    fn insert(&mut self, mut r: Vec<i128>) {
        let k = r.len();
        for c in 0..k {
            if r[c] == 0 {
                continue;
            }
            if !self.filled[c] {
                if r[c] < 0 {
                    r.iter_mut().for_each(|x| *x = -*x);
                }
                self.rows[c] = r;
                self.filled[c] = true;
                self.reduce();
                return;
            }
            let p = &self.rows[c];
            let (g, x, y) = ext_gcd(p[c], r[c]);
            let (pc, rc) = (p[c] / g, r[c] / g);
            let new_p: Vec<i128> = (0..k).map(|i| x * p[i] + y * r[i]).collect();
            let new_r: Vec<i128> = (0..k).map(|i| pc * r[i] - rc * p[i]).collect();
            self.rows[c] = new_p;
            r = new_r;
            if self.rows[c][c] < 0 {
                self.rows[c].iter_mut().for_each(|x| *x = -*x);
            }
            self.reduce_row_tail(&mut r);
        }
        self.reduce();
    }

    fn reduce_row_tail(&self, r: &mut [i128]) {
        for j in 0..r.len() {
            if self.filled[j] && r[j] != 0 {
                let q = r[j].div_euclid(self.rows[j][j]);
                if q != 0 {
                    for i in j..r.len() {
                        r[i] -= q * self.rows[j][i];
                    }
                }
            }
        }
    }

    fn reduce(&mut self) {
        let k = self.rows.len();
        for i in (0..k).rev() {
            if !self.filled[i] {
                continue;
            }
            for j in i + 1..k {
                if !self.filled[j] {
                    continue;
                }
                let q = self.rows[i][j].div_euclid(self.rows[j][j]);
                if q != 0 {
                    for c in j..k {
                        let s = self.rows[j][c];
                        self.rows[i][c] -= q * s;
                    }
                }
            }
        }
    }
}

fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

type Mat = Vec<Vec<i128>>;

/// Smith form `U A V = D` of a square nonsingular matrix; returns the diagonal,
/// `V` and `V^{-1}`.
fn smith(mut a: Mat) -> (Vec<i128>, Mat, Mat) {
    let k = a.len();
    let ident = |k: usize| -> Mat {
        (0..k)
            .map(|i| (0..k).map(|j| i128::from(i == j)).collect())
            .collect()
    };
    let mut v = ident(k);
    let mut vinv = ident(k);

    let swap_cols = |a: &mut Mat, v: &mut Mat, vinv: &mut Mat, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
        vinv.swap(i, j);
    };
    // col_j -= q * col_t
    let col_sub = |a: &mut Mat, v: &mut Mat, vinv: &mut Mat, t: usize, j: usize, q: i128| {
        for row in a.iter_mut() {
            row[j] -= q * row[t];
        }
        for row in v.iter_mut() {
            row[j] -= q * row[t];
        }
        for c in 0..vinv[t].len() {
            let add = q * vinv[j][c];
            vinv[t][c] += add;
        }
    };

    for t in 0..k {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..k {
                for j in t..k {
                    if a[i][j] != 0
                        && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((bi, bj)) = best else { break };
            a.swap(t, bi);
            if bj != t {
                swap_cols(&mut a, &mut v, &mut vinv, t, bj);
            }
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..k {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    for c in t..k {
                        let s = a[t][c];
                        a[i][c] -= q * s;
                    }
                }
                dirty |= a[i][t] != 0;
            }
            for j in t + 1..k {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    col_sub(&mut a, &mut v, &mut vinv, t, j, q);
                }
                dirty |= a[t][j] != 0;
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..k).find(|&i| (t + 1..k).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for c in t..k {
                        let s = a[i][c];
                        a[t][c] += s;
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for row in a.iter_mut() {
                row[t] = -row[t];
            }
            for row in v.iter_mut() {
                row[t] = -row[t];
            }
            vinv[t].iter_mut().for_each(|x| *x = -*x);
        }
    }
    let diag = (0..k).map(|i| a[i][i]).collect();
    (diag, v, vinv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units_decomposition(m: u64) -> AbelianDecomposition<u64> {
        let us = crate::arith::units(m);
        decompose(1 % m, us.len(), |x, j| x * us[j] % m).unwrap()
    }

    #[test]
    fn unit_groups() {
        assert_eq!(units_decomposition(8).group.invariants(), &[2, 2]);
        assert_eq!(units_decomposition(5).group.invariants(), &[4]);
        assert_eq!(units_decomposition(15).group.invariants(), &[2, 4]);
        assert_eq!(units_decomposition(2).group.invariants(), &[] as &[u64]);
        assert_eq!(units_decomposition(16).group.invariants(), &[2, 4]);
        assert_eq!(units_decomposition(63).group.invariants(), &[6, 6]);
    }

    #[test]
    fn logs_are_homomorphic() {
        for m in [7u64, 8, 12, 20, 24, 63] {
            let d = units_decomposition(m);
            for a in crate::arith::units(m) {
                for b in crate::arith::units(m) {
                    let lhs = d.log(&(a * b % m)).unwrap().clone();
                    let rhs = d.group.add(d.log(&a).unwrap(), d.log(&b).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
            for (i, bk) in d.basis().iter().enumerate() {
                let mut e = d.group.zero();
                e[i] = 1;
                assert_eq!(d.log(bk).unwrap(), &e);
            }
        }
    }

    #[test]
    fn normal_form() {
        assert_eq!(FiniteAbelianGroup::from_cyclic_factors(&[2, 3]).invariants(), &[6]);
        assert_eq!(FiniteAbelianGroup::from_cyclic_factors(&[4, 6, 1]).invariants(), &[2, 12]);
        assert_eq!(FiniteAbelianGroup::from_cyclic_factors(&[1]).invariants(), &[] as &[u64]);
    }

    #[test]
    fn hom_counts() {
        let c22 = FiniteAbelianGroup::from_cyclic_factors(&[2, 2]);
        assert_eq!(enumerate_homs(&c22, &FiniteAbelianGroup::cyclic(2)).len(), 4);
        assert_eq!(
            enumerate_homs(&FiniteAbelianGroup::cyclic(4), &FiniteAbelianGroup::cyclic(2)).len(),
            2
        );
        let t = FiniteAbelianGroup::trivial();
        let homs = enumerate_homs(&t, &FiniteAbelianGroup::cyclic(6));
        assert_eq!(homs.len(), 1);
        assert!(homs[0].is_trivial());
        assert!(AbelianHom::validated(vec![vec![1]], &FiniteAbelianGroup::cyclic(3), &FiniteAbelianGroup::cyclic(2)).is_err());
    }
}
