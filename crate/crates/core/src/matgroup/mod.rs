//! Finite subgroups of `GL2(Z/NZ)`: closure, cosets, derived subgroups,
//! conjugacy and abelian quotients.

pub mod abelian;

use std::sync::{Arc, OnceLock};

use rustc_hash::{FxHashMap, FxHashSet};
use thiserror::Error;

use crate::arith::{gcd, inv_mod};
use crate::limits::cap_order;
use crate::modmatrix::{MatrixError, ResidueMatrix};

pub use abelian::{enumerate_homs, AbelianDecomposition, AbelianHom, FiniteAbelianGroup};

/// Largest modulus whose residues fit the packed element keys.
pub const MAX_MODULUS: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("group size exceeds cap {cap} (reached {reached})")]
    ResourceExceeded { cap: usize, reached: usize },
    #[error("modulus {0} exceeds the supported maximum")]
    ModulusTooLarge(u64),
    #[error("not a subgroup")]
    NotASubgroup,
    #[error("group is not abelian")]
    NotAbelian,
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("map is not a homomorphism")]
    NotAHomomorphism,
    #[error("non-integral genus: 12g = {0}")]
    NonIntegralGenus(i64),
    #[error("commutator saturation hit its cap at level {partial_level}")]
    SaturationExceeded { partial_level: u64 },
    #[error("dissolve hypotheses do not hold: {0}")]
    NotEligible(String),
}

/// Packed arithmetic in `GL2(Z/n)`, `n <= 2^16`; a matrix is a `u64` with
/// 16 bits per entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Ring {
    pub n: u64,
}

impl Ring {
    pub fn new(n: u64) -> Result<Self, GroupError> {
        if n > MAX_MODULUS {
            return Err(GroupError::ModulusTooLarge(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn pack(e: [u64; 4]) -> u64 {
        e[0] << 48 | e[1] << 32 | e[2] << 16 | e[3]
    }

    #[inline]
    pub fn unpack(k: u64) -> [u64; 4] {
        [k >> 48, (k >> 32) & 0xffff, (k >> 16) & 0xffff, k & 0xffff]
    }

    pub fn key(&self, m: &ResidueMatrix) -> u64 {
        debug_assert_eq!(m.modulus(), self.n);
        Self::pack(m.entries())
    }

    pub fn matrix(&self, k: u64) -> ResidueMatrix {
        ResidueMatrix::from_reduced(self.n, Self::unpack(k))
    }

    pub fn identity(&self) -> u64 {
        Self::pack([1 % self.n, 0, 0, 1 % self.n])
    }

    #[inline]
    pub fn mul(&self, x: u64, y: u64) -> u64 {
        let n = self.n;
        let [a, b, c, d] = Self::unpack(x);
        let [p, q, r, s] = Self::unpack(y);
        Self::pack([
            (a * p + b * r) % n,
            (a * q + b * s) % n,
            (c * p + d * r) % n,
            (c * q + d * s) % n,
        ])
    }

    pub fn det(&self, x: u64) -> u64 {
        let n = self.n;
        let [a, b, c, d] = Self::unpack(x);
        (a * d + n * n - b * c) % n
    }

    pub fn inv(&self, x: u64) -> u64 {
        let n = self.n;
        let [a, b, c, d] = Self::unpack(x);
        let di = inv_mod(self.det(x), n).expect("invertible element");
        Self::pack([
            d * di % n,
            (n - b) % n * di % n,
            (n - c) % n * di % n,
            a * di % n,
        ])
    }

    pub fn conj(&self, g: u64, x: u64) -> u64 {
        self.mul(self.mul(g, x), self.inv(g))
    }

    pub fn commutator(&self, x: u64, y: u64) -> u64 {
        self.mul(self.mul(x, y), self.mul(self.inv(x), self.inv(y)))
    }

    /// Every element of `GL2(Z/n)` in lexicographic order.
    #[cfg(test)]
    pub fn gl2_elements(&self) -> Vec<u64> {
        let n = self.n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let k = Self::pack([a, b, c, d]);
                        if gcd(self.det(k), n) == 1 {
                            out.push(k);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Incrementally grown subgroup with BFS discovery order.
#[derive(Debug, Clone)]
pub(crate) struct Closure {
    pub ring: Ring,
    pub elems: Vec<u64>,
    pub index: FxHashMap<u64, u32>,
    pub gens: Vec<u64>,
    cap: usize,
}

impl Closure {
    pub fn trivial(ring: Ring) -> Self {
        let id = ring.identity();
        let mut index = FxHashMap::default();
        index.insert(id, 0);
        Self {
            ring,
            elems: vec![id],
            index,
            gens: vec![],
            cap: cap_order(),
        }
    }

    pub fn from_gens(ring: Ring, gens: &[u64]) -> Result<Self, GroupError> {
        let mut c = Self::trivial(ring);
        for &g in gens {
            c.add_generator(g)?;
        }
        Ok(c)
    }

    #[inline]
    pub fn contains(&self, x: u64) -> bool {
        self.index.contains_key(&x)
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    fn push(&mut self, x: u64) -> Result<(), GroupError> {
        if self.elems.len() >= self.cap {
            return Err(GroupError::ResourceExceeded {
                cap: self.cap,
                reached: self.elems.len() + 1,
            });
        }
        self.index.insert(x, self.elems.len() as u32);
        self.elems.push(x);
        Ok(())
    }

    /// Adds a generator; returns false if it was already contained.
    pub fn add_generator(&mut self, g: u64) -> Result<bool, GroupError> {
        if self.contains(g) {
            return Ok(false);
        }
        self.gens.push(g);
        let ring = self.ring;
        let old = self.elems.len();
        for i in 0..old {
            let y = ring.mul(self.elems[i], g);
            if !self.contains(y) {
                self.push(y)?;
            }
        }
        let mut head = old;
        while head < self.elems.len() {
            let x = self.elems[head];
            head += 1;
            for j in 0..self.gens.len() {
                let y = ring.mul(x, self.gens[j]);
                if !self.contains(y) {
                    self.push(y)?;
                }
            }
        }
        Ok(true)
    }
}

/// Normal closure of `seeds` under conjugation by `conj_gens`.
pub(crate) fn normal_closure(
    ring: Ring,
    conj_gens: &[u64],
    seeds: impl IntoIterator<Item = u64>,
) -> Result<Closure, GroupError> {
    let mut c = Closure::trivial(ring);
    let mut queue: std::collections::VecDeque<u64> = seeds.into_iter().collect();
    let invs: Vec<u64> = conj_gens.iter().map(|&s| ring.inv(s)).collect();
    while let Some(x) = queue.pop_front() {
        if c.add_generator(x)? {
            for (s, si) in conj_gens.iter().zip(&invs) {
                queue.push_back(ring.mul(ring.mul(*s, x), *si));
            }
        }
    }
    Ok(c)
}

/// A finite subgroup of `GL2(Z/NZ)` given by generators; elements are
/// materialized on first use.
#[derive(Debug, Clone)]
pub struct FiniteMatrixGroup {
    modulus: u64,
    generators: Vec<ResidueMatrix>,
    data: OnceLock<Arc<Closure>>,
}

impl PartialEq for FiniteMatrixGroup {
    /// Element-set equality (materializes both sides).
    fn eq(&self, other: &Self) -> bool {
        self.same_elements(other).unwrap_or(false)
    }
}

impl FiniteMatrixGroup {
    /// Lazy group; validates generators without enumerating elements.
    pub fn new(modulus: u64, generators: Vec<ResidueMatrix>) -> Result<Self, GroupError> {
        Ring::new(modulus)?;
        for g in &generators {
            if g.modulus() != modulus {
                return Err(MatrixError::ModulusMismatch(modulus, g.modulus()).into());
            }
            if !g.is_invertible() {
                return Err(MatrixError::NotInvertible {
                    det: g.det(),
                    modulus,
                }
                .into());
            }
        }
        Ok(Self {
            modulus,
            generators,
            data: OnceLock::new(),
        })
    }

    /// Smallest subgroup containing `generators`, materialized eagerly.
    pub fn closure(modulus: u64, generators: Vec<ResidueMatrix>) -> Result<Self, GroupError> {
        let g = Self::new(modulus, generators)?;
        g.table()?;
        Ok(g)
    }

    pub(crate) fn from_closure(c: Closure) -> Self {
        let ring = c.ring;
        let generators = c.gens.iter().map(|&k| ring.matrix(k)).collect();
        let data = OnceLock::new();
        let _ = data.set(Arc::new(c));
        Self {
            modulus: ring.n,
            generators,
            data,
        }
    }

    pub fn trivial(modulus: u64) -> Result<Self, GroupError> {
        Self::closure(modulus, vec![])
    }

    /// `SL2(Z/n)`, generated by `S` and `T`.
    pub fn sl2(n: u64) -> Result<Self, GroupError> {
        Self::new(n, sl2_generators(n))
    }

    /// `GL2(Z/n)`.
    pub fn gl2(n: u64) -> Result<Self, GroupError> {
        Self::new(n, gl2_generators(n))
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> &[ResidueMatrix] {
        &self.generators
    }

    pub(crate) fn ring(&self) -> Ring {
        Ring { n: self.modulus }
    }

    pub(crate) fn gen_keys(&self) -> Vec<u64> {
        let r = self.ring();
        self.generators.iter().map(|g| r.key(g)).collect()
    }

    pub(crate) fn table(&self) -> Result<&Closure, GroupError> {
        if let Some(c) = self.data.get() {
            return Ok(c);
        }
        let c = Closure::from_gens(self.ring(), &self.gen_keys())?;
        Ok(self.data.get_or_init(|| Arc::new(c)))
    }

    pub fn is_materialized(&self) -> bool {
        self.data.get().is_some()
    }

    pub fn order(&self) -> Result<usize, GroupError> {
        Ok(self.table()?.len())
    }

    /// Elements in deterministic discovery order.
    pub fn elements(&self) -> Result<Vec<ResidueMatrix>, GroupError> {
        let t = self.table()?;
        Ok(t.elems.iter().map(|&k| t.ring.matrix(k)).collect())
    }

    pub fn contains(&self, x: &ResidueMatrix) -> Result<bool, GroupError> {
        if x.modulus() != self.modulus {
            return Err(MatrixError::ModulusMismatch(self.modulus, x.modulus()).into());
        }
        Ok(self.table()?.contains(self.ring().key(x)))
    }

    pub fn is_subgroup_of(&self, other: &Self) -> Result<bool, GroupError> {
        if self.modulus != other.modulus {
            return Err(MatrixError::ModulusMismatch(self.modulus, other.modulus).into());
        }
        let t = other.table()?;
        Ok(self.gen_keys().iter().all(|&g| t.contains(g)))
    }

    pub fn same_elements(&self, other: &Self) -> Result<bool, GroupError> {
        Ok(self.is_subgroup_of(other)? && other.is_subgroup_of(self)?)
    }

    pub fn is_abelian(&self) -> bool {
        let r = self.ring();
        let g = self.gen_keys();
        g.iter()
            .all(|&x| g.iter().all(|&y| r.mul(x, y) == r.mul(y, x)))
    }

    /// True when `self` is normalised by every generator of `parent`.
    pub fn is_normal_in(&self, parent: &Self) -> Result<bool, GroupError> {
        let r = self.ring();
        let t = self.table()?;
        let own = self.gen_keys();
        Ok(parent
            .gen_keys()
            .iter()
            .all(|&s| own.iter().all(|&h| t.contains(r.conj(s, h)))))
    }

    pub fn transpose(&self) -> Self {
        let gens = self.generators.iter().map(|g| g.transpose()).collect();
        Self::new(self.modulus, gens).expect("transposes stay invertible")
    }

    pub fn conjugate_by(&self, g: &ResidueMatrix) -> Result<Self, GroupError> {
        let gi = g.inverse()?;
        let gens = self
            .generators
            .iter()
            .map(|h| g.mul(h).and_then(|x| x.mul(&gi)))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(self.modulus, gens)
    }

    /// Image under reduction to a divisor `m` of the modulus.
    pub fn reduce_mod(&self, m: u64) -> Result<Self, GroupError> {
        let gens = self
            .generators
            .iter()
            .map(|g| g.reduce_mod(m))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(m, gens)
    }

    /// Subgroup of elements satisfying `pred`, which must cut out a subgroup.
    pub fn filter_subgroup(&self, pred: impl Fn(&ResidueMatrix) -> bool) -> Result<Self, GroupError> {
        let t = self.table()?;
        let ring = t.ring;
        let mut c = Closure::trivial(ring);
        let mut count = 0;
        for &x in &t.elems {
            if pred(&ring.matrix(x)) {
                count += 1;
                c.add_generator(x)?;
            }
        }
        if c.len() != count {
            return Err(GroupError::NotASubgroup);
        }
        Ok(Self::from_closure(c))
    }

    /// `{g : det g = 1}`.
    pub fn intersect_sl2(&self) -> Result<Self, GroupError> {
        let one = 1 % self.modulus;
        self.filter_subgroup(|g| g.det() == one)
    }

    /// Image of the determinant, as sorted residues.
    pub fn det_image(&self) -> Result<Vec<u64>, GroupError> {
        let n = self.modulus;
        let dets: Vec<u64> = self.generators.iter().map(|g| g.det()).collect();
        let mut seen: FxHashSet<u64> = FxHashSet::default();
        let mut queue = vec![1 % n];
        seen.insert(1 % n);
        while let Some(x) = queue.pop() {
            for &d in &dets {
                let y = crate::arith::mul_mod(x, d, n);
                if seen.insert(y) {
                    queue.push(y);
                }
            }
        }
        let mut out: Vec<u64> = seen.into_iter().collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Commutator subgroup: normal closure of the generator commutators.
    pub fn derived_subgroup(&self) -> Result<Self, GroupError> {
        let r = self.ring();
        let g = self.gen_keys();
        let seeds: Vec<u64> = g
            .iter()
            .enumerate()
            .flat_map(|(i, &x)| g[i + 1..].iter().map(move |&y| r.commutator(x, y)))
            .collect();
        Ok(Self::from_closure(normal_closure(r, &g, seeds)?))
    }

    /// Normal closure of `seeds` inside `self`.
    pub fn normal_closure_of(&self, seeds: &[ResidueMatrix]) -> Result<Self, GroupError> {
        let r = self.ring();
        let keys: Vec<u64> = seeds.iter().map(|s| r.key(s)).collect();
        Ok(Self::from_closure(normal_closure(r, &self.gen_keys(), keys)?))
    }

    /// A short generating set recovered greedily from the element list.
    pub fn small_generators(&self) -> Result<Vec<ResidueMatrix>, GroupError> {
        let t = self.table()?;
        let mut c = Closure::trivial(t.ring);
        for &x in &t.elems {
            if c.len() == t.len() {
                break;
            }
            c.add_generator(x)?;
        }
        Ok(c.gens.iter().map(|&k| t.ring.matrix(k)).collect())
    }
}

pub fn sl2_generators(n: u64) -> Vec<ResidueMatrix> {
    vec![
        ResidueMatrix::new(n, 0, -1, 1, 0).expect("valid"),
        ResidueMatrix::new(n, 1, 1, 0, 1).expect("valid"),
    ]
}

/// Generators of `(Z/n)^x` chosen greedily in increasing order.
pub fn unit_generators(n: u64) -> Vec<u64> {
    let mut seen: FxHashSet<u64> = FxHashSet::default();
    seen.insert(1 % n);
    let mut gens = Vec::new();
    for u in crate::arith::units(n) {
        if seen.contains(&u) {
            continue;
        }
        gens.push(u);
        let mut frontier: Vec<u64> = seen.iter().copied().collect();
        while let Some(x) = frontier.pop() {
            for &g in &gens {
                let y = crate::arith::mul_mod(x, g, n);
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
    }
    gens
}

pub fn gl2_generators(n: u64) -> Vec<ResidueMatrix> {
    let mut g = sl2_generators(n);
    for u in unit_generators(n) {
        g.push(ResidueMatrix::new(n, u as i64, 0, 0, 1).expect("valid"));
    }
    g
}

/// Coset decomposition `G = ⊔ g_i H`.
#[derive(Debug, Clone)]
pub(crate) struct CosetTable {
    /// coset id per element index of G
    pub id: Vec<u32>,
    /// least element of each coset, by id
    pub reps: Vec<u64>,
}

pub(crate) fn left_cosets(g: &Closure, h: &Closure) -> Result<CosetTable, GroupError> {
    if h.elems.iter().any(|&x| !g.contains(x)) {
        return Err(GroupError::NotASubgroup);
    }
    let ring = g.ring;
    let mut id = vec![u32::MAX; g.len()];
    let mut reps = Vec::new();
    for i in 0..g.len() {
        if id[i] != u32::MAX {
            continue;
        }
        let c = reps.len() as u32;
        let x = g.elems[i];
        let mut least = x;
        for &y in &h.elems {
            let xy = ring.mul(x, y);
            id[g.index[&xy] as usize] = c;
            least = least.min(xy);
        }
        reps.push(least);
    }
    Ok(CosetTable { id, reps })
}

/// Index `[G:H]` and the lexicographically least representative of each left
/// coset `gH`, sorted.
pub fn index_and_cosets(
    g: &FiniteMatrixGroup,
    h: &FiniteMatrixGroup,
) -> Result<(usize, Vec<ResidueMatrix>), GroupError> {
    if g.modulus != h.modulus {
        return Err(MatrixError::ModulusMismatch(g.modulus, h.modulus).into());
    }
    let (gt, ht) = (g.table()?, h.table()?);
    let table = left_cosets(gt, ht)?;
    let mut reps: Vec<u64> = table.reps;
    // packed keys order the same way as entry tuples
    reps.sort_unstable();
    Ok((reps.len(), reps.into_iter().map(|k| gt.ring.matrix(k)).collect()))
}

/// Cyclic decomposition of `G` (when `h` is `None`) or of `G/H`.
pub fn abelian_invariants(
    g: &FiniteMatrixGroup,
    h: Option<&FiniteMatrixGroup>,
) -> Result<FiniteAbelianGroup, GroupError> {
    Ok(abelian_quotient(g, h)?.decomposition.group)
}

/// `G/H` with its coset table and discrete logarithms.
pub(crate) struct AbelianQuotient {
    pub cosets: CosetTable,
    pub decomposition: AbelianDecomposition<u32>,
}

pub(crate) fn abelian_quotient(
    g: &FiniteMatrixGroup,
    h: Option<&FiniteMatrixGroup>,
) -> Result<AbelianQuotient, GroupError> {
    let trivial;
    let h = match h {
        Some(h) => h,
        None => {
            trivial = FiniteMatrixGroup::trivial(g.modulus)?;
            &trivial
        }
    };
    if !h.is_subgroup_of(g)? {
        return Err(GroupError::NotASubgroup);
    }
    if !h.is_normal_in(g)? {
        return Err(GroupError::NotNormal);
    }
    let ring = g.ring();
    let ht = h.table()?;
    let gens = g.gen_keys();
    for (i, &x) in gens.iter().enumerate() {
        for &y in &gens[i + 1..] {
            if !ht.contains(ring.commutator(x, y)) {
                return Err(GroupError::NotAbelian);
            }
        }
    }
    let gt = g.table()?;
    let cosets = left_cosets(gt, ht)?;
    let decomposition = abelian::decompose(cosets.id[0], gens.len(), |&c, j| {
        let x = ring.mul(cosets.reps[c as usize], gens[j]);
        cosets.id[gt.index[&x] as usize]
    })?;
    Ok(AbelianQuotient {
        cosets,
        decomposition,
    })
}

/// Searches `GL2(Z/N)` in lexicographic order for `g` with `g A g^-1 = B`.
pub fn is_conjugate_subgroup(
    a: &FiniteMatrixGroup,
    b: &FiniteMatrixGroup,
) -> Result<Option<ResidueMatrix>, GroupError> {
    if a.modulus != b.modulus {
        return Err(MatrixError::ModulusMismatch(a.modulus, b.modulus).into());
    }
    if a.order()? != b.order()? {
        return Ok(None);
    }
    let ring = a.ring();
    let bt = b.table()?;
    let gens = a.gen_keys();
    let n = ring.n;
    for x0 in 0..n {
        for x1 in 0..n {
            for x2 in 0..n {
                for x3 in 0..n {
                    let g = Ring::pack([x0, x1, x2, x3]);
                    if gcd(ring.det(g), n) != 1 {
                        continue;
                    }
                    let gi = ring.inv(g);
                    if gens
                        .iter()
                        .all(|&h| bt.contains(ring.mul(ring.mul(g, h), gi)))
                    {
                        return Ok(Some(ring.matrix(g)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Subgroups of `g` up to conjugation by `by` (which must normalise `g`),
/// one representative per class, found by joining class representatives
/// with cyclic subgroups.
pub fn subgroups_up_to_conjugacy(
    g: &FiniteMatrixGroup,
    by: &FiniteMatrixGroup,
) -> Result<Vec<FiniteMatrixGroup>, GroupError> {
    let gt = g.table()?;
    let ring = gt.ring;
    let size = gt.len();
    let words = size.div_ceil(64);
    let conj_perms: Vec<Vec<u32>> = by
        .table()?
        .elems
        .iter()
        .map(|&s| {
            let si = ring.inv(s);
            gt.elems
                .iter()
                .map(|&x| gt.index[&ring.mul(ring.mul(s, x), si)])
                .collect()
        })
        .collect();
    let bits_of = |c: &Closure| -> Vec<u64> {
        let mut b = vec![0u64; words];
        for &x in &c.elems {
            let i = gt.index[&x] as usize;
            b[i / 64] |= 1 << (i % 64);
        }
        b
    };
    let mut seen: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut reps: Vec<Closure> = Vec::new();
    let register = |c: Closure, seen: &mut FxHashSet<Vec<u64>>, reps: &mut Vec<Closure>| {
        let b = bits_of(&c);
        if seen.contains(&b) {
            return;
        }
        let idx: Vec<u32> = c.elems.iter().map(|x| gt.index[x]).collect();
        for p in &conj_perms {
            let mut cb = vec![0u64; words];
            for &i in &idx {
                let j = p[i as usize] as usize;
                cb[j / 64] |= 1 << (j % 64);
            }
            seen.insert(cb);
        }
        reps.push(c);
    };

    let mut cyclic: Vec<u64> = Vec::new();
    let mut cyc_seen: FxHashSet<Vec<u64>> = FxHashSet::default();
    for &x in &gt.elems {
        let c = Closure::from_gens(ring, &[x])?;
        if cyc_seen.insert(bits_of(&c)) {
            cyclic.push(x);
        }
    }
    register(Closure::trivial(ring), &mut seen, &mut reps);
    let mut head = 0;
    while head < reps.len() {
        let base = reps[head].clone();
        head += 1;
        for &x in &cyclic {
            if base.contains(x) {
                continue;
            }
            let mut c = base.clone();
            c.add_generator(x)?;
            register(c, &mut seen, &mut reps);
        }
    }
    Ok(reps.into_iter().map(FiniteMatrixGroup::from_closure).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: u64, a: i64, b: i64, c: i64, d: i64) -> ResidueMatrix {
        ResidueMatrix::new(n, a, b, c, d).unwrap()
    }

    fn brute_gl2(n: u64) -> usize {
        Ring { n }.gl2_elements().len()
    }

    #[test]
    fn closure_examples() {
        let g = FiniteMatrixGroup::closure(2, vec![m(2, 1, 1, 0, 1), m(2, 0, 1, 1, 0)]).unwrap();
        assert_eq!(g.order().unwrap(), brute_gl2(2));
        assert_eq!(FiniteMatrixGroup::closure(4, vec![ResidueMatrix::identity(4)]).unwrap().order().unwrap(), 1);
        assert_eq!(FiniteMatrixGroup::closure(4, vec![ResidueMatrix::scalar(4, -1)]).unwrap().order().unwrap(), 2);
        for n in 2..=6 {
            assert_eq!(FiniteMatrixGroup::gl2(n).unwrap().order().unwrap(), brute_gl2(n));
            assert_eq!(
                FiniteMatrixGroup::sl2(n).unwrap().order().unwrap() as u128,
                crate::arith::sl2_order(n)
            );
        }
    }

    #[test]
    fn closure_is_idempotent() {
        let g = FiniteMatrixGroup::closure(6, vec![m(6, 1, 1, 0, 1), m(6, 5, 0, 0, 1)]).unwrap();
        let again = FiniteMatrixGroup::closure(6, g.elements().unwrap()).unwrap();
        let mut e = g.elements().unwrap();
        let mut f = again.elements().unwrap();
        e.sort();
        f.sort();
        assert_eq!(e, f);
    }

    #[test]
    fn cosets_and_derived() {
        let g = FiniteMatrixGroup::gl2(2).unwrap();
        let d = g.derived_subgroup().unwrap();
        assert_eq!(d.order().unwrap(), 3);
        let (idx, reps) = index_and_cosets(&g, &d).unwrap();
        assert_eq!(idx, 2);
        assert_eq!(reps[0], ResidueMatrix::from_entries(2, [0, 1, 1, 0]).unwrap());
        assert_eq!(index_and_cosets(&g, &g).unwrap().0, 1);
        let b = FiniteMatrixGroup::closure(2, vec![m(2, 1, 1, 0, 1)]).unwrap();
        let c = FiniteMatrixGroup::closure(2, vec![m(2, 1, 0, 1, 1)]).unwrap();
        assert_eq!(index_and_cosets(&b, &c).unwrap_err(), GroupError::NotASubgroup);

        let g3 = FiniteMatrixGroup::gl2(3).unwrap();
        let d3 = g3.derived_subgroup().unwrap();
        assert_eq!(d3.order().unwrap(), 24);
        assert!(d3.same_elements(&g3.intersect_sl2().unwrap()).unwrap());

        let diag = FiniteMatrixGroup::closure(5, vec![m(5, 2, 0, 0, 1), m(5, 1, 0, 0, 3)]).unwrap();
        assert_eq!(diag.derived_subgroup().unwrap().order().unwrap(), 1);
    }

    #[test]
    fn derived_subgroup_matches_brute_force() {
        for g in [
            FiniteMatrixGroup::gl2(4).unwrap(),
            FiniteMatrixGroup::gl2(5).unwrap(),
            FiniteMatrixGroup::closure(8, vec![m(8, 1, 2, 0, 3), m(8, 3, 0, 4, 1), m(8, 1, 0, 2, 5)]).unwrap(),
        ] {
            let els = g.elements().unwrap();
            let mut comms = Vec::new();
            for x in &els {
                for y in &els {
                    let c = x.mul(y).unwrap().mul(&x.inverse().unwrap()).unwrap().mul(&y.inverse().unwrap()).unwrap();
                    comms.push(c);
                }
            }
            let brute = FiniteMatrixGroup::closure(g.modulus(), comms).unwrap();
            let d = g.derived_subgroup().unwrap();
            assert!(d.same_elements(&brute).unwrap());
            assert!(d.is_normal_in(&g).unwrap());
            assert!(abelian_invariants(&g, Some(&d)).is_ok());
        }
    }

    #[test]
    fn abelian_examples() {
        let scal8 = FiniteMatrixGroup::closure(8, (1..8).step_by(2).map(|a| ResidueMatrix::scalar(8, a)).collect()).unwrap();
        assert_eq!(abelian_invariants(&scal8, None).unwrap().invariants(), &[2, 2]);
        assert!(abelian_invariants(&FiniteMatrixGroup::trivial(5).unwrap(), None).unwrap().invariants().is_empty());
        let u5 = FiniteMatrixGroup::closure(5, vec![ResidueMatrix::scalar(5, 2)]).unwrap();
        assert_eq!(abelian_invariants(&u5, None).unwrap().invariants(), &[4]);
        assert_eq!(
            abelian_invariants(&FiniteMatrixGroup::gl2(3).unwrap(), None).unwrap_err(),
            GroupError::NotAbelian
        );
        let g = FiniteMatrixGroup::gl2(4).unwrap();
        let d = g.derived_subgroup().unwrap();
        let q = abelian_invariants(&g, Some(&d)).unwrap();
        assert_eq!(q.order() as usize * d.order().unwrap(), g.order().unwrap());
    }

    #[test]
    fn conjugacy() {
        let up = FiniteMatrixGroup::closure(3, vec![m(3, 1, 1, 0, 1), m(3, 2, 0, 0, 1), m(3, 1, 0, 0, 2)]).unwrap();
        let low = up.transpose();
        assert_eq!(is_conjugate_subgroup(&up, &up).unwrap(), Some(ResidueMatrix::identity(3)));
        let w = is_conjugate_subgroup(&up, &low).unwrap().unwrap();
        assert!(up.conjugate_by(&w).unwrap().same_elements(&low).unwrap());
        assert_eq!(
            is_conjugate_subgroup(&up, &FiniteMatrixGroup::gl2(3).unwrap()).unwrap(),
            None
        );
    }

    #[test]
    fn subgroup_classes_of_small_groups() {
        // S3 has 4 classes of subgroups; SL2(F3) has 7
        let gl2 = FiniteMatrixGroup::gl2(2).unwrap();
        assert_eq!(subgroups_up_to_conjugacy(&gl2, &gl2).unwrap().len(), 4);
        let sl3 = FiniteMatrixGroup::sl2(3).unwrap();
        assert_eq!(subgroups_up_to_conjugacy(&sl3, &sl3).unwrap().len(), 7);
    }
}
