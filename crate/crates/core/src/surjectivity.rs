//! Nonabelian simple quotients of finite matrix groups and the surjectivity
//! criterion for `G_M × Π GL2(Z_ℓ)` at finite truncation.

use std::collections::BTreeSet;

use rayon::prelude::*;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, is_prime, prime_divisors};
use crate::matgroup::{normal_closure, Closure, FiniteMatrixGroup, GroupError};
use crate::modmatrix::ResidueMatrix;
use crate::opengroup::{GroupSpec, OpenSubgroup};

/// A nonabelian finite simple group, identified by its order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimpleTag {
    pub order: u64,
    pub name: String,
}

impl SimpleTag {
    pub fn from_order(order: u64) -> Self {
        let name = (5..=order)
            .take_while(|l| l * l * l / 2 <= order * 2)
            .find(|&l| is_prime(l) && l * (l * l - 1) / gcd(2, l - 1) == order)
            .map(|l| format!("PSL2(F_{l})"))
            .unwrap_or_else(|| format!("simple({order})"));
        Self { order, name }
    }
}

fn bits_of(g: &Closure, n: &Closure) -> Vec<u64> {
    let mut b = vec![0u64; g.len().div_ceil(64)];
    for x in &n.elems {
        let i = g.index[x] as usize;
        b[i / 64] |= 1 << (i % 64);
    }
    b
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

/// Conjugacy class representatives (first element of each class in BFS order).
fn class_reps(g: &Closure) -> Vec<u64> {
    let ring = g.ring;
    let invs: Vec<u64> = g.gens.iter().map(|&s| ring.inv(s)).collect();
    let mut seen = vec![false; g.len()];
    let mut reps = Vec::new();
    for i in 0..g.len() {
        if seen[i] {
            continue;
        }
        reps.push(g.elems[i]);
        seen[i] = true;
        let mut stack = vec![g.elems[i]];
        while let Some(x) = stack.pop() {
            for (s, si) in g.gens.iter().zip(&invs) {
                let y = ring.mul(ring.mul(*s, x), *si);
                let j = g.index[&y] as usize;
                if !seen[j] {
                    seen[j] = true;
                    stack.push(y);
                }
            }
        }
    }
    reps
}

fn is_solvable(g: &FiniteMatrixGroup) -> Result<bool, GroupError> {
    let mut cur = g.clone();
    loop {
        let d = cur.derived_subgroup()?;
        let (a, b) = (d.order()?, cur.order()?);
        if a == 1 {
            return Ok(true);
        }
        if a == b {
            return Ok(false);
        }
        cur = d;
    }
}

/// Every normal subgroup, found by adding one conjugacy class at a time.
fn normal_subgroups(g: &Closure) -> Result<Vec<(Vec<u64>, usize)>, GroupError> {
    let ring = g.ring;
    let reps = class_reps(g);
    let trivial = Closure::trivial(ring);
    let mut seen: FxHashSet<Vec<u64>> = FxHashSet::default();
    let mut out = Vec::new();
    let mut frontier = vec![trivial];
    seen.insert(bits_of(g, &frontier[0]));
    out.push((bits_of(g, &frontier[0]), 1));
    while let Some(n) = frontier.pop() {
        for &r in &reps {
            if n.contains(r) {
                continue;
            }
            let seeds: Vec<u64> = n.gens.iter().copied().chain([r]).collect();
            let m = normal_closure(ring, &g.gens, seeds)?;
            let b = bits_of(g, &m);
            if seen.insert(b.clone()) {
                out.push((b, m.len()));
                frontier.push(m);
            }
        }
    }
    Ok(out)
}

fn maximal_normal_indices(g: &Closure) -> Result<Vec<(Vec<u64>, usize)>, GroupError> {
    let total = g.len();
    let normals = normal_subgroups(g)?;
    let proper: Vec<&(Vec<u64>, usize)> = normals.iter().filter(|(_, s)| *s < total).collect();
    Ok(proper
        .iter()
        .filter(|(b, size)| !proper.iter().any(|(c, s2)| s2 > size && is_subset(b, c)))
        .map(|x| (*x).clone())
        .collect())
}

fn closure_from_bits(g: &Closure, bits: &[u64]) -> Result<Closure, GroupError> {
    let mut c = Closure::trivial(g.ring);
    for (i, &x) in g.elems.iter().enumerate() {
        if bits[i / 64] >> (i % 64) & 1 == 1 {
            c.add_generator(x)?;
        }
    }
    Ok(c)
}

/// Nonabelian simple groups `G/N` for `N` normal in `G`.
pub fn strict_simple_quotients(g: &FiniteMatrixGroup) -> Result<BTreeSet<SimpleTag>, GroupError> {
    if g.is_abelian() || is_solvable(g)? {
        return Ok(BTreeSet::new());
    }
    let t = g.table()?;
    let mut out = BTreeSet::new();
    for (_, size) in maximal_normal_indices(t)? {
        let index = (t.len() / size) as u64;
        if !is_prime(index) {
            out.insert(SimpleTag::from_order(index));
        }
    }
    Ok(out)
}

/// `Quo(G)`: the nonabelian simple groups in a composition series of `G`.
/// For `GL2(Z/ℓ^n)` with `ℓ >= 5` this is `{PSL2(F_ℓ)}`, although the only
/// simple quotients of `GL2(F_ℓ)` itself are abelian.
pub fn quo_simple_quotients(g: &FiniteMatrixGroup) -> Result<BTreeSet<SimpleTag>, GroupError> {
    let mut out = BTreeSet::new();
    // perfect residuum carries every nonabelian factor
    let mut cur = g.clone();
    loop {
        let d = cur.derived_subgroup()?;
        if d.order()? == cur.order()? {
            break;
        }
        cur = d;
    }
    let mut stack = vec![cur.table()?.clone()];
    while let Some(p) = stack.pop() {
        if p.len() == 1 {
            continue;
        }
        let pg = FiniteMatrixGroup::from_closure(p.clone());
        if is_solvable(&pg)? {
            continue;
        }
        let (bits, size) = maximal_normal_indices(&p)?
            .into_iter()
            .next()
            .expect("nontrivial group has a maximal normal subgroup");
        let index = (p.len() / size) as u64;
        if !is_prime(index) {
            out.insert(SimpleTag::from_order(index));
        }
        stack.push(closure_from_bits(&p, &bits)?);
    }
    Ok(out)
}

pub fn quo_disjointness(a: &FiniteMatrixGroup, b: &FiniteMatrixGroup) -> Result<bool, GroupError> {
    let qa = quo_simple_quotients(a)?;
    let qb = quo_simple_quotients(b)?;
    Ok(qa.is_disjoint(&qb))
}

/// Factor `ℓ` of a truncation: all of `GL2(Z/ℓ^k)` or a given subgroup.
#[derive(Debug, Clone)]
pub enum PrimePart {
    Full { ell: u64, power: u32 },
    Subgroup { ell: u64, group: FiniteMatrixGroup },
}

impl PrimePart {
    pub fn ell(&self) -> u64 {
        match self {
            PrimePart::Full { ell, .. } | PrimePart::Subgroup { ell, .. } => *ell,
        }
    }

    pub fn modulus(&self) -> u64 {
        match self {
            PrimePart::Full { ell, power } => ell.pow(*power),
            PrimePart::Subgroup { group, .. } => group.modulus(),
        }
    }

    pub fn group(&self) -> Result<FiniteMatrixGroup, GroupError> {
        match self {
            PrimePart::Full { ell, power } => FiniteMatrixGroup::gl2(ell.pow(*power)),
            PrimePart::Subgroup { group, .. } => Ok(group.clone()),
        }
    }
}

/// JSON form of a [`TruncatedAdelicGroup`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedSpec {
    pub m_part: GroupSpec,
    #[serde(default)]
    pub primes: Vec<PrimeSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PrimeSpec {
    Full { ell: u64, power: u32 },
    Subgroup { ell: u64, group: GroupSpec },
}

impl TruncatedSpec {
    pub fn build(&self) -> Result<TruncatedAdelicGroup, GroupError> {
        let m_part = OpenSubgroup::from_spec(&self.m_part)?.image().clone();
        let primes = self
            .primes
            .iter()
            .map(|p| {
                Ok(match p {
                    PrimeSpec::Full { ell, power } => PrimePart::Full { ell: *ell, power: *power },
                    PrimeSpec::Subgroup { ell, group } => PrimePart::Subgroup {
                        ell: *ell,
                        group: OpenSubgroup::from_spec(group)?.image().clone(),
                    },
                })
            })
            .collect::<Result<Vec<_>, GroupError>>()?;
        TruncatedAdelicGroup::new(m_part, primes)
    }
}

/// `G_M × Π GL2(Z_ℓ)` cut off at the stated moduli.
#[derive(Debug, Clone)]
pub struct TruncatedAdelicGroup {
    pub m_part: FiniteMatrixGroup,
    pub primes: Vec<PrimePart>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    MPart,
    Prime(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "factor")]
pub enum SurjVerdict {
    Surjective,
    FailsProjection(Factor),
    FailsAbelianQuotient,
}

impl TruncatedAdelicGroup {
    pub fn new(m_part: FiniteMatrixGroup, primes: Vec<PrimePart>) -> Result<Self, GroupError> {
        let mp = prime_divisors(m_part.modulus());
        let mut seen = mp.clone();
        for p in &primes {
            let ell = p.ell();
            if !is_prime(ell) || seen.contains(&ell) || prime_divisors(p.modulus()) != vec![ell] {
                return Err(GroupError::NotASubgroup);
            }
            seen.push(ell);
        }
        Ok(Self { m_part, primes })
    }

    /// Extra primes `ℓ` each at level `ℓ`.
    pub fn with_full_primes(m_part: FiniteMatrixGroup, ells: &[u64]) -> Result<Self, GroupError> {
        Self::new(m_part, ells.iter().map(|&ell| PrimePart::Full { ell, power: 1 }).collect())
    }

    pub fn modulus(&self) -> u64 {
        self.m_part.modulus() * self.primes.iter().map(|p| p.modulus()).product::<u64>()
    }

    fn factors(&self) -> Result<Vec<(Factor, FiniteMatrixGroup)>, GroupError> {
        let mut out = vec![(Factor::MPart, self.m_part.clone())];
        for p in &self.primes {
            out.push((Factor::Prime(p.ell()), p.group()?));
        }
        Ok(out)
    }

    /// The product group at the full truncation modulus.
    pub fn group(&self) -> Result<FiniteMatrixGroup, GroupError> {
        let n = self.modulus();
        let mut gens = Vec::new();
        for (_, f) in self.factors()? {
            let other = ResidueMatrix::identity(n / f.modulus());
            for g in f.generators() {
                gens.push(ResidueMatrix::crt_combine(g, &other)?);
            }
        }
        FiniteMatrixGroup::new(n, gens)
    }

    pub fn order(&self) -> Result<u128, GroupError> {
        let mut o = 1u128;
        for (_, f) in self.factors()? {
            o *= f.order()? as u128;
        }
        Ok(o)
    }
}

/// Projections onto every factor plus the map to `G/[G,G]`; `[G,G]` is the
/// derived subgroup of the truncation, which is the image of the commutator
/// of the open group.
pub fn surjectivity_check(g: &TruncatedAdelicGroup, h: &[ResidueMatrix]) -> Result<SurjVerdict, GroupError> {
    let n = g.modulus();
    let factors = g.factors()?;
    for x in h {
        if x.modulus() != n {
            return Err(GroupError::NotASubgroup);
        }
        for (_, f) in &factors {
            if !f.contains(&x.reduce_mod(f.modulus())?)? {
                return Err(GroupError::NotASubgroup);
            }
        }
    }
    let failures: Vec<Option<Factor>> = factors
        .par_iter()
        .map(|(which, f)| -> Result<Option<Factor>, GroupError> {
            let proj = h
                .iter()
                .map(|x| x.reduce_mod(f.modulus()))
                .collect::<Result<Vec<_>, _>>()?;
            let p = FiniteMatrixGroup::new(f.modulus(), proj)?;
            Ok((p.order()? != f.order()?).then_some(*which))
        })
        .collect::<Result<_, _>>()?;
    if let Some(which) = failures.into_iter().flatten().next() {
        return Ok(SurjVerdict::FailsProjection(which));
    }
    let full = g.group()?;
    let d = full.derived_subgroup()?;
    let with_d: Vec<ResidueMatrix> = h.iter().cloned().chain(d.generators().iter().cloned()).collect();
    let hd = FiniteMatrixGroup::new(n, with_d)?;
    if hd.order()? as u128 != g.order()? {
        return Ok(SurjVerdict::FailsAbelianQuotient);
    }
    Ok(SurjVerdict::Surjective)
}
