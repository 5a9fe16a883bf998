//! Open subgroups of `GL2(Ẑ)` presented as full preimages of a finite image
//! at some level, and the commutator-subgroup engine.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::arith::{divisors, gl2_order, lcm, prime_divisors, sl2_order, valuation};
use crate::matgroup::{gl2_generators, FiniteMatrixGroup, GroupError};
use crate::modmatrix::{MatrixError, ResidueMatrix};

/// Largest exponent of a prime the saturation loop may reach.
pub const SATURATION_EXPONENT_CAP: u32 = 12;

/// The full preimage in `GL2(Ẑ)` of `<gens> mod level`.
#[derive(Debug, Clone)]
pub struct OpenSubgroup {
    level: u64,
    gens: Vec<ResidueMatrix>,
    image: FiniteMatrixGroup,
    order_hint: OnceLock<usize>,
    sl_part: OnceLock<FiniteMatrixGroup>,
    det_image: OnceLock<Vec<u64>>,
}

/// JSON form: `{"level": m, "gens": [[a,b,c,d], "[[a,b],[c,d]] mod m", ...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub level: u64,
    pub gens: Vec<GenSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GenSpec {
    Entries([i64; 4]),
    Literal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexClass {
    IndexOne,
    IndexTwo,
    Other(u64),
}

impl IndexClass {
    pub fn from_index(n: u64) -> Self {
        match n {
            1 => Self::IndexOne,
            2 => Self::IndexTwo,
            n => Self::Other(n),
        }
    }
}

/// `[G,G]` with its index in `G ∩ SL2(Ẑ)`.
#[derive(Debug, Clone)]
pub struct CommutatorResult {
    pub commutator: OpenSubgroup,
    pub index: u64,
    pub greater_than_two: bool,
    pub saturation_level: u64,
    pub full_determinant: bool,
}

impl CommutatorResult {
    pub fn index_class(&self) -> IndexClass {
        IndexClass::from_index(self.index)
    }
}

impl OpenSubgroup {
    pub fn new(level: u64, gens: Vec<ResidueMatrix>) -> Result<Self, GroupError> {
        let image = FiniteMatrixGroup::new(level, gens.clone())?;
        Ok(Self {
            level,
            gens,
            image,
            order_hint: OnceLock::new(),
            sl_part: OnceLock::new(),
            det_image: OnceLock::new(),
        })
    }

    /// `GL2(Ẑ)` itself.
    pub fn full() -> Self {
        Self::new(1, vec![]).expect("level 1")
    }

    pub(crate) fn from_image(image: FiniteMatrixGroup) -> Self {
        let level = image.modulus();
        let gens = image.generators().to_vec();
        Self {
            level,
            gens,
            image,
            order_hint: OnceLock::new(),
            sl_part: OnceLock::new(),
            det_image: OnceLock::new(),
        }
    }

    pub fn from_spec(spec: &GroupSpec) -> Result<Self, GroupError> {
        let gens = spec
            .gens
            .iter()
            .map(|g| match g {
                GenSpec::Entries([a, b, c, d]) => ResidueMatrix::new(spec.level, *a, *b, *c, *d),
                GenSpec::Literal(s) => {
                    let m: ResidueMatrix = s.parse()?;
                    if m.modulus() == spec.level {
                        Ok(m)
                    } else {
                        Err(MatrixError::ModulusMismatch(spec.level, m.modulus()))
                    }
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(spec.level, gens)
    }

    pub fn to_spec(&self) -> GroupSpec {
        GroupSpec {
            level: self.level,
            gens: self
                .gens
                .iter()
                .map(|g| GenSpec::Entries(g.entries().map(|x| x as i64)))
                .collect(),
        }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn gens(&self) -> &[ResidueMatrix] {
        &self.gens
    }

    /// The image modulo the presented level.
    pub fn image(&self) -> &FiniteMatrixGroup {
        &self.image
    }

    pub fn image_order(&self) -> Result<usize, GroupError> {
        if let Some(&n) = self.order_hint.get() {
            return Ok(n);
        }
        let n = self.image.order()?;
        Ok(*self.order_hint.get_or_init(|| n))
    }

    /// Index in `GL2(Ẑ)`.
    pub fn index(&self) -> Result<u128, GroupError> {
        Ok(gl2_order(self.level) / self.image_order()? as u128)
    }

    /// Generators of the image at a multiple `big` of the level.
    pub fn lift_generators(&self, big: u64) -> Result<Vec<ResidueMatrix>, GroupError> {
        lift_generators(self.level, &self.gens, big)
    }

    /// The image modulo a multiple of the level (lazy).
    pub fn image_at(&self, big: u64) -> Result<FiniteMatrixGroup, GroupError> {
        if big == self.level {
            return Ok(self.image.clone());
        }
        FiniteMatrixGroup::new(big, self.lift_generators(big)?)
    }

    /// `|G mod big|` from the level-`m` image.
    pub fn order_at(&self, big: u64) -> Result<u128, GroupError> {
        check_multiple(self.level, big)?;
        Ok(self.image_order()? as u128 * gl2_order(big) / gl2_order(self.level))
    }

    /// `|(G ∩ SL2) mod big|`.
    pub fn sl_order_at(&self, big: u64) -> Result<u128, GroupError> {
        check_multiple(self.level, big)?;
        Ok(self.intersect_sl2()?.order()? as u128 * sl2_order(big) / sl2_order(self.level))
    }

    pub fn intersect_sl2(&self) -> Result<&FiniteMatrixGroup, GroupError> {
        if let Some(s) = self.sl_part.get() {
            return Ok(s);
        }
        let s = self.image.intersect_sl2()?;
        Ok(self.sl_part.get_or_init(|| s))
    }

    /// Image of `det` in `(Z/level)^x`, sorted.
    pub fn det_image(&self) -> Result<&[u64], GroupError> {
        if let Some(d) = self.det_image.get() {
            return Ok(d);
        }
        let d = self.image.det_image()?;
        Ok(self.det_image.get_or_init(|| d))
    }

    pub fn has_full_determinant(&self) -> Result<bool, GroupError> {
        Ok(self.det_image()?.len() as u64 == crate::arith::euler_phi(self.level))
    }

    pub fn contains_minus_i(&self) -> Result<bool, GroupError> {
        self.image.contains(&ResidueMatrix::scalar(self.level, -1))
    }

    /// `±G`.
    pub fn with_minus_i(&self) -> Result<Self, GroupError> {
        let mut gens = self.gens.clone();
        gens.push(ResidueMatrix::scalar(self.level, -1));
        Self::new(self.level, gens)
    }

    pub fn transpose_group(&self) -> Self {
        let gens = self.gens.iter().map(|g| g.transpose()).collect();
        Self::new(self.level, gens).expect("transposes stay invertible")
    }

    pub fn conjugate_by(&self, g: &ResidueMatrix) -> Result<Self, GroupError> {
        Ok(Self::from_image(self.image.conjugate_by(g)?))
    }

    /// Same group presented at a multiple of its level.
    pub fn at_level(&self, big: u64) -> Result<Self, GroupError> {
        Self::new(big, self.lift_generators(big)?)
    }

    /// Same group presented at a divisor `small` of the level; only valid if
    /// the group is the full preimage of its image there.
    pub fn reduce_to(&self, small: u64) -> Result<Self, GroupError> {
        let gens = self
            .gens
            .iter()
            .map(|g| g.reduce_mod(small))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(small, gens)
    }

    /// Whether `G` is the full preimage of its image mod the divisor `small`.
    pub fn is_full_preimage_from(&self, small: u64) -> Result<bool, GroupError> {
        let reduced = self.reduce_to(small)?;
        Ok(reduced.index()? == self.index()?)
    }

    /// The same group at its true level.
    pub fn minimal_level(&self) -> Result<Self, GroupError> {
        for d in divisors(self.level) {
            if d == self.level {
                break;
            }
            if self.is_full_preimage_from(d)? {
                let g = self.reduce_to(d)?;
                let small = g.image.small_generators()?;
                return Self::new(d, small);
            }
        }
        Ok(self.clone())
    }

    pub fn is_subgroup_of(&self, other: &Self) -> Result<bool, GroupError> {
        let l = lcm(self.level, other.level);
        let target = other.image_at(l)?;
        for g in self.lift_generators(l)? {
            if !target.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_group(&self, other: &Self) -> Result<bool, GroupError> {
        Ok(self.index()? == other.index()? && self.is_subgroup_of(other)?)
    }

    /// `(G ∩ SL2) mod big`, generated by determinant-one lifts.
    pub fn sl_image_at(&self, big: u64) -> Result<FiniteMatrixGroup, GroupError> {
        let sl = self.intersect_sl2()?;
        FiniteMatrixGroup::new(big, lift_generators_sl2(self.level, sl.generators(), big)?)
    }

    /// Equality of `G ∩ SL2` and `G' ∩ SL2`.
    pub fn same_sl_part(&self, other: &Self) -> Result<bool, GroupError> {
        let l = lcm(self.level, other.level);
        if self.sl_order_at(l)? != other.sl_order_at(l)? {
            return Ok(false);
        }
        let target = other.sl_image_at(l)?;
        let sl = self.intersect_sl2()?;
        for g in lift_generators_sl2(self.level, sl.generators(), l)? {
            if !target.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `[G,G]` with the exact index in `G ∩ SL2(Ẑ)`.
    pub fn commutator_open(&self) -> Result<CommutatorResult, GroupError> {
        let full_determinant = self.has_full_determinant()?;
        let mut total_level = 1u64;
        let mut index = 1u64;
        let mut parts: Vec<(u64, FiniteMatrixGroup)> = Vec::new();
        for block in self.blocks()? {
            let (l, d, idx) = block.saturate()?;
            total_level *= l;
            index *= idx;
            parts.push((l, d));
        }
        let mut gens = Vec::new();
        let mut order = 1usize;
        for (l, d) in &parts {
            let other = total_level / l;
            order = order.saturating_mul(d.order()?);
            for g in d.small_generators()? {
                gens.push(ResidueMatrix::crt_combine(&g, &ResidueMatrix::identity(other))?);
            }
        }
        let commutator = Self::new(total_level, gens)?;
        let _ = commutator.order_hint.set(order);
        Ok(CommutatorResult {
            commutator,
            index,
            greater_than_two: index > 2,
            saturation_level: total_level,
            full_determinant,
        })
    }

    /// Index class of `[G^t, G^t]` in `G^t ∩ SL2(Ẑ)`.
    pub fn commutator_index_class(&self) -> Result<IndexClass, GroupError> {
        Ok(self.transpose_group().commutator_open()?.index_class())
    }

    /// Splits `G` into direct factors over disjoint prime sets, including a
    /// full `GL2(Z_l)` factor for `l` in {2, 3} not dividing the level.
    fn blocks(&self) -> Result<Vec<Block>, GroupError> {
        let mut out = Vec::new();
        let mut rest = self.clone();
        for p in prime_divisors(self.level) {
            let q = p.pow(valuation(self.level, p));
            if q == rest.level {
                break;
            }
            let (gq, gr) = (rest.reduce_to(q)?, rest.reduce_to(rest.level / q)?);
            if gq.image_order()? as u128 * gr.image_order()? as u128 == rest.image_order()? as u128 {
                out.push(Block::new(q, gq.gens.clone(), vec![p]));
                rest = gr;
            }
        }
        if rest.level > 1 {
            out.push(Block::new(rest.level, rest.gens.clone(), prime_divisors(rest.level)));
        }
        for l in [2u64, 3] {
            if self.level % l != 0 {
                out.push(Block::new(1, vec![], vec![l]));
            }
        }
        Ok(out)
    }
}

fn check_multiple(small: u64, big: u64) -> Result<(), GroupError> {
    if big % small != 0 {
        return Err(MatrixError::NotADivisor {
            m: small,
            modulus: big,
        }
        .into());
    }
    Ok(())
}

/// Generators of the image at `big` of the full preimage of `<gens> mod level`.
pub fn lift_generators(
    level: u64,
    gens: &[ResidueMatrix],
    big: u64,
) -> Result<Vec<ResidueMatrix>, GroupError> {
    check_multiple(level, big)?;
    let ml: u64 = prime_divisors(level)
        .into_iter()
        .map(|p| p.pow(valuation(big, p)))
        .product();
    let r = big / ml;
    let id_ml = ResidueMatrix::identity(ml);
    let id_r = ResidueMatrix::identity(r);
    let mut out = Vec::new();
    for g in gens {
        let x = g.lift_to(ml)?;
        out.push(ResidueMatrix::crt_combine(&x, &id_r)?);
    }
    if ml > level {
        for d in divisors(ml / level) {
            let a = level * d;
            if a >= ml {
                continue;
            }
            for pos in 0..4 {
                let mut e = [1u64, 0, 0, 1];
                e[pos] = (e[pos] + a) % ml;
                let k = ResidueMatrix::from_entries(ml, e)?;
                out.push(ResidueMatrix::crt_combine(&k, &id_r)?);
            }
        }
    }
    if r > 1 {
        for h in gl2_generators(r) {
            out.push(ResidueMatrix::crt_combine(&id_ml, &h)?);
        }
    }
    Ok(out)
}

/// Generators of the image at `big` of `{g in SL2(Ẑ) : g mod level in <gens>}`,
/// for `gens` of determinant one.
pub fn lift_generators_sl2(
    level: u64,
    gens: &[ResidueMatrix],
    big: u64,
) -> Result<Vec<ResidueMatrix>, GroupError> {
    check_multiple(level, big)?;
    let ml: u64 = prime_divisors(level)
        .into_iter()
        .map(|p| p.pow(valuation(big, p)))
        .product();
    let r = big / ml;
    let id_ml = ResidueMatrix::identity(ml);
    let id_r = ResidueMatrix::identity(r);
    let mut out = Vec::new();
    for g in gens {
        let x = g.lift_to(ml)?;
        let fix = crate::arith::inv_mod(x.det(), ml).ok_or(MatrixError::NotInvertible {
            det: x.det(),
            modulus: ml,
        })?;
        let x = x.mul(&ResidueMatrix::from_entries(ml, [fix, 0, 0, 1])?)?;
        out.push(ResidueMatrix::crt_combine(&x, &id_r)?);
    }
    if ml > level {
        for d in divisors(ml / level) {
            let a = level * d;
            if a >= ml {
                continue;
            }
            let u = (1 + a) % ml;
            let ui = crate::arith::inv_mod(u, ml).expect("1 + a is a unit");
            for e in [[1, a, 0, 1], [1, 0, a, 1], [u, 0, 0, ui]] {
                let k = ResidueMatrix::from_entries(ml, e)?;
                out.push(ResidueMatrix::crt_combine(&k, &id_r)?);
            }
        }
    }
    if r > 1 {
        for h in crate::matgroup::sl2_generators(r) {
            out.push(ResidueMatrix::crt_combine(&id_ml, &h)?);
        }
    }
    Ok(out)
}

/// Derived subgroup of the image at `big` without materializing the image.
pub fn derived_at(level: u64, gens: &[ResidueMatrix], big: u64) -> Result<FiniteMatrixGroup, GroupError> {
    let lifted = lift_generators(level, gens, big)?;
    FiniteMatrixGroup::new(big, lifted)?.derived_subgroup()
}

struct Block {
    level: u64,
    gens: Vec<ResidueMatrix>,
    primes: Vec<u64>,
}

impl Block {
    fn new(level: u64, gens: Vec<ResidueMatrix>, primes: Vec<u64>) -> Self {
        Self { level, gens, primes }
    }

    /// For `p >= 5`: whether `G ∩ (1 x SL2(Z_p))` maps onto `SL2(F_p)`, in
    /// which case it is all of `SL2(Z_p)` and lies in `[G,G]`.
    fn settled(&self, sl: &FiniteMatrixGroup, p: u64) -> Result<bool, GroupError> {
        if p < 5 || self.level % p != 0 {
            return Ok(false);
        }
        let q = p.pow(valuation(self.level, p));
        let rest = self.level / q;
        let mut seen = rustc_hash::FxHashSet::default();
        for g in sl.elements()? {
            if g.reduce_mod(rest)?.is_identity() {
                seen.insert(g.reduce_mod(p)?);
            }
        }
        Ok(seen.len() as u128 == sl2_order(p))
    }

    fn saturate(&self) -> Result<(u64, FiniteMatrixGroup, u64), GroupError> {
        let sl_part = FiniteMatrixGroup::new(self.level, self.gens.clone())?.intersect_sl2()?;
        let sl_base = sl_part.order()? as u128;
        let mut ramp = Vec::new();
        let mut l = self.level;
        for &p in &self.primes {
            if !self.settled(&sl_part, p)? {
                ramp.push(p);
                l *= p;
            }
        }
        let eval = |l: u64| -> Result<(FiniteMatrixGroup, u64), GroupError> {
            let d = derived_at(self.level, &self.gens, l).map_err(|e| match e {
                GroupError::ResourceExceeded { .. } | GroupError::ModulusTooLarge(_) => {
                    GroupError::SaturationExceeded { partial_level: l }
                }
                e => e,
            })?;
            let sl = sl_base * sl2_order(l) / sl2_order(self.level);
            Ok((d.clone(), (sl / d.order()? as u128) as u64))
        };
        let (mut d, mut idx) = eval(l)?;
        loop {
            let mut changed = false;
            for &p in &ramp {
                let cap = SATURATION_EXPONENT_CAP.max(valuation(self.level, p) + 1);
                loop {
                    if valuation(l, p) >= cap {
                        return Err(GroupError::SaturationExceeded { partial_level: l });
                    }
                    let next = l * p;
                    let (d2, idx2) = eval(next)?;
                    let full_preimage = d2.order()? as u128 * sl2_order(l)
                        == d.order()? as u128 * sl2_order(next);
                    if idx2 == idx && full_preimage {
                        break;
                    }
                    l = next;
                    d = d2;
                    idx = idx2;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Ok((l, d, idx))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(n: u64, a: i64, b: i64, c: i64, d: i64) -> ResidueMatrix {
        ResidueMatrix::new(n, a, b, c, d).unwrap()
    }

    #[test]
    fn sl2_parts() {
        let g = OpenSubgroup::new(2, gl2_generators(2)).unwrap();
        assert_eq!(g.intersect_sl2().unwrap().order().unwrap(), 6);
        let scal = OpenSubgroup::new(5, vec![ResidueMatrix::scalar(5, 2)]).unwrap();
        let s = scal.intersect_sl2().unwrap();
        assert_eq!(s.order().unwrap(), 2);
        assert!(s.contains(&ResidueMatrix::scalar(5, 4)).unwrap());
        assert_eq!(OpenSubgroup::full().intersect_sl2().unwrap().order().unwrap(), 1);
    }

    #[test]
    fn determinants() {
        let g = OpenSubgroup::new(5, gl2_generators(5)).unwrap();
        assert_eq!(g.det_image().unwrap(), &[1, 2, 3, 4]);
        let s = OpenSubgroup::new(4, crate::matgroup::sl2_generators(4)).unwrap();
        assert_eq!(s.det_image().unwrap(), &[1]);
        let d = OpenSubgroup::new(8, (1..8).step_by(2).map(|a| m(8, a, 0, 0, 1)).collect()).unwrap();
        assert!(d.has_full_determinant().unwrap());
    }

    #[test]
    fn transposes() {
        let b = OpenSubgroup::new(3, vec![m(3, 1, 1, 0, 1), m(3, 2, 0, 0, 1), m(3, 1, 0, 0, 2)]).unwrap();
        let bt = b.transpose_group();
        let lower = FiniteMatrixGroup::new(3, vec![m(3, 1, 0, 1, 1), m(3, 2, 0, 0, 1), m(3, 1, 0, 0, 2)]).unwrap();
        assert!(bt.image().same_elements(&lower).unwrap());
        assert!(bt.transpose_group().image().same_elements(b.image()).unwrap());
    }

    #[test]
    fn lifting_matches_counts() {
        let b = OpenSubgroup::new(2, vec![m(2, 1, 1, 0, 1)]).unwrap();
        for big in [4u64, 6, 8, 12, 24] {
            let lifted = b.image_at(big).unwrap();
            assert_eq!(lifted.order().unwrap() as u128, b.order_at(big).unwrap());
            assert!(lifted.reduce_mod(2).unwrap().same_elements(b.image()).unwrap());
        }
        let full = OpenSubgroup::full();
        assert_eq!(full.image_at(6).unwrap().order().unwrap() as u128, gl2_order(6));
    }

    #[test]
    fn minimal_levels() {
        let g = OpenSubgroup::new(6, gl2_generators(6)).unwrap();
        assert_eq!(g.minimal_level().unwrap().level(), 1);
        // kernel of reduction to level 2, presented at level 4
        let k = OpenSubgroup::new(2, vec![]).unwrap().at_level(4).unwrap();
        assert_eq!(k.minimal_level().unwrap().level(), 2);
        let c = OpenSubgroup::new(4, vec![m(4, 1, 1, 0, 1), m(4, 3, 0, 0, 1), m(4, 1, 0, 0, 3)]).unwrap();
        assert_eq!(c.minimal_level().unwrap().level(), 4);
    }

    #[test]
    fn full_group_commutator_has_index_two() {
        let r = OpenSubgroup::full().commutator_open().unwrap();
        assert_eq!(r.index, 2);
        assert_eq!(r.index_class(), IndexClass::IndexTwo);
        assert_eq!(OpenSubgroup::full().commutator_index_class().unwrap(), IndexClass::IndexTwo);
    }

    #[test]
    fn commutator_matches_brute_force_at_saturation_level() {
        let groups = vec![
            OpenSubgroup::new(4, vec![m(4, 1, 1, 0, 1), m(4, 3, 0, 0, 1), m(4, 1, 0, 0, 3)]).unwrap(),
            OpenSubgroup::new(2, vec![m(2, 1, 1, 0, 1)]).unwrap(),
            OpenSubgroup::new(3, vec![m(3, 1, 1, 0, 1), m(3, 2, 0, 0, 1)]).unwrap(),
        ];
        for g in groups {
            let r = g.commutator_open().unwrap();
            let l = r.saturation_level;
            let brute = g.image_at(l).unwrap();
            // commutators of the full element list against a spread of elements
            let els = brute.elements().unwrap();
            let step = (els.len() / 60).max(1);
            let comms: Vec<ResidueMatrix> = els
                .iter()
                .flat_map(|x| {
                    els.iter().step_by(step).map(move |y| {
                        x.mul(y).unwrap().mul(&x.inverse().unwrap()).unwrap().mul(&y.inverse().unwrap()).unwrap()
                    })
                })
                .collect();
            let d = brute.normal_closure_of(&comms).unwrap();
            assert!(d.same_elements(r.commutator.image()).unwrap());
            let sl = brute.intersect_sl2().unwrap().order().unwrap();
            assert_eq!(sl as u64, r.index * d.order().unwrap() as u64);
        }
    }

    #[test]
    fn sl_lifts_match_filtered_images() {
        let g = OpenSubgroup::new(4, vec![m(4, 1, 1, 0, 1), m(4, 3, 0, 0, 1), m(4, 1, 2, 0, 3)]).unwrap();
        for big in [8u64, 12, 16, 24] {
            let direct = g.image_at(big).unwrap().intersect_sl2().unwrap();
            let lifted = g.sl_image_at(big).unwrap();
            assert!(direct.same_elements(&lifted).unwrap());
            assert_eq!(lifted.order().unwrap() as u128, g.sl_order_at(big).unwrap());
        }
        assert!(g.same_sl_part(&g.at_level(8).unwrap()).unwrap());
    }

    #[test]
    fn spec_round_trip() {
        let json = r#"{"level": 4, "gens": [[1,1,0,1], "[[3,0],[0,1]] mod 4"]}"#;
        let spec: GroupSpec = serde_json::from_str(json).unwrap();
        let g = OpenSubgroup::from_spec(&spec).unwrap();
        assert_eq!(g.gens()[1], m(4, 3, 0, 0, 1));
        let back = OpenSubgroup::from_spec(&g.to_spec()).unwrap();
        assert!(back.same_group(&g).unwrap());
    }
}
