//! Families `H_φ = {g ∈ G0 : gH = φ(det g)}` for `H ⊴ G0` with abelian
//! quotient and `φ: (Z/M)^× → G0/H`.

use std::sync::OnceLock;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::arith::{gcd, lcm, mul_mod, prime_divisors, units, valuation};
use crate::matgroup::abelian::{self, AbelianDecomposition, AbelianHom, FiniteAbelianGroup};
use crate::matgroup::{abelian_quotient, unit_generators, AbelianQuotient, FiniteMatrixGroup, GroupError};
use crate::modmatrix::ResidueMatrix;
use crate::opengroup::{CommutatorResult, GroupSpec, OpenSubgroup};

pub struct FamilySpec {
    g0: OpenSubgroup,
    h: OpenSubgroup,
    modulus: u64,
    level: u64,
    g0_at: FiniteMatrixGroup,
    quotient: AbelianQuotient,
    units: AbelianDecomposition<u64>,
    g0_commutator: OnceLock<CommutatorResult>,
}

#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub phi: AbelianHom,
    /// `H_φ` at the level of the spec
    pub group: OpenSubgroup,
    pub v_tag: Option<String>,
    pub mv: Option<u64>,
    pub dissolve_eligible: bool,
}

#[derive(Debug, Clone)]
pub struct FamilyEnumeration {
    pub members: Vec<FamilyMember>,
    /// member indices sharing one group, for every group hit more than once
    pub duplicates: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub enum ShortcutOutcome {
    Applies(CommutatorResult),
    NotApplicable,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySpecJson {
    pub base: GroupSpec,
    pub normal: GroupSpec,
    pub modulus: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberJson {
    pub phi: Vec<Vec<u64>>,
    pub group: GroupSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mv: Option<u64>,
    pub dissolve_eligible: bool,
}

impl FamilyMember {
    pub fn minimal_group(&self) -> Result<OpenSubgroup, GroupError> {
        self.group.minimal_level()
    }

    pub fn with_tag(mut self, v: Option<String>, mv: Option<u64>) -> Self {
        self.v_tag = v;
        self.mv = mv;
        self
    }

    pub fn to_json(&self) -> MemberJson {
        MemberJson {
            phi: self.phi.images.clone(),
            group: self.group.to_spec(),
            v: self.v_tag.clone(),
            mv: self.mv,
            dissolve_eligible: self.dissolve_eligible,
        }
    }
}

impl FamilySpec {
    /// `A = (Z/M)^×`, `ψ = det`. Works at `lcm(level G0, level H, M)`.
    pub fn new(g0: OpenSubgroup, h: OpenSubgroup, modulus: u64) -> Result<Self, GroupError> {
        if modulus == 0 {
            return Err(crate::modmatrix::MatrixError::InvalidModulus.into());
        }
        let level = lcm(lcm(g0.level(), h.level()), modulus);
        let g0_at = g0.image_at(level)?;
        let h_at = h.image_at(level)?;
        if !h_at.is_subgroup_of(&g0_at)? {
            return Err(GroupError::NotASubgroup);
        }
        let quotient = abelian_quotient(&g0_at, Some(&h_at))?;
        let ug = unit_generators(modulus);
        let units = abelian::decompose(1 % modulus, ug.len(), |&x, j| mul_mod(x, ug[j], modulus))?;
        Ok(Self {
            g0,
            h,
            modulus,
            level,
            g0_at,
            quotient,
            units,
            g0_commutator: OnceLock::new(),
        })
    }

    pub fn from_json(spec: &FamilySpecJson) -> Result<Self, GroupError> {
        Self::new(
            OpenSubgroup::from_spec(&spec.base)?,
            OpenSubgroup::from_spec(&spec.normal)?,
            spec.modulus,
        )
    }

    pub fn base(&self) -> &OpenSubgroup {
        &self.g0
    }

    pub fn normal(&self) -> &OpenSubgroup {
        &self.h
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// `A = (Z/M)^×`.
    pub fn units_group(&self) -> &FiniteAbelianGroup {
        &self.units.group
    }

    /// `G0/H`.
    pub fn quotient_group(&self) -> &FiniteAbelianGroup {
        &self.quotient.decomposition.group
    }

    /// Units mod `M` whose logs are the standard basis of `A`.
    pub fn unit_basis(&self) -> &[u64] {
        self.units.basis()
    }

    /// Coordinates of `u mod M` in `A`.
    pub fn unit_log(&self, u: u64) -> Option<Vec<u64>> {
        self.units.log(&(u % self.modulus)).cloned()
    }

    /// Coordinates of `gH` in `G0/H`, for `g` at the spec level.
    pub fn quotient_log(&self, g: &ResidueMatrix) -> Result<Option<Vec<u64>>, GroupError> {
        let g = g.reduce_mod(self.level)?;
        let t = self.g0_at.table()?;
        Ok(t
            .index
            .get(&t.ring.key(&g))
            .map(|&i| self.quotient.cosets.id[i as usize])
            .and_then(|c| self.quotient.decomposition.log(&c).cloned()))
    }

    pub fn homs(&self) -> Vec<AbelianHom> {
        abelian::enumerate_homs(self.units_group(), self.quotient_group())
    }

    pub fn hom(&self, images: Vec<Vec<u64>>) -> Result<AbelianHom, GroupError> {
        AbelianHom::validated(images, self.units_group(), self.quotient_group())
    }

    fn phi_of_det(&self, phi: &AbelianHom, g: &ResidueMatrix) -> Vec<u64> {
        let a = self.unit_log(g.det() % self.modulus).expect("determinant is a unit");
        phi.apply(self.quotient_group(), &a)
    }

    pub fn build_member(&self, phi: &AbelianHom) -> Result<FamilyMember, GroupError> {
        let phi = self.hom(phi.images.clone())?;
        let t = self.g0_at.table()?;
        let logs: FxHashMap<u32, &Vec<u64>> = self.quotient.decomposition.keys().map(|(k, v)| (*k, v)).collect();
        let group = self.g0_at.filter_subgroup(|g| {
            let i = t.index[&t.ring.key(g)] as usize;
            logs[&self.quotient.cosets.id[i]] == &self.phi_of_det(&phi, g)
        })?;
        let dissolve_eligible = self.dissolve_eligible(&phi);
        Ok(FamilyMember {
            phi,
            group: OpenSubgroup::from_image(group),
            v_tag: None,
            mv: None,
            dissolve_eligible,
        })
    }

    /// One member per homomorphism, built in parallel.
    pub fn enumerate_members(&self) -> Result<FamilyEnumeration, GroupError> {
        let members = self
            .homs()
            .par_iter()
            .map(|phi| self.build_member(phi))
            .collect::<Result<Vec<_>, _>>()?;
        let mut by_group: FxHashMap<Vec<ResidueMatrix>, Vec<usize>> = FxHashMap::default();
        for (i, m) in members.iter().enumerate() {
            let mut e = m.group.image().elements()?;
            e.sort_unstable();
            by_group.entry(e).or_default().push(i);
        }
        let mut duplicates: Vec<Vec<usize>> = by_group.into_values().filter(|v| v.len() > 1).collect();
        duplicates.sort();
        Ok(FamilyEnumeration { members, duplicates })
    }

    /// Image of `φ` restricted to the units `u ≡ 1` modulo the part of `M`
    /// prime to `primes`.
    fn restricted_image(&self, phi: &AbelianHom, primes: &[u64]) -> usize {
        let m = self.modulus;
        let e: u64 = primes.iter().map(|&p| p.pow(valuation(m, p))).product();
        let rest = m / e;
        let mut img: FxHashSet<Vec<u64>> = FxHashSet::default();
        for u in units(m) {
            if u % rest == 1 % rest {
                img.insert(phi.apply(self.quotient_group(), &self.unit_log(u).expect("unit")));
            }
        }
        img.len()
    }

    /// Trivial quotient, or `M` coprime to the levels with all primes `>= 5`
    /// and `φ` onto `G0/H`.
    fn dissolve_eligible(&self, phi: &AbelianHom) -> bool {
        let q = self.quotient_group().order() as usize;
        if q == 1 {
            return true;
        }
        let base = lcm(self.g0.level(), self.h.level());
        let primes = prime_divisors(self.modulus);
        gcd(base, self.modulus) == 1
            && primes.iter().all(|&p| p >= 5)
            && self.restricted_image(phi, &primes) == q
    }

    fn g0_commutator(&self) -> Result<&CommutatorResult, GroupError> {
        if let Some(c) = self.g0_commutator.get() {
            return Ok(c);
        }
        let c = self.g0.commutator_open()?;
        Ok(self.g0_commutator.get_or_init(|| c))
    }

    /// Checks `[H_φ, H_φ] = [G0, G0]` for an eligible member.
    pub fn check_dissolve(&self, member: &FamilyMember) -> Result<bool, GroupError> {
        if !member.dissolve_eligible {
            return Err(GroupError::NotEligible("member is not dissolve-eligible".into()));
        }
        let base = self.g0_commutator()?;
        let ours = member.group.commutator_open()?;
        ours.commutator.same_sl_part(&base.commutator)
    }

    /// `[H_φ, H_φ] = [G0, G0]` when `M_v | M`, `φ` factors through
    /// `(Z/M_v)^×`, some prime of `M_v` is prime to the level of `H`, and `φ`
    /// is already onto `G0/H` on the units at those primes.
    pub fn commutator_shortcut(&self, member: &FamilyMember, mv: u64) -> Result<ShortcutOutcome, GroupError> {
        if mv == 0 || self.modulus % mv != 0 {
            return Ok(ShortcutOutcome::NotApplicable);
        }
        let q = self.quotient_group();
        for u in units(self.modulus) {
            if u % mv == 1 % mv
                && member
                    .phi
                    .apply(q, &self.unit_log(u).expect("unit"))
                    .iter()
                    .any(|&c| c != 0)
            {
                return Ok(ShortcutOutcome::NotApplicable);
            }
        }
        let escaping: Vec<u64> = prime_divisors(mv)
            .into_iter()
            .filter(|&p| self.h.level() % p != 0 && p >= 5)
            .collect();
        if escaping.is_empty() || self.restricted_image(&member.phi, &escaping) != q.order() as usize {
            return Ok(ShortcutOutcome::NotApplicable);
        }
        let base = self.g0_commutator()?;
        let l = lcm(base.saturation_level, member.group.level());
        let sl = member.group.sl_order_at(l)?;
        let d = base.commutator.sl_order_at(l)?;
        Ok(ShortcutOutcome::Applies(CommutatorResult {
            commutator: base.commutator.clone(),
            index: (sl / d) as u64,
            greater_than_two: sl / d > 2,
            saturation_level: l,
            full_determinant: member.group.has_full_determinant()?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::{gl2_generators, sl2_generators};

    fn gl2f3_spec() -> FamilySpec {
        let g0 = OpenSubgroup::new(3, gl2_generators(3)).unwrap();
        let h = OpenSubgroup::new(3, sl2_generators(3)).unwrap();
        FamilySpec::new(g0, h, 3).unwrap()
    }

    /// `{g : gH φ(det g)^-1 = H}` by direct search.
    fn kernel_size(spec: &FamilySpec, phi: &AbelianHom) -> usize {
        let q = spec.quotient_group();
        spec.base()
            .image_at(spec.level())
            .unwrap()
            .elements()
            .unwrap()
            .iter()
            .filter(|g| {
                let x = spec.quotient_log(g).unwrap().unwrap();
                let y = spec.phi_of_det(phi, g);
                q.add(&x, &q.neg(&y)) == q.zero()
            })
            .count()
    }

    #[test]
    fn gl2_f3_family() {
        let spec = gl2f3_spec();
        assert_eq!(spec.quotient_group().invariants(), &[2]);
        assert_eq!(spec.units_group().invariants(), &[2]);
        let fam = spec.enumerate_members().unwrap();
        assert_eq!(fam.members.len(), 2);
        for m in &fam.members {
            let order = m.group.image().order().unwrap();
            assert_eq!(order, kernel_size(&spec, &m.phi));
            if m.phi.is_trivial() {
                assert_eq!(order, 24);
                assert!(m.group.same_group(spec.normal()).unwrap());
            } else {
                assert_eq!(order, 48);
            }
        }
        assert!(fam.duplicates.is_empty());
    }

    #[test]
    fn bad_phi_rejected() {
        let spec = gl2f3_spec();
        assert!(matches!(
            spec.build_member(&AbelianHom { images: vec![vec![0], vec![1]] }),
            Err(GroupError::NotAHomomorphism)
        ));
    }

    #[test]
    fn dissolve_on_coprime_modulus() {
        let spec = FamilySpec::new(
            OpenSubgroup::new(2, gl2_generators(2)).unwrap(),
            OpenSubgroup::new(2, vec![ResidueMatrix::new(2, 0, 1, 1, 1).unwrap()]).unwrap(),
            5,
        )
        .unwrap();
        assert_eq!(spec.quotient_group().invariants(), &[2]);
        let fam = spec.enumerate_members().unwrap();
        assert_eq!(fam.members.len(), 2);
        for m in &fam.members {
            if m.phi.is_trivial() {
                assert!(!m.dissolve_eligible);
                assert!(matches!(spec.check_dissolve(m), Err(GroupError::NotEligible(_))));
            } else {
                assert!(m.dissolve_eligible);
                assert!(spec.check_dissolve(m).unwrap());
                let ShortcutOutcome::Applies(s) = spec.commutator_shortcut(m, 5).unwrap() else {
                    panic!("shortcut should apply")
                };
                let direct = m.group.commutator_open().unwrap();
                assert_eq!(s.index, direct.index);
                assert!(s.commutator.same_sl_part(&direct.commutator).unwrap());
            }
        }
        let m = &fam.members[0];
        assert!(matches!(spec.commutator_shortcut(m, 1).unwrap(), ShortcutOutcome::NotApplicable));
    }

    #[test]
    fn hom_counts_match() {
        let spec = FamilySpec::new(
            OpenSubgroup::new(2, gl2_generators(2)).unwrap(),
            OpenSubgroup::new(2, vec![ResidueMatrix::new(2, 0, 1, 1, 1).unwrap()]).unwrap(),
            8,
        )
        .unwrap();
        let fam = spec.enumerate_members().unwrap();
        assert_eq!(fam.members.len(), 4);
        for m in &fam.members {
            assert_eq!(m.group.image().order().unwrap(), kernel_size(&spec, &m.phi));
        }
    }
}
