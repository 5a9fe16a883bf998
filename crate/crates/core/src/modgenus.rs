//! Genus of `X_G` from the action of `SL2(Z/N)` on the right cosets of
//! `±(G ∩ SL2)`.

use serde::{Deserialize, Serialize};

use crate::matgroup::{Closure, FiniteMatrixGroup, GroupError, Ring};
use crate::modmatrix::ResidueMatrix;
use crate::opengroup::OpenSubgroup;

/// Permutations of the cosets induced by `S`, `T` and `ST` (acting on the right).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetAction {
    pub degree: usize,
    pub perm_s: Vec<u32>,
    pub perm_t: Vec<u32>,
    pub perm_st: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusData {
    pub degree: usize,
    pub e2: usize,
    pub e3: usize,
    pub e_inf: usize,
    pub genus: u64,
}

pub fn s_matrix(n: u64) -> ResidueMatrix {
    ResidueMatrix::new(n, 0, -1, 1, 0).expect("valid")
}

pub fn t_matrix(n: u64) -> ResidueMatrix {
    ResidueMatrix::new(n, 1, 1, 0, 1).expect("valid")
}

/// Action on cosets of `±G ∩ SL2` at the level of `G`.
pub fn coset_action(g: &OpenSubgroup) -> Result<CosetAction, GroupError> {
    coset_action_sl2(g.intersect_sl2()?)
}

/// Action on cosets of `±H`, for `H` a subgroup of `SL2(Z/N)`.
pub fn coset_action_sl2(h: &FiniteMatrixGroup) -> Result<CosetAction, GroupError> {
    let n = h.modulus();
    let ring = Ring::new(n)?;
    let mut hk: Vec<u64> = h.generators().iter().map(|x| ring.key(x)).collect();
    hk.push(ring.key(&ResidueMatrix::scalar(n, -1)));
    let pm = Closure::from_gens(ring, &hk)?;
    let sl = FiniteMatrixGroup::sl2(n)?;
    let st = sl.table()?;
    if pm.elems.iter().any(|&x| !st.contains(x)) {
        return Err(GroupError::NotASubgroup);
    }

    let mut id = vec![u32::MAX; st.len()];
    let mut reps: Vec<u64> = Vec::new();
    for i in 0..st.len() {
        if id[i] != u32::MAX {
            continue;
        }
        let c = reps.len() as u32;
        let x = st.elems[i];
        for &y in &pm.elems {
            id[st.index[&ring.mul(y, x)] as usize] = c;
        }
        reps.push(x);
    }
    let perm = |g: &ResidueMatrix| -> Vec<u32> {
        let gk = ring.key(g);
        reps.iter()
            .map(|&r| id[st.index[&ring.mul(r, gk)] as usize])
            .collect()
    };
    let s = s_matrix(n);
    let t = t_matrix(n);
    Ok(CosetAction {
        degree: reps.len(),
        perm_s: perm(&s),
        perm_t: perm(&t),
        perm_st: perm(&s.mul(&t)?),
    })
}

pub fn fixed_points(p: &[u32]) -> usize {
    p.iter().enumerate().filter(|(i, &x)| *i as u32 == x).count()
}

pub fn cycle_count(p: &[u32]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut cycles = 0;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i] as usize;
        }
    }
    cycles
}

impl CosetAction {
    pub fn genus_data(&self) -> Result<GenusData, GroupError> {
        let d = self.degree;
        let e2 = fixed_points(&self.perm_s);
        let e3 = fixed_points(&self.perm_st);
        let e_inf = cycle_count(&self.perm_t);
        let twelve_g = 12 + d as i64 - 3 * e2 as i64 - 4 * e3 as i64 - 6 * e_inf as i64;
        if twelve_g < 0 || twelve_g % 12 != 0 {
            return Err(GroupError::NonIntegralGenus(twelve_g));
        }
        Ok(GenusData {
            degree: d,
            e2,
            e3,
            e_inf,
            genus: (twelve_g / 12) as u64,
        })
    }
}

/// `g = 1 + d/12 - e2/4 - e3/3 - e_inf/2`.
pub fn genus(g: &OpenSubgroup) -> Result<GenusData, GroupError> {
    coset_action(g)?.genus_data()
}

pub fn genus_sl2(h: &FiniteMatrixGroup) -> Result<GenusData, GroupError> {
    coset_action_sl2(h)?.genus_data()
}
