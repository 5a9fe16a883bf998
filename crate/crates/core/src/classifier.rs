//! Catalog ingestion, the commutator-index classification pipeline, curve
//! membership and report emission.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{divisors, kronecker, lcm, prime_divisors, sl2_order};
use crate::arithcond::{eval_condition, ConditionTrace, VCondition};
use crate::families::{FamilySpec, ShortcutOutcome};
use crate::matgroup::{is_conjugate_subgroup, FiniteMatrixGroup, GroupError};
use crate::modgenus::genus;
use crate::modmatrix::ResidueMatrix;
use crate::opengroup::{CommutatorResult, GroupSpec, IndexClass, OpenSubgroup};
use crate::ratfunc::{
    moebius_equivalent, parse_rational, q, solve_left_factor, MapCatalogEntry, Proj, RatError, RationalMap,
};

/// The catalog shipped with the crate.
pub const SAMPLE_CATALOG: &str = include_str!("../data/sample_catalog.json");

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("catalog schema error: {0}")]
    Schema(String),
    #[error("invariant violation in {label}: {which}")]
    InvariantViolation { label: String, which: String },
    #[error("no supergroup of {0} matches its u-map")]
    NoMatch(String),
    #[error("{0} carries no automorphism orders")]
    MissingAutomorphismData(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Rat(#[from] RatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A rational map given either as an expression in `t` or as coefficient lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Expr(String),
    Coeffs(RationalMap),
}

impl MapSpec {
    pub fn to_map(&self) -> Result<RationalMap, RatError> {
        match self {
            MapSpec::Expr(s) => s.parse(),
            MapSpec::Coeffs(m) => Ok(m.clone()),
        }
    }
}

/// `φ: (Z/M_v)^× → G0/G`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiSpec {
    /// `u ↦ [kronecker(d, u) = -1]` into a quotient of order 2
    QuadraticCharacter(i64),
    /// images of the basis returned by `FamilySpec::unit_basis`
    Images(Vec<Vec<u64>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemberData {
    pub v: String,
    pub mv: u64,
    pub phi: PhiSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default)]
    pub members: Vec<MemberData>,
}

/// One row of a theorem table: the parameter condition for a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub theorem: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family_index: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    pub condition: VCondition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawEntry {
    pub label: String,
    pub group: GroupSpec,
    pub pi: MapSpec,
    pub u: MapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub automorphism_orders: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyData>,
    #[serde(default)]
    pub rows: Vec<TableRow>,
    #[serde(default)]
    pub sample_v: Vec<String>,
    #[serde(default)]
    pub in_exceptional_set_s: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogFile {
    pub entries: Vec<RawEntry>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub raw: RawEntry,
    pub group: OpenSubgroup,
    pub pi: RationalMap,
    pub u: RationalMap,
    /// `pi = j ∘ u`
    pub j: RationalMap,
}

impl CatalogEntry {
    pub fn label(&self) -> &str {
        &self.raw.label
    }

    pub fn level(&self) -> u64 {
        self.group.level()
    }

    /// `|A|`, read off as the degree of `u`.
    pub fn automorphism_count(&self) -> usize {
        self.u.degree()
    }

    fn from_raw(raw: RawEntry) -> Result<Self, ClassifyError> {
        let label = raw.label.clone();
        let violation = |which: String| ClassifyError::InvariantViolation {
            label: label.clone(),
            which,
        };
        let group = OpenSubgroup::from_spec(&raw.group).map_err(|e| violation(format!("group: {e}")))?;
        let pi = raw.pi.to_map().map_err(|e| violation(format!("pi: {e}")))?;
        let u = raw.u.to_map().map_err(|e| violation(format!("u: {e}")))?;
        let g = genus(&group).map_err(|e| violation(format!("genus: {e}")))?;
        if g.genus != 0 {
            return Err(violation(format!("genus {} != 0", g.genus)));
        }
        if g.degree != pi.degree() {
            return Err(violation(format!("degree of pi is {} but the index is {}", pi.degree(), g.degree)));
        }
        let j = solve_left_factor(&pi, &u).map_err(|e| violation(format!("J not recoverable: {e}")))?;
        Ok(Self { raw, group, pi, u, j })
    }
}

/// Parsed catalog: valid entries plus every invariant violation.
#[derive(Debug, Clone, Default)]
pub struct CatalogLoad {
    pub entries: Vec<CatalogEntry>,
    pub violations: Vec<(String, String)>,
}

pub fn parse_catalog(text: &str) -> Result<CatalogLoad, ClassifyError> {
    let file: CatalogFile = serde_json::from_str(text).map_err(|e| ClassifyError::Schema(e.to_string()))?;
    let mut out = CatalogLoad::default();
    let mut seen: FxHashSet<String> = FxHashSet::default();
    let results: Vec<Result<CatalogEntry, ClassifyError>> =
        file.entries.into_par_iter().map(CatalogEntry::from_raw).collect();
    for r in results {
        match r {
            Ok(e) => {
                if seen.insert(e.label().to_string()) {
                    out.entries.push(e);
                } else {
                    out.violations.push((e.label().to_string(), "duplicate label".into()));
                }
            }
            Err(ClassifyError::InvariantViolation { label, which }) => out.violations.push((label, which)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Loads and validates a catalog, failing on the first invariant violation.
pub fn load_catalog(path: impl AsRef<Path>) -> Result<Vec<CatalogEntry>, ClassifyError> {
    let load = parse_catalog(&std::fs::read_to_string(path)?)?;
    if let Some((label, which)) = load.violations.into_iter().next() {
        return Err(ClassifyError::InvariantViolation { label, which });
    }
    Ok(load.entries)
}

/// Subgroups `K` of `SL2(Z/N)` with `S ⊆ K ⊆ N(S)` and `[K : S] = index`.
pub fn sl_supergroups(s: &FiniteMatrixGroup, index: usize) -> Result<Vec<FiniteMatrixGroup>, GroupError> {
    let n = s.modulus();
    if index == 1 {
        return Ok(vec![s.clone()]);
    }
    let target = s.order()? * index;
    let normalizer: Vec<ResidueMatrix> = FiniteMatrixGroup::sl2(n)?
        .elements()?
        .into_iter()
        .filter(|x| {
            let xi = x.inverse().expect("unit determinant");
            s.generators().iter().all(|g| x.mul(g).and_then(|y| y.mul(&xi)).map_or(false, |y| s.contains(&y).unwrap_or(false)))
        })
        .collect();
    let mut seen: FxHashSet<Vec<ResidueMatrix>> = FxHashSet::default();
    let mut queue = vec![s.clone()];
    let mut found = Vec::new();
    while let Some(k) = queue.pop() {
        for x in &normalizer {
            if k.contains(x)? {
                continue;
            }
            let mut gens = k.generators().to_vec();
            gens.push(x.clone());
            let bigger = FiniteMatrixGroup::new(n, gens)?;
            let o = bigger.order()?;
            if o > target || target % o != 0 {
                continue;
            }
            let mut key = bigger.elements()?;
            key.sort_unstable();
            if !seen.insert(key) {
                continue;
            }
            if o == target {
                found.push(bigger);
            } else {
                queue.push(bigger);
            }
        }
    }
    Ok(found)
}

#[derive(Debug, Clone)]
pub struct G0Match {
    pub group: OpenSubgroup,
    /// catalog label (or `j-line`) supplying `π_{G0}`
    pub source: String,
    /// `J = π_{G0} ∘ g`
    pub g: RationalMap,
    pub all_sources: Vec<String>,
}

fn canonical_gens(g: &OpenSubgroup) -> Result<Vec<[u64; 4]>, GroupError> {
    let mut v: Vec<[u64; 4]> = g.image().small_generators()?.iter().map(|m| m.entries()).collect();
    v.sort_unstable();
    Ok(v)
}

/// Catalog models whose `±(G ∩ SL2)` is conjugate to `±k`, with the j-line for
/// `k = SL2(Z/N)`.
fn models_for(k: &FiniteMatrixGroup, catalog: &[CatalogEntry]) -> Result<Vec<(String, RationalMap)>, GroupError> {
    let n = k.modulus();
    let mut out = Vec::new();
    if k.order()? as u128 == sl2_order(n) {
        out.push(("j-line".to_string(), RationalMap::identity()));
    }
    let k_pm = {
        let mut gens = k.generators().to_vec();
        gens.push(ResidueMatrix::scalar(n, -1));
        OpenSubgroup::new(n, gens)?
    };
    for e in catalog {
        let other = e.group.with_minus_i()?;
        let l = lcm(n, other.level());
        if k_pm.sl_order_at(l)? != other.sl_order_at(l)? {
            continue;
        }
        let a = k_pm.sl_image_at(l)?;
        let b = other.sl_image_at(l)?;
        if is_conjugate_subgroup(&a, &b)?.is_some() {
            out.push((e.label().to_string(), e.pi.clone()));
        }
    }
    Ok(out)
}

/// The group `G0 ⊇ G` with `G0 ∩ SL2 ⊇ G ∩ SL2` of index `|A|`, genus 0, and a
/// model Möbius-equivalent to `J`.
pub fn recover_g0(entry: &CatalogEntry, catalog: &[CatalogEntry]) -> Result<G0Match, ClassifyError> {
    let a = entry.automorphism_count();
    if a == 1 {
        return Ok(G0Match {
            group: entry.group.clone(),
            source: entry.label().to_string(),
            g: RationalMap::identity(),
            all_sources: vec![entry.label().to_string()],
        });
    }
    let n = entry.level();
    let s = entry.group.intersect_sl2()?;
    let mut matches: Vec<(Vec<[u64; 4]>, G0Match)> = Vec::new();
    for k in sl_supergroups(s, a)? {
        let mut gens = entry.group.gens().to_vec();
        gens.extend(k.generators().iter().cloned());
        let cand = OpenSubgroup::new(n, gens)?;
        if cand.intersect_sl2()?.order()? != k.order()? || genus(&cand)?.genus != 0 {
            continue;
        }
        for (source, model) in models_for(&k, catalog)? {
            if let Some(g) = moebius_equivalent(&entry.j, &model) {
                let group = cand.minimal_level()?;
                matches.push((
                    canonical_gens(&group)?,
                    G0Match {
                        group,
                        source,
                        g,
                        all_sources: vec![],
                    },
                ));
            }
        }
    }
    matches.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.source.cmp(&y.1.source)));
    let all: Vec<String> = matches.iter().map(|m| m.1.source.clone()).collect();
    let mut best = matches
        .into_iter()
        .next()
        .ok_or_else(|| ClassifyError::NoMatch(entry.label().to_string()))?
        .1;
    best.all_sources = all;
    Ok(best)
}

/// `b0` is the lcm of the automorphism orders supported on the primes of
/// `N`; `b = 2 b0` when `N ≡ 2 mod 4`.
pub fn level_bound_b(entry: &CatalogEntry) -> Result<u64, ClassifyError> {
    let orders = entry
        .raw
        .automorphism_orders
        .as_ref()
        .ok_or_else(|| ClassifyError::MissingAutomorphismData(entry.label().to_string()))?;
    Ok(level_bound(orders, entry.level()))
}

pub fn level_bound(orders: &[u64], n: u64) -> u64 {
    let b0 = orders
        .iter()
        .filter(|&&o| o > 0 && prime_divisors(o).iter().all(|p| n % p == 0))
        .fold(1, |acc, &o| lcm(acc, o));
    if n % 4 == 2 {
        2 * b0
    } else {
        b0
    }
}

/// Levels `L` with `N | L | N b`.
pub fn extra_levels(n: u64, b: u64) -> Vec<u64> {
    divisors(n * b).into_iter().filter(|l| l % n == 0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bucket {
    Theorem1,
    Theorem2,
    Excluded,
    Unresolved,
}

impl Bucket {
    pub fn from_index(c: IndexClass) -> Self {
        match c {
            IndexClass::IndexOne => Bucket::Theorem1,
            IndexClass::IndexTwo => Bucket::Theorem2,
            IndexClass::Other(_) => Bucket::Excluded,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Open,
    Shortcut,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub bucket: Bucket,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saturation_level: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl GroupOutcome {
    fn from_result(r: Result<(CommutatorResult, Method), ClassifyError>) -> Self {
        match r {
            Ok((c, m)) => Self {
                bucket: Bucket::from_index(c.index_class()),
                index: Some(c.index),
                method: Some(m),
                saturation_level: Some(c.saturation_level),
                error: None,
            },
            Err(e) => Self {
                bucket: Bucket::Unresolved,
                index: None,
                method: None,
                saturation_level: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberOutcome {
    pub v: String,
    pub mv: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub twisted_map: Option<String>,
    pub outcome: GroupOutcome,
    /// theorems whose table rows accept this `v`
    pub rows_accepting: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct G0Summary {
    pub source: String,
    pub level: u64,
    pub group: GroupSpec,
    pub moebius: String,
    pub matches: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowTrace {
    pub theorem: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_index: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    pub traces: Vec<ConditionTrace>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryReport {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariant_violation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<G0Summary>,
    pub members: Vec<MemberOutcome>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level_bound_b: Option<u64>,
    pub extra_levels: Vec<u64>,
    pub conditions: Vec<RowTrace>,
    pub errors: Vec<String>,
}

impl EntryReport {
    /// Buckets reached by the group itself and by its members.
    pub fn buckets(&self) -> BTreeSet<Bucket> {
        self.group
            .iter()
            .chain(self.members.iter().map(|m| &m.outcome))
            .map(|o| o.bucket)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub cap_order: usize,
    pub threads: usize,
    pub elapsed_ms: u128,
    pub levels: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub entries: Vec<EntryReport>,
    pub meta: RunMeta,
}

impl ClassificationReport {
    pub fn has_invariant_violation(&self) -> bool {
        self.entries.iter().any(|e| e.invariant_violation.is_some())
    }

    pub fn entry(&self, label: &str) -> Option<&EntryReport> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12} {:<10} {:>5}  {:<22} members", "label", "bucket", "index", "J");
        for e in &self.entries {
            if let Some(w) = &e.invariant_violation {
                let _ = writeln!(s, "{:<12} INVALID    {:>5}  {w}", e.label, "-");
                continue;
            }
            let (bucket, index) = match &e.group {
                Some(g) => (format!("{:?}", g.bucket), g.index.map_or("-".into(), |i| i.to_string())),
                None => ("-".into(), "-".into()),
            };
            let members: Vec<String> = e
                .members
                .iter()
                .map(|m| format!("v={}:{:?}", m.v, m.outcome.bucket))
                .collect();
            let _ = writeln!(
                s,
                "{:<12} {:<10} {:>5}  {:<22} {}",
                e.label,
                bucket,
                index,
                e.j.as_deref().unwrap_or("-"),
                members.join(" ")
            );
        }
        s
    }
}

fn member_phi(spec: &FamilySpec, phi: &PhiSpec) -> Result<crate::matgroup::AbelianHom, ClassifyError> {
    let images = match phi {
        PhiSpec::Images(im) => im.clone(),
        PhiSpec::QuadraticCharacter(d) => {
            if spec.quotient_group().order() != 2 {
                return Err(ClassifyError::Schema("quadratic character needs a quotient of order 2".into()));
            }
            spec.unit_basis()
                .iter()
                .map(|&u| vec![u64::from(kronecker(*d, u) == -1)])
                .collect()
        }
    };
    let hom = spec.hom(images)?;
    if let PhiSpec::QuadraticCharacter(d) = phi {
        for u in crate::arith::units(spec.modulus()) {
            let want = u64::from(kronecker(*d, u) == -1);
            let got = hom.apply(spec.quotient_group(), &spec.unit_log(u).expect("unit"));
            if got != vec![want] {
                return Err(ClassifyError::Schema(format!(
                    "kronecker({d}, .) is not a character mod {}",
                    spec.modulus()
                )));
            }
        }
    }
    Ok(hom)
}

fn member_outcome(
    entry: &CatalogEntry,
    g0: &OpenSubgroup,
    specs: &mut FxHashMap<u64, FamilySpec>,
    m: &MemberData,
) -> MemberOutcome {
    let mut level = None;
    let mut run = || -> Result<(CommutatorResult, Method), ClassifyError> {
        if !specs.contains_key(&m.mv) {
            specs.insert(m.mv, FamilySpec::new(g0.clone(), entry.group.clone(), m.mv)?);
        }
        let spec = &specs[&m.mv];
        let phi = member_phi(spec, &m.phi)?;
        let member = spec.build_member(&phi)?.with_tag(Some(m.v.clone()), Some(m.mv));
        let minimal = member.minimal_group()?;
        level = Some(minimal.level());
        if let ShortcutOutcome::Applies(c) = spec.commutator_shortcut(&member, m.mv)? {
            return Ok((c, Method::Shortcut));
        }
        Ok((minimal.transpose_group().commutator_open()?, Method::Open))
    };
    let outcome = GroupOutcome::from_result(run());
    let twisted_map = entry.raw.family.as_ref().and_then(|f| {
        let i = f.index?;
        let v = parse_rational(&m.v).ok()?;
        let alpha = f.alpha.as_deref().and_then(|a| parse_rational(a).ok());
        let map = MapCatalogEntry::standard(i).ok()?.instantiate(alpha.as_ref(), Some(&v)).ok()?;
        Some(map.map.to_string())
    });
    let rows_accepting = match parse_rational(&m.v) {
        Ok(v) => {
            let mut t: Vec<u8> = entry
                .raw
                .rows
                .iter()
                .filter(|r| eval_condition(&r.condition, &v, Some(&entry.j)).holds)
                .map(|r| r.theorem)
                .collect();
            t.dedup();
            t
        }
        Err(_) => vec![],
    };
    MemberOutcome {
        v: m.v.clone(),
        mv: m.mv,
        level,
        twisted_map,
        outcome,
        rows_accepting,
    }
}

/// Runs the pipeline on one entry; errors are recorded, never raised.
pub fn classify_entry(entry: &CatalogEntry, catalog: &[CatalogEntry]) -> EntryReport {
    let mut errors = Vec::new();
    let group = GroupOutcome::from_result(
        entry
            .group
            .transpose_group()
            .commutator_open()
            .map(|c| (c, Method::Open))
            .map_err(ClassifyError::from),
    );
    let g0 = match recover_g0(entry, catalog) {
        Ok(m) => Some(m),
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    };
    let mut members = Vec::new();
    if let (Some(fam), Some(g0)) = (&entry.raw.family, &g0) {
        let mut specs = FxHashMap::default();
        for m in &fam.members {
            members.push(member_outcome(entry, &g0.group, &mut specs, m));
        }
    }
    let b = match level_bound_b(entry) {
        Ok(b) => Some(b),
        Err(e) => {
            errors.push(e.to_string());
            None
        }
    };
    let extra = match b {
        Some(b) if !entry.raw.in_exceptional_set_s => extra_levels(entry.level(), b),
        _ => vec![],
    };
    let samples: Vec<BigRational> = entry
        .raw
        .sample_v
        .iter()
        .filter_map(|s| match parse_rational(s) {
            Ok(v) => Some(v),
            Err(e) => {
                errors.push(format!("sample v {s}: {e}"));
                None
            }
        })
        .collect();
    let conditions = entry
        .raw
        .rows
        .iter()
        .map(|r| RowTrace {
            theorem: r.theorem,
            family_index: r.family_index,
            alpha: r.alpha.clone(),
            traces: samples
                .iter()
                .map(|v| eval_condition(&r.condition, v, Some(&entry.j)))
                .collect(),
        })
        .collect();
    EntryReport {
        label: entry.label().to_string(),
        invariant_violation: None,
        j: Some(entry.j.to_string()),
        group: Some(group),
        g0: g0.map(|m| G0Summary {
            source: m.source,
            level: m.group.level(),
            group: m.group.to_spec(),
            moebius: m.g.to_string(),
            matches: m.all_sources,
        }),
        members,
        level_bound_b: b,
        extra_levels: extra,
        conditions,
        errors,
    }
}

/// Classifies every entry in parallel; output order follows the catalog.
pub fn classify(load: &CatalogLoad) -> ClassificationReport {
    let start = Instant::now();
    let mut entries: Vec<EntryReport> = load
        .entries
        .par_iter()
        .map(|e| classify_entry(e, &load.entries))
        .collect();
    for (label, which) in &load.violations {
        entries.push(EntryReport {
            label: label.clone(),
            invariant_violation: Some(which.clone()),
            j: None,
            group: None,
            g0: None,
            members: vec![],
            level_bound_b: None,
            extra_levels: vec![],
            conditions: vec![],
            errors: vec![],
        });
    }
    let mut levels: Vec<u64> = load.entries.iter().map(|e| e.level()).collect();
    levels.sort_unstable();
    levels.dedup();
    ClassificationReport {
        entries,
        meta: RunMeta {
            cap_order: crate::limits::cap_order(),
            threads: rayon::current_num_threads(),
            elapsed_ms: start.elapsed().as_millis(),
            levels,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveVerdict {
    Member { witness: Proj },
    NotMember,
    ExcludedJ,
}

/// Whether `j ∈ π_G(P^1(Q))`, with the smallest-height witness.
pub fn check_curve(label: &str, j: &BigRational, catalog: &[CatalogEntry]) -> Result<CurveVerdict, ClassifyError> {
    let entry = catalog
        .iter()
        .find(|e| e.label() == label)
        .ok_or_else(|| ClassifyError::UnknownLabel(label.to_string()))?;
    if j.is_zero() || *j == q(1728) {
        return Ok(CurveVerdict::ExcludedJ);
    }
    let mut fibers = entry.pi.rational_fibers(&Proj::Finite(j.clone()));
    fibers.sort_by_key(|p| match p {
        Proj::Finite(x) => (false, x.numer().abs() + x.denom(), x.is_negative()),
        Proj::Infinity => (true, Zero::zero(), false),
    });
    Ok(match fibers.into_iter().next() {
        Some(witness) => CurveVerdict::Member { witness },
        None => CurveVerdict::NotMember,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_A: &str = r#"{"entries":[{"label":"2A-2A","group":{"level":2,"gens":[[0,1,1,1]]},
        "pi":"t^2+1728","u":"t^2","automorphism_orders":[1,2]}]}"#;

    #[test]
    fn level_bound_rule() {
        assert_eq!(level_bound(&[1], 5), 1);
        assert_eq!(level_bound(&[2, 4], 8), 4);
        assert_eq!(level_bound(&[3], 6), 6);
        assert_eq!(level_bound(&[3, 2], 8), 2);
        assert_eq!(extra_levels(6, 6), vec![6, 12, 18, 36]);
    }

    #[test]
    fn curve_membership() {
        let cat = parse_catalog(TWO_A).unwrap().entries;
        assert_eq!(cat[0].j.to_string(), "t + 1728");
        let w = check_curve("2A-2A", &q(1732), &cat).unwrap();
        assert_eq!(w, CurveVerdict::Member { witness: Proj::int(2) });
        assert_eq!(check_curve("2A-2A", &q(1728), &cat).unwrap(), CurveVerdict::ExcludedJ);
        assert_eq!(check_curve("2A-2A", &q(0), &cat).unwrap(), CurveVerdict::ExcludedJ);
        assert_eq!(check_curve("2A-2A", &q(1727), &cat).unwrap(), CurveVerdict::NotMember);
        assert!(matches!(check_curve("9Z-9Z", &q(5), &cat), Err(ClassifyError::UnknownLabel(_))));
    }

    #[test]
    fn g0_of_two_a_is_the_j_line() {
        let cat = parse_catalog(TWO_A).unwrap().entries;
        let m = recover_g0(&cat[0], &cat).unwrap();
        assert_eq!(m.source, "j-line");
        assert_eq!(m.group.level(), 1);
        assert_eq!(m.g.to_string(), "t + 1728");
    }

    const X2: &str = r#"{"label":"X(2)","group":{"level":2,"gens":[]},
        "pi":"256*(t^2-t+1)^3/(t^2*(t-1)^2)","u":"t-t^2","automorphism_orders":[1,2,3]}"#;
    const X02: &str = r#"{"label":"X0(2)","group":{"level":2,"gens":[[1,1,0,1]]},
        "pi":"(t+16)^3/t","u":"t","automorphism_orders":[1]}"#;

    #[test]
    fn g0_needs_a_model() {
        let alone = parse_catalog(&format!("{{\"entries\":[{X2}]}}")).unwrap().entries;
        assert!(matches!(recover_g0(&alone[0], &alone), Err(ClassifyError::NoMatch(_))));
        let both = parse_catalog(&format!("{{\"entries\":[{X2},{X02}]}}")).unwrap().entries;
        let m = recover_g0(&both[0], &both).unwrap();
        assert_eq!(m.source, "X0(2)");
        assert_eq!(m.g.to_string(), "-16/t");
        assert_eq!(m.all_sources.len(), 3);
    }

    #[test]
    fn schema_and_invariant_errors() {
        assert!(matches!(parse_catalog("{\"entries\": [}"), Err(ClassifyError::Schema(_))));
        let gamma7 = r#"{"entries":[{"label":"7X","group":{"level":7,"gens":[[1,0,0,1]]},"pi":"t","u":"t"}]}"#;
        let load = parse_catalog(gamma7).unwrap();
        assert!(load.entries.is_empty());
        assert!(load.violations[0].1.contains("genus 3"));
        let dup = TWO_A.replace("}]}", "},{\"label\":\"2A-2A\",\"group\":{\"level\":2,\"gens\":[[0,1,1,1]]},\"pi\":\"t^2+1728\",\"u\":\"t^2\"}]}");
        let load = parse_catalog(&dup).unwrap();
        assert_eq!(load.entries.len(), 1);
        assert_eq!(load.violations[0].1, "duplicate label");
    }

    #[test]
    fn empty_catalog_gives_empty_report() {
        let r = classify(&parse_catalog("{\"entries\":[]}").unwrap());
        assert!(r.entries.is_empty());
        assert!(!r.has_invariant_violation());
    }
}
