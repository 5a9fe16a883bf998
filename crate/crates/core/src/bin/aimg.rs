use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use aimg_core::arithcond::eval_condition;
use aimg_core::classifier::{check_curve, classify, parse_catalog, CatalogLoad, SAMPLE_CATALOG};
use aimg_core::modgenus::genus;
use aimg_core::modmatrix::ResidueMatrix;
use aimg_core::opengroup::{GroupSpec, OpenSubgroup};
use aimg_core::ratfunc::parse_rational;
use aimg_core::surjectivity::{surjectivity_check, TruncatedSpec};

#[derive(Parser)]
#[command(name = "aimg", version, about = "Genus-0 adelic Galois image toolkit")]
struct Cli {
    /// cap on materialized group sizes (overrides AIMG_CAP_ORDER)
    #[arg(long, global = true)]
    cap_order: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// classify every catalog entry by commutator index
    Classify {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// decide whether j lies in the image of pi_G
    CheckCurve {
        #[arg(long)]
        label: String,
        #[arg(long, allow_hyphen_values = true)]
        j: String,
        /// defaults to the bundled sample catalog
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
    /// genus of X_G
    Genus {
        #[arg(long)]
        group: PathBuf,
    },
    /// [G,G] and its index in G ∩ SL2
    Commutator {
        #[arg(long)]
        group: PathBuf,
    },
    /// surjectivity of H onto a truncated adelic group
    Surjectivity {
        #[arg(long)]
        group: PathBuf,
        #[arg(long)]
        subgroup: PathBuf,
    },
    /// evaluate an entry's table conditions at v
    Condition {
        #[arg(long)]
        label: String,
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long)]
        catalog: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_group(path: &Path) -> Result<OpenSubgroup> {
    Ok(OpenSubgroup::from_spec(&read_json::<GroupSpec>(path)?)?)
}

fn catalog(path: Option<&Path>) -> Result<CatalogLoad> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => SAMPLE_CATALOG.to_string(),
    };
    Ok(parse_catalog(&text)?)
}

fn print(v: serde_json::Value) -> Result<()> {
    emit(&format!("{}\n", serde_json::to_string_pretty(&v)?))
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(cap) = cli.cap_order {
        aimg_core::limits::set_cap_order(cap);
    }
    match cli.cmd {
        Cmd::Classify { catalog: path, out, jobs } => {
            let load = catalog(Some(&path))?;
            let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build()?;
            let report = pool.install(|| classify(&load));
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)
                .with_context(|| format!("writing {}", out.display()))?;
            emit(&report.to_table())?;
            if report.has_invariant_violation() {
                return Ok(ExitCode::from(2));
            }
        }
        Cmd::CheckCurve { label, j, catalog: path } => {
            let load = catalog(path.as_deref())?;
            let j = parse_rational(&j)?;
            print(serde_json::to_value(check_curve(&label, &j, &load.entries)?)?)?;
        }
        Cmd::Genus { group } => {
            print(serde_json::to_value(genus(&read_group(&group)?)?)?)?;
        }
        Cmd::Commutator { group } => {
            let c = read_group(&group)?.commutator_open()?;
            print(json!({
                "index": c.index,
                "class": c.index_class(),
                "saturation_level": c.saturation_level,
                "full_determinant": c.full_determinant,
                "commutator": c.commutator.to_spec(),
            }))?;
        }
        Cmd::Surjectivity { group, subgroup } => {
            let g = read_json::<TruncatedSpec>(&group)?.build()?;
            let h = read_json::<GroupSpec>(&subgroup)?;
            if h.level != g.modulus() {
                bail!("subgroup level {} differs from the truncation modulus {}", h.level, g.modulus());
            }
            let gens: Vec<ResidueMatrix> = OpenSubgroup::from_spec(&h)?.gens().to_vec();
            print(serde_json::to_value(surjectivity_check(&g, &gens)?)?)?;
        }
        Cmd::Condition { label, v, catalog: path } => {
            let load = catalog(path.as_deref())?;
            let entry = load
                .entries
                .iter()
                .find(|e| e.label() == label)
                .with_context(|| format!("unknown label {label}"))?;
            let v = parse_rational(&v)?;
            let rows: Vec<serde_json::Value> = entry
                .raw
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "theorem": r.theorem,
                        "family_index": r.family_index,
                        "alpha": r.alpha,
                        "trace": eval_condition(&r.condition, &v, Some(&entry.j)),
                    })
                })
                .collect();
            print(json!({ "label": label, "j": entry.j.to_string(), "rows": rows }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
