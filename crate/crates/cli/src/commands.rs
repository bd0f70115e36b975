//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Args, ValueEnum};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reebkit::dsl::{parse_document, parse_scalar_with, serialize_document, Document};
use reebkit::hydro::{
    adapted_metric, beltrami_factor, curl_free_case, is_contact, is_euler_steady, reeb_field, verify_reeb,
    BeltramiStatus, HydroError,
};
use reebkit::models::{abc_nonsingular, gauss_certificate, gauss_certificate_default, ModelError};
use reebkit::orbit::{project, SearchOptions};
use reebkit::{flat, serialize_field_spec, FieldSpec, KForm, Metric, SectionPlane, VectorField, VolumeForm};
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{csv_table, float12, write_file, InputFile, RunManifest, VERSION};
use crate::{OutArgs, Outcome, Profile};

pub struct Context {
    pub profile: Profile,
}

impl Context {
    fn manifest(&self, subcommand: &str, inputs: Vec<InputFile>, flags: &impl Serialize) -> Result<RunManifest> {
        Ok(RunManifest {
            subcommand: subcommand.to_string(),
            version: VERSION.to_string(),
            inputs,
            tolerance_profile: format!("{:?}", self.profile).to_lowercase(),
            tolerances: self.profile.tolerances(),
            flags: serde_json::to_value(flags)?,
            threads: None,
            wall_time_s: None,
        })
    }
}

fn outcome(manifest: RunManifest, report: Value, positive: bool, out: &OutArgs) -> Outcome {
    Outcome { manifest, report, positive, out: out.out.clone() }
}

/// Reads and parses a `.field` file, printing diagnostics to stderr.
fn load(path: &Path) -> Result<(Document, InputFile)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let input = InputFile::new(path, &bytes);
    let src = String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    match parse_document(&src) {
        Ok(parsed) => {
            for w in &parsed.warnings {
                eprintln!("{}:{}", path.display(), w.render(&src));
            }
            Ok((parsed.value, input))
        }
        Err(diags) => {
            for d in &diags {
                eprintln!("{}:{}", path.display(), d.render(&src));
            }
            bail!("could not parse {}", path.display())
        }
    }
}

fn require_field<'a>(doc: &'a Document, path: &Path) -> Result<&'a VectorField> {
    doc.field.as_ref().ok_or_else(|| anyhow!("{} has no [field] section", path.display()))
}

/// The `[form]` section, or `ι_X g` when only a field is given.
fn contact_form(doc: &Document, path: &Path) -> Result<KForm> {
    match (&doc.form, &doc.field) {
        (Some(a), _) => Ok(a.clone()),
        (None, Some(x)) => Ok(flat(x, &doc.metric)),
        (None, None) => bail!("{} has neither a [form] nor a [field] section", path.display()),
    }
}

/// Mathematical failures become negative verdicts; malformed input stays an error.
fn negative(e: HydroError) -> Result<Value> {
    match e {
        HydroError::Calculus(_) | HydroError::Form(_) => Err(e.into()),
        e => Ok(json!({ "positive": false, "reason": e.to_string() })),
    }
}

fn checked(positive: bool, details: impl Serialize) -> Result<Value> {
    Ok(json!({ "positive": positive, "details": serde_json::to_value(details)? }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Contact,
    Beltrami,
    Euler,
    Reeb,
    Curlfree,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// `.field` file.
    pub file: PathBuf,
    /// Checks to run.
    #[arg(long, value_delimiter = ',', default_values = ["contact", "beltrami", "euler"])]
    pub checks: Vec<Check>,
    /// Reeb check only requires `ι_X α > 0` instead of `ι_X α = 1`.
    #[arg(long)]
    pub reeb_like: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn verify(ctx: &Context, a: VerifyArgs) -> Result<Outcome> {
    let (doc, input) = load(&a.file)?;
    let (g, mu) = (&doc.metric, &doc.volume);
    let mut checks = a.checks.clone();
    checks.sort();
    checks.dedup();
    let mut report = serde_json::Map::new();
    for check in checks {
        let value = match check {
            Check::Contact => match is_contact(&contact_form(&doc, &a.file)?) {
                Ok(r) => checked(r.is_contact(), r)?,
                Err(e) => negative(e)?,
            },
            Check::Beltrami => match beltrami_factor(require_field(&doc, &a.file)?, g, mu) {
                Ok(r) => checked(r.status == BeltramiStatus::Rotational, r)?,
                Err(e) => negative(e)?,
            },
            Check::Euler => {
                let r = is_euler_steady(require_field(&doc, &a.file)?, g, mu);
                checked(r.is_steady(), r)?
            }
            Check::Reeb => {
                match verify_reeb(&contact_form(&doc, &a.file)?, require_field(&doc, &a.file)?, !a.reeb_like) {
                    Ok(r) => checked(r.holds, r)?,
                    Err(e) => negative(e)?,
                }
            }
            Check::Curlfree => match curl_free_case(require_field(&doc, &a.file)?, g) {
                Ok(r) => checked(true, r)?,
                Err(e) => negative(e)?,
            },
        };
        let name = serde_json::to_value(check)?.as_str().expect("name").to_string();
        report.insert(name, value);
    }
    let positive = report.values().all(|v| v["positive"] == Value::Bool(true));
    let manifest = ctx.manifest("verify", vec![input], &a)?;
    Ok(outcome(manifest, Value::Object(report), positive, &a.out))
}

#[derive(Args, Debug, Serialize)]
pub struct ReebArgs {
    /// `.field` file with a `[form]` section, or a `[field]` whose flat is used.
    pub file: PathBuf,
    /// Check the `[field]` of this file against the form instead of solving.
    #[arg(long)]
    pub verify_only: Option<PathBuf>,
    /// Write the Reeb field as a `.field` file.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn reeb(ctx: &Context, a: ReebArgs) -> Result<Outcome> {
    let (doc, input) = load(&a.file)?;
    let alpha = contact_form(&doc, &a.file)?;
    if let Some(path) = &a.verify_only {
        let (cand, cand_input) = load(path)?;
        let x = require_field(&cand, path)?;
        let (report, positive) = match verify_reeb(&alpha, x, true) {
            Ok(r) => (json!({ "verification": serde_json::to_value(&r)? }), r.holds),
            Err(e) => (negative(e)?, false),
        };
        let manifest = ctx.manifest("reeb", vec![input, cand_input], &a)?;
        return Ok(outcome(manifest, report, positive, &a.out));
    }
    let manifest = ctx.manifest("reeb", vec![input], &a)?;
    let x = match reeb_field(&alpha) {
        Ok(x) => x,
        Err(e) => return Ok(outcome(manifest, negative(e)?, false, &a.out)),
    };
    let check = verify_reeb(&alpha, &x, true)?;
    let text = serialize_field_spec(&FieldSpec::new(format!("{}_reeb", doc.name), x));
    if let Some(path) = &a.field_out {
        write_file(path, &text)?;
    }
    let report = json!({ "field": text, "verification": serde_json::to_value(&check)? });
    Ok(outcome(manifest, report, check.holds, &a.out))
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Args, Debug, Serialize)]
pub struct SectionArgs {
    /// Coordinate held fixed on the section.
    #[arg(long, default_value = "y")]
    pub axis: Axis,
    /// Value of that coordinate.
    #[arg(long, default_value_t = 0.0)]
    pub value: f64,
    /// Seeds on an `n × n` lattice of the plane.
    #[arg(long, default_value_t = 4)]
    pub lattice: usize,
    /// Extra seed points `x,y,z`.
    #[arg(long = "point", value_parser = parse_point)]
    pub points: Vec<[f64; 3]>,
    /// Number of uniformly random seeds on the plane.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    /// RNG seed for `--random`.
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// Crossings recorded per seed.
    #[arg(long, default_value_t = 3)]
    pub crossings: usize,
    /// Flow time allowed per seed; defaults to 100 per crossing.
    #[arg(long)]
    pub time_budget: Option<f64>,
}

fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    <[f64; 3]>::try_from(parts).map_err(|_| format!("expected three comma-separated numbers, got {s:?}"))
}

impl SectionArgs {
    fn plane(&self) -> SectionPlane {
        SectionPlane::new(self.axis as usize, self.value)
    }

    fn seeds(&self) -> Vec<[f64; 3]> {
        let plane = self.plane();
        let mut seeds = plane.lattice(self.lattice);
        seeds.extend(&self.points);
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        let [i, j] = plane.transverse();
        for _ in 0..self.random {
            let mut p = [self.value; 3];
            p[i] = rng.random_range(0.0..std::f64::consts::TAU);
            p[j] = rng.random_range(0.0..std::f64::consts::TAU);
            seeds.push(p);
        }
        seeds
    }

    fn section(&self, x: &VectorField, ctx: &Context) -> Result<reebkit::SectionData> {
        anyhow::ensure!(self.crossings > 0, "--crossings must be positive");
        let seeds = self.seeds();
        anyhow::ensure!(!seeds.is_empty(), "no seeds: give --lattice, --point or --random");
        Ok(reebkit::poincare(x, self.plane(), &seeds, self.crossings, &ctx.profile.tolerances(), self.time_budget)?)
    }
}

fn nonzero_field<'a>(doc: &'a Document, path: &Path) -> Result<&'a VectorField> {
    let x = require_field(doc, path)?;
    if x.exact_zero() == Some(true) {
        bail!("{}: field is identically zero", path.display());
    }
    Ok(x)
}

fn header(manifest: &RunManifest) -> Result<Vec<String>> {
    let inputs: Vec<String> = manifest.inputs.iter().map(|i| format!("{} sha256={}", i.path, i.sha256)).collect();
    Ok(vec![
        format!("reebkit {} {}", manifest.version, manifest.subcommand),
        format!("input {}", inputs.join(" ")),
        format!("tolerance-profile {} {}", manifest.tolerance_profile, serde_json::to_string(&manifest.tolerances)?),
        format!("flags {}", serde_json::to_string(&manifest.flags)?),
    ])
}

#[derive(Args, Debug, Serialize)]
pub struct PoincareArgs {
    /// `.field` file.
    pub file: PathBuf,
    #[command(flatten)]
    pub section: SectionArgs,
    /// Write crossings as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn poincare(ctx: &Context, a: PoincareArgs) -> Result<Outcome> {
    let (doc, input) = load(&a.file)?;
    let x = nonzero_field(&doc, &a.file)?;
    let s = a.section.section(x, ctx)?;
    let manifest = ctx.manifest("poincare", vec![input], &a)?;
    if let Some(path) = &a.csv {
        let rows: Vec<Vec<String>> = s
            .crossings
            .iter()
            .map(|c| {
                let p = project(&c.point);
                let mut row = vec![c.seed.to_string(), float12(c.time), c.direction.to_string()];
                row.extend(p.iter().chain(&c.point).map(|v| float12(*v)));
                row
            })
            .collect();
        let cols = ["seed", "time", "direction", "x", "y", "z", "cover_x", "cover_y", "cover_z"];
        write_file(path, &csv_table(&header(&manifest)?, &cols, &rows)?)?;
    }
    let report = json!({ "partial": !s.failures.is_empty(), "section": serde_json::to_value(&s)? });
    Ok(outcome(manifest, report, true, &a.out))
}

#[derive(Args, Debug, Serialize)]
pub struct OrbitsArgs {
    /// `.field` file.
    pub file: PathBuf,
    #[command(flatten)]
    pub section: SectionArgs,
    /// Newton iterations per candidate.
    #[arg(long, default_value_t = 30)]
    pub max_iter: usize,
    /// Candidates refined at most.
    #[arg(long, default_value_t = 64)]
    pub max_candidates: usize,
    /// Write orbits as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn orbits(ctx: &Context, a: OrbitsArgs) -> Result<Outcome> {
    let (doc, input) = load(&a.file)?;
    let x = nonzero_field(&doc, &a.file)?;
    let s = a.section.section(x, ctx)?;
    let opts = SearchOptions {
        tolerances: ctx.profile.tolerances(),
        max_iter: a.max_iter,
        max_candidates: a.max_candidates,
        ..SearchOptions::default()
    };
    let found = reebkit::find_orbits(x, &s, &opts)?;
    let manifest = ctx.manifest("orbits", vec![input], &a)?;
    if let Some(path) = &a.csv {
        let rows: Vec<Vec<String>> = found
            .orbits
            .iter()
            .map(|o| {
                let mut row: Vec<String> = o.base_point.iter().map(|v| float12(*v)).collect();
                row.push(float12(o.period));
                row.extend(o.winding.iter().map(i64::to_string));
                row.extend([
                    float12(o.residual),
                    o.contractible().to_string(),
                    o.returns.to_string(),
                    o.seed.to_string(),
                ]);
                row
            })
            .collect();
        let cols = [
            "x",
            "y",
            "z",
            "period",
            "winding_x",
            "winding_y",
            "winding_z",
            "residual",
            "contractible",
            "returns",
            "seed",
        ];
        write_file(path, &csv_table(&header(&manifest)?, &cols, &rows)?)?;
    }
    let orbits: Vec<Value> = found
        .orbits
        .iter()
        .map(|o| {
            let mut v = serde_json::to_value(o)?;
            v["contractible"] = Value::Bool(o.contractible());
            Ok(v)
        })
        .collect::<Result<_>>()?;
    let evidence = if found.contractible_found() {
        "contractible closed orbit found"
    } else {
        "inconclusive: no contractible closed orbit found"
    };
    let report = json!({
        "partial": !s.failures.is_empty(),
        "section_points": s.crossings.len(),
        "grazes": s.grazes,
        "seed_failures": serde_json::to_value(&s.failures)?,
        "candidates": found.candidates,
        "dropped": serde_json::to_value(&found.dropped)?,
        "orbits": orbits,
        "contractible_found": found.contractible_found(),
        "evidence": evidence,
    });
    Ok(outcome(manifest, report, true, &a.out))
}

fn rational(s: &str) -> Result<BigRational> {
    BigRational::from_str(s.trim()).map_err(|_| anyhow!("expected a rational such as 3/5, got {s:?}"))
}

fn certificate(x: &VectorField, resolution: Option<usize>) -> Result<Value> {
    let c = match resolution {
        Some(n) => gauss_certificate(x, n),
        None => gauss_certificate_default(x),
    };
    match c {
        Ok(c) => Ok(serde_json::to_value(c)?),
        Err(e @ ModelError::SingularField { .. }) => Ok(json!({ "error": e.to_string() })),
        Err(e) => Err(e.into()),
    }
}

#[derive(Args, Debug, Serialize)]
pub struct AbcArgs {
    #[arg(long, default_value = "1")]
    pub a: String,
    #[arg(long, default_value = "1")]
    pub b: String,
    #[arg(long, default_value = "1")]
    pub c: String,
    /// Grid resolution for the Gauss-map certificate.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Write the field as a `.field` file.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn abc(ctx: &Context, a: AbcArgs) -> Result<Outcome> {
    let p = reebkit::ABCParams::new(rational(&a.a)?, rational(&a.b)?, rational(&a.c)?)?;
    let x = reebkit::abc_field(&p);
    let mut spec = FieldSpec::new("abc", x.clone());
    spec.params =
        [("A", &p.a), ("B", &p.b), ("C", &p.c)].into_iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
    let text = serialize_field_spec(&spec);
    if let Some(path) = &a.field_out {
        write_file(path, &text)?;
    }
    let nonsingular = match abc_nonsingular(&p) {
        Ok(b) => json!(b),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let energy = reebkit::energy(&x, &Metric::euclidean(), &VolumeForm::standard());
    let report = json!({
        "params": serde_json::to_value(&p)?,
        "field": text,
        "nonsingular": nonsingular,
        "energy": serde_json::to_value(&energy)?,
        "gauss_certificate": certificate(&x, a.resolution)?,
    });
    Ok(outcome(ctx.manifest("abc", vec![], &a)?, report, true, &a.out))
}

#[derive(Args, Debug, Serialize)]
pub struct GirouxArgs {
    /// Twisting number `n ≥ 1`.
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Grid resolution for the Gauss-map certificate.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Write the form and Reeb field as a `.field` file.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn giroux(ctx: &Context, a: GirouxArgs) -> Result<Outcome> {
    let alpha = reebkit::giroux_form(a.n)?;
    let x = reebkit::giroux_reeb(a.n)?;
    let doc = Document {
        name: format!("giroux_{}", a.n),
        params: Default::default(),
        field: Some(x.clone()),
        metric: Metric::euclidean(),
        volume: VolumeForm::standard(),
        form: Some(alpha.clone()),
    };
    let text = serialize_document(&doc);
    if let Some(path) = &a.field_out {
        write_file(path, &text)?;
    }
    let contact = is_contact(&alpha)?;
    let check = verify_reeb(&alpha, &x, true)?;
    let report = json!({
        "document": text,
        "contact_density": serde_json::to_value(&contact.density)?,
        "reeb_verification": serde_json::to_value(&check)?,
        "gauss_certificate": certificate(&x, a.resolution)?,
    });
    Ok(outcome(ctx.manifest("giroux", vec![], &a)?, report, check.holds, &a.out))
}

#[derive(Args, Debug, Serialize)]
pub struct EnergyArgs {
    /// `.field` file.
    pub file: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn energy(ctx: &Context, a: EnergyArgs) -> Result<Outcome> {
    let (doc, input) = load(&a.file)?;
    let x = require_field(&doc, &a.file)?;
    let e = reebkit::energy(x, &doc.metric, &doc.volume);
    Ok(outcome(ctx.manifest("energy", vec![input], &a)?, serde_json::to_value(&e)?, true, &a.out))
}

#[derive(Args, Debug, Serialize)]
pub struct AdaptArgs {
    /// `.field` file with a `[form]`; its `[field]` is taken as the Reeb
    /// field, or computed when absent.
    pub file: PathBuf,
    /// Positive scale function `h`; the adapted field is `hX`.
    #[arg(long, default_value = "1")]
    pub h: String,
    /// Write `hX` with the adapted metric and volume as a `.field` file.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutArgs,
}

pub fn adapt(ctx: &Context, a: AdaptArgs) -> Result<Outcome> {
    let (doc, input) = load(&a.file)?;
    let alpha = doc.form.clone().ok_or_else(|| anyhow!("{} has no [form] section", a.file.display()))?;
    let x = match &doc.field {
        Some(x) => x.clone(),
        None => reeb_field(&alpha)?,
    };
    let h = match parse_scalar_with(&a.h, &doc.params) {
        Ok(p) => p.value,
        Err(diags) => {
            for d in &diags {
                eprintln!("--h:{}", d.render(&a.h));
            }
            bail!("could not parse --h");
        }
    };
    let r = adapted_metric(&alpha, &x, &h)?;
    if let Some(path) = &a.field_out {
        let mut spec = FieldSpec::new(format!("{}_adapted", doc.name), r.field.clone());
        spec.metric = r.metric.clone();
        spec.volume = r.volume.clone();
        write_file(path, &serialize_field_spec(&spec))?;
    }
    let verified = r.verified;
    Ok(outcome(ctx.manifest("adapt", vec![input], &a)?, serde_json::to_value(&r)?, verified, &a.out))
}
