//! CSV bundle formats and `key = value` manifests.
//!
//! A period manifest names the files of one table:
//!
//! ```text
//! year = 2005
//! A = A_2005.csv
//! a0 = a0_2005.csv
//! d = d_2005.csv
//! labels = labels.csv
//! deflators = deflators.csv   # optional
//! ```
//!
//! Relative paths resolve against the manifest's directory. Matrix files
//! carry a header row of sector labels; rows may optionally start with a
//! label column, which is ignored. Sector numbers in every output file are
//! one-based.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::equilibrium::{PropositionReport, RemarkWitness, ShockResult};
use crate::estimation::{BootstrapSummary, SectorEstimate, SectorOutcome, Stars, SubsetAgreement};
use crate::table::{DeflatorVector, IOTable, LinkedObservation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub year: i32,
    pub a: PathBuf,
    pub a0: PathBuf,
    pub d: PathBuf,
    pub labels: PathBuf,
    pub deflators: Option<PathBuf>,
}

impl Manifest {
    /// Conventional file names for one period inside a bundle directory.
    pub fn conventional(year: i32) -> Self {
        Manifest {
            year,
            a: format!("A_{year}.csv").into(),
            a0: format!("a0_{year}.csv").into(),
            d: format!("d_{year}.csv").into(),
            labels: "labels.csv".into(),
            deflators: Some("deflators.csv".into()),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "year = {}\nA = {}\na0 = {}\nd = {}\nlabels = {}\n",
            self.year,
            self.a.display(),
            self.a0.display(),
            self.d.display(),
            self.labels.display()
        );
        if let Some(p) = &self.deflators {
            s.push_str(&format!("deflators = {}\n", p.display()));
        }
        s
    }

    fn resolved(mut self, base: &Path) -> Self {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.a);
        fix(&mut self.a0);
        fix(&mut self.d);
        fix(&mut self.labels);
        if let Some(p) = self.deflators.as_mut() {
            fix(p);
        }
        self
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn parse_manifest(text: &str, origin: &Path) -> Result<Manifest> {
    let mut kv = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(origin, format!("line {}: expected key = value", lineno + 1)))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut take = |key: &str| {
        kv.remove(key)
            .ok_or_else(|| Error::parse(origin, format!("missing key `{key}`")))
    };
    let year = take("year")?
        .parse()
        .map_err(|_| Error::parse(origin, "year is not an integer"))?;
    let manifest = Manifest {
        year,
        a: take("A")?.into(),
        a0: take("a0")?.into(),
        d: take("d")?.into(),
        labels: take("labels")?.into(),
        deflators: kv.remove("deflators").map(PathBuf::from),
    };
    if let Some(extra) = kv.keys().next() {
        return Err(Error::parse(origin, format!("unknown key `{extra}`")));
    }
    Ok(manifest)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let m = parse_manifest(&read_text(path)?, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(m.resolved(base))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file))
}

fn parse_f64(path: &Path, row: usize, field: &str) -> Result<f64> {
    field
        .parse()
        .map_err(|_| Error::parse(path, format!("row {row}: `{field}` is not a number")))
}

/// Numeric rows of a CSV file, dropping a leading non-numeric label column.
fn read_numeric_rows(path: &Path, width: usize) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv_reader(path)?;
    let mut rows = Vec::new();
    for (r, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let fields: Vec<&str> = rec.iter().collect();
        let fields = if fields.len() == width + 1 && fields[0].parse::<f64>().is_err() {
            &fields[1..]
        } else {
            &fields[..]
        };
        if fields.len() != width {
            return Err(Error::parse(path, format!("row {}: expected {width} values, found {}", r + 1, fields.len())));
        }
        rows.push(fields.iter().map(|f| parse_f64(path, r + 1, f)).collect::<Result<_>>()?);
    }
    Ok(rows)
}

fn read_column(path: &Path) -> Result<Vec<f64>> {
    Ok(read_numeric_rows(path, 1)?.into_iter().map(|r| r[0]).collect())
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let mut rd = csv_reader(path)?;
    rd.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
            Ok(rec.get(0).unwrap_or("").to_string())
        })
        .collect()
}

pub fn read_deflators(path: impl AsRef<Path>) -> Result<DeflatorVector> {
    let path = path.as_ref();
    DeflatorVector::new(read_column(path)?).map_err(|e| Error::parse(path, e.to_string()))
}

/// Loads the table named by a manifest. With `renormalize`, `a0` is
/// recomputed as one minus the intermediate column sums.
pub fn load_table(m: &Manifest, renormalize: bool) -> Result<IOTable> {
    let labels = read_labels(&m.labels)?;
    let n = labels.len();
    let rows = read_numeric_rows(&m.a, n)?;
    if rows.len() != n {
        return Err(Error::parse(&m.a, format!("expected {n} rows, found {}", rows.len())));
    }
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let a0_rows = read_numeric_rows(&m.a0, n)?;
    if a0_rows.len() != 1 {
        return Err(Error::parse(&m.a0, format!("expected one row, found {}", a0_rows.len())));
    }
    let a0 = DVector::from_vec(a0_rows.into_iter().next().unwrap());
    let d = read_column(&m.d)?;
    if d.len() != n {
        return Err(Error::parse(&m.d, format!("expected {n} values, found {}", d.len())));
    }
    let mut t = IOTable::new(m.year, labels, a, a0, DVector::from_vec(d))?;
    if renormalize {
        t.renormalize();
    }
    Ok(t)
}

fn create(path: &Path) -> Result<fs::File> {
    fs::File::create(path).map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    Error::parse(path, e.to_string())
}

/// Writes a table's files under `dir` using `m`'s (relative) names.
pub fn write_table(dir: &Path, m: &Manifest, t: &IOTable) -> Result<()> {
    let n = t.n();
    let path = dir.join(&m.a);
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(&t.labels).map_err(|e| csv_err(&path, e))?;
    for i in 0..n {
        w.write_record((0..n).map(|j| fmt_f64(t.a[(i, j)]))).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let path = dir.join(&m.a0);
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(&t.labels).map_err(|e| csv_err(&path, e))?;
    w.write_record(t.a0.iter().map(|v| fmt_f64(*v))).map_err(|e| csv_err(&path, e))?;
    w.flush().map_err(|e| Error::io(&path, e))?;

    write_column(&dir.join(&m.d), "d", t.d.iter().copied())?;
    let path = dir.join(&m.labels);
    let mut w = csv::Writer::from_writer(create(&path)?);
    w.write_record(["label"]).map_err(|e| csv_err(&path, e))?;
    for l in &t.labels {
        w.write_record([l]).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

pub fn write_manifest(path: &Path, m: &Manifest) -> Result<()> {
    fs::write(path, m.to_text()).map_err(|e| Error::io(path, e))
}

pub fn write_deflators(path: &Path, p: &DeflatorVector) -> Result<()> {
    write_column(path, "deflator", p.as_slice().iter().copied())
}

/// Ground truth of a synthetic bundle, one row per sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub sector: usize,
    pub label: String,
    pub gamma: f64,
    pub sigma: f64,
    pub z: f64,
    pub ln_z: f64,
    pub pi: f64,
}

/// Writes a two-period bundle: `period0.manifest`, `period1.manifest`,
/// `economy.manifest` (the reference table), per-year CSVs, `labels.csv`,
/// `deflators.csv` and `truth.csv`.
pub fn write_bundle(dir: &Path, obs: &LinkedObservation, gamma: &[f64], z: &[f64]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let m0 = Manifest::conventional(obs.table0.year);
    let m1 = Manifest::conventional(obs.table1.year);
    write_table(dir, &m0, &obs.table0)?;
    write_table(dir, &m1, &obs.table1)?;
    write_deflators(&dir.join("deflators.csv"), &obs.deflators)?;
    write_manifest(&dir.join("period0.manifest"), &m0)?;
    write_manifest(&dir.join("period1.manifest"), &m1)?;
    write_manifest(&dir.join("economy.manifest"), &Manifest { deflators: None, ..m0 })?;
    let truth: Vec<TruthRow> = (0..obs.n())
        .map(|j| TruthRow {
            sector: j + 1,
            label: obs.table0.labels[j].clone(),
            gamma: gamma[j],
            sigma: 1.0 - gamma[j],
            z: z[j],
            ln_z: z[j].ln(),
            pi: obs.deflators.output(j),
        })
        .collect();
    write_rows(dir.join("truth.csv"), &truth)
}

pub fn write_column(path: &Path, header: &str, values: impl Iterator<Item = f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record([header]).map_err(|e| csv_err(path, e))?;
    for v in values {
        w.write_record([fmt_f64(v)]).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_rows<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rows<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let mut rd = csv_reader(path)?;
    rd.deserialize()
        .map(|r| r.map_err(|e| csv_err(path, e)))
        .collect()
}

/// One line of `estimates.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub sector: usize,
    pub label: String,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub tfpg: Option<f64>,
    pub p_slope: Option<f64>,
    pub stars_slope: String,
    pub p_intercept: Option<f64>,
    pub stars_intercept: String,
    pub boot_p: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub n_obs: usize,
    pub accepted_null: Option<bool>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub se_slope: Option<f64>,
    pub se_intercept: Option<f64>,
    pub tfpg_translog: Option<f64>,
    pub status: String,
}

impl EstimateRow {
    pub fn from_outcome(o: &SectorOutcome, labels: &[String]) -> Self {
        let sector = o.sector();
        let label = labels.get(sector).cloned().unwrap_or_default();
        match o {
            SectorOutcome::Estimated { estimate: e, tornqvist, bootstrap_error } => EstimateRow {
                sector: sector + 1,
                label,
                sigma: Some(e.sigma),
                gamma: Some(e.gamma),
                tfpg: e.tfpg,
                p_slope: Some(e.p_slope),
                stars_slope: e.stars_slope.to_string(),
                p_intercept: Some(e.p_intercept),
                stars_intercept: e.stars_intercept.to_string(),
                boot_p: e.bootstrap.map(|b| b.p_value),
                ci_lo: e.bootstrap.map(|b| b.ci_lo),
                ci_hi: e.bootstrap.map(|b| b.ci_hi),
                n_obs: e.n_obs,
                accepted_null: Some(e.accepted_null),
                slope: Some(e.slope),
                intercept: Some(e.intercept),
                se_slope: Some(e.se_slope),
                se_intercept: Some(e.se_intercept),
                tfpg_translog: *tornqvist,
                status: if bootstrap_error.is_some() { "bootstrap-unstable".into() } else { "ok".into() },
            },
            SectorOutcome::Skipped { n_obs, reason, .. } => EstimateRow {
                sector: sector + 1,
                label,
                sigma: None,
                gamma: None,
                tfpg: None,
                p_slope: None,
                stars_slope: String::new(),
                p_intercept: None,
                stars_intercept: String::new(),
                boot_p: None,
                ci_lo: None,
                ci_hi: None,
                n_obs: *n_obs,
                accepted_null: None,
                slope: None,
                intercept: None,
                se_slope: None,
                se_intercept: None,
                tfpg_translog: None,
                status: reason.clone(),
            },
        }
    }

    /// Rebuilds the estimate; `None` for skipped sectors.
    pub fn to_estimate(&self) -> Option<SectorEstimate> {
        let slope = self.slope?;
        let p_slope = self.p_slope?;
        let p_intercept = self.p_intercept?;
        let bootstrap = match (self.boot_p, self.ci_lo, self.ci_hi) {
            (Some(p_value), Some(ci_lo), Some(ci_hi)) => Some(BootstrapSummary { p_value, ci_lo, ci_hi, reps: 0 }),
            _ => None,
        };
        Some(SectorEstimate {
            sector: self.sector.checked_sub(1)?,
            slope,
            intercept: self.intercept?,
            gamma: self.gamma?,
            sigma: self.sigma?,
            tfpg: self.tfpg,
            se_slope: self.se_slope.unwrap_or(f64::NAN),
            se_intercept: self.se_intercept.unwrap_or(f64::NAN),
            p_slope,
            p_intercept,
            stars_slope: Stars::from_p(p_slope),
            stars_intercept: Stars::from_p(p_intercept),
            n_obs: self.n_obs,
            bootstrap,
            accepted_null: self.accepted_null?,
        })
    }
}

pub fn read_estimates(path: impl AsRef<Path>) -> Result<Vec<SectorEstimate>> {
    let rows: Vec<EstimateRow> = read_rows(path)?;
    Ok(rows.iter().filter_map(EstimateRow::to_estimate).collect())
}

/// One line of `agreement.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementRow {
    pub subset: String,
    pub concordance: Option<f64>,
    pub correlation: Option<f64>,
    pub obs: usize,
}

impl From<&SubsetAgreement> for AgreementRow {
    fn from(a: &SubsetAgreement) -> Self {
        AgreementRow {
            subset: a.subset.label().into(),
            concordance: a.report.as_ref().map(|r| r.lin_ccc),
            correlation: a.report.as_ref().map(|r| r.pearson),
            obs: a.n,
        }
    }
}

/// One line of `shock_result.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockRow {
    pub sector: usize,
    pub label: String,
    pub pi: f64,
    pub v: f64,
    pub v_prime: f64,
    pub scs: f64,
    pub method: String,
}

pub fn shock_rows(r: &ShockResult, labels: &[String]) -> Vec<ShockRow> {
    (0..r.pi.len())
        .map(|j| ShockRow {
            sector: j + 1,
            label: labels[j].clone(),
            pi: r.pi[j],
            v: r.v[j],
            v_prime: r.v_prime[j],
            scs: r.scs_dist[j],
            method: r.method.label().into(),
        })
        .collect()
}

/// One line of `shock_summary.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShockSummaryRow {
    pub method: String,
    pub scs_total: f64,
    pub kurtosis: Option<f64>,
    pub iterations: usize,
    pub residual: f64,
    /// Gross output of the shocked sectors in the current state.
    pub shocked_output: f64,
}

/// One line of `proposition_report.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropositionRow {
    pub kind: String,
    pub direction: String,
    pub gamma: String,
    pub trial: Option<usize>,
    pub holds: bool,
    pub worst_sector: Option<usize>,
    pub worst_label: String,
    pub worst_value: Option<f64>,
    pub price_order_holds: Option<bool>,
    pub note: String,
}

impl PropositionRow {
    pub fn uniform(r: &PropositionReport, labels: &[String]) -> Self {
        PropositionRow {
            kind: "uniform".into(),
            direction: r.direction.label().into(),
            gamma: fmt_f64(r.gamma),
            trial: None,
            holds: r.holds,
            worst_sector: Some(r.worst_sector + 1),
            worst_label: labels[r.worst_sector].clone(),
            worst_value: Some(r.worst_value),
            price_order_holds: Some(r.price_order_holds),
            note: if r.holds { String::new() } else { "sign law violated".into() },
        }
    }

    pub fn witness(w: &RemarkWitness, direction: &str, labels: &[String]) -> Self {
        PropositionRow {
            kind: "remark-witness".into(),
            direction: direction.into(),
            gamma: "heterogeneous".into(),
            trial: Some(w.trial),
            holds: false,
            worst_sector: Some(w.sector + 1),
            worst_label: labels[w.sector].clone(),
            worst_value: Some(w.value),
            price_order_holds: None,
            note: format!("sigma of witness sector = {}", fmt_f64(1.0 - w.gamma[w.sector])),
        }
    }

    pub fn no_witness(direction: &str, trials: usize) -> Self {
        PropositionRow {
            kind: "remark-witness".into(),
            direction: direction.into(),
            gamma: "heterogeneous".into(),
            trial: None,
            holds: true,
            worst_sector: None,
            worst_label: String::new(),
            worst_value: None,
            price_order_holds: None,
            note: format!("none found in {trials} trials"),
        }
    }
}
