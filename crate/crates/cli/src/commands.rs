use anyhow::{anyhow, Context};
use serde::Serialize;

use ces_ge_core::equilibrium::{
    gamma_from_estimates, proposition_check, remark_search, solve_shock, Attribution, Direction,
    Economy, GammaMode, PriceMethod, SolverOptions,
};
use ces_ge_core::estimation::{
    agreement_table, estimate_all, summarize_elasticities, BootstrapConfig, BootstrapScheme,
    EstimationConfig, SectorOutcome, StdErrors, SummaryMode,
};
use ces_ge_core::io::{self, AgreementRow, EstimateRow, PropositionRow, ShockSummaryRow};
use ces_ge_core::par::Execution;
use ces_ge_core::synthetic::{generate_economy, simulate_linked_observation, SyntheticSpec};
use ces_ge_core::table::{build_regression_samples, SampleOptions};
use ces_ge_core::{Error, IOTable, LinkedObservation, SectorEstimate};

use crate::output::{emit, out_dir};
use crate::{AttributionArg, Common, DirectionArg, EstimateArgs, Method, PropositionArgs, ShockArgs, SynthArgs};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NO_ESTIMABLE: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

fn code_of(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. }
        | Error::NonpositivePrice { .. }
        | Error::SingularSystem(_)
        | Error::ZeroGamma { .. }
        | Error::ConsistencyFailure { .. } => EXIT_SOLVER,
        _ => EXIT_INPUT,
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = error.downcast_ref::<Error>().map_or(EXIT_INPUT, code_of);
        Failure { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: code_of(&e), error: e.into() }
    }
}

type Run = Result<(), Failure>;

fn input(msg: String) -> Failure {
    Failure { code: EXIT_INPUT, error: anyhow!(msg) }
}

fn execution(c: &Common) -> Execution {
    if c.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn attribution(a: AttributionArg) -> Attribution {
    match a {
        AttributionArg::Producing => Attribution::Producing,
        AttributionArg::FinalDemand => Attribution::FinalDemand,
    }
}

fn load(path: &std::path::Path, renormalize: bool) -> anyhow::Result<(io::Manifest, IOTable)> {
    let m = io::read_manifest(path)?;
    let t = io::load_table(&m, renormalize).with_context(|| format!("loading {}", path.display()))?;
    let bad = t.validate();
    if let Some(v) = bad.first() {
        return Err(anyhow!("{}: {v} ({} violations)", path.display(), bad.len()));
    }
    Ok((m, t))
}

#[derive(Serialize)]
struct SummaryRow {
    mode: &'static str,
    mean_sigma: f64,
    sectors: usize,
    significant: usize,
}

#[derive(Serialize)]
struct ElasticityPoint {
    sector: usize,
    label: String,
    p_value: f64,
    sigma: f64,
    significant: bool,
}

#[derive(Serialize)]
struct TfpgPoint {
    sector: usize,
    label: String,
    tfpg_translog: f64,
    tfpg_ces: f64,
    tag: &'static str,
}

pub fn estimate(a: &EstimateArgs) -> Run {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(input(format!("--alpha must lie in (0, 1), got {}", a.alpha)));
    }
    let (m0, t0) = load(&a.period0, a.renormalize)?;
    let (m1, t1) = load(&a.period1, a.renormalize)?;
    let deflator_path = a
        .deflators
        .clone()
        .or(m1.deflators)
        .or(m0.deflators)
        .ok_or_else(|| input("no deflators given: pass --deflators or name them in a manifest".into()))?;
    let deflators = io::read_deflators(&deflator_path)?;
    let labels = t0.labels.clone();
    let obs = LinkedObservation::new(t0, t1, deflators)?;
    let samples = build_regression_samples(&obs, SampleOptions { exclude_diagonal: a.exclude_diagonal });
    let cfg = EstimationConfig {
        alpha: a.alpha,
        errors: if a.robust_errors { StdErrors::Robust } else { StdErrors::Classical },
        bootstrap: (a.bootstrap_reps > 0).then_some(BootstrapConfig {
            reps: a.bootstrap_reps,
            seed: a.seed,
            scheme: if a.residual_bootstrap { BootstrapScheme::Residual } else { BootstrapScheme::Pairs },
        }),
        execution: execution(&a.common),
    };
    let outcomes = estimate_all(&obs, &samples, &cfg);
    let estimates: Vec<SectorEstimate> = outcomes.iter().filter_map(|o| o.estimate().cloned()).collect();
    if estimates.is_empty() {
        return Err(Failure {
            code: EXIT_NO_ESTIMABLE,
            error: anyhow!("no estimable sectors among {} (each needs at least 3 positive-share factors with price variation)", obs.n()),
        });
    }
    for o in &outcomes {
        match o {
            SectorOutcome::Skipped { sector, n_obs, reason } => {
                eprintln!("sector {} ({}): skipped, {reason} with {n_obs} rows", sector + 1, labels[*sector])
            }
            SectorOutcome::Estimated { bootstrap_error: Some(e), .. } => eprintln!("{e}"),
            _ => {}
        }
    }

    let dir = &a.common.out;
    let json = a.common.json;
    out_dir(dir)?;
    let rows: Vec<EstimateRow> = outcomes.iter().map(|o| EstimateRow::from_outcome(o, &labels)).collect();
    emit(dir, "estimates", &rows, json)?;
    let agree: Vec<AgreementRow> = agreement_table(&outcomes, a.alpha).iter().map(AgreementRow::from).collect();
    emit(dir, "agreement", &agree, json)?;

    let summary: Vec<SummaryRow> = [(SummaryMode::SignificantOnly, "significant-only"), (SummaryMode::All, "all")]
        .into_iter()
        .map(|(mode, label)| {
            let s = summarize_elasticities(&estimates, mode);
            SummaryRow { mode: label, mean_sigma: s.mean_sigma, sectors: s.n_sectors, significant: s.n_significant }
        })
        .collect();
    emit(dir, "elasticity_summary", &summary, json)?;

    let scatter: Vec<ElasticityPoint> = estimates
        .iter()
        .map(|e| ElasticityPoint {
            sector: e.sector + 1,
            label: labels[e.sector].clone(),
            p_value: e.p_slope,
            sigma: e.raw_sigma(),
            significant: !e.accepted_null,
        })
        .collect();
    emit(dir, "fig_elasticity_pvalue", &scatter, json)?;

    let tfpg: Vec<TfpgPoint> = outcomes
        .iter()
        .filter_map(|o| match o {
            SectorOutcome::Estimated { estimate: e, tornqvist: Some(t), .. } => e.tfpg.map(|c| TfpgPoint {
                sector: e.sector + 1,
                label: labels[e.sector].clone(),
                tfpg_translog: *t,
                tfpg_ces: c,
                tag: if e.intercept_significant(a.alpha) { "slope-and-constant" } else { "slope-only" },
            }),
            _ => None,
        })
        .collect();
    emit(dir, "fig_tfpg_scatter", &tfpg, json)?;
    eprintln!("{} of {} sectors estimated, wrote {}", estimates.len(), obs.n(), dir.display());
    Ok(())
}

/// Parses `sector=<id or label>,factor=<f>`; ids are one-based.
pub fn parse_shock(spec: &str, labels: &[String]) -> Result<(usize, f64), String> {
    let (mut sector, mut factor) = (None, None);
    for part in spec.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("shock `{spec}`: expected key=value pairs"))?;
        match k.trim() {
            "sector" => sector = Some(v.trim().to_string()),
            "factor" => {
                factor = Some(v.trim().parse::<f64>().map_err(|_| format!("shock `{spec}`: bad factor `{v}`"))?)
            }
            other => return Err(format!("shock `{spec}`: unknown key `{other}`")),
        }
    }
    let sector = sector.ok_or_else(|| format!("shock `{spec}`: missing sector"))?;
    let factor = factor.ok_or_else(|| format!("shock `{spec}`: missing factor"))?;
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(format!("shock `{spec}`: factor must be positive"));
    }
    let j = match labels.iter().position(|l| *l == sector) {
        Some(j) => j,
        None => match sector.parse::<usize>() {
            Ok(id) if (1..=labels.len()).contains(&id) => id - 1,
            _ => return Err(format!("shock `{spec}`: no sector `{sector}` among {}", labels.len())),
        },
    };
    Ok((j, factor))
}

fn shock_vector(specs: &[String], labels: &[String]) -> Result<(Vec<f64>, Vec<usize>), Failure> {
    let mut z = vec![1.0; labels.len()];
    let mut hit = Vec::new();
    for s in specs {
        let (j, f) = parse_shock(s, labels).map_err(input)?;
        z[j] *= f;
        if !hit.contains(&j) {
            hit.push(j);
        }
    }
    Ok((z, hit))
}

fn solver_options(tol: f64, max_iter: usize) -> Result<SolverOptions, Failure> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(input("--tol must be positive and --max-iter at least 1".into()));
    }
    Ok(SolverOptions { tol, max_iter, ..SolverOptions::default() })
}

pub fn shock(a: &ShockArgs) -> Run {
    let (_, table) = load(&a.economy, a.renormalize)?;
    let n = table.n();
    let labels = table.labels.clone();
    let (z, hit) = shock_vector(&a.shock, &labels)?;
    let opts = solver_options(a.tol, a.max_iter)?;
    let estimates = match &a.estimates {
        Some(p) => Some(io::read_estimates(p)?),
        None => None,
    };
    let base = Economy::uniform(table, 0.0)?;
    let gross = base.table().gross_output()?;
    let shocked_output: f64 = hit.iter().map(|&j| gross[j]).sum();

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &method in &a.method {
        let gamma_mode = match method {
            Method::CesAll => Some(GammaMode::AllEstimates),
            Method::Ces | Method::CesPaperClosedForm => Some(GammaMode::SignificantOnly),
            _ => None,
        };
        let economy = match gamma_mode {
            Some(mode) => {
                let est = estimates
                    .as_ref()
                    .ok_or_else(|| input(format!("method {} needs --estimates", method.label())))?;
                base.with_gamma(gamma_from_estimates(n, est, mode))?
            }
            None => base.clone(),
        };
        let price_method = match method {
            Method::Leontief => PriceMethod::Leontief,
            Method::CobbDouglas => PriceMethod::CobbDouglas,
            Method::Ces | Method::CesAll => PriceMethod::Ces,
            Method::CesPaperClosedForm => PriceMethod::CesPaperClosedForm,
        };
        let r = solve_shock(&economy, &z, price_method, &opts, attribution(a.attribution))
            .with_context(|| format!("method {}", method.label()))?;
        let mut part = io::shock_rows(&r, &labels);
        for row in &mut part {
            row.method = method.label().into();
        }
        rows.extend(part);
        summary.push(ShockSummaryRow {
            method: method.label().into(),
            scs_total: r.scs_total,
            kurtosis: r.kurtosis,
            iterations: r.iterations,
            residual: r.residual,
            shocked_output,
        });
    }
    let dir = &a.common.out;
    out_dir(dir)?;
    emit(dir, "shock_result", &rows, a.common.json)?;
    emit(dir, "shock_summary", &summary, a.common.json)?;
    Ok(())
}

#[derive(Serialize)]
struct ScsPoint {
    gamma: f64,
    sector: usize,
    label: String,
    scs: f64,
}

pub fn proposition(a: &PropositionArgs) -> Run {
    if let Some(g) = a.gamma_grid.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(input(format!("--gamma-grid values must lie in [0, 1], got {g}")));
    }
    let (_, table) = load(&a.economy, a.renormalize)?;
    let n = table.n();
    let labels = table.labels.clone();
    let opts = solver_options(a.tol, a.max_iter)?;
    let att = attribution(a.attribution);
    let wanted = match a.direction {
        DirectionArg::Up => Direction::Up,
        DirectionArg::Down => Direction::Down,
    };
    let z = if a.shock.is_empty() {
        let spec = SyntheticSpec { n, seed: a.seed, z_range: (1.0, 2.0), ..SyntheticSpec::default() };
        let up = spec.draw_productivity();
        match wanted {
            Direction::Up => up,
            Direction::Down => up.iter().map(|v| 1.0 / v).collect(),
        }
    } else {
        shock_vector(&a.shock, &labels)?.0
    };
    let all_one = z.iter().all(|&v| v == 1.0);
    if !all_one && Direction::of(&z) != Some(wanted) {
        return Err(input(format!("--shock does not move every sector {}", wanted.label())));
    }
    let economy = Economy::uniform(table, 0.0)?;

    let mut rows = Vec::new();
    let mut points = Vec::new();
    for &g in &a.gamma_grid {
        match proposition_check(&economy, g, &z, &opts, att) {
            Ok(r) => {
                let mut row = PropositionRow::uniform(&r, &labels);
                row.direction = wanted.label().into();
                rows.push(row);
                points.extend(r.scs_dist.iter().enumerate().map(|(j, &s)| ScsPoint {
                    gamma: g,
                    sector: j + 1,
                    label: labels[j].clone(),
                    scs: s,
                }));
            }
            Err(e) => rows.push(note_row("uniform", wanted, &io::fmt_f64(g), e.to_string())),
        }
    }
    match remark_search(&economy, &z, a.sigma_max, a.trials, a.seed, &opts, att, execution(&a.common)) {
        Ok(w) if w.is_empty() => rows.push(PropositionRow::no_witness(wanted.label(), a.trials)),
        Ok(w) => rows.extend(w.iter().map(|w| PropositionRow::witness(w, wanted.label(), &labels))),
        Err(e) => rows.push(note_row("remark-witness", wanted, "heterogeneous", format!("search failed: {e}"))),
    }
    let dir = &a.common.out;
    out_dir(dir)?;
    emit(dir, "proposition_report", &rows, a.common.json)?;
    emit(dir, "proposition_scs", &points, a.common.json)?;
    Ok(())
}

fn note_row(kind: &str, d: Direction, gamma: &str, note: String) -> PropositionRow {
    PropositionRow {
        kind: kind.into(),
        direction: d.label().into(),
        gamma: gamma.into(),
        trial: None,
        holds: false,
        worst_sector: None,
        worst_label: String::new(),
        worst_value: None,
        price_order_holds: None,
        note,
    }
}

pub fn synth(a: &SynthArgs) -> Run {
    let spec = SyntheticSpec {
        n: a.n,
        seed: a.seed,
        gamma_range: (a.gamma_min, a.gamma_max),
        z_range: (a.z_min, a.z_max),
        density: a.density,
        noise_sd: a.noise,
        ..SyntheticSpec::default()
    };
    let economy = generate_economy(&spec)?;
    let z = spec.draw_productivity();
    let obs = simulate_linked_observation(&economy, &z, a.noise, a.seed, &SolverOptions::default())?;
    io::write_bundle(&a.common.out, &obs, economy.gamma(), &z)?;
    if a.common.json {
        let truth: Vec<io::TruthRow> = io::read_rows(a.common.out.join("truth.csv"))?;
        emit(&a.common.out, "truth", &truth, true)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shock_specs() {
        let labels: Vec<String> = ["a", "b", "7"].iter().map(|s| s.to_string()).collect();
        assert_eq!(parse_shock("sector=2,factor=2.0", &labels), Ok((1, 2.0)));
        assert_eq!(parse_shock("factor=0.5, sector=a", &labels), Ok((0, 0.5)));
        // a label wins over an id
        assert_eq!(parse_shock("sector=7,factor=3", &labels), Ok((2, 3.0)));
        assert!(parse_shock("sector=4,factor=2", &labels).is_err());
        assert!(parse_shock("sector=1,factor=-1", &labels).is_err());
        assert!(parse_shock("sector=1", &labels).is_err());
        assert!(parse_shock("sector=1,factor=2,x=1", &labels).is_err());
    }

    #[test]
    fn solver_errors_map_to_exit_4() {
        let f: Failure = Error::NonConvergence { iterations: 3, residual: 1.0 }.into();
        assert_eq!(f.code, EXIT_SOLVER);
        let f: Failure = anyhow::Error::from(Error::InvalidInput("x".into())).context("ctx").into();
        assert_eq!(f.code, EXIT_INPUT);
        let f: Failure = anyhow::Error::from(Error::ZeroGamma { sector: 0 }).context("ctx").into();
        assert_eq!(f.code, EXIT_SOLVER);
    }
}
