use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use mereo_core::doubleket::GammaOperator;
use mereo_core::holism::{
    certify_rank1, commutator_replay, holistic_lattice, marginal_entropy, marginal_state, von_neumann_entropy,
    Convention, HolismVerdict, Witness,
};
use mereo_core::search::{brute_force_grid_d2, density_scan, minimize, GridResult, SearchConfig};
use mereo_core::{demo, ComplexMatrix, SystemDims, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

use crate::io::{GammaSource, MatrixJson};
use crate::CliError;

pub const VERSION: &str = concat!("mereo ", env!("CARGO_PKG_VERSION"), " (report schema 1)");

/// Envelope shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config_echo: Value,
    pub results: Value,
    /// Wall-clock seconds per phase.
    pub timings: BTreeMap<String, f64>,
    pub version: String,
}

/// Report plus any invariant violations found while producing it.
pub struct Outcome {
    pub report: RunReport,
    pub summary: Vec<String>,
    pub violations: Vec<String>,
}

struct Timer(BTreeMap<String, f64>);

impl Timer {
    fn new() -> Self {
        Self(BTreeMap::new())
    }

    fn phase<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.0.insert(name.into(), start.elapsed().as_secs_f64());
        out
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn envelope(command: &str, config_echo: Value, results: Value, timer: Timer) -> RunReport {
    RunReport {
        command: command.into(),
        config_echo,
        results,
        timings: timer.0,
        version: VERSION.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConventionFlag {
    Atleastone,
    Both,
    /// Report both conventions.
    Bothreport,
}

impl ConventionFlag {
    fn conventions(self) -> Vec<Convention> {
        match self {
            ConventionFlag::Atleastone => vec![Convention::AtLeastOneNontrivial],
            ConventionFlag::Both => vec![Convention::BothNontrivial],
            ConventionFlag::Bothreport => Convention::ALL.to_vec(),
        }
    }
}

#[derive(Serialize)]
struct WitnessJson {
    p: MatrixJson,
    q: MatrixJson,
    rank_p: usize,
    rank_q: usize,
    commutator_norm: f64,
    local_action_replay: f64,
    cooccurrence_weight: f64,
}

#[derive(Serialize)]
struct VerdictJson {
    convention: Convention,
    holistic: bool,
    strictly_no_commuting_product: bool,
    rank_of_gamma: usize,
    lambda1_witness: Option<WitnessJson>,
    lambda0_witness: Option<WitnessJson>,
}

/// Largest commutator norm accepted when replaying a certifier witness. A
/// co-occurring witness built from a rank truncated at `tol_rank` replays
/// to about the discarded singular values.
fn witness_bound(dims: SystemDims, tol: &Tolerances) -> f64 {
    tol.tol_compat.max(2.0 * tol.tol_rank * (dims.d_a.min(dims.d_b) as f64).sqrt())
}

fn witness_json(g: &GammaOperator, w: &Witness, label: &str, tol: &Tolerances, violations: &mut Vec<String>) -> Result<WitnessJson, CliError> {
    let (p, q) = (w.pair.p(), w.pair.q());
    let replay = commutator_replay(g, p, q)?;
    let bound = witness_bound(g.dims(), tol);
    if replay.direct > bound {
        violations.push(format!("{label} witness replays to {:e} > {bound:e}", replay.direct));
    }
    if replay.discrepancy() > tol.tol_compat {
        violations.push(format!("{label} witness replay routes disagree by {:e}", replay.discrepancy()));
    }
    Ok(WitnessJson {
        p: p.matrix().into(),
        q: q.matrix().into(),
        rank_p: p.rank(),
        rank_q: q.rank(),
        commutator_norm: replay.direct,
        local_action_replay: replay.local_action,
        cooccurrence_weight: w.cooccurrence_weight,
    })
}

fn verdict_json(g: &GammaOperator, v: &HolismVerdict, tol: &Tolerances, violations: &mut Vec<String>) -> Result<VerdictJson, CliError> {
    let name = v.convention.name();
    Ok(VerdictJson {
        convention: v.convention,
        holistic: v.holistic,
        strictly_no_commuting_product: v.strictly_no_commuting_product,
        rank_of_gamma: v.rank_of_gamma,
        lambda1_witness: v
            .lambda1_witness
            .as_ref()
            .map(|w| witness_json(g, w, &format!("{name} co-occurring"), tol, violations))
            .transpose()?,
        lambda0_witness: v
            .lambda0_witness
            .as_ref()
            .map(|w| witness_json(g, w, &format!("{name} exclusive"), tol, violations))
            .transpose()?,
    })
}

fn gamma_echo(source: &GammaSource, g: &GammaOperator) -> Value {
    json!({ "source": source, "gamma": MatrixJson::from(g.matrix()), "dims": g.dims() })
}

pub fn certify(source: &GammaSource, convention: ConventionFlag, tol: &Tolerances) -> Result<Outcome, CliError> {
    let mut timer = Timer::new();
    let g = timer.phase("load", || source.load())?;
    let mut violations = Vec::new();
    let verdicts = timer.phase("certify", || {
        convention
            .conventions()
            .into_iter()
            .map(|c| verdict_json(&g, &certify_rank1(&g, c, tol), tol, &mut violations))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let summary = verdicts
        .iter()
        .map(|v| {
            format!(
                "{}: holistic = {}, rank = {}, exclusive witness = {}",
                v.convention.name(),
                v.holistic,
                v.rank_of_gamma,
                v.lambda0_witness.is_some()
            )
        })
        .collect();
    let results = json!({ "singular_values": g.singular_values(), "verdicts": verdicts });
    let config = json!({ "gamma": gamma_echo(source, &g), "convention": convention, "tolerances": tol });
    Ok(Outcome {
        report: envelope("certify", config, results, timer),
        summary,
        violations,
    })
}

#[derive(Serialize)]
struct OracleJson {
    resolution: usize,
    grid: GridResult,
    abs_difference: f64,
}

pub fn search(
    source: &GammaSource,
    cfg: &SearchConfig,
    oracle: Option<usize>,
    tol: &Tolerances,
) -> Result<Outcome, CliError> {
    let mut timer = Timer::new();
    let g = timer.phase("load", || source.load())?;
    let r = timer.phase("search", || minimize(&g, cfg))?;
    let mut violations = Vec::new();
    let replay = commutator_replay(&g, &r.argmin_p, &r.argmin_q)?;
    if (replay.direct - r.commutator_norm).abs() > 1e-8 {
        violations.push(format!(
            "argmin replays to {:e}, search reported {:e}",
            replay.direct, r.commutator_norm
        ));
    }
    let square2 = g.dims() == SystemDims { d_a: 2, d_b: 2 } && (cfg.rank_p, cfg.rank_q) == (1, 1);
    let oracle = match oracle {
        Some(resolution) if square2 => {
            let grid = timer.phase("oracle", || brute_force_grid_d2(&g, resolution, cfg.exclude_exclusive))?;
            Some(OracleJson {
                resolution,
                abs_difference: (grid.min_value - r.min_value).abs(),
                grid,
            })
        }
        _ => None,
    };
    let mut summary = vec![format!(
        "min_value = {:e}, commutator = {:e}, weight = {:.6}, converged = {}",
        r.min_value, r.commutator_norm, r.cooccurrence_weight, r.converged
    )];
    if let Some(o) = &oracle {
        summary.push(format!("grid oracle ({}^4): min_value = {:e}", o.resolution, o.grid.min_value));
    }
    let results = json!({
        "min_value": r.min_value,
        "objective": r.objective,
        "commutator_norm": r.commutator_norm,
        "replayed_commutator_norm": replay.direct,
        "cooccurrence_weight": r.cooccurrence_weight,
        "argmin_p": MatrixJson::from(r.argmin_p.matrix()),
        "argmin_q": MatrixJson::from(r.argmin_q.matrix()),
        "iterations_used": r.iterations_used,
        "converged": r.converged,
        "best_restart": r.best_restart,
        "oracle": oracle,
    });
    let config = json!({
        "gamma": gamma_echo(source, &g),
        "search": cfg,
        "oracle_resolution": oracle.as_ref().map(|o| o.resolution),
        "tolerances": tol,
    });
    Ok(Outcome {
        report: envelope("search", config, results, timer),
        summary,
        violations,
    })
}

pub fn density(
    dims: SystemDims,
    samples: usize,
    seed: u64,
    csv_path: Option<&Path>,
    tol: &Tolerances,
) -> Result<Outcome, CliError> {
    let mut timer = Timer::new();
    let r = timer.phase("scan", || density_scan(dims, samples, seed, tol))?;
    if let Some(path) = csv_path {
        timer.phase("csv", || -> Result<(), CliError> {
            let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Output(e.to_string()))?;
            for row in &r.rows {
                w.serialize(row).map_err(|e| CliError::Output(e.to_string()))?;
            }
            w.flush().map_err(|e| CliError::Output(e.to_string()))
        })?;
    }
    let summary = vec![format!(
        "{dims}, {samples} samples: holistic fraction {} (at least one nontrivial), {} (both nontrivial)",
        r.fraction_atleastone, r.fraction_both
    )];
    let config = json!({
        "dims": dims,
        "samples": samples,
        "seed": seed,
        "csv": csv_path,
        "tolerances": tol,
    });
    Ok(Outcome {
        report: envelope("density", config, to_value(&r), timer),
        summary,
        violations: Vec::new(),
    })
}

#[derive(Serialize)]
struct MemberJson {
    gamma: MatrixJson,
    property: MatrixJson,
    smallest_singular_value: f64,
    holistic_atleastone: bool,
    holistic_both: bool,
}

/// Pairwise commutator norms above this are reported as violations.
pub const LATTICE_COMMUTATOR_TOL: f64 = 1e-9;

pub fn lattice(source: &GammaSource, k: usize, seed: u64, tol: &Tolerances) -> Result<Outcome, CliError> {
    let mut timer = Timer::new();
    let g = timer.phase("load", || source.load())?;
    let lat = timer.phase("build", || holistic_lattice(&g, k, seed, tol))?;
    let mut violations = Vec::new();

    let props = &lat.properties;
    let n = props.len();
    let mut commutators = vec![vec![0.0; n]; n];
    let mut exclusive = vec![vec![true; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (props[i].matrix(), props[j].matrix());
            commutators[i][j] = a.commutator(b).frobenius_norm();
            exclusive[i][j] = props[i].mutually_exclusive(&props[j], tol)?;
            if commutators[i][j] > LATTICE_COMMUTATOR_TOL {
                violations.push(format!("members {i} and {j} commute only to {:e}", commutators[i][j]));
            }
        }
    }
    let dim = g.dims().total();
    let sum = props
        .iter()
        .fold(ComplexMatrix::zeros(dim, dim), |acc, p| &acc + p.matrix());
    let identity_deviation = sum.distance(&ComplexMatrix::identity(dim));

    let members: Vec<MemberJson> = lat
        .gammas
        .iter()
        .zip(props)
        .map(|(gi, p)| MemberJson {
            gamma: gi.matrix().into(),
            property: p.matrix().into(),
            smallest_singular_value: gi.smallest_singular_value(),
            holistic_atleastone: certify_rank1(gi, Convention::AtLeastOneNontrivial, tol).holistic,
            holistic_both: certify_rank1(gi, Convention::BothNontrivial, tol).holistic,
        })
        .collect();
    let summary = vec![format!(
        "{n} members, max pairwise commutator {:e}, distance of sum to identity {:e}",
        commutators.iter().flatten().fold(0.0f64, |a, &b| a.max(b)),
        identity_deviation
    )];
    let results = json!({
        "members": members,
        "pairwise_commutator_norms": commutators,
        "pairwise_mutually_exclusive": exclusive,
        "complete": n == dim,
        "sum_identity_deviation": identity_deviation,
    });
    let config = json!({ "gamma": gamma_echo(source, &g), "k": k, "seed": seed, "tolerances": tol });
    Ok(Outcome {
        report: envelope("lattice", config, results, timer),
        summary,
        violations,
    })
}

pub fn entropy(source: &GammaSource, tol: &Tolerances) -> Result<Outcome, CliError> {
    let mut timer = Timer::new();
    let g = timer.phase("load", || source.load())?;
    let (e, s_eig) = timer.phase("entropy", || -> Result<_, CliError> {
        let e = marginal_entropy(&g);
        let s_eig = von_neumann_entropy(&marginal_state(&g), tol)?;
        Ok((e, s_eig))
    })?;
    let mut violations = Vec::new();
    if (e.s_part - s_eig).abs() > tol.tol_norm {
        violations.push(format!("singular-value and eigenvalue entropies differ: {} vs {s_eig}", e.s_part));
    }
    let summary = vec![format!("s_whole = {}, s_part = {}", e.s_whole, e.s_part)];
    let results = json!({
        "s_whole": e.s_whole,
        "s_part": e.s_part,
        "s_part_from_marginal_spectrum": s_eig,
        "singular_values": g.singular_values(),
    });
    let config = json!({ "gamma": gamma_echo(source, &g), "tolerances": tol });
    Ok(Outcome {
        report: envelope("entropy", config, results, timer),
        summary,
        violations,
    })
}

pub fn demo(seed: u64, tol: &Tolerances) -> Result<Outcome, CliError> {
    let mut timer = Timer::new();
    let (items, trips) = timer.phase("demo", || demo::run_demo(seed, tol))?;
    let violations = items
        .iter()
        .filter(|i| !i.passed)
        .map(|i| format!("{}: expected {}, observed {}", i.name, i.expected, i.observed))
        .collect();
    let summary = items
        .iter()
        .map(|i| format!("{} {}", if i.passed { "PASS" } else { "FAIL" }, i.name))
        .collect();
    let results = json!({ "items": items, "roundtrips": trips });
    let config = json!({ "seed": seed, "tolerances": tol });
    Ok(Outcome {
        report: envelope("demo", config, results, timer),
        summary,
        violations,
    })
}
