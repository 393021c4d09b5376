//! Monte-Carlo fidelity estimation: per-trial decoding with deterministic
//! rng streams, per-K decision extraction from one enumeration, metric
//! computation, and the timing probe for the enumeration stage.

use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use kmwm::code::{ClassLabel, CssCode, ErrorSector};
use kmwm::gkp::{
    decode_surface_gkp_correlated, decode_surface_gkp_separable, gkp_decoding_graph,
    GkpSurfaceCode,
};
use kmwm::graph::{build_sector_model_graph, DecodingGraph, ModelGraphConfig};
use kmwm::oracle::{brute_force_mld_gkp, brute_force_mld_qubit};
use kmwm::qubit::{decode_trace, pauli_to_gkp_params};

use crate::noise::{sample_binary_error, sample_shift, trial_rng, NoiseModel};

pub const ROOT_PI: f64 = 1.772_453_850_905_516;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeKind {
    SurfaceSquare,
    SurfaceHex,
    SurfaceRect,
    QubitSurface,
}

impl CodeKind {
    pub fn name(&self) -> &'static str {
        match self {
            CodeKind::SurfaceSquare => "surface-square",
            CodeKind::SurfaceHex => "surface-hex",
            CodeKind::SurfaceRect => "surface-rect",
            CodeKind::QubitSurface => "qubit-surface",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "surface-square" => CodeKind::SurfaceSquare,
            "surface-hex" => CodeKind::SurfaceHex,
            "surface-rect" => CodeKind::SurfaceRect,
            "qubit-surface" => CodeKind::QubitSurface,
            other => bail!("unknown code kind {other}"),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub code: CodeKind,
    pub distance: usize,
    /// Aspect-ratio square root for surface-rect.
    pub aspect: f64,
    pub noise: NoiseModel,
    pub k_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub threads: usize,
    pub include_explored: bool,
    pub n_v: i64,
}

impl RunConfig {
    pub fn noise_string(&self) -> String {
        format!("{}={}", self.noise.kind_name(), self.noise.value_string())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KPoint {
    pub k: usize,
    pub fidelity: f64,
    pub stderr: f64,
    pub seconds: f64,
    pub explored_included: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ReferencePoint {
    pub decoder: String,
    pub fidelity: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricPoint {
    pub k: usize,
    pub inaccuracy: f64,
    pub inaccuracy_stderr: f64,
    pub improvement: Option<f64>,
    pub improvement_stderr: Option<f64>,
    pub improvement_undefined: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Metrics {
    pub reference: ReferencePoint,
    pub points: Vec<MetricPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialSummary {
    pub code: String,
    pub distance: usize,
    pub noise_kind: String,
    pub noise_value: String,
    pub noise: String,
    pub seed: u64,
    pub trials: usize,
    pub include_explored: bool,
    pub points: Vec<KPoint>,
    pub metrics: Option<Metrics>,
}

struct TrialOutcome {
    /// Success of the K-matching decoder for each requested K, in k_list
    /// order.
    per_k: Vec<bool>,
    /// Success of the reference decoder, when one runs per trial.
    reference: Option<bool>,
}

/// The decoding problem built once per run and shared read-only by trials.
enum Decoder {
    /// One-sector qubit decoding with iid errors of probability eps.
    Qubit {
        sector: kmwm::SectorCode,
        weighted: DecodingGraph,
        eps: f64,
        exact_reference: bool,
    },
    /// Separable GKP decoding (square and rectangular shapes).
    Separable {
        code: GkpSurfaceCode,
        sigma: f64,
        exact_reference: bool,
    },
    /// Correlated GKP decoding via the root-less tree.
    Correlated {
        code: GkpSurfaceCode,
        sigma: f64,
        exact_reference: bool,
    },
}

fn build_decoder(cfg: &RunConfig) -> Result<Decoder> {
    cfg.noise.validate()?;
    let css = CssCode::rotated_surface(cfg.distance)
        .with_context(|| format!("distance {}", cfg.distance))?;
    let exact_reference = cfg.distance <= 3;
    match (cfg.code, &cfg.noise) {
        (CodeKind::QubitSurface, NoiseModel::IidPauli { eps_x, eps_y, eps_z }) => {
            if *eps_x != 0.0 || *eps_y != 0.0 {
                bail!("qubit-surface expects pure-Z noise (epsilon=<v>)");
            }
            let sector = css.sector(ErrorSector::ZErrors);
            let model = build_sector_model_graph(&sector, &ModelGraphConfig::default())?;
            let weighted = model.assign_edge_weights(&vec![*eps_z; sector.n_qubits])?;
            Ok(Decoder::Qubit {
                sector,
                weighted,
                eps: *eps_z,
                exact_reference,
            })
        }
        (CodeKind::QubitSurface, NoiseModel::Gaussian { .. }) => {
            bail!("qubit-surface takes epsilon noise, not sigma")
        }
        (kind, NoiseModel::Gaussian { sigma }) => {
            let code = match kind {
                CodeKind::SurfaceSquare => GkpSurfaceCode::square(css)?,
                CodeKind::SurfaceRect => {
                    GkpSurfaceCode::rectangular(css, &vec![cfg.aspect; cfg.distance * cfg.distance])?
                }
                CodeKind::SurfaceHex => GkpSurfaceCode::hexagonal(css)?,
                CodeKind::QubitSurface => unreachable!(),
            };
            if code.is_separable() {
                Ok(Decoder::Separable { code, sigma: *sigma, exact_reference })
            } else {
                Ok(Decoder::Correlated { code, sigma: *sigma, exact_reference })
            }
        }
        (_, NoiseModel::IidPauli { eps_x, eps_y, eps_z }) => {
            // discrete Pauli noise fixes the inner shapes and the noise
            // deviation through the channel equivalence
            let params = pauli_to_gkp_params(*eps_x, *eps_y, *eps_z)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            let n = css.n_qubits;
            let code = GkpSurfaceCode::new(css, vec![params.shape; n])
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            if code.is_separable() {
                Ok(Decoder::Separable { code, sigma: params.sigma, exact_reference })
            } else {
                Ok(Decoder::Correlated { code, sigma: params.sigma, exact_reference })
            }
        }
    }
}

fn run_one_trial(decoder: &Decoder, cfg: &RunConfig, trial: u64) -> TrialOutcome {
    let mut rng = trial_rng(cfg.seed, trial);
    let kmax = cfg.k_list.iter().copied().max().unwrap_or(1);
    match decoder {
        Decoder::Qubit { sector, weighted, eps, exact_reference } => {
            let error = sample_binary_error(sector.n_qubits, *eps, &mut rng);
            let syndrome = sector.syndrome_of(&error);
            let graph = weighted
                .highlight_from_syndrome(&syndrome)
                .expect("syndrome length matches");
            let truth = sector.class_of(&error);
            let trace = decode_trace(&graph, sector, kmax);
            let per_k = cfg
                .k_list
                .iter()
                .map(|&k| trace.tally(k, cfg.include_explored).decision() == Some(truth))
                .collect();
            let reference = exact_reference.then(|| {
                brute_force_mld_qubit(sector, &error, &vec![*eps; sector.n_qubits])
                    .expect("within oracle guard")
                    .decision()
                    == Some(truth)
            });
            TrialOutcome { per_k, reference }
        }
        Decoder::Separable { code, sigma, exact_reference } => {
            let shift = sample_shift(&cfg.noise, code, &mut rng);
            let eta_prime: Vec<f64> = shift.iter().map(|v| v / ROOT_PI).collect();
            // the candidate is the sampled shift itself, so a correct decode
            // names the identity class
            let decode = decode_surface_gkp_separable(code, &eta_prime, *sigma, cfg.n_v, kmax)
                .expect("valid separable decode");
            let per_k = cfg
                .k_list
                .iter()
                .map(|&k| decode.decision(k, cfg.include_explored) == Some(ClassLabel::I))
                .collect();
            let reference = exact_reference.then(|| {
                brute_force_mld_gkp(code, &eta_prime, *sigma, 8)
                    .expect("within oracle guard")
                    .decision()
                    == Some(ClassLabel::I)
            });
            TrialOutcome { per_k, reference }
        }
        Decoder::Correlated { code, sigma, exact_reference } => {
            let shift = sample_shift(&cfg.noise, code, &mut rng);
            let eta_prime: Vec<f64> = shift.iter().map(|v| v / ROOT_PI).collect();
            let decode =
                decode_surface_gkp_correlated(code, &eta_prime, *sigma, cfg.n_v as usize, kmax)
                    .expect("valid correlated decode");
            let per_k = cfg
                .k_list
                .iter()
                .map(|&k| decode.decision(k, cfg.include_explored) == Some(ClassLabel::I))
                .collect();
            let reference = exact_reference.then(|| {
                brute_force_mld_gkp(code, &eta_prime, *sigma, 8)
                    .expect("within oracle guard")
                    .decision()
                    == Some(ClassLabel::I)
            });
            TrialOutcome { per_k, reference }
        }
    }
}

fn binomial_stderr(f: f64, n: usize) -> f64 {
    (f * (1.0 - f) / n as f64).sqrt()
}

/// Run `cfg.trials` Monte-Carlo trials. Trial streams derive from
/// (seed, index), and aggregation runs in trial order, so the summary is a
/// pure function of the configuration regardless of `threads`.
pub fn run_trials(cfg: &RunConfig) -> Result<TrialSummary> {
    if cfg.trials == 0 {
        bail!("trials must be at least 1");
    }
    if cfg.k_list.is_empty() || cfg.k_list.iter().any(|&k| k == 0) {
        bail!("k list must hold positive values");
    }
    let decoder = build_decoder(cfg)?;
    let started = Instant::now();
    let outcomes: Vec<TrialOutcome> = if cfg.threads == 1 {
        (0..cfg.trials as u64)
            .map(|t| run_one_trial(&decoder, cfg, t))
            .collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .context("building thread pool")?;
        pool.install(|| {
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| run_one_trial(&decoder, cfg, t))
                .collect()
        })
    };
    let seconds = started.elapsed().as_secs_f64();
    let mut successes = vec![0usize; cfg.k_list.len()];
    let mut ref_successes = 0usize;
    let mut have_reference = false;
    for outcome in &outcomes {
        for (i, &ok) in outcome.per_k.iter().enumerate() {
            successes[i] += ok as usize;
        }
        if let Some(ok) = outcome.reference {
            have_reference = true;
            ref_successes += ok as usize;
        }
    }
    let points: Vec<KPoint> = cfg
        .k_list
        .iter()
        .zip(&successes)
        .map(|(&k, &s)| {
            let fidelity = s as f64 / cfg.trials as f64;
            KPoint {
                k,
                fidelity,
                stderr: binomial_stderr(fidelity, cfg.trials),
                seconds,
                explored_included: cfg.include_explored,
            }
        })
        .collect();
    let reference = if have_reference {
        let f = ref_successes as f64 / cfg.trials as f64;
        ReferencePoint {
            decoder: String::from("brute-force-mld"),
            fidelity: f,
            stderr: binomial_stderr(f, cfg.trials),
        }
    } else {
        // the largest-K point stands in for the optimal decoder at scales
        // where the exact reference is out of reach
        let best = points
            .iter()
            .max_by_key(|p| p.k)
            .expect("k list is nonempty");
        ReferencePoint {
            decoder: String::from("k-max"),
            fidelity: best.fidelity,
            stderr: best.stderr,
        }
    };
    let metrics = compute_metrics(&reference, &points);
    Ok(TrialSummary {
        code: cfg.code.name().to_string(),
        distance: cfg.distance,
        noise_kind: cfg.noise.kind_name().to_string(),
        noise_value: cfg.noise.value_string(),
        noise: cfg.noise_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        include_explored: cfg.include_explored,
        points,
        metrics: Some(metrics),
    })
}

/// Decoding inaccuracy |f_opt - f_K| / f_opt and accuracy improvement
/// |f_K - f_1| / |f_opt - f_1| with first-order binomial error bars. The
/// improvement is undefined when f_opt equals f_1 (or no K=1 point exists).
pub fn compute_metrics(reference: &ReferencePoint, points: &[KPoint]) -> Metrics {
    let f_opt = reference.fidelity;
    let s_opt = reference.stderr;
    let f1 = points.iter().find(|p| p.k == 1);
    let mut out = Vec::with_capacity(points.len());
    for p in points {
        let inaccuracy = (f_opt - p.fidelity).abs() / f_opt;
        let inaccuracy_stderr = ((p.stderr / f_opt).powi(2)
            + (p.fidelity * s_opt / (f_opt * f_opt)).powi(2))
        .sqrt();
        let (improvement, improvement_stderr, undefined) = match f1 {
            Some(one) if (f_opt - one.fidelity).abs() > 0.0 => {
                let d = (f_opt - one.fidelity).abs();
                let n = (p.fidelity - one.fidelity).abs();
                let value = n / d;
                let stderr = ((p.stderr / d).powi(2)
                    + (s_opt * n / (d * d)).powi(2)
                    + (one.stderr * (d - n) / (d * d)).powi(2))
                .sqrt();
                (Some(value), Some(stderr), false)
            }
            _ => (None, None, true),
        };
        out.push(MetricPoint {
            k: p.k,
            inaccuracy,
            inaccuracy_stderr,
            improvement,
            improvement_stderr,
            improvement_undefined: undefined,
        });
    }
    Metrics {
        reference: reference.clone(),
        points: out,
    }
}

/// Wall time of the enumeration stage alone: run `enumerate_mwms(g, k)` over
/// prepared decoding graphs and total the elapsed time.
pub fn time_enumeration(graphs: &[DecodingGraph], k: usize) -> f64 {
    let started = Instant::now();
    for g in graphs {
        let sols = kmwm::enumerate::enumerate_mwms(g, k);
        std::hint::black_box(sols);
    }
    started.elapsed().as_secs_f64()
}

/// Prepared GKP decoding graphs for `count` seeded Gaussian shifts, used by
/// the enumeration-timing probe.
pub fn prepared_gkp_graphs(
    distance: usize,
    sigma: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<DecodingGraph>> {
    let css = CssCode::rotated_surface(distance).context("building code")?;
    let code = GkpSurfaceCode::square(css).map_err(|e| anyhow::anyhow!("{e}"))?;
    let model = NoiseModel::Gaussian { sigma };
    let n = code.n_modes();
    let gamma = vec![1.0; n];
    let mut graphs = Vec::with_capacity(count);
    for t in 0..count {
        let mut rng = trial_rng(seed, t as u64);
        let shift = sample_shift(&model, &code, &mut rng);
        let eta_p: Vec<f64> = shift[n..].iter().map(|v| v / ROOT_PI).collect();
        let graph = gkp_decoding_graph(code.model_p.as_ref().expect("has checks"), &eta_p, &gamma)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        graphs.push(graph);
    }
    Ok(graphs)
}
