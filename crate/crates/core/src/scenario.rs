//! Declarative scenarios: parsing, fail-closed validation, execution and
//! artifact comparison.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::detectors::{AbsorptionCoefficient, DetectorModel};
use crate::error::{Error, Result};
use crate::hilbert::{
    io::SystemDocument, models, InitialSupport, SmearingKernel, SystemOptions, TauWeight, Tolerances,
    TransitionSystem, DEFAULT_TROTTER_STEPS,
};
use crate::linalg::max_abs_diff;
use crate::oscillations::{
    fit_wavenumber, localization_length, nonstandard_wavenumber, oscillation_curve, standard_wavenumber,
    OscillationScenario, Quadrature,
};
use crate::quadrature::{integrate, total_variation};
use crate::toa::{
    classical_toa, kijowski_density, phase_space_window, probability_current, semiclassical_correction,
    time_integrated, toa_density_absorption, toa_density_kernel, total_variation as density_tv,
    analytic_time_integrated, DeltaResolution, TimeGrid, ToADensity,
};
use crate::wavepacket::{gaussian_packet, wigner_rows, Dispersion, MomentumGrid, WavePacket};

pub const SCHEMA_VERSION: u32 = 1;
const UNITS: &str = "hbar=1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Transition,
    Toa,
    ClassicalCompare,
    Oscillation,
}

/// Scenario file as written by the user. The payload is checked against the
/// schema for `kind` by [`Scenario::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
    pub kind: ScenarioKind,
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PacketShape {
    Gaussian { p0: f64, width: f64, #[serde(default)] x0: f64 },
    Superposition { terms: Vec<PacketTerm> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketTerm {
    pub amplitude: [f64; 2],
    pub p0: f64,
    pub width: f64,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    pub grid: MomentumGrid,
    pub shape: PacketShape,
}

impl PacketSpec {
    pub fn build(&self) -> Result<WavePacket> {
        let psi = match &self.shape {
            PacketShape::Gaussian { p0, width, x0 } => gaussian_packet(&self.grid, *p0, *width, *x0)?,
            PacketShape::Superposition { terms } => {
                if terms.is_empty() {
                    return Err(Error::invariant("superposition needs at least one term"));
                }
                let parts = terms
                    .iter()
                    .map(|t| Ok((Complex64::new(t.amplitude[0], t.amplitude[1]), gaussian_packet(&self.grid, t.p0, t.width, t.x0)?)))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<(Complex64, &WavePacket)> = parts.iter().map(|(a, w)| (*a, w)).collect();
                WavePacket::superpose(&refs)?
            }
        };
        psi.with_positive_support()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlphaSpec {
    Constant { value: f64 },
    Detector { detector: DetectorModel },
}

impl AlphaSpec {
    fn build(&self, d: &Dispersion) -> Result<AbsorptionCoefficient> {
        match self {
            AlphaSpec::Constant { value } => AbsorptionCoefficient::constant(*value),
            AlphaSpec::Detector { detector } => Ok(detector.absorption(d)),
        }
    }
}

fn unit_alpha() -> AlphaSpec {
    AlphaSpec::Constant { value: 1.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityRequest {
    Kijowski,
    Current,
    Absorption { alpha: AlphaSpec },
    Kernel { detector: DetectorModel },
}

impl DensityRequest {
    fn label(&self) -> &'static str {
        match self {
            DensityRequest::Kijowski => "kijowski",
            DensityRequest::Current => "current",
            DensityRequest::Absorption { .. } => "absorption",
            DensityRequest::Kernel { .. } => "kernel",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToaPayload {
    pub packet: PacketSpec,
    pub dispersion: Dispersion,
    #[serde(rename = "L")]
    pub l: f64,
    pub times: TimeGrid,
    pub densities: Vec<DensityRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalPayload {
    pub packet: PacketSpec,
    pub dispersion: Dispersion,
    #[serde(rename = "L")]
    pub l: f64,
    pub times: TimeGrid,
    #[serde(default = "unit_alpha")]
    pub alpha: AlphaSpec,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default)]
    pub resolution: DeltaResolution,
    #[serde(default = "yes")]
    pub semiclassical: bool,
}

fn default_x_points() -> usize {
    401
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    Matrices {
        document: SystemDocument,
        #[serde(default)]
        exclusive: bool,
    },
    TwoLevel { epsilon: f64, g: f64 },
    RandomFourLevel {
        #[serde(default)]
        seed: Option<u64>,
        epsilon: f64,
    },
    Dephasing { model: models::DephasingModel },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionPayload {
    pub system: SystemSpec,
    #[serde(default)]
    pub initial_support: InitialSupport,
    #[serde(default = "default_steps")]
    pub trotter_steps: usize,
    #[serde(default = "default_tau_points")]
    pub tau_points: usize,
    pub times: TimeGrid,
    #[serde(default)]
    pub smearing_sigma: Option<f64>,
    #[serde(default)]
    pub tau_window: Option<f64>,
    #[serde(default)]
    pub intervals: Vec<[f64; 3]>,
    #[serde(default)]
    pub no_detection_horizon: Option<f64>,
}

fn default_steps() -> usize {
    DEFAULT_TROTTER_STEPS
}

fn default_tau_points() -> usize {
    201
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceGrid {
    pub l_min: f64,
    pub l_max: f64,
    pub n_points: usize,
}

impl DistanceGrid {
    fn nodes(&self) -> Result<Vec<f64>> {
        let g = TimeGrid::new(self.l_min, self.l_max, self.n_points)?;
        Ok(g.nodes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationPayload {
    pub scenario: OscillationScenario,
    pub alpha: usize,
    pub beta: usize,
    pub distances: DistanceGrid,
    #[serde(default)]
    pub quadrature: Quadrature,
    #[serde(default = "yes")]
    pub fit: bool,
}

/// A scenario whose payload parsed and whose physical inputs satisfy every
/// invariant; nothing has been computed yet.
#[derive(Debug, Clone)]
pub struct ValidatedScenario {
    pub name: String,
    pub output_dir: Option<PathBuf>,
    pub tolerances: Tolerances,
    pub plan: Plan,
}

#[derive(Debug, Clone)]
pub enum Plan {
    Transition(Box<TransitionPayload>, Box<TransitionSystem>),
    Toa(Box<ToaPayload>, WavePacket),
    ClassicalCompare(Box<ClassicalPayload>, WavePacket),
    Oscillation(Box<OscillationPayload>),
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Scenario::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<ValidatedScenario> {
        self.validate_with_scale(1.0)
    }

    /// Validation with all structural tolerances multiplied by `scale` (on
    /// top of the scenario's own `tolerance_scale`).
    pub fn validate_with_scale(&self, scale: f64) -> Result<ValidatedScenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invariant(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(u) = &self.units {
            if u.replace(' ', "") != UNITS {
                return Err(Error::invariant(format!("units must be '{UNITS}', got '{u}'")));
            }
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::invariant("name must be non-empty and free of path separators"));
        }
        let factor = self.tolerance_scale.unwrap_or(1.0) * scale;
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::invariant(format!("tolerance scale must be positive, got {factor}")));
        }
        let tolerances = Tolerances::default().scaled(factor);
        let payload = |v: &Value| -> Result<Value> { Ok(v.clone()) };
        let plan = match self.kind {
            ScenarioKind::Transition => {
                let p: TransitionPayload = serde_json::from_value(payload(&self.payload)?)?;
                let sys = build_system(&p, self.seed, tolerances)?;
                check_transition(&p)?;
                Plan::Transition(Box::new(p), Box::new(sys))
            }
            ScenarioKind::Toa => {
                let p: ToaPayload = serde_json::from_value(payload(&self.payload)?)?;
                p.dispersion.validate()?;
                check_distance(p.l)?;
                if p.densities.is_empty() {
                    return Err(Error::invariant("toa scenario requests no densities"));
                }
                for d in &p.densities {
                    match d {
                        DensityRequest::Current if !matches!(p.dispersion, Dispersion::Nonrelativistic { .. }) => {
                            return Err(Error::invariant("probability current needs a nonrelativistic dispersion"))
                        }
                        DensityRequest::Kernel { detector } if detector.distance() != p.l => {
                            return Err(Error::invariant("detector L must match the scenario L"))
                        }
                        DensityRequest::Absorption { alpha: AlphaSpec::Detector { detector } }
                            if detector.distance() != p.l =>
                        {
                            return Err(Error::invariant("detector L must match the scenario L"))
                        }
                        _ => {}
                    }
                }
                let psi = p.packet.build()?;
                Plan::Toa(Box::new(p), psi)
            }
            ScenarioKind::ClassicalCompare => {
                let p: ClassicalPayload = serde_json::from_value(payload(&self.payload)?)?;
                p.dispersion.validate()?;
                check_distance(p.l)?;
                p.alpha.build(&p.dispersion)?;
                if p.x_points < 4 {
                    return Err(Error::invariant("x_points must be at least 4"));
                }
                let psi = p.packet.build()?;
                Plan::ClassicalCompare(Box::new(p), psi)
            }
            ScenarioKind::Oscillation => {
                let p: OscillationPayload = serde_json::from_value(payload(&self.payload)?)?;
                let n = p.scenario.len();
                if p.alpha >= n || p.beta >= n {
                    return Err(Error::invariant(format!("flavor indices must be below {n}")));
                }
                let ls = p.distances.nodes()?;
                if ls[0] <= 0.0 {
                    return Err(Error::invariant("distances must be positive"));
                }
                Plan::Oscillation(Box::new(p))
            }
        };
        Ok(ValidatedScenario {
            name: self.name.clone(),
            output_dir: self.output_dir.as_ref().map(PathBuf::from),
            tolerances,
            plan,
        })
    }
}

fn check_distance(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::invariant(format!("L must be positive, got {l}")));
    }
    Ok(())
}

fn build_system(p: &TransitionPayload, seed: Option<u64>, tolerances: Tolerances) -> Result<TransitionSystem> {
    match &p.system {
        SystemSpec::Matrices { document, exclusive } => document.build(SystemOptions {
            exclusive: *exclusive,
            initial_support: p.initial_support,
            tolerances,
        }),
        SystemSpec::TwoLevel { epsilon, g } => models::two_level(*epsilon, *g),
        SystemSpec::RandomFourLevel { seed: s, epsilon } => {
            models::random_four_level(s.or(seed).unwrap_or(2024), *epsilon)
        }
        SystemSpec::Dephasing { model } => model.build(),
    }
}

fn check_transition(p: &TransitionPayload) -> Result<()> {
    if p.times.t_min() < 0.0 {
        return Err(Error::invariant("transition times must be non-negative"));
    }
    match (p.smearing_sigma, p.tau_window) {
        (Some(s), _) => {
            SmearingKernel::gaussian(s)?;
        }
        (None, Some(w)) if w.is_finite() && w > 0.0 => {}
        _ => {
            return Err(Error::invariant(
                "transition scenario needs smearing_sigma or a positive tau_window",
            ))
        }
    }
    if p.intervals.iter().any(|[a, b, c]| !(a <= b && b <= c)) {
        return Err(Error::invariant("intervals must be ordered t1 <= t2 <= t3"));
    }
    Ok(())
}

/// Files written by a run, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub directory: PathBuf,
    pub files: Vec<String>,
}

struct Writer {
    dir: PathBuf,
    files: Vec<String>,
}

impl Writer {
    fn csv(&mut self, name: &str, header: &[String], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.dir.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn density(&mut self, name: &str, d: &ToADensity) -> Result<()> {
        let file = fs::File::create(self.dir.join(name))?;
        d.write_csv(file)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(v)?;
        text.push('\n');
        fs::write(self.dir.join(name), text)?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn outcome<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

impl ValidatedScenario {
    /// Computes the scenario and writes `report.json` plus CSV artifacts into
    /// `out` (or the scenario's own output directory).
    pub fn run(&self, out: Option<&Path>) -> Result<RunSummary> {
        let dir = match (out, &self.output_dir) {
            (Some(d), _) => d.to_path_buf(),
            (None, Some(d)) => d.clone(),
            (None, None) => PathBuf::from("out").join(&self.name),
        };
        fs::create_dir_all(&dir)?;
        let mut w = Writer { dir: dir.clone(), files: Vec::new() };
        let report = match &self.plan {
            Plan::Transition(p, sys) => run_transition(&mut w, p, sys)?,
            Plan::Toa(p, psi) => run_toa(&mut w, p, psi)?,
            Plan::ClassicalCompare(p, psi) => run_classical(&mut w, p, psi)?,
            Plan::Oscillation(p) => run_oscillation(&mut w, p)?,
        };
        let report = json!({
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "tolerances": self.tolerances,
            "artifacts": w.files.clone(),
            "results": report,
        });
        w.json("report.json", &report)?;
        Ok(RunSummary { directory: dir, files: w.files })
    }
}

fn run_transition(w: &mut Writer, p: &TransitionPayload, sys: &TransitionSystem) -> Result<Value> {
    let steps = p.trotter_steps;
    let kernel = p.smearing_sigma.map(SmearingKernel::gaussian).transpose()?;
    let weight = match kernel {
        Some(k) => TauWeight::Smeared(k),
        None => TauWeight::Unsmeared { half_width: p.tau_window },
    };
    let labels: Vec<String> = sys.labels().map(str::to_string).collect();
    let times = p.times.nodes();
    let mut columns = Vec::new();
    let mut max_imag = BTreeMap::new();
    for label in &labels {
        let vals = times
            .iter()
            .map(|&t| sys.transition_density(label, t, weight, steps, p.tau_points))
            .collect::<Result<Vec<_>>>()?;
        let imag = vals.iter().fold(0.0f64, |a, v| a.max(v.imag.abs()));
        max_imag.insert(label.clone(), imag);
        columns.push(vals.into_iter().map(|v| v.value).collect::<Vec<_>>());
    }
    let header: Vec<String> = std::iter::once("t".to_string()).chain(labels.iter().cloned()).collect();
    w.csv(
        "transition_density.csv",
        &header,
        (0..times.len()).map(|j| std::iter::once(times[j]).chain(columns.iter().map(|c| c[j])).collect()),
    )?;
    let t_end = p.times.t_max();
    let s = sys.restricted_propagator(t_end, steps)?;
    let zeno = max_abs_diff(&s.matrix, &sys.zeno_limit(t_end));
    let mut povm = BTreeMap::new();
    if let Some(k) = kernel {
        for label in &labels {
            let mins = times
                .iter()
                .filter(|&&t| t >= k.amplitude_window())
                .map(|&t| Ok(sys.smeared_povm_element(label, t, &k, steps, p.tau_points)?.min_eigenvalue))
                .collect::<Result<Vec<f64>>>()?;
            povm.insert(label.clone(), mins.into_iter().fold(f64::INFINITY, f64::min));
        }
    }
    let no_detection = match (kernel, p.no_detection_horizon) {
        (Some(k), Some(h)) => Some(sys.no_detection_element(h, &k, 201, steps, p.tau_points)?.min_eigenvalue),
        _ => None,
    };
    let additivity: Vec<Value> = p
        .intervals
        .iter()
        .map(|[a, b, c]| {
            labels
                .iter()
                .map(|l| {
                    let r = sys.additivity(l, *a, *b, *c, steps, p.tau_points)?;
                    Ok(json!({
                        "label": l, "interval": [a, b, c], "whole": r.whole, "first": r.first,
                        "second": r.second, "offdiagonal": r.offdiagonal,
                        "relative_offdiagonal": r.relative_offdiagonal(), "defect": r.defect(),
                    }))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(json!({
        "dimension": sys.dim(),
        "support_loss": sys.support_loss(),
        "trotter_steps": steps,
        "propagator_convergence": s.convergence,
        "zeno_limit_distance": zeno,
        "density_max_imag": max_imag,
        "povm_min_eigenvalue": povm,
        "no_detection_min_eigenvalue": no_detection,
        "additivity": additivity,
    }))
}

fn density_report(d: &ToADensity) -> Value {
    json!({
        "normalization": d.normalization,
        "argmax_time": d.argmax_time(),
        "peak": d.peak(),
        "time_integrated": outcome(time_integrated(d)),
        "sidecar": d.sidecar(),
    })
}

fn run_toa(w: &mut Writer, p: &ToaPayload, psi: &WavePacket) -> Result<Value> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut densities = Vec::new();
    for req in &p.densities {
        let label = req.label();
        let count = seen.entry(label).or_insert(0);
        *count += 1;
        let name = if *count == 1 { label.to_string() } else { format!("{label}_{count}") };
        let (d, extra) = match req {
            DensityRequest::Kijowski => (kijowski_density(psi, &p.dispersion, p.l, &p.times)?, Value::Null),
            DensityRequest::Current => {
                (probability_current(psi, p.dispersion.mass(), p.l, &p.times)?, Value::Null)
            }
            DensityRequest::Absorption { alpha } => {
                let a = alpha.build(&p.dispersion)?;
                (toa_density_absorption(psi, &a, &p.dispersion, p.l, &p.times)?, Value::Null)
            }
            DensityRequest::Kernel { detector } => {
                let d = toa_density_kernel(psi, detector, &p.dispersion, &p.times)?;
                let analytic = analytic_time_integrated(psi, detector, &p.dispersion)?;
                let energies: Vec<f64> = psi.support(1e-3).iter().map(|&k| p.dispersion.energy(psi.grid().p(k))).collect();
                (d, json!({ "analytic_time_integrated": analytic, "detector": detector.diagnostics(&energies) }))
            }
        };
        let file = format!("density_{name}.csv");
        w.density(&file, &d)?;
        let mut r = density_report(&d);
        r["name"] = json!(name);
        r["file"] = json!(file);
        if !extra.is_null() {
            r["detector"] = extra;
        }
        densities.push(r);
    }
    Ok(json!({
        "packet": {
            "norm": psi.norm(),
            "mean_momentum": psi.mean_momentum(),
            "momentum_variance": psi.momentum_variance(),
            "negative_momentum_weight": psi.negative_momentum_weight(),
        },
        "densities": densities,
    }))
}

fn run_classical(w: &mut Writer, p: &ClassicalPayload, psi: &WavePacket) -> Result<Value> {
    let alpha = p.alpha.build(&p.dispersion)?;
    let quantum = toa_density_absorption(psi, &alpha, &p.dispersion, p.l, &p.times)?;
    let xs = phase_space_window(psi, p.x_points)?;
    let field = wigner_rows(psi, &xs)?;
    let classical = classical_toa(&field, &alpha, &p.dispersion, p.l, &p.times, p.resolution)?;
    w.density("quantum.csv", &quantum)?;
    w.density("classical.csv", &classical)?;
    let mut report = json!({
        "wigner_min": field.min(),
        "quantum": density_report(&quantum),
        "classical": density_report(&classical),
        "lost_mass": classical.diagnostics.lost_mass,
        "tv_classical": density_tv(&quantum, &classical)?,
    });
    if p.semiclassical {
        let sc = semiclassical_correction(&field, &alpha, &p.dispersion, p.l, &p.times)?;
        w.density("semiclassical.csv", &sc.corrected)?;
        report["semiclassical"] = density_report(&sc.corrected);
        report["correction_integral"] = json!(integrate(&sc.correction, p.times.dt()));
        report["tv_semiclassical"] = json!(density_tv(&quantum, &sc.corrected)?);
    }
    Ok(report)
}

fn run_oscillation(w: &mut Writer, p: &OscillationPayload) -> Result<Value> {
    let s = &p.scenario;
    let ls = p.distances.nodes()?;
    let vals = oscillation_curve(s, p.alpha, p.beta, &ls, p.quadrature)?;
    w.csv(
        "probability.csv",
        &["L".to_string(), "P_betaalpha".to_string()],
        ls.iter().zip(&vals).map(|(l, v)| vec![*l, v.value]),
    )?;
    let max_rel_imag = vals
        .iter()
        .fold(0.0f64, |a, v| a.max(v.imag.abs() / v.value.abs().max(f64::MIN_POSITIVE)));
    let fit = if p.fit {
        let samples: Vec<(f64, f64)> = ls.iter().zip(&vals).map(|(l, v)| (*l, v.value)).collect();
        outcome(fit_wavenumber(&samples))
    } else {
        Value::Null
    };
    let mut pairs = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            pairs.push(json!({
                "i": i, "j": j,
                "standard_k": standard_wavenumber(s, i, j),
                "nonstandard_k": nonstandard_wavenumber(s, i, j),
                "localization_length": localization_length(s, i, j),
            }));
        }
    }
    Ok(json!({
        "kernel": s.kernel(),
        "quadrature": p.quadrature,
        "max_relative_imag": max_rel_imag,
        "fit": fit,
        "pairs": pairs,
        "regime": s.regime_flags(p.distances.l_max),
    }))
}

/// Distances between two sampled curves on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub total_variation: f64,
    pub max_abs_difference: f64,
    /// `argmax(b) - argmax(a)` in grid units.
    pub argmax_shift: f64,
}

pub fn compare_series(grid_a: &[f64], a: &[f64], grid_b: &[f64], b: &[f64]) -> Result<Comparison> {
    if grid_a.len() != grid_b.len()
        || grid_a.iter().zip(grid_b).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(y.abs()).max(1.0))
    {
        return Err(Error::invalid("artifacts are sampled on different grids"));
    }
    if grid_a.len() < 2 {
        return Err(Error::invalid("artifacts need at least 2 samples"));
    }
    let h = (grid_a[grid_a.len() - 1] - grid_a[0]) / (grid_a.len() - 1) as f64;
    let argmax = |v: &[f64]| {
        (0..v.len()).fold(0, |best, j| if v[j] > v[best] { j } else { best })
    };
    Ok(Comparison {
        total_variation: total_variation(a, b, h)?,
        max_abs_difference: a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())),
        argmax_shift: grid_b[argmax(b)] - grid_a[argmax(a)],
    })
}

/// Reads the first two columns of a CSV artifact.
pub fn read_series(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::invalid(format!("{}: row has fewer than 2 columns", path.display())))?
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
        };
        x.push(parse(0)?);
        y.push(parse(1)?);
    }
    Ok((x, y))
}

pub fn compare_files(a: &Path, b: &Path) -> Result<Comparison> {
    let (xa, ya) = read_series(a)?;
    let (xb, yb) = read_series(b)?;
    compare_series(&xa, &ya, &xb, &yb)
}

/// Scenario files shipped with the crate, by file name.
pub const BUILTIN: &[(&str, &str)] = &[
    ("kijowski_gaussian.json", include_str!("../../../scenarios/kijowski_gaussian.json")),
    ("current_negativity.json", include_str!("../../../scenarios/current_negativity.json")),
    ("detector_kernels.json", include_str!("../../../scenarios/detector_kernels.json")),
    ("classical_compare.json", include_str!("../../../scenarios/classical_compare.json")),
    ("transition_4level.json", include_str!("../../../scenarios/transition_4level.json")),
    ("empty_outcomes.json", include_str!("../../../scenarios/empty_outcomes.json")),
    ("oscillation_two_flavor.json", include_str!("../../../scenarios/oscillation_two_flavor.json")),
    ("oscillation_two_flavor_constant.json", include_str!("../../../scenarios/oscillation_two_flavor_constant.json")),
];

pub fn builtin(name: &str) -> Option<Scenario> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name || n.trim_end_matches(".json") == name)
        .map(|(_, text)| Scenario::from_json(text).expect("builtin scenarios parse"))
}
