//! Detector models: momentum-space matrix elements `⟨p'|S(L)|p⟩` of the
//! time-of-arrival current and the absorption coefficients they induce.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavepacket::Dispersion;

/// Magnitude profile of the coupling `ũ(p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingShape {
    Constant {
        value: f64,
    },
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude · |p|^exponent`.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
    },
    /// Linear interpolation of `(re, im)` samples; zero outside the table.
    Tabulated {
        p: Vec<f64>,
        re: Vec<f64>,
        im: Vec<f64>,
    },
}

impl CouplingShape {
    fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            CouplingShape::Constant { value } if !value.is_finite() => {
                Err(Error::invariant("coupling value must be finite"))
            }
            CouplingShape::Gaussian { amplitude, center, width }
                if !(finite(&[*amplitude, *center]) && width.is_finite() && *width > 0.0) =>
            {
                Err(Error::invariant("gaussian coupling needs finite amplitude and positive width"))
            }
            CouplingShape::PowerLaw { amplitude, exponent } if !finite(&[*amplitude, *exponent]) => {
                Err(Error::invariant("power-law coupling parameters must be finite"))
            }
            CouplingShape::Tabulated { p, re, im } => {
                if p.len() < 2 || p.len() != re.len() || p.len() != im.len() {
                    return Err(Error::invariant(
                        "tabulated coupling needs at least two (p, re, im) rows of equal length",
                    ));
                }
                if !(finite(p) && finite(re) && finite(im)) || p.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::invariant(
                        "tabulated coupling needs finite values on increasing momenta",
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn eval(&self, p: f64) -> Complex64 {
        match self {
            CouplingShape::Constant { value } => Complex64::new(*value, 0.0),
            CouplingShape::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (p - center) / width;
                Complex64::new(amplitude * (-0.5 * z * z).exp(), 0.0)
            }
            CouplingShape::PowerLaw { amplitude, exponent } => {
                Complex64::new(amplitude * p.abs().powf(*exponent), 0.0)
            }
            CouplingShape::Tabulated { p: ps, re, im } => {
                if p < ps[0] || p > ps[ps.len() - 1] {
                    return Complex64::new(0.0, 0.0);
                }
                let j = ps.partition_point(|&q| q <= p).clamp(1, ps.len() - 1);
                let u = (p - ps[j - 1]) / (ps[j] - ps[j - 1]);
                Complex64::new(
                    re[j - 1] + u * (re[j] - re[j - 1]),
                    im[j - 1] + u * (im[j] - im[j - 1]),
                )
            }
        }
    }
}

/// `ũ(p) = shape(p) · e^{i phase_slope · p}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingFunction {
    pub shape: CouplingShape,
    pub phase_slope: f64,
}

impl CouplingFunction {
    pub fn new(shape: CouplingShape) -> Self {
        CouplingFunction {
            shape,
            phase_slope: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(CouplingShape::Constant { value })
    }

    pub fn with_phase_slope(mut self, slope: f64) -> Self {
        self.phase_slope = slope;
        self
    }

    pub fn eval(&self, p: f64) -> Complex64 {
        self.shape.eval(p) * Complex64::from_polar(1.0, self.phase_slope * p)
    }

    pub fn phase(&self, p: f64) -> f64 {
        self.eval(p).arg()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let shape = match &self.shape {
            CouplingShape::Constant { value } => CouplingShape::Constant { value: c * value },
            CouplingShape::Gaussian {
                amplitude,
                center,
                width,
            } => CouplingShape::Gaussian {
                amplitude: c * amplitude,
                center: *center,
                width: *width,
            },
            CouplingShape::PowerLaw { amplitude, exponent } => CouplingShape::PowerLaw {
                amplitude: c * amplitude,
                exponent: *exponent,
            },
            CouplingShape::Tabulated { p, re, im } => CouplingShape::Tabulated {
                p: p.clone(),
                re: re.iter().map(|x| c * x).collect(),
                im: im.iter().map(|x| c * x).collect(),
            },
        };
        CouplingFunction {
            shape,
            phase_slope: self.phase_slope,
        }
    }
}

/// Energy dependence `r(E)` of the separable coupling `ũ_δ(p,E) = ũ(p) r(E)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnergyProfile {
    #[default]
    Flat,
    Gaussian { center: f64, width: f64 },
}

impl EnergyProfile {
    fn eval(&self, e: f64) -> f64 {
        match *self {
            EnergyProfile::Flat => 1.0,
            EnergyProfile::Gaussian { center, width } => {
                let z = (e - center) / width;
                (-0.5 * z * z).exp()
            }
        }
    }
}

/// Detector density of states `w(E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DensityOfStates {
    Constant { value: f64 },
    /// `value` above `threshold`, zero below.
    Step { threshold: f64, value: f64 },
    Gaussian { amplitude: f64, center: f64, width: f64 },
    /// `amplitude · (E - threshold)^exponent` above `threshold`.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        threshold: f64,
    },
}

impl DensityOfStates {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            DensityOfStates::Constant { value } => value.is_finite() && value >= 0.0,
            DensityOfStates::Step { threshold, value } => {
                threshold.is_finite() && value.is_finite() && value >= 0.0
            }
            DensityOfStates::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude >= 0.0 && center.is_finite() && width > 0.0 && amplitude.is_finite(),
            DensityOfStates::PowerLaw {
                amplitude,
                exponent,
                threshold,
            } => amplitude >= 0.0 && amplitude.is_finite() && exponent.is_finite() && threshold.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invariant("density of states must be finite and non-negative"))
        }
    }

    pub fn eval(&self, e: f64) -> f64 {
        match *self {
            DensityOfStates::Constant { value } => value,
            DensityOfStates::Step { threshold, value } => {
                if e >= threshold {
                    value
                } else {
                    0.0
                }
            }
            DensityOfStates::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (e - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            DensityOfStates::PowerLaw {
                amplitude,
                exponent,
                threshold,
            } => {
                if e > threshold {
                    amplitude * (e - threshold).powf(exponent)
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DetectorKind {
    /// Narrowly localized coherent excitation of effective mass `mu_star`.
    Coherent { mu_star: f64, e0: f64, delta: f64 },
    /// Excitation whose centre of mass diffuses with constant `diffusion`.
    Decoherent {
        mu_star: f64,
        diffusion: f64,
        delta: f64,
    },
    /// Absorption into a band of detector levels with density `dos`.
    Energy {
        dos: DensityOfStates,
        delta: f64,
        profile: EnergyProfile,
    },
}

/// One detector at distance `L` from the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDetector", into = "RawDetector")]
pub struct DetectorModel {
    kind: DetectorKind,
    coupling: CouplingFunction,
    l: f64,
    keep_phase: bool,
    /// Momenta with `|p| <= p_exclusion` are treated as singular.
    p_exclusion: f64,
}

/// Flat configuration form, e.g.
/// `{"kind":"coherent","mu_star":1,"E0":0,"delta":0.1,"L":50,"coupling":{"family":"constant","value":1}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDetector {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_star: Option<f64>,
    #[serde(rename = "E0", default, skip_serializing_if = "Option::is_none")]
    pub e0: Option<f64>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<f64>,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dos: Option<DensityOfStates>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_profile: Option<EnergyProfile>,
    pub coupling: CouplingShape,
    #[serde(default)]
    pub phase_slope: f64,
    #[serde(default = "yes")]
    pub keep_phase: bool,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub p_exclusion: f64,
}

fn yes() -> bool {
    true
}

impl TryFrom<RawDetector> for DetectorModel {
    type Error = Error;
    fn try_from(r: RawDetector) -> Result<Self> {
        let stray = |name: &str, present: bool| {
            if present {
                Err(Error::invariant(format!("field '{name}' does not apply to a {} detector", r.kind)))
            } else {
                Ok(())
            }
        };
        let need = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| Error::invariant(format!("{} detector needs '{name}'", r.kind)))
        };
        let kind = match r.kind.as_str() {
            "coherent" => {
                stray("D", r.diffusion.is_some())?;
                stray("dos", r.dos.is_some())?;
                stray("energy_profile", r.energy_profile.is_some())?;
                DetectorKind::Coherent {
                    mu_star: need("mu_star", r.mu_star)?,
                    e0: r.e0.unwrap_or(0.0),
                    delta: r.delta,
                }
            }
            "decoherent" => {
                stray("E0", r.e0.is_some())?;
                stray("dos", r.dos.is_some())?;
                stray("energy_profile", r.energy_profile.is_some())?;
                DetectorKind::Decoherent {
                    mu_star: need("mu_star", r.mu_star)?,
                    diffusion: need("D", r.diffusion)?,
                    delta: r.delta,
                }
            }
            "energy" => {
                stray("mu_star", r.mu_star.is_some())?;
                stray("E0", r.e0.is_some())?;
                stray("D", r.diffusion.is_some())?;
                DetectorKind::Energy {
                    dos: r
                        .dos
                        .clone()
                        .ok_or_else(|| Error::invariant("energy detector needs 'dos'"))?,
                    delta: r.delta,
                    profile: r.energy_profile.clone().unwrap_or_default(),
                }
            }
            other => return Err(Error::invariant(format!("unknown detector kind '{other}'"))),
        };
        let coupling = CouplingFunction {
            shape: r.coupling,
            phase_slope: r.phase_slope,
        };
        let mut m = DetectorModel::new(kind, coupling, r.l)?.with_p_exclusion(r.p_exclusion)?;
        m.keep_phase = r.keep_phase;
        Ok(m)
    }
}

impl From<DetectorModel> for RawDetector {
    fn from(m: DetectorModel) -> Self {
        let (kind, mu_star, e0, diffusion, delta, dos, energy_profile) = match m.kind {
            DetectorKind::Coherent { mu_star, e0, delta } => {
                ("coherent", Some(mu_star), Some(e0), None, delta, None, None)
            }
            DetectorKind::Decoherent {
                mu_star,
                diffusion,
                delta,
            } => ("decoherent", Some(mu_star), None, Some(diffusion), delta, None, None),
            DetectorKind::Energy {
                dos,
                delta,
                profile,
            } => ("energy", None, None, None, delta, Some(dos), Some(profile)),
        };
        RawDetector {
            kind: kind.to_string(),
            mu_star,
            e0,
            diffusion,
            delta,
            dos,
            energy_profile,
            coupling: m.coupling.shape,
            phase_slope: m.coupling.phase_slope,
            keep_phase: m.keep_phase,
            l: m.l,
            p_exclusion: m.p_exclusion,
        }
    }
}

/// Validity and regime indicators of a detector for a given state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectorDiagnostics {
    /// `max ε μ* δ²` over the energies supplied (coherent model; should be ≪ 1).
    pub coherent_localization: Option<f64>,
    /// `D/μ*` (decoherent model; should be ≫ 1).
    pub diffusion_ratio: Option<f64>,
    /// `τ_dec = μ*² δ²/D` (decoherent model).
    pub tau_dec: Option<f64>,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invariant(format!("{name} must be positive, got {x}")))
    }
}

impl DetectorModel {
    pub fn new(kind: DetectorKind, coupling: CouplingFunction, l: f64) -> Result<Self> {
        match &kind {
            DetectorKind::Coherent { mu_star, e0, delta } => {
                positive("mu_star", *mu_star)?;
                positive("delta", *delta)?;
                if !e0.is_finite() {
                    return Err(Error::invariant("E0 must be finite"));
                }
            }
            DetectorKind::Decoherent {
                mu_star,
                diffusion,
                delta,
            } => {
                positive("mu_star", *mu_star)?;
                positive("D", *diffusion)?;
                positive("delta", *delta)?;
            }
            DetectorKind::Energy { dos, delta, profile } => {
                positive("delta", *delta)?;
                dos.validate()?;
                if let EnergyProfile::Gaussian { width, center } = profile {
                    positive("energy profile width", *width)?;
                    if !center.is_finite() {
                        return Err(Error::invariant("energy profile centre must be finite"));
                    }
                }
            }
        }
        coupling.shape.validate()?;
        if !coupling.phase_slope.is_finite() {
            return Err(Error::invariant("coupling phase slope must be finite"));
        }
        if !l.is_finite() {
            return Err(Error::invariant("detector distance L must be finite"));
        }
        Ok(DetectorModel {
            kind,
            coupling,
            l,
            keep_phase: true,
            p_exclusion: 0.0,
        })
    }

    pub fn coherent(mu_star: f64, e0: f64, delta: f64, coupling: CouplingFunction, l: f64) -> Result<Self> {
        Self::new(DetectorKind::Coherent { mu_star, e0, delta }, coupling, l)
    }

    pub fn decoherent(mu_star: f64, diffusion: f64, delta: f64, coupling: CouplingFunction, l: f64) -> Result<Self> {
        Self::new(
            DetectorKind::Decoherent {
                mu_star,
                diffusion,
                delta,
            },
            coupling,
            l,
        )
    }

    pub fn energy(dos: DensityOfStates, delta: f64, coupling: CouplingFunction, l: f64) -> Result<Self> {
        Self::new(
            DetectorKind::Energy {
                dos,
                delta,
                profile: EnergyProfile::Flat,
            },
            coupling,
            l,
        )
    }

    pub fn with_energy_profile(mut self, profile: EnergyProfile) -> Result<Self> {
        match &mut self.kind {
            DetectorKind::Energy { profile: p, .. } => {
                *p = profile;
                Ok(self)
            }
            _ => Err(Error::invalid("energy profiles apply to energy detectors only")),
        }
    }

    /// Drops the coupling phase `θ(p)`, keeping `|ũ(p)|`.
    pub fn without_phase(mut self) -> Self {
        self.keep_phase = false;
        self
    }

    pub fn with_p_exclusion(mut self, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::invariant("p_exclusion must be non-negative"));
        }
        self.p_exclusion = radius;
        Ok(self)
    }

    pub fn at_distance(&self, l: f64) -> Self {
        DetectorModel { l, ..self.clone() }
    }

    pub fn with_coupling(&self, coupling: CouplingFunction) -> Self {
        DetectorModel {
            coupling,
            ..self.clone()
        }
    }

    pub fn kind(&self) -> &DetectorKind {
        &self.kind
    }

    pub fn coupling(&self) -> &CouplingFunction {
        &self.coupling
    }

    pub fn distance(&self) -> f64 {
        self.l
    }

    pub fn p_exclusion(&self) -> f64 {
        self.p_exclusion
    }

    fn u(&self, p: f64) -> Complex64 {
        let z = self.coupling.eval(p);
        if self.keep_phase {
            z
        } else {
            Complex64::new(z.norm(), 0.0)
        }
    }

    fn check_momentum(&self, op: &'static str, p: f64, p2: f64) -> Result<()> {
        if p.abs() <= self.p_exclusion || p2.abs() <= self.p_exclusion {
            return Err(Error::singular(
                "detectors",
                op,
                format!("(p, p') = ({p}, {p2}) inside the excluded neighbourhood of p = 0"),
            ));
        }
        Ok(())
    }

    /// `⟨p'|S(L)|p⟩`.
    pub fn kernel(&self, p: f64, p2: f64, d: &Dispersion) -> Result<Complex64> {
        match &self.kind {
            DetectorKind::Coherent { mu_star, e0, delta } => {
                self.check_momentum("kernel_coherent", p, p2)?;
                let e = 0.5 * (d.energy(p) + d.energy(p2)) - e0;
                if !(e > 0.0) {
                    return Err(Error::singular(
                        "detectors",
                        "kernel_coherent",
                        format!("(p, p') = ({p}, {p2}) at or below the threshold E0 = {e0}"),
                    ));
                }
                let pre = (PI * mu_star * delta * delta).sqrt() / e.sqrt();
                let cut = (-0.5 * delta * delta * (p * p + p2 * p2)).exp();
                Ok(self.u(p) * self.u(p2).conj() * (pre * cut) * self.phase(p, p2))
            }
            DetectorKind::Decoherent {
                mu_star,
                diffusion,
                delta,
            } => {
                self.check_momentum("kernel_decoherent", p, p2)?;
                let s = p + p2;
                if s == 0.0 {
                    return Err(Error::singular(
                        "detectors",
                        "kernel_decoherent",
                        format!("(p, p') = ({p}, {p2}) with p + p' = 0"),
                    ));
                }
                let pre = 4.0 * mu_star * mu_star / (diffusion * s * s);
                let k = p - p2;
                let cut = (-0.25 * delta * delta * k * k).exp();
                Ok(self.u(p) * self.u(p2).conj() * (pre * cut) * self.phase(p, p2))
            }
            DetectorKind::Energy { dos, delta, profile } => {
                self.check_momentum("kernel_energy", p, p2)?;
                let e = 0.5 * (d.energy(p) + d.energy(p2));
                let w = dos.eval(e);
                if !(w.is_finite() && w >= 0.0) {
                    return Err(Error::singular(
                        "detectors",
                        "kernel_energy",
                        format!("density of states {w} at E = {e}"),
                    ));
                }
                let k = p - p2;
                let cut = (-0.25 * delta * delta * k * k).exp();
                let r = profile.eval(e);
                let pre = 2f64.sqrt() * PI * cut * w * r * r;
                Ok(self.u(p) * self.u(p2).conj() * pre * self.phase(p, p2))
            }
        }
    }

    fn phase(&self, p: f64, p2: f64) -> Complex64 {
        Complex64::from_polar(1.0, (p - p2) * self.l)
    }

    /// Closed-form `α(p)`, equal to `⟨p|S(L)|p⟩/|v_p|`.
    pub fn absorption_at(&self, p: f64, d: &Dispersion) -> Result<f64> {
        let v = d.velocity(p).abs();
        let u2 = self.coupling.eval(p).norm_sqr();
        let (op, alpha) = match &self.kind {
            DetectorKind::Coherent { mu_star, e0, delta } => {
                self.check_momentum("absorption", p, p)?;
                let e = d.energy(p) - e0;
                if !(e > 0.0) {
                    return Err(Error::singular(
                        "detectors",
                        "absorption",
                        format!("p = {p} at or below the threshold E0 = {e0}"),
                    ));
                }
                let a = (PI * mu_star * delta * delta).sqrt() * u2 * (-delta * delta * p * p).exp()
                    / (v * e.sqrt());
                ("absorption", a)
            }
            DetectorKind::Decoherent { mu_star, diffusion, .. } => {
                self.check_momentum("absorption", p, p)?;
                ("absorption", mu_star * mu_star * u2 / (diffusion * v * p * p))
            }
            DetectorKind::Energy { dos, profile, .. } => {
                self.check_momentum("absorption", p, p)?;
                let e = d.energy(p);
                let r = profile.eval(e);
                ("absorption", 2f64.sqrt() * PI * dos.eval(e) * u2 * r * r / v)
            }
        };
        if !alpha.is_finite() {
            return Err(Error::singular("detectors", op, format!("p = {p}")));
        }
        Ok(alpha)
    }

    /// Coherent-model absorption in the reduced normalization
    /// `K |ũ|²/(|v_p| √ε_p)`, `K = √(πδ²μ*/2)`, valid for `p ≪ 1/δ` and
    /// `E0 ≪ ε_p`.
    pub fn coherent_reduced_absorption(&self, p: f64, d: &Dispersion) -> Result<f64> {
        let DetectorKind::Coherent { mu_star, delta, .. } = self.kind else {
            return Err(Error::invalid("reduced normalization applies to coherent detectors"));
        };
        self.check_momentum("coherent_reduced_absorption", p, p)?;
        let e = d.energy(p);
        if !(e > 0.0) {
            return Err(Error::singular("detectors", "coherent_reduced_absorption", format!("p = {p}")));
        }
        let k = (PI * delta * delta * mu_star / 2.0).sqrt();
        Ok(k * self.coupling.eval(p).norm_sqr() / (d.velocity(p).abs() * e.sqrt()))
    }

    pub fn absorption(&self, d: &Dispersion) -> AbsorptionCoefficient {
        AbsorptionCoefficient::Detector {
            model: Box::new(self.clone()),
            dispersion: *d,
        }
    }

    /// Regime indicators over the given kinetic energies.
    pub fn diagnostics(&self, energies: &[f64]) -> DetectorDiagnostics {
        match self.kind {
            DetectorKind::Coherent { mu_star, delta, .. } => DetectorDiagnostics {
                coherent_localization: Some(
                    energies
                        .iter()
                        .fold(0.0f64, |a, e| a.max(e.abs() * mu_star * delta * delta)),
                ),
                diffusion_ratio: None,
                tau_dec: None,
            },
            DetectorKind::Decoherent {
                mu_star,
                diffusion,
                delta,
            } => DetectorDiagnostics {
                coherent_localization: None,
                diffusion_ratio: Some(diffusion / mu_star),
                tau_dec: Some(mu_star * mu_star * delta * delta / diffusion),
            },
            DetectorKind::Energy { .. } => DetectorDiagnostics {
                coherent_localization: None,
                diffusion_ratio: None,
                tau_dec: None,
            },
        }
    }
}

/// `α(p)`: fraction of incoming particles of momentum `p` absorbed per unit
/// detector length.
#[derive(Debug, Clone, PartialEq)]
pub enum AbsorptionCoefficient {
    Constant(f64),
    Detector {
        model: Box<DetectorModel>,
        dispersion: Dispersion,
    },
    Scaled(f64, Box<AbsorptionCoefficient>),
}

impl AbsorptionCoefficient {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::invariant(format!("absorption coefficient must be non-negative, got {value}")));
        }
        Ok(AbsorptionCoefficient::Constant(value))
    }

    pub fn scaled(self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::invariant("absorption scale must be non-negative"));
        }
        Ok(AbsorptionCoefficient::Scaled(c, Box::new(self)))
    }

    pub fn value(&self, p: f64) -> Result<f64> {
        match self {
            AbsorptionCoefficient::Constant(a) => Ok(*a),
            AbsorptionCoefficient::Detector { model, dispersion } => model.absorption_at(p, dispersion),
            AbsorptionCoefficient::Scaled(c, inner) => Ok(c * inner.value(p)?),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            AbsorptionCoefficient::Constant(_) => true,
            AbsorptionCoefficient::Scaled(_, inner) => inner.is_constant(),
            AbsorptionCoefficient::Detector { .. } => false,
        }
    }

    /// `(α, α', α'')` at `p`; derivatives by central differences unless α is
    /// constant.
    pub fn derivatives(&self, p: f64) -> Result<(f64, f64, f64)> {
        let a = self.value(p)?;
        if self.is_constant() {
            return Ok((a, 0.0, 0.0));
        }
        let h = 1e-4 * (1.0 + p.abs());
        let ap = self.value(p + h)?;
        let am = self.value(p - h)?;
        Ok((a, (ap - am) / (2.0 * h), (ap - 2.0 * a + am) / (h * h)))
    }
}
