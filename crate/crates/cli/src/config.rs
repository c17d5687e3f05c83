//! Scenario files: TOML, validated against [`ScenarioConfig`] before any
//! computation runs.

use std::fmt;
use std::ops::Range;
use std::path::Path;

use ablab::em::{ChargeState, ChiFunction, ChiKind, FiniteModel, Solenoid};
use ablab::quadrature::{PathSpec, QuadratureSpec};
use ablab::{Constants, UnitSystem, Vec3};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

/// A study a scenario can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    /// Line-integral phases along the configured paths.
    Phase,
    /// Phase change of every path under every gauge function.
    GaugeScan,
    /// Overlap, canonical and QED energies at the configured charge.
    Energy,
    /// Full-overlap against canonical energy on the built-in grid of charge states.
    EnergyGrid,
    /// Failure of the energy equivalence in non-Coulomb gauges.
    GaugeVariance,
    /// Mode-sum phase against the analytic phase under grid refinement.
    QedConvergence,
    /// Truncated-Fock exact evolution against second-order perturbation theory.
    QedExact,
    /// Reduced density matrix of the charge for two branches.
    Entanglement,
    /// Hermiticity, unitarity, transversality and potential identities.
    Invariants,
}

impl Study {
    pub const ALL: [Study; 9] = [
        Study::Phase,
        Study::GaugeScan,
        Study::Energy,
        Study::EnergyGrid,
        Study::GaugeVariance,
        Study::QedConvergence,
        Study::QedExact,
        Study::Entanglement,
        Study::Invariants,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Study::Phase => "phase",
            Study::GaugeScan => "gauge-scan",
            Study::Energy => "energy",
            Study::EnergyGrid => "energy-grid",
            Study::GaugeVariance => "gauge-variance",
            Study::QedConvergence => "qed-convergence",
            Study::QedExact => "qed-exact",
            Study::Entanglement => "entanglement",
            Study::Invariants => "invariants",
        }
    }

    pub fn from_name(name: &str) -> Option<Study> {
        Study::ALL.into_iter().find(|s| s.name() == name)
    }
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioMeta,
    #[serde(default)]
    pub constants: ConstantsConfig,
    pub solenoid: SolenoidConfig,
    pub charge: ChargeConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Contours for the phase and gauge-scan studies.
    #[serde(default)]
    pub paths: Vec<PathConfig>,
    /// Gauge functions. Omitted: the built-in library scaled to the solenoid radius.
    #[serde(default)]
    pub chis: Option<Vec<ChiConfig>>,
    #[serde(default)]
    pub phase: PhaseConfig,
    #[serde(default)]
    pub energy: EnergyConfig,
    #[serde(default)]
    pub qed: QedConfig,
    #[serde(default)]
    pub entanglement: EntanglementConfig,
    #[serde(default)]
    pub invariants: InvariantsConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioMeta {
    /// Prefix of every report file.
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Studies run by `report`, and the candidates for the other subcommands.
    pub studies: Vec<Study>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Natural,
    Si,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default)]
    pub units: Units,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SolenoidConfig {
    pub radius: f64,
    /// Interior field strength.
    pub b0: f64,
    #[serde(default)]
    pub center: [f64; 3],
    /// Ring discretization used wherever the solenoid acts as a current source.
    #[serde(default)]
    pub finite: Option<FiniteConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FiniteConfig {
    pub length: f64,
    pub n_rings: usize,
    pub n_segments: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ChargeConfig {
    pub charge: f64,
    #[serde(default = "one")]
    pub mass: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default = "QuadratureConfig::rel")]
    pub rel_tol: f64,
    #[serde(default = "QuadratureConfig::abs")]
    pub abs_tol: f64,
    #[serde(default = "QuadratureConfig::max_sub")]
    pub max_subdivisions: usize,
}

impl QuadratureConfig {
    fn rel() -> f64 {
        QuadratureSpec::default().rel_tol
    }
    fn abs() -> f64 {
        QuadratureSpec::default().abs_tol
    }
    fn max_sub() -> usize {
        QuadratureSpec::default().max_subdivisions
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { rel_tol: Self::rel(), abs_tol: Self::abs(), max_subdivisions: Self::max_sub() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PathConfig {
    Segment {
        label: String,
        from: [f64; 3],
        to: [f64; 3],
        #[serde(default)]
        reversed: bool,
    },
    /// Open arc in the plane `z = center[2]`.
    Arc {
        label: String,
        center: [f64; 3],
        radius: f64,
        start_angle: f64,
        sweep: f64,
        #[serde(default)]
        reversed: bool,
    },
    /// Closed circle traversed `winding` times.
    Circle {
        label: String,
        center: [f64; 3],
        radius: f64,
        #[serde(default = "one_i32")]
        winding: i32,
        #[serde(default)]
        reversed: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChiConfig {
    Constant { label: String, value: f64 },
    Linear { label: String, gradient: [f64; 3] },
    Quadratic { label: String, coefficient: f64, direction: [f64; 3] },
    Azimuthal { label: String, coefficient: f64, center: [f64; 3] },
    Bump { label: String, amplitude: f64, center: [f64; 3], width: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    /// Relative tolerance of closed-loop phases against `−w qΦ/ħ`.
    #[serde(default = "PhaseConfig::flux")]
    pub flux_tolerance: f64,
    /// Absolute tolerance (radians) of gauge-scan residuals.
    #[serde(default = "PhaseConfig::gauge")]
    pub gauge_tolerance: f64,
}

impl PhaseConfig {
    fn flux() -> f64 {
        1e-6
    }
    fn gauge() -> f64 {
        1e-9
    }
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self { flux_tolerance: Self::flux(), gauge_tolerance: Self::gauge() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    /// Length of the truncated integration cylinder. Omitted: 2000 solenoid radii.
    #[serde(default)]
    pub truncation_length: Option<f64>,
    #[serde(default = "EnergyConfig::rel")]
    pub rel_tol: f64,
    #[serde(default = "EnergyConfig::max_sub")]
    pub max_subdivisions: usize,
    /// Expected `E_overlap(κ=½) / E_canonical`, checked when present.
    #[serde(default)]
    pub expected_half_ratio: Option<f64>,
    #[serde(default = "EnergyConfig::ratio_tol")]
    pub ratio_tolerance: f64,
    /// Expected value of the sign-mismatch flag, checked when present.
    #[serde(default)]
    pub expect_sign_mismatch: Option<bool>,
    /// Compare the volume integral with the current-element sum.
    #[serde(default)]
    pub element_check: bool,
    #[serde(default = "EnergyConfig::rel_one_percent")]
    pub identity_tolerance: f64,
    /// Bound on deviation plus error budget, relative to the canonical energy.
    #[serde(default = "EnergyConfig::rel_one_percent")]
    pub equivalence_tolerance: f64,
}

impl EnergyConfig {
    fn rel() -> f64 {
        1e-7
    }
    fn max_sub() -> usize {
        400
    }
    fn ratio_tol() -> f64 {
        0.005
    }
    fn rel_one_percent() -> f64 {
        0.01
    }
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            truncation_length: None,
            rel_tol: Self::rel(),
            max_subdivisions: Self::max_sub(),
            expected_half_ratio: None,
            ratio_tolerance: Self::ratio_tol(),
            expect_sign_mismatch: None,
            element_check: false,
            identity_tolerance: Self::rel_one_percent(),
            equivalence_tolerance: Self::rel_one_percent(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridStep {
    pub box_length: f64,
    pub index_range: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct QedConfig {
    pub tau: f64,
    /// Short ring source whose modes couple to the charge.
    pub source: FiniteConfig,
    pub charge_radius: f64,
    /// Refinement schedule of the convergence study, coarse to fine.
    pub schedule: Vec<GridStep>,
    /// Coupling scales for the `g²` exponent fit.
    pub coupling_scales: Vec<f64>,
    /// Bound on the relative error at the finest grid.
    pub max_error: f64,
    pub exponent_tolerance: f64,
    pub exact_grid: GridStep,
    /// Oscillator counts of the exact comparison.
    pub active_oscillators: Vec<usize>,
    pub photon_cutoff: usize,
    pub exact_scales: Vec<f64>,
    /// Smallest acceptable exponent of the exact-minus-perturbative residual.
    pub min_exponent: f64,
    pub e_c: f64,
    pub e_s: f64,
}

impl Default for QedConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            source: FiniteConfig { length: 0.2, n_rings: 4, n_segments: 32 },
            charge_radius: 0.1,
            schedule: [(2.0, 16), (2.5, 20), (3.0, 24), (4.0, 32)]
                .map(|(box_length, index_range)| GridStep { box_length, index_range })
                .to_vec(),
            coupling_scales: vec![0.5, 1.0, 2.0],
            max_error: 0.05,
            exponent_tolerance: 0.01,
            exact_grid: GridStep { box_length: 2.0, index_range: 1 },
            active_oscillators: vec![1, 2, 4, 8],
            photon_cutoff: 1,
            exact_scales: vec![0.125, 0.25, 0.5, 1.0],
            min_exponent: 3.9,
            e_c: 0.0,
            e_s: 0.0,
        }
    }
}

/// Slow, physically charged probe at unit coupling scale.
#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OperatingPoint {
    pub charge: f64,
    pub speed: f64,
    pub coupling_scale: f64,
    pub min_overlap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct EntanglementConfig {
    /// Positions of the two static branches; both use the configured velocity.
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub tau: f64,
    pub box_length: f64,
    pub index_range: u32,
    pub charge_radius: f64,
    pub coupling_scales: Vec<f64>,
    /// Bound on `|arg ρ_LR − Δφ|`, radians.
    pub phase_tolerance: f64,
    pub overlap_window: [f64; 2],
    /// Required ratio of largest to smallest entropy across the coupling scales.
    pub min_entropy_span: f64,
    pub operating_point: Option<OperatingPoint>,
}

impl Default for EntanglementConfig {
    fn default() -> Self {
        Self {
            left: [-0.5, 0.0, 0.0],
            right: [0.5, 0.0, 0.0],
            tau: 10.0,
            box_length: 4.0,
            index_range: 8,
            charge_radius: 0.1,
            coupling_scales: vec![0.3, 0.1, 0.03, 0.01],
            phase_tolerance: 1e-3,
            overlap_window: [0.99, 1.0],
            min_entropy_span: 100.0,
            operating_point: Some(OperatingPoint {
                charge: (4.0 * std::f64::consts::PI / 137.035_999).sqrt(),
                speed: 0.01,
                coupling_scale: 1.0,
                min_overlap: 0.999,
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, JsonSchema)]
#[serde(default, deny_unknown_fields)]
pub struct InvariantsConfig {
    /// Grid whose polarization vectors are checked for transversality.
    pub transverse_grid: GridStep,
}

impl Default for InvariantsConfig {
    fn default() -> Self {
        Self { transverse_grid: GridStep { box_length: 4.0, index_range: 32 } }
    }
}

fn one() -> f64 {
    1.0
}

fn one_i32() -> i32 {
    1
}

/// Where and why a scenario was rejected.
#[derive(Debug)]
pub struct ConfigError {
    pub source_name: String,
    pub line_col: Option<(usize, usize)>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line_col {
            Some((l, c)) => write!(f, "{}:{l}:{c}: {}", self.source_name, self.message),
            None => write!(f, "{}: {}", self.source_name, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, span: Range<usize>) -> (usize, usize) {
    let before = &text[..span.start.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, col)
}

fn toml_error(name: &str, text: &str, e: toml::de::Error) -> ConfigError {
    ConfigError {
        source_name: name.to_string(),
        line_col: e.span().map(|s| line_col(text, s)),
        message: e.message().trim().to_string(),
    }
}

/// Sets `path = value` in `table`, creating intermediate tables. The value is
/// parsed as a TOML value, falling back to a bare string.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), String> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| format!("override '{spec}' is not key=value"))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(format!("override '{spec}' has an empty key"));
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = keys.split_last().unwrap();
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| format!("override '{spec}': '{k}' is not a table"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn non_finite(value: &toml::Value, path: &str, out: &mut Vec<String>) {
    match value {
        toml::Value::Float(x) if !x.is_finite() => out.push(path.to_string()),
        toml::Value::Table(t) => {
            for (k, v) in t {
                let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                non_finite(v, &p, out);
            }
        }
        toml::Value::Array(a) => {
            for (i, v) in a.iter().enumerate() {
                non_finite(v, &format!("{path}[{i}]"), out);
            }
        }
        _ => {}
    }
}

/// Parses and validates a scenario. `overrides` are dotted `key=value` edits
/// applied before validation.
pub fn parse_scenario(name: &str, text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut table: toml::Table = toml::from_str(text).map_err(|e| toml_error(name, text, e))?;
    let plain = |message: String| ConfigError { source_name: name.to_string(), line_col: None, message };
    let mut bad = Vec::new();
    non_finite(&toml::Value::Table(table.clone()), "", &mut bad);
    if !bad.is_empty() {
        return Err(plain(format!("non-finite value at {}", bad.join(", "))));
    }
    let config: ScenarioConfig = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| toml_error(name, text, e))?
    } else {
        for o in overrides {
            apply_override(&mut table, o).map_err(plain)?;
        }
        let mut bad = Vec::new();
        non_finite(&toml::Value::Table(table.clone()), "", &mut bad);
        if !bad.is_empty() {
            return Err(plain(format!("non-finite value at {}", bad.join(", "))));
        }
        let merged = toml::to_string(&table).map_err(|e| plain(e.to_string()))?;
        let label = format!("{name} (with overrides)");
        toml::from_str(&merged).map_err(|e| toml_error(&label, &merged, e))?
    };
    config.check().map_err(plain)?;
    Ok(config)
}

pub fn load_scenario(path: &Path, overrides: &[String]) -> anyhow::Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_scenario(&path.display().to_string(), &text, overrides)?)
}

fn vec3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(format!("{name} must be positive, got {x}"))
    }
}

impl ScenarioConfig {
    /// Range checks the schema cannot express.
    fn check(&self) -> Result<(), String> {
        if self.scenario.name.is_empty() || self.scenario.name.contains(['/', '\\']) {
            return Err("scenario.name must be a non-empty file-name prefix".into());
        }
        positive("solenoid.radius", self.solenoid.radius)?;
        positive("charge.mass", self.charge.mass)?;
        if let Some(f) = self.solenoid.finite {
            positive("solenoid.finite.length", f.length)?;
        }
        positive("quadrature.rel_tol", self.quadrature.rel_tol)?;
        positive("energy.rel_tol", self.energy.rel_tol)?;
        if let Some(l) = self.energy.truncation_length {
            positive("energy.truncation_length", l)?;
        }
        positive("qed.tau", self.qed.tau)?;
        positive("qed.source.length", self.qed.source.length)?;
        positive("qed.charge_radius", self.qed.charge_radius)?;
        positive("entanglement.tau", self.entanglement.tau)?;
        positive("entanglement.box_length", self.entanglement.box_length)?;
        positive("invariants.transverse_grid.box_length", self.invariants.transverse_grid.box_length)?;
        for (i, s) in self.qed.schedule.iter().enumerate() {
            positive(&format!("qed.schedule[{i}].box_length"), s.box_length)?;
        }
        if self.qed.schedule.len() < 3 {
            return Err("qed.schedule needs at least three grids".into());
        }
        for (name, v) in [
            ("qed.coupling_scales", &self.qed.coupling_scales),
            ("qed.exact_scales", &self.qed.exact_scales),
            ("entanglement.coupling_scales", &self.entanglement.coupling_scales),
        ] {
            if v.len() < 2 {
                return Err(format!("{name} needs at least two entries"));
            }
            for (i, &s) in v.iter().enumerate() {
                positive(&format!("{name}[{i}]"), s)?;
            }
        }
        if self.qed.active_oscillators.is_empty() || self.qed.active_oscillators.contains(&0) {
            return Err("qed.active_oscillators must list positive counts".into());
        }
        let mut labels = std::collections::HashSet::new();
        for p in &self.paths {
            if !labels.insert(p.label()) {
                return Err(format!("duplicate path label '{}'", p.label()));
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> Constants {
        Constants::new(match self.constants.units {
            Units::Natural => UnitSystem::Natural,
            Units::Si => UnitSystem::Si,
        })
    }

    pub fn solenoid(&self) -> ablab::Result<Solenoid> {
        let s = Solenoid::new(self.solenoid.radius, self.solenoid.b0, vec3(self.solenoid.center))?;
        Ok(match self.solenoid.finite {
            Some(f) => s.with_finite_model(FiniteModel { length: f.length, n_rings: f.n_rings, n_segments: f.n_segments }),
            None => s,
        })
    }

    pub fn charge(&self) -> ablab::Result<ChargeState> {
        let c = &self.charge;
        ChargeState::new(c.charge, c.mass, vec3(c.position), vec3(c.velocity))
    }

    pub fn quadrature(&self) -> ablab::Result<QuadratureSpec> {
        let q = &self.quadrature;
        QuadratureSpec::new(q.rel_tol, q.abs_tol, q.max_subdivisions)
    }

    pub fn paths(&self) -> ablab::Result<Vec<PathSpec>> {
        self.paths.iter().map(PathConfig::to_spec).collect()
    }

    pub fn chis(&self) -> Vec<ChiFunction> {
        match &self.chis {
            Some(list) => list.iter().map(ChiConfig::to_chi).collect(),
            None => ChiFunction::library(self.solenoid.radius),
        }
    }
}

impl PathConfig {
    pub fn label(&self) -> &str {
        match self {
            PathConfig::Segment { label, .. } | PathConfig::Arc { label, .. } | PathConfig::Circle { label, .. } => label,
        }
    }

    pub fn to_spec(&self) -> ablab::Result<PathSpec> {
        let (spec, reversed) = match self {
            PathConfig::Segment { from, to, reversed, .. } => (PathSpec::segment(vec3(*from), vec3(*to)), *reversed),
            PathConfig::Arc { center, radius, start_angle, sweep, reversed, .. } => {
                (PathSpec::arc(vec3(*center), *radius, *start_angle, *sweep), *reversed)
            }
            PathConfig::Circle { center, radius, winding, reversed, .. } => {
                (PathSpec::circle(vec3(*center), *radius, *winding), *reversed)
            }
        };
        let mut spec = spec.with_label(self.label());
        spec.reversed = reversed;
        spec.validate()?;
        Ok(spec)
    }
}

impl ChiConfig {
    pub fn to_chi(&self) -> ChiFunction {
        match self {
            ChiConfig::Constant { label, value } => ChiFunction::new(label, ChiKind::Constant { value: *value }),
            ChiConfig::Linear { label, gradient } => ChiFunction::new(label, ChiKind::Linear { gradient: vec3(*gradient) }),
            ChiConfig::Quadratic { label, coefficient, direction } => ChiFunction::new(
                label,
                ChiKind::Quadratic { coefficient: *coefficient, direction: vec3(*direction) },
            ),
            ChiConfig::Azimuthal { label, coefficient, center } => {
                ChiFunction::new(label, ChiKind::Azimuthal { coefficient: *coefficient, center: vec3(*center) })
            }
            ChiConfig::Bump { label, amplitude, center, width } => ChiFunction::new(
                label,
                ChiKind::Bump { amplitude: *amplitude, center: vec3(*center), width: *width },
            ),
        }
    }
}

/// JSON schema of the scenario format, as shipped in `schema/`.
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ScenarioConfig);
    serde_json::to_string_pretty(&schema).expect("schema serializes") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "t"
studies = ["phase"]

[solenoid]
radius = 0.1
b0 = 1.0

[charge]
charge = 1.0
position = [0.5, 0.0, 0.0]
velocity = [0.0, 1.0, 0.0]
"#;

    #[test]
    fn minimal_scenario_uses_defaults() {
        let c = parse_scenario("t", MINIMAL, &[]).unwrap();
        assert_eq!(c.charge.mass, 1.0);
        assert_eq!(c.qed.schedule.len(), 4);
        assert_eq!(c.chis().len(), 4);
    }

    #[test]
    fn unknown_key_has_location() {
        let text = MINIMAL.replace("b0 = 1.0", "b0 = 1.0\nbogus = 3");
        let e = parse_scenario("t", &text, &[]).unwrap_err();
        assert_eq!(e.line_col, Some((9, 1)));
        assert!(e.message.contains("bogus"), "{e}");
    }

    #[test]
    fn overrides_edit_nested_keys() {
        let c = parse_scenario("t", MINIMAL, &["solenoid.radius=0.2".into(), "qed.tau = 3".into()]).unwrap();
        assert_eq!(c.solenoid.radius, 0.2);
        assert_eq!(c.qed.tau, 3.0);
        assert!(parse_scenario("t", MINIMAL, &["solenoid.radius".into()]).is_err());
    }

    #[test]
    fn non_finite_values_are_named() {
        let text = MINIMAL.replace("b0 = 1.0", "b0 = nan");
        let e = parse_scenario("t", &text, &[]).unwrap_err();
        assert!(e.message.contains("solenoid.b0"), "{e}");
    }

    #[test]
    fn range_errors_are_named() {
        let e = parse_scenario("t", MINIMAL, &["solenoid.radius=-1".into()]).unwrap_err();
        assert!(e.message.contains("solenoid.radius"), "{e}");
    }

    #[test]
    fn study_names_round_trip() {
        for s in Study::ALL {
            assert_eq!(Study::from_name(s.name()), Some(s));
        }
    }
}
