use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use curriculum_bandit::finite::{FiniteAgent, FinitePiEnv, HYPOTHESES};
use curriculum_bandit::{EnvParams, PolicySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub env: EnvSection,
    pub sim: SimSection,
    pub values: ValuesSection,
    pub sweep: SweepSection,
    pub finite: FiniteSection,
    pub diagnostics: DiagnosticsSection,
    pub rd: RdSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvSection {
    pub alpha: f64,
    pub tau: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub horizon: u64,
    pub trials: u64,
    pub master_seed: u64,
    /// Policies run by `simulate`, e.g. `"pi_N:1"`, `"explore"`, `"p:0.5"`.
    pub policies: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValuesSection {
    pub policies: Vec<String>,
    /// Defaults to `sim.horizon`.
    pub horizons: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl MGrid {
    pub fn points(&self) -> Vec<f64> {
        match *self {
            MGrid::List(ref v) => v.clone(),
            MGrid::Range { start, stop, step } => {
                if !(step > 0.0) || stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub m_grid: MGrid,
    pub horizons: Vec<u64>,
    /// Defaults to `sim.trials`.
    pub trials: Option<u64>,
    pub refine: bool,
    pub refine_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    /// `count` consecutive seeds starting at `sim.master_seed`.
    Count(u64),
    List(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiniteSection {
    pub agents: Vec<String>,
    pub seeds: Seeds,
    pub horizon: u64,
    pub truth: u8,
    pub rd_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub n: Vec<u32>,
    pub m: Vec<f64>,
    /// Defaults to `sim.horizon`.
    pub horizons: Option<Vec<u64>>,
    /// Defaults to `sim.trials`.
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RdSection {
    pub points: usize,
    /// Hypotheses carrying equal prior weight; all 90 when absent.
    pub support: Option<Vec<u8>>,
    /// Largest distortion on the grid; the best constant action's distortion when absent.
    pub d_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for EnvSection {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            tau: 4.0,
            gamma: 1.0,
        }
    }
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            horizon: 100,
            trials: 100_000,
            master_seed: 2024,
            policies: vec!["pi_N:1".into(), "explore".into()],
        }
    }
}

impl Default for ValuesSection {
    fn default() -> Self {
        Self {
            policies: (0..=5).map(|n| format!("pi_N:{n}")).collect(),
            horizons: None,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            m_grid: MGrid::Range {
                start: 0.0,
                stop: 6.0,
                step: 0.5,
            },
            horizons: vec![200, 500, 1000, 2000],
            trials: Some(10_000),
            refine: true,
            refine_evals: 16,
        }
    }
}

impl Default for FiniteSection {
    fn default() -> Self {
        Self {
            agents: vec!["ts".into(), "rdts".into()],
            seeds: Seeds::Count(1000),
            horizon: 100,
            truth: 31,
            rd_tolerance: 1e-9,
        }
    }
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            n: vec![1, 2, 3],
            m: vec![0.5, 1.0, 2.0, 3.0],
            horizons: None,
            trials: None,
        }
    }
}

impl Default for RdSection {
    fn default() -> Self {
        Self {
            points: 20,
            support: None,
            d_max: None,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg],
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            env: EnvSection::default(),
            sim: SimSection::default(),
            values: ValuesSection::default(),
            sweep: SweepSection::default(),
            finite: FiniteSection::default(),
            diagnostics: DiagnosticsSection::default(),
            rd: RdSection::default(),
            output: OutputSection::default(),
        }
    }
}

/// Command-line and environment overrides; `None` keeps the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub trials: Option<u64>,
    pub horizon: Option<u64>,
    pub formats: Vec<Format>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("invalid config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.sim.master_seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.directory = out.clone();
        }
        if let Some(trials) = o.trials {
            self.sim.trials = trials;
            self.sweep.trials = Some(trials);
            self.diagnostics.trials = Some(trials);
        }
        if let Some(h) = o.horizon {
            self.sim.horizon = h;
            self.values.horizons = Some(vec![h]);
            self.sweep.horizons = vec![h];
            self.finite.horizon = h;
            self.diagnostics.horizons = Some(vec![h]);
        }
        if !o.formats.is_empty() {
            self.output.formats = o.formats.clone();
        }
    }

    pub fn params(&self) -> Result<EnvParams> {
        EnvParams::new(self.env.alpha, self.env.tau, self.env.gamma).context("env")
    }

    pub fn finite_env(&self) -> Result<FinitePiEnv> {
        FinitePiEnv::new(self.env.alpha, self.env.tau, self.finite.truth).context("finite.truth / env")
    }

    pub fn policies(list: &[String], field: &str) -> Result<Vec<PolicySpec>> {
        list.iter()
            .map(|s| s.parse::<PolicySpec>().with_context(|| format!("{field}: `{s}`")))
            .collect()
    }

    pub fn value_horizons(&self) -> Vec<u64> {
        self.values.horizons.clone().unwrap_or_else(|| vec![self.sim.horizon])
    }

    pub fn sweep_trials(&self) -> u64 {
        self.sweep.trials.unwrap_or(self.sim.trials)
    }

    pub fn diagnostic_horizons(&self) -> Vec<u64> {
        self.diagnostics.horizons.clone().unwrap_or_else(|| vec![self.sim.horizon])
    }

    pub fn diagnostic_trials(&self) -> u64 {
        self.diagnostics.trials.unwrap_or(self.sim.trials)
    }

    pub fn agents(&self) -> Result<Vec<FiniteAgent>> {
        self.finite
            .agents
            .iter()
            .map(|s| s.parse::<FiniteAgent>().with_context(|| format!("finite.agents: `{s}`")))
            .collect()
    }

    pub fn finite_seeds(&self) -> Vec<u64> {
        match &self.finite.seeds {
            Seeds::Count(n) => (0..*n).map(|i| self.sim.master_seed.wrapping_add(i)).collect(),
            Seeds::List(v) => v.clone(),
        }
    }

    /// Checks every precondition of every section, so a bad value fails
    /// before anything runs. Returns all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                problems.push(msg);
            }
        };
        if let Err(e) = self.params() {
            check(false, format!("{e:#}"));
        }
        check(self.sim.horizon >= 1, "sim.horizon: must be at least 1".into());
        check(self.sim.trials >= 1, "sim.trials: at least one trial is required".into());
        if let Err(e) = Self::policies(&self.sim.policies, "sim.policies") {
            check(false, format!("{e:#}"));
        }
        if let Err(e) = Self::policies(&self.values.policies, "values.policies") {
            check(false, format!("{e:#}"));
        }
        check(
            self.value_horizons().iter().all(|&h| h >= 1),
            "values.horizons: must be at least 1".into(),
        );

        let grid = self.sweep.m_grid.points();
        check(!grid.is_empty(), "sweep.m_grid: grid is empty".into());
        check(!self.sweep.horizons.is_empty(), "sweep.horizons: list is empty".into());
        for &h in &self.sweep.horizons {
            check(h >= 1, "sweep.horizons: must be at least 1".into());
            if let Some(bad) = grid.iter().find(|m| !(m.is_finite() && **m >= 0.0 && **m <= h as f64)) {
                check(false, format!("sweep.m_grid: {bad} lies outside [0, {h}]"));
            }
        }
        check(self.sweep_trials() >= 1, "sweep.trials: at least one trial is required".into());
        check(self.sweep.refine_evals >= 1, "sweep.refine_evals: must be at least 1".into());

        if let Err(e) = self.agents() {
            check(false, format!("{e:#}"));
        }
        check(!self.finite_seeds().is_empty(), "finite.seeds: at least one seed is required".into());
        check(self.finite.horizon >= 1, "finite.horizon: must be at least 1".into());
        if let Err(e) = self.finite_env() {
            check(false, format!("{e:#}"));
        }
        check(
            self.finite.rd_tolerance > 0.0,
            "finite.rd_tolerance: must be positive".into(),
        );

        check(
            self.diagnostics.n.iter().all(|&n| n >= 1),
            "diagnostics.n: block index must be at least 1".into(),
        );
        check(
            self.diagnostics.m.iter().all(|m| m.is_finite() && *m >= 0.0),
            "diagnostics.m: must be finite and >= 0".into(),
        );
        check(
            self.diagnostic_horizons().iter().all(|&h| h >= 1),
            "diagnostics.horizons: must be at least 1".into(),
        );
        check(
            self.diagnostic_trials() >= 1,
            "diagnostics.trials: at least one trial is required".into(),
        );

        check(self.rd.points >= 2, "rd.points: need at least 2 grid points".into());
        if let Some(support) = &self.rd.support {
            check(!support.is_empty(), "rd.support: must not be empty".into());
            if let Some(bad) = support.iter().find(|t| !HYPOTHESES.contains(t)) {
                check(false, format!("rd.support: {bad} is not a two-digit hypothesis"));
            }
        }
        if let Some(d) = self.rd.d_max {
            check(d.is_finite() && d >= 0.0, "rd.d_max: must be finite and >= 0".into());
        }

        if problems.is_empty() {
            Ok(())
        } else {
            bail!("invalid config:\n  {}", problems.join("\n  "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse("[sim]\nhorizn = 5\n").unwrap_err();
        assert!(format!("{err:#}").contains("horizn"));
        assert!(ExperimentConfig::parse("[simulation]\n").is_err());
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let err = ExperimentConfig::parse("[env]\nalpha = 2.0\ntau = \"four\"\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
    }

    #[test]
    fn zero_trials_fail_validation() {
        let mut c = ExperimentConfig::default();
        c.sim.trials = 0;
        assert!(format!("{:#}", c.validate().unwrap_err()).contains("sim.trials"));
    }

    #[test]
    fn overrides_beat_the_file() {
        let mut c = ExperimentConfig::parse("[sim]\nmaster_seed = 1\nhorizon = 7\n").unwrap();
        c.apply(&Overrides {
            seed: Some(9),
            horizon: Some(50),
            ..Overrides::default()
        });
        assert_eq!(c.sim.master_seed, 9);
        assert_eq!(c.sweep.horizons, vec![50]);
        assert_eq!(c.finite.horizon, 50);
    }

    #[test]
    fn grids_and_seeds() {
        let c = ExperimentConfig::parse("[sweep]\nm_grid = { start = 0.0, stop = 1.0, step = 0.25 }\n[finite]\nseeds = [7]\n").unwrap();
        assert_eq!(c.sweep.m_grid.points(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(c.finite_seeds(), vec![7]);
        let c = ExperimentConfig::parse("[sweep]\nm_grid = [1.0, 2.0]\n[finite]\nseeds = 3\n[sim]\nmaster_seed = 10\n").unwrap();
        assert_eq!(c.sweep.m_grid.points(), vec![1.0, 2.0]);
        assert_eq!(c.finite_seeds(), vec![10, 11, 12]);
    }

    #[test]
    fn diagnostics_need_positive_n() {
        let c = ExperimentConfig::parse("[diagnostics]\nn = [0]\n").unwrap();
        assert!(format!("{:#}", c.validate().unwrap_err()).contains("diagnostics.n"));
    }
}
