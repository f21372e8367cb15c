use serde::{Deserialize, Serialize};

use crate::baselines::Method;
use crate::beamspace::expected_sparsity;
use crate::channel::{ArrayConfig, ScenarioPrior};
use crate::error::{Error, Result};
use crate::gp_lse::{KernelKind, Stage1Config};
use crate::phase_retrieval::SpartaConfig;

/// Scenario prior as written in a config file. A missing `r_range` means
/// `[r_F, r_R]` of the configured array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorConfig {
    pub v_range: [f64; 2],
    pub s_range: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_range: Option<[f64; 2]>,
    pub num_paths: usize,
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            v_range: [-0.5, 0.5],
            s_range: [-0.5, 0.5],
            r_range: None,
            num_paths: 6,
        }
    }
}

impl PriorConfig {
    pub fn resolve(&self, array: &ArrayConfig) -> Result<ScenarioPrior> {
        let r_range = self
            .r_range
            .unwrap_or([array.fresnel_distance(), array.rayleigh_distance()]);
        let prior = ScenarioPrior {
            v_range: self.v_range,
            s_range: self.s_range,
            r_range,
            num_paths: self.num_paths,
        };
        prior.validate()?;
        Ok(prior)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    SnrDb,
    NumPaths,
    DistanceM,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::SnrDb => "snr_db",
            SweepAxis::NumPaths => "num_paths",
            SweepAxis::DistanceM => "distance_m",
        }
    }
}

/// The three sweep grids. Only the grid named by `axis` is swept; the other
/// quantities stay at `snr_db`, the prior's path count, and the prior range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub snr_grid_db: Vec<f64>,
    pub path_grid: Vec<usize>,
    pub distance_grid_m: Vec<f64>,
    /// SNR used when the swept axis is not SNR
    pub snr_db: f64,
    /// path count used by the distance sweep
    pub distance_num_paths: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            axis: SweepAxis::SnrDb,
            snr_grid_db: vec![-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0],
            path_grid: vec![2, 4, 6, 8, 10, 12],
            distance_grid_m: vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
            snr_db: 0.0,
            distance_num_paths: 4,
        }
    }
}

impl SweepConfig {
    pub fn values(&self) -> Vec<f64> {
        match self.axis {
            SweepAxis::SnrDb => self.snr_grid_db.clone(),
            SweepAxis::NumPaths => self.path_grid.iter().map(|&l| l as f64).collect(),
            SweepAxis::DistanceM => self.distance_grid_m.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Stage I probes; `None` uses `N`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<usize>,
    /// Stage II measurements; `None` uses `N`
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m2: Option<usize>,
    /// unused Stage I probes are spent in Stage II
    pub rollover: bool,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            t1: None,
            m2: None,
            rollover: true,
        }
    }
}

impl Budgets {
    pub fn resolve(&self, n: usize) -> (usize, usize) {
        (self.t1.unwrap_or(n), self.m2.unwrap_or(n))
    }
}

/// Sparsity level handed to the phase-retrieval solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum SparsityRule {
    /// keep every coordinate of the sensed subspace
    Full,
    Fixed {
        k: usize,
    },
    /// `round(E[K])` from the closed form, at least `per_path_floor · L`
    Expected {
        per_path_floor: usize,
    },
}

impl SparsityRule {
    pub fn resolve(&self, array: &ArrayConfig, prior: &ScenarioPrior, dim: usize) -> Result<usize> {
        let k = match *self {
            SparsityRule::Full => dim,
            SparsityRule::Fixed { k } => k,
            SparsityRule::Expected { per_path_floor } => {
                let e = expected_sparsity(array, prior)?.expected_k.round() as usize;
                e.max(per_path_floor * prior.num_paths)
            }
        };
        Ok(k.clamp(1, dim))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ablation {
    pub disable_rician: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub global_seed: u64,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub array: ArrayConfig,
    pub prior: PriorConfig,
    pub sweep: SweepConfig,
    pub budgets: Budgets,
    pub lse: Stage1Config,
    /// solver settings for the proposed method's Stage II
    pub sparta: SpartaConfig,
    /// solver settings for full-beamspace R-SPARTA
    pub baseline_sparta: SpartaConfig,
    /// solver settings for full-beamspace R-SWF
    pub baseline_swf: SpartaConfig,
    pub stage2_sparsity: SparsityRule,
    pub baseline_sparsity: SparsityRule,
    pub ablation: Ablation,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::desk()
    }
}

impl SimConfig {
    /// 32×8 UPA at 28 GHz, `T₁ = M₂ = N`, 100 trials.
    pub fn desk() -> Self {
        Self {
            global_seed: 2024,
            trials: 100,
            methods: Method::ALL.to_vec(),
            array: ArrayConfig {
                n_y: 32,
                n_z: 8,
                f_c: 28e9,
                d: None,
            },
            prior: PriorConfig::default(),
            sweep: SweepConfig::default(),
            budgets: Budgets::default(),
            lse: Stage1Config::default(),
            sparta: SpartaConfig::default(),
            baseline_sparta: SpartaConfig::default(),
            baseline_swf: SpartaConfig::swf(),
            stage2_sparsity: SparsityRule::Expected { per_path_floor: 8 },
            baseline_sparsity: SparsityRule::Expected { per_path_floor: 4 },
            ablation: Ablation::default(),
        }
    }

    /// 128×16 UPA, 500 trials, distance grid 10..80 m.
    pub fn full_scale() -> Self {
        let mut c = Self::desk();
        c.make_full_scale();
        c
    }

    pub fn make_full_scale(&mut self) {
        self.array = ArrayConfig {
            n_y: 128,
            n_z: 16,
            f_c: 28e9,
            d: None,
        };
        self.trials = 500;
        self.sweep.distance_grid_m = (1..=8).map(|i| 10.0 * i as f64).collect();
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return cfg_err("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return cfg_err("methods must not be empty".into());
        }
        self.array
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if (self.array.spacing() / self.array.wavelength() - 0.5).abs() > 1e-9 {
            return cfg_err("element spacing must be half a wavelength".into());
        }
        self.prior
            .resolve(&self.array)
            .map_err(|e| Error::Config(e.to_string()))?;
        let n = self.array.num_elements();
        let (t1, m2) = self.budgets.resolve(n);
        if t1 == 0 || m2 == 0 {
            return cfg_err("budgets must be at least 1".into());
        }
        if self.sweep.values().is_empty() {
            return cfg_err(format!(
                "sweep grid for {} is empty",
                self.sweep.axis.name()
            ));
        }
        if !self.sweep.values().iter().all(|v| v.is_finite()) {
            return cfg_err("sweep values must be finite".into());
        }
        match self.sweep.axis {
            SweepAxis::NumPaths if self.sweep.path_grid.contains(&0) => {
                return cfg_err("path counts must be at least 1".into())
            }
            SweepAxis::DistanceM if self.sweep.distance_grid_m.iter().any(|r| !(*r > 0.0)) => {
                return cfg_err("distances must be positive".into())
            }
            _ => {}
        }
        if self.sweep.distance_num_paths == 0 {
            return cfg_err("distance_num_paths must be at least 1".into());
        }
        for rule in [self.stage2_sparsity, self.baseline_sparsity] {
            if matches!(rule, SparsityRule::Fixed { k: 0 }) {
                return cfg_err("fixed sparsity must be at least 1".into());
            }
        }
        self.lse
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        for s in [&self.sparta, &self.baseline_sparta, &self.baseline_swf] {
            s.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Stage I settings with the kernel ablation applied.
    pub fn stage1(&self) -> Stage1Config {
        let mut s1 = self.lse;
        if let Some(kind) = self.ablation.kernel {
            s1.kernel.kind = kind;
        }
        s1
    }

    /// Prior used at one sweep point, and the pinned user range if any.
    pub fn prior_at(&self, axis_value: f64) -> Result<(ScenarioPrior, Option<f64>)> {
        let mut prior = self.prior.resolve(&self.array)?;
        match self.sweep.axis {
            SweepAxis::SnrDb => Ok((prior, None)),
            SweepAxis::NumPaths => {
                prior.num_paths = axis_value as usize;
                Ok((prior, None))
            }
            SweepAxis::DistanceM => {
                prior.num_paths = self.sweep.distance_num_paths;
                Ok((prior, Some(axis_value)))
            }
        }
    }

    pub fn snr_at(&self, axis_value: f64) -> f64 {
        match self.sweep.axis {
            SweepAxis::SnrDb => axis_value,
            _ => self.sweep.snr_db,
        }
    }
}
