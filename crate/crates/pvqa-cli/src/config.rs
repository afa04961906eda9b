//! Run configuration: a JSON file mirroring the CLI flags, with flag
//! values taking precedence over file values. A run in exact mode is fully
//! reproducible from its resolved configuration.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::harness::{Mode, OptimizerSpec, ScheduleFamily, Variant, VariantSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Penalty {
    Fixed(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

impl Penalty {
    pub const AUTO: Penalty = Penalty::Auto(AutoTag::Auto);
}

impl FromStr for Penalty {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Penalty::AUTO);
        }
        let v: f64 = s
            .parse()
            .with_context(|| format!("invalid penalty '{s}'"))?;
        if v <= 0.0 {
            bail!("penalty {v} must be positive");
        }
        Ok(Penalty::Fixed(v))
    }
}

impl FromStr for Variant {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pvqa" => Ok(Variant::PVqa),
            "vqa" => Ok(Variant::Vqa),
            "pqa" => Ok(Variant::PQa),
            "qa" => Ok(Variant::Qa),
            other => bail!("unknown variant '{other}' (expected pvqa|vqa|pqa|qa)"),
        }
    }
}

/// `linear`, `annealer`, `continuous:M`, or `qaoa:P`.
pub fn parse_schedule(s: &str) -> Result<ScheduleFamily> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    match (kind.to_ascii_lowercase().as_str(), arg) {
        ("linear", None) => Ok(ScheduleFamily::Linear),
        ("annealer", None) => Ok(ScheduleFamily::AnnealerPiecewise),
        ("continuous", arg) => {
            let m = arg
                .unwrap_or("100")
                .parse()
                .context("continuous sub-interval count")?;
            if m < 2 {
                bail!("continuous schedule needs at least 2 sub-intervals");
            }
            Ok(ScheduleFamily::Continuous { m })
        }
        ("qaoa", arg) => {
            let p = arg.unwrap_or("1").parse().context("qaoa layer count")?;
            if p == 0 {
                bail!("qaoa schedule needs at least 1 layer");
            }
            Ok(ScheduleFamily::Qaoa { p })
        }
        _ => bail!("unknown schedule '{s}' (expected linear|annealer|continuous[:M]|qaoa[:P])"),
    }
}

/// `none`, `powell[:ITERS]`, `grid[:RES]`, or `gd[:ITERS]`.
pub fn parse_optimizer(s: &str) -> Result<OptimizerSpec> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (s, None),
    };
    match kind.to_ascii_lowercase().as_str() {
        "none" => Ok(OptimizerSpec::None),
        "powell" => Ok(OptimizerSpec::Powell {
            max_iter: arg
                .unwrap_or("10")
                .parse()
                .context("powell iteration budget")?,
        }),
        "grid" => Ok(OptimizerSpec::GridSearch {
            resolution: arg.unwrap_or("0.1").parse().context("grid resolution")?,
        }),
        "gd" => Ok(OptimizerSpec::GradientDescent {
            max_iter: arg
                .unwrap_or("25")
                .parse()
                .context("gradient-descent iteration budget")?,
        }),
        _ => bail!("unknown optimizer '{s}' (expected none|powell[:N]|grid[:RES]|gd[:N])"),
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: Option<PathBuf>,
    pub variant: Option<Variant>,
    pub schedule: Option<ScheduleFamily>,
    pub horizon: Option<f64>,
    pub optimizer: Option<OptimizerSpec>,
    pub mode: Option<Mode>,
    pub penalty: Option<Penalty>,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub trace: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Field-wise override: values in `flags` win.
    pub fn merged_with(self, flags: RunConfig) -> RunConfig {
        RunConfig {
            instance: flags.instance.or(self.instance),
            variant: flags.variant.or(self.variant),
            schedule: flags.schedule.or(self.schedule),
            horizon: flags.horizon.or(self.horizon),
            optimizer: flags.optimizer.or(self.optimizer),
            mode: flags.mode.or(self.mode),
            penalty: flags.penalty.or(self.penalty),
            dt: flags.dt.or(self.dt),
            out: flags.out.or(self.out),
            trace: flags.trace.or(self.trace),
        }
    }

    /// Fills defaults and produces the typed spec plus run options.
    pub fn resolve(self) -> Result<ResolvedRun> {
        let instance = match self.instance {
            Some(p) => p,
            None => bail!("no instance file given (flag --instance or config field)"),
        };
        let variant = self.variant.unwrap_or(Variant::PVqa);
        let schedule = self.schedule.unwrap_or(ScheduleFamily::Linear);
        let horizon = self.horizon.unwrap_or(1.0);
        let optimizer = self
            .optimizer
            .unwrap_or_else(|| default_optimizer(variant, &schedule));
        let spec = VariantSpec {
            variant,
            schedule,
            horizon,
            optimizer,
            mode: self.mode.unwrap_or(Mode::Exact),
        };
        Ok(ResolvedRun {
            instance,
            spec,
            penalty: self.penalty.unwrap_or(Penalty::AUTO),
            dt: self.dt,
            out: self.out,
            trace: self.trace.unwrap_or(false),
        })
    }
}

/// Optimizer used when none is configured: Powell with the conventional
/// iteration budgets, gradient descent for the continuous family, nothing
/// for the fixed-path variants.
pub fn default_optimizer(variant: Variant, schedule: &ScheduleFamily) -> OptimizerSpec {
    if !variant.variational() {
        return OptimizerSpec::None;
    }
    match schedule {
        ScheduleFamily::Continuous { .. } => OptimizerSpec::GradientDescent { max_iter: 25 },
        ScheduleFamily::Qaoa { p } => OptimizerSpec::Powell { max_iter: 10 * p },
        _ => OptimizerSpec::Powell { max_iter: 10 },
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub instance: PathBuf,
    pub spec: VariantSpec,
    pub penalty: Penalty,
    pub dt: Option<f64>,
    pub out: Option<PathBuf>,
    pub trace: bool,
}
