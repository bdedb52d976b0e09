//! Run configuration: one JSON document with a `spacetime` block, exactly one
//! `command` block, and an optional `output` block.
//!
//! The spacetime block is kept as raw JSON in [`RunConfig`] because sweeps
//! substitute into it before validation; [`build_spacetime`] parses and
//! instantiates it on demand. Every validation message names the config key
//! at fault.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use gts_core::exprfield::parse_expression;
use gts_core::spacetime::{BaseMetric, SpacetimeSpec, Zoo};
use gts_core::ExprAst;

use crate::error::{keyed, validation, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Raw spacetime block; validated by [`build_spacetime`].
    pub spacetime: Value,
    pub command: CommandBlock,
    pub output: OutputBlock,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Artifact directory, default `out`.
    pub dir: Option<String>,
    /// Subset of `{"csv", "json"}`; default both.
    pub formats: Option<Vec<String>>,
}

impl OutputBlock {
    pub fn wants(&self, format: &str) -> bool {
        match &self.formats {
            None => true,
            Some(list) => list.iter().any(|f| f == format),
        }
    }
}

#[derive(Debug, Clone)]
pub enum CommandBlock {
    Describe(DescribeCmd),
    Connect(ConnectCmd),
    Shoot(ShootCmd),
    Probe(ProbeCmd),
    Check(CheckCmd),
    Sweep(SweepCmd),
}

impl CommandBlock {
    pub fn name(&self) -> &'static str {
        match self {
            CommandBlock::Describe(_) => "describe",
            CommandBlock::Connect(_) => "connect",
            CommandBlock::Shoot(_) => "shoot",
            CommandBlock::Probe(_) => "probe",
            CommandBlock::Check(_) => "check",
            CommandBlock::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescribeCmd {
    /// Sample point; default origin.
    pub at: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventCfg {
    pub x: Vec<f64>,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub t: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectCmd {
    pub from: EventCfg,
    pub to: EventCfg,
    pub segments: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub ell_floor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepCfg {
    /// `"fixed"` or `"adaptive"`.
    #[serde(rename = "type")]
    pub kind: String,
    pub h: Option<f64>,
    pub h0: Option<f64>,
    pub tol: Option<f64>,
    pub min_step: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShootCmd {
    pub x: Vec<f64>,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub t: f64,
    pub xdot: Vec<f64>,
    pub ydot: f64,
    pub tdot: f64,
    pub s_max: Option<f64>,
    pub step: Option<StepCfg>,
    pub max_steps: Option<usize>,
    pub max_speed: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeCmd {
    pub x0: Vec<f64>,
    pub lambda: f64,
    pub k: f64,
    pub trajectories: Option<usize>,
    pub seed: Option<u64>,
    pub speed_scale: Option<f64>,
    pub s_max: Option<f64>,
    pub step: Option<StepCfg>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionCfg {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
    pub samples_per_shell: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessCfg {
    pub lambda: f64,
    pub k: f64,
    /// Base point; default region center.
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckCmd {
    /// One of `all`, `growth`, `h1`, `h2`, `h3`, `h3prime`, `s2`, `c2`,
    /// `ell_negative`; default `all`.
    pub condition: Option<String>,
    pub region: RegionCfg,
    pub witness: Option<WitnessCfg>,
    pub linear_witness: Option<WitnessCfg>,
    /// Expression to sweep for `condition = "growth"`.
    pub field: Option<String>,
    /// Alternative to `field`: check one of the spacetime coefficients
    /// `"a"`, `"b"`, `"c"`.
    pub coefficient: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCmd {
    /// Dot path into the cell config, e.g. `spacetime.params.omega` or
    /// `command.k`.
    pub parameter: String,
    pub values: Vec<Value>,
    /// Command block executed per cell (any command except `sweep`).
    pub run: Value,
    pub jobs: Option<usize>,
}

pub fn parse_config(doc: &Value) -> Result<RunConfig> {
    let obj = doc
        .as_object()
        .ok_or_else(|| validation("config: top level must be a JSON object"))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "spacetime" | "command" | "output") {
            return Err(validation(format!("config: unknown key '{key}'")));
        }
    }
    let spacetime = obj
        .get("spacetime")
        .ok_or_else(|| validation("spacetime: block is required"))?
        .clone();
    let command = parse_command(
        obj.get("command")
            .ok_or_else(|| validation("command: block is required"))?,
    )?;
    let output = match obj.get("output") {
        None => OutputBlock::default(),
        Some(v) => serde_json::from_value(v.clone())
            .map_err(|e| validation(format!("output: {e}")))?,
    };
    if let Some(formats) = &output.formats {
        for f in formats {
            if f != "csv" && f != "json" {
                return Err(validation(format!("output.formats: unknown format '{f}'")));
            }
        }
    }
    Ok(RunConfig { spacetime, command, output })
}

pub fn parse_command(v: &Value) -> Result<CommandBlock> {
    let obj = v
        .as_object()
        .ok_or_else(|| validation("command: must be a JSON object"))?;
    let name = obj
        .get("name")
        .and_then(Value::as_str)
        .ok_or_else(|| validation("command.name: required string"))?;
    let mut rest = obj.clone();
    rest.remove("name");
    let rest = Value::Object(rest);
    let wrap = |e: serde_json::Error| validation(format!("command: {e}"));
    match name {
        "describe" => Ok(CommandBlock::Describe(serde_json::from_value(rest).map_err(wrap)?)),
        "connect" => Ok(CommandBlock::Connect(serde_json::from_value(rest).map_err(wrap)?)),
        "shoot" => Ok(CommandBlock::Shoot(serde_json::from_value(rest).map_err(wrap)?)),
        "probe" => Ok(CommandBlock::Probe(serde_json::from_value(rest).map_err(wrap)?)),
        "check" => Ok(CommandBlock::Check(serde_json::from_value(rest).map_err(wrap)?)),
        "sweep" => Ok(CommandBlock::Sweep(serde_json::from_value(rest).map_err(wrap)?)),
        other => Err(validation(format!("command.name: unknown command '{other}'"))),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpacetimeBlock {
    zoo: String,
    /// Base dimension for expression parsing; default 2, fixed at 2 for
    /// `godel`.
    dim: Option<usize>,
    /// Scalar parameters (currently just `omega` for `godel`).
    #[serde(default)]
    params: BTreeMap<String, f64>,
    /// Coefficient expressions, keyed per zoo entry.
    #[serde(default)]
    fields: BTreeMap<String, String>,
    /// Label for `custom` spacetimes.
    label: Option<String>,
    /// Custom base metric, row-major expression entries; default Euclidean.
    base: Option<BaseCfg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct BaseCfg {
    entries: Vec<String>,
}

/// Parse and instantiate the spacetime block. Returns the spec and the base
/// dimension it was built with.
pub fn build_spacetime(v: &Value) -> Result<SpacetimeSpec> {
    let block: SpacetimeBlock = serde_json::from_value(v.clone())
        .map_err(|e| validation(format!("spacetime: {e}")))?;
    let dim = block.dim.unwrap_or(2);
    if dim == 0 {
        return Err(validation("spacetime.dim: must be at least 1"));
    }

    let expect = |zoo: &str, params: &[&str], fields: &[&str]| -> Result<()> {
        for key in block.params.keys() {
            if !params.contains(&key.as_str()) {
                return Err(validation(format!(
                    "spacetime.params.{key}: not a parameter of zoo '{zoo}'"
                )));
            }
        }
        for key in block.fields.keys() {
            if !fields.contains(&key.as_str()) {
                return Err(validation(format!(
                    "spacetime.fields.{key}: not a field of zoo '{zoo}'"
                )));
            }
        }
        Ok(())
    };
    let param = |name: &str| -> Result<f64> {
        block.params.get(name).copied().ok_or_else(|| {
            validation(format!("spacetime.params.{name}: required by zoo '{}'", block.zoo))
        })
    };
    let field = |name: &str| -> Result<ExprAst> {
        let src = block.fields.get(name).ok_or_else(|| {
            validation(format!("spacetime.fields.{name}: required by zoo '{}'", block.zoo))
        })?;
        parse_expression(src, dim).map_err(|e| keyed(&format!("spacetime.fields.{name}"), e))
    };

    if block.label.is_some() && block.zoo != "custom" {
        return Err(validation("spacetime.label: only used by zoo 'custom'"));
    }
    if block.base.is_some() && block.zoo != "custom" {
        return Err(validation("spacetime.base: only used by zoo 'custom'"));
    }

    let zoo = match block.zoo.as_str() {
        "godel" => {
            expect("godel", &["omega"], &[])?;
            if block.dim.is_some() && dim != 2 {
                return Err(validation("spacetime.dim: godel has a two-dimensional base"));
            }
            Zoo::Godel { omega: param("omega")? }
        }
        "godel_synge" => {
            expect("godel_synge", &[], &["g", "h"])?;
            Zoo::GodelSynge { g: field("g")?, h: field("h")? }
        }
        "kerr_schild" => {
            expect("kerr_schild", &[], &["v"])?;
            Zoo::KerrSchild { v: field("v")? }
        }
        "stationary" => {
            expect("stationary", &[], &["delta", "beta"])?;
            Zoo::Stationary { delta: field("delta")?, beta: field("beta")? }
        }
        "static" => {
            expect("static", &[], &["beta"])?;
            Zoo::Static { beta: field("beta")? }
        }
        "pfw" => {
            expect("pfw", &[], &["h0"])?;
            Zoo::PlaneFrontedWave { h0: field("h0")? }
        }
        "custom" => {
            expect("custom", &[], &["a", "b", "c"])?;
            let base = match &block.base {
                None => BaseMetric::Euclidean,
                Some(cfg) => {
                    if cfg.entries.len() != dim * dim {
                        return Err(validation(format!(
                            "spacetime.base.entries: expected {} row-major entries, got {}",
                            dim * dim,
                            cfg.entries.len()
                        )));
                    }
                    let mut entries = Vec::with_capacity(cfg.entries.len());
                    for (i, src) in cfg.entries.iter().enumerate() {
                        entries.push(parse_expression(src, dim).map_err(|e| {
                            keyed(&format!("spacetime.base.entries[{i}]"), e)
                        })?);
                    }
                    BaseMetric::field(entries).map_err(|e| keyed("spacetime.base", e))?
                }
            };
            Zoo::Custom {
                label: block.label.clone().unwrap_or_else(|| "custom".into()),
                a: field("a")?,
                b: field("b")?,
                c: field("c")?,
                base,
            }
        }
        other => {
            return Err(validation(format!("spacetime.zoo: unknown zoo '{other}'")));
        }
    };
    SpacetimeSpec::builtin(zoo).map_err(|e| keyed("spacetime", e))
}
