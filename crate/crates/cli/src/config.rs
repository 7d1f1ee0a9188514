//! Run configuration: a TOML file with key = value entries under section
//! headers fully determines a run; command-line flags override individual
//! fields. Every numeric field is validated against the library
//! preconditions before any computation starts.

use anyhow::{anyhow, bail, Context, Result};
use fracgraph::fraccalc::FracOrder;
use fracgraph::graphmodel::{
    build_loop, build_star, build_tree, LoopWeights, MetricGraph, TreeLengths, TreeWeights,
};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub topology: String,
    pub alpha: f64,
    #[serde(default)]
    pub grid: GridConfig,
    pub star: Option<StarConfig>,
    pub tree: Option<TreeConfig>,
    #[serde(rename = "loop")]
    pub loop_: Option<LoopConfig>,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub solve: SolveConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub grading: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n: 2048,
            grading: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarConfig {
    pub lengths: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeConfig {
    /// Edge lengths keyed by the index strings "1", "11", ..., "122".
    pub lengths: BTreeMap<String, f64>,
    pub weights: TreeWeightsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeWeightsConfig {
    pub n1: [f64; 3],
    pub n11: [f64; 3],
    pub n12: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    pub lengths: [f64; 4],
    pub weights: LoopWeightsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopWeightsConfig {
    pub v1: [f64; 3],
    pub v2: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            tol: 1e-3,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub k1: f64,
    pub b1: f64,
    pub c1: f64,
    #[serde(default)]
    pub strict: bool,
    #[serde(default = "default_solve_tol")]
    pub tol: f64,
}

fn default_solve_tol() -> f64 {
    1e-2
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            k1: 1.0,
            b1: 1.0,
            c1: 0.0,
            strict: false,
            tol: default_solve_tol(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let config: RunConfig = toml::from_str(&text)
            .with_context(|| format!("cannot parse config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    /// Checks every field against the module preconditions so violations
    /// surface as configuration errors before any computation starts.
    pub fn validate(&self) -> Result<()> {
        FracOrder::new(self.alpha).map_err(|e| anyhow!("{e}"))?;
        if self.grid.n < 8 {
            bail!("grid.n must be at least 8, got {}", self.grid.n);
        }
        if !(self.grid.grading >= 1.0 && self.grid.grading.is_finite()) {
            bail!("grid.grading must be >= 1, got {}", self.grid.grading);
        }
        if self.verify.tol.is_nan()
            || self.verify.tol <= 0.0
            || self.solve.tol.is_nan()
            || self.solve.tol <= 0.0
        {
            bail!("tolerances must be positive");
        }
        if self.verify.trials == 0 {
            bail!("verify.trials must be positive");
        }
        match self.topology.as_str() {
            "star" => {
                let star = self
                    .star
                    .as_ref()
                    .ok_or_else(|| anyhow!("topology = \"star\" needs a [star] section"))?;
                if star.lengths.len() < 2 || star.lengths.len() != star.weights.len() {
                    bail!(
                        "star needs matching lengths/weights with at least 2 bonds (got {} and {})",
                        star.lengths.len(),
                        star.weights.len()
                    );
                }
                if star.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                    bail!("star lengths must be positive");
                }
                if star.weights.iter().any(|w| !(w.is_finite() && *w != 0.0)) {
                    bail!("star weights must be real nonzero constants");
                }
            }
            "tree" => {
                let tree = self
                    .tree
                    .as_ref()
                    .ok_or_else(|| anyhow!("topology = \"tree\" needs a [tree] section"))?;
                TreeLengths::from_map(&tree.lengths).map_err(|e| anyhow!("{e}"))?;
                for (name, w) in [
                    ("n1", &tree.weights.n1),
                    ("n11", &tree.weights.n11),
                    ("n12", &tree.weights.n12),
                ] {
                    if w.iter().any(|w| !(w.is_finite() && *w != 0.0)) {
                        bail!("tree weights at {name} must be real nonzero constants");
                    }
                }
            }
            "loop" => {
                let lp = self
                    .loop_
                    .as_ref()
                    .ok_or_else(|| anyhow!("topology = \"loop\" needs a [loop] section"))?;
                if lp.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
                    bail!("loop lengths must be positive");
                }
                for (name, w) in [("v1", &lp.weights.v1), ("v2", &lp.weights.v2)] {
                    if w.iter().any(|w| !(w.is_finite() && *w != 0.0)) {
                        bail!("loop weights at {name} must be real nonzero constants");
                    }
                }
            }
            other => bail!("unknown topology '{other}' (expected star, tree or loop)"),
        }
        if self.topology == "star" && !(self.solve.k1.is_finite()) {
            bail!("solve.k1 must be finite");
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<MetricGraph> {
        let order = FracOrder::new(self.alpha).map_err(|e| anyhow!("{e}"))?;
        let graph = match self.topology.as_str() {
            "star" => {
                let star = self.star.as_ref().expect("validated");
                build_star(star.lengths.len(), &star.lengths, &star.weights, order)
            }
            "tree" => {
                let tree = self.tree.as_ref().expect("validated");
                let lengths = TreeLengths::from_map(&tree.lengths).map_err(|e| anyhow!("{e}"))?;
                let weights = TreeWeights {
                    at_n1: tree.weights.n1,
                    at_n11: tree.weights.n11,
                    at_n12: tree.weights.n12,
                };
                build_tree(&lengths, &weights, order)
            }
            "loop" => {
                let lp = self.loop_.as_ref().expect("validated");
                let weights = LoopWeights {
                    at_v1: lp.weights.v1,
                    at_v2: lp.weights.v2,
                };
                build_loop(&lp.lengths, &weights, order)
            }
            _ => unreachable!("validated"),
        };
        graph.map_err(|e| anyhow!("{e}"))
    }
}
