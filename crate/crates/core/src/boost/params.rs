use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boosting hyperparameters. Defaults reproduce the published two- and
/// three-class configuration: 100 rounds, eta 0.44, gamma 0, depth 6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub num_rounds: usize,
    /// Shrinkage applied to every tree's output.
    pub eta: f64,
    /// Complexity cost per added leaf.
    pub gamma: f64,
    /// L2 penalty on leaf weights.
    pub lambda: f64,
    pub max_depth: usize,
    /// Minimum hessian sum in each child of a split.
    pub min_child_weight: f64,
    /// A split must gain strictly more than this.
    #[serde(skip, default = "default_min_gain_eps")]
    pub min_gain_eps: f64,
}

fn default_min_gain_eps() -> f64 {
    1e-12
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            num_rounds: 100,
            eta: 0.44,
            gamma: 0.0,
            lambda: 1.0,
            max_depth: 6,
            min_child_weight: 1.0,
            min_gain_eps: default_min_gain_eps(),
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.num_rounds < 1 {
            return fail(format!("rounds must be >= 1, got {}", self.num_rounds));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if self.max_depth < 1 {
            return fail(format!("max-depth must be >= 1, got {}", self.max_depth));
        }
        if !(self.min_child_weight >= 0.0 && self.min_child_weight.is_finite()) {
            return fail(format!(
                "min-child-weight must be >= 0, got {}",
                self.min_child_weight
            ));
        }
        if !(self.min_gain_eps > 0.0 && self.min_gain_eps.is_finite()) {
            return fail(format!(
                "min-gain-eps must be > 0, got {}",
                self.min_gain_eps
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    BinaryLogistic,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub n_classes: usize,
}

impl ObjectiveSpec {
    pub fn new(kind: ObjectiveKind, n_classes: usize) -> Result<Self> {
        let spec = ObjectiveSpec { kind, n_classes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn binary() -> Self {
        ObjectiveSpec {
            kind: ObjectiveKind::BinaryLogistic,
            n_classes: 2,
        }
    }

    /// Logistic for two classes, softmax above that.
    pub fn for_classes(n_classes: usize) -> Result<Self> {
        match n_classes {
            2 => Ok(Self::binary()),
            n => Self::new(ObjectiveKind::Softmax, n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.n_classes) {
            (ObjectiveKind::BinaryLogistic, 2) => Ok(()),
            (ObjectiveKind::Softmax, n) if n >= 3 => Ok(()),
            (kind, n) => Err(Error::Config(format!(
                "objective {kind:?} is incompatible with {n} classes"
            ))),
        }
    }

    /// Trees per boosting round.
    pub fn group_size(&self) -> usize {
        match self.kind {
            ObjectiveKind::BinaryLogistic => 1,
            ObjectiveKind::Softmax => self.n_classes,
        }
    }
}
