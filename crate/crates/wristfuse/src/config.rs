//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! win, and command-line overrides are applied after the file. Recognised
//! keys:
//!
//! | key | value |
//! |-----|-------|
//! | `problem` | `3class` or `2class` |
//! | `delta` | real in [0, 1] |
//! | `fusion` | `kalman`, `soft`, `hard`, `single` |
//! | `k` | branches kept, 1 to 5 |
//! | `seed` | unsigned integer |
//! | `kalman.x0`, `kalman.gamma` | comma-separated reals, one per class |
//! | `kalman.p0`, `kalman.q`, `kalman.noise_scale`, `kalman.epsilon` | real |
//! | `cost.acc`, `cost.bvp`, `cost.eda`, `cost.temp` | extraction cost |
//! | `cost.gate` | ACC extraction plus gate inference |
//! | `cost.classifier.<KIND>` | every branch using that kind, e.g. `cost.classifier.RF` |
//! | `cost.classifier.<B#-KIND>` | one branch classifier, e.g. `cost.classifier.B3-RF` |
//! | `filter.acc` .. `filter.temp` | `kind:order:c1[,c2]`, e.g. `butterworth-bandpass:3:0.7,3.7` |
//! | `tree.min_samples_leaf`, `tree.max_depth` | integer (`none` for unlimited depth) |
//! | `forest.n_trees`, `forest.min_samples_leaf` | integer |
//! | `boost.rounds`, `knn.k` | integer |
//! | `lda.ridge` | real |
//!
//! `problem` is resolved first so problem-dependent defaults (delta and the
//! Kalman parameters) come from the right problem size.

use std::fs;
use std::path::Path;

use wristfuse_core::classifiers::ClassifierKind;
use wristfuse_core::eval::{default_delta, PipelineConfig};
use wristfuse_core::fusion::KalmanConfig;
use wristfuse_core::gating::BranchSpec;
use wristfuse_core::preprocess::FilterSpec;
use wristfuse_core::{Modality, Problem};

use crate::error::{AppError, Result};

/// Ordered key/value assignments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    entries: Vec<(String, String)>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Settings::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| AppError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            s.set(k.trim(), v.trim());
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(AppError::io(path))?;
        Self::parse(&text).map_err(|e| AppError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Parses a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| AppError::Usage(format!("override '{pair}' is not key=value")))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn extend(&mut self, other: &Settings) {
        self.entries.extend(other.entries.iter().cloned());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().rev().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Builds a validated pipeline configuration.
    pub fn to_pipeline(&self) -> Result<PipelineConfig> {
        let problem = match self.get("problem") {
            Some(p) => p.parse::<Problem>()?,
            None => Problem::ThreeClass,
        };
        let mut cfg = PipelineConfig::for_problem(problem);
        cfg.delta = default_delta(problem);
        for (key, value) in &self.entries {
            apply(&mut cfg, key, value).map_err(|e| AppError::Usage(format!("{key} = {value}: {e}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn real(v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| AppError::Usage(format!("'{v}' is not a number")))
}

fn int(v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| AppError::Usage(format!("'{v}' is not a non-negative integer")))
}

fn reals(v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| real(x.trim())).collect()
}

fn modality(key: &str) -> Result<Modality> {
    key.parse::<Modality>().map_err(AppError::from)
}

fn apply(cfg: &mut PipelineConfig, key: &str, value: &str) -> Result<()> {
    let k: &mut KalmanConfig = &mut cfg.kalman;
    match key {
        "problem" => {}
        "delta" => cfg.delta = real(value)?,
        "fusion" => cfg.fusion = value.parse()?,
        "k" => cfg.k = int(value)?,
        "seed" => cfg.hp.seed = value.parse().map_err(|_| AppError::Usage(format!("'{value}' is not a seed")))?,
        "kalman.x0" => k.x0 = reals(value)?,
        "kalman.gamma" => k.gamma = reals(value)?,
        "kalman.p0" => k.p0 = real(value)?,
        "kalman.q" => k.q = real(value)?,
        "kalman.noise_scale" => k.noise_scale = real(value)?,
        "kalman.epsilon" => k.epsilon = real(value)?,
        "cost.gate" => cfg.costs.gate = real(value)?,
        "tree.min_samples_leaf" => cfg.hp.tree.min_samples_leaf = int(value)?,
        "tree.max_depth" => {
            cfg.hp.tree.max_depth = match value {
                "none" => None,
                v => Some(int(v)?),
            }
        }
        "forest.n_trees" => cfg.hp.forest.n_trees = int(value)?,
        "forest.min_samples_leaf" => cfg.hp.forest.min_samples_leaf = int(value)?,
        "boost.rounds" => cfg.hp.boost.rounds = int(value)?,
        "knn.k" => cfg.hp.knn.k = int(value)?,
        "lda.ridge" => cfg.hp.lda.ridge = real(value)?,
        _ => {
            if let Some(target) = key.strip_prefix("cost.classifier.") {
                let cost = real(value)?;
                if let Ok(kind) = target.parse::<ClassifierKind>() {
                    for (spec, c) in cfg.costs.classifier.iter_mut() {
                        if spec.kind == kind {
                            *c = cost;
                        }
                    }
                } else {
                    let spec: BranchSpec = target.parse()?;
                    cfg.costs.classifier.insert(spec, cost);
                }
            } else if let Some(m) = key.strip_prefix("cost.") {
                cfg.costs.extraction[modality(m)?.index()] = real(value)?;
            } else if let Some(m) = key.strip_prefix("filter.") {
                let spec: FilterSpec = value.parse()?;
                cfg.filters.set(modality(m)?, spec);
            } else {
                return Err(AppError::Usage("unknown key".into()));
            }
        }
    }
    Ok(())
}

/// Cost-only settings must not touch anything else.
pub fn check_cost_file(s: &Settings) -> Result<()> {
    if let Some((k, _)) = s.entries.iter().find(|(k, _)| !k.starts_with("cost.")) {
        return Err(AppError::Usage(format!("cost file may only set cost.* keys, found '{k}'")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use wristfuse_core::eval::FusionKind;
    use wristfuse_core::gating::BranchId;

    #[test]
    fn defaults_follow_problem() {
        let cfg = Settings::parse("problem = 2class\n").unwrap().to_pipeline().unwrap();
        assert_eq!(cfg.delta, 0.1);
        assert_eq!(cfg.kalman.epsilon, 0.7);
        let cfg = Settings::default().to_pipeline().unwrap();
        assert_eq!(cfg.delta, 0.4);
    }

    #[test]
    fn keys_apply() {
        let text = "# run\nfusion = hard\ndelta=1\nkalman.epsilon = 0.5\ncost.bvp = 9\ncost.classifier.RF = 3\ncost.classifier.B3-RF = 4\nfilter.eda = butterworth-lowpass:2:0.5\ntree.max_depth = 4\n";
        let cfg = Settings::parse(text).unwrap().to_pipeline().unwrap();
        assert_eq!(cfg.fusion, FusionKind::Hard);
        assert_eq!(cfg.delta, 1.0);
        assert_eq!(cfg.kalman.epsilon, 0.5);
        assert_eq!(cfg.costs.extraction[Modality::Bvp.index()], 9.0);
        let rf = |id| BranchSpec::new(id, ClassifierKind::RandomForest);
        assert_eq!(cfg.costs.classifier[&rf(BranchId::B1)], 3.0);
        assert_eq!(cfg.costs.classifier[&rf(BranchId::B3)], 4.0);
        assert_eq!(cfg.filters.spec(Modality::Eda).order, 2);
        assert_eq!(cfg.hp.tree.max_depth, Some(4));
    }

    #[test]
    fn later_assignments_win() {
        let mut s = Settings::parse("delta = 0.2").unwrap();
        s.set_pair("delta=0.3").unwrap();
        assert_eq!(s.to_pipeline().unwrap().delta, 0.3);
    }

    #[test]
    fn bad_input_is_a_usage_error() {
        for text in ["delta = 2", "bogus = 1", "kalman.gamma = 1,1", "no equals", "k = -1", "cost.eeg = 1"] {
            let r = Settings::parse(text).and_then(|s| s.to_pipeline());
            let e = r.unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
    }

    #[test]
    fn cost_file_restricted() {
        assert!(check_cost_file(&Settings::parse("cost.acc = 1").unwrap()).is_ok());
        assert!(check_cost_file(&Settings::parse("delta = 1").unwrap()).is_err());
    }
}
